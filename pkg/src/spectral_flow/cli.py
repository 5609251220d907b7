"""Config-driven experiment runner.

A run is described by one JSON document::

    {"kind": "LinearFlow", "parameters": {"n_max": 16, "alphas": "harmonic"},
     "output_dir": "runs/lin", "seed": 0}

``parse_config`` validates it and fills defaults; ``run`` dispatches to the
library, writes CSV/JSON artifacts and a ``manifest.json`` listing them.
"""

from __future__ import annotations

import argparse
import copy
import json
import math
import platform
import sys
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .diagnostics import (
    DEFAULT_EPSILON,
    entropy_scaling_curve,
    fit_decay_rate,
    write_entropy_csv,
    _check_scaling_args,
)
from .eigenbasis import DEFAULT_N_MAX, EigenBasis, Normalization, SpectralState, make_constants
from .errors import (
    ConfigError,
    DivergenceError,
    InsufficientDataError,
    RegimeError,
    SpectralFlowError,
)
from .flow import (
    STABILITY_FACTOR,
    FlowParams,
    PhasePoint,
    RhsKind,
    evolve,
    gronwall_report,
    hamiltonian,
    leapfrog,
    write_trajectory_csv,
)
from .overlap import TensorSource, build_tensor, write_tensor_csv
from .weylgeom import (
    SpectrumMeta,
    estimate_dimension,
    eta_partial,
    heat_trace_exponent,
    completed_heat_trace,
    perturb_spectrum,
    read_spectrum,
    synth_weyl_spectrum,
)

__all__ = ["ExperimentConfig", "RunManifest", "parse_config", "preset_alphas", "run", "main", "KINDS"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGENCE = 3
EXIT_DATA = 4

REQUIRED = object()

_FLOW_KEYS = {
    "n_max": (int, DEFAULT_N_MAX),
    "alphas": ((str, list), "harmonic"),
    "alpha_scale": (float, 1.0),
    "dt": (float, 1e-3),
    "t_end": (float, 1.0),
    "record_every": (int, 1),
    # initial deviations: explicit list, or amplitude * (1 + n)^(-decay)
    "initial": ((list, type(None)), None),
    "initial_amplitude": (float, 0.1),
    "initial_decay": (float, 2.0),
    "epsilon": (float, DEFAULT_EPSILON),
    "normalization": (str, Normalization.ORTHONORMAL.value),
    "c": (float, 1.0),
    "hbar": (float, 1.0),
}

_SCHEMAS = {
    "LinearFlow": dict(_FLOW_KEYS),
    "NonlinearFlow": {
        **_FLOW_KEYS,
        "lambda": (float, 0.01),
        "tensor": (str, TensorSource.CLOSED_FORM.value),
        "variant": (str, RhsKind.NONLINEAR.value),
    },
    "HamiltonianFlow": {
        "n_max": (int, DEFAULT_N_MAX),
        "alphas": ((str, list), "harmonic"),
        "alpha_scale": (float, 1.0),
        "dt": (float, 1e-3),
        "n_steps": (int, 1000),
        "record_every": (int, 1),
        "initial": ((list, type(None)), None),
        "initial_amplitude": (float, 0.1),
        "initial_decay": (float, 2.0),
        "momenta": ((list, type(None)), None),
    },
    "OverlapTable": {
        "n_max": (int, DEFAULT_N_MAX),
        "tensor": (str, TensorSource.CLOSED_FORM.value),
        "lambda": (float, 1.0),
        "normalization": (str, Normalization.ORTHONORMAL.value),
        "c": (float, 1.0),
        "hbar": (float, 1.0),
        "p": (float, 3.0),
        "c_bound": (float, 1.0),
    },
    "EntropyScaling": {
        "d": (int, REQUIRED),
        "beta": (float, REQUIRED),
        "c_rate": (float, 1.0),
        "tau_min": (float, 1e-5),
        "tau_max": (float, 1e-3),
        "n_tau": (int, 25),
    },
    "DimensionEstimate": {
        "spectrum_path": ((str, type(None)), None),
        "d": ((int, type(None)), None),
        "kappa": (float, 1.0),
        "n_count": (int, 100_000),
        "noise": (float, 0.0),
        "edge_fraction": (float, 0.1),
    },
    "HeatTrace": {
        "spectrum_path": ((str, type(None)), None),
        "d": ((int, type(None)), None),
        "kappa": (float, 1.0),
        "n_count": (int, 1_000_000),
        "t_min": (float, 1e-4),
        "t_max": (float, 1e-3),
        "n_t": (int, 10),
    },
    "EtaSum": {
        "spectrum_path": ((str, type(None)), None),
        "values": ((list, type(None)), None),
        "d": ((int, type(None)), None),
        "kappa": (float, 1.0),
        "n_count": (int, 1000),
        "s": (float, REQUIRED),
        "n_terms": ((int, type(None)), None),
    },
}

KINDS = tuple(_SCHEMAS)

SUBCOMMAND_KINDS = {
    "flow": ("LinearFlow", "NonlinearFlow"),
    "hamiltonian": ("HamiltonianFlow",),
    "overlap": ("OverlapTable",),
    "entropy": ("EntropyScaling",),
    "weyl": ("DimensionEstimate",),
    "heat": ("HeatTrace",),
    "eta": ("EtaSum",),
}


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    parameters: dict
    output_dir: str = "."
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "parameters": copy.deepcopy(self.parameters),
            "output_dir": self.output_dir,
            "seed": self.seed,
        }


@dataclass
class RunManifest:
    config_echo: ExperimentConfig
    artifact_paths: list = field(default_factory=list)
    wall_time: float = 0.0
    versions: str = ""

    def to_dict(self) -> dict:
        return {
            "config_echo": self.config_echo.to_dict(),
            "artifact_paths": [str(p) for p in self.artifact_paths],
            "wall_time": self.wall_time,
            "versions": self.versions,
        }


def versions_string() -> str:
    return f"spectral-flow {__version__}; numpy {np.__version__}; scipy {scipy.__version__}; python {platform.python_version()}"


def preset_alphas(name: str, n_max: int, scale: float = 1.0) -> np.ndarray:
    """Stiffness presets: uniform ``s``, harmonic ``s (n+1)``, quadratic ``s (n+1)^2``."""
    if not scale > 0:
        raise ConfigError(f"scale must be positive, got {scale!r}", "alpha_scale")
    n = np.arange(n_max + 1, dtype=float)
    if name == "uniform":
        return np.full(n.size, float(scale))
    if name == "harmonic":
        return scale * (n + 1)
    if name == "quadratic":
        return scale * (n + 1) ** 2
    raise ConfigError(f"unknown preset {name!r} (expected uniform, harmonic or quadratic)", "alphas")


def _check_type(key: str, value, types):
    types = types if isinstance(types, tuple) else (types,)
    if float in types and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    if int in types and isinstance(value, float) and value.is_integer():
        return int(value)
    if isinstance(value, bool) or not isinstance(value, types):
        names = " or ".join("null" if t is type(None) else t.__name__ for t in types)
        raise ConfigError(f"expected {names}, got {type(value).__name__}", key)
    return value


def _numeric_list(key: str, value, length: int | None = None) -> list:
    try:
        arr = [float(x) for x in value]
    except (TypeError, ValueError):
        raise ConfigError("expected a list of numbers", key) from None
    if length is not None and len(arr) != length:
        raise ConfigError(f"expected {length} entries, got {len(arr)}", key)
    if not all(math.isfinite(x) for x in arr):
        raise ConfigError("entries must be finite", key)
    return arr


def _apply_schema(kind: str, raw: dict) -> dict:
    schema = _SCHEMAS[kind]
    for key in raw:
        if key not in schema:
            raise ConfigError(f"unknown parameter for {kind}", key)
    params = {}
    for key, (types, default) in schema.items():
        if key in raw:
            params[key] = _check_type(key, raw[key], types)
        elif default is REQUIRED:
            raise ConfigError(f"required for {kind}", key)
        else:
            params[key] = copy.deepcopy(default)
    return params


def _validate_flow(kind: str, p: dict) -> None:
    if p["n_max"] < 0:
        raise ConfigError("must be >= 0", "n_max")
    size = p["n_max"] + 1
    if isinstance(p["alphas"], str):
        p["alphas"] = preset_alphas(p["alphas"], p["n_max"], p["alpha_scale"]).tolist()
    else:
        p["alphas"] = _numeric_list("alphas", p["alphas"], size)
    if min(p["alphas"]) <= 0:
        raise ConfigError("stiffness weights must be positive", "alphas")
    if p["initial"] is not None:
        p["initial"] = _numeric_list("initial", p["initial"], size)
    if not p["dt"] > 0:
        raise ConfigError("must be positive", "dt")
    if p["record_every"] < 1:
        raise ConfigError("must be >= 1", "record_every")
    if kind == "HamiltonianFlow":
        if p["n_steps"] < 1:
            raise ConfigError("must be >= 1", "n_steps")
        if p["momenta"] is not None:
            p["momenta"] = _numeric_list("momenta", p["momenta"], size)
        return
    limit = STABILITY_FACTOR / max(p["alphas"])
    if p["dt"] > limit * (1 + 1e-12):
        raise ConfigError(f"dt={p['dt']:g} exceeds the stability limit {limit:g} = {STABILITY_FACTOR}/max(alpha)", "dt")
    if not p["t_end"] >= 0:
        raise ConfigError("must be >= 0", "t_end")
    if not p["epsilon"] > 0:
        raise ConfigError("must be positive", "epsilon")
    _check_enum("normalization", p["normalization"], Normalization)
    if kind == "NonlinearFlow":
        _check_enum("tensor", p["tensor"], TensorSource)
        _check_enum("variant", p["variant"], RhsKind)
        if p["variant"] == RhsKind.LINEAR.value:
            raise ConfigError("use kind LinearFlow for the linear flow", "variant")
        if p["lambda"] < 0:
            raise ConfigError("must be >= 0", "lambda")


def _check_enum(key: str, value: str, enum_cls) -> None:
    allowed = [e.value for e in enum_cls]
    if value not in allowed:
        raise ConfigError(f"expected one of {allowed}, got {value!r}", key)


def _validate_spectrum_source(p: dict, need_d: bool) -> None:
    if p.get("spectrum_path") is None and p.get("values") is None:
        if p["d"] is None:
            raise ConfigError("synthetic spectrum needs a dimension (or give spectrum_path)", "d")
        if p["d"] < 1:
            raise ConfigError("must be >= 1", "d")
        if not p["kappa"] > 0:
            raise ConfigError("must be positive", "kappa")
        if p["n_count"] < 2:
            raise ConfigError("must be >= 2", "n_count")


def _validate(kind: str, p: dict) -> None:
    if kind in ("LinearFlow", "NonlinearFlow", "HamiltonianFlow"):
        _validate_flow(kind, p)
    elif kind == "OverlapTable":
        if p["n_max"] < 0:
            raise ConfigError("must be >= 0", "n_max")
        _check_enum("tensor", p["tensor"], TensorSource)
        _check_enum("normalization", p["normalization"], Normalization)
        if p["lambda"] < 0:
            raise ConfigError("must be >= 0", "lambda")
    elif kind == "EntropyScaling":
        try:
            _check_scaling_args(p["d"], p["beta"], p["c_rate"])
        except SpectralFlowError as exc:
            key = "beta" if "beta" in str(exc) else ("d" if "dimension" in str(exc) else "c_rate")
            raise ConfigError(str(exc), key) from None
        if not 0 < p["tau_min"] < p["tau_max"]:
            raise ConfigError("need 0 < tau_min < tau_max", "tau_min")
        if p["n_tau"] < 2:
            raise ConfigError("must be >= 2", "n_tau")
    elif kind == "DimensionEstimate":
        _validate_spectrum_source(p, True)
        if not 0 <= p["noise"] < 1:
            raise ConfigError("must lie in [0, 1)", "noise")
        if not 0 < p["edge_fraction"] <= 1:
            raise ConfigError("must lie in (0, 1]", "edge_fraction")
    elif kind == "HeatTrace":
        _validate_spectrum_source(p, True)
        if not 0 < p["t_min"] < p["t_max"]:
            raise ConfigError("need 0 < t_min < t_max", "t_min")
        if p["n_t"] < 2:
            raise ConfigError("must be >= 2", "n_t")
    elif kind == "EtaSum":
        if p["values"] is not None:
            p["values"] = _numeric_list("values", p["values"])
        _validate_spectrum_source(p, False)
        if p["n_terms"] is not None and p["n_terms"] < 0:
            raise ConfigError("must be >= 0", "n_terms")


def config_from_dict(doc: dict) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    for key in doc:
        if key not in ("kind", "parameters", "output_dir", "seed"):
            raise ConfigError("unknown top-level key", key)
    if "kind" not in doc:
        raise ConfigError("missing", "kind")
    kind = doc["kind"]
    if kind not in _SCHEMAS:
        raise ConfigError(f"unknown kind {kind!r}; expected one of {list(KINDS)}", "kind")
    raw = doc.get("parameters", {})
    if not isinstance(raw, dict):
        raise ConfigError("expected an object", "parameters")
    params = _apply_schema(kind, raw)
    _validate(kind, params)
    output_dir = _check_type("output_dir", doc.get("output_dir", "."), str)
    seed = _check_type("seed", doc.get("seed", 0), int)
    return ExperimentConfig(kind, params, output_dir, seed)


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate a JSON config document, applying defaults."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc}") from None
    return config_from_dict(doc)


# --- running -----------------------------------------------------------------


class _Artifacts:
    """Track files written during a run so they can be removed on failure."""

    def __init__(self, root: Path):
        self.root = root
        self.paths: list[Path] = []

    def path(self, name: str) -> Path:
        p = self.root / name
        self.paths.append(p)
        return p

    def write_json(self, name: str, obj) -> Path:
        p = self.path(name)
        p.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
        return p

    def cleanup(self) -> None:
        for p in self.paths:
            p.unlink(missing_ok=True)


def _write_rows(path: Path, header: list[str], rows) -> Path:
    with path.open("w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(repr(float(x)) if not isinstance(x, (int, np.integer)) else str(int(x)) for x in row) + "\n")
    return path


def _initial_deviations(p: dict) -> np.ndarray:
    if p["initial"] is not None:
        return np.asarray(p["initial"], dtype=float)
    n = np.arange(p["n_max"] + 1, dtype=float)
    return p["initial_amplitude"] * (1.0 + n) ** (-p["initial_decay"])


def _basis(p: dict, n_max: int) -> EigenBasis:
    return EigenBasis(make_constants(p["c"], p["hbar"]), n_max, p["normalization"])


def _run_flow(cfg: ExperimentConfig, out: _Artifacts) -> None:
    p = cfg.parameters
    coupling = None
    kind = RhsKind.LINEAR
    if cfg.kind == "NonlinearFlow":
        coupling = build_tensor(_basis(p, p["n_max"]), p["lambda"], p["tensor"])
        kind = RhsKind(p["variant"])
    params = FlowParams(np.asarray(p["alphas"]), coupling, p["dt"], p["t_end"], p["record_every"])
    traj = evolve(SpectralState.from_deviations(_initial_deviations(p)), params, kind)
    write_trajectory_csv(traj, out.path("trajectory.csv"))
    write_entropy_csv(traj, out.path("entropy.csv"), p["epsilon"])
    norms = traj.norms()
    summary = {
        "final_norm": float(norms[-1]),
        "initial_norm": float(norms[0]),
        "min_alpha": float(params.delta),
        "gronwall_max_violation": gronwall_report(traj).max_violation,
    }
    try:
        summary["fitted_rate"] = fit_decay_rate(traj)
    except InsufficientDataError:
        summary["fitted_rate"] = None
    out.write_json("summary.json", summary)


def _run_hamiltonian(cfg: ExperimentConfig, out: _Artifacts) -> None:
    p = cfg.parameters
    q0 = math.pi + _initial_deviations(p)
    p0 = np.zeros_like(q0) if p["momenta"] is None else np.asarray(p["momenta"])
    alphas = np.asarray(p["alphas"])
    times, qs, ps = leapfrog(PhasePoint(q0, p0), alphas, p["dt"], p["n_steps"], p["record_every"])
    H = np.array([hamiltonian(PhasePoint(q, pp), alphas) for q, pp in zip(qs, ps)])
    size = q0.size
    header = ["tau", "H"] + [f"C_{i}" for i in range(size)] + [f"P_{i}" for i in range(size)]
    _write_rows(out.path("hamiltonian.csv"), header, (np.concatenate([[t, h], q, pp]) for t, h, q, pp in zip(times, H, qs, ps)))
    drift = float(np.max(np.abs(H - H[0])) / H[0]) if H[0] > 0 else float(np.max(np.abs(H - H[0])))
    out.write_json("summary.json", {"H0": float(H[0]), "relative_drift": drift, "n_steps": p["n_steps"]})


def _run_overlap(cfg: ExperimentConfig, out: _Artifacts) -> None:
    p = cfg.parameters
    tensor = build_tensor(_basis(p, p["n_max"]), p["lambda"], p["tensor"], p["p"], p["c_bound"])
    write_tensor_csv(tensor, out.path("tensor.csv"))
    out.write_json("summary.json", {"rows": len(tensor.entries), "n_max": p["n_max"], "source": p["tensor"]})


def _run_entropy(cfg: ExperimentConfig, out: _Artifacts) -> None:
    p = cfg.parameters
    taus = np.geomspace(p["tau_min"], p["tau_max"], p["n_tau"])
    S = entropy_scaling_curve(p["d"], p["beta"], p["c_rate"], taus)
    _write_rows(out.path("entropy_scaling.csv"), ["tau", "entropy"], zip(taus, S))
    slope = float(np.polyfit(np.log(1.0 / taus), S, 1)[0])
    out.write_json("summary.json", {"slope": slope, "d": p["d"], "beta": p["beta"], "target": p["d"] - 1})


def _spectrum(cfg: ExperimentConfig):
    p = cfg.parameters
    if p.get("spectrum_path"):
        meta = SpectrumMeta(d=p["d"], kappa=p["kappa"]) if p["d"] is not None else None
        return read_spectrum(p["spectrum_path"], meta)
    spec = synth_weyl_spectrum(p["d"], p["kappa"], p["n_count"])
    if p.get("noise"):
        spec = perturb_spectrum(spec, p["noise"], cfg.seed)
    return spec


def _run_dimension(cfg: ExperimentConfig, out: _Artifacts) -> None:
    est = estimate_dimension(_spectrum(cfg), cfg.parameters["edge_fraction"])
    out.path("dimension.json").write_text(json.dumps(json.loads(est.to_json()), indent=2, sort_keys=True) + "\n")


def _run_heat(cfg: ExperimentConfig, out: _Artifacts) -> None:
    p = cfg.parameters
    spec = _spectrum(cfg)
    ts = np.geomspace(p["t_min"], p["t_max"], p["n_t"])
    slope = heat_trace_exponent(spec, ts)
    rows = [(t, *completed_heat_trace(spec, float(t))) for t in ts]
    _write_rows(out.path("heat_trace.csv"), ["t", "trace", "error_bound"], rows)
    out.write_json("summary.json", {"slope": slope, "expected": -p["d"] / 2 if p["d"] else None})


def _run_eta(cfg: ExperimentConfig, out: _Artifacts) -> None:
    p = cfg.parameters
    spec = np.asarray(p["values"]) if p["values"] is not None else _spectrum(cfg)
    size = len(spec)
    n_terms = size if p["n_terms"] is None else p["n_terms"]
    if n_terms > size:
        raise InsufficientDataError(f"n_terms={n_terms} exceeds spectrum length {size}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        partials = [eta_partial(spec, p["s"], k) for k in range(1, n_terms + 1)]
        final = eta_partial(spec, p["s"], n_terms)
    _write_rows(out.path("eta.csv"), ["n_terms", "eta"], ((r.n_terms, r.value) for r in partials))
    out.write_json("summary.json", {"eta": final.value, "n_terms": n_terms, "s": p["s"], "convergent": final.convergent})


_RUNNERS = {
    "LinearFlow": _run_flow,
    "NonlinearFlow": _run_flow,
    "HamiltonianFlow": _run_hamiltonian,
    "OverlapTable": _run_overlap,
    "EntropyScaling": _run_entropy,
    "DimensionEstimate": _run_dimension,
    "HeatTrace": _run_heat,
    "EtaSum": _run_eta,
}


def run(config: ExperimentConfig) -> RunManifest:
    """Execute ``config`` and write its artifacts plus ``manifest.json``.

    On any failure every file written by this run is removed and the error
    is re-raised with the config kind attached.
    """
    root = Path(config.output_dir)
    root.mkdir(parents=True, exist_ok=True)
    out = _Artifacts(root)
    start = time.perf_counter()
    try:
        _RUNNERS[config.kind](config, out)
        manifest = RunManifest(config, list(out.paths), 0.0, versions_string())
        manifest.wall_time = time.perf_counter() - start
        manifest.artifact_paths = [p.name for p in out.paths]
        man_path = out.path("manifest.json")
        man_path.write_text(json.dumps(manifest.to_dict(), indent=2, sort_keys=True) + "\n")
    except SpectralFlowError as exc:
        out.cleanup()
        exc.args = (f"[{config.kind}] {exc.args[0] if exc.args else ''}",) + exc.args[1:]
        raise
    except BaseException:
        out.cleanup()
        raise
    return manifest


# --- command line ------------------------------------------------------------


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, DivergenceError):
        return EXIT_DIVERGENCE
    if isinstance(exc, (InsufficientDataError, RegimeError)):
        return EXIT_DATA
    return EXIT_CONFIG


def _load_doc(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", "--config") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc}", "--config") from None


def _resolve(doc: dict, subcommand: str, out: str | None, seed: int | None) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    doc = dict(doc)
    allowed = SUBCOMMAND_KINDS[subcommand]
    doc.setdefault("kind", allowed[0])
    if doc["kind"] not in allowed:
        raise ConfigError(f"kind {doc['kind']!r} does not belong to subcommand {subcommand!r}", "kind")
    if out is not None:
        doc["output_dir"] = out
    if seed is not None:
        doc["seed"] = seed
    return config_from_dict(doc)


def _run_one(doc: dict, subcommand: str, out, seed, quiet: bool) -> int:
    try:
        cfg = _resolve(doc, subcommand, out, seed)
        manifest = run(cfg)
    except (SpectralFlowError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _exit_code(exc)
    if not quiet:
        print(f"{cfg.kind}: wrote {len(manifest.artifact_paths) + 1} files to {cfg.output_dir} in {manifest.wall_time:.2f}s")
    return EXIT_OK


def _batch(args) -> int:
    doc = _load_doc(args.config)
    runs = doc.get("runs") if isinstance(doc, dict) else doc
    if not isinstance(runs, list) or not runs:
        print("error: runs: batch config needs a non-empty list of runs", file=sys.stderr)
        return EXIT_CONFIG
    root = Path(args.out or (doc.get("output_dir", ".") if isinstance(doc, dict) else "."))
    jobs = []
    for i, entry in enumerate(runs):
        if not isinstance(entry, dict) or entry.get("kind") not in _SCHEMAS:
            print(f"error: runs[{i}].kind: unknown or missing kind", file=sys.stderr)
            return EXIT_CONFIG
        sub = next(s for s, kinds in SUBCOMMAND_KINDS.items() if entry["kind"] in kinds)
        out = str(root / entry.get("output_dir", f"run_{i:03d}"))
        jobs.append((entry, sub, out))
    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        codes = list(pool.map(lambda j: _run_one(j[0], j[1], j[2], args.seed, args.quiet), jobs))
    failed = [c for c in codes if c != EXIT_OK]
    return failed[0] if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spectral-flow", description="Run spectral-flow experiments from JSON configs.")
    parser.add_argument("--version", action="version", version=versions_string())
    sub = parser.add_subparsers(dest="command", required=True)
    for name, kinds in SUBCOMMAND_KINDS.items():
        sp = sub.add_parser(name, help=f"run a {' / '.join(kinds)} experiment")
        sp.add_argument("--config", help="JSON config document")
        sp.add_argument("--out", help="output directory (overrides output_dir)")
        sp.add_argument("--seed", type=int, help="random seed (overrides seed)")
        sp.add_argument("--quiet", action="store_true")
    bp = sub.add_parser("batch", help="run a list of configs, each in its own directory")
    bp.add_argument("--config", required=True, help='JSON document {"runs": [...]} or a list of configs')
    bp.add_argument("--out", help="root directory for run subdirectories")
    bp.add_argument("--seed", type=int)
    bp.add_argument("--jobs", type=int, default=1, help="number of runs executed concurrently")
    bp.add_argument("--quiet", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "batch":
        try:
            return _batch(args)
        except ConfigError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    try:
        doc = _load_doc(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return _run_one(doc, args.command, args.out, args.seed, args.quiet)


if __name__ == "__main__":
    sys.exit(main())
