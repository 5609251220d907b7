"""Weyl-law spectra, dimension estimation, heat traces and eta partial sums.

Deformation spectra are sequences ``C_1 > C_2 > ...`` bounded by ``pi``.
Synthetic spectra follow ``C_n = pi - kappa n^{2/d}`` for ``n >= 1``; indices
are 1-based throughout this module, unlike the eigenbasis module where
mode ``n`` has wavenumber ``n + 1``.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy import special

from .eigenbasis import PhysicalConstants
from .errors import InsufficientDataError, InvalidArgumentError, RegimeError, ShapeError

__all__ = [
    "SpectrumMeta",
    "SpectrumModel",
    "DimensionEstimate",
    "EtaSum",
    "EmptyLevelWarning",
    "unit_ball_volume",
    "weyl_constant",
    "mapping_scale",
    "spectral_mapping",
    "synth_weyl_spectrum",
    "perturb_spectrum",
    "counting_function",
    "estimate_dimension",
    "density_exponent",
    "heat_trace",
    "heat_trace_tail",
    "completed_heat_trace",
    "heat_trace_exponent",
    "eta_partial",
    "read_spectrum",
    "write_spectrum",
    "HEAT_TAIL_RTOL",
]

HEAT_TAIL_RTOL = 1e-8
MIN_DIMENSION_POINTS = 100


class EmptyLevelWarning(UserWarning):
    """Counting function evaluated above the top of the spectrum."""


@dataclass(frozen=True)
class SpectrumMeta:
    d: float | None = None
    kappa: float | None = None
    epsilon: float | None = None
    gamma_d: float | None = None
    volume: float | None = None


@dataclass(frozen=True)
class SpectrumModel:
    """Strictly decreasing eigenvalue sequence bounded above by ``pi``.

    ``values[i]`` is ``C_{i+1}``.  ``ties_collapsed`` counts repeated values
    removed when the spectrum was built from data with multiplicities.
    """

    values: np.ndarray
    meta: SpectrumMeta | None = None
    ties_collapsed: int = 0

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise ShapeError("spectrum must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(v)):
            raise InvalidArgumentError("spectrum values must be finite")
        if np.any(np.diff(v) >= 0):
            raise InvalidArgumentError("spectrum must be strictly decreasing")
        if v[0] > math.pi:
            raise InvalidArgumentError("spectrum must be bounded above by pi")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.values.size

    @property
    def gaps(self) -> np.ndarray:
        """``pi - C_n``, the distance to the spectral edge."""
        return math.pi - self.values


def unit_ball_volume(d: float) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def weyl_constant(d: int, volume: float) -> float:
    """``gamma_d = (2 pi)^2 (omega_d / vol)^{2/d}`` for ``lambda_n ~ gamma_d n^{2/d}``."""
    if not d >= 1:
        raise InvalidArgumentError(f"dimension must be >= 1, got {d!r}")
    if not (volume > 0 and math.isfinite(volume)):
        raise InvalidArgumentError(f"volume must be positive, got {volume!r}")
    return (2 * math.pi) ** 2 * (unit_ball_volume(d) / volume) ** (2.0 / d)


def mapping_scale(constants: PhysicalConstants) -> float:
    """``epsilon = hbar^2 pi^2 / (c^2 v_c^2)``."""
    return constants.ratio_sq * math.pi**2 / constants.v_c**2


def spectral_mapping(lambdas, constants: PhysicalConstants) -> SpectrumModel:
    """Map Laplacian eigenvalues to ``C_n = pi - epsilon lambda_n``.

    Repeated eigenvalues collapse to a single entry; the number removed is
    recorded in ``ties_collapsed``.
    """
    lam = np.asarray(lambdas, dtype=float)
    if lam.ndim != 1 or lam.size == 0:
        raise ShapeError("eigenvalues must be a non-empty 1-D sequence")
    if np.any(lam < 0) or not np.all(np.isfinite(lam)):
        raise InvalidArgumentError("Laplacian eigenvalues must be finite and >= 0")
    if np.any(np.diff(lam) < 0):
        raise InvalidArgumentError("Laplacian eigenvalues must be sorted nondecreasing")
    eps = mapping_scale(constants)
    C = math.pi - eps * lam
    keep = np.concatenate([[True], np.diff(C) < 0])
    return SpectrumModel(C[keep], SpectrumMeta(epsilon=eps), ties_collapsed=int(np.count_nonzero(~keep)))


def synth_weyl_spectrum(d: float, kappa: float, n_count: int) -> SpectrumModel:
    """Exact power law ``C_n = pi - kappa n^{2/d}``, ``n = 1..n_count``."""
    if not d >= 1:
        raise InvalidArgumentError(f"dimension must be >= 1, got {d!r}")
    if not kappa > 0:
        raise InvalidArgumentError(f"kappa must be positive, got {kappa!r}")
    if int(n_count) != n_count or n_count < 2:
        raise InvalidArgumentError(f"n_count must be an integer >= 2, got {n_count!r}")
    n = np.arange(1, int(n_count) + 1, dtype=float)
    return SpectrumModel(math.pi - kappa * n ** (2.0 / d), SpectrumMeta(d=d, kappa=kappa))


def perturb_spectrum(spectrum: SpectrumModel, rel_noise: float, seed: int) -> SpectrumModel:
    """Multiply each gap ``pi - C_n`` by ``1 + rel_noise * u_n``, ``u`` uniform on [-1, 1].

    The perturbed values are re-sorted, so the result is a valid spectrum
    whose ``n``-th entry need not come from the ``n``-th input.  The Weyl
    envelope in ``meta`` is kept.
    """
    if not 0 <= rel_noise < 1:
        raise InvalidArgumentError("rel_noise must lie in [0, 1)")
    rng = np.random.default_rng(seed)
    u = rng.uniform(-1.0, 1.0, len(spectrum))
    gaps = np.sort(spectrum.gaps * (1.0 + rel_noise * u))
    return SpectrumModel(math.pi - gaps, spectrum.meta)


def counting_function(spectrum: SpectrumModel, c_level: float) -> int:
    """``n(C) = max{n : C_n >= C}``; 0 (with :class:`EmptyLevelWarning`) if none."""
    if not c_level < math.pi:
        raise InvalidArgumentError(f"level must lie below pi, got {c_level!r}")
    # values descending -> count entries >= c_level
    count = int(spectrum.values.size - np.searchsorted(spectrum.values[::-1], c_level, side="left"))
    if count == 0:
        warnings.warn(f"no eigenvalue at or above level {c_level!r}", EmptyLevelWarning, stacklevel=2)
    return count


@dataclass(frozen=True)
class DimensionEstimate:
    d_hat: float
    slope: float
    r_squared: float
    c_lo: float
    c_hi: float

    @property
    def window(self) -> dict:
        return {"c_lo": self.c_lo, "c_hi": self.c_hi}

    def to_json(self) -> str:
        return json.dumps(
            {"d_hat": self.d_hat, "slope": self.slope, "r_squared": self.r_squared, "window": self.window},
            sort_keys=True,
        )


def _loglog_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    lx, ly = np.log(x), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = np.sum((ly - ly.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(min(1.0, max(0.0, r2)))


def estimate_dimension(spectrum: SpectrumModel, edge_fraction: float = 0.1) -> DimensionEstimate:
    """Fit ``log n`` against ``log(pi - C_n)`` near the edge; ``d_hat = 2 * slope``.

    The window is the first ``ceil(edge_fraction * N)`` eigenvalues, i.e. the
    ones closest to ``pi``.  An eigenvalue equal to ``pi`` is skipped.
    """
    if not 0 < edge_fraction <= 1:
        raise InvalidArgumentError(f"edge_fraction must lie in (0, 1], got {edge_fraction!r}")
    N = len(spectrum)
    if N < MIN_DIMENSION_POINTS:
        raise InsufficientDataError(f"need at least {MIN_DIMENSION_POINTS} eigenvalues, got {N}")
    m = int(math.ceil(edge_fraction * N))
    counts = np.arange(1, m + 1, dtype=float)
    gaps = spectrum.gaps[:m]
    ok = gaps > 0
    if np.count_nonzero(ok) < 10:
        raise InsufficientDataError("fewer than 10 eigenvalues in the edge window")
    slope, r2 = _loglog_fit(gaps[ok], counts[ok])
    window = spectrum.values[:m][ok]
    return DimensionEstimate(2.0 * slope, slope, r2, float(window.min()), float(window.max()))


def density_exponent(spectrum: SpectrumModel, edge_fraction: float = 0.1, n_levels: int = 60) -> float:
    """Exponent of ``rho(C) = dn/dC`` near the edge from a sweep of levels.

    Levels are log-spaced in ``pi - C`` across the edge window; ``rho`` is the
    finite difference of the counting function between neighbouring levels,
    assigned to the geometric midpoint of the gap.
    """
    m = max(int(math.ceil(edge_fraction * len(spectrum))), 10)
    gaps = spectrum.gaps[:m]
    g_lo = gaps[gaps > 0].min() if np.any(gaps > 0) else None
    if g_lo is None:
        raise InsufficientDataError("no eigenvalues below pi in the window")
    g_hi = gaps[-1]
    # start a decade above the first gap so counts are not dominated by discreteness
    levels = np.geomspace(max(g_lo * 10, g_hi / 1e3), g_hi, n_levels)
    counts = np.array([counting_function(spectrum, math.pi - g) for g in levels], dtype=float)
    rho = np.diff(counts) / np.diff(levels)
    mid = np.sqrt(levels[1:] * levels[:-1])
    ok = rho > 0
    if np.count_nonzero(ok) < 5:
        raise InsufficientDataError("density sweep produced too few nonzero bins")
    slope, _ = _loglog_fit(mid[ok], rho[ok])
    return slope


def heat_trace(spectrum: SpectrumModel, t: float) -> float:
    """Truncated trace ``sum_n exp(-t (pi - C_n))``."""
    if not t > 0:
        raise InvalidArgumentError(f"t must be positive, got {t!r}")
    return float(np.sum(np.exp(-t * spectrum.gaps)))


def _envelope(spectrum: SpectrumModel):
    meta = spectrum.meta
    if meta is None or meta.d is None or meta.kappa is None:
        return None
    return float(meta.d), float(meta.kappa)


def heat_trace_tail(spectrum: SpectrumModel, t: float) -> float | None:
    """``int_N^inf exp(-t kappa x^{2/d}) dx`` for the Weyl envelope, or ``None``.

    ``N`` is the number of eigenvalues held.  Requires ``d`` and ``kappa``
    in the spectrum metadata.
    """
    env = _envelope(spectrum)
    if env is None:
        return None
    d, kappa = env
    p = 2.0 / d
    a = t * kappa
    N = float(len(spectrum))
    # substitute y = a x^p: integral = Gamma(1/p, a N^p) / (p a^{1/p})
    s = 1.0 / p
    return float(math.exp(special.gammaln(s) - math.log(p) - s * math.log(a)) * special.gammaincc(s, a * N**p))


def completed_heat_trace(spectrum: SpectrumModel, t: float) -> tuple[float, float]:
    """Heat trace with the Weyl-envelope tail added.

    Returns ``(trace, error_bound)``.  The tail sum over ``n > N`` is
    approximated by trapezoid correction ``int_N^inf f - f(N)/2``; for the
    convex envelope the remaining error is at most ``|f'(N)| / 12``.
    Without envelope metadata the tail is not added and the bound is the
    last retained term, a heuristic for how much is being cut off.
    """
    head = heat_trace(spectrum, t)
    env = _envelope(spectrum)
    N = float(len(spectrum))
    if env is None:
        return head, float(math.exp(-t * spectrum.gaps[-1]))
    d, kappa = env
    p = 2.0 / d
    fN = math.exp(-t * kappa * N**p)
    dfN = t * kappa * p * N ** (p - 1) * fN
    return head + heat_trace_tail(spectrum, t) - 0.5 * fN, dfN / 12.0


def heat_trace_exponent(spectrum: SpectrumModel, t_grid) -> float:
    """Slope of ``log Tr`` against ``log t``; about ``-d/2`` at small ``t``.

    Raises :class:`RegimeError` if, at any grid point, the trace cannot be
    resolved to relative accuracy :data:`HEAT_TAIL_RTOL`.
    """
    ts = np.asarray(t_grid, dtype=float)
    if ts.size < 2 or np.any(ts <= 0):
        raise InvalidArgumentError("t grid needs at least two positive values")
    traces = np.empty(ts.size)
    for i, t in enumerate(ts):
        tr, err = completed_heat_trace(spectrum, float(t))
        if err > HEAT_TAIL_RTOL * tr:
            raise RegimeError(
                f"heat trace at t={t:g} is unresolved (error {err:.3g} vs trace {tr:.3g}); "
                "enlarge the spectrum or attach Weyl metadata"
            )
        traces[i] = tr
    return float(np.polyfit(np.log(ts), np.log(traces), 1)[0])


class EtaSum(NamedTuple):
    value: float
    n_terms: int
    convergent: bool


def eta_partial(spectrum, s: float, n_terms: int | None = None) -> EtaSum:
    """Truncated ``sum sign(x) |x|^{-s}`` over the first ``n_terms`` nonzero eigenvalues.

    ``spectrum`` may be a :class:`SpectrumModel` or any 1-D sequence.  The
    series converges for ``s > d/2`` (``s > 1`` when the dimension is
    unknown); outside that range the sum is still returned but
    ``convergent`` is ``False`` and a ``RuntimeWarning`` is issued.
    """
    if isinstance(spectrum, SpectrumModel):
        vals = spectrum.values
        d = spectrum.meta.d if spectrum.meta is not None else None
    else:
        vals = np.asarray(spectrum, dtype=float)
        d = None
    if n_terms is None:
        n_terms = vals.size
    if int(n_terms) != n_terms or not 0 <= n_terms <= vals.size:
        raise InvalidArgumentError(f"n_terms must lie in 0..{vals.size}, got {n_terms!r}")
    threshold = max(d / 2.0, 1.0) if d is not None else 1.0
    convergent = bool(s > threshold)
    if not convergent:
        warnings.warn(f"eta series does not converge for s={s} (needs s > {threshold})", RuntimeWarning, stacklevel=2)
    x = vals[: int(n_terms)]
    x = x[x != 0]
    return EtaSum(float(np.sum(np.sign(x) * np.abs(x) ** (-s))), int(n_terms), convergent)


def read_spectrum(path, meta: SpectrumMeta | None = None) -> SpectrumModel:
    """Read one eigenvalue per line (first column of a CSV); a header line is optional.

    Values are sorted into decreasing order; exact repeats are collapsed.
    """
    vals = []
    with Path(path).open(newline="") as fh:
        for i, row in enumerate(csv.reader(fh)):
            if not row or not row[0].strip() or row[0].lstrip().startswith("#"):
                continue
            try:
                vals.append(float(row[0]))
            except ValueError:
                if i == 0:
                    continue  # header
                raise InvalidArgumentError(f"line {i + 1}: cannot parse {row[0]!r} as a number") from None
    v = np.sort(np.asarray(vals, dtype=float))[::-1]
    if v.size == 0:
        raise InsufficientDataError(f"no eigenvalues in {path}")
    keep = np.concatenate([[True], np.diff(v) < 0])
    return SpectrumModel(v[keep], meta, ties_collapsed=int(np.count_nonzero(~keep)))


def write_spectrum(spectrum: SpectrumModel, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write("C\n")
        for x in spectrum.values:
            fh.write(repr(float(x)) + "\n")
    return path
