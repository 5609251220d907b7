"""Gradient and Hamiltonian flows of spectral amplitudes.

First-order flows relax ``C_n`` toward ``pi``:

* linear:     dC_n/dt = -alpha_n (C_n - pi)
* nonlinear:  dC_n/dt = -alpha_n (C_n - pi) + sum_{k,m} g_nkm C_k C_m
* centered:   dC_n/dt = -alpha_n (C_n - pi) + sum_{k,m} g_nkm d_k d_m,  d = C - pi

The nonlinear equation is integrated exactly as written; its cubic source
``pi^2 sum_{k,m} g_nkm`` does not vanish at ``C = pi``, so its attractor is
shifted away from ``pi`` by ``O(lam)``.  The centered variant keeps ``pi`` as
an exact fixed point.

Time stepping is classical RK4 in deviation coordinates (``d = C - pi``) so
that deviations far below ``eps * pi`` stay resolved.  The conservative
second-order flow uses kick-drift-kick leapfrog.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .eigenbasis import SpectralState
from .errors import DivergenceError, InvalidArgumentError, ShapeError, StabilityError
from .overlap import CouplingTensor

__all__ = [
    "RhsKind",
    "FlowParams",
    "Trajectory",
    "PhasePoint",
    "GronwallReport",
    "linear_flow_exact",
    "exact_trajectory",
    "rhs_linear",
    "rhs_nonlinear",
    "rhs_centered",
    "evolve",
    "energy",
    "energy_cubic",
    "hamiltonian",
    "leapfrog_step",
    "leapfrog",
    "weighted_norm",
    "deviation_norm",
    "gronwall_report",
    "write_trajectory_csv",
    "STABILITY_FACTOR",
]

# RK4 is stable for |dt * alpha| < 2.785; keep margin for the cubic term
STABILITY_FACTOR = 0.5


class RhsKind(str, enum.Enum):
    LINEAR = "linear"
    NONLINEAR = "nonlinear"
    CENTERED = "centered"


def _as_alphas(alphas, size: int | None = None) -> np.ndarray:
    a = np.asarray(alphas, dtype=float)
    if a.ndim != 1:
        raise ShapeError(f"alphas must be 1-D, got shape {a.shape}")
    if size is not None and a.size != size:
        raise ShapeError(f"expected {size} stiffness weights, got {a.size}")
    if not np.all(np.isfinite(a)) or np.any(a <= 0):
        raise InvalidArgumentError("stiffness weights must be finite and positive")
    return a


def _amplitudes(state) -> np.ndarray:
    if isinstance(state, SpectralState):
        return state.amplitudes
    return np.asarray(state, dtype=float)


def _check_coupling(coupling: CouplingTensor | None, size: int) -> None:
    if coupling is not None and coupling.size != size:
        raise ShapeError(f"coupling tensor has {coupling.size} modes, state has {size}")


@dataclass(frozen=True)
class FlowParams:
    alphas: np.ndarray
    coupling: CouplingTensor | None = None
    dt: float = 1e-3
    t_end: float = 1.0
    record_every: int = 1

    def __post_init__(self):
        a = _as_alphas(self.alphas)
        a.setflags(write=False)
        object.__setattr__(self, "alphas", a)
        _check_coupling(self.coupling, a.size)
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise InvalidArgumentError(f"dt must be positive, got {self.dt!r}")
        if not (math.isfinite(self.t_end) and self.t_end >= 0):
            raise InvalidArgumentError(f"t_end must be >= 0, got {self.t_end!r}")
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise InvalidArgumentError(f"record_every must be an integer >= 1, got {self.record_every!r}")

    @property
    def delta(self) -> float:
        """Smallest stiffness, the guaranteed decay rate of the linear flow."""
        return float(self.alphas.min())

    @property
    def max_stable_dt(self) -> float:
        return STABILITY_FACTOR / float(self.alphas.max())


@dataclass(frozen=True)
class Trajectory:
    """Recorded flow history.

    Stored as deviations from ``pi`` (one row per recorded time) so that
    late-time decay is not swamped by rounding of ``pi + d``.
    """

    times: np.ndarray
    deviations: np.ndarray
    params: FlowParams | None = field(default=None, repr=False)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        d = np.atleast_2d(np.asarray(self.deviations, dtype=float))
        if d.shape[0] != t.size:
            raise ShapeError("one deviation row per recorded time expected")
        if t.size and (t[0] != 0.0 or np.any(np.diff(t) <= 0)):
            raise InvalidArgumentError("times must start at 0 and increase strictly")
        if not np.all(np.isfinite(d)):
            raise InvalidArgumentError("trajectory contains non-finite values")
        for arr in (t, d):
            arr.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "deviations", d)

    def __len__(self) -> int:
        return self.times.size

    @property
    def amplitudes(self) -> np.ndarray:
        return math.pi + self.deviations

    @property
    def states(self) -> list[SpectralState]:
        return [SpectralState.from_deviations(d, t) for t, d in zip(self.times, self.deviations)]

    @property
    def final(self) -> SpectralState:
        return SpectralState.from_deviations(self.deviations[-1], self.times[-1])

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.deviations, axis=1)


@dataclass(frozen=True)
class PhasePoint:
    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        q = np.array(self.q, dtype=float)
        p = np.array(self.p, dtype=float)
        if q.shape != p.shape or q.ndim != 1:
            raise ShapeError("q and p must be 1-D arrays of equal length")
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(p))):
            raise InvalidArgumentError("phase point must be finite")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)


@dataclass(frozen=True)
class GronwallReport:
    delta: float
    max_violation: float


def linear_flow_exact(state0, alphas, tau: float) -> SpectralState:
    """``C_n(tau) = pi + (C_n(0) - pi) exp(-alpha_n tau)``."""
    if not tau >= 0:
        raise InvalidArgumentError(f"tau must be >= 0, got {tau!r}")
    C0 = _amplitudes(state0)
    a = _as_alphas(alphas, C0.size)
    tau0 = state0.tau if isinstance(state0, SpectralState) else 0.0
    return SpectralState.from_deviations((C0 - math.pi) * np.exp(-a * tau), tau0 + tau)


def exact_trajectory(state0, alphas, times) -> Trajectory:
    """Closed-form linear flow sampled at ``times`` (first entry must be 0)."""
    d0 = _amplitudes(state0) - math.pi
    a = _as_alphas(alphas, d0.size)
    t = np.asarray(times, dtype=float)
    return Trajectory(t, d0[None, :] * np.exp(-np.outer(t, a)))


def rhs_linear(state, alphas) -> np.ndarray:
    C = _amplitudes(state)
    a = _as_alphas(alphas, C.size)
    return -a * (C - math.pi)


def rhs_nonlinear(state, alphas, coupling: CouplingTensor) -> np.ndarray:
    """Linear relaxation plus ``sum_{k,m} g_nkm C_k C_m``."""
    C = _amplitudes(state)
    _check_coupling(coupling, C.size)
    return rhs_linear(C, alphas) + coupling.contract(C)


def rhs_centered(state, alphas, coupling: CouplingTensor) -> np.ndarray:
    """Linear relaxation plus ``sum_{k,m} g_nkm d_k d_m`` with ``d = C - pi``."""
    C = _amplitudes(state)
    _check_coupling(coupling, C.size)
    d = C - math.pi
    return rhs_linear(C, alphas) + coupling.contract(d)


def _deviation_rhs(kind: RhsKind, alphas: np.ndarray, coupling: CouplingTensor | None):
    if kind is RhsKind.LINEAR or coupling is None:
        return lambda d: -alphas * d
    if kind is RhsKind.CENTERED:
        return lambda d: -alphas * d + coupling.contract(d)
    return lambda d: -alphas * d + coupling.contract(d + math.pi)


def _rk4_step(f, d: np.ndarray, h: float) -> np.ndarray:
    k1 = f(d)
    k2 = f(d + 0.5 * h * k1)
    k3 = f(d + 0.5 * h * k2)
    k4 = f(d + h * k3)
    return d + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def evolve(state0, params: FlowParams, rhs_kind: RhsKind | str = RhsKind.LINEAR) -> Trajectory:
    """Integrate a first-order flow with fixed-step RK4.

    The final step is shortened so the last recorded time equals
    ``params.t_end``; the final state is always recorded.
    """
    kind = RhsKind(rhs_kind)
    d = _amplitudes(state0) - math.pi
    if d.size != params.alphas.size:
        raise ShapeError(f"state has {d.size} modes, params have {params.alphas.size}")
    if kind is not RhsKind.LINEAR and params.coupling is None:
        raise InvalidArgumentError(f"{kind.value} flow requires a coupling tensor")
    if params.dt > params.max_stable_dt * (1 + 1e-12):
        raise StabilityError(
            f"dt={params.dt:g} exceeds stability limit {params.max_stable_dt:g} "
            f"(= {STABILITY_FACTOR} / max alpha)"
        )
    f = _deviation_rhs(kind, params.alphas, params.coupling)

    n_full = int(math.floor(params.t_end / params.dt + 1e-9))
    remainder = params.t_end - n_full * params.dt
    steps = [params.dt] * n_full
    if remainder > 1e-12 * max(1.0, params.t_end):
        steps.append(remainder)

    times, rows = [0.0], [d.copy()]
    t = 0.0
    for i, h in enumerate(steps, start=1):
        # overflow is detected below and reported with its time
        with np.errstate(over="ignore", invalid="ignore"):
            d = _rk4_step(f, d, h)
        t = params.t_end if i == len(steps) else i * params.dt
        if not np.all(np.isfinite(d)):
            raise DivergenceError(f"non-finite state at tau={t:g}", time=t)
        if i % params.record_every == 0 or i == len(steps):
            times.append(t)
            rows.append(d.copy())
    return Trajectory(np.array(times), np.array(rows), params)


def energy(state, alphas) -> float:
    """Quadratic energy ``sum_n alpha_n / 2 (C_n - pi)^2``."""
    C = _amplitudes(state)
    a = _as_alphas(alphas, C.size)
    d = C - math.pi
    return float(0.5 * np.dot(a, d * d))


def energy_cubic(state, alphas, coupling: CouplingTensor | None, centered: bool = False) -> float:
    """Quadratic energy minus ``(1/3) sum g_nkm x_n x_k x_m``.

    ``x = C`` for the flow as written, ``x = C - pi`` for the centered
    variant; in either case the matching right-hand side is the negative
    gradient of this functional.
    """
    C = _amplitudes(state)
    base = energy(C, alphas)
    if coupling is None:
        return base
    _check_coupling(coupling, C.size)
    x = C - math.pi if centered else C
    return float(base - np.dot(x, coupling.contract(x)) / 3.0)


def hamiltonian(point: PhasePoint, alphas) -> float:
    a = _as_alphas(alphas, point.q.size)
    d = point.q - math.pi
    return float(0.5 * np.sum(point.p**2) + 0.5 * np.dot(a, d * d))


def leapfrog_step(point: PhasePoint, alphas, dt: float) -> PhasePoint:
    """One kick-drift-kick step for ``H = sum P^2/2 + alpha (C - pi)^2 / 2``.

    A negative ``dt`` steps backwards and exactly inverts a forward step up
    to rounding.
    """
    if not math.isfinite(dt) or dt == 0:
        raise InvalidArgumentError(f"dt must be finite and nonzero, got {dt!r}")
    a = _as_alphas(alphas, point.q.size)
    p_half = point.p - 0.5 * dt * a * (point.q - math.pi)
    q_new = point.q + dt * p_half
    p_new = p_half - 0.5 * dt * a * (q_new - math.pi)
    return PhasePoint(q_new, p_new)


def leapfrog(point: PhasePoint, alphas, dt: float, n_steps: int, record_every: int = 1):
    """Run ``n_steps`` leapfrog steps.

    Returns ``(times, q, p)`` arrays with one row per recorded step,
    including the initial point.
    """
    a = _as_alphas(alphas, point.q.size)
    q, p = point.q.copy(), point.p.copy()
    half = 0.5 * dt * a
    times, qs, ps = [0.0], [q.copy()], [p.copy()]
    for i in range(1, int(n_steps) + 1):
        p -= half * (q - math.pi)
        q += dt * p
        p -= half * (q - math.pi)
        if i % record_every == 0 or i == n_steps:
            times.append(i * dt)
            qs.append(q.copy())
            ps.append(p.copy())
    return np.array(times), np.array(qs), np.array(ps)


def deviation_norm(state) -> float:
    return float(np.linalg.norm(_amplitudes(state) - math.pi))


def weighted_norm(state, m: float) -> float:
    """``sqrt(sum_n (1 + n)^{2m} (C_n - pi)^2)``."""
    if not m >= 0:
        raise InvalidArgumentError(f"weight exponent must be >= 0, got {m!r}")
    d = _amplitudes(state) - math.pi
    w = (1.0 + np.arange(d.size)) ** (2.0 * m)
    return float(math.sqrt(np.dot(w, d * d)))


def gronwall_report(traj: Trajectory, alphas=None) -> GronwallReport:
    """Largest excess of ``||d(t)||`` over ``||d(0)|| exp(-delta t)``.

    ``delta`` is the smallest stiffness, taken from ``alphas`` or from the
    trajectory's recorded parameters.
    """
    if len(traj) == 0:
        raise InvalidArgumentError("empty trajectory")
    if alphas is None:
        if traj.params is None:
            raise InvalidArgumentError("trajectory carries no parameters; pass alphas")
        alphas = traj.params.alphas
    delta = float(np.min(_as_alphas(alphas)))
    norms = traj.norms()
    bound = norms[0] * np.exp(-delta * traj.times)
    return GronwallReport(delta, float(np.max(norms - bound)))


def write_trajectory_csv(traj: Trajectory, path) -> Path:
    """Columns ``tau, C_0 .. C_N``; values written with full precision."""
    path = Path(path)
    amps = traj.amplitudes
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["tau"] + [f"C_{n}" for n in range(amps.shape[1])])
        for t, row in zip(traj.times, amps):
            writer.writerow([repr(float(t))] + [repr(float(x)) for x in row])
    return path
