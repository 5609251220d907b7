"""Entropies, effective mode counts and decay-rate fits along a flow."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .eigenbasis import SpectralState
from .errors import InsufficientDataError, InvalidArgumentError, UndefinedError
from .flow import Trajectory

__all__ = [
    "EntropyReport",
    "shannon_entropy",
    "deviation_entropy",
    "amplitude_entropy",
    "effective_mode_count",
    "entropy_report",
    "fit_decay_rate",
    "entropy_scaling_curve",
    "entropy_scaling_experiment",
    "write_entropy_csv",
    "DEFAULT_EPSILON",
    "UNDERFLOW_FLOOR",
]

DEFAULT_EPSILON = 1e-3
# deviation norms below this are treated as lost to rounding
UNDERFLOW_FLOOR = 1e-13


def _amplitudes(state) -> np.ndarray:
    if isinstance(state, SpectralState):
        return state.amplitudes
    return np.asarray(state, dtype=float)


def shannon_entropy(weights, multiplicity=None) -> float:
    """Entropy of the distribution proportional to ``weights``.

    With ``multiplicity`` given, entry ``i`` stands for ``multiplicity[i]``
    identical copies each carrying weight ``weights[i]``; the result equals
    the entropy of the materialized, copied distribution.  ``0 log 0 = 0``;
    an all-zero input has entropy 0.
    """
    w = np.asarray(weights, dtype=float)
    g = np.ones_like(w) if multiplicity is None else np.asarray(multiplicity, dtype=float)
    mass = g * w
    total = mass.sum()
    if total <= 0:
        return 0.0
    q = w / total
    nz = q > 0
    return float(max(0.0, -np.sum(g[nz] * q[nz] * np.log(q[nz]))))


def deviation_entropy(state) -> float:
    """Entropy of ``p_n = d_n^2 / ||d||^2`` with ``d = C - pi``."""
    d = _amplitudes(state) - math.pi
    # rescale before squaring so tiny deviations don't underflow
    scale = np.max(np.abs(d)) if d.size else 0.0
    if scale == 0:
        return 0.0
    return shannon_entropy((d / scale) ** 2)


def amplitude_entropy(state) -> float:
    """Entropy of ``w_n = C_n^2 / sum_k C_k^2``."""
    C = _amplitudes(state)
    if not np.any(C != 0):
        raise UndefinedError("amplitude entropy is undefined for an all-zero state")
    return shannon_entropy((C / np.max(np.abs(C))) ** 2)


def effective_mode_count(state, epsilon: float = DEFAULT_EPSILON) -> int:
    """Number of modes with ``|C_n - pi| > epsilon``."""
    if not epsilon > 0:
        raise InvalidArgumentError(f"epsilon must be positive, got {epsilon!r}")
    return int(np.count_nonzero(np.abs(_amplitudes(state) - math.pi) > epsilon))


@dataclass(frozen=True)
class EntropyReport:
    tau: float
    deviation_entropy: float
    amplitude_entropy: float
    effective_modes: int
    epsilon: float


def entropy_report(state: SpectralState, epsilon: float = DEFAULT_EPSILON) -> EntropyReport:
    return EntropyReport(
        tau=state.tau,
        deviation_entropy=deviation_entropy(state),
        amplitude_entropy=amplitude_entropy(state),
        effective_modes=effective_mode_count(state, epsilon),
        epsilon=epsilon,
    )


def _trajectory_reports(traj: Trajectory, epsilon: float) -> list[EntropyReport]:
    reports = []
    for t, d in zip(traj.times, traj.deviations):
        C = math.pi + d
        scale = np.max(np.abs(d))
        reports.append(
            EntropyReport(
                tau=float(t),
                deviation_entropy=shannon_entropy((d / scale) ** 2) if scale > 0 else 0.0,
                amplitude_entropy=amplitude_entropy(C),
                effective_modes=int(np.count_nonzero(np.abs(d) > epsilon)),
                epsilon=epsilon,
            )
        )
    return reports


def write_entropy_csv(source, path, epsilon: float = DEFAULT_EPSILON) -> Path:
    """Write ``tau, deviation_entropy, amplitude_entropy, effective_modes`` rows.

    ``source`` is a :class:`Trajectory` or a sequence of :class:`EntropyReport`.
    """
    reports = _trajectory_reports(source, epsilon) if isinstance(source, Trajectory) else list(source)
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["tau", "deviation_entropy", "amplitude_entropy", "effective_modes"])
        for r in reports:
            writer.writerow([repr(r.tau), repr(r.deviation_entropy), repr(r.amplitude_entropy), r.effective_modes])
    return path


def fit_decay_rate(traj: Trajectory, min_points: int = 10) -> float:
    """Least-squares decay rate of ``||C - pi||`` over the trajectory's late half.

    Samples after the norm first drops below :data:`UNDERFLOW_FLOOR` are
    discarded before the window is chosen.
    """
    norms = traj.norms()
    times = traj.times
    usable = np.flatnonzero(~(norms > UNDERFLOW_FLOOR))
    stop = usable[0] if usable.size else norms.size
    norms, times = norms[:stop], times[:stop]
    if norms.size < min_points:
        raise InsufficientDataError(f"only {norms.size} usable samples, need {min_points}")
    start = norms.size // 2
    if norms.size - start < min_points:
        start = norms.size - min_points
    slope = np.polyfit(times[start:], np.log(norms[start:]), 1)[0]
    return float(max(0.0, -slope))


def _scaling_modes(c_rate: float, tau_min: float) -> int:
    # e^{-2 c n^2 tau} < e^{-60} beyond this many modes
    return int(math.ceil(math.sqrt(30.0 / (c_rate * tau_min)))) + 8


def entropy_scaling_curve(d: int, beta: float, c_rate: float, tau_grid, n_modes: int | None = None) -> np.ndarray:
    """Deviation entropy along ``tau_grid`` for the degenerate power-law model.

    Mode ``n >= 1`` carries deviation ``n^{-beta} exp(-c n^2 tau)`` and
    multiplicity ``n^{d-1}``; entropy counts every copy.
    """
    _check_scaling_args(d, beta, c_rate)
    taus = np.asarray(tau_grid, dtype=float)
    if taus.size == 0 or np.any(taus <= 0):
        raise InvalidArgumentError("tau grid must be non-empty and positive")
    N = _scaling_modes(c_rate, float(taus.min())) if n_modes is None else int(n_modes)
    n = np.arange(1, N + 1, dtype=float)
    log_mult = (d - 1) * np.log(n)
    out = np.empty(taus.size)
    for i, tau in enumerate(taus):
        # log of squared per-copy deviation, shifted for stable exponentiation
        log_q = -2.0 * beta * np.log(n) - 2.0 * c_rate * n * n * tau
        log_mass = log_q + log_mult
        shift = log_mass.max()
        mass = np.exp(log_mass - shift)
        Z = mass.sum()
        log_Z = math.log(Z) + shift
        P = mass / Z
        out[i] = -np.sum(P * (log_q - log_Z))
    return out


def _check_scaling_args(d: int, beta: float, c_rate: float) -> None:
    if int(d) != d or d < 3:
        raise InvalidArgumentError(f"dimension must be an integer >= 3, got {d!r}")
    if not beta > (d - 1) / 2:
        raise InvalidArgumentError(f"beta must exceed (d-1)/2 = {(d - 1) / 2}, got {beta!r}")
    if not c_rate > 0:
        raise InvalidArgumentError(f"c_rate must be positive, got {c_rate!r}")


def entropy_scaling_experiment(d: int, beta: float, c_rate: float, tau_grid) -> float:
    """Least-squares slope of entropy against ``log(1/tau)``."""
    taus = np.asarray(tau_grid, dtype=float)
    S = entropy_scaling_curve(d, beta, c_rate, taus)
    if taus.size < 2:
        raise InsufficientDataError("need at least two tau values to fit a slope")
    return float(np.polyfit(np.log(1.0 / taus), S, 1)[0])
