"""Closed-form Dirichlet eigenbasis of the deformation operator.

The operator ``pi * (1 + (hbar/c)**2 d^2/dv^2)`` on ``[-v_c, v_c]`` with
Dirichlet conditions has eigenfunctions

    psi_n(v) = A * sin(k_n * (v + v_c)),    k_n = (n + 1) * pi / (2 v_c)

and eigenvalues ``pi * (1 - (hbar/c)**2 * k_n**2)``.  ``A`` is ``sqrt(1/v_c)``
for the orthonormal basis, or ``sqrt(2/pi)`` for the simplified
normalization used when tabulating overlap integrals.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError, InvalidArgumentError, ModeIndexError, ShapeError

__all__ = [
    "Normalization",
    "PhysicalConstants",
    "EigenBasis",
    "SpectralState",
    "make_constants",
    "psi",
    "psi_deriv",
    "mode_matrix",
    "eigenvalue",
    "eigenvalues",
    "synthesize",
    "project",
    "gauss_legendre",
    "gram_matrix",
    "ck_seminorm",
    "DEFAULT_N_MAX",
    "SUP_GRID_POINTS",
]

DEFAULT_N_MAX = 64
SUP_GRID_POINTS = 1001

# slack on the domain check so that grids built from linspace(-v_c, v_c) pass
_DOMAIN_RTOL = 1e-12


class Normalization(str, enum.Enum):
    ORTHONORMAL = "orthonormal"
    SIMPLIFIED = "simplified"


def _positive_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value <= 0.0:
        raise InvalidArgumentError(f"{name} must be positive and finite, got {value!r}")
    return value


@dataclass(frozen=True)
class PhysicalConstants:
    """Action scale ``hbar``, speed scale ``c`` and domain half-width ``v_c``."""

    hbar: float = 1.0
    c: float = 1.0
    v_c: float = math.sqrt(1.0 - 1.0 / math.pi)

    def __post_init__(self):
        for name in ("hbar", "c", "v_c"):
            object.__setattr__(self, name, _positive_finite(name, getattr(self, name)))

    @property
    def ratio_sq(self) -> float:
        """``(hbar / c)**2``."""
        return (self.hbar / self.c) ** 2


def make_constants(c: float, hbar: float = 1.0) -> PhysicalConstants:
    """Constants with ``v_c`` fixed by the threshold ``pi * (1 - v_c**2/c**2) = 1``."""
    c = _positive_finite("c", c)
    return PhysicalConstants(hbar=hbar, c=c, v_c=c * math.sqrt(1.0 - 1.0 / math.pi))


@dataclass(frozen=True)
class EigenBasis:
    constants: PhysicalConstants = field(default_factory=lambda: make_constants(1.0))
    n_max: int = DEFAULT_N_MAX
    normalization: Normalization = Normalization.ORTHONORMAL

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 0:
            raise InvalidArgumentError(f"n_max must be a non-negative integer, got {self.n_max!r}")
        object.__setattr__(self, "n_max", int(self.n_max))
        object.__setattr__(self, "normalization", Normalization(self.normalization))

    @property
    def v_c(self) -> float:
        return self.constants.v_c

    @property
    def size(self) -> int:
        return self.n_max + 1

    @property
    def prefactor(self) -> float:
        if self.normalization is Normalization.ORTHONORMAL:
            return math.sqrt(1.0 / self.v_c)
        return math.sqrt(2.0 / math.pi)

    def wavenumber(self, n):
        return (np.asarray(n) + 1) * math.pi / (2.0 * self.v_c)

    @property
    def wavenumbers(self) -> np.ndarray:
        return self.wavenumber(np.arange(self.size))

    def with_n_max(self, n_max: int) -> "EigenBasis":
        return EigenBasis(self.constants, n_max, self.normalization)


@dataclass(frozen=True)
class SpectralState:
    """Amplitudes ``C_n`` at flow time ``tau``."""

    amplitudes: np.ndarray
    tau: float = 0.0

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=float)
        if amps.ndim != 1:
            raise ShapeError(f"amplitudes must be 1-D, got shape {amps.shape}")
        if not np.all(np.isfinite(amps)):
            raise InvalidArgumentError("amplitudes must be finite")
        tau = float(self.tau)
        if not math.isfinite(tau) or tau < 0:
            raise InvalidArgumentError(f"tau must be finite and >= 0, got {tau!r}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "tau", tau)

    @classmethod
    def from_deviations(cls, deviations, tau: float = 0.0) -> "SpectralState":
        return cls(math.pi + np.asarray(deviations, dtype=float), tau)

    @classmethod
    def fixed_point(cls, size: int, tau: float = 0.0) -> "SpectralState":
        return cls(np.full(size, math.pi), tau)

    @property
    def deviations(self) -> np.ndarray:
        return self.amplitudes - math.pi

    def __len__(self) -> int:
        return self.amplitudes.size


def _check_mode(basis: EigenBasis, n) -> np.ndarray:
    n_arr = np.asarray(n)
    if not np.issubdtype(n_arr.dtype, np.integer):
        if not np.all(np.equal(np.mod(n_arr, 1), 0)):
            raise ModeIndexError(f"mode index must be integral, got {n!r}")
        n_arr = n_arr.astype(int)
    if np.any(n_arr < 0) or np.any(n_arr > basis.n_max):
        raise ModeIndexError(f"mode index {n!r} outside 0..{basis.n_max}")
    return n_arr


def _check_points(basis: EigenBasis, v) -> np.ndarray:
    v_arr = np.asarray(v, dtype=float)
    if np.any(np.abs(v_arr) > basis.v_c * (1.0 + _DOMAIN_RTOL)) or not np.all(np.isfinite(v_arr)):
        raise DomainError(f"evaluation point outside [-{basis.v_c}, {basis.v_c}]")
    return v_arr


def _phase(basis: EigenBasis, n, v):
    # written via u in [0, 1] so that v = +-v_c lands on an exact multiple of pi
    u = (v + basis.v_c) / (2.0 * basis.v_c)
    return math.pi * (n + 1) * u


def psi(basis: EigenBasis, n, v):
    """Eigenfunction ``psi_n(v)``; broadcasts over ``n`` and ``v``."""
    n = _check_mode(basis, n)
    v = _check_points(basis, v)
    out = basis.prefactor * np.sin(_phase(basis, n, v))
    return out[()] if np.ndim(out) == 0 else out


def psi_deriv(basis: EigenBasis, n, v, k: int):
    """``k``-th derivative of ``psi_n`` at ``v``."""
    if int(k) != k or k < 0:
        raise InvalidArgumentError(f"derivative order must be a non-negative integer, got {k!r}")
    k = int(k)
    if k == 0:
        return psi(basis, n, v)
    n = _check_mode(basis, n)
    v = _check_points(basis, v)
    kn = basis.wavenumber(n)
    theta = _phase(basis, n, v)
    # d^k/dv^k sin(kn x) = kn^k sin(kn x + k pi/2); pick sin/cos explicitly
    # to avoid rounding in the added quarter turns
    r = k % 4
    base = (np.sin, np.cos, np.sin, np.cos)[r](theta)
    sign = (1.0, 1.0, -1.0, -1.0)[r]
    out = sign * basis.prefactor * kn**k * base
    return out[()] if np.ndim(out) == 0 else out


def mode_matrix(basis: EigenBasis, v, k: int = 0) -> np.ndarray:
    """Matrix ``M[n, j] = psi_n^{(k)}(v_j)`` for all modes."""
    n = np.arange(basis.size)[:, None]
    v = np.atleast_1d(np.asarray(v, dtype=float))[None, :]
    return np.asarray(psi_deriv(basis, n, v, k))


def eigenvalue(basis: EigenBasis, n):
    """``C_n = pi - hbar^2 pi^3 (n+1)^2 / (4 c^2 v_c^2)``."""
    n = _check_mode(basis, n)
    c = basis.constants
    coef = c.ratio_sq * math.pi**3 / (4.0 * c.v_c**2)
    out = math.pi - coef * (n + 1.0) ** 2
    return out[()] if np.ndim(out) == 0 else out


def eigenvalues(basis: EigenBasis) -> np.ndarray:
    return eigenvalue(basis, np.arange(basis.size))


def _as_amplitudes(basis: EigenBasis, state) -> np.ndarray:
    amps = state.amplitudes if isinstance(state, SpectralState) else np.asarray(state, dtype=float)
    if amps.shape != (basis.size,):
        raise ShapeError(f"expected {basis.size} amplitudes, got shape {amps.shape}")
    return amps


def synthesize(basis: EigenBasis, state, v):
    """Profile ``sum_n C_n psi_n(v)``."""
    amps = _as_amplitudes(basis, state)
    v_arr = np.asarray(v, dtype=float)
    out = amps @ mode_matrix(basis, v_arr.ravel())
    return out.reshape(v_arr.shape)[()] if v_arr.ndim == 0 else out.reshape(v_arr.shape)


def gauss_legendre(order: int, v_c: float) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights mapped to ``[-v_c, v_c]``."""
    if order < 1:
        raise InvalidArgumentError("quadrature order must be >= 1")
    x, w = np.polynomial.legendre.leggauss(int(order))
    return v_c * x, v_c * w


def default_quad_order(basis: EigenBasis) -> int:
    return 4 * (basis.n_max + 1)


def gram_matrix(basis: EigenBasis, quad_order: int | None = None) -> np.ndarray:
    """Pairwise quadrature inner products ``<psi_n, psi_m>``."""
    order = default_quad_order(basis) if quad_order is None else int(quad_order)
    nodes, weights = gauss_legendre(order, basis.v_c)
    M = mode_matrix(basis, nodes)
    G = (M * weights) @ M.T
    # exact symmetry rather than symmetry up to summation order
    return 0.5 * (G + G.T)


def project(basis: EigenBasis, f: Callable[[np.ndarray], np.ndarray], quad_order: int | None = None) -> np.ndarray:
    """Expansion coefficients of ``f`` in the basis.

    For the simplified normalization the basis is orthogonal but not
    normalized, so coefficients are divided by ``<psi_n, psi_n>``.
    """
    order = max(default_quad_order(basis), 64) if quad_order is None else int(quad_order)
    nodes, weights = gauss_legendre(order, basis.v_c)
    M = mode_matrix(basis, nodes)
    coeffs = M @ (weights * np.asarray(f(nodes), dtype=float))
    norms = basis.prefactor**2 * basis.v_c
    return coeffs / norms


def ck_seminorm(basis: EigenBasis, state, k: int, grid_points: int = SUP_GRID_POINTS) -> float:
    """Grid sup-norm of the ``k``-th derivative of the deviation field.

    The field is ``sum_n (C_n - pi) psi_n(v)``; the constant ``pi`` itself has
    no Dirichlet expansion, so only deviations enter.
    """
    if grid_points < 2:
        raise InvalidArgumentError("grid_points must be >= 2")
    delta = _as_amplitudes(basis, state) - math.pi
    v = np.linspace(-basis.v_c, basis.v_c, int(grid_points))
    field_k = delta @ mode_matrix(basis, v, k)
    return float(np.max(np.abs(field_k)))
