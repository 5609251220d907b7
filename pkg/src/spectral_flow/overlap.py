"""Triple overlap integrals of sine eigenfunctions and cubic coupling tensors.

``T[n, k, m] = int psi_n psi_k psi_m dv`` over ``[-v_c, v_c]``.  For the
simplified normalization the product-to-sum identity gives

    T = 2^{3/2} v_c / pi^{5/2} * sum_{(s, t, r)} -s*t*r / w,
    w = s(n+1) + t(k+1) + r(m+1),

over ``(s, t, r)`` in ``{(+,+,-), (+,-,+), (-,+,+), (+,+,+)}`` keeping odd
``w`` only.  All four ``w`` share the parity of ``n + k + m + 3``, so the
integral vanishes whenever that sum is even.
"""

from __future__ import annotations

import csv
import enum
import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .eigenbasis import EigenBasis, Normalization, gauss_legendre, mode_matrix
from .errors import InvalidArgumentError, ModeIndexError, ShapeError

__all__ = [
    "TensorSource",
    "CouplingTensor",
    "overlap_quadrature",
    "overlap_closed_form",
    "closed_form_array",
    "quadrature_array",
    "build_tensor",
    "decay_bound",
    "parity_allowed",
    "sorted_triples",
    "write_tensor_csv",
    "read_tensor_csv",
]

_SIGNS = ((1, 1, -1), (1, -1, 1), (-1, 1, 1), (1, 1, 1))


class TensorSource(str, enum.Enum):
    CLOSED_FORM = "closed_form"
    QUADRATURE = "quadrature"
    SYNTHETIC_DECAY = "synthetic_decay"


def _simplified_prefactor(v_c: float) -> float:
    return 2.0**1.5 * v_c / math.pi**2.5


def _normalization_scale(basis: EigenBasis) -> float:
    """Factor converting simplified-normalization overlaps to ``basis``."""
    if basis.normalization is Normalization.SIMPLIFIED:
        return 1.0
    return (basis.prefactor / math.sqrt(2.0 / math.pi)) ** 3


def parity_allowed(n: int, k: int, m: int) -> bool:
    return (n + k + m + 3) % 2 == 1


def sorted_triples(n_max: int, odd_only: bool = False):
    """All ``n <= k <= m <= n_max``, optionally only parity-allowed ones."""
    for n, k, m in itertools.combinations_with_replacement(range(n_max + 1), 3):
        if not odd_only or parity_allowed(n, k, m):
            yield n, k, m


def _check_indices(basis: EigenBasis | None, *idx: int) -> None:
    for i in idx:
        if int(i) != i or i < 0:
            raise ModeIndexError(f"mode index must be a non-negative integer, got {i!r}")
        if basis is not None and i > basis.n_max:
            raise ModeIndexError(f"mode index {i} outside 0..{basis.n_max}")


def overlap_quadrature(basis: EigenBasis, n: int, k: int, m: int, quad_order: int | None = None) -> float:
    """Gauss-Legendre evaluation of the triple overlap integral."""
    _check_indices(basis, n, k, m)
    order = 4 * (n + k + m + 3) if quad_order is None else int(quad_order)
    nodes, weights = gauss_legendre(order, basis.v_c)
    u = (nodes + basis.v_c) / (2.0 * basis.v_c)
    prod = np.sin(math.pi * (n + 1) * u) * np.sin(math.pi * (k + 1) * u) * np.sin(math.pi * (m + 1) * u)
    return float(basis.prefactor**3 * np.dot(weights, prod))


def overlap_closed_form(basis: EigenBasis, n: int, k: int, m: int) -> float:
    """Closed-form triple overlap; indices are not limited by ``basis.n_max``."""
    _check_indices(None, n, k, m)
    total = 0.0
    for s, t, r in _SIGNS:
        w = s * (n + 1) + t * (k + 1) + r * (m + 1)
        if w % 2:
            total += -s * t * r / w
    return _normalization_scale(basis) * _simplified_prefactor(basis.v_c) * total


def closed_form_array(basis: EigenBasis) -> np.ndarray:
    """Dense ``(N, N, N)`` array of closed-form overlaps, ``N = n_max + 1``."""
    a = np.arange(1, basis.size + 1)
    A, B, C = np.meshgrid(a, a, a, indexing="ij")
    total = np.zeros(A.shape)
    for s, t, r in _SIGNS:
        w = s * A + t * B + r * C
        odd = (w % 2) != 0
        total[odd] += -s * t * r / w[odd]
    return _normalization_scale(basis) * _simplified_prefactor(basis.v_c) * total


def quadrature_array(basis: EigenBasis, quad_order: int | None = None) -> np.ndarray:
    """Dense array of quadrature overlaps using one shared high-order rule."""
    order = 4 * (3 * basis.n_max + 3) if quad_order is None else int(quad_order)
    nodes, weights = gauss_legendre(order, basis.v_c)
    M = mode_matrix(basis, nodes)
    T = np.einsum("ia,ja,ka,a->ijk", M, M, M, weights, optimize=True)
    odd = (np.add.outer(np.add.outer(np.arange(basis.size), np.arange(basis.size)), np.arange(basis.size)) + 3) % 2 == 1
    # parity zeros are exact; drop quadrature round-off there
    return np.where(odd, T, 0.0)


def decay_bound(n: int, k: int, m: int, v_c: float) -> float:
    """``2^{3/2} v_c / (pi^{5/2} (max(n, k, m) + 1))``.

    Holds only away from near-resonant triples; e.g. ``(0, 3, 3)`` exceeds
    it by a factor of eight.  Treat it as a typical-size estimate.
    """
    _check_indices(None, n, k, m)
    return _simplified_prefactor(v_c) / (max(n, k, m) + 1)


@dataclass(frozen=True)
class CouplingTensor:
    """Symmetric cubic coupling ``g[n, k, m]`` stored by sorted index triple.

    ``entries`` maps ``(n, k, m)`` with ``n <= k <= m`` to the coupling value;
    triples absent from the map are zero.
    """

    n_max: int
    entries: dict = field(repr=False)
    lam: float = 1.0
    source: TensorSource = TensorSource.CLOSED_FORM

    def __post_init__(self):
        object.__setattr__(self, "source", TensorSource(self.source))
        for key in self.entries:
            if tuple(sorted(key)) != tuple(key) or max(key) > self.n_max or min(key) < 0:
                raise ShapeError(f"tensor key {key!r} is not a sorted triple within 0..{self.n_max}")

    @property
    def size(self) -> int:
        return self.n_max + 1

    def __getitem__(self, idx) -> float:
        return self.entries.get(tuple(sorted(idx)), 0.0)

    @cached_property
    def dense(self) -> np.ndarray:
        """Full symmetric array, expanded from sorted storage."""
        g = np.zeros((self.size,) * 3)
        for (n, k, m), val in self.entries.items():
            for perm in set(itertools.permutations((n, k, m))):
                g[perm] = val
        g.setflags(write=False)
        return g

    def contract(self, x: np.ndarray, y: np.ndarray | None = None) -> np.ndarray:
        """``out[n] = sum_{k,m} g[n,k,m] x[k] y[m]`` (``y`` defaults to ``x``)."""
        y = x if y is None else y
        return self.dense.reshape(self.size, -1) @ np.outer(x, y).ravel()


def build_tensor(
    basis: EigenBasis,
    lam: float = 1.0,
    source: TensorSource | str = TensorSource.CLOSED_FORM,
    p: float = 3.0,
    c_bound: float = 1.0,
) -> CouplingTensor:
    """Coupling tensor ``g = lam * T`` (or ``lam * c_bound / (1 + n^p + k^p + m^p)``)."""
    source = TensorSource(source)
    lam = float(lam)
    if not math.isfinite(lam) or lam < 0:
        raise InvalidArgumentError(f"coupling scale must be finite and >= 0, got {lam!r}")
    if source is TensorSource.SYNTHETIC_DECAY:
        if not p > 2:
            raise InvalidArgumentError(f"synthetic decay needs p > 2, got {p!r}")
        if not c_bound > 0:
            raise InvalidArgumentError(f"c_bound must be positive, got {c_bound!r}")
        entries = {
            (n, k, m): lam * c_bound / (1.0 + n**p + k**p + m**p)
            for n, k, m in sorted_triples(basis.n_max)
        }
    else:
        if source is TensorSource.CLOSED_FORM:
            T = closed_form_array(basis)
        else:
            T = quadrature_array(basis)
        entries = {t: lam * float(T[t]) for t in sorted_triples(basis.n_max, odd_only=True)}
    return CouplingTensor(basis.n_max, entries, lam, source)


def write_tensor_csv(tensor: CouplingTensor, path) -> Path:
    """Rows ``n,k,m,value`` for each stored sorted triple."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["n", "k", "m", "value"])
        for key in sorted(tensor.entries):
            writer.writerow([*key, repr(float(tensor.entries[key]))])
    return path


def read_tensor_csv(
    path,
    lam: float = 1.0,
    source: TensorSource | str = TensorSource.CLOSED_FORM,
    n_max: int | None = None,
) -> CouplingTensor:
    entries = {}
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if [h.strip() for h in header] != ["n", "k", "m", "value"]:
            raise ShapeError(f"unexpected tensor CSV header {header!r}")
        for row in reader:
            if not row:
                continue
            n, k, m = (int(x) for x in row[:3])
            if not n <= k <= m:
                raise ShapeError(f"tensor CSV row {row!r} is not sorted")
            entries[(n, k, m)] = float(row[3])
    if n_max is None:
        n_max = max((key[2] for key in entries), default=0)
    return CouplingTensor(n_max, entries, lam, source)
