"""Truncated bosonic, qubit and collective-spin operators.

Basis conventions
-----------------
* Fock states are ordered ``|0>, |1>, ..., |cutoff>``.
* Spin states are ordered by descending magnetic quantum number, so for a
  qubit index 0 is ``|up>`` (sigma_z = +1) and index 1 is ``|down>``.
* Composite spaces are ordered spin-major: the spin index varies slowest,
  ``index = k_spin * dim_fock + n``.  Every helper in this package that
  reshapes or partially traces relies on this ordering.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from numbers import Number

import numpy as np
import scipy.sparse as sp

__all__ = [
    "DENSE_LIMIT",
    "FockSpace",
    "SpinSpace",
    "Operator",
    "annihilation",
    "creation",
    "number",
    "pauli",
    "collective_spin",
    "tensor",
    "identity",
    "quadrature",
    "fock_parity",
]

#: Operators of smaller total dimension are stored as dense arrays.
DENSE_LIMIT = 64


@dataclass(frozen=True)
class FockSpace:
    """Oscillator space truncated at ``cutoff`` (dimension ``cutoff + 1``)."""

    cutoff: int

    def __post_init__(self):
        if int(self.cutoff) != self.cutoff or self.cutoff < 1:
            raise ValueError(f"Fock cutoff must be an integer >= 1, got {self.cutoff}")

    @property
    def dim(self) -> int:
        return int(self.cutoff) + 1


@dataclass(frozen=True)
class SpinSpace:
    """Spin-j space; ``j = 1/2`` for a qubit, ``j = N/2`` for N symmetric qubits."""

    j: float

    def __post_init__(self):
        twoj = 2 * self.j
        if abs(twoj - round(twoj)) > 1e-12 or round(twoj) < 1:
            raise ValueError(f"j must be a positive half-integer, got {self.j}")

    @property
    def dim(self) -> int:
        return int(round(2 * self.j)) + 1


def _store(matrix):
    """Pick dense or CSR storage according to :data:`DENSE_LIMIT`."""
    if sp.issparse(matrix):
        if matrix.shape[0] < DENSE_LIMIT:
            return np.asarray(matrix.toarray(), dtype=complex)
        return sp.csr_matrix(matrix, dtype=complex)
    arr = np.asarray(matrix, dtype=complex)
    if arr.shape[0] >= DENSE_LIMIT:
        return sp.csr_matrix(arr)
    return arr


class Operator:
    """Square complex matrix on a (possibly composite) truncated space.

    Instances are immutable: arithmetic always returns new operators.

    Parameters
    ----------
    dims : sequence of int
        Subspace dimensions, slowest index first.
    data : array_like or sparse matrix
        Matrix of size ``prod(dims)``.
    """

    __slots__ = ("_dims", "_data")

    def __init__(self, dims, data):
        dims = tuple(int(d) for d in dims)
        data = _store(data)
        n = int(np.prod(dims))
        if data.ndim != 2 or data.shape != (n, n):
            raise ValueError(f"matrix of shape {data.shape} does not match dims {dims}")
        if sp.issparse(data):
            data.sort_indices()
        else:
            data.setflags(write=False)
        object.__setattr__(self, "_dims", dims)
        object.__setattr__(self, "_data", data)

    def __setattr__(self, name, value):
        raise AttributeError("Operator is immutable")

    @property
    def dims(self) -> tuple:
        return self._dims

    @property
    def data(self):
        return self._data

    @property
    def dim(self) -> int:
        return self._data.shape[0]

    @property
    def shape(self):
        return self._data.shape

    @property
    def issparse(self) -> bool:
        return sp.issparse(self._data)

    def toarray(self) -> np.ndarray:
        if self.issparse:
            return self._data.toarray()
        return np.array(self._data)

    def tocsr(self) -> sp.csr_matrix:
        return sp.csr_matrix(self._data)

    def dag(self) -> "Operator":
        return Operator(self._dims, self._data.conj().T)

    def trace(self) -> complex:
        return complex(self._data.diagonal().sum())

    def is_hermitian(self, atol: float = 1e-12) -> bool:
        diff = self._data - self._data.conj().T
        if sp.issparse(diff):
            return diff.nnz == 0 or np.abs(diff.data).max() <= atol
        return bool(np.abs(diff).max(initial=0.0) <= atol)

    def _check(self, other: "Operator"):
        if self._dims != other._dims:
            raise ValueError(f"dimension mismatch: {self._dims} vs {other._dims}")

    def _combine(self, other, fn):
        self._check(other)
        a, b = self._data, other._data
        if sp.issparse(a) or sp.issparse(b):
            a, b = sp.csr_matrix(a), sp.csr_matrix(b)
        return Operator(self._dims, fn(a, b))

    def __add__(self, other):
        if not isinstance(other, Operator):
            return NotImplemented
        return self._combine(other, lambda a, b: a + b)

    def __sub__(self, other):
        if not isinstance(other, Operator):
            return NotImplemented
        return self._combine(other, lambda a, b: a - b)

    def __matmul__(self, other):
        if not isinstance(other, Operator):
            return NotImplemented
        return self._combine(other, lambda a, b: a @ b)

    def __mul__(self, scalar):
        if not isinstance(scalar, Number):
            return NotImplemented
        return Operator(self._dims, self._data * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        if not isinstance(scalar, Number):
            return NotImplemented
        return Operator(self._dims, self._data / scalar)

    def __neg__(self):
        return Operator(self._dims, -self._data)

    def __eq__(self, other):
        if not isinstance(other, Operator) or self._dims != other._dims:
            return False
        diff = sp.csr_matrix(self._data) - sp.csr_matrix(other._data)
        return diff.count_nonzero() == 0

    __hash__ = None

    def __repr__(self):
        kind = "sparse" if self.issparse else "dense"
        return f"Operator(dims={list(self._dims)}, {kind})"


def annihilation(space: FockSpace) -> Operator:
    """Truncated ladder operator with ``a[n-1, n] = sqrt(n)``."""
    n = np.arange(1, space.dim)
    return Operator([space.dim], sp.diags(np.sqrt(n), 1, shape=(space.dim, space.dim)))


def creation(space: FockSpace) -> Operator:
    return annihilation(space).dag()


def number(space: FockSpace) -> Operator:
    return Operator([space.dim], sp.diags(np.arange(space.dim, dtype=float), 0))


def fock_parity(space: FockSpace) -> np.ndarray:
    """Diagonal of ``(-1)^{a^dag a}``."""
    return (-1.0) ** np.arange(space.dim)


def pauli(space: SpinSpace = SpinSpace(0.5)) -> dict:
    """Pauli matrices ``{"x", "y", "z", "plus", "minus"}`` for a qubit."""
    if space.dim != 2:
        raise ValueError(f"Pauli matrices need j = 1/2, got j = {space.j}")
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]])
    sz = np.diag([1.0, -1.0]).astype(complex)
    out = {"x": sx, "y": sy, "z": sz, "plus": (sx + 1j * sy) / 2, "minus": (sx - 1j * sy) / 2}
    return {k: Operator([2], v) for k, v in out.items()}


def collective_spin(n_spins: int) -> dict:
    """Collective operators for ``j = N/2`` in the symmetric Dicke sector.

    Returns ``{"x", "y", "z", "plus", "minus"}`` on dimension ``N + 1``, with
    basis index ``k`` holding ``m = j - k``.
    """
    if n_spins < 1:
        raise ValueError("need at least one spin")
    j = n_spins / 2
    m = j - np.arange(n_spins + 1)
    # J+ |j, m> = sqrt(j(j+1) - m(m+1)) |j, m+1>, i.e. entry (k-1, k)
    up = np.sqrt(j * (j + 1) - m[1:] * (m[1:] + 1))
    dim = n_spins + 1
    jp = sp.diags(up, 1, shape=(dim, dim), dtype=complex)
    jm = jp.conj().T
    jz = sp.diags(m, 0, dtype=complex)
    ops = {
        "plus": jp,
        "minus": jm,
        "x": (jp + jm) / 2,
        "y": (jp - jm) / 2j,
        "z": jz,
    }
    return {k: Operator([dim], v) for k, v in ops.items()}


def identity(dim: int) -> Operator:
    return Operator([dim], sp.identity(dim, dtype=complex, format="csr"))


def tensor(*ops: Operator) -> Operator:
    """Kronecker product; the first factor varies slowest."""
    if not ops:
        raise ValueError("tensor needs at least one operator")
    dims = sum((op.dims for op in ops), ())
    data = reduce(lambda a, b: sp.kron(a, b, format="csr"), (sp.csr_matrix(op.data) for op in ops))
    return Operator(dims, data)


def quadrature(space: FockSpace, theta: float) -> Operator:
    """``X(theta) = a e^{-i theta} + a^dag e^{i theta}``."""
    a = annihilation(space)
    return a * np.exp(-1j * theta) + a.dag() * np.exp(1j * theta)
