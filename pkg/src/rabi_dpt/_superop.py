"""Real representation of a Lindbladian on Hermitian operators.

A Hermitian ``rho`` is expanded in the orthonormal basis

* ``E_d(k)   = |k><k|``
* ``E_s(i,j) = (|i><j| + |j><i|) / sqrt(2)``,      i < j
* ``E_a(i,j) = i (|i><j| - |j><i|) / sqrt(2)``,    i < j

with real coefficients, and ``L`` becomes a real matrix of half the
memory footprint of the complex superoperator.  With a parity diagonal
``p`` the pairs split into ``p_i p_j = +1`` (even) and ``-1`` (odd) sectors
which ``L`` does not mix.

The compiled kernel in ``_superop_ext`` builds the block directly from the
Hamiltonian and jump operators.  The pure-Python path builds the complex
superoperator and projects it; it is used when the extension is missing or
``RABI_DPT_PURE=1`` is set.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

SQRT2 = np.sqrt(2.0)

try:
    if os.environ.get("RABI_DPT_PURE", "") not in ("", "0"):
        raise ImportError("pure-Python path requested")
    from ._superop_ext import assemble_real as _assemble_ext
    KERNEL = "compiled"
except ImportError:
    _assemble_ext = None
    KERNEL = "python"


@dataclass(frozen=True, eq=False)
class RealBlock:
    """Real matrix of ``L`` restricted to one parity sector.

    Coordinates are ordered ``[diag..., sym..., antisym...]``.
    """

    dim: int
    sector: int
    diag: np.ndarray
    pi: np.ndarray
    pj: np.ndarray
    matrix: sp.csr_matrix

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_diag(self) -> int:
        return len(self.diag)

    @property
    def n_pairs(self) -> int:
        return len(self.pi)

    def trace_row(self) -> np.ndarray:
        row = np.zeros(self.size)
        row[: self.n_diag] = 1.0
        return row

    def to_density(self, x) -> np.ndarray:
        """Coordinates to a D x D Hermitian matrix."""
        x = np.asarray(x, dtype=float)
        nd, npair = self.n_diag, self.n_pairs
        rho = np.zeros((self.dim, self.dim), dtype=complex)
        rho[self.diag, self.diag] = x[:nd]
        off = (x[nd : nd + npair] + 1j * x[nd + npair :]) / SQRT2
        rho[self.pi, self.pj] = off
        rho[self.pj, self.pi] = off.conj()
        return rho

    def from_density(self, rho) -> np.ndarray:
        """Project a D x D matrix onto this block's coordinates."""
        rho = np.asarray(rho)
        off = rho[self.pi, self.pj]
        return np.concatenate([rho[self.diag, self.diag].real, SQRT2 * off.real, SQRT2 * off.imag])


def sector_coordinates(parity, sector: int):
    """Diagonal indices and ``(i, j)`` pairs belonging to ``sector``."""
    D = len(parity)
    iu, ju = np.triu_indices(D, 1)
    if sector == 0:
        return np.arange(D), iu, ju
    keep = parity[iu] * parity[ju] == sector
    diag = np.arange(D) if sector == 1 else np.zeros(0, dtype=np.int64)
    return diag, iu[keep], ju[keep]


def projector(D, diag, pi, pj) -> sp.csc_matrix:
    """Isometry T from block coordinates to column-stacked vec(rho)."""
    nd, npair = len(diag), len(pi)
    ij = pi + D * pj
    ji = pj + D * pi
    h = 1 / SQRT2
    rows = np.concatenate([diag + D * diag, ij, ji, ij, ji])
    cols = np.concatenate(
        [np.arange(nd), nd + np.arange(npair), nd + np.arange(npair),
         nd + npair + np.arange(npair), nd + npair + np.arange(npair)]
    )
    vals = np.concatenate(
        [np.ones(nd), np.full(npair, h), np.full(npair, h), np.full(npair, 1j * h), np.full(npair, -1j * h)]
    )
    return sp.csc_matrix((vals, (rows, cols)), shape=(D * D, nd + 2 * npair))


def assemble_python(lm, diag, pi, pj) -> sp.csr_matrix:
    T = projector(lm.dim, diag, pi, pj)
    block = (T.conj().T @ (lm.data @ T)).tocsr()
    out = sp.csr_matrix(block.real)
    out.eliminate_zeros()
    return out


def _effective_generator(lm):
    """``K = -iH - sum rate c^dag c`` and scaled jumps ``sqrt(2 rate) c``, CSC."""
    H = sp.csc_matrix(lm.hamiltonian.data, dtype=complex)
    K = -1j * H
    jumps = []
    for t in lm.terms:
        if t.rate == 0:
            continue
        c = sp.csc_matrix(t.jump.data, dtype=complex)
        K = K - t.rate * (c.conj().T @ c)
        c = np.sqrt(2 * t.rate) * c
        c.sort_indices()
        jumps.append(c)
    K = sp.csc_matrix(K)
    K.sum_duplicates()
    K.sort_indices()
    return K, jumps


def assemble_compiled(lm, diag, pi, pj) -> sp.csr_matrix:
    D = lm.dim
    K, jumps = _effective_generator(lm)
    nj = len(jumps)
    c_indptr = np.zeros((max(nj, 1), D + 1), dtype=np.int64)
    idx, dat, offset = [], [], 0
    for n, c in enumerate(jumps):
        c_indptr[n] = c.indptr + offset
        idx.append(c.indices.astype(np.int64))
        dat.append(c.data)
        offset += c.nnz
    c_indices = np.concatenate(idx) if idx else np.zeros(0, dtype=np.int64)
    c_data = np.concatenate(dat) if dat else np.zeros(0, dtype=complex)

    nd, npair = len(diag), len(pi)
    coord = np.full((D, D), -1, dtype=np.int64)
    coord[diag, diag] = np.arange(nd)
    coord[pi, pj] = nd + np.arange(npair)

    # upper bounds on output entries: each M entry lands in at most two
    # coordinates per output column; pair inputs produce two columns
    nK = np.diff(K.indptr)
    per_diag = 2 * nK[diag]
    per_pair = nK[pi] + nK[pj]
    for c in jumps:
        nc = np.diff(c.indptr)
        per_diag = per_diag + nc[diag] ** 2
        per_pair = per_pair + nc[pi] * nc[pj]
    cap_anti = 2 * int(per_pair.sum())
    cap_main = 2 * int(per_diag.sum()) + cap_anti

    indptr, indices, data = _assemble_ext(
        D,
        np.ascontiguousarray(diag, dtype=np.int64),
        np.ascontiguousarray(pi, dtype=np.int64),
        np.ascontiguousarray(pj, dtype=np.int64),
        coord,
        K.indptr.astype(np.int64),
        K.indices.astype(np.int64),
        np.ascontiguousarray(K.data),
        nj,
        c_indptr,
        c_indices,
        np.ascontiguousarray(c_data),
        cap_main,
        cap_anti,
    )
    m = nd + 2 * npair
    return sp.csc_matrix((data, indices, indptr), shape=(m, m)).tocsr()


def real_block(lm, sector: int = 0, kernel: str | None = None) -> RealBlock:
    """Assemble the real block of ``lm`` for ``sector`` in {+1, -1, 0}."""
    if sector not in (-1, 0, 1):
        raise ValueError("sector must be +1, -1 or 0")
    parity = lm.parity if lm.parity is not None else np.ones(lm.dim)
    diag, pi, pj = sector_coordinates(parity, sector)
    kernel = kernel or KERNEL
    if kernel == "compiled":
        if _assemble_ext is None:
            raise ImportError("compiled kernel not available")
        mat = assemble_compiled(lm, diag, pi, pj)
    elif kernel == "python":
        mat = assemble_python(lm, diag, pi, pj)
    else:
        raise ValueError(f"unknown kernel {kernel!r}")
    return RealBlock(dim=lm.dim, sector=sector, diag=diag, pi=pi, pj=pj, matrix=mat)
