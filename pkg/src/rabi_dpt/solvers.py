"""Steady states, spectra, time evolution and state diagnostics.

Linear algebra runs on the real Hermitian-basis blocks of the Liouvillian
(see ``LiouvillianMatrix.real_block``).  When a parity symmetry is attached
the steady state is sought in the even block, which also removes the
exponentially small tunnelling gap between the two symmetry-broken
branches from the linear system.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import solve_ivp

from ._linalg import BACKEND, Factorization
from .errors import CutoffExceeded, NullSpaceDegenerate, SolverFailure
from .operators import FockSpace, Operator

__all__ = [
    "DensityMatrix",
    "SpectrumResult",
    "steady_state",
    "spectrum",
    "adr",
    "propagate",
    "expect",
    "reduced_oscillator",
    "purity",
    "trace_distance",
    "cutoff_convergence",
    "top_population",
]

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
NEGATIVITY_TOL = 1e-8
ZERO_TOL_FACTOR = 1e-10
RESIDUAL_FACTOR = 1e-10
DENSE_EIG_LIMIT = 600
# SuperLU fill on larger blocks can exhaust memory on desktop machines
SUPERLU_RETRY_LIMIT = 60_000


class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix on ``dims``.

    ``check=False`` skips the eigenvalue test, which costs O(D^3).
    """

    __slots__ = ("dims", "data")

    def __init__(self, dims, data, check: bool = True):
        data = np.array(data.toarray() if sp.issparse(data) else data, dtype=complex)
        dims = tuple(int(d) for d in dims)
        D = int(np.prod(dims))
        if data.shape != (D, D):
            raise ValueError(f"density matrix shape {data.shape} does not match dims {dims}")
        herm = np.abs(data - data.conj().T).max(initial=0.0)
        if herm > HERMITIAN_TOL:
            raise ValueError(f"density matrix not Hermitian (max deviation {herm:.3g})")
        tr = np.trace(data)
        if abs(tr - 1) > TRACE_TOL:
            raise ValueError(f"density matrix trace {tr:.12g} != 1")
        if check:
            lo = la.eigvalsh(data)[0]
            if lo < -NEGATIVITY_TOL:
                raise ValueError(f"density matrix has eigenvalue {lo:.3g} < -{NEGATIVITY_TOL}")
        data.setflags(write=False)
        self.dims = dims
        self.data = data

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def __repr__(self):
        return f"DensityMatrix(dims={list(self.dims)})"


@dataclass(frozen=True)
class SpectrumResult:
    """Liouvillian eigenvalues sorted by descending real part.

    ``sectors`` labels each eigenvalue with the parity block it came from
    (0 when no symmetry was used).  ``zero_mode_index`` is None when no
    eigenvalue lies within ``zero_tol`` of the origin.
    """

    eigenvalues: np.ndarray
    sectors: np.ndarray
    zero_tol: float
    zero_mode_index: int | None

    @property
    def n_zero(self) -> int:
        return int(np.sum(np.abs(self.eigenvalues) < self.zero_tol))


def _norm_inf(A) -> float:
    return float(abs(A).sum(axis=1).max()) if A.shape[0] else 0.0


def _repair(rho: np.ndarray) -> np.ndarray:
    """Hermitize, clip tiny negative eigenvalues and renormalize."""
    rho = (rho + rho.conj().T) / 2
    w, v = la.eigh(rho)
    if w[0] < -NEGATIVITY_TOL:
        raise SolverFailure(f"steady state has eigenvalue {w[0]:.3g} beyond round-off")
    if w[0] < 0:
        w = np.clip(w, 0.0, None)
        rho = (v * w) @ v.conj().T
        rho = (rho + rho.conj().T) / 2
    return rho / np.trace(rho).real


def _shift_invert(A, k, sigma, ncv=None, return_vectors=False, tol=0.0, backend=None):
    """``k`` eigenvalues of real sparse ``A`` nearest ``sigma``."""
    n = A.shape[0]
    if n <= DENSE_EIG_LIMIT:
        dense = A.toarray()
        if return_vectors:
            w, v = la.eig(dense)
        else:
            w, v = la.eigvals(dense), None
        order = np.argsort(np.abs(w - sigma))[:k]
        return w[order], (v[:, order] if v is not None else None)
    k = min(k, n - 2)
    ncv = min(n - 1, ncv or max(2 * k + 1, 24))
    shifted = (A - sigma * sp.identity(n, format="csr")).tocsr()
    fac = Factorization(shifted, backend=backend)
    try:
        out = spla.eigs(A, k=k, sigma=sigma, OPinv=fac.as_operator(), ncv=ncv, tol=tol,
                        return_eigenvectors=return_vectors, maxiter=max(1000, 50 * n // ncv))
    except spla.ArpackNoConvergence as exc:
        raise SolverFailure(
            f"Arnoldi iteration did not converge ({len(exc.eigenvalues)} of {k} eigenvalues)"
        ) from exc
    except spla.ArpackError as exc:
        raise SolverFailure(f"Arnoldi iteration failed: {exc}") from exc
    finally:
        fac.free()
    if return_vectors:
        return out
    return out, None


def _zero_tol(A) -> float:
    return ZERO_TOL_FACTOR * max(_norm_inf(A), 1e-300)


def _eigen_fallback(block, dims, zero_tol):
    """Null vectors of ``block`` via shift-invert near zero."""
    A = block.matrix
    sigma = zero_tol * 1e-2
    w, v = _shift_invert(A, k=4, sigma=sigma, return_vectors=True,
                         backend="superlu" if A.shape[0] <= SUPERLU_RETRY_LIMIT else None)
    zero = np.abs(w) < zero_tol
    cands = []
    for vec in v[:, zero].T:
        rho = block.to_density(np.real(vec * np.exp(-1j * np.angle(vec[np.argmax(np.abs(vec))]))))
        tr = np.trace(rho).real
        if abs(tr) > 1e-12:
            rho = rho / tr
        cands.append(rho)
    if zero.sum() > 1:
        states = []
        for rho in cands:
            try:
                states.append(DensityMatrix(dims, _repair(rho) if abs(np.trace(rho) - 1) < 1e-8 else rho, check=False))
            except (ValueError, SolverFailure):
                pass
        raise NullSpaceDegenerate(
            f"{int(zero.sum())} eigenvalues below zero_tol={zero_tol:.3g}", eigenvalues=w[zero], candidates=states
        )
    if zero.sum() == 0:
        raise SolverFailure(f"no eigenvalue below zero_tol={zero_tol:.3g}; smallest |lambda|={np.abs(w).min():.3g}")
    return cands[0]


def _direct_solve(system, backend, refine):
    """Solve ``system x = e_0``; ``None`` if the system looks singular."""
    n = system.shape[0]
    rhs = np.zeros(n)
    rhs[0] = 1.0
    try:
        fac = Factorization(system, backend=backend)
    except SolverFailure:
        return None
    try:
        x = fac.solve(rhs)
        for _ in range(refine):
            r = rhs - system @ x
            if not np.all(np.isfinite(r)) or np.abs(r).max() <= 1e-15:
                break
            x = x + fac.solve(r)
        # A degenerate null space leaves the system singular but consistent,
        # so the residual above cannot see it; a generic right-hand side can.
        # Refinement lets a merely ill-conditioned system pass the probe.
        probe = np.random.default_rng(0).standard_normal(n)
        y = fac.solve(probe)
        for _ in range(refine):
            r = probe - system @ y
            if not np.all(np.isfinite(r)):
                break
            y = y + fac.solve(r)
        if not np.all(np.isfinite(y)) or np.abs(system @ y - probe).max() > 1e-8 * np.abs(probe).max():
            return None
    finally:
        fac.free()
    return x if np.all(np.isfinite(x)) else None


def steady_state(L, refine: int = 3) -> DensityMatrix:
    """Unique stationary state of ``L``.

    The first row of the (even-parity) real block is replaced by the trace
    condition and the resulting system is solved directly.  If that fails
    the null space is inspected with a shift-invert eigensolve, raising
    :class:`NullSpaceDegenerate` when it is more than one-dimensional.

    The residual ``||L x||_inf <= 1e-10 ||L||_inf`` is checked in the
    orthonormal Hermitian-basis coordinates.
    """
    block = L.real_block(1 if L.parity is not None else 0)
    A = block.matrix
    zero_tol = _zero_tol(A)
    system = sp.vstack([sp.csr_matrix(block.trace_row()), A[1:]], format="csr")
    ok = False
    # PARDISO's static pivoting occasionally returns garbage on these
    # near-singular blocks; SuperLU's threshold pivoting is the retry.
    backends = [BACKEND]
    if BACKEND != "superlu" and A.shape[0] <= SUPERLU_RETRY_LIMIT:
        backends.append("superlu")
    for backend in backends:
        x = _direct_solve(system, backend, refine)
        if x is not None:
            res = np.abs(A @ x).max()
            ok = res <= RESIDUAL_FACTOR * _norm_inf(A) and abs(block.trace_row() @ x - 1) < TRACE_TOL
        if ok:
            break
    rho = block.to_density(x) if ok else _eigen_fallback(block, L.dims, zero_tol)
    return DensityMatrix(L.dims, _repair(rho))


def spectrum(L, k: int = 6, sigma: float | None = None) -> SpectrumResult:
    """The ``k`` eigenvalues with largest real part.

    Each parity block is searched by shift-invert around a small positive
    real shift, over a window of ``2k`` eigenvalues nearest the origin; the
    union is then ranked by real part.  Slowly decaying modes at large
    imaginary frequency can fall outside that window.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    sectors = (1, -1) if L.parity is not None else (0,)
    vals, labels = [], []
    tol = None
    for s in sectors:
        block = L.real_block(s)
        A = block.matrix
        if A.shape[0] == 0:
            continue
        zt = _zero_tol(A)
        tol = zt if tol is None else max(tol, zt)
        shift = sigma if sigma is not None else 10 * zt
        want = min(2 * k, A.shape[0] - 2) if A.shape[0] > DENSE_EIG_LIMIT else A.shape[0]
        w, _ = _shift_invert(A, k=want, sigma=shift)
        vals.append(w)
        labels.append(np.full(len(w), s))
    w = np.concatenate(vals)
    lab = np.concatenate(labels)
    order = np.lexsort((-w.imag, -w.real))[:k]
    w, lab = w[order], lab[order]
    zero = np.flatnonzero(np.abs(w) < tol)
    return SpectrumResult(eigenvalues=w, sectors=lab, zero_tol=tol, zero_mode_index=int(zero[0]) if len(zero) else None)


def adr(L, k: int = 6, result: SpectrumResult | None = None) -> float:
    """Asymptotic decay rate ``-max{Re lambda : |lambda| > zero_tol}``."""
    result = result or spectrum(L, k)
    w = result.eigenvalues
    nonzero = w[np.abs(w) > result.zero_tol]
    if len(nonzero) == 0:
        raise SolverFailure("no nonzero eigenvalue found; increase k")
    return float(-nonzero.real.max())


def propagate(L, rho0, times, rtol: float = 1e-10, atol: float = 1e-12, drift_tol: float = 1e-9):
    """Integrate ``d rho/dt = L[rho]`` with DOP853 and return states at ``times``.

    Each returned state is renormalized to unit trace; a trace drift above
    ``drift_tol`` before renormalization raises :class:`SolverFailure`.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) == 0:
        raise ValueError("times must be a non-empty 1-d array")
    if np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly increasing")
    data = rho0.data if isinstance(rho0, DensityMatrix) else np.asarray(rho0, dtype=complex)
    block = L.real_block(0)
    A = block.matrix
    x0 = block.from_density(data)
    if A.nnz == 0:
        ys = np.repeat(x0[:, None], len(times), axis=1)
    else:
        sol = solve_ivp(lambda t, x: A @ x, (times[0], times[-1]), x0, method="DOP853",
                        t_eval=times, rtol=rtol, atol=atol)
        if sol.status != 0:
            raise SolverFailure(f"time integration failed: {sol.message}")
        ys = sol.y
    out = []
    trace_row = block.trace_row()
    for y in ys.T:
        tr = trace_row @ y
        if abs(tr - 1) > drift_tol:
            raise SolverFailure(f"trace drift {abs(tr - 1):.3g} exceeds {drift_tol}")
        out.append(DensityMatrix(L.dims, block.to_density(y / tr), check=False))
    return out


def _data(x):
    if isinstance(x, (DensityMatrix, Operator)):
        return x.data
    return x


def expect(rho, op) -> complex:
    """``Tr(rho O)``."""
    r, o = _data(rho), _data(op)
    if isinstance(rho, DensityMatrix) and isinstance(op, Operator) and tuple(op.dims) != tuple(rho.dims):
        raise ValueError(f"dimension mismatch: {op.dims} vs {rho.dims}")
    if r.shape != o.shape:
        raise ValueError(f"dimension mismatch: {o.shape} vs {r.shape}")
    if sp.issparse(o):
        return complex(o.multiply(r.T).sum())
    return complex(np.einsum("ij,ji->", r, o))


def reduced_oscillator(rho: DensityMatrix) -> DensityMatrix:
    """Partial trace over every factor but the last (the oscillator)."""
    dims = rho.dims
    if len(dims) == 1:
        return rho
    ds, df = int(np.prod(dims[:-1])), dims[-1]
    red = np.einsum("ikil->kl", rho.data.reshape(ds, df, ds, df))
    return DensityMatrix((df,), red, check=False)


def purity(rho) -> float:
    r = _data(rho)
    return float(np.sum(np.abs(r) ** 2))


def trace_distance(rho, sigma) -> float:
    d = _data(rho) - _data(sigma)
    return float(0.5 * np.abs(la.eigvalsh((d + d.conj().T) / 2)).sum())


def top_population(rho: DensityMatrix, levels: int = 5) -> float:
    """Total oscillator population in the highest ``levels`` Fock states."""
    p = np.diag(reduced_oscillator(rho).data).real
    return float(p[-levels:].sum())


def cutoff_convergence(builder, observable, tol: float = 1e-6, start: int = 16, cap: int = 512,
                       guard: float = 1e-8, return_state: bool = False):
    """Double the Fock cutoff until ``observable`` of the steady state settles.

    Parameters
    ----------
    builder : callable
        ``builder(FockSpace) -> LiouvillianMatrix``.
    observable : callable
        ``observable(DensityMatrix) -> float``.

    Returns the smallest cutoff ``c`` whose value agrees with the one at
    ``2c`` to relative ``tol`` and whose top five Fock levels hold less
    than ``guard`` population, together with that value (and the state
    if ``return_state``).
    """
    if tol <= 0:
        raise ValueError("tol must be > 0")
    cutoff = start
    prev = None
    while cutoff <= cap:
        rho = steady_state(builder(FockSpace(cutoff)))
        val = float(observable(rho))
        top = top_population(rho)
        if prev is not None:
            pc, pv, ptop, prho = prev
            if abs(val - pv) <= tol * max(abs(val), 1e-300) and ptop < guard:
                return (pc, pv, prho) if return_state else (pc, pv)
        prev = (cutoff, val, top, rho)
        cutoff *= 2
    raise CutoffExceeded(f"observable not converged to {tol:g} at cutoff cap {cap}")
