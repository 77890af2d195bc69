"""Finite-size sweeps, power-law fits and scaling collapse.

The "size" is ``eta = Omega/omega0`` for the Rabi model and the number of
spins ``N`` for the Dicke model.  Collapse coordinates are

    x = size * |g - g_c|^(nu/zeta),    y = |g - g_c|^nu * value.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats
from scipy.optimize import minimize_scalar

from .errors import NullSpaceDegenerate, SolverFailure
from .liouvillian import ModelParams, critical_coupling, open_dicke_liouvillian, open_qrm_liouvillian
from .operators import FockSpace, annihilation, identity, pauli, tensor
from .solvers import (
    DensityMatrix,
    cutoff_convergence,
    expect,
    purity,
    reduced_oscillator,
    steady_state,
    top_population,
)

__all__ = [
    "SweepSpec",
    "ScalingPoint",
    "ScalingDataset",
    "CollapseResult",
    "SweepFailed",
    "OBSERVABLES",
    "observable_value",
    "max_quadrature_variance",
    "collapse_grid",
    "solve_point",
    "sweep",
    "fit_power_law",
    "collapse",
    "dicke_prefactor",
]

OBSERVABLES = ("population", "max-quadrature-variance", "purity")
FAILURE_FRACTION = 0.10


class SweepFailed(SolverFailure):
    """More than 10% of the grid points failed; ``dataset`` holds the rest."""

    def __init__(self, message, dataset=None):
        super().__init__(message)
        self.dataset = dataset


@dataclass(frozen=True)
class SweepSpec:
    """Grid of steady-state solves.

    ``couplings`` is either a sequence of g shared by every size or a
    mapping ``size -> sequence of g``.  ``cutoff`` is ``"auto"`` (doubling
    from ``cutoff_start`` until ``tol`` is met) or a fixed integer.
    For the Dicke model ``spin_eta`` sets the spin frequency ``Omega/omega0``.
    """

    model: str
    sizes: tuple
    couplings: object
    kappa_ratio: float = 0.2
    gamma_d_ratio: float = 0.0
    observable: str = "population"
    cutoff: object = "auto"
    tol: float = 1e-6
    cutoff_start: int = 16
    cutoff_cap: int = 512
    spin_eta: float = 1.0
    omega0: float = 1.0

    def __post_init__(self):
        if self.model not in ("qrm", "dicke"):
            raise ValueError("model must be 'qrm' or 'dicke'")
        if self.observable not in OBSERVABLES:
            raise ValueError(f"observable must be one of {OBSERVABLES}")
        object.__setattr__(self, "sizes", tuple(self.sizes))
        if not self.sizes or any(s < 1 for s in self.sizes):
            raise ValueError("sizes must be >= 1")
        if self.model == "dicke" and any(int(s) != s for s in self.sizes):
            raise ValueError("Dicke sizes are spin counts and must be integers")
        if self.cutoff != "auto" and (int(self.cutoff) != self.cutoff or self.cutoff < 1):
            raise ValueError("cutoff must be 'auto' or a positive integer")
        if self.kappa_ratio < 0 or self.gamma_d_ratio < 0:
            raise ValueError("rates must be >= 0")
        for _, g in self.pairs():
            if not (np.isfinite(g) and g >= 0):
                raise ValueError(f"coupling {g} must be finite and >= 0")

    @property
    def g_c(self) -> float:
        return critical_coupling(self.kappa_ratio)

    def pairs(self):
        """Grid points ``(size, g)`` in sorted order."""
        if isinstance(self.couplings, dict):
            out = [(s, float(g)) for s in self.sizes for g in self.couplings.get(s, ())]
        else:
            out = [(s, float(g)) for s in self.sizes for g in self.couplings]
        return sorted(set(out))

    def params(self, size, g) -> ModelParams:
        eta = self.spin_eta if self.model == "dicke" else size
        return ModelParams.from_ratios(eta=eta, g=g, kappa_ratio=self.kappa_ratio,
                                       gamma_d_ratio=self.gamma_d_ratio, omega0=self.omega0)

    def builder(self, size, g):
        p = self.params(size, g)
        if self.model == "dicke":
            return lambda fock: open_dicke_liouvillian(p, int(size), fock)
        return lambda fock: open_qrm_liouvillian(p, fock)


@dataclass(frozen=True)
class ScalingPoint:
    size: float
    g: float
    value: float
    cutoff: int
    residual: float
    top_population: float = np.nan
    parity_violation: float = np.nan
    error: str = ""
    # stationary state not unique, but the observable agrees on all of them
    degenerate: bool = False

    @property
    def ok(self) -> bool:
        return not self.error


@dataclass(frozen=True)
class ScalingDataset:
    model: str
    observable: str
    g_c: float
    points: tuple = field(default_factory=tuple)

    @property
    def failures(self):
        return [pt for pt in self.points if not pt.ok]

    def good(self):
        return [pt for pt in self.points if pt.ok]

    def arrays(self):
        good = self.good()
        return (np.array([pt.size for pt in good], dtype=float),
                np.array([pt.g for pt in good]),
                np.array([pt.value for pt in good]))


@dataclass(frozen=True)
class CollapseResult:
    """Rescaled data and its spread about a common curve.

    ``dispersion`` is the mean of ``bin_dispersion`` over all bins with at
    least two curves, pooled across branches (NP: g < g_c, SP: g > g_c).
    """

    x: np.ndarray
    y: np.ndarray
    size: np.ndarray
    branch: np.ndarray
    nu: float
    zeta: float
    g_c: float
    dispersion: float
    bin_centers: dict
    bin_dispersion: dict
    empty_bins: dict
    prefactor: float | None = None

    def branch_dispersion(self, branch: str) -> float:
        d = self.bin_dispersion.get(branch, np.array([]))
        return float(np.mean(d)) if len(d) else float("nan")

    def curves(self, branch: str):
        """``{size: (x, y)}`` sorted by x, for one branch."""
        out = {}
        sel = self.branch == branch
        for s in np.unique(self.size[sel]):
            m = sel & (self.size == s)
            order = np.argsort(self.x[m])
            out[float(s)] = (self.x[m][order], self.y[m][order])
        return out


# --- observables ----------------------------------------------------------------


def _oscillator_moments(rho: DensityMatrix):
    osc = reduced_oscillator(rho)
    f = FockSpace(osc.dim - 1)
    a = annihilation(f)
    mean = expect(osc, a)
    n = expect(osc, a.dag() @ a).real
    m = expect(osc, a @ a)
    return mean, n, m


def max_quadrature_variance(rho: DensityMatrix, n_grid: int = 64, xtol: float = 1e-6) -> float:
    """``max_theta Var X(theta)`` by a 64-point scan plus golden-section refinement."""
    mean, n, m = _oscillator_moments(rho)
    n_c = n - abs(mean) ** 2
    m_c = m - mean**2

    def var(theta):
        return 1 + 2 * n_c + 2 * (m_c * np.exp(-2j * theta)).real

    grid = np.linspace(0, np.pi, n_grid, endpoint=False)
    k = int(np.argmax(var(grid)))
    step = np.pi / n_grid
    res = minimize_scalar(lambda t: -var(t), bracket=(grid[k] - step, grid[k], grid[k] + step),
                          method="golden", tol=xtol)
    return float(max(-res.fun, var(grid[k])))


def observable_value(rho: DensityMatrix, name: str) -> float:
    if name == "population":
        return _oscillator_moments(rho)[1]
    if name == "max-quadrature-variance":
        return max_quadrature_variance(rho)
    if name == "purity":
        return purity(reduced_oscillator(rho))
    raise ValueError(f"unknown observable {name!r}")


def _parity_violation(rho: DensityMatrix, model: str):
    """``max(|<a>|, |<sigma_x>|)`` (``|<J_x>|`` for Dicke)."""
    ds, df = int(np.prod(rho.dims[:-1])), rho.dims[-1]
    a = tensor(identity(ds), annihilation(FockSpace(df - 1)))
    if model == "qrm":
        sx = tensor(pauli()["x"], identity(df))
    else:
        from .operators import collective_spin

        sx = tensor(collective_spin(ds - 1)["x"], identity(df))
    return max(abs(expect(rho, a)), abs(expect(rho, sx)))


# --- sweeps ---------------------------------------------------------------------


def collapse_grid(sizes, g_c: float, x_min: float = 0.3, x_max: float = 30.0, n: int = 8,
                  exponent: float = 2.0):
    """Couplings with ``size |g - g_c|^exponent`` log-uniform in [x_min, x_max].

    Returns ``{size: sorted couplings}`` with both branches; normal-phase
    points that would need ``g <= 0`` are dropped.
    """
    xs = np.logspace(np.log10(x_min), np.log10(x_max), n)
    out = {}
    for s in sizes:
        d = (xs / s) ** (1 / exponent)
        gs = [g_c - v for v in d if g_c - v > 0] + [g_c + v for v in d]
        out[s] = sorted(gs)
    return out


def _degenerate_value(spec, build, obs, exc):
    """Observable on a degenerate stationary manifold, if every candidate agrees."""
    vals = [obs(c) for c in exc.candidates]
    if not vals:
        raise exc
    spread = max(vals) - min(vals)
    if spread > spec.tol * max(1.0, max(abs(v) for v in vals)):
        raise exc
    return exc.candidates[0], float(np.mean(vals))


def solve_point(spec: SweepSpec, size, g) -> ScalingPoint:
    """Steady state and observable at one grid point; failures are recorded.

    A degenerate null space (e.g. the undamped qubit at ``g = 0``) is
    accepted only when the observable takes one value on every candidate
    stationary state; the point is then flagged ``degenerate``.
    """
    try:
        build = spec.builder(size, g)
        obs = lambda r: observable_value(r, spec.observable)  # noqa: E731
        degenerate = False
        try:
            if spec.cutoff == "auto":
                cutoff, value, rho = cutoff_convergence(build, obs, tol=spec.tol, start=spec.cutoff_start,
                                                        cap=spec.cutoff_cap, return_state=True)
            else:
                cutoff = int(spec.cutoff)
                rho = steady_state(build(FockSpace(cutoff)))
                value = obs(rho)
        except NullSpaceDegenerate:
            cutoff = spec.cutoff_start if spec.cutoff == "auto" else int(spec.cutoff)
            try:
                steady_state(build(FockSpace(cutoff)))
                raise SolverFailure("null space degenerate only at larger cutoffs")
            except NullSpaceDegenerate as exc:
                rho, value = _degenerate_value(spec, build, obs, exc)
            degenerate = True
        L = build(FockSpace(cutoff))
        block = L.real_block(1)
        x = block.from_density(rho.data)
        A = block.matrix
        residual = float(np.abs(A @ x).max() / abs(A).sum(axis=1).max())
        return ScalingPoint(size=size, g=g, value=float(value), cutoff=cutoff, residual=residual,
                            top_population=top_population(rho),
                            parity_violation=_parity_violation(rho, spec.model), degenerate=degenerate)
    except (SolverFailure, ValueError, MemoryError) as exc:
        return ScalingPoint(size=size, g=g, value=float("nan"), cutoff=-1, residual=float("nan"),
                            error=f"{type(exc).__name__}: {exc}")


def _solve_star(args):
    return solve_point(*args)


def sweep(spec: SweepSpec, jobs: int | None = 1, progress=None) -> ScalingDataset:
    """Solve every grid point of ``spec``.

    Points are processed in parallel when ``jobs > 1`` (``None`` means all
    cores); the dataset is always ordered by ``(size, g)``.  Raises
    :class:`SweepFailed` if more than 10% of the points fail.
    """
    pairs = spec.pairs()
    jobs = (os.cpu_count() or 1) if jobs is None else jobs
    if jobs > 1 and len(pairs) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            points = list(pool.map(_solve_star, [(spec, s, g) for s, g in pairs]))
    else:
        points = []
        for s, g in pairs:
            points.append(solve_point(spec, s, g))
            if progress is not None:
                progress(points[-1])
    data = ScalingDataset(model=spec.model, observable=spec.observable, g_c=spec.g_c, points=tuple(points))
    n_fail = len(data.failures)
    if pairs and n_fail > FAILURE_FRACTION * len(pairs):
        raise SweepFailed(f"{n_fail} of {len(pairs)} points failed", dataset=data)
    return data


# --- fits and collapse ----------------------------------------------------------


def fit_power_law(x, y=None):
    """Least-squares slope of ``log y`` against ``log x``.

    Accepts two arrays or a single sequence of ``(x, y)`` pairs.  Returns
    ``(exponent, stderr)``.
    """
    if y is None:
        x, y = np.asarray(x, dtype=float).T
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if len(x) != len(y) or len(x) < 3:
        raise ValueError("need at least 3 (x, y) points")
    if np.any(x <= 0) or np.any(y <= 0) or not np.all(np.isfinite(x * y)):
        raise ValueError("power-law fit needs positive finite data")
    res = stats.linregress(np.log(x), np.log(y))
    return float(res.slope), float(res.stderr)


def _branch_labels(g, g_c):
    return np.where(np.asarray(g) < g_c, "np", "sp")


def _interp_loglog(xq, x, y):
    return np.exp(np.interp(np.log(xq), np.log(x), np.log(y)))


def collapse(dataset, nu: float = 1.0, zeta: float = 0.5, g_c: float | None = None, n_bins: int = 8) -> CollapseResult:
    """Rescale a dataset and measure how well the sizes collapse.

    Within each branch, each size forms one curve.  ``n_bins`` log-spaced
    bins cover the branch's x-range; at each bin's geometric centre every
    curve whose x-range contains it is log-log interpolated, and the bin
    scores ``(max - min) / median`` over those curves.  Bins reached by
    fewer than two curves are listed in ``empty_bins``.
    """
    if isinstance(dataset, ScalingDataset):
        size, g, value = dataset.arrays()
        g_c = dataset.g_c if g_c is None else g_c
    else:
        size, g, value = (np.asarray(v, dtype=float) for v in dataset)
    if g_c is None:
        raise ValueError("g_c is required for raw arrays")
    if np.any(g == g_c):
        raise ValueError("collapse needs g != g_c at every point")
    d = np.abs(g - g_c)
    x = size * d ** (nu / zeta)
    y = d**nu * value
    branch = _branch_labels(g, g_c)
    centers, disp, empty = {}, {}, {}
    for b in ("np", "sp"):
        sel = branch == b
        if not np.any(sel):
            continue
        curves = []
        for s in np.unique(size[sel]):
            m = sel & (size == s)
            order = np.argsort(x[m])
            curves.append((x[m][order], y[m][order]))
        lo, hi = x[sel].min(), x[sel].max()
        if hi <= lo:
            centers[b], disp[b], empty[b] = np.array([lo]), np.array([]), np.array([lo])
            continue
        edges = np.logspace(np.log10(lo), np.log10(hi), n_bins + 1)
        mids = np.sqrt(edges[:-1] * edges[1:])
        ds, em = [], []
        for c in mids:
            vals = [_interp_loglog(c, cx, cy) for cx, cy in curves if len(cx) >= 2 and cx[0] <= c <= cx[-1]]
            if len(vals) < 2:
                em.append(c)
                continue
            vals = np.array(vals)
            ds.append((vals.max() - vals.min()) / np.median(vals))
        centers[b], disp[b], empty[b] = mids, np.array(ds), np.array(em)
    pooled = np.concatenate([v for v in disp.values()]) if disp else np.array([])
    dispersion = float(np.mean(pooled)) if len(pooled) else float("nan")
    return CollapseResult(x=x, y=y, size=size, branch=branch, nu=nu, zeta=zeta, g_c=g_c,
                          dispersion=dispersion, bin_centers=centers, bin_dispersion=disp, empty_bins=empty)


def dicke_prefactor(rabi: CollapseResult, dicke: CollapseResult, n_grid: int = 16) -> float:
    """Scale ``c`` such that ``c * y_dicke`` best matches ``y_rabi`` in log space.

    Every Rabi curve is compared with every Dicke curve of the same branch
    on ``n_grid`` log-spaced points of their common x-range; ``log c`` is the
    mean log ratio, the least-squares solution.
    """
    diffs = []
    for b in ("np", "sp"):
        rc, dc = rabi.curves(b), dicke.curves(b)
        for xr, yr in rc.values():
            for xd, yd in dc.values():
                if len(xr) < 2 or len(xd) < 2:
                    continue
                lo, hi = max(xr[0], xd[0]), min(xr[-1], xd[-1])
                if hi <= lo:
                    continue
                xq = np.logspace(np.log10(lo), np.log10(hi), n_grid)
                diffs.append(np.log(_interp_loglog(xq, xr, yr)) - np.log(_interp_loglog(xq, xd, yd)))
    if not diffs:
        raise ValueError("Rabi and Dicke collapses have no overlapping x-range")
    return float(np.exp(np.mean(np.concatenate(diffs))))
