"""Closed-form results for the quadratic (eta -> infinity) effective models.

Normal-phase (NP) formulas hold for ``g < g_c`` and superradiant-phase (SP)
formulas for ``g > g_c``.  Each SP expression follows from its NP
counterpart by substituting ``g -> g_c^3 / g^2``.  Evaluating either branch
exactly at ``g_c`` raises :class:`PoleError` where the expression diverges.

Frequencies and rates are in the units of ``p.omega0``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BranchError, PoleError
from .liouvillian import ModelParams

__all__ = [
    "MomentVector",
    "GaussianCovariance",
    "ExponentTable",
    "np_drift",
    "np_eigenvalues",
    "sp_drift",
    "sp_eigenvalues",
    "adr_analytic",
    "sp_displacement",
    "sp_basis_rotation",
    "np_moment_equations",
    "sp_moment_equations",
    "np_second_moments",
    "sp_second_moments",
    "second_moments",
    "theta_min",
    "theta_max",
    "quadrature_variance",
    "max_quadrature_variance",
    "gaussian_covariance",
    "gaussian_purity",
    "keldysh_gr_inverse",
    "keldysh_dk",
    "keldysh_characteristic_freqs",
    "exponents",
]


@dataclass(frozen=True)
class MomentVector:
    """First and second oscillator moments.

    ``u = (<a>, <a^dag>)`` and ``v = (<a^dag a>, <a^2>, <a^dag^2>)``.
    """

    u: tuple
    v: tuple

    def __post_init__(self):
        (a, ad), (n, m, md) = self.u, self.v
        if abs(np.conj(a) - ad) > 1e-12 * max(1.0, abs(a)) or abs(np.conj(m) - md) > 1e-12 * max(1.0, abs(m)):
            raise ValueError("moment vector violates conjugation symmetry")
        if abs(np.imag(n)) > 1e-12 * max(1.0, abs(n)) or np.real(n) < -1e-12:
            raise ValueError("<a^dag a> must be real and non-negative")


@dataclass(frozen=True)
class GaussianCovariance:
    """Covariances of ``x = a + a^dag`` and ``p = -i (a - a^dag)``, vacuum = 1/2."""

    sxx: float
    spp: float
    sxp: float

    @property
    def determinant(self) -> float:
        return self.sxx * self.spp - self.sxp**2


@dataclass(frozen=True)
class ExponentTable:
    nu_adr: float = 1.0
    nu_x: float = 1.0
    nu_delta: float = 1.0
    nu_p: float = 0.5
    zeta_x: float = 0.5
    zeta_delta: float = 0.5
    # closed-system reference values
    closed_nu_x: float = 0.5
    closed_zeta_x: float = 1.0 / 3.0
    closed_xi: float = 1.5

    @property
    def xi(self) -> float:
        return self.nu_x / self.zeta_x


def exponents() -> ExponentTable:
    return ExponentTable()


# --- branch helpers -----------------------------------------------------------


def _check_np(g, p):
    gc = p.g_c
    if g == gc:
        raise PoleError(f"normal-phase expression diverges at g = g_c = {gc:.12g}")
    if g > gc:
        raise BranchError(f"normal-phase expression needs g < g_c = {gc:.12g}, got {g}")
    if g < 0:
        raise ValueError("g must be >= 0")


def _check_sp(g, p):
    gc = p.g_c
    if g == gc:
        raise PoleError(f"superradiant expression diverges at g = g_c = {gc:.12g}")
    if g < gc:
        raise BranchError(f"superradiant expression needs g > g_c = {gc:.12g}, got {g}")


def _dual(g, p):
    """Normal-phase coupling equivalent to superradiant ``g``: ``g_c^3 / g^2``."""
    return p.g_c**3 / g**2


def _drift(geff2, p):
    w, k = p.omega0, p.kappa
    return np.array(
        [[-1j * w * (1 - geff2 / 2) - k, 1j * w * geff2 / 2],
         [-1j * w * geff2 / 2, 1j * w * (1 - geff2 / 2) - k]]
    )


def _eigs(geff2, p):
    eps = p.omega0 * np.sqrt(complex(1 - geff2))
    return -p.kappa + 1j * eps, -p.kappa - 1j * eps


# --- first moments ------------------------------------------------------------


def np_drift(p: ModelParams) -> np.ndarray:
    """Linear map ``du/dt = L_np u`` for ``u = (<a>, <a^dag>)``."""
    return _drift(p.g**2, p)


def np_eigenvalues(p: ModelParams):
    """``(l_+, l_-) = -kappa +- i omega0 sqrt(1 - g^2)``, principal root."""
    return _eigs(p.g**2, p)


def sp_drift(p: ModelParams) -> np.ndarray:
    _check_sp(p.g, p)
    return _drift(p.g_c**6 / p.g**4, p)


def sp_eigenvalues(p: ModelParams):
    """``-kappa +- i omega0 sqrt(1 - g_c^6 / g^4)``."""
    _check_sp(p.g, p)
    return _eigs(p.g_c**6 / p.g**4, p)


def adr_analytic(g: float, p: ModelParams) -> float:
    """Asymptotic decay rate of the effective model, both phases."""
    if g < 0:
        raise ValueError("g must be >= 0")
    gc, k, w = p.g_c, p.kappa, p.omega0
    if g <= 1:
        return k
    # clamp rounding residue at g_c, where the rate vanishes exactly
    if g <= gc:
        return max(k - w * np.sqrt(g**2 - 1), 0.0)
    if g < gc**1.5:
        return max(k - w * np.sqrt(gc**6 / g**4 - 1), 0.0)
    return k


def sp_displacement(p: ModelParams) -> complex:
    """``alpha_s`` such that the steady states sit at ``<a> = +- alpha_s``."""
    _check_sp(p.g, p)
    gc = p.g_c
    return complex(
        p.g * np.sqrt(p.eta) / (2 * gc**2) * (1 + 1j * p.kappa / p.omega0) * np.sqrt(1 - (gc / p.g) ** 4)
    )


def sp_basis_rotation(g: float, p: ModelParams):
    """Coefficients ``(sqrt(1 + g_c^2/g^2), sqrt(1 - g_c^2/g^2)) / sqrt(2)``.

    The rotated qubit states are ``|up'> = c1 |up> -+ c2 |down>`` and
    ``|down'> = +-c2 |up> + c1 |down>`` for the ``+-alpha_s`` branch.
    """
    _check_sp(g, p)
    r = p.g_c**2 / g**2
    return float(np.sqrt((1 + r) / 2)), float(np.sqrt((1 - r) / 2))


# --- second moments -----------------------------------------------------------


def _moment_eqs(geff2, p):
    w, kr = p.omega0, p.kappa / p.omega0
    M = 1j * w * np.array(
        [[2j * kr, -geff2 / 2, geff2 / 2],
         [geff2, -2 * (1 - geff2 / 2) + 2j * kr, 0],
         [-geff2, 0, 2 * (1 - geff2 / 2) + 2j * kr]]
    )
    Y = 1j * w * np.array([0, geff2 / 2, -geff2 / 2])
    return M, Y


def np_moment_equations(p: ModelParams):
    """``(M, Y)`` with ``dv/dt = M v + Y``."""
    return _moment_eqs(p.g**2, p)


def sp_moment_equations(p: ModelParams):
    _check_sp(p.g, p)
    return _moment_eqs(p.g_c**6 / p.g**4, p)


def _moments_closed(g, p):
    g2, gc2, kr = g**2, p.g_c**2, p.kappa / p.omega0
    pref = g2 / (8 * (gc2 - g2))
    m = pref * (2 - g2 + 2j * kr)
    return (pref * g2, m, np.conj(m))


def np_second_moments(p: ModelParams) -> MomentVector:
    _check_np(p.g, p)
    return MomentVector(u=(0j, 0j), v=_moments_closed(p.g, p))


def sp_second_moments(p: ModelParams) -> MomentVector:
    """Fluctuations about ``+alpha_s`` (``v`` in the displaced frame)."""
    _check_sp(p.g, p)
    gc, g = p.g_c, p.g
    pref = gc**4 / (8 * (g**4 - gc**4))
    h = gc**6 / g**4
    kr = p.kappa / p.omega0
    m = pref * (2 - h + 2j * kr)
    a = sp_displacement(p)
    return MomentVector(u=(a, np.conj(a)), v=(pref * h, m, np.conj(m)))


def second_moments(p: ModelParams) -> MomentVector:
    """Dispatch to the branch that contains ``p.g``."""
    return np_second_moments(p) if p.g < p.g_c else sp_second_moments(p)


# --- quadratures and purity -----------------------------------------------------


def theta_min(p: ModelParams) -> float:
    """Squeezed quadrature angle ``pi - arctan(omega0 / kappa)``."""
    return float(np.pi - np.arctan2(p.omega0, p.kappa))


def theta_max(p: ModelParams) -> float:
    return theta_min(p) - np.pi / 2


def _phase(g, p, phase):
    if phase is None:
        phase = "np" if g < p.g_c else "sp"
    phase = phase.lower()
    if phase not in ("np", "sp"):
        raise ValueError("phase must be 'np' or 'sp'")
    return phase


def quadrature_variance(theta, g: float, p: ModelParams, phase: str | None = None):
    """Steady-state ``<X(theta)^2> - <X(theta)>^2`` (vacuum = 1).

    At ``g = g_c`` only the squeezed angle has a finite limit (1/2); every
    other angle raises :class:`PoleError`.
    """
    phase = _phase(g, p, phase)
    gc = p.g_c
    theta = np.asarray(theta, dtype=float)
    if g == gc:
        d = np.mod(theta - theta_min(p) + np.pi / 2, np.pi) - np.pi / 2
        if np.all(np.abs(d) < 1e-12):
            out = np.full(theta.shape, 1 - g**2 / (2 * gc**2))
            return float(out) if out.ndim == 0 else out
        raise PoleError("quadrature variance diverges at g = g_c away from the squeezed angle")
    if phase == "np":
        _check_np(g, p)
        geff = g
    else:
        _check_sp(g, p)
        geff = _dual(g, p)
    g2 = geff**2
    kr = p.kappa / p.omega0
    out = g2 / (2 * (gc**2 - g2)) * ((1 - g2 / 2) * np.cos(2 * theta) + kr * np.sin(2 * theta) + g2 / 2) + 1
    return float(out) if np.ndim(out) == 0 else out


def max_quadrature_variance(g: float, p: ModelParams, phase: str | None = None) -> float:
    """Variance along the anti-squeezed quadrature."""
    phase = _phase(g, p, phase)
    if phase == "np":
        _check_np(g, p)
        geff = g
    else:
        _check_sp(g, p)
        geff = _dual(g, p)
    g2 = geff**2
    kr = p.kappa / p.omega0
    amp = np.hypot(1 - g2 / 2, kr)
    return float(g2 / (2 * (p.g_c**2 - g2)) * (amp + g2 / 2) + 1)


def gaussian_covariance(v, u=(0.0, 0.0)) -> GaussianCovariance:
    """Covariances from raw moments ``v`` and mean amplitudes ``u``."""
    if isinstance(v, MomentVector):
        v, u = v.v, (0.0, 0.0)  # moments are already about the mean
    n, m, _ = v
    a = complex(u[0])
    n_c = float(np.real(n)) - abs(a) ** 2
    m_c = complex(m) - a**2
    sxx = 0.5 * (2 * n_c + 1 + 2 * m_c.real)
    spp = 0.5 * (2 * n_c + 1 - 2 * m_c.real)
    sxp = m_c.imag
    return GaussianCovariance(sxx=sxx, spp=spp, sxp=sxp)


def gaussian_purity(v, u=(0.0, 0.0), tol: float = 1e-9) -> float:
    """``1 / (2 sqrt(sxx spp - sxp^2))``; rejects unphysical covariances."""
    cov = gaussian_covariance(v, u)
    if cov.sxx <= 0 or cov.spp <= 0 or cov.determinant < 0.25 - tol:
        raise ValueError(f"non-physical Gaussian covariance (det = {cov.determinant:.6g})")
    return float(1 / (2 * np.sqrt(cov.determinant)))


# --- Keldysh objects --------------------------------------------------------------


def keldysh_gr_inverse(omega, p: ModelParams) -> np.ndarray:
    """Inverse retarded Green's function of the normal phase (2 x 2)."""
    w0, k = p.omega0, p.kappa
    sigma = w0 * p.g**2 / 2
    return np.array(
        [[omega - w0 + 1j * k + sigma, sigma],
         [sigma, -omega - w0 - 1j * k + sigma]],
        dtype=complex,
    )


def keldysh_dk(p: ModelParams) -> np.ndarray:
    return np.diag([2j * p.kappa, 2j * p.kappa])


def keldysh_characteristic_freqs(p: ModelParams):
    """Roots ``omega_+- = -i kappa +- omega0 sqrt(1 - g^2)`` of det G_R^-1."""
    root = p.omega0 * np.sqrt(complex(1 - p.g**2))
    return -1j * p.kappa + root, -1j * p.kappa - root
