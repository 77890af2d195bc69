"""Mean-field dynamics of the open Rabi model.

The factorized equations of motion are

    d<a>/dt   = -i(omega0 - i kappa) <a> - i lambda (s_+ + s_-)
    d s_+/dt  =  i Omega s_+ - i lambda (<a> + <a>^*) s_z
    d s_z/dt  = -2i lambda (<a> + <a>^*) (s_+ - s_-)

with ``s_- = s_+^*``.  They describe the coupling ``+lambda (a + a^dag)
sigma_x``, which maps onto the ``-lambda`` convention of
:func:`rabi_dpt.liouvillian.rabi_hamiltonian` by ``sigma_x -> -sigma_x``
(so ``s_+ -> -s_+``); populations and ``|<a>|`` are unaffected.

States are stored with the rescaled amplitude ``alpha = <a> / sqrt(eta)``;
the equations are integrated in the unrescaled variables.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import eigvals, null_space
from scipy.optimize import brentq

from .errors import SolverFailure
from .liouvillian import ModelParams, critical_coupling

__all__ = [
    "SemiclassicalState",
    "Trajectory",
    "critical_coupling",
    "sc_rhs",
    "sc_integrate",
    "sc_jacobian",
    "sc_fixed_points",
    "stability_threshold",
    "classify",
]

CONSTRAINT_TOL = 1e-9
STABILITY_TOL = 1e-9


@dataclass(frozen=True)
class SemiclassicalState:
    """``alpha = <a>/sqrt(eta)``, ``s_plus = <sigma_+>``, ``s_z = <sigma_z>``."""

    alpha: complex
    s_plus: complex
    s_z: float

    def __post_init__(self):
        c = self.constraint
        if abs(c - 1) > CONSTRAINT_TOL:
            raise ValueError(f"4|s_+|^2 + s_z^2 = {c:.12g} != 1")

    @property
    def constraint(self) -> float:
        return 4 * abs(self.s_plus) ** 2 + self.s_z**2

    def to_vector(self, eta: float) -> np.ndarray:
        a = self.alpha * np.sqrt(eta)
        return np.array([a.real, a.imag, self.s_plus.real, self.s_plus.imag, self.s_z])

    @classmethod
    def from_vector(cls, y, eta: float, check: bool = True) -> "SemiclassicalState":
        state = object.__new__(cls)
        object.__setattr__(state, "alpha", complex(y[0], y[1]) / np.sqrt(eta))
        object.__setattr__(state, "s_plus", complex(y[2], y[3]))
        object.__setattr__(state, "s_z", float(y[4]))
        if check:
            state.__post_init__()
        return state


def _rhs(y, p: ModelParams):
    x, yy, u, v, z = y
    w, k, lam, Om = p.omega0, p.kappa, p.lam, p.Omega
    return np.array([
        w * yy - k * x,
        -w * x - k * yy - 2 * lam * u,
        -Om * v,
        Om * u - 2 * lam * x * z,
        8 * lam * x * v,
    ])


def sc_rhs(state: SemiclassicalState, p: ModelParams):
    """Time derivatives ``(d alpha/dt, d s_+/dt, d s_z/dt)``."""
    d = _rhs(state.to_vector(p.eta), p)
    return complex(d[0], d[1]) / np.sqrt(p.eta), complex(d[2], d[3]), float(d[4])


def sc_jacobian(state: SemiclassicalState, p: ModelParams) -> np.ndarray:
    """Jacobian in the real coordinates ``(Re a, Im a, Re s_+, Im s_+, s_z)``."""
    x, _, _, v, z = state.to_vector(p.eta)
    w, k, lam, Om = p.omega0, p.kappa, p.lam, p.Omega
    return np.array([
        [-k, w, 0, 0, 0],
        [-w, -k, -2 * lam, 0, 0],
        [0, 0, 0, -Om, 0],
        [-2 * lam * z, 0, Om, 0, -2 * lam * x],
        [8 * lam * v, 0, 0, 8 * lam * x, 0],
    ])


def _tangent_eigenvalues(state, p):
    """Jacobian eigenvalues on the surface ``4|s_+|^2 + s_z^2 = const``.

    The conserved quantity contributes a trivial zero mode normal to the
    surface, which is projected out.
    """
    y = state.to_vector(p.eta)
    grad = np.array([0, 0, 8 * y[2], 8 * y[3], 2 * y[4]])
    Q = null_space(grad[None, :])
    return eigvals(Q.T @ sc_jacobian(state, p) @ Q)


def classify(eigenvalues) -> str:
    top = np.max(np.real(eigenvalues))
    if top < -STABILITY_TOL:
        return "stable"
    if top > STABILITY_TOL:
        return "unstable"
    return "marginal"


def sc_fixed_points(p: ModelParams):
    """Fixed points with their stability.

    Returns a list of ``(SemiclassicalState, stability)``: the trivial state
    ``(0, 0, -1)`` always, plus the two symmetry-broken branches for
    ``g > g_c``.
    """
    out = []
    trivial = SemiclassicalState(0j, 0j, -1.0)
    out.append((trivial, classify(_tangent_eigenvalues(trivial, p))))
    gc = p.g_c
    if p.g > gc:
        r = np.sqrt(1 - (gc / p.g) ** 4)
        amp = (p.g / 2) / (1 - 1j * p.kappa / p.omega0) * r
        sz = -(gc**2) / p.g**2
        for sign in (1, -1):
            st = SemiclassicalState(sign * amp, complex(-sign * r / 2), sz)
            out.append((st, classify(_tangent_eigenvalues(st, p))))
    return out


def stability_threshold(p: ModelParams, lo: float | None = None, hi: float | None = None,
                        xtol: float = 1e-12) -> float:
    """Coupling at which the trivial fixed point loses stability (root find).

    The bracket must avoid ``g = 0``, where the undamped qubit makes the
    trivial point marginal.  Needs ``kappa > 0``: without damping the trivial
    point is marginal on the whole normal side and there is no sign change.
    """
    if not p.kappa > 0:
        raise ValueError("stability threshold needs kappa > 0")
    lo = lo if lo is not None else p.g_c / 2
    hi = hi if hi is not None else 2 * p.g_c + 1

    def top(g):
        q = p.replace(g=g)
        return np.max(_tangent_eigenvalues(SemiclassicalState(0j, 0j, -1.0), q).real)

    return float(brentq(top, lo, hi, xtol=xtol))


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    alpha: np.ndarray
    s_plus: np.ndarray
    s_z: np.ndarray

    @property
    def constraint_drift(self) -> float:
        c = 4 * np.abs(self.s_plus) ** 2 + self.s_z**2
        return float(np.max(np.abs(c - c[0])))

    def final(self) -> SemiclassicalState:
        return SemiclassicalState.from_vector(
            [self.alpha[-1].real, self.alpha[-1].imag, self.s_plus[-1].real, self.s_plus[-1].imag, self.s_z[-1]],
            1.0, check=False,
        )


def sc_integrate(state0: SemiclassicalState, p: ModelParams, T: float, n_out: int = 201,
                 rtol: float = 1e-11, atol: float = 1e-12, max_drift: float = 1e-7) -> Trajectory:
    """Integrate the mean-field equations over ``[0, T]`` (DOP853)."""
    if not T > 0:
        raise ValueError("T must be > 0")
    t_eval = np.linspace(0, T, n_out)
    sol = solve_ivp(lambda t, y: _rhs(y, p), (0, T), state0.to_vector(p.eta), method="DOP853",
                    t_eval=t_eval, rtol=rtol, atol=atol)
    if sol.status != 0:
        raise SolverFailure(f"mean-field integration failed: {sol.message}")
    y = sol.y
    traj = Trajectory(
        times=sol.t,
        alpha=(y[0] + 1j * y[1]) / np.sqrt(p.eta),
        s_plus=y[2] + 1j * y[3],
        s_z=y[4],
    )
    if traj.constraint_drift > max_drift:
        raise SolverFailure(f"constraint drift {traj.constraint_drift:.3g} exceeds {max_drift}")
    return traj
