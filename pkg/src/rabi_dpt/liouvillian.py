"""Hamiltonians and Lindblad generators for the open Rabi and Dicke models.

Dissipators follow ``D[c] rho = 2 c rho c^dag - c^dag c rho - rho c^dag c``,
so a term ``(c, rate)`` makes ``<c^dag c>`` decay at ``2 * rate``.
Superoperators act on column-stacked density matrices,
``vec(rho)[i + D*j] = rho[i, j]``.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import BranchError
from .operators import (
    FockSpace,
    Operator,
    annihilation,
    collective_spin,
    fock_parity,
    identity,
    number,
    pauli,
    tensor,
)

__all__ = [
    "ModelParams",
    "LindbladTerm",
    "LiouvillianMatrix",
    "critical_coupling",
    "rabi_hamiltonian",
    "dicke_hamiltonian",
    "effective_np_hamiltonian",
    "effective_sp_hamiltonian",
    "build_liouvillian",
    "open_qrm_liouvillian",
    "open_dicke_liouvillian",
    "effective_np_liouvillian",
    "effective_sp_liouvillian",
    "qrm_parity",
    "dicke_parity",
]


def critical_coupling(kappa: float, omega0: float = 1.0) -> float:
    """``g_c = sqrt(1 + kappa^2 / omega0^2)``."""
    if omega0 <= 0:
        raise ValueError("omega0 must be positive")
    return float(np.sqrt(1.0 + (kappa / omega0) ** 2))


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters, all rates angular and in the units of ``omega0``.

    Parameters
    ----------
    eta : float
        Frequency ratio ``Omega / omega0``.
    g : float
        Dimensionless coupling ``2 lambda / sqrt(omega0 Omega)``.
    kappa : float
        Oscillator damping rate.
    gamma_d : float
        Qubit dephasing rate.
    omega0 : float
        Oscillator frequency.
    """

    eta: float
    g: float
    kappa: float = 0.2
    gamma_d: float = 0.0
    omega0: float = 1.0

    def __post_init__(self):
        if not self.omega0 > 0:
            raise ValueError("omega0 must be > 0")
        if not self.eta > 0:
            raise ValueError("eta must be > 0")
        if self.g < 0 or self.kappa < 0 or self.gamma_d < 0:
            raise ValueError("g, kappa and gamma_d must be >= 0")
        for name in ("eta", "g", "kappa", "gamma_d", "omega0"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @classmethod
    def from_ratios(cls, eta, g, kappa_ratio=0.2, gamma_d_ratio=0.0, omega0=1.0):
        """Build from ``kappa / omega0`` and ``gamma_d / kappa``."""
        kappa = kappa_ratio * omega0
        return cls(eta=eta, g=g, kappa=kappa, gamma_d=gamma_d_ratio * kappa, omega0=omega0)

    @property
    def Omega(self) -> float:
        return self.eta * self.omega0

    @property
    def lam(self) -> float:
        return self.g * np.sqrt(self.omega0 * self.Omega) / 2

    @property
    def g_c(self) -> float:
        return critical_coupling(self.kappa, self.omega0)

    @property
    def kappa_ratio(self) -> float:
        return self.kappa / self.omega0

    def replace(self, **changes) -> "ModelParams":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class LindbladTerm:
    jump: Operator
    rate: float

    def __post_init__(self):
        if not np.isfinite(self.rate) or self.rate < 0:
            raise ValueError(f"Lindblad rate must be finite and >= 0, got {self.rate}")


def _vec_superop(H, terms):
    """Complex column-stacking superoperator (D^2 x D^2, CSR)."""
    D = H.shape[0]
    eye = sp.identity(D, dtype=complex, format="csr")
    h = sp.csr_matrix(H)
    out = -1j * (sp.kron(eye, h) - sp.kron(h.T, eye))
    for c, rate in terms:
        if rate == 0:
            continue
        c = sp.csr_matrix(c)
        cdc = (c.conj().T @ c).tocsr()
        out = out + rate * (2 * sp.kron(c.conj(), c) - sp.kron(eye, cdc) - sp.kron(cdc.T, eye))
    return out.tocsr()


@dataclass(frozen=True, eq=False)
class LiouvillianMatrix:
    """Lindblad generator with its Hamiltonian and jump terms.

    The complex superoperator ``data`` is assembled lazily; the solvers usually
    work on the smaller real parity blocks from :meth:`real_block` instead.

    ``parity`` is the diagonal of a Z2 symmetry operator commuting with the
    generator (entries +-1), or ``None`` when no symmetry is known.
    """

    dims: tuple
    hamiltonian: Operator
    terms: tuple
    parity: np.ndarray | None = None

    @property
    def dim(self) -> int:
        """Hilbert-space dimension D (the superoperator is D^2 x D^2)."""
        return self.hamiltonian.dim

    @cached_property
    def data(self) -> sp.csr_matrix:
        return _vec_superop(self.hamiltonian.data, [(t.jump.data, t.rate) for t in self.terms])

    def apply(self, rho) -> np.ndarray:
        """``L[rho]`` for a D x D matrix."""
        rho = np.asarray(getattr(rho, "data", rho))
        D = self.dim
        out = self.data @ rho.reshape(D * D, order="F")
        return out.reshape(D, D, order="F")

    def real_block(self, sector: int = 0):
        """Real representation on the Hermitian operators of a parity sector.

        ``sector`` is +1 (operators commuting with the parity), -1
        (anticommuting) or 0 (no restriction).  Results are cached.
        """
        from ._superop import real_block

        cache = self.__dict__.setdefault("_real_blocks", {})
        if sector not in cache:
            if sector != 0 and self.parity is None:
                raise ValueError("no parity symmetry attached to this Liouvillian")
            cache[sector] = real_block(self, sector)
        return cache[sector]

    def drop_cache(self):
        """Release cached superoperators (they can be large)."""
        self.__dict__.pop("_real_blocks", None)
        self.__dict__.pop("data", None)


def build_liouvillian(H: Operator, terms, parity=None) -> LiouvillianMatrix:
    """Generator ``-i[H, .] + sum_k rate_k D[L_k]``."""
    terms = tuple(terms)
    for t in terms:
        if t.jump.dims != H.dims:
            raise ValueError(f"jump operator dims {t.jump.dims} differ from H dims {H.dims}")
    if parity is not None:
        parity = np.asarray(parity, dtype=float)
        if parity.shape != (H.dim,):
            raise ValueError("parity diagonal has the wrong length")
    return LiouvillianMatrix(dims=H.dims, hamiltonian=H, terms=terms, parity=parity)


# --- model Hamiltonians -----------------------------------------------------


def rabi_hamiltonian(p: ModelParams, fock: FockSpace) -> Operator:
    """``omega0 a^dag a + (Omega/2) sigma_z - lambda (a + a^dag) sigma_x``."""
    s = pauli()
    a = tensor(identity(2), annihilation(fock))
    x = a + a.dag()
    sz = tensor(s["z"], identity(fock.dim))
    sx = tensor(s["x"], identity(fock.dim))
    return p.omega0 * (a.dag() @ a) + (p.Omega / 2) * sz - p.lam * (x @ sx)


def dicke_hamiltonian(p: ModelParams, n_spins: int, fock: FockSpace) -> Operator:
    """``omega0 a^dag a + Omega J_z + (2 lambda / sqrt(N)) (a + a^dag) J_x``.

    With this normalization the mean-field threshold is the same ``g_c`` as for
    the Rabi model.
    """
    J = collective_spin(n_spins)
    ds = n_spins + 1
    a = tensor(identity(ds), annihilation(fock))
    x = a + a.dag()
    jz = tensor(J["z"], identity(fock.dim))
    jx = tensor(J["x"], identity(fock.dim))
    return p.omega0 * (a.dag() @ a) + p.Omega * jz + (2 * p.lam / np.sqrt(n_spins)) * (x @ jx)


def _quadratic_oscillator(omega0, coeff, fock):
    a = annihilation(fock)
    x = a + a.dag()
    return omega0 * number(fock) + coeff * (x @ x)


def effective_np_hamiltonian(p: ModelParams, fock: FockSpace) -> Operator:
    """``omega0 a^dag a - (omega0 g^2 / 4) (a + a^dag)^2``."""
    return _quadratic_oscillator(p.omega0, -p.omega0 * p.g**2 / 4, fock)


def effective_sp_hamiltonian(p: ModelParams, fock: FockSpace):
    """Superradiant-phase quadratic Hamiltonian and its constant energy shift.

    Returns
    -------
    H : Operator
        ``omega0 a^dag a - (omega0 g_c^6 / (4 g^4)) (a + a^dag)^2``
    energy_shift : float
        ``-(Omega/4) (g^2/g_c^2 + g_c^2/g^2)``, not included in ``H``.
    """
    gc = p.g_c
    if p.g <= gc:
        raise BranchError(f"superradiant form needs g > g_c = {gc:.12g}, got {p.g}")
    H = _quadratic_oscillator(p.omega0, -p.omega0 * gc**6 / (4 * p.g**4), fock)
    shift = -(p.Omega / 4) * (p.g**2 / gc**2 + gc**2 / p.g**2)
    return H, shift


# --- parity diagonals ---------------------------------------------------------


def qrm_parity(fock: FockSpace) -> np.ndarray:
    """Diagonal of ``sigma_z (x) (-1)^{a^dag a}``."""
    return np.kron([1.0, -1.0], fock_parity(fock))


def dicke_parity(n_spins: int, fock: FockSpace) -> np.ndarray:
    """Diagonal of ``exp(i pi (a^dag a + J_z + N/2))`` up to a global sign."""
    return np.kron((-1.0) ** np.arange(n_spins + 1), fock_parity(fock))


# --- assembled generators -----------------------------------------------------


def open_qrm_liouvillian(p: ModelParams, fock: FockSpace) -> LiouvillianMatrix:
    """Open Rabi model: damping ``(a, kappa)`` plus ``(sigma_z, gamma_d)`` if nonzero."""
    H = rabi_hamiltonian(p, fock)
    a = tensor(identity(2), annihilation(fock))
    terms = [LindbladTerm(a, p.kappa)]
    if p.gamma_d > 0:
        terms.append(LindbladTerm(tensor(pauli()["z"], identity(fock.dim)), p.gamma_d))
    return build_liouvillian(H, terms, parity=qrm_parity(fock))


def open_dicke_liouvillian(p: ModelParams, n_spins: int, fock: FockSpace) -> LiouvillianMatrix:
    H = dicke_hamiltonian(p, n_spins, fock)
    a = tensor(identity(n_spins + 1), annihilation(fock))
    return build_liouvillian(H, [LindbladTerm(a, p.kappa)], parity=dicke_parity(n_spins, fock))


def effective_np_liouvillian(p: ModelParams, fock: FockSpace) -> LiouvillianMatrix:
    H = effective_np_hamiltonian(p, fock)
    return build_liouvillian(H, [LindbladTerm(annihilation(fock), p.kappa)], parity=fock_parity(fock))


def effective_sp_liouvillian(p: ModelParams, fock: FockSpace) -> LiouvillianMatrix:
    """Generator in the displaced, rotated frame; the energy shift is dropped."""
    H, _ = effective_sp_hamiltonian(p, fock)
    return build_liouvillian(H, [LindbladTerm(annihilation(fock), p.kappa)], parity=fock_parity(fock))
