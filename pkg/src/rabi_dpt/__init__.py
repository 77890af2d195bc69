"""Steady states, spectra and finite-size scaling of the open quantum Rabi model."""
__version__ = "0.1.0"

from ._superop import KERNEL
from ._linalg import BACKEND
from .errors import BranchError, CutoffExceeded, NullSpaceDegenerate, PoleError, SolverFailure
from .operators import (
    FockSpace,
    Operator,
    SpinSpace,
    annihilation,
    collective_spin,
    creation,
    fock_parity,
    identity,
    number,
    pauli,
    quadrature,
    tensor,
)
from .liouvillian import (
    LindbladTerm,
    LiouvillianMatrix,
    ModelParams,
    build_liouvillian,
    critical_coupling,
    dicke_hamiltonian,
    effective_np_hamiltonian,
    effective_np_liouvillian,
    effective_sp_hamiltonian,
    effective_sp_liouvillian,
    open_dicke_liouvillian,
    open_qrm_liouvillian,
    rabi_hamiltonian,
)
from .solvers import (
    DensityMatrix,
    SpectrumResult,
    adr,
    cutoff_convergence,
    expect,
    propagate,
    purity,
    reduced_oscillator,
    spectrum,
    steady_state,
    trace_distance,
)
from . import analytics, ionmap, scaling, semiclassical

__all__ = [
    "__version__",
    "KERNEL",
    "BACKEND",
    "BranchError",
    "CutoffExceeded",
    "NullSpaceDegenerate",
    "PoleError",
    "SolverFailure",
    "FockSpace",
    "Operator",
    "SpinSpace",
    "annihilation",
    "collective_spin",
    "creation",
    "fock_parity",
    "identity",
    "number",
    "pauli",
    "quadrature",
    "tensor",
    "LindbladTerm",
    "LiouvillianMatrix",
    "ModelParams",
    "build_liouvillian",
    "critical_coupling",
    "dicke_hamiltonian",
    "effective_np_hamiltonian",
    "effective_np_liouvillian",
    "effective_sp_hamiltonian",
    "effective_sp_liouvillian",
    "open_dicke_liouvillian",
    "open_qrm_liouvillian",
    "rabi_hamiltonian",
    "DensityMatrix",
    "SpectrumResult",
    "adr",
    "cutoff_convergence",
    "expect",
    "propagate",
    "purity",
    "reduced_oscillator",
    "spectrum",
    "steady_state",
    "trace_distance",
    "analytics",
    "ionmap",
    "scaling",
    "semiclassical",
]
