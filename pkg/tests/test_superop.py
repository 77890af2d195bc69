import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, strategies as st

from rabi_dpt import _linalg, _superop
from rabi_dpt.liouvillian import (
    ModelParams,
    effective_np_liouvillian,
    effective_sp_liouvillian,
    open_dicke_liouvillian,
    open_qrm_liouvillian,
)
from rabi_dpt.operators import FockSpace

compiled = pytest.mark.skipif(_superop.KERNEL != "compiled", reason="extension not built")


def models():
    p = ModelParams.from_ratios(eta=3.0, g=1.05, kappa_ratio=0.2, gamma_d_ratio=0.03)
    f = FockSpace(7)
    return {
        "qrm": open_qrm_liouvillian(p, f),
        "dicke": open_dicke_liouvillian(p, 3, f),
        "np": effective_np_liouvillian(p.replace(g=0.8), FockSpace(12)),
        "sp": effective_sp_liouvillian(p.replace(g=1.3), FockSpace(12)),
    }


@compiled
@pytest.mark.parametrize("name", ["qrm", "dicke", "np", "sp"])
@pytest.mark.parametrize("sector", [0, 1, -1])
def test_kernels_agree(name, sector):
    L = models()[name]
    a = _superop.real_block(L, sector, kernel="compiled").matrix
    b = _superop.real_block(L, sector, kernel="python").matrix
    assert a.shape == b.shape
    assert abs(sp.csr_matrix(a) - sp.csr_matrix(b)).max() < 1e-13


@pytest.mark.parametrize("name", ["qrm", "dicke"])
def test_block_spectrum_matches_superoperator(name):
    L = models()[name]
    full = np.linalg.eigvals(L.data.toarray())
    parts = np.concatenate([np.linalg.eigvals(L.real_block(s).matrix.toarray()) for s in (1, -1)])
    # the two blocks together carry every mode of the superoperator
    assert len(parts) == len(full)
    gap = np.abs(parts[:, None] - full[None, :])
    assert gap.min(axis=1).max() < 1e-8 and gap.min(axis=0).max() < 1e-8


@given(st.integers(0, 2**31 - 1), st.sampled_from([0, 1, -1]))
def test_coordinates_round_trip(seed, sector):
    L = models()["qrm"]
    block = L.real_block(sector)
    x = np.random.default_rng(seed).standard_normal(block.size)
    rho = block.to_density(x)
    assert np.allclose(rho, rho.conj().T)
    assert np.allclose(block.from_density(rho), x)
    assert block.trace_row() @ x == pytest.approx(np.trace(rho).real)


@given(st.integers(0, 2**31 - 1))
def test_block_action_matches_complex(seed):
    L = models()["dicke"]
    block = L.real_block(0)
    x = np.random.default_rng(seed).standard_normal(block.size)
    assert np.allclose(block.to_density(block.matrix @ x), L.apply(block.to_density(x)), atol=1e-12)


def test_factorization_backends_agree():
    rng = np.random.default_rng(0)
    A = sp.random(60, 60, density=0.1, random_state=1, format="csr") + sp.eye(60) * 5
    b = rng.standard_normal(60)
    x_lu = _linalg.Factorization(A, backend="superlu").solve(b)
    assert np.allclose(A @ x_lu, b)
    if _linalg.BACKEND == "pardiso":
        x_pd = _linalg.Factorization(A, backend="pardiso").solve(b)
        assert np.allclose(x_pd, x_lu, atol=1e-12)
