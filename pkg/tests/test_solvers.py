import numpy as np
import pytest
from hypothesis import given, strategies as st

from rabi_dpt.errors import CutoffExceeded, NullSpaceDegenerate
from rabi_dpt.liouvillian import (
    LindbladTerm,
    ModelParams,
    build_liouvillian,
    effective_np_liouvillian,
    open_dicke_liouvillian,
    open_qrm_liouvillian,
)
from rabi_dpt.operators import FockSpace, Operator, annihilation, identity, number, pauli, quadrature, tensor
from rabi_dpt.solvers import (
    DensityMatrix,
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

KR = 0.2


def n_obs(rho):
    return expect(rho, number(FockSpace(rho.dim - 1))).real


def test_density_matrix_validation():
    with pytest.raises(ValueError):
        DensityMatrix((2,), np.diag([0.5, 0.6]))
    with pytest.raises(ValueError):
        DensityMatrix((2,), np.array([[0.5, 1], [0, 0.5]]))
    with pytest.raises(ValueError):
        DensityMatrix((2,), np.diag([1.5, -0.5]))
    assert DensityMatrix((2,), np.diag([1.0, 0.0])).dim == 2


def test_decoupled_qrm_reports_degenerate_null_space():
    p = ModelParams.from_ratios(eta=2.0, g=0.0, kappa_ratio=KR)
    f = FockSpace(6)
    with pytest.raises(NullSpaceDegenerate) as info:
        steady_state(open_qrm_liouvillian(p, f))
    cands = info.value.candidates
    assert len(info.value.eigenvalues) == 2 and len(cands) == 2
    # |down, 0> lies in the span of the candidates
    target = np.zeros((14, 14))
    target[7, 7] = 1
    basis = np.array([c.data.reshape(-1) for c in cands]).T
    coef, *_ = np.linalg.lstsq(basis, target.reshape(-1), rcond=None)
    assert np.abs(basis @ coef - target.reshape(-1)).max() < 1e-8


def test_ill_conditioned_dicke_block_is_not_degenerate():
    # deep superradiant Dicke point: the even block is regular (gap ~0.15)
    # but badly conditioned, and an unrefined singularity probe rejects it
    p = ModelParams.from_ratios(eta=1.0, g=1.2134530700289279, kappa_ratio=KR)
    L = open_dicke_liouvillian(p, 8, FockSpace(32))
    rho = steady_state(L)
    block = L.real_block(1)
    x = block.from_density(rho.data)
    assert abs(np.trace(rho.data) - 1) < 1e-12
    assert np.linalg.eigvalsh(rho.data)[0] > -1e-12
    assert np.abs(block.matrix @ x).max() < 1e-10 * abs(block.matrix).sum(axis=1).max()


def test_effective_np_population():
    p = ModelParams.from_ratios(eta=1, g=1.0, kappa_ratio=KR)
    cutoff, value = cutoff_convergence(lambda f: effective_np_liouvillian(p, f), n_obs, tol=1e-8)
    assert value == pytest.approx(3.125, rel=1e-7)
    assert cutoff >= 16


def test_cutoff_convergence_trivial_and_cap():
    p = ModelParams.from_ratios(eta=1, g=0.0, kappa_ratio=KR)
    assert cutoff_convergence(lambda f: effective_np_liouvillian(p, f), n_obs) == (16, 0.0)
    q = p.replace(g=1.0)
    with pytest.raises(CutoffExceeded):
        cutoff_convergence(lambda f: effective_np_liouvillian(q, f), n_obs, tol=1e-12, cap=32)


@given(st.floats(2.0, 30.0), st.floats(0.2, 1.3), st.floats(0.0, 0.05))
def test_qrm_steady_state_parity(eta, g, gd):
    p = ModelParams.from_ratios(eta=eta, g=g, kappa_ratio=KR, gamma_d_ratio=gd)
    f = FockSpace(24)
    rho = steady_state(open_qrm_liouvillian(p, f))
    a = tensor(identity(2), annihilation(f))
    sx = tensor(pauli()["x"], identity(f.dim))
    assert abs(expect(rho, a)) < 1e-8 and abs(expect(rho, sx)) < 1e-8
    assert abs(np.trace(rho.data) - 1) < 1e-10
    assert np.linalg.eigvalsh(rho.data)[0] > -1e-8


def test_spectrum_basics():
    p = ModelParams.from_ratios(eta=1, g=0.0, kappa_ratio=KR)
    res = spectrum(effective_np_liouvillian(p, FockSpace(30)), k=5)
    assert res.n_zero == 1 and abs(res.eigenvalues[res.zero_mode_index]) < 1e-10
    assert adr(None, result=res) == pytest.approx(KR, abs=1e-10)
    # closed under conjugation
    w = res.eigenvalues[res.n_zero:3]
    assert np.allclose(np.sort(w.imag), np.sort((-w).imag))


def test_adr_values():
    p = ModelParams.from_ratios(eta=1, g=0.5, kappa_ratio=KR)
    assert adr(effective_np_liouvillian(p, FockSpace(40)), k=4) == pytest.approx(KR, abs=1e-8)
    q = p.replace(g=1.01)
    assert adr(effective_np_liouvillian(q, FockSpace(256)), k=4) == pytest.approx(0.05823, abs=1e-5)
    assert abs(adr(effective_np_liouvillian(q, FockSpace(256)), k=4) - (KR - np.sqrt(1.01**2 - 1))) < 1e-6


def test_adr_shrinks_towards_critical_point():
    p = ModelParams.from_ratios(eta=1, g=np.sqrt(1 + KR**2), kappa_ratio=KR)
    rates = [adr(effective_np_liouvillian(p, FockSpace(c)), k=4) for c in (32, 64, 128)]
    assert rates[0] > rates[1] > rates[2] > 0


def test_propagate_zero_generator():
    L = build_liouvillian(Operator((3,), np.zeros((3, 3))), [])
    rho0 = DensityMatrix((3,), np.diag([0.2, 0.3, 0.5]))
    out = propagate(L, rho0, [0.0, 1.0, 5.0])
    assert all(np.allclose(r.data, rho0.data) for r in out)


def test_propagate_photon_decay():
    p = ModelParams.from_ratios(eta=2.0, g=0.0, kappa_ratio=KR)
    f = FockSpace(4)
    L = open_qrm_liouvillian(p, f)
    rho0 = np.zeros((10, 10))
    rho0[6, 6] = 1  # |down> (x) |1>
    times = np.linspace(0, 10, 6)
    n = [expect(r, tensor(identity(2), number(f))).real for r in propagate(L, rho0, times)]
    assert np.allclose(n, np.exp(-2 * KR * times), atol=1e-8)


def test_long_time_limit_and_fixed_point():
    p = ModelParams.from_ratios(eta=1, g=0.6, kappa_ratio=KR)
    L = effective_np_liouvillian(p, FockSpace(30))
    rho_ss = steady_state(L)
    vac = np.zeros((31, 31))
    vac[0, 0] = 1
    late = propagate(L, vac, [0.0, 100.0])[-1]
    assert trace_distance(late, rho_ss) < 1e-6
    out = propagate(L, rho_ss, np.linspace(0, 10 / KR, 5))
    assert max(trace_distance(r, rho_ss) for r in out) < 1e-8


def test_adr_matches_relaxation_fit():
    p = ModelParams.from_ratios(eta=1, g=1.005, kappa_ratio=KR)
    f = FockSpace(48)
    L = effective_np_liouvillian(p, f)
    rate = adr(L, k=4)
    # coherent start; <x> relaxes with the slowest odd-sector rate
    alpha = 0.5
    n = np.arange(f.dim)
    from scipy.special import gammaln

    psi = np.exp(-abs(alpha) ** 2 / 2 + n * np.log(alpha) - 0.5 * gammaln(n + 1))
    rho0 = np.outer(psi, psi) / (psi @ psi)
    times = np.linspace(40, 80, 9)
    X = quadrature(f, 0.0)
    xs = np.array([expect(r, X).real for r in propagate(L, rho0, np.concatenate([[0.0], times]))[1:]])
    fit = -np.polyfit(times, np.log(np.abs(xs)), 1)[0]
    assert fit == pytest.approx(rate, rel=0.02)


def test_purity_and_vacuum_variance():
    f = FockSpace(8)
    psi = np.random.default_rng(1).standard_normal(9)
    psi /= np.linalg.norm(psi)
    assert purity(DensityMatrix((9,), np.outer(psi, psi))) == pytest.approx(1.0)
    assert purity(DensityMatrix((5,), np.eye(5) / 5)) == pytest.approx(0.2)
    vac = np.zeros((9, 9))
    vac[0, 0] = 1
    for theta in np.linspace(0, np.pi, 7):
        X = quadrature(f, theta).toarray()
        assert np.trace(vac @ X @ X).real == pytest.approx(1.0)


def test_reduced_oscillator():
    f = FockSpace(3)
    up = np.diag([1.0, 0.0])
    osc = np.diag([0.5, 0.25, 0.25, 0.0])
    rho = DensityMatrix((2, 4), np.kron(up, osc))
    assert np.allclose(reduced_oscillator(rho).data, osc)
