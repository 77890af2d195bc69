import numpy as np
import pytest
from hypothesis import given, strategies as st

from rabi_dpt.analytics import sp_displacement
from rabi_dpt.liouvillian import ModelParams, critical_coupling
from rabi_dpt.semiclassical import (
    SemiclassicalState,
    classify,
    sc_fixed_points,
    sc_integrate,
    sc_rhs,
    stability_threshold,
)

KR = 0.2
GC = np.sqrt(1.04)


def kicked(eps=0.01):
    return SemiclassicalState(complex(eps), complex(0.5 * np.sin(eps)), -float(np.cos(eps)))


def test_constraint_enforced():
    with pytest.raises(ValueError):
        SemiclassicalState(0j, 0.3 + 0j, -1.0)


def test_critical_coupling_values():
    assert critical_coupling(0.0) == 1.0
    assert critical_coupling(0.2) == pytest.approx(1.0198039, abs=1e-7)
    assert critical_coupling(1.0) == pytest.approx(np.sqrt(2))


@given(st.floats(0.0, 3.0))
def test_trivial_point_is_fixed(g):
    p = ModelParams.from_ratios(eta=5.0, g=g, kappa_ratio=KR)
    da, ds, dz = sc_rhs(SemiclassicalState(0j, 0j, -1.0), p)
    assert da == 0 and ds == 0 and dz == 0


def test_free_damped_oscillator():
    p = ModelParams.from_ratios(eta=1.0, g=0.0, kappa_ratio=KR)
    da, _, _ = sc_rhs(SemiclassicalState(1 + 0j, 0j, -1.0), p)
    assert da == pytest.approx(-(1j + KR))


@given(st.floats(0.0, 3.0), st.floats(0.1, 20.0), st.floats(-1, 1), st.floats(0, 2 * np.pi),
       st.floats(-2, 2), st.floats(-2, 2))
def test_rhs_conserves_constraint(g, eta, sz, phi, ar, ai):
    p = ModelParams.from_ratios(eta=eta, g=g, kappa_ratio=KR)
    r = 0.5 * np.sqrt(1 - sz**2)
    s = SemiclassicalState(complex(ar, ai), r * np.exp(1j * phi), sz)
    _, ds, dz = sc_rhs(s, p)
    assert abs(8 * (np.conj(s.s_plus) * ds).real + 2 * s.s_z * dz) < 1e-10 * (1 + abs(ds) + abs(dz))


def test_fixed_points_below_threshold():
    p = ModelParams.from_ratios(eta=10.0, g=0.9, kappa_ratio=KR)
    fps = sc_fixed_points(p)
    assert len(fps) == 1
    st0, stab = fps[0]
    assert stab == "stable" and st0.s_z == -1.0


def test_fixed_points_above_threshold():
    p = ModelParams.from_ratios(eta=100.0, g=1.2, kappa_ratio=KR)
    fps = sc_fixed_points(p)
    assert [s for _, s in fps] == ["unstable", "stable", "stable"]
    for st1, _ in fps[1:]:
        exact = 1.2 * 10 / (2 * GC) * np.sqrt(1 - (GC / 1.2) ** 4)
        assert abs(st1.alpha) * np.sqrt(100) == pytest.approx(exact, rel=1e-12)
        assert exact == pytest.approx(4.0695, abs=1e-3)
        assert st1.s_z == pytest.approx(-1.04 / 1.44, abs=1e-12)
        assert max(abs(v) for v in sc_rhs(st1, p)) < 1e-10
    # same amplitude as the displaced-frame formula
    assert abs(fps[1][0].alpha * np.sqrt(100) - sp_displacement(p)) < 1e-12


def test_branch_continuity():
    amps = [abs(sc_fixed_points(ModelParams.from_ratios(1.0, GC + d, KR))[1][0].alpha) for d in (1e-2, 1e-4, 1e-6)]
    assert amps[0] > amps[1] > amps[2] and amps[2] < 1e-2


def test_stability_threshold():
    for kr in (0.05, 0.2, 1.0):
        p = ModelParams.from_ratios(eta=5.0, g=0.5, kappa_ratio=kr)
        assert stability_threshold(p) == pytest.approx(critical_coupling(kr), abs=1e-8)
    with pytest.raises(ValueError):
        stability_threshold(ModelParams.from_ratios(eta=5.0, g=0.5, kappa_ratio=0.0))


def test_classify():
    assert classify([-1.0, -2.0]) == "stable"
    assert classify([1e-3, -2.0]) == "unstable"
    assert classify([0.0, -1.0]) == "marginal"


def test_decoupled_trajectory():
    p = ModelParams.from_ratios(eta=1.0, g=0.0, kappa_ratio=KR)
    tr = sc_integrate(SemiclassicalState(0.3 + 0.1j, 0j, -1.0), p, 10.0, n_out=11)
    assert np.allclose(tr.alpha, (0.3 + 0.1j) * np.exp(-(1j + KR) * tr.times), atol=1e-9)


def test_converges_below_and_above():
    p = ModelParams.from_ratios(eta=1.0, g=0.8, kappa_ratio=KR)
    fin = sc_integrate(kicked(0.3), p, 400.0, n_out=3).final()
    assert abs(fin.alpha) < 1e-6 and abs(fin.s_z + 1) < 1e-6
    p = p.replace(g=1.2)
    fin = sc_integrate(kicked(), p, 1000.0, n_out=3).final()
    d = min(max(abs(fin.alpha - s.alpha), abs(fin.s_plus - s.s_plus), abs(fin.s_z - s.s_z))
            for s, _ in sc_fixed_points(p)[1:])
    assert d < 1e-6
