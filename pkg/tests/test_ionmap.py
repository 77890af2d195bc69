import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rabi_dpt.ionmap import IonParams, critical_drive, feasibility, from_model, report, to_model
from rabi_dpt.liouvillian import ModelParams

TWO_PI = 2 * np.pi


def lab(**kw):
    base = dict(delta1_hz=24.5e3, delta2_hz=25.5e3, omega_d_hz=12e3, omega_e_hz=1e3, gamma_hz=20e3)
    base.update(kw)
    return IonParams(**base)


def test_to_model_reference_point():
    p = to_model(lab())
    assert p.omega0 / TWO_PI == pytest.approx(500.0)
    assert p.Omega / TWO_PI == pytest.approx(25e3)
    assert p.eta == pytest.approx(50.0)
    assert p.kappa / TWO_PI == pytest.approx(100.0)
    assert 2 * p.kappa / TWO_PI == pytest.approx(200.0)
    assert p.kappa / p.omega0 == pytest.approx(0.2)


def test_invalid_detunings():
    with pytest.raises(ValueError):
        lab(delta1_hz=25.5e3, delta2_hz=25.5e3)
    with pytest.raises(ValueError):
        from_model(ModelParams.from_ratios(50, 1.0), eta_ld=0.0)


def test_critical_drive():
    for eta, ref in ((50, 1803.0), (100, 2550.0)):
        p = ModelParams.from_ratios(eta=eta, g=1.0, kappa_ratio=0.2, omega0=TWO_PI * 500)
        assert critical_drive(p) / TWO_PI == pytest.approx(ref, abs=1.0)
        assert critical_drive(p) / (np.sqrt(p.omega0 * p.Omega) / 2) == pytest.approx(p.g_c, rel=1e-14)
    p = ModelParams.from_ratios(eta=50, g=1.0, kappa_ratio=0.0, omega0=TWO_PI * 500)
    assert critical_drive(p) == pytest.approx(0.5 * p.omega0 * np.sqrt(50), rel=1e-14)
    p = ModelParams.from_ratios(eta=50, g=np.sqrt(1.04), kappa_ratio=0.2, omega0=TWO_PI * 500)
    assert from_model(p).omega_d_hz == pytest.approx(12.02e3, abs=10)


def rel_close(a: ModelParams, b: ModelParams, tol=1e-12):
    for f in ("eta", "g", "kappa", "gamma_d", "omega0"):
        x, y = getattr(a, f), getattr(b, f)
        assert abs(x - y) <= tol * max(abs(x), abs(y), 1e-300), f


@given(st.floats(1.5, 500), st.floats(0.0, 3.0), st.floats(0.0, 2.0), st.floats(0.0, 0.1),
       st.floats(1.0, 1e4), st.floats(0.01, 0.5))
def test_round_trip(eta, g, kr, gdr, w0_hz, eta_ld):
    p = ModelParams.from_ratios(eta=eta, g=g, kappa_ratio=kr, gamma_d_ratio=gdr, omega0=TWO_PI * w0_hz)
    rel_close(to_model(from_model(p, eta_ld=eta_ld)), p)
    ion = from_model(p, eta_ld=eta_ld)
    back = from_model(to_model(ion), eta_ld=eta_ld, gamma_hz=ion.gamma_hz)
    for f in ("delta1_hz", "delta2_hz", "omega_d_hz", "omega_e_hz", "gamma_d_hz"):
        x, y = getattr(ion, f), getattr(back, f)
        assert abs(x - y) <= 1e-12 * max(abs(x), abs(y), 1e-300)


def test_mapping_monotone():
    assert to_model(lab(omega_e_hz=1.2e3)).kappa > to_model(lab()).kappa
    assert to_model(lab(delta2_hz=26e3)).omega0 > to_model(lab()).omega0


def status(ion, **th):
    return {c["check"]: c["status"] for c in feasibility(ion, th or None)}


def test_feasibility():
    for eta in (50, 100):
        p = ModelParams.from_ratios(eta=eta, g=np.sqrt(1.04), kappa_ratio=0.2, omega0=TWO_PI * 500)
        assert set(status(from_model(p)).values()) == {"pass"}
    p = ModelParams.from_ratios(eta=50, g=1.0, kappa_ratio=0.2, gamma_d_ratio=7e-2, omega0=TWO_PI * 500)
    assert status(from_model(p))["dephasing"] == "warn"
    assert status(lab(eta_ld=0.5))["lamb_dicke"] == "warn"
    assert status(lab(eta_ld=0.5), lamb_dicke=0.6)["lamb_dicke"] == "pass"


def test_report_is_json():
    out = json.loads(json.dumps(report(lab())))
    assert "Hz" in out["inputs"]["units"]
    assert set(out) >= {"inputs", "model_params", "g", "g_c", "feasibility"}
    assert out["model_params"]["eta"] == pytest.approx(50)
