"""Trapped-ion parameters for the open Rabi model.

Two sideband drives detuned by ``delta1`` (red) and ``delta2`` (blue) on
one ion give ``omega0 = (delta2 - delta1)/2``, ``Omega = (delta1 + delta2)/2``
and ``lambda = eta_LD * Omega_d``.  A second, laser-cooled ion damps the
shared mode at ``kappa = 2 Omega_e^2 / Gamma``.

Laboratory inputs are ordinary frequencies in Hz (``value / 2 pi``).
``ModelParams`` built here carry angular rates in rad/s, so ratios such as
``eta`` and ``g`` are unit-free.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .liouvillian import ModelParams

__all__ = [
    "IonParams",
    "DEFAULT_THRESHOLDS",
    "to_model",
    "from_model",
    "critical_drive",
    "feasibility",
    "report",
]

TWO_PI = 2 * np.pi

#: Heuristic feasibility bounds; override per call.
DEFAULT_THRESHOLDS = {
    "lamb_dicke": 0.2,  # eta_LD
    "rwa_margin": 0.1,  # eta_LD * Omega_d / min(delta1, delta2)
    "resolved_dissipation": 0.5,  # kappa / omega0
    "dephasing": 0.01,  # Gamma_d / kappa
}


@dataclass(frozen=True)
class IonParams:
    """Laboratory settings, frequencies in Hz.

    Parameters
    ----------
    delta1_hz, delta2_hz : float
        Red- and blue-sideband detunings; ``delta2 > delta1``.
    omega_d_hz : float
        Sideband drive Rabi frequency.
    omega_e_hz, gamma_hz : float
        Cooling drive Rabi frequency and excited-state linewidth.
    gamma_d_hz : float
        Qubit dephasing rate.
    eta_ld : float
        Lamb-Dicke parameter.
    """

    delta1_hz: float
    delta2_hz: float
    omega_d_hz: float
    omega_e_hz: float
    gamma_hz: float
    gamma_d_hz: float = 0.0
    eta_ld: float = 0.15

    def __post_init__(self):
        if not self.delta2_hz > self.delta1_hz:
            raise ValueError("need delta2 > delta1 (omega0 > 0)")
        for name in ("delta1_hz", "omega_d_hz", "omega_e_hz", "gamma_d_hz", "eta_ld"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if not self.gamma_hz > 0:
            raise ValueError("gamma_hz must be > 0")

    @property
    def kappa_hz(self) -> float:
        return 2 * self.omega_e_hz**2 / self.gamma_hz


def to_model(ion: IonParams) -> ModelParams:
    """Rabi-model parameters (angular, rad/s) realised by ``ion``."""
    d1, d2 = TWO_PI * ion.delta1_hz, TWO_PI * ion.delta2_hz
    omega0 = (d2 - d1) / 2
    Omega = (d1 + d2) / 2
    lam = ion.eta_ld * TWO_PI * ion.omega_d_hz
    return ModelParams(
        eta=Omega / omega0,
        g=2 * lam / np.sqrt(omega0 * Omega),
        kappa=TWO_PI * ion.kappa_hz,
        gamma_d=TWO_PI * ion.gamma_d_hz,
        omega0=omega0,
    )


def from_model(p: ModelParams, eta_ld: float = 0.15, gamma_hz: float = 20e3) -> IonParams:
    """Inverse of :func:`to_model`.

    ``kappa`` fixes only ``Omega_e^2 / Gamma``; the linewidth ``gamma_hz`` is
    taken as given and ``Omega_e`` solved for.
    """
    if not eta_ld > 0:
        raise ValueError("eta_ld must be > 0")
    w0_hz = p.omega0 / TWO_PI
    Om_hz = p.Omega / TWO_PI
    kappa_hz = p.kappa / TWO_PI
    return IonParams(
        delta1_hz=Om_hz - w0_hz,
        delta2_hz=Om_hz + w0_hz,
        omega_d_hz=p.lam / TWO_PI / eta_ld,
        omega_e_hz=float(np.sqrt(kappa_hz * gamma_hz / 2)),
        gamma_hz=gamma_hz,
        gamma_d_hz=p.gamma_d / TWO_PI,
        eta_ld=eta_ld,
    )


def critical_drive(p: ModelParams) -> float:
    """``lambda_c = 0.5 omega0 sqrt(eta) sqrt(1 + kappa^2/omega0^2)``, same units as ``omega0``."""
    return 0.5 * p.omega0 * np.sqrt(p.eta) * np.sqrt(1 + (p.kappa / p.omega0) ** 2)


def feasibility(ion: IonParams, thresholds: dict | None = None):
    """Pass/warn verdict for each validity heuristic."""
    th = dict(DEFAULT_THRESHOLDS)
    th.update(thresholds or {})
    p = to_model(ion)
    lam_hz = ion.eta_ld * ion.omega_d_hz
    values = {
        "lamb_dicke": ion.eta_ld,
        "rwa_margin": lam_hz / min(ion.delta1_hz, ion.delta2_hz) if min(ion.delta1_hz, ion.delta2_hz) > 0 else np.inf,
        "resolved_dissipation": p.kappa / p.omega0,
        "dephasing": ion.gamma_d_hz / ion.kappa_hz if ion.kappa_hz > 0 else np.inf,
    }
    return [
        {"check": k, "value": float(v), "threshold": float(th[k]), "status": "pass" if v <= th[k] else "warn"}
        for k, v in values.items()
    ]


def report(ion: IonParams, thresholds: dict | None = None) -> dict:
    """JSON-ready summary: inputs, model parameters, g, g_c and feasibility."""
    p = to_model(ion)
    inputs = asdict(ion)
    inputs["units"] = "Hz (ordinary frequency, value/2pi)"
    model = {
        "omega0_hz": p.omega0 / TWO_PI,
        "Omega_hz": p.Omega / TWO_PI,
        "lambda_hz": p.lam / TWO_PI,
        "kappa_hz": p.kappa / TWO_PI,
        "gamma_d_hz": p.gamma_d / TWO_PI,
        "eta": p.eta,
        "kappa_ratio": p.kappa / p.omega0,
        "lambda_c_hz": critical_drive(p) / TWO_PI,
        "omega_d_c_hz": critical_drive(p) / TWO_PI / ion.eta_ld,
    }
    return {
        "inputs": inputs,
        "model_params": model,
        "g": p.g,
        "g_c": p.g_c,
        "feasibility": feasibility(ion, thresholds),
    }


def report_json(ion: IonParams, thresholds: dict | None = None) -> str:
    return json.dumps(report(ion, thresholds), indent=2, sort_keys=True)
