"""Laboratory feasibility checks in SI units.

This is the only module that works with dimensionful numbers.  Each check
returns a :class:`Bound` with the computed value, the threshold it is held
against, the safety margin and a pass/warn/fail verdict.  Strong
inequalities ("much greater than") pass at a margin of 10 and warn from 3.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np
from scipy import constants

HBAR = constants.hbar
C = constants.c
PASS_RATIO = 10.0
WARN_RATIO = 3.0


@dataclass(frozen=True)
class PhysicalParams:
    omega: float                    # atomic transition, rad/s
    gamma: float                    # free-space decay rate, 1/s
    mass: float                     # kg
    detuning: float = 100.0         # in units of gamma
    fiber_radius: float = 200e-9    # m
    guided_fraction: float = 0.13   # gamma_guid / gamma
    saturation: float = 1.0         # I0 / Isat
    omega_T: float = 2 * np.pi * 1e6  # trap frequency, rad/s

    def __post_init__(self):
        for name in ("omega", "gamma", "mass", "detuning", "fiber_radius", "guided_fraction",
                     "saturation", "omega_T"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @property
    def area(self) -> float:
        return np.pi * self.fiber_radius ** 2

    @property
    def gamma_guided(self) -> float:
        return self.guided_fraction * self.gamma

    @property
    def excited_fraction(self) -> float:
        """Low-saturation two-level population I0/(2 Isat (1 + 4 Delta^2/Gamma^2))."""
        return 0.5 * self.saturation / (1 + 4 * self.detuning ** 2)

    @property
    def wavenumber(self) -> float:
        return self.omega / C

    def with_(self, **changes) -> "PhysicalParams":
        return PhysicalParams(**{**asdict(self), **changes})


def saturation_for_excited_fraction(rho_ee: float, detuning: float) -> float:
    """I0/Isat that puts the given fraction of population in the excited state."""
    if not 0 < rho_ee < 0.5:
        raise ValueError("excited fraction must lie in (0, 0.5)")
    return 2 * rho_ee * (1 + 4 * detuning ** 2)


def cesium_d2(**overrides) -> PhysicalParams:
    """Cesium D2 numbers as used in the worked example (2.2e15 taken in Hz)."""
    base = dict(omega=2 * np.pi * 2.2e15, gamma=33e6, mass=220e-27, detuning=100.0,
                fiber_radius=200e-9, guided_fraction=0.13, saturation=1.0, omega_T=2 * np.pi * 1e6)
    base.update(overrides)
    return PhysicalParams(**base)


@dataclass
class Bound:
    name: str
    value: float
    threshold: float
    margin: float
    status: str
    detail: dict

    def to_dict(self) -> dict:
        d = asdict(self)
        # strict JSON has no infinity
        return {k: (None if isinstance(v, float) and not np.isfinite(v) else v) for k, v in d.items()}


def _status(margin: float) -> str:
    if margin >= PASS_RATIO:
        return "pass"
    if margin >= WARN_RATIO:
        return "warn"
    return "fail"


class SaturationError(ValueError):
    pass


def scattered_intensity(p: PhysicalParams, max_excited: float = 0.1) -> float:
    """Intensity guided into the fiber, W/m^2 (per unit I0/Isat when saturation=1)."""
    rho = p.excited_fraction
    if rho > max_excited:
        raise SaturationError(f"excited fraction {rho:.3g} violates low saturation")
    return HBAR * p.omega / p.area * p.gamma_guided * rho


def check_lamb_dicke(p: PhysicalParams, threshold: float = 0.1) -> Bound:
    """k*delta0 against ``threshold`` and the implied minimum trap frequency."""
    delta0 = np.sqrt(HBAR / (2 * p.mass * p.omega_T))
    kd = p.wavenumber * delta0
    min_trap = p.omega ** 2 * HBAR / (2 * p.mass * C ** 2)
    margin = threshold / kd if kd > 0 else np.inf
    return Bound("lamb_dicke", float(kd), threshold, float(margin), "pass" if kd < threshold else "fail",
                 {"delta0_m": float(delta0), "trap_bound_rad_s": float(min_trap),
                  "trap_bound_hz": float(min_trap / (2 * np.pi)),
                  "trap_margin": float(p.omega_T / min_trap)})


def interaction_bound(p: PhysicalParams) -> float:
    """Upper scale gamma_guid (I/Isat) / (2 (1 + Delta^2/Gamma^2)) for Omega_k, 1/s."""
    return p.gamma_guided * p.saturation / (2 * (1 + p.detuning ** 2))


def trap_to_pump_ratio(p: PhysicalParams) -> float:
    """hbar omega_T over the pump pair energy, ~ 4 omega_T / (gamma_guid rho_ee)."""
    return 4 * p.omega_T / (p.gamma_guided * p.excited_fraction)


def trap_to_pump_lower_bound(p: PhysicalParams) -> float:
    """The same ratio with omega_T replaced by its Lamb-Dicke lower bound."""
    min_trap = p.omega ** 2 * HBAR / (2 * p.mass * C ** 2)
    return 4 * min_trap / (p.gamma_guided * p.excited_fraction)


def check_interaction_bound(p: PhysicalParams, omega_k_requested: float = 0.0) -> Bound:
    bound = interaction_bound(p)
    margin = np.inf if omega_k_requested == 0 else bound / omega_k_requested
    ratio = trap_to_pump_ratio(p)
    return Bound("interaction_strength", float(omega_k_requested), float(bound), float(margin),
                 _status(margin),
                 {"bound_hz": float(bound / (2 * np.pi)),
                  "trap_to_pump_ratio": float(ratio),
                  "trap_to_pump_lower_bound": float(trap_to_pump_lower_bound(p)),
                  "trap_to_pump_status": _status(ratio)})


def check_saturation(p: PhysicalParams, max_excited: float = 0.1) -> Bound:
    rho = p.excited_fraction
    margin = max_excited / rho
    status = _status(margin) if p.detuning >= 10 else "fail"
    return Bound("saturation", float(rho), max_excited, float(margin), status,
                 {"detuning_over_gamma": p.detuning})


def regime_report(p: PhysicalParams, omega_k_requested: float = 0.0) -> dict:
    """All bounds as a JSON-ready dict."""
    out = {"params": asdict(p)}
    try:
        out["scattered_intensity_w_m2"] = scattered_intensity(p)
    except SaturationError:
        out["scattered_intensity_w_m2"] = None
    for b in (check_saturation(p), check_lamb_dicke(p), check_interaction_bound(p, omega_k_requested)):
        out[b.name] = b.to_dict()
    return out


def regime_report_json(p: PhysicalParams, omega_k_requested: float = 0.0) -> str:
    return json.dumps(regime_report(p, omega_k_requested), indent=2, sort_keys=True)
