"""Trapped-ion parameters mapped onto the dimensionless measurement model.

Lab-frame ingredients for two ions:
  protection on the system ion   ~ sigma_phi = sx cos(phi) - sy sin(phi), strength delta1
  Ising coupling                 hbar*J0 * s_theta x s_theta, s_theta = sx sin(theta) + sy cos(theta)
  optional ac Stark shift on the probe  hbar*delta2 * sz

The measurement strength is xi = J0/delta1 and the interaction time follows
from matching J0 to the coupling coefficient pi/(4T). The frame is rotated so
that the protection axis becomes z, which is what the model assumes.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .model import MeasurementConfig, ProbeSelfConfig, angles_from_axis

DEFAULT_DELTA_RANGE = 6.0


class InfeasibleError(ValueError):
    """Ion-trap parameters outside the experimentally available range."""

    def __init__(self, violations: list[str]):
        self.violations = violations
        super().__init__("; ".join(violations))


@dataclass(frozen=True)
class IonTrapParams:
    j0: float  # s^-1
    delta1: float  # s^-1
    delta2: float = 0.0  # s^-1
    theta: float = np.pi / 2
    phi: float = 0.0
    delta_range_multiple: float = DEFAULT_DELTA_RANGE

    def to_dict(self) -> dict:
        return {k: float(getattr(self, k)) for k in self.__dataclass_fields__}


def feasibility_violations(p: IonTrapParams) -> list[str]:
    out = []
    if not p.j0 > 0:
        out.append(f"j0 > 0 violated (j0={p.j0})")
        return out
    hi = p.delta_range_multiple * p.j0
    if p.delta1 <= 0:
        out.append(f"delta1 > 0 violated (delta1={p.delta1}); xi = j0/delta1 undefined")
    elif p.delta1 > hi:
        out.append(f"delta1 <= {p.delta_range_multiple:g}*j0 = {hi:g} violated (delta1={p.delta1:g})")
    if p.delta2 < 0:
        out.append(f"delta2 >= 0 violated (delta2={p.delta2})")
    elif p.delta2 > hi:
        out.append(f"delta2 <= {p.delta_range_multiple:g}*j0 = {hi:g} violated (delta2={p.delta2:g})")
    return out


def check_feasibility(p: IonTrapParams) -> None:
    v = feasibility_violations(p)
    if v:
        raise InfeasibleError(v)


def min_measurement_strength(delta_range_multiple: float) -> Fraction | float:
    """Smallest reachable xi when the Stark shift is capped at multiple*J0."""
    try:
        return Fraction(1) / Fraction(delta_range_multiple)
    except (TypeError, ValueError):
        return 1.0 / delta_range_multiple


def interaction_time(p: IonTrapParams) -> float:
    """T = pi/(4 J0) in seconds."""
    if not p.j0 > 0:
        raise InfeasibleError([f"j0 > 0 violated (j0={p.j0})"])
    return np.pi / (4.0 * p.j0)


def _frame(phi: float) -> np.ndarray:
    # rows: new x, y, z axes in lab coordinates; protection axis -> new z
    prot = np.array([np.cos(phi), -np.sin(phi), 0.0])
    ey = np.array([0.0, 0.0, 1.0])
    ex = np.cross(ey, prot)
    return np.vstack([ex, ey, prot])


def to_measurement_config(p: IonTrapParams, *, check: bool = True):
    """Dimensionless config (and probe self-Hamiltonian when delta2 > 0).

    Measurement and probe-rotation axes coincide with the rotated theta-axis.
    """
    if check:
        check_feasibility(p)
    elif p.delta1 <= 0:
        raise InfeasibleError([f"delta1 > 0 violated (delta1={p.delta1}); xi = j0/delta1 undefined"])
    frame = _frame(p.phi)
    coupling = frame @ np.array([np.sin(p.theta), np.cos(p.theta), 0.0])
    gamma, eta = angles_from_axis(coupling)
    # the coupling axis has no component along the new y axis, so a probe
    # prepared along +y is always perpendicular to the rotation axis
    probe_init = np.array([1.0, 1.0j]) / np.sqrt(2.0)
    cfg = MeasurementConfig(
        xi=p.j0 / p.delta1,
        gamma=gamma,
        eta=eta,
        probe_axis=coupling,
        probe_init=probe_init,
    )
    probe = None
    if p.delta2 > 0:
        stark_axis = frame @ np.array([0.0, 0.0, 1.0])
        probe = ProbeSelfConfig(delta_p=p.delta2 / p.j0, axis=stark_axis)
    return cfg, probe


def describe(p: IonTrapParams) -> dict:
    """Derived quantities for display; does not raise on infeasible input."""
    out = {"params": p.to_dict(), "violations": feasibility_violations(p)}
    out["feasible"] = not out["violations"]
    out["xi_min"] = float(min_measurement_strength(p.delta_range_multiple))
    if p.j0 > 0:
        T = interaction_time(p)
        out["interaction_time_s"] = T
    if p.j0 > 0 and p.delta1 > 0:
        cfg, probe = to_measurement_config(p, check=False)
        out["measurement"] = cfg.to_dict()
        out["omega0_per_s"] = 1.0 / (cfg.xi * out["interaction_time_s"])
        if probe is not None:
            out["probe_self"] = probe.to_dict()
    return out
