"""Closed-form results for the qubit-probe protective measurement."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import ValidationError, hermitian_eigensystem, pauli_dot, propagator
from .model import MeasurementConfig


@dataclass(frozen=True)
class EffectiveField:
    """Bloch vectors w+/w- of the conditional system Hamiltonians (1/2) sigma.w+-."""

    w_plus: np.ndarray
    w_minus: np.ndarray
    chi_plus: float
    chi_minus: float
    theta_plus: float
    theta_minus: float
    phi_plus: float
    phi_minus: float

    def branch(self, sign: int):
        if sign > 0:
            return self.w_plus, self.chi_plus, self.theta_plus, self.phi_plus
        return self.w_minus, self.chi_minus, self.theta_minus, self.phi_minus


def effective_field(xi: float, lam: float, gamma: float, eta: float) -> EffectiveField:
    if xi <= 0:
        raise ValidationError(f"xi must be positive, got {xi}")
    a = 2.0 * lam * xi
    out = {}
    for sign, tag in ((1, "plus"), (-1, "minus")):
        w = np.array([
            sign * a * np.cos(eta) * np.sin(gamma),
            sign * a * np.sin(eta) * np.sin(gamma),
            1.0 + sign * a * np.cos(gamma),
        ])
        chi = np.sqrt(1.0 + a * a + sign * 2.0 * a * np.cos(gamma))
        # atan2 keeps theta accurate near the poles
        out[f"w_{tag}"] = w
        out[f"chi_{tag}"] = float(chi)
        out[f"theta_{tag}"] = float(np.arctan2(np.hypot(w[0], w[1]), w[2]))
        out[f"phi_{tag}"] = float(np.arctan2(w[1], w[0]))
    return EffectiveField(**out)


def probe_eigenbasis(n) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvectors |+>_n, |->_n of sigma.n (fixed phase convention)."""
    _, v = hermitian_eigensystem(pauli_dot(np.asarray(n, dtype=float)))
    return v[:, 1].copy(), v[:, 0].copy()


def _is_ket0(psi) -> bool:
    return abs(abs(psi[0]) - 1.0) < 1e-12 and abs(psi[1]) < 1e-12


def exact_final_state(cfg: MeasurementConfig, c_plus=None, c_minus=None) -> np.ndarray:
    """Joint system-probe state at t = T from the conditional eigenstates.

    ``c_plus``/``c_minus`` are probe amplitudes on the :func:`probe_eigenbasis`
    of the rotation axis; by default they are taken from ``cfg.probe_init``.
    Only a system starting in |0> is supported.
    """
    if not _is_ket0(cfg.system_init):
        raise ValidationError("exact_final_state requires the system to start in |0>")
    plus, minus = probe_eigenbasis(cfg.probe_axis)
    if c_plus is None and c_minus is None:
        c_plus = np.vdot(plus, cfg.probe_init)
        c_minus = np.vdot(minus, cfg.probe_init)
    elif c_plus is None or c_minus is None:
        raise ValidationError("give both c_plus and c_minus or neither")
    norm = abs(c_plus) ** 2 + abs(c_minus) ** 2
    if abs(norm - 1.0) > 1e-10:
        raise ValidationError(f"|c+|^2 + |c-|^2 = {norm:.12g}, expected 1")

    field = effective_field(cfg.xi, cfg.lam, cfg.gamma, cfg.eta)
    T = cfg.T
    psi = np.zeros(4, dtype=complex)
    for sign, c, probe_ket in ((1, c_plus, plus), (-1, c_minus, minus)):
        _, chi, theta, phi = field.branch(sign)
        ch, sh = np.cos(theta / 2), np.sin(theta / 2)
        e = np.exp(1j * phi)
        phi0 = np.array([ch, sh * e])
        phi1 = np.array([sh, -ch * e])
        system = np.exp(-0.5j * chi * T) * ch * phi0 + np.exp(0.5j * chi * T) * sh * phi1
        psi += c * np.kron(system, probe_ket)
    return psi


def weak_limit_state(cfg: MeasurementConfig) -> np.ndarray:
    """Product state reached in the xi -> 0 limit: |0> x exp(-i lam cos(gamma) sigma.n)|psi_P>."""
    rot = propagator(pauli_dot(cfg.probe_axis), cfg.lam * np.cos(cfg.gamma))
    ket0 = np.array([1.0, 0.0], dtype=complex)
    return np.exp(-0.5j * cfg.T) * np.kron(ket0, rot @ cfg.probe_init)


def ideal_rotation_angle(gamma: float, lam: float = np.pi / 4) -> float:
    return 2.0 * lam * np.cos(gamma)


def ideal_pointer_value(gamma: float, lam: float = np.pi / 4) -> float:
    """Readout <sigma.k> of an ideal protective measurement, sin(2 lam cos gamma)."""
    return float(np.sin(ideal_rotation_angle(gamma, lam)))


def controlled_rotation_gate(gamma: float, lam: float = np.pi / 4) -> np.ndarray:
    """Two-qubit gate equivalent to the ideal measurement with y-axis probe rotation.

    The system basis state selects both the sign and the size of the probe
    rotation: R_y(+2a) on |0>_S and R_y(-2a) on |1>_S with a = lam*cos(gamma).
    """
    a = lam * np.cos(gamma)
    c, s = np.cos(a), np.sin(a)
    return np.array([
        [c, -s, 0, 0],
        [s, c, 0, 0],
        [0, 0, c, s],
        [0, 0, -s, c],
    ], dtype=complex)
