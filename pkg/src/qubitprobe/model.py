"""Configuration objects and Hamiltonian builders.

Natural units: hbar = 1 and the protection frequency omega0 = 1, so the
interaction time is T = 1/xi.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import I2, SZ, ValidationError, kron, pauli_dot, unit_vector, bloch_vector, ket_to_density

__all__ = [
    "MeasurementConfig",
    "ProbeSelfConfig",
    "EnvironmentConfig",
    "pauli_dot",
    "axis_from_angles",
    "angles_from_axis",
    "build_hamiltonian",
    "build_lindblad_ops",
]

X_AXIS = np.array([1.0, 0.0, 0.0])
Y_AXIS = np.array([0.0, 1.0, 0.0])
Z_AXIS = np.array([0.0, 0.0, 1.0])
KET0 = np.array([1.0, 0.0], dtype=complex)


def axis_from_angles(gamma: float, eta: float) -> np.ndarray:
    return np.array([np.cos(eta) * np.sin(gamma), np.sin(eta) * np.sin(gamma), np.cos(gamma)])


def angles_from_axis(v) -> tuple[float, float]:
    """Polar and azimuthal angle of a (not necessarily unit) 3-vector."""
    v = unit_vector(v, "axis")
    gamma = float(np.arctan2(np.hypot(v[0], v[1]), v[2]))
    eta = float(np.arctan2(v[1], v[0]) % (2 * np.pi))
    return gamma, eta


def _ket(psi, name: str) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (2,):
        raise ValidationError(f"{name} must be a 2-component state, got shape {psi.shape}")
    n = np.linalg.norm(psi)
    if n < 1e-12:
        raise ValidationError(f"{name} is the zero vector")
    return psi / n


@dataclass(frozen=True)
class MeasurementConfig:
    """One protective measurement.

    ``gamma``/``eta`` fix the measured observable sigma.m; ``probe_axis`` is
    the rotation axis n of the probe. ``readout_axis`` defaults to
    n x (Bloch vector of ``probe_init``), which is x for the default y-axis
    rotation and |0> probe.
    """

    xi: float
    gamma: float = 0.0
    eta: float = 0.0
    lam: float = np.pi / 4
    probe_axis: np.ndarray = field(default_factory=lambda: Y_AXIS.copy())
    system_init: np.ndarray = field(default_factory=lambda: KET0.copy())
    probe_init: np.ndarray = field(default_factory=lambda: KET0.copy())
    readout_axis: np.ndarray | None = None

    def __post_init__(self):
        if not np.isfinite(self.xi) or self.xi <= 0:
            raise ValidationError(f"xi must be positive, got {self.xi}")
        if not (-1e-12 <= self.gamma <= np.pi + 1e-12):
            raise ValidationError(f"gamma must lie in [0, pi], got {self.gamma}")
        object.__setattr__(self, "eta", float(self.eta) % (2 * np.pi))
        object.__setattr__(self, "probe_axis", unit_vector(self.probe_axis, "probe_axis"))
        object.__setattr__(self, "system_init", _ket(self.system_init, "system_init"))
        object.__setattr__(self, "probe_init", _ket(self.probe_init, "probe_init"))
        if self.readout_axis is not None:
            object.__setattr__(self, "readout_axis", unit_vector(self.readout_axis, "readout_axis"))
        else:
            p = bloch_vector(ket_to_density(self.probe_init))
            if abs(np.dot(p, self.probe_axis)) > 1e-9:
                raise ValidationError(
                    "probe_init must be orthogonal to probe_axis on the Bloch sphere "
                    "when no readout_axis is given"
                )

    @classmethod
    def from_axis(cls, xi: float, axis, **kwargs) -> "MeasurementConfig":
        gamma, eta = angles_from_axis(axis)
        return cls(xi=xi, gamma=gamma, eta=eta, **kwargs)

    @property
    def T(self) -> float:
        return 1.0 / self.xi

    @property
    def measurement_axis(self) -> np.ndarray:
        return axis_from_angles(self.gamma, self.eta)

    @property
    def readout(self) -> np.ndarray:
        if self.readout_axis is not None:
            return self.readout_axis
        p = bloch_vector(ket_to_density(self.probe_init))
        return np.cross(self.probe_axis, p)

    def replace(self, **changes) -> "MeasurementConfig":
        kw = dict(
            xi=self.xi, gamma=self.gamma, eta=self.eta, lam=self.lam,
            probe_axis=self.probe_axis, system_init=self.system_init,
            probe_init=self.probe_init, readout_axis=self.readout_axis,
        )
        kw.update(changes)
        return MeasurementConfig(**kw)

    def to_dict(self) -> dict:
        def cplx(v):
            return [[float(z.real), float(z.imag)] for z in v]

        return {
            "xi": float(self.xi),
            "T": self.T,
            "gamma": float(self.gamma),
            "eta": float(self.eta),
            "lambda": float(self.lam),
            "measurement_axis": self.measurement_axis.tolist(),
            "probe_axis": self.probe_axis.tolist(),
            "readout_axis": self.readout.tolist(),
            "system_init": cplx(self.system_init),
            "probe_init": cplx(self.probe_init),
        }


@dataclass(frozen=True)
class ProbeSelfConfig:
    """Intrinsic probe Hamiltonian (pi*delta_p/4T) sigma.r, i.e. omega_P = pi*delta_p/(2T)."""

    delta_p: float
    axis: np.ndarray = field(default_factory=lambda: Y_AXIS.copy())

    def __post_init__(self):
        if not np.isfinite(self.delta_p) or self.delta_p < 0:
            raise ValidationError(f"delta_p must be >= 0, got {self.delta_p}")
        object.__setattr__(self, "axis", unit_vector(self.axis, "probe_self.axis"))

    def omega(self, T: float) -> float:
        return np.pi * self.delta_p / (2.0 * T)

    def to_dict(self) -> dict:
        return {"delta_p": float(self.delta_p), "axis": self.axis.tolist()}


@dataclass(frozen=True)
class EnvironmentConfig:
    """Pure-decoherence coupling of S and P along Pauli axes; rates in units of omega0."""

    kappa_s: float = 0.0
    kappa_p: float = 0.0
    axis_s: np.ndarray = field(default_factory=lambda: Z_AXIS.copy())
    axis_p: np.ndarray = field(default_factory=lambda: Z_AXIS.copy())

    def __post_init__(self):
        for name in ("kappa_s", "kappa_p"):
            k = getattr(self, name)
            if not np.isfinite(k) or k < 0:
                raise ValidationError(f"{name} must be >= 0, got {k}")
        object.__setattr__(self, "axis_s", unit_vector(self.axis_s, "environment.axis_s"))
        object.__setattr__(self, "axis_p", unit_vector(self.axis_p, "environment.axis_p"))

    def to_dict(self) -> dict:
        return {
            "kappa_s": float(self.kappa_s),
            "kappa_p": float(self.kappa_p),
            "axis_s": self.axis_s.tolist(),
            "axis_p": self.axis_p.tolist(),
        }


def build_hamiltonian(cfg: MeasurementConfig, probe: ProbeSelfConfig | None = None) -> np.ndarray:
    """Joint Hamiltonian (1/2) sz x I + (lam/T) (s.m) x (s.n) [+ (pi dP/4T) I x (s.r)]."""
    T = cfg.T
    h = 0.5 * kron(SZ, I2)
    h = h + (cfg.lam / T) * kron(pauli_dot(cfg.measurement_axis), pauli_dot(cfg.probe_axis))
    if probe is not None and probe.delta_p != 0:
        h = h + (np.pi * probe.delta_p / (4.0 * T)) * kron(I2, pauli_dot(probe.axis))
    return h


def build_lindblad_ops(env: EnvironmentConfig) -> list[tuple[np.ndarray, float]]:
    return [
        (kron(pauli_dot(env.axis_s), I2), float(env.kappa_s)),
        (kron(I2, pauli_dot(env.axis_p)), float(env.kappa_p)),
    ]
