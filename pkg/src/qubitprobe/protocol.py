"""Measurement scenarios and quality metrics.

A single run prepares system and probe, evolves them for the interaction
time T and reads out the probe along the readout axis. Chains repeat this
with a freshly prepared probe while the system state carries over.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .evolve import TrajectoryRecord, lindblad_evolve, unitary_evolve, DEFAULT_SAMPLES
from .linalg import (
    ValidationError,
    bloch_vector,
    ket_to_density,
    partial_trace,
    pauli_dot,
    propagator,
)
from .model import (
    EnvironmentConfig,
    MeasurementConfig,
    ProbeSelfConfig,
    build_hamiltonian,
    build_lindblad_ops,
)

RELATIVE_THRESHOLD = 0.05


@dataclass
class MeasurementReport:
    disturbance: float
    final_system_purity: float
    final_probe_purity: float
    final_system_trace_purity: float
    final_probe_trace_purity: float
    final_pointer: float
    ideal_pointer: float
    pointer_deviation: float
    trajectory: TrajectoryRecord
    corrected_pointer: float | None = None
    corrected_deviation: float | None = None

    def to_dict(self) -> dict:
        d = {
            "disturbance": self.disturbance,
            "final_system_purity": self.final_system_purity,
            "final_probe_purity": self.final_probe_purity,
            "final_system_trace_purity": self.final_system_trace_purity,
            "final_probe_trace_purity": self.final_probe_trace_purity,
            "final_pointer": self.final_pointer,
            "ideal_pointer": self.ideal_pointer,
            "pointer_deviation": self.pointer_deviation,
            "final_system_bloch": self.trajectory.system_bloch[-1].tolist(),
            "final_probe_bloch": self.trajectory.probe_bloch[-1].tolist(),
        }
        if self.corrected_pointer is not None:
            d["corrected_pointer"] = self.corrected_pointer
            d["corrected_deviation"] = self.corrected_deviation
        return {k: (float(v) if isinstance(v, (float, np.floating)) else v) for k, v in d.items()}


@dataclass
class ChainReport:
    per_cycle: list[MeasurementReport]
    cumulative_disturbance: float
    worst_case_deviation: float
    average_deviation: float
    final_system_purity: float
    trajectory: TrajectoryRecord

    def to_dict(self) -> dict:
        return {
            "cycles": len(self.per_cycle),
            "cumulative_disturbance": float(self.cumulative_disturbance),
            "worst_case_deviation": float(self.worst_case_deviation),
            "average_deviation": float(self.average_deviation),
            "final_system_purity": float(self.final_system_purity),
            "per_cycle": [r.to_dict() for r in self.per_cycle],
        }


def disturbance(traj: TrajectoryRecord) -> float:
    """1 - min over samples of Tr[rho_S(t) sigma_z]."""
    if traj is None or len(traj) == 0:
        raise ValidationError("disturbance needs a non-empty trajectory")
    return float(1.0 - np.min(traj.system_bloch[:, 2]))


def pointer_deviation(actual: float, ideal: float) -> float:
    """Relative difference |actual - ideal|/|ideal|, absolute when |ideal| <= 0.05."""
    diff = abs(actual - ideal)
    if abs(ideal) > RELATIVE_THRESHOLD:
        return diff / abs(ideal)
    return diff


def ideal_pointer(cfg: MeasurementConfig) -> float:
    """Ideal readout for the configured initial system state."""
    rho = ket_to_density(cfg.system_init)
    expectation = float(np.trace(rho @ pauli_dot(cfg.measurement_axis)).real)
    return float(np.sin(2.0 * cfg.lam * expectation))


def apply_counter_rotation(probe_state, probe: ProbeSelfConfig, T: float) -> np.ndarray:
    """Undo the free probe rotation exp(-i (omega_P T / 2) sigma.r) accumulated over T."""
    rho = np.asarray(probe_state, dtype=complex)
    if rho.shape != (2, 2):
        raise ValidationError(f"probe state must be 2x2, got {rho.shape}")
    half_angle = 0.5 * probe.omega(T) * T
    u = propagator(pauli_dot(probe.axis), -half_angle)
    return u @ rho @ u.conj().T


def _evolve_cycle(cfg, h, ops, rho0, samples, dt) -> TrajectoryRecord:
    if ops is None:
        times = np.linspace(0.0, cfg.T, samples)
        return unitary_evolve(h, rho0, times, readout=cfg.readout)
    return lindblad_evolve(rho0, h, ops, cfg.T, dt=dt, samples=samples, readout=cfg.readout)


def _report(cfg, traj, probe, counter_rotate) -> MeasurementReport:
    ideal = ideal_pointer(cfg)
    final = float(traj.probe_pointer[-1])
    rep = MeasurementReport(
        disturbance=disturbance(traj),
        final_system_purity=float(traj.system_purity[-1]),
        final_probe_purity=float(traj.probe_purity[-1]),
        final_system_trace_purity=float(traj.system_trace_purity[-1]),
        final_probe_trace_purity=float(traj.probe_trace_purity[-1]),
        final_pointer=final,
        ideal_pointer=ideal,
        pointer_deviation=pointer_deviation(final, ideal),
        trajectory=traj,
    )
    if counter_rotate:
        if probe is None:
            raise ValidationError("counter-rotation requires a probe self-Hamiltonian")
        rp = apply_counter_rotation(partial_trace(traj.final_state, "P"), probe, cfg.T)
        rep.corrected_pointer = float(bloch_vector(rp) @ cfg.readout)
        rep.corrected_deviation = pointer_deviation(rep.corrected_pointer, ideal)
    return rep


def run_single(cfg: MeasurementConfig, probe: ProbeSelfConfig | None = None,
               env: EnvironmentConfig | None = None, *, samples: int = DEFAULT_SAMPLES,
               dt: float | None = None, counter_rotate: bool = False) -> MeasurementReport:
    """One preparation-interaction-readout cycle.

    Uses exact propagation without an environment and the RK4 master-equation
    integrator otherwise.
    """
    h = build_hamiltonian(cfg, probe)
    ops = build_lindblad_ops(env) if env is not None else None
    rho0 = np.kron(ket_to_density(cfg.system_init), ket_to_density(cfg.probe_init))
    traj = _evolve_cycle(cfg, h, ops, rho0, samples, dt)
    return _report(cfg, traj, probe, counter_rotate)


def run_repeated(cfg: MeasurementConfig, N: int, probe: ProbeSelfConfig | None = None,
                 env: EnvironmentConfig | None = None, *, samples: int = DEFAULT_SAMPLES,
                 dt: float | None = None, counter_rotate: bool = False) -> ChainReport:
    """N consecutive measurements on the same system with a freshly prepared probe each time.

    Between cycles the joint state is reduced to the system and re-joined with
    the initial probe state, which drops any system-probe correlations.
    """
    if int(N) != N or N < 1:
        raise ValidationError(f"chain length must be a positive integer, got {N}")
    h = build_hamiltonian(cfg, probe)
    ops = build_lindblad_ops(env) if env is not None else None
    probe0 = ket_to_density(cfg.probe_init)
    rho_s = ket_to_density(cfg.system_init)

    reports = []
    pieces = []
    for n in range(int(N)):
        traj = _evolve_cycle(cfg, h, ops, np.kron(rho_s, probe0), samples, dt)
        reports.append(_report(cfg, traj, probe, counter_rotate))
        shifted = traj.shifted(n * cfg.T)
        # the first sample of a later cycle repeats the previous end time
        pieces.append(shifted if n == 0 else shifted.tail(1))
        rho_s = partial_trace(traj.final_state, "S")

    full = TrajectoryRecord.concatenate(pieces)
    devs = [r.pointer_deviation for r in reports]
    return ChainReport(
        per_cycle=reports,
        cumulative_disturbance=disturbance(full),
        worst_case_deviation=devs[-1],
        average_deviation=float(np.mean(devs)),
        final_system_purity=reports[-1].final_system_purity,
        trajectory=full,
    )
