"""Time evolution: closed-system propagation and an RK4 Lindblad integrator."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    ValidationError,
    bloch_vector,
    hermitian_defect,
    is_hermitian,
    ket_to_density,
    partial_trace,
    propagators,
    purity,
    trace_purity,
)

log = logging.getLogger(__name__)

X_AXIS = np.array([1.0, 0.0, 0.0])
DEFAULT_STEPS = 20000
DEFAULT_SAMPLES = 1001
TRACE_FAILURE = 1e-5


class IntegrationError(RuntimeError):
    """The integrator produced a state that is no longer a valid density matrix."""


@dataclass
class TrajectoryRecord:
    times: np.ndarray
    states: np.ndarray  # (n, 4, 4) joint densities
    system_bloch: np.ndarray
    probe_bloch: np.ndarray
    system_purity: np.ndarray
    probe_purity: np.ndarray
    probe_pointer: np.ndarray
    system_trace_purity: np.ndarray
    probe_trace_purity: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    @classmethod
    def from_states(cls, times, states, readout=X_AXIS, diagnostics=None) -> "TrajectoryRecord":
        states = np.asarray(states, dtype=complex)
        rs = partial_trace(states, "S")
        rp = partial_trace(states, "P")
        sb = bloch_vector(rs)
        pb = bloch_vector(rp)
        return cls(
            times=np.asarray(times, dtype=float),
            states=states,
            system_bloch=sb,
            probe_bloch=pb,
            system_purity=purity(rs),
            probe_purity=purity(rp),
            probe_pointer=pb @ np.asarray(readout, dtype=float),
            system_trace_purity=trace_purity(rs),
            probe_trace_purity=trace_purity(rp),
            diagnostics=dict(diagnostics or {}),
        )

    def __len__(self) -> int:
        return len(self.times)

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def shifted(self, t0: float) -> "TrajectoryRecord":
        out = TrajectoryRecord(**{k: getattr(self, k) for k in self.__dataclass_fields__})
        out.times = self.times + t0
        return out

    def tail(self, start: int) -> "TrajectoryRecord":
        kw = {k: getattr(self, k)[start:] for k in self.__dataclass_fields__ if k != "diagnostics"}
        return TrajectoryRecord(diagnostics=self.diagnostics, **kw)

    @staticmethod
    def concatenate(parts: list["TrajectoryRecord"]) -> "TrajectoryRecord":
        kw = {
            k: np.concatenate([getattr(p, k) for p in parts])
            for k in TrajectoryRecord.__dataclass_fields__
            if k != "diagnostics"
        }
        return TrajectoryRecord(diagnostics={"segments": len(parts)}, **kw)

    def columns(self) -> dict[str, np.ndarray]:
        return {
            "t": self.times,
            "sx_S": self.system_bloch[:, 0],
            "sy_S": self.system_bloch[:, 1],
            "sz_S": self.system_bloch[:, 2],
            "sx_P": self.probe_bloch[:, 0],
            "sy_P": self.probe_bloch[:, 1],
            "sz_P": self.probe_bloch[:, 2],
            "purity_S": self.system_purity,
            "purity_P": self.probe_purity,
            "pointer": self.probe_pointer,
        }


def _as_density(state) -> np.ndarray:
    state = np.asarray(state, dtype=complex)
    if state.shape == (4,):
        return ket_to_density(state / np.linalg.norm(state))
    if state.shape == (4, 4):
        return state
    raise ValidationError(f"initial state must be a 4-vector or 4x4 density, got shape {state.shape}")


def unitary_evolve(h, state0, t_grid, readout=X_AXIS) -> TrajectoryRecord:
    """Exact closed-system evolution sampled on ``t_grid``."""
    rho0 = _as_density(state0)
    t_grid = np.asarray(t_grid, dtype=float)
    us = propagators(h, t_grid)
    states = us @ rho0 @ np.conj(np.swapaxes(us, -1, -2))
    return TrajectoryRecord.from_states(t_grid, states, readout, {"engine": "unitary"})


def lindblad_rhs(rho, h, ops) -> np.ndarray:
    """-i[H, rho] - 1/2 sum_k kappa_k [L_k, [L_k, rho]] for Hermitian L_k."""
    d = -1j * (h @ rho - rho @ h)
    for L, kappa in ops:
        if kappa == 0:
            continue
        inner = L @ rho - rho @ L
        d = d - 0.5 * kappa * (L @ inner - inner @ L)
    return d


def _rk4_step(rho, h, ops, dt):
    k1 = lindblad_rhs(rho, h, ops)
    k2 = lindblad_rhs(rho + 0.5 * dt * k1, h, ops)
    k3 = lindblad_rhs(rho + 0.5 * dt * k2, h, ops)
    k4 = lindblad_rhs(rho + dt * k3, h, ops)
    return rho + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def rk4_step_matrix(h, ops, dt) -> np.ndarray:
    """One classical RK4 step as a 16x16 map on row-major vec(rho).

    The master equation is linear, so applying the RK4 stages to each matrix
    unit gives exactly the same update as stepping rho directly.
    """
    d = h.shape[0]
    cols = []
    for j in range(d * d):
        e = np.zeros(d * d, dtype=complex)
        e[j] = 1.0
        cols.append(_rk4_step(e.reshape(d, d), h, ops, dt).ravel())
    return np.column_stack(cols)


def lindblad_evolve(rho0, h, ops, T: float, dt: float | None = None,
                    samples: int = DEFAULT_SAMPLES, readout=X_AXIS) -> TrajectoryRecord:
    """Integrate the master equation over [0, T] with fixed-step RK4.

    ``dt`` is an upper bound; the actual step divides each of the
    ``samples - 1`` output intervals evenly. Hermiticity is restored by
    symmetrization after every step.
    """
    rho = _as_density(rho0).copy()
    if not is_hermitian(h):
        raise ValidationError("Hamiltonian is not Hermitian")
    for L, kappa in ops:
        if not is_hermitian(L):
            raise ValidationError("Lindblad operators must be Hermitian")
        if kappa < 0:
            raise ValidationError(f"negative rate {kappa}")
    if T <= 0:
        raise ValidationError(f"T must be positive, got {T}")
    if samples < 2:
        raise ValidationError("need at least 2 samples")
    if dt is None:
        dt = T / DEFAULT_STEPS
    if dt <= 0 or dt > T / 1000 * (1 + 1e-12):
        raise ValidationError(f"dt={dt} must lie in (0, T/1000]")

    intervals = samples - 1
    per_sample = max(1, math.ceil(T / dt / intervals - 1e-9))
    step = T / (intervals * per_sample)
    prop = rk4_step_matrix(h, ops, step)

    states = np.empty((samples, 4, 4), dtype=complex)
    states[0] = rho
    v = rho.ravel()
    max_defect = 0.0
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(1, samples):
            for _ in range(per_sample):
                r = (prop @ v).reshape(4, 4)
                max_defect = max(max_defect, hermitian_defect(r))
                r = 0.5 * (r + r.conj().T)
                v = r.ravel()
            tr = np.trace(r).real
            if not np.all(np.isfinite(v)) or abs(tr - 1.0) > TRACE_FAILURE:
                raise IntegrationError(
                    f"trace drift {abs(tr - 1.0):.3e} at t={i * per_sample * step:.6g} "
                    f"(dt={step:.3e}); reduce dt"
                )
            states[i] = r

    mins = np.linalg.eigvalsh(states).min(axis=1)
    if mins.min() < -TRACE_FAILURE:
        k = int(np.argmin(mins))
        raise IntegrationError(
            f"density matrix lost positivity (eigenvalue {mins[k]:.3e}) at sample {k} "
            f"(dt={step:.3e}); reduce dt"
        )
    traces = np.einsum("nii->n", states).real
    diag = {
        "engine": "lindblad-rk4",
        "dt": step,
        "steps": intervals * per_sample,
        "max_hermitian_defect": max_defect,
        "max_trace_drift": float(np.max(np.abs(traces - 1.0))),
        "min_eigenvalue": float(mins.min()),
    }
    log.debug("lindblad run: %s", diag)
    times = np.linspace(0.0, T, samples)
    return TrajectoryRecord.from_states(times, states, readout, diag)
