"""Protective measurement of a qubit by a qubit probe: closed-form and numerical dynamics."""
from .analytic import (
    EffectiveField,
    controlled_rotation_gate,
    effective_field,
    exact_final_state,
    ideal_pointer_value,
    ideal_rotation_angle,
)
from .evolve import IntegrationError, TrajectoryRecord, lindblad_evolve, lindblad_rhs, unitary_evolve
from .iontrap import IonTrapParams, InfeasibleError, interaction_time, to_measurement_config
from .linalg import ValidationError
from .model import (
    EnvironmentConfig,
    MeasurementConfig,
    ProbeSelfConfig,
    build_hamiltonian,
    build_lindblad_ops,
)
from .protocol import (
    ChainReport,
    MeasurementReport,
    apply_counter_rotation,
    disturbance,
    pointer_deviation,
    run_repeated,
    run_single,
)

__version__ = "0.1.0"
