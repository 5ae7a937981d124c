"""Amplitude damping of two-qubit mixed states and its post-selected gate recovery."""

__version__ = "0.1.0"

from .channel import damp_single, damp_two_closed_form, damp_two_kraus, kraus_ops
from .metrics import concurrence, esd_point, fidelity
from .recovery import (ExtendedConfig, PostSelectedOutcome, prepare_state,
                       recovered_closed_form, run_extended, run_recovery_circuit)
from .states import RHO1, RHO2, TwoQubitParams, from_params, to_params, to_params_batch, validate

__all__ = [
    "ExtendedConfig", "PostSelectedOutcome", "RHO1", "RHO2", "TwoQubitParams",
    "concurrence", "damp_single", "damp_two_closed_form", "damp_two_kraus", "esd_point",
    "fidelity", "from_params", "kraus_ops", "prepare_state", "recovered_closed_form",
    "run_extended", "run_recovery_circuit", "to_params", "to_params_batch", "validate",
]
