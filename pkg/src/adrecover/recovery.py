"""Post-selected gate recovery of damped two-qubit states.

Circuit layout, left to right: A1, S1, S2, A2. Each ancilla starts in |0>,
passes through a rotation ``H_theta`` and is the target of a CNOT controlled
by its neighbouring system qubit. Both ancillas are then projected on |0>
and traced out. Conditioned on success this applies the local filter
``diag(cos theta, sin theta)`` to each system qubit.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import check_probability, damp_two_closed_form
from .errors import DegenerateDamping, ValidationError, ZeroSuccess
from .linalg import dagger, kron, partial_trace
from .states import TwoQubitParams, to_params

TAU_SUCC = 1e-12

_KET0 = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
_I2 = np.eye(2, dtype=complex)


@dataclass(frozen=True)
class PostSelectedOutcome:
    state: np.ndarray
    success_probability: float | np.ndarray


@dataclass(frozen=True)
class ExtendedConfig:
    """Preparation strength ``x = tan^2(theta1)`` and damping probability ``p``."""

    x: float
    p: float

    def __post_init__(self):
        if not self.x > 0:
            raise ValidationError(f"x must be positive, got {self.x}")
        check_probability(self.p)

    @property
    def theta1(self) -> float:
        return float(np.arctan(np.sqrt(self.x)))

    @property
    def theta2(self) -> float:
        if self.p >= 1.0:
            raise DegenerateDamping("p = 1: recovery angle requires x*q*y = 1 with q = 0")
        return float(np.arctan(np.sqrt(1.0 / (self.x * (1.0 - self.p)))))


def hadamard_gate(theta) -> np.ndarray:
    """Rotation [[cos, -sin], [sin, cos]]; stacked if ``theta`` is an array."""
    theta = np.asarray(theta, dtype=float)
    c, s = np.cos(theta), np.sin(theta)
    out = np.empty(theta.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = c
    out[..., 0, 1] = -s
    out[..., 1, 0] = s
    out[..., 1, 1] = c
    return out


def cnot_gates() -> tuple[np.ndarray, np.ndarray]:
    """UC1 flips its first qubit when the second is 1; UC2 flips its second when the first is 1."""
    uc1 = np.array(
        [[1, 0, 0, 0],
         [0, 0, 0, 1],
         [0, 0, 1, 0],
         [0, 1, 0, 0]], dtype=complex)
    uc2 = np.array(
        [[1, 0, 0, 0],
         [0, 1, 0, 0],
         [0, 0, 0, 1],
         [0, 0, 1, 0]], dtype=complex)
    return uc1, uc2


def adaptive_angle(p):
    """Recovery angle atan(1/sqrt(1 - p)) matched to a known damping probability."""
    p = check_probability(p)
    if np.any(p >= 1.0):
        raise DegenerateDamping("p = 1 leaves the recovery angle undefined (atan(1/0))")
    return np.arctan(1.0 / np.sqrt(1.0 - p))


def ancilla_state(theta) -> np.ndarray:
    h = hadamard_gate(theta)
    return h @ _KET0 @ dagger(h)


_UC1, _UC2 = cnot_gates()
_U_FULL = kron(_UC1, _UC2)
_PROJ = kron(kron(_KET0, _I2), kron(_I2, _KET0))


def project_recovery(rho_in, theta) -> tuple[np.ndarray, np.ndarray]:
    """Unnormalized post-selected system matrix and its trace.

    Full 16-dimensional simulation; broadcasts over stacks of states and angles.
    """
    rho_in = np.asarray(rho_in, dtype=complex)
    anc = ancilla_state(theta)
    big = kron(kron(anc, rho_in), anc)
    big = _U_FULL @ big @ dagger(_U_FULL)
    big = _PROJ @ big @ _PROJ
    reduced = partial_trace(big, [2, 2, 2, 2], keep=[1, 2])
    prob = np.real(np.trace(reduced, axis1=-2, axis2=-1))
    return reduced, prob


def run_recovery_circuit(rho_in, theta) -> PostSelectedOutcome:
    reduced, prob = project_recovery(rho_in, theta)
    if np.any(prob < TAU_SUCC):
        raise ZeroSuccess(f"post-selection probability {np.min(prob):.3e} below {TAU_SUCC:g}")
    return PostSelectedOutcome(reduced / prob[..., None, None], prob if prob.ndim else float(prob))


def normalization(params: TwoQubitParams, p: float) -> float:
    return float(1.0 + (1.0 - params.a + params.d) * p + p**2 * params.d)


def recovered_numerator(params: TwoQubitParams, p: float) -> np.ndarray:
    a, b, c, d, e, f, g, h, i, j = (
        params.a, params.b, params.c, params.d,
        params.e, params.f, params.g, params.h, params.i, params.j,
    )
    cj = np.conj
    return np.array(
        [
            [a + b * p + c * p + p**2 * d, e + p * j, f + i * p, g],
            [cj(e) + cj(j) * p, b + p * d, h, i],
            [cj(f) + cj(i) * p, cj(h), c + p * d, j],
            [cj(g), cj(i), cj(j), d],
        ],
        dtype=complex,
    )


def error_matrix(params: TwoQubitParams, p: float) -> np.ndarray:
    """Residual of the recovered numerator with respect to the initial state."""
    b, c, d, i, j = params.b, params.c, params.d, params.i, params.j
    cj = np.conj
    return np.array(
        [
            [b * p + c * p + p**2 * d, j * p, i * p, 0],
            [cj(j) * p, d * p, 0, 0],
            [cj(i) * p, 0, p * d, 0],
            [0, 0, 0, 0],
        ],
        dtype=complex,
    )


def recovered_closed_form(params: TwoQubitParams, p: float) -> PostSelectedOutcome:
    """Recovered state for the matched angle theta = atan(1/sqrt(1 - p)).

    The success probability is the post-selection trace cos^4(theta) * N,
    with N the normalization of the closed-form numerator.
    """
    p = float(check_probability(p))
    theta = float(adaptive_angle(p))
    n = normalization(params, p)
    state = recovered_numerator(params, p) / n
    return PostSelectedOutcome(state, float(np.cos(theta) ** 4 * n))


def prepare_state(params: TwoQubitParams, x: float) -> PostSelectedOutcome:
    """Preparation stage with x = tan^2(theta1) applied to an undamped state.

    Entry (r, c) is scaled by the product of per-qubit amplitudes
    sqrt(1/(1+x)) for a 0 bit and sqrt(x/(1+x)) for a 1 bit, on both r and c.
    """
    if not x > 0:
        raise ValidationError(f"x must be positive, got {x}")
    a, b, c, d, e, f, g, h, i, j = (
        params.a, params.b, params.c, params.d,
        params.e, params.f, params.g, params.h, params.i, params.j,
    )
    u = 1.0 / (1.0 + x)
    w = x / (1.0 + x)
    one = u**1.5 * np.sqrt(w)  # one excitation across row and column
    three = np.sqrt(u) * w**1.5  # three excitations
    cj = np.conj
    m = np.array(
        [
            [a * u**2, e * one, f * one, g * x * u**2],
            [cj(e) * one, b * x * u**2, h * x * u**2, i * three],
            [cj(f) * one, cj(h) * x * u**2, c * x * u**2, j * three],
            [cj(g) * x * u**2, cj(i) * three, cj(j) * three, d * x**2 * u**2],
        ],
        dtype=complex,
    )
    prob = float(np.trace(m).real)
    if prob < TAU_SUCC:
        raise ZeroSuccess(f"preparation success probability {prob:.3e} below {TAU_SUCC:g}")
    return PostSelectedOutcome(m / prob, prob)


def run_extended(params: TwoQubitParams, cfg: ExtendedConfig) -> PostSelectedOutcome:
    """Prepare with theta1, damp, then recover with theta2 chosen so that x*q*y = 1."""
    theta2 = cfg.theta2
    prepared = prepare_state(params, cfg.x)
    damped = damp_two_closed_form(to_params(prepared.state), cfg.p)
    recovered = run_recovery_circuit(damped, theta2)
    return PostSelectedOutcome(
        recovered.state, prepared.success_probability * recovered.success_probability
    )
