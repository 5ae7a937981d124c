"""Amplitude damping, both via Kraus operators and via the closed-form damped matrix."""
from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .linalg import dagger, kron
from .states import TwoQubitParams


def check_probability(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if not np.all((p >= 0.0) & (p <= 1.0)):
        raise ValidationError(f"damping probability must lie in [0, 1], got {p}")
    return p


def probability_from_time(gamma_t: float) -> float:
    """Decay probability after time t at rate Gamma: sqrt(1 - p) = exp(-Gamma t)."""
    if gamma_t < 0:
        raise ValidationError("Gamma*t must be non-negative")
    return float(-np.expm1(-2.0 * gamma_t))


def kraus_ops(p):
    """Single-qubit damping operators (A0, A1); stacked if ``p`` is an array."""
    p = check_probability(p)
    a0 = np.zeros(p.shape + (2, 2), dtype=complex)
    a1 = np.zeros(p.shape + (2, 2), dtype=complex)
    a0[..., 0, 0] = 1.0
    a0[..., 1, 1] = np.sqrt(1.0 - p)
    a1[..., 0, 1] = np.sqrt(p)
    return a0, a1


def damp_single(rho, p) -> np.ndarray:
    a0, a1 = kraus_ops(p)
    rho = np.asarray(rho, dtype=complex)
    return a0 @ rho @ dagger(a0) + a1 @ rho @ dagger(a1)


def damp_two_kraus(rho, p) -> np.ndarray:
    """Damp both qubits with the same probability: sum_kl (Ak x Al) rho (Ak x Al)^dagger.

    ``rho`` may be a stack ``(N, 4, 4)`` with ``p`` of shape ``(N,)``.
    """
    rho = np.asarray(rho, dtype=complex)
    ops = kraus_ops(p)
    out = np.zeros(np.broadcast_shapes(rho.shape, ops[0].shape[:-2] + (4, 4)), dtype=complex)
    for ak in ops:
        for al in ops:
            k = kron(ak, al)
            out += k @ rho @ dagger(k)
    return out


def damp_two_closed_form(params: TwoQubitParams, p: float) -> np.ndarray:
    """Damped two-qubit matrix written out entry by entry from the parameters."""
    p = float(check_probability(p))
    q = 1.0 - p
    sq = np.sqrt(q)
    a, b, c, d, e, f, g, h, i, j = (
        params.a, params.b, params.c, params.d,
        params.e, params.f, params.g, params.h, params.i, params.j,
    )
    cj = np.conj
    return np.array(
        [
            [a + b * p + c * p + p**2 * d, e * sq + p * j * sq, f * sq + i * p * sq, g * q],
            [cj(e) * sq + cj(j) * p * sq, b * q + p * d * q, h * q, i * q * sq],
            [cj(f) * sq + cj(i) * p * sq, cj(h) * q, c * q + p * d * q, j * q * sq],
            [cj(g) * q, cj(i) * q * sq, cj(j) * q * sq, d * q**2],
        ],
        dtype=complex,
    )
