"""Fidelity, concurrence and entanglement-sudden-death location."""
from __future__ import annotations

import numpy as np

from .channel import damp_two_closed_form
from .errors import DimensionMismatch, NoInitialEntanglement, NumericalError, ValidationError
from .linalg import dagger, hermitian_eig, psd_sqrt
from .recovery import recovered_closed_form
from .states import TwoQubitParams

METRIC_CLAMP = 1e-9
EIG_CLAMP = 1e-10
ESD_GRID_POINTS = 101

SIGMA_YY = np.array(
    [[0, 0, 0, -1],
     [0, 0, 1, 0],
     [0, 1, 0, 0],
     [-1, 0, 0, 0]], dtype=complex)


def _clamp_unit(value, what: str):
    value = np.asarray(value, dtype=float)
    if np.any(value < -METRIC_CLAMP) or np.any(value > 1.0 + METRIC_CLAMP):
        raise NumericalError(f"{what} {value} outside [0, 1] beyond round-off")
    value = np.clip(value, 0.0, 1.0)
    return float(value) if value.ndim == 0 else value


def fidelity_from_sqrt(sqrt_rho, sigma):
    """Fidelity given a precomputed sqrt(rho); lets callers reuse it across many sigma."""
    inner = sqrt_rho @ sigma @ sqrt_rho
    inner = 0.5 * (inner + dagger(inner))
    root = psd_sqrt(inner, scale=1.0)
    tr = np.real(np.trace(root, axis1=-2, axis2=-1))
    return _clamp_unit(tr**2, "fidelity")


def fidelity(rho, sigma):
    """Uhlmann fidelity [Tr sqrt(sqrt(rho) sigma sqrt(rho))]^2 (stacks broadcast)."""
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    if rho.shape[-2:] != sigma.shape[-2:]:
        raise DimensionMismatch(f"cannot compare {rho.shape[-2:]} with {sigma.shape[-2:]}")
    return fidelity_from_sqrt(psd_sqrt(rho), sigma)


def spin_flip(rho) -> np.ndarray:
    return SIGMA_YY @ np.conj(rho) @ SIGMA_YY


def concurrence(rho):
    """Wootters concurrence from the spectrum of R = sqrt(sqrt(rho) rho~ sqrt(rho))."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape[-2:] != (4, 4):
        raise DimensionMismatch(f"concurrence needs a 4x4 state, got {rho.shape[-2:]}")
    s = psd_sqrt(rho)
    inner = s @ spin_flip(rho) @ s
    # unit-trace inputs: round-off in inner is ~eps in absolute terms
    r = psd_sqrt(0.5 * (inner + dagger(inner)), scale=1.0)
    lam = hermitian_eig(0.5 * (r + dagger(r))).eigenvalues
    lam = np.where((lam < 0) & (lam >= -EIG_CLAMP), 0.0, lam)
    c = np.maximum(0.0, lam[..., 0] - lam[..., 1] - lam[..., 2] - lam[..., 3])
    return _clamp_unit(c, "concurrence")


def concurrence_from_product(rho):
    """Cross-check: square roots of the (non-Hermitian) spectrum of rho * rho~."""
    rho = np.asarray(rho, dtype=complex)
    ev = np.linalg.eigvals(rho @ spin_flip(rho)).real
    cutoff = 4 * np.finfo(float).eps * np.maximum(np.abs(ev).max(axis=-1, keepdims=True), 1.0)
    lam = np.sort(np.sqrt(np.where(ev > cutoff, ev, 0.0)), axis=-1)[..., ::-1]
    return np.maximum(0.0, lam[..., 0] - lam[..., 1] - lam[..., 2] - lam[..., 3])


def _path_concurrence(params: TwoQubitParams, path: str, p: float) -> float:
    if path == "damped":
        return concurrence(damp_two_closed_form(params, p))
    if path == "recovered":
        if p >= 1.0:
            # fully decayed to |00>; nothing is left to filter back
            return 0.0
        return concurrence(recovered_closed_form(params, p).state)
    raise ValidationError(f"unknown path {path!r}; expected 'damped' or 'recovered'")


def esd_point(params: TwoQubitParams, path: str = "damped", tol: float = 1e-4):
    """Smallest p in (0, 1] where concurrence along ``path`` first hits zero.

    Brackets on a 101-point uniform grid, then bisects to width ``tol``.
    Returns None when concurrence stays positive on the whole grid.
    """
    if _path_concurrence(params, path, 0.0) <= 0.0:
        raise NoInitialEntanglement("state is separable before any damping")
    grid = np.linspace(0.0, 1.0, ESD_GRID_POINTS)
    lo = 0.0
    hi = None
    for p in grid[1:]:
        if _path_concurrence(params, path, float(p)) <= 0.0:
            hi = float(p)
            break
        lo = float(p)
    if hi is None:
        return None
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _path_concurrence(params, path, mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return hi
