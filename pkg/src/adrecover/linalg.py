"""Small dense complex linear algebra.

Every routine accepts either a single matrix of shape ``(n, n)`` or a stack
of shape ``(..., n, n)`` so Monte-Carlo code can push thousands of 4x4 or
16x16 problems through one call.
"""
from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

from .errors import DimensionMismatch, NoConvergence, NotHermitian, NotPSD

TAU_HERM = 1e-10
TAU_EIG = 1e-11
TAU_NEG = 1e-10
JACOBI_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100


class EigenDecomposition(NamedTuple):
    eigenvalues: np.ndarray  # (..., n), descending
    eigenvectors: np.ndarray  # (..., n, n), columns


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product broadcasting over leading stack dimensions."""
    a = np.asarray(a)
    b = np.asarray(b)
    ra, ca = a.shape[-2:]
    rb, cb = b.shape[-2:]
    out = a[..., :, None, :, None] * b[..., None, :, None, :]
    return out.reshape(out.shape[:-4] + (ra * rb, ca * cb))


def _off_norm(a: np.ndarray) -> np.ndarray:
    n = a.shape[-1]
    mask = ~np.eye(n, dtype=bool)
    return np.sqrt(np.sum(np.abs(a[..., mask]) ** 2, axis=-1))


def hermitian_error(h: np.ndarray) -> float:
    h = np.asarray(h)
    return float(np.max(np.abs(h - dagger(h)))) if h.size else 0.0


def hermitian_eig(h: np.ndarray, tol: float = JACOBI_TOL,
                  max_sweeps: int = JACOBI_MAX_SWEEPS) -> EigenDecomposition:
    """Cyclic Jacobi eigensolver for complex Hermitian matrices.

    Each (p, q) rotation first removes the phase of ``a[p, q]`` with a diagonal
    unitary and then applies the real symmetric Jacobi rotation, so the pivot
    is annihilated exactly. Sweeps stop once the off-diagonal Frobenius norm
    drops below ``tol * max(1, ||H||_F)``.

    Returns eigenvalues sorted in descending order and the matching unitary
    matrix of eigenvectors (as columns).
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim < 2 or h.shape[-1] != h.shape[-2]:
        raise DimensionMismatch(f"expected square matrix, got shape {h.shape}")
    err = hermitian_error(h)
    if err > TAU_HERM:
        raise NotHermitian(f"max |H - H^dagger| = {err:.3e} exceeds {TAU_HERM:g}")

    n = h.shape[-1]
    batch = h.shape[:-2]
    a = (0.5 * (h + dagger(h))).reshape((-1, n, n)).copy()
    v = np.broadcast_to(np.eye(n, dtype=complex), a.shape).copy()
    scale = np.maximum(1.0, np.linalg.norm(a, axis=(-2, -1)))

    for _ in range(max_sweeps):
        active = _off_norm(a) >= tol * scale
        if not active.any():
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[:, p, q]
                r = np.abs(apq)
                rot = r > 1e-200  # smaller pivots are zeroed without rotating
                if not rot.any():
                    continue
                phase = np.where(rot, apq / np.where(rot, r, 1.0), 1.0)
                app = a[:, p, p].real
                aqq = a[:, q, q].real
                theta = np.where(rot, (aqq - app) / (2.0 * np.where(rot, r, 1.0)), 0.0)
                t = np.where(
                    rot,
                    np.sign(theta + (theta == 0)) / (np.abs(theta) + np.hypot(theta, 1.0)),
                    0.0,
                )
                c = 1.0 / np.sqrt(t**2 + 1.0)
                s = t * c
                # U restricted to (p, q): [[c, s], [-s*conj(phase), c*conj(phase)]]
                u_pp = c
                u_pq = s
                u_qp = -s * np.conj(phase)
                u_qq = c * np.conj(phase)

                col_p = a[:, :, p].copy()
                col_q = a[:, :, q]
                a[:, :, p] = col_p * u_pp[:, None] + col_q * u_qp[:, None]
                a[:, :, q] = col_p * u_pq[:, None] + col_q * u_qq[:, None]
                row_p = a[:, p, :].copy()
                row_q = a[:, q, :]
                a[:, p, :] = np.conj(u_pp)[:, None] * row_p + np.conj(u_qp)[:, None] * row_q
                a[:, q, :] = np.conj(u_pq)[:, None] * row_p + np.conj(u_qq)[:, None] * row_q
                a[:, p, q] = 0.0
                a[:, q, p] = 0.0
                a[:, p, p] = a[:, p, p].real
                a[:, q, q] = a[:, q, q].real

                vp = v[:, :, p].copy()
                vq = v[:, :, q]
                v[:, :, p] = vp * u_pp[:, None] + vq * u_qp[:, None]
                v[:, :, q] = vp * u_pq[:, None] + vq * u_qq[:, None]
    else:
        if (_off_norm(a) >= tol * scale).any():
            raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")

    w = np.real(np.diagonal(a, axis1=-2, axis2=-1))
    order = np.argsort(-w, axis=-1, kind="stable")
    w = np.take_along_axis(w, order, axis=-1)
    v = np.take_along_axis(v, order[:, None, :], axis=-1)
    return EigenDecomposition(w.reshape(batch + (n,)), v.reshape(batch + (n, n)))


def psd_sqrt(m: np.ndarray, tau_neg: float = TAU_NEG, scale: float = 0.0) -> np.ndarray:
    """Principal square root of a Hermitian PSD matrix (or stack).

    Eigenvalues in ``[-tau_neg, 0)`` are treated as round-off and clamped. So are
    positive ones below the numerical-rank cutoff n * eps * max|w| (as in
    ``numpy.linalg.matrix_rank``); their square roots would otherwise inject
    ~sqrt(eps) noise for rank-deficient input. ``scale`` puts a floor under
    max|w| for matrices whose entries are themselves pure round-off.
    """
    w, v = hermitian_eig(m)
    if w.size and w.min() < -tau_neg:
        raise NotPSD(f"eigenvalue {w.min():.3e} below -{tau_neg:g}")
    n = w.shape[-1]
    cutoff = n * np.finfo(float).eps * np.maximum(np.abs(w).max(axis=-1, keepdims=True), scale)
    root = np.sqrt(np.where(w > cutoff, w, 0.0))
    return (v * root[..., None, :]) @ dagger(v)


def partial_trace(rho: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Reduced matrix over the subsystems in ``keep`` (index 0 = leftmost factor)."""
    rho = np.asarray(rho)
    dims = [int(d) for d in dims]
    keep = sorted(set(int(k) for k in keep))
    total = int(np.prod(dims))
    if rho.shape[-2:] != (total, total):
        raise DimensionMismatch(f"dims {dims} imply {total}x{total}, got {rho.shape[-2:]}")
    if not keep or keep[0] < 0 or keep[-1] >= len(dims):
        raise DimensionMismatch(f"invalid keep set {keep} for {len(dims)} subsystems")

    n = len(dims)
    batch = rho.shape[:-2]
    t = rho.reshape(batch + tuple(dims) + tuple(dims))
    nb = len(batch)
    # einsum over the traced-out pairs
    letters = "abcdefghijklmnopqrstuvwxyz"
    bl = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"[:nb]
    row = [letters[i] for i in range(n)]
    col = [letters[i] if i not in keep else letters[n + i] for i in range(n)]
    out = "".join(row[i] for i in keep) + "".join(col[i] for i in keep)
    reduced = np.einsum(f"{bl}{''.join(row)}{''.join(col)}->{bl}{out}", t)
    d = int(np.prod([dims[i] for i in keep]))
    return reduced.reshape(batch + (d, d))
