"""Two-qubit density matrices: validation, parametrization, sampling, JSON I/O."""
from __future__ import annotations

import json
from dataclasses import astuple, dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch, NotHermitian, NotPSD, NotUnitTrace, ValidationError
from .linalg import TAU_HERM, TAU_NEG, hermitian_eig

TAU_TRACE = 1e-10

# purpose tags for disjoint random substreams
STREAM_STATE = 0
STREAM_DAMPING = 1


def _member(index) -> str:
    """' (member 3)' for a position in a stack; empty for a single matrix."""
    index = tuple(int(k) for k in index)
    if not index:
        return ""
    return f" (member {index[0] if len(index) == 1 else list(index)})"


def validate(m, *, name: str = "state") -> np.ndarray:
    """Check that ``m`` is a density matrix and return it as a complex array.

    Accepts a stack ``(..., d, d)``; every member is checked. Raises
    NotHermitian, NotUnitTrace or NotPSD naming the violated invariant, the
    offending entry or member, and the magnitude.
    """
    m = np.array(m, dtype=complex)
    if m.ndim < 2 or m.shape[-1] != m.shape[-2]:
        raise DimensionMismatch(f"{name}: expected a square matrix, got shape {m.shape}")
    d = m.shape[-1]
    if d < 1 or d & (d - 1):
        raise DimensionMismatch(f"{name}: dimension {d} is not a power of two")
    if not np.all(np.isfinite(m)):
        raise ValidationError(f"{name}: non-finite entries")

    diff = np.abs(m - np.conj(np.swapaxes(m, -1, -2)))
    idx = np.unravel_index(np.argmax(diff), diff.shape)
    if diff[idx] > TAU_HERM:
        i, j = idx[-2:]
        raise NotHermitian(
            f"{name}{_member(idx[:-2])}: not Hermitian, |m[{i},{j}] - conj(m[{j},{i}])| = {diff[idx]:.3e}"
        )
    tr = np.trace(m, axis1=-2, axis2=-1)
    dev = np.abs(tr - 1.0)
    if np.any(dev > TAU_TRACE):
        k = np.unravel_index(np.argmax(dev), dev.shape)
        raise NotUnitTrace(
            f"{name}{_member(k)}: trace {tr[k].real:.12g} differs from 1 by {dev[k]:.3e}")
    w = hermitian_eig(m).eigenvalues
    lowest = w[..., -1]
    k = np.unravel_index(np.argmin(lowest), lowest.shape)
    if lowest[k] < -TAU_NEG:
        raise NotPSD(f"{name}{_member(k)}: not positive semidefinite, "
                     f"smallest eigenvalue {lowest[k]:.3e}")
    return m


@dataclass(frozen=True)
class TwoQubitParams:
    """Entries of a two-qubit density matrix in the standard layout

        [[a,  e,  f,  g],
         [e*, b,  h,  i],
         [f*, h*, c,  j],
         [g*, i*, j*, d]]
    """

    a: float
    b: float
    c: float
    d: float
    e: complex = 0j
    f: complex = 0j
    g: complex = 0j
    h: complex = 0j
    i: complex = 0j
    j: complex = 0j

    def __post_init__(self):
        pops = (self.a, self.b, self.c, self.d)
        if min(pops) < -TAU_NEG:
            raise NotPSD(f"negative population {min(pops):.3e}")
        if abs(sum(pops) - 1.0) > TAU_TRACE:
            raise NotUnitTrace(f"populations sum to {sum(pops):.12g}, expected 1")

    def matrix(self) -> np.ndarray:
        a, b, c, d, e, f, g, h, i, j = astuple(self)
        cj = np.conj
        return np.array(
            [
                [a, e, f, g],
                [cj(e), b, h, i],
                [cj(f), cj(h), c, j],
                [cj(g), cj(i), cj(j), d],
            ],
            dtype=complex,
        )


def from_params(params: TwoQubitParams) -> np.ndarray:
    return validate(params.matrix())


def to_params(rho) -> TwoQubitParams:
    rho = validate(rho)
    if rho.shape != (4, 4):
        raise DimensionMismatch(f"two-qubit state must be 4x4, got {rho.shape}")
    return _unpack(rho)


def to_params_batch(stack) -> list[TwoQubitParams]:
    """Like ``to_params`` for a (k, 4, 4) stack, validated in one vectorized pass."""
    stack = validate(stack)
    if stack.ndim != 3 or stack.shape[1:] != (4, 4):
        raise DimensionMismatch(f"expected a stack of 4x4 states, got {stack.shape}")
    return [_unpack(rho) for rho in stack]


def _unpack(rho) -> TwoQubitParams:
    return TwoQubitParams(
        a=rho[0, 0].real, b=rho[1, 1].real, c=rho[2, 2].real, d=rho[3, 3].real,
        e=complex(rho[0, 1]), f=complex(rho[0, 2]), g=complex(rho[0, 3]),
        h=complex(rho[1, 2]), i=complex(rho[1, 3]), j=complex(rho[2, 3]),
    )


# reference states used throughout the figures
RHO1_PARAMS = TwoQubitParams(a=0.4, b=0.1, c=0.3, d=0.2, g=0.25)
RHO2_PARAMS = TwoQubitParams(a=0.6, b=0.12, c=0.11, d=0.17, g=0.25)
RHO1 = RHO1_PARAMS.matrix()
RHO2 = RHO2_PARAMS.matrix()
NAMED_STATES = {"rho1": RHO1_PARAMS, "rho2": RHO2_PARAMS}


class RngStream:
    """Reproducible random substream keyed by (master_seed, stream_index, purpose).

    Uses the counter-based Philox bit generator; the key is derived with
    ``SeedSequence`` so streams for different indices or purposes never
    overlap and any sample index can be regenerated in isolation.
    """

    def __init__(self, master_seed: int, stream_index: int, purpose: int = STREAM_STATE):
        self.master_seed = int(master_seed)
        self.stream_index = int(stream_index)
        self.purpose = int(purpose)
        seq = np.random.SeedSequence(
            entropy=self.master_seed & 0xFFFFFFFFFFFFFFFF,
            spawn_key=(self.purpose, self.stream_index),
        )
        self._gen = np.random.Generator(np.random.Philox(seq))

    def uniform(self, size=None):
        """Uniform draws on (0, 1]."""
        return 1.0 - self._gen.random(size)

    def complex_normal(self, shape) -> np.ndarray:
        """Standard complex Gaussians (E|z|^2 = 1) via Box-Muller."""
        u1 = self.uniform(shape)
        u2 = self.uniform(shape)
        r = np.sqrt(-np.log(u1))  # sqrt(-2 ln u) / sqrt(2)
        return r * np.exp(2j * np.pi * u2)


def _ginibre_state(rng: RngStream, dim: int, rank: int | None) -> np.ndarray:
    rank = dim if rank is None else rank
    if not 1 <= rank <= dim:
        raise ValidationError(f"rank must lie in [1, {dim}], got {rank}")
    g = rng.complex_normal((dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_density_matrix(rng: RngStream, dim: int = 4, rank: int | None = None) -> np.ndarray:
    """Sample rho = G G^dagger / Tr(G G^dagger) with G a dim x rank Ginibre matrix.

    rank = dim (the default) gives the Hilbert-Schmidt measure.
    """
    return validate(_ginibre_state(rng, dim, rank), name="random state")


def random_density_matrices(master_seed: int, indices, dim: int = 4,
                            rank: int | None = None) -> np.ndarray:
    """Stack of random states; member ``k`` comes from stream ``indices[k]``."""
    stack = np.stack(
        [_ginibre_state(RngStream(master_seed, i, STREAM_STATE), dim, rank) for i in indices]
    )
    return validate(stack, name="random states")


def state_to_json(rho) -> dict:
    rho = np.asarray(rho, dtype=complex)
    return {
        "dim": int(rho.shape[0]),
        "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in rho],
    }


def state_from_json(obj: dict) -> np.ndarray:
    try:
        dim = int(obj["dim"])
        rows = obj["matrix"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"state JSON needs 'dim' and 'matrix': {exc}") from None
    if len(rows) != dim:
        raise DimensionMismatch(f"'matrix' has {len(rows)} rows, dim is {dim}")
    m = np.zeros((dim, dim), dtype=complex)
    for r, row in enumerate(rows):
        if len(row) != dim:
            raise DimensionMismatch(f"row {r} has {len(row)} entries, dim is {dim}")
        for c, entry in enumerate(row):
            try:
                re, im = entry
                m[r, c] = complex(float(re), float(im))
            except (TypeError, ValueError):
                raise ValidationError(
                    f"entry [{r},{c}] must be a [re, im] pair, got {entry!r}"
                ) from None
    return validate(m)


def load_state(path) -> np.ndarray:
    with open(Path(path), encoding="utf-8") as fh:
        return state_from_json(json.load(fh))


def save_state(rho, path) -> None:
    with open(Path(path), "w", encoding="utf-8") as fh:
        json.dump(state_to_json(rho), fh, indent=2)
        fh.write("\n")
