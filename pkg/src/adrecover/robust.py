"""Recovery under uncertainty: fixed-angle mismatch and Monte-Carlo robust angle search.

All Monte-Carlo estimates share one sample corpus per ``UncertaintySpec``:
sample ``i`` takes its state from stream ``(seed, i, STREAM_STATE)`` and its
damping probability from ``(seed, i, STREAM_DAMPING)``. Comparing angles on
the same corpus (common random numbers) makes the argmax a deterministic
function of the seed, and growing ``n_samples`` only appends samples.
"""
from __future__ import annotations

import csv
import functools
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .channel import damp_two_closed_form, damp_two_kraus
from .errors import ValidationError
from .linalg import psd_sqrt
from .metrics import fidelity, fidelity_from_sqrt
from .recovery import TAU_SUCC, adaptive_angle, project_recovery, recovered_closed_form
from .recovery import run_recovery_circuit
from .states import STREAM_DAMPING, RngStream, TwoQubitParams, random_density_matrices

DEFAULT_SEED = 20170317
DEFAULT_SAMPLES = 10_000
CHUNK = 2048
TIE_TOL = 1e-12


@dataclass(frozen=True)
class UncertaintySpec:
    p_lower: float = 0.1
    p_upper: float = 0.9
    n_samples: int = DEFAULT_SAMPLES
    master_seed: int = DEFAULT_SEED
    dim: int = 4
    rank: int | None = None  # None -> full rank (Hilbert-Schmidt)

    def __post_init__(self):
        if not 0.0 <= self.p_lower < self.p_upper <= 1.0:
            raise ValidationError(
                f"need 0 <= p_lower < p_upper <= 1, got ({self.p_lower}, {self.p_upper})"
            )
        if self.n_samples < 1:
            raise ValidationError("n_samples must be at least 1")
        if self.dim != 4:
            raise ValidationError("the recovery circuit acts on two-qubit (dim 4) states")


@dataclass(frozen=True)
class ThetaGrid:
    start: float = 0.0
    end: float = 2 * math.pi
    step: float = math.pi / 10

    def __post_init__(self):
        if not self.step > 0:
            raise ValidationError("theta step must be positive")
        if len(self.points()) < 2:
            raise ValidationError("theta grid must contain at least two points")

    def points(self) -> np.ndarray:
        """Grid points start + k*step up to and including ``end`` (within round-off)."""
        n = int(math.floor((self.end - self.start) / self.step + 1e-9))
        return self.start + self.step * np.arange(n + 1)


@dataclass
class FidelityReport:
    thetas: list[float]
    means: list[float]
    stderrs: list[float]
    theta_opt: float
    adaptive_mean: float
    adaptive_stderr: float
    damped_mean: float
    damped_stderr: float
    n_samples: int
    seed: int
    spec: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# seed={self.seed}\n")
        buf.write(f"# spec={json.dumps(self.spec, sort_keys=True)}\n")
        buf.write(f"# theta_opt={self.theta_opt!r}\n")
        buf.write(f"# adaptive_mean={self.adaptive_mean!r} adaptive_stderr={self.adaptive_stderr!r}\n")
        buf.write(f"# damped_mean={self.damped_mean!r} damped_stderr={self.damped_stderr!r}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["theta", "mean", "stderr"])
        for row in zip(self.thetas, self.means, self.stderrs):
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()


class _Corpus(NamedTuple):
    rho: np.ndarray
    p: np.ndarray
    sqrt_rho: np.ndarray
    damped: np.ndarray


def sample_damping(spec: UncertaintySpec, indices) -> np.ndarray:
    width = spec.p_upper - spec.p_lower
    return np.array(
        [spec.p_lower + width * RngStream(spec.master_seed, i, STREAM_DAMPING).uniform()
         for i in indices]
    )


@functools.lru_cache(maxsize=8)
def _corpus(spec: UncertaintySpec) -> _Corpus:
    idx = range(spec.n_samples)
    rho = random_density_matrices(spec.master_seed, idx, spec.dim, spec.rank)
    p = sample_damping(spec, idx)
    corpus = _Corpus(rho, p, psd_sqrt(rho), damp_two_kraus(rho, p))
    for arr in corpus:
        arr.setflags(write=False)
    return corpus


def _recovered_fidelities(corpus: _Corpus, theta) -> np.ndarray:
    """Per-sample recovery fidelity; failed post-selections score 0."""
    n = len(corpus.p)
    theta = np.broadcast_to(np.asarray(theta, dtype=float), (n,))
    out = np.empty(n)
    for lo in range(0, n, CHUNK):
        sl = slice(lo, min(lo + CHUNK, n))
        reduced, prob = project_recovery(corpus.damped[sl], theta[sl])
        ok = prob >= TAU_SUCC
        safe = np.where(ok, prob, 1.0)
        states = reduced / safe[:, None, None]
        states[~ok] = np.eye(4) / 4
        f = fidelity_from_sqrt(corpus.sqrt_rho[sl], states)
        out[sl] = np.where(ok, f, 0.0)
    return out


def _damped_fidelities(corpus: _Corpus) -> np.ndarray:
    return np.asarray(fidelity_from_sqrt(corpus.sqrt_rho, corpus.damped), dtype=float)


def _mean_stderr(values: np.ndarray) -> tuple[float, float]:
    n = len(values)
    mean = float(np.mean(values))
    se = float(np.std(values, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return mean, se


def average_fidelity(theta: float, spec: UncertaintySpec) -> tuple[float, float]:
    """Monte-Carlo mean recovery fidelity (and standard error) at a fixed angle."""
    return _mean_stderr(_recovered_fidelities(_corpus(spec), float(theta)))


def baselines(spec: UncertaintySpec) -> tuple[float, float]:
    """(adaptive-angle mean fidelity, no-recovery mean fidelity) on the corpus drawn for ``spec``."""
    corpus = _corpus(spec)
    fr = _recovered_fidelities(corpus, adaptive_angle(corpus.p))
    return float(np.mean(fr)), float(np.mean(_damped_fidelities(corpus)))


def pick_optimum(thetas: Sequence[float], means: Sequence[float]) -> float:
    """Argmax with ties (within TIE_TOL) resolved toward the smallest angle."""
    means = np.asarray(means)
    best = means.max()
    for theta, m in sorted(zip(thetas, means)):
        if m >= best - TIE_TOL:
            return float(theta)
    raise AssertionError("unreachable")


def optimize_theta(grid: ThetaGrid, spec: UncertaintySpec) -> FidelityReport:
    corpus = _corpus(spec)
    thetas = grid.points()
    means, ses = [], []
    for theta in thetas:
        m, s = _mean_stderr(_recovered_fidelities(corpus, float(theta)))
        means.append(m)
        ses.append(s)
    fr_mean, fr_se = _mean_stderr(_recovered_fidelities(corpus, adaptive_angle(corpus.p)))
    fd_mean, fd_se = _mean_stderr(_damped_fidelities(corpus))
    spec_dict = asdict(spec)
    spec_dict["theta_grid"] = asdict(grid)
    return FidelityReport(
        thetas=[float(t) for t in thetas],
        means=means,
        stderrs=ses,
        theta_opt=pick_optimum(thetas, means),
        adaptive_mean=fr_mean,
        adaptive_stderr=fr_se,
        damped_mean=fd_mean,
        damped_stderr=fd_se,
        n_samples=spec.n_samples,
        seed=spec.master_seed,
        spec=spec_dict,
    )


def ensemble_curve(p_grid: Sequence[float], n_samples: int = DEFAULT_SAMPLES,
                   master_seed: int = DEFAULT_SEED, rank: int | None = None) -> list[dict]:
    """Average recovered (matched angle) and damped fidelity at each fixed p over random states."""
    idx = range(n_samples)
    rho = random_density_matrices(master_seed, idx, 4, rank)
    sqrt_rho = psd_sqrt(rho)
    rows = []
    for p in p_grid:
        damped = damp_two_kraus(rho, np.full(n_samples, float(p)))
        corpus = _Corpus(rho, np.full(n_samples, float(p)), sqrt_rho, damped)
        fr, fr_se = _mean_stderr(_recovered_fidelities(corpus, float(adaptive_angle(p))))
        fd, fd_se = _mean_stderr(_damped_fidelities(corpus))
        rows.append({"p": float(p), "F_d": fd, "F_d_stderr": fd_se,
                     "F_r": fr, "F_r_stderr": fr_se})
    return rows


class MismatchRow(NamedTuple):
    p: float
    f_fixed: float
    f_adaptive: float
    f_damped: float


def _fixed_and_damped(params: TwoQubitParams, theta: float, p: float) -> tuple[float, float]:
    rho = params.matrix()
    damped = damp_two_closed_form(params, p)
    fixed = run_recovery_circuit(damped, theta).state
    return fidelity(rho, fixed), fidelity(rho, damped)


def mismatch_study(params: TwoQubitParams, p_hat: float,
                   p_grid: Sequence[float]) -> list[MismatchRow]:
    """Fidelity of a recovery tuned for ``p_hat`` when the true damping is each grid p."""
    theta = float(adaptive_angle(p_hat))
    rho = params.matrix()
    rows = []
    for p in p_grid:
        p = float(p)
        if not 0.0 <= p < 1.0:
            raise ValidationError(f"grid value {p} outside [0, 1)")
        f_fixed, f_damped = _fixed_and_damped(params, theta, p)
        f_adaptive = fidelity(rho, recovered_closed_form(params, p).state)
        rows.append(MismatchRow(p, f_fixed, f_adaptive, f_damped))
    return rows


def fixed_theta_crossing(params: TwoQubitParams, p_hat: float,
                         tol: float = 1e-6, grid_points: int = 201) -> float | None:
    """Smallest p at which the fixed-angle recovery overtakes doing nothing.

    Scans ``[0, p_hat]`` for the first sign change of F_fixed - F_damped and
    bisects it. None if the fixed-angle curve never rises above damping there.
    """
    theta = float(adaptive_angle(p_hat))

    def gap(p):
        f_fixed, f_damped = _fixed_and_damped(params, theta, p)
        return f_fixed - f_damped

    grid = np.linspace(0.0, p_hat, grid_points)
    prev = float(grid[0])
    prev_gap = gap(prev)
    for p in grid[1:]:
        g = gap(float(p))
        if prev_gap <= 0.0 < g:
            lo, hi = prev, float(p)
            while hi - lo > tol:
                mid = 0.5 * (lo + hi)
                if gap(mid) > 0.0:
                    hi = mid
                else:
                    lo = mid
            return 0.5 * (lo + hi)
        prev, prev_gap = float(p), g
    return None
