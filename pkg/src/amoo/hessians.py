"""Second-order information without forming Hessians.

Hessian-vector products come from central differences of the analytic
gradient; the diagonal is estimated by averaging z * (Hz) over Rademacher
probes z, which is exact in a single sample when H is diagonal.  Every
probe draws from its own counter-split RNG stream, so results do not depend
on evaluation order.
"""

from dataclasses import dataclass

import numpy as np

from .core import Array, ObjectiveOracle, ObjectiveSet, as_vector


@dataclass(frozen=True)
class HutchinsonConfig:
    """Probe count, finite-difference step, and seed for diagonal estimation.

    ``ema_decay`` enables exponential smoothing of successive estimates when
    a tracker is used (off by default; 0.99 is the conventional choice).
    """

    num_samples: int = 10
    fd_step: float = 1e-4
    rng_seed: int = 0
    ema_decay: float | None = None

    def __post_init__(self):
        if self.num_samples < 1:
            raise ValueError("num_samples must be at least 1")
        if self.fd_step <= 0:
            raise ValueError("fd_step must be positive")
        if self.ema_decay is not None and not (0.0 < self.ema_decay < 1.0):
            raise ValueError("ema_decay must lie in (0, 1)")


@dataclass(frozen=True)
class DiagHessianEstimate:
    values: Array
    samples_used: int

    def __post_init__(self):
        if not np.all(np.isfinite(self.values)):
            raise ValueError("diagonal estimate has non-finite entries")


def hvp_fd(oracle: ObjectiveOracle, x, v, step: float = 1e-4) -> Array:
    """Hessian-vector product by central differences of the gradient.

    Uses h = step * (1 + ||x||) along the unit direction of v, then rescales
    by ||v||.  Exact up to O(h^2) truncation; for quadratics the truncation
    vanishes and the result is exact to rounding.
    """
    x = as_vector(x, oracle.dim)
    v = as_vector(v, oracle.dim, name="v")
    if step <= 0:
        raise ValueError("step must be positive")
    norm_v = np.linalg.norm(v)
    if norm_v == 0.0:
        raise ValueError("direction v must be nonzero")
    unit = v / norm_v
    h = step * (1.0 + np.linalg.norm(x))
    gp = oracle.gradient_at(x + h * unit)
    gm = oracle.gradient_at(x - h * unit)
    return (gp - gm) / (2.0 * h) * norm_v


def _rademacher(seq: np.random.SeedSequence, n: int) -> Array:
    rng = np.random.default_rng(seq)
    return rng.integers(0, 2, size=n).astype(np.float64) * 2.0 - 1.0


def hutchinson_diag(
    oracle: ObjectiveOracle, x, cfg: HutchinsonConfig
) -> DiagHessianEstimate:
    """Estimate diag(H) at x as the average of z * (Hz) over Rademacher z.

    Uses the analytic Hessian when the oracle carries one, a
    finite-difference Hessian-vector product otherwise.  Deterministic given
    ``cfg.rng_seed``; the expectation over z equals the true diagonal.
    """
    x = as_vector(x, oracle.dim)
    n = oracle.dim
    H = oracle.hessian_at(x) if oracle.has_hessian else None
    streams = np.random.SeedSequence(cfg.rng_seed).spawn(cfg.num_samples)
    acc = np.zeros(n)
    for seq in streams:
        z = _rademacher(seq, n)
        hz = H @ z if H is not None else hvp_fd(oracle, x, z, cfg.fd_step)
        acc += z * hz
    return DiagHessianEstimate(values=acc / cfg.num_samples, samples_used=cfg.num_samples)


def diag_hessian_matrix(
    objectives: ObjectiveSet,
    x,
    cfg: HutchinsonConfig,
    force_estimate: bool = False,
) -> Array:
    """Stack per-objective Hessian diagonals into an (m, n) matrix.

    Row i is the analytic diagonal when objective i provides one (unless
    ``force_estimate``), and the Hutchinson estimate otherwise.  Objective i
    estimates from the i-th spawned substream of ``cfg.rng_seed``.
    """
    x = as_vector(x, objectives.dim)
    rows = np.empty((objectives.m, objectives.dim))
    seeds = np.random.SeedSequence(cfg.rng_seed).spawn(objectives.m)
    for i, oracle in enumerate(objectives.objectives):
        if oracle.has_diag_hessian and not force_estimate:
            rows[i] = oracle.diag_hessian_at(x)
        else:
            sub = HutchinsonConfig(
                num_samples=cfg.num_samples,
                fd_step=cfg.fd_step,
                rng_seed=seeds[i].generate_state(1)[0],
                ema_decay=cfg.ema_decay,
            )
            rows[i] = hutchinson_diag(oracle, x, sub).values
    return rows


class DiagHessianTracker:
    """Optional exponential smoothing of successive diagonal estimates.

    With ``cfg.ema_decay`` unset the tracker is a pass-through (each call
    returns the fresh estimate).  Seeds advance deterministically per call.
    """

    def __init__(self, cfg: HutchinsonConfig):
        self.cfg = cfg
        self._smoothed: Array | None = None
        self._calls = 0

    def update(self, objectives: ObjectiveSet, x, force_estimate: bool = False) -> Array:
        call_cfg = HutchinsonConfig(
            num_samples=self.cfg.num_samples,
            fd_step=self.cfg.fd_step,
            rng_seed=self.cfg.rng_seed + self._calls,
            ema_decay=self.cfg.ema_decay,
        )
        self._calls += 1
        fresh = diag_hessian_matrix(objectives, x, call_cfg, force_estimate)
        if self.cfg.ema_decay is None:
            return fresh
        if self._smoothed is None:
            self._smoothed = fresh
        else:
            d = self.cfg.ema_decay
            self._smoothed = d * self._smoothed + (1.0 - d) * fresh
        return np.array(self._smoothed)
