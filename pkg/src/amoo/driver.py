"""Weighted gradient-descent driver.

Each iteration asks a weight optimizer for objective weights at the current
iterate, forms the weighted gradient, and applies one inner update (plain
gradient descent or Adam).  Per-step records accumulate into a RunTrace.
Runs are strictly sequential and deterministic given the config.
"""

import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import problems
from .core import (
    Array,
    NumericError,
    WeightVector,
    residual as residual_of,
    weighted_gradient,
)
from .hessians import DiagHessianTracker, HutchinsonConfig
from .weighting import (
    MODE_DIAGONAL,
    MODE_EXACT,
    CamooConfig,
    PamooConfig,
    equal_weights,
    pamoo_context,
    pamoo_weights,
    project_floored_simplex,
    solve_bilinear_pu,
    solve_camoo_exact,
)


class ConfigurationError(ValueError):
    """A run configuration is inconsistent or incomplete."""


@dataclass(frozen=True)
class GDConfig:
    step: float

    def __post_init__(self):
        if self.step <= 0:
            raise ConfigurationError("GD step must be positive")


@dataclass(frozen=True)
class AdamConfig:
    step: float
    b1: float = 0.9
    b2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.step <= 0:
            raise ConfigurationError("Adam step must be positive")


@dataclass(frozen=True)
class AdamState:
    x: Array
    m1: Array
    m2: Array
    t: int = 0


def step_gd(x: Array, g: Array, step: float) -> Array:
    """One plain gradient step x - step * g."""
    g = np.asarray(g, dtype=np.float64)
    if not np.all(np.isfinite(g)):
        raise NumericError("non-finite gradient in GD step")
    return np.asarray(x, dtype=np.float64) - step * g


def adam_init(x: Array) -> AdamState:
    x = np.asarray(x, dtype=np.float64)
    return AdamState(x=x, m1=np.zeros_like(x), m2=np.zeros_like(x), t=0)


def step_adam(state: AdamState, g: Array, cfg: AdamConfig, step: float | None = None):
    """One Adam update with bias correction; returns (new_state, new_x)."""
    g = np.asarray(g, dtype=np.float64)
    if not np.all(np.isfinite(g)):
        raise NumericError("non-finite gradient in Adam step")
    lr = cfg.step if step is None else step
    t = state.t + 1
    m1 = cfg.b1 * state.m1 + (1.0 - cfg.b1) * g
    m2 = cfg.b2 * state.m2 + (1.0 - cfg.b2) * g * g
    m1_hat = m1 / (1.0 - cfg.b1**t)
    m2_hat = m2 / (1.0 - cfg.b2**t)
    x = state.x - lr * m1_hat / (np.sqrt(m2_hat) + cfg.eps)
    new_state = AdamState(x=x, m1=m1, m2=m2, t=t)
    return new_state, x


WEIGHTING_EW = "ew"
WEIGHTING_CAMOO = "camoo"
WEIGHTING_PAMOO = "pamoo"
WEIGHTING_FIXED = "fixed"


@dataclass(frozen=True)
class WeightingChoice:
    """Which weight optimizer to run and with what settings."""

    kind: str = WEIGHTING_EW
    camoo: CamooConfig = field(default_factory=CamooConfig)
    pamoo: PamooConfig = field(default_factory=PamooConfig)
    fixed_weights: tuple = ()
    hutchinson: HutchinsonConfig = field(default_factory=HutchinsonConfig)
    force_hutchinson: bool = False

    def __post_init__(self):
        if self.kind not in (
            WEIGHTING_EW,
            WEIGHTING_CAMOO,
            WEIGHTING_PAMOO,
            WEIGHTING_FIXED,
        ):
            raise ConfigurationError(f"unknown weighting kind {self.kind!r}")
        if self.kind == WEIGHTING_FIXED and len(self.fixed_weights) == 0:
            raise ConfigurationError("fixed weighting needs fixed_weights")


@dataclass(frozen=True)
class RunConfig:
    problem: problems.ProblemSpec
    weighting: WeightingChoice
    inner: GDConfig | AdamConfig
    steps: int
    seed: int = 0
    record_every: int = 1
    camoo_lr_scale_by_m: bool = True
    x0: tuple | None = None
    f_star_override: tuple | None = None

    def __post_init__(self):
        if self.steps < 0:
            raise ConfigurationError("steps must be nonnegative")
        if self.record_every < 1:
            raise ConfigurationError("record_every must be positive")


@dataclass(frozen=True)
class IterateRecord:
    step: int
    f: Array
    w: Array
    grad_norm: float
    residual: float | None = None
    msq: float | None = None
    mnorm: float | None = None
    lambda_min_est: float | None = None
    pu_gap: float | None = None


@dataclass
class RunTrace:
    records: list
    config: RunConfig
    wall_time: float = 0.0
    error: str | None = None

    @property
    def m(self) -> int:
        return len(self.records[0].f) if self.records else 0

    def final(self) -> IterateRecord:
        return self.records[-1]

    def residuals(self):
        return [(r.step, r.residual) for r in self.records if r.residual is not None]


def _mixed_seed(*parts: int) -> int:
    return int(np.random.SeedSequence(list(parts)).generate_state(1)[0])


def run(cfg: RunConfig) -> RunTrace:
    """Execute the weighted descent loop and return its trace.

    Records are written at step 0, every ``record_every`` steps, and at the
    final iterate; each record holds the metrics at x_k together with the
    weights computed there.  When the weighting is curvature-adaptive and
    ``camoo_lr_scale_by_m`` is set, the inner step is multiplied by the
    number of objectives (simplex weights sum to 1 where equal weighting
    effectively sums to m).  A NaN or Inf anywhere aborts the run with a
    NumericError whose payload is the trace up to the failure.
    """
    t_start = time.perf_counter()
    problem = problems.build(cfg.problem)
    objs = problem.objectives
    m = objs.m
    wc = cfg.weighting

    x = np.array(cfg.x0, dtype=np.float64) if cfg.x0 is not None else np.array(
        problem.x0
    )
    if x.shape != (objs.dim,):
        raise ConfigurationError(
            f"x0 has shape {x.shape}, problem dimension is {objs.dim}"
        )

    f_star = None
    if wc.kind == WEIGHTING_PAMOO:
        if cfg.f_star_override is not None:
            f_star = np.asarray(cfg.f_star_override, dtype=np.float64)
        elif wc.pamoo.f_star is not None:
            f_star = np.asarray(wc.pamoo.f_star, dtype=np.float64)
        elif problem.optimum.f_star is not None:
            f_star = np.array(problem.optimum.f_star)
        else:
            raise ConfigurationError(
                "PAMOO needs optimal objective values (problem has none; "
                "set f_star_override)"
            )
        if f_star.shape != (m,):
            raise ConfigurationError(f"f_star must have {m} entries")

    tracker = None
    if wc.kind == WEIGHTING_CAMOO and wc.camoo.mode == MODE_DIAGONAL:
        tracker = DiagHessianTracker(
            replace(
                wc.hutchinson,
                rng_seed=_mixed_seed(cfg.seed, wc.hutchinson.rng_seed),
            )
        )

    trace = RunTrace(records=[], config=cfg)
    adam_state = adam_init(x) if isinstance(cfg.inner, AdamConfig) else None
    warm_w: Array | None = None
    warm_q: Array | None = None

    def fail(message: str, step: int) -> NumericError:
        trace.error = f"step {step}: {message}"
        trace.wall_time = time.perf_counter() - t_start
        return NumericError(trace.error, payload=trace)

    for k in range(cfg.steps + 1):
        if not np.all(np.isfinite(x)):
            raise fail("non-finite iterate", k)
        fvals = objs.values(x)
        if not np.all(np.isfinite(fvals)):
            raise fail("non-finite objective value", k)

        lambda_est = None
        gap = None
        if wc.kind == WEIGHTING_EW:
            w = equal_weights(m)
        elif wc.kind == WEIGHTING_FIXED:
            w = WeightVector(np.asarray(wc.fixed_weights, dtype=np.float64))
        elif wc.kind == WEIGHTING_CAMOO and wc.camoo.mode == MODE_EXACT:
            hs = objs.hessians(x)
            result = solve_camoo_exact(
                hs, wc.camoo, warm=warm_w if wc.camoo.warm_start else None
            )
            w = result.weights
            lambda_est = result.value
        elif wc.kind == WEIGHTING_CAMOO:
            diag = tracker.update(objs, x, force_estimate=wc.force_hutchinson)
            warm = None
            if wc.camoo.warm_start and warm_w is not None and warm_q is not None:
                warm = (warm_w, warm_q)
            sol = solve_bilinear_pu(diag, wc.camoo, warm=warm)
            w_arr = sol.w
            if wc.camoo.w_min > 0:
                w_arr = project_floored_simplex(w_arr, wc.camoo.w_min)
            w = WeightVector(
                w_arr,
                "floored-simplex" if wc.camoo.w_min > 0 else "simplex",
                wc.camoo.w_min,
            )
            warm_q = sol.q
            gap = sol.gap
            lambda_est = float(np.min(w_arr @ diag))
        else:  # pamoo
            ctx = pamoo_context(objs, x, f_star)
            w = pamoo_weights(
                ctx, wc.pamoo, warm=warm_w if wc.pamoo.warm_start else None
            )
        warm_w = w.as_array()

        g = weighted_gradient(objs, w, x)
        if not np.all(np.isfinite(g)):
            raise fail("non-finite gradient", k)
        grad_norm = float(np.linalg.norm(g))

        if k % cfg.record_every == 0 or k == cfg.steps:
            res = None
            if problem.optimum.x_star is not None:
                res = residual_of(x, problem.optimum)
            record = IterateRecord(
                step=k,
                f=fvals,
                w=w.as_array(),
                grad_norm=grad_norm,
                residual=res,
                msq=problem.msq(x) if problem.msq is not None else None,
                mnorm=problem.mnorm(x) if problem.mnorm is not None else None,
                lambda_min_est=lambda_est,
                pu_gap=gap,
            )
            trace.records.append(record)

        if k == cfg.steps:
            break

        scale = (
            float(m)
            if wc.kind == WEIGHTING_CAMOO and cfg.camoo_lr_scale_by_m
            else 1.0
        )
        if isinstance(cfg.inner, GDConfig):
            x = step_gd(x, g, cfg.inner.step * scale)
        else:
            adam_state, x = step_adam(
                adam_state, g, cfg.inner, step=cfg.inner.step * scale
            )

    trace.wall_time = time.perf_counter() - t_start
    return trace


# ---------------------------------------------------------------------------
# Presets
# ---------------------------------------------------------------------------


def theory_camoo(meta: problems.ProblemMeta, m: int) -> tuple[WeightingChoice, GDConfig]:
    """Curvature-adaptive settings matching the convergence analysis.

    Step 1/(2 beta), simplex floor mu_G / (8 m beta), no step scaling by m
    (set ``camoo_lr_scale_by_m=False`` on the run config).
    """
    if meta.beta is None or meta.mu_g is None:
        raise ConfigurationError("theory preset needs known beta and mu_G")
    w_min = meta.mu_g / (8.0 * m * meta.beta)
    weighting = WeightingChoice(
        kind=WEIGHTING_CAMOO,
        camoo=CamooConfig(mode=MODE_EXACT, w_min=w_min),
    )
    return weighting, GDConfig(step=1.0 / (2.0 * meta.beta))


def theory_pamoo() -> tuple[WeightingChoice, GDConfig]:
    """Polyak-style settings matching the convergence analysis: step 1,
    unregularized inner problem solved tightly."""
    weighting = WeightingChoice(
        kind=WEIGHTING_PAMOO,
        pamoo=PamooConfig(
            step=3e-3, iterations=4000, clip_floor=0.0, gram_tau=0.0
        ),
    )
    return weighting, GDConfig(step=1.0)


def practical_sgd() -> GDConfig:
    return GDConfig(step=5e-4)


def practical_adam() -> AdamConfig:
    return AdamConfig(step=5e-3)
