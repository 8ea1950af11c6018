"""Numerical verification of the convergence guarantees at desk scale.

The residual recurrences behind the convergence proofs are simulated at
equality and compared against their closed-form two-phase bounds; run
traces are checked against the theorem rate envelopes; empirical
contraction factors are fitted from trace tails; and the continuity of the
best weighted curvature under diagonal Hessian approximation is stress
tested on random positive-definite instances.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import optimize as sciopt

from .core import Array, ObjectiveOracle, as_vector
from .linalg import min_eigenpair, spectral_norm, weighted_hessian

CAMOO = "CAMOO"
PAMOO = "PAMOO"


# ---------------------------------------------------------------------------
# Residual recurrences
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RecurrenceParams:
    """Coefficients of the residual recurrence r_{k+1}^2 <= r_k^2 - a1 r_k^2/(1 + a2 r_k) [+ a3 + a4 r_k]."""

    alpha1: float
    alpha2: float
    alpha3: float = 0.0
    alpha4: float = 0.0
    r0: float = 1.0
    horizon: int = 100

    def __post_init__(self):
        if not 0.0 <= self.alpha1 < 2.0:
            raise ValueError(f"alpha1 must lie in [0, 2), got {self.alpha1}")
        for name in ("alpha2", "alpha3", "alpha4", "r0"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be nonnegative")
        if self.horizon < 1:
            raise ValueError("horizon must be positive")


def max_admissible_noise(alpha1: float, alpha2: float) -> tuple[float, float]:
    """Largest (alpha3, alpha4) the perturbed recurrence bound admits.

    For alpha2 > 0: alpha3 <= alpha1^2/(256 alpha2^2), alpha4 <= alpha1/(4 alpha2).
    At alpha2 = 0 the additive bound term 2 alpha4/(alpha1 alpha2) forces
    alpha4 = 0 and alpha3 is conventionally capped as if alpha2 were 1.
    """
    if alpha2 > 0:
        return alpha1**2 / (256.0 * alpha2**2), alpha1 / (4.0 * alpha2)
    return alpha1**2 / 256.0, 0.0


def recurrence_simulate_and_bound(p: RecurrenceParams, variant: str = "exact"):
    """Simulate the recurrence at equality and evaluate its closed-form bound.

    Returns (r, b, holds): the simulated sequence, the bound sequence, and
    whether r_k <= b_k + 1e-12 everywhere.  The bound has a linear phase up
    to k0 (vacuous whenever r0 <= 1/alpha2) and a geometric phase with
    per-step squared factor (1 - alpha1/2), plus, in the perturbed variant,
    a plateau sqrt(2 alpha3/alpha1 + 2 alpha4/(alpha1 alpha2)).
    """
    if variant not in ("exact", "eps"):
        raise ValueError(f"variant must be 'exact' or 'eps', got {variant!r}")
    a1, a2, a3, a4 = p.alpha1, p.alpha2, p.alpha3, p.alpha4
    if variant == "exact":
        a3 = a4 = 0.0
        k0 = math.ceil(4.0 * (p.r0 * a2 - 1.0) / a1) if a1 > 0 else 0
        slope = a1 / (4.0 * a2) if a2 > 0 else 0.0
    else:
        if a1 <= 0.0:
            raise ValueError("eps variant requires alpha1 > 0")
        a3_max, a4_max = max_admissible_noise(a1, a2)
        if a2 > 0 and a3 > a3_max * (1 + 1e-12):
            raise ValueError(
                f"alpha3 = {a3} exceeds the admissible alpha1^2/(256 alpha2^2) = {a3_max}"
            )
        if a2 > 0 and a4 > a4_max * (1 + 1e-12):
            raise ValueError(
                f"alpha4 = {a4} exceeds the admissible alpha1/(4 alpha2) = {a4_max}"
            )
        if a2 == 0 and a4 > 0:
            raise ValueError("alpha4 must be 0 when alpha2 = 0")
        k0 = math.ceil(16.0 * (p.r0 * a2 - 1.0) / a1)
        slope = a1 / (16.0 * a2) if a2 > 0 else 0.0
    k0 = max(k0, 0)

    r = np.empty(p.horizon + 1)
    r[0] = p.r0
    for k in range(p.horizon):
        rk = r[k]
        r2 = rk * rk * (1.0 - a1 / (1.0 + a2 * rk)) + a3 + a4 * rk
        r[k + 1] = math.sqrt(max(r2, 0.0))

    plateau = 0.0
    if variant == "eps":
        plateau = math.sqrt(
            2.0 * a3 / a1 + (2.0 * a4 / (a1 * a2) if a2 > 0 else 0.0)
        )
    factor = math.sqrt(max(1.0 - a1 / 2.0, 0.0))
    ks = np.arange(p.horizon + 1)
    b = np.where(
        ks < k0,
        p.r0 - slope * ks,
        r[min(k0, p.horizon)] * factor ** np.maximum(ks - k0, 0) + plateau,
    )
    holds = bool(np.all(r <= b + 1e-12))
    return r, b, holds


# ---------------------------------------------------------------------------
# Theorem rate envelopes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TheoremParams:
    """Constants entering a convergence-rate envelope for one run."""

    beta: float
    mu: float
    m_self: float
    m: int
    r0: float
    which: str = CAMOO

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError("beta must be positive")
        if not 0 < self.mu <= self.beta:
            raise ValueError(
                f"mu must satisfy 0 < mu <= beta, got mu={self.mu}, beta={self.beta}"
            )
        if self.m_self < 0:
            raise ValueError("m_self must be nonnegative")
        if self.m < 1:
            raise ValueError("m must be at least 1")
        if self.which not in (CAMOO, PAMOO):
            raise ValueError(f"which must be CAMOO or PAMOO, got {self.which!r}")


def theorem_envelope(tp: TheoremParams, steps: Array, r_anchor: float, k0: int):
    """Evaluate the two-phase bound at the given step indices."""
    c_lin = 16.0 if tp.which == CAMOO else 64.0
    c_geo = 8.0 if tp.which == CAMOO else 32.0
    factor = math.sqrt(max(1.0 - 3.0 * tp.mu / (c_geo * tp.beta), 0.0))
    if tp.m_self > 0:
        slope = tp.mu**1.5 / (c_lin * tp.beta**2 * math.sqrt(tp.m) * tp.m_self)
    else:
        slope = math.inf
    out = np.empty(len(steps), dtype=np.float64)
    for i, k in enumerate(steps):
        if k < k0:
            out[i] = tp.r0 - slope * k
        else:
            out[i] = r_anchor * factor ** (k - k0)
    return out


def theorem_k0(tp: TheoremParams) -> int:
    if tp.m_self == 0.0:
        return 0
    c = 16.0 if tp.which == CAMOO else 64.0
    k0 = math.ceil(
        c
        * tp.beta
        * (tp.r0 * 3.0 * math.sqrt(tp.m) * tp.beta * tp.m_self - math.sqrt(tp.mu))
        / (3.0 * tp.mu**1.5)
    )
    return max(k0, 0)


def theorem_bound_check(trace, tp: TheoremParams, slack: float = 1e-12) -> bool:
    """Check a run's residuals against the convergence-rate envelope.

    The geometric phase (per-step squared factor 1 - 3 mu / (8 beta) or
    1 - 3 mu / (32 beta)) anchors at the first recorded step at or past k0;
    with ``m_self`` zero the pre-phase is vacuous and k0 = 0.  The bound's
    exponent counts half steps, i.e. factor^((k - k0)/2) on the residual.
    """
    pairs = trace.residuals() if hasattr(trace, "residuals") else list(trace)
    if not pairs:
        raise ValueError("trace carries no residuals")
    steps = np.array([s for s, _ in pairs], dtype=np.int64)
    res = np.array([r for _, r in pairs], dtype=np.float64)
    k0 = theorem_k0(tp)
    anchored = steps >= k0
    if not np.any(anchored):
        raise ValueError(f"no recorded step reaches k0 = {k0}")
    anchor_idx = int(np.argmax(anchored))
    anchor_step = int(steps[anchor_idx])
    r_anchor = float(res[anchor_idx])

    c_geo = 8.0 if tp.which == CAMOO else 32.0
    factor = math.sqrt(max(1.0 - 3.0 * tp.mu / (c_geo * tp.beta), 0.0))
    tol = slack * (1.0 + tp.r0)
    for k, r in zip(steps, res):
        if k < k0:
            bound = theorem_envelope(tp, np.array([k]), r_anchor, k0)[0]
        else:
            bound = r_anchor * factor ** (k - anchor_step)
        if r > bound + tol:
            return False
    return True


# ---------------------------------------------------------------------------
# Empirical rate estimation
# ---------------------------------------------------------------------------


def fit_rate(trace, tail_fraction: float = 0.5) -> float:
    """Per-step contraction factor fitted on the trace tail.

    Least-squares slope of log residual against step index over the last
    ``tail_fraction`` of recorded residuals, exponentiated.  Residuals at or
    below zero are clipped to 1e-300 (with a warning) so underflowed tails
    do not poison the fit.
    """
    if not 0 < tail_fraction <= 1:
        raise ValueError("tail_fraction must lie in (0, 1]")
    pairs = trace.residuals() if hasattr(trace, "residuals") else list(trace)
    count = math.ceil(len(pairs) * tail_fraction)
    tail = pairs[-count:]
    if len(tail) < 10:
        raise ValueError(f"need at least 10 tail records, have {len(tail)}")
    steps = np.array([s for s, _ in tail], dtype=np.float64)
    res = np.array([r for _, r in tail], dtype=np.float64)
    if np.any(res <= 0.0):
        warnings.warn("nonpositive residuals in tail; clipping at 1e-300")
        res = np.clip(res, 1e-300, None)
    slope = np.polyfit(steps, np.log(res), 1)[0]
    return float(np.exp(slope))


# ---------------------------------------------------------------------------
# Curvature inequality checks
# ---------------------------------------------------------------------------


def _omega_lower(t: float) -> float:
    return t * t / (2.0 * (1.0 + t))


def self_concordance_check(
    oracle: ObjectiveOracle, x, y, m_self: float, slack: float = 1e-10
) -> bool:
    """Check f(y) >= f(x) + <grad f(x), y - x> + curvature term.

    The curvature term is (1/M^2) * omega(M t) with t the Hessian-metric
    distance ||y - x|| at x and omega(s) = s^2 / (2 (1 + s)); at M = 0 it
    degenerates to the quadratic t^2 / 2.
    """
    if m_self < 0:
        raise ValueError("m_self must be nonnegative")
    x = as_vector(x, oracle.dim)
    y = as_vector(y, oracle.dim)
    d = y - x
    H = oracle.hessian_at(x)
    t = math.sqrt(max(float(d @ H @ d), 0.0))
    if m_self == 0.0:
        curv = 0.5 * t * t
    else:
        curv = _omega_lower(m_self * t) / (m_self * m_self)
    lhs = oracle.value_at(y)
    rhs = oracle.value_at(x) + float(oracle.gradient_at(x) @ d) + curv
    return lhs >= rhs - slack * (1.0 + abs(lhs))


def _simplex_grid(m: int, step: float) -> Array:
    """All weight vectors on the simplex grid with the given resolution."""
    k = int(round(1.0 / step))
    if m == 1:
        return np.array([[1.0]])
    if m == 2:
        a = np.linspace(0.0, 1.0, k + 1)
        return np.stack([a, 1.0 - a], axis=1)
    if m == 3:
        pts = []
        for i in range(k + 1):
            for j in range(k + 1 - i):
                pts.append((i / k, j / k, (k - i - j) / k))
        return np.array(pts)
    raise ValueError("simplex grid supported for m <= 3")


def grid_best_weighted_curvature(hessians, step: float = 1e-2):
    """Brute-force max over the simplex grid of lambda_min(sum w_i H_i).

    Returns (best value, best weights).  Intended as an oracle for m <= 3.
    """
    mats = np.stack([np.asarray(H, dtype=np.float64) for H in hessians])
    grid = _simplex_grid(len(mats), step)
    weighted = np.einsum("gi,ijk->gjk", grid, mats)
    lam = np.linalg.eigvalsh(weighted)[:, 0]
    best = int(np.argmax(lam))
    return float(lam[best]), grid[best]


def best_diag_weights_lp(diag_matrix) -> Array:
    """Exact maximizer of min_j (w'A)_j over the simplex, by linear program."""
    A = np.asarray(diag_matrix, dtype=np.float64)
    m, n = A.shape
    # Variables (w, t): maximize t subject to A'w >= t, w on the simplex.
    c = np.zeros(m + 1)
    c[-1] = -1.0
    a_ub = np.hstack([-A.T, np.ones((n, 1))])
    b_ub = np.zeros(n)
    a_eq = np.hstack([np.ones((1, m)), np.zeros((1, 1))])
    b_eq = np.array([1.0])
    bounds = [(0.0, None)] * m + [(None, None)]
    res = sciopt.linprog(
        c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq, bounds=bounds,
        method="highs",
    )
    if not res.success:
        raise RuntimeError(f"diagonal-weights LP failed: {res.message}")
    return res.x[:m]


def weyl_degradation_suite(seed: int = 0, trials: int = 100) -> dict:
    """Stress-test curvature degradation under diagonal Hessian approximation.

    Each trial draws random positive-definite matrices, computes the grid
    optimum of the weighted curvature over full matrices, then re-optimizes
    using only the diagonals and asserts that the full-matrix curvature of
    those weights drops by at most twice the largest off-diagonal spectral
    norm.  Returns a JSON-serializable report.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    rng = np.random.default_rng(seed)
    failures = []
    for trial in range(trials):
        m = int(rng.integers(1, 4))
        n = int(rng.integers(2, 7))
        mats = []
        for _ in range(m):
            B = rng.normal(size=(n, n))
            H = B @ B.T / n + np.diag(rng.uniform(0.1, 1.0, size=n))
            mats.append(H)
        mu_grid, _ = grid_best_weighted_curvature(mats, step=1e-2)
        deviation = max(spectral_norm(H - np.diag(np.diagonal(H))) for H in mats)
        diag_rows = np.stack([np.diagonal(H) for H in mats])
        w_hat = best_diag_weights_lp(diag_rows)
        achieved, _ = min_eigenpair(weighted_hessian(mats, w_hat))
        ok = achieved >= mu_grid - 2.0 * deviation - 1e-9
        if not ok:
            failures.append(
                {
                    "trial": trial,
                    "achieved": achieved,
                    "grid_optimum": mu_grid,
                    "deviation": deviation,
                }
            )
    return {
        "trials": trials,
        "passes": trials - len(failures),
        "failures": failures,
        "seed": seed,
    }
