"""Curvature-adaptive weighting in action: selection and sign-dependent flips.

Two stories.  On the "selection" family, m-1 objectives are weakly curved
and one is well conditioned; maximizing the smallest eigenvalue of the
weighted Hessian over the simplex puts (almost) all mass on the strong
objective, where uniform weights would dilute it by 1/m.  On the 1-D
local-curvature pair exp(x)-x vs exp(-x)+x the better-curved objective
depends on the sign of the iterate, and the weights flip as the iterate
crosses the optimum.
"""

import numpy as np

from amoo import GDConfig, RunConfig, WeightingChoice, run
from amoo.linalg import min_eigenpair, weighted_hessian
from amoo.problems import ProblemSpec, build
from amoo.weighting import CamooConfig, solve_camoo_exact

# --- selection: put the weight where the curvature is -----------------------

spec = ProblemSpec(kind="selection", delta=0.1, m=3, n=2)
problem = build(spec)
mats = problem.objectives.hessians(np.zeros(2))

uniform = np.full(3, 1 / 3)
lam_uniform, _ = min_eigenpair(weighted_hessian(mats, uniform))
result = solve_camoo_exact(mats, CamooConfig())
print("selection example, m = 3, delta = 0.1")
print(f"  uniform weights  -> smallest weighted curvature {lam_uniform:.3f}")
print(
    f"  adaptive weights {np.round(result.weights.as_array(), 3)} "
    f"-> curvature {result.value:.3f}"
)
print()

# --- local curvature: weights follow the sign of the iterate ----------------

trace = run(
    RunConfig(
        problem=ProblemSpec(kind="local_curvature", n=1),
        weighting=WeightingChoice(kind="camoo"),
        inner=GDConfig(step=0.25),
        steps=8,
        x0=(2.0,),
    )
)
print("local-curvature pair from x0 = 2 (step scaled by m):")
print(f"{'step':>5} {'|x|':>10} {'w1':>6} {'w2':>6}   favored objective")
for rec in trace.records:
    side = "exp(+x) - x" if rec.w[0] > rec.w[1] else "exp(-x) + x"
    print(
        f"{rec.step:>5} {rec.residual:>10.4f} {rec.w[0]:>6.2f} {rec.w[1]:>6.2f}"
        f"   {side}"
    )
print()
print("The first update overshoots through the optimum; the weights flip to")
print("the objective that is better curved on the other side.")
