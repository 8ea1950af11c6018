"""Why weighting helps: two objectives that are weak alone, strong together.

The "specification" pair consists of two 2-D quadratics that share the
minimizer at the origin but are only delta-strongly-convex individually.
Averaging them produces unit curvature in every direction, so plain
gradient descent on the average converges at a fast linear rate while
descent on either objective alone crawls along its flat axis.
"""

import numpy as np

from amoo import GDConfig, RunConfig, WeightingChoice, run
from amoo.problems import ProblemSpec

DELTA = 0.01
spec = ProblemSpec(kind="specification", delta=DELTA)

ew = run(
    RunConfig(
        problem=spec,
        weighting=WeightingChoice(kind="ew"),
        inner=GDConfig(step=0.25),
        steps=100,
        x0=(1.0, 1.0),
    )
)

alone = run(
    RunConfig(
        problem=spec,
        weighting=WeightingChoice(kind="fixed", fixed_weights=(1.0, 0.0)),
        inner=GDConfig(step=0.25),
        steps=100,
        x0=(1.0, 1.0),
    )
)

print(f"specification pair with delta = {DELTA}")
print(f"{'step':>6} {'equal weights':>16} {'objective 1 alone':>18}")
for k in (0, 10, 25, 50, 100):
    r_ew = next(r.residual for r in ew.records if r.step == k)
    r_alone = next(r.residual for r in alone.records if r.step == k)
    print(f"{k:>6} {r_ew:>16.3e} {r_alone:>18.3e}")

print()
print("After 100 steps the averaged objective is at machine precision while")
print("the single objective still has most of its second coordinate left:")
print(f"  equal weights    : {ew.final().residual:.3e}")
print(f"  objective 1 alone: {alone.final().residual:.3e}")
print(f"  per-step contraction, equal weights: {0.75}")
print(f"  per-step contraction, alone (x2 axis): {1 - 0.25 * 2 * DELTA}")
