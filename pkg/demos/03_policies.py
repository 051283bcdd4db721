#!/usr/bin/env python3
"""Fixed-confidence policies at work: elimination, thresholding, budgets.

Runs Successive Elimination on a three-arm promise batch, the thresholding
policy on the bundled five-state benchmark, and compares observed per-arm
effort with the closed-form budget.
"""

import entbandit as eb
from entbandit.bandit import theoretical_budget_se, warm_start_T

inst3 = eb.make_instance(
    [
        eb.StateSpec("BellDiagonal", {"p": [0.35, 0.30, 0.0, 0.35]}),
        eb.StateSpec("BellDiagonal", {"p": [0.30, 0.40, 0.0, 0.30]}),
        eb.StateSpec("BellDiagonal", {"p": [0.20, 0.60, 0.0, 0.20]}),
    ]
)
params = eb.LilParams(delta=0.05, k=3)
print("=== Successive Elimination, criterion values (0.4, 0.2, -0.2) ===")
rec = eb.successive_elimination(inst3, eb.build_wbm(1), params, seed=(1, 0))
print(f"flagged arm {rec.flagged_arms}, copies {rec.copies}")
for a in rec.per_arm:
    print(f"  arm {a.arm}: shots {a.shots:>7}  S_hat {a.s_hat:+.4f}  {a.status}")
print("closed-form pair budgets:", theoretical_budget_se([0.4, 0.2, 0.2], params))

print("\n=== thresholding policy on the five-state benchmark ===")
ref = eb.reference_bds_instance()
params5 = eb.LilParams(delta=0.05, k=5)
print(f"warm start T = {warm_start_T(params5)} pair samples per arm")
for wbm_id in (1, 2):
    rec = eb.lil_hdoc(ref, eb.build_wbm(wbm_id), params5, seed=(2, wbm_id))
    print(f"WBM {wbm_id}: flagged {rec.flagged_arms}, copies {rec.copies}")
    for a in rec.per_arm:
        print(f"  arm {a.arm}: shots {a.shots:>7}  S_hat {a.s_hat:+.4f}  {a.status}")

print("\neffort concentrates on the smallest gap: the arm with |S| = 0.0695")
print("dominates the WBM-1 run above.")
