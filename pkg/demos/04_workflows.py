#!/usr/bin/env python3
"""End-to-end detection pipelines, including the inconclusive outlier.

The Bell-diagonal workflow covers every detectable state with two phases;
the arbitrary-state walk adapts through all six WBMs and honestly reports
the published mixture that evades the whole witness family.
"""

import numpy as np

import entbandit as eb
from entbandit.states import instance_from_density_matrices
from entbandit.linalg import projector

print("=== two-phase workflow on the five-state benchmark ===")
ref = eb.reference_bds_instance()
res = eb.workflow_bds(ref, delta=0.05, seed=(4, 0))
print(f"flagged {res.flagged_arms} (truth {ref.entangled_arms()}), "
      f"success={res.success}, copies={res.copies}")
for rec in res.phases:
    print(f"  phase under WBM {rec.wbm_id}: flagged {rec.flagged_arms}, copies {rec.copies}")

print("\n=== arbitrary-state walk on a random promise batch ===")
inst = eb.ginibre_promise_instance(5, seed=23)
res = eb.workflow_arbitrary(inst, delta=0.1, seed=(5, 0), order=(3, 1, 4, 2, 6, 5))
print(f"entangled arm {inst.entangled_arms()}; walk used {res.wbms_used} WBM(s), "
      f"flagged {res.flagged_arms}, success={res.success}")

print("\n=== the mixture no witness in the family can see ===")
kets = [
    np.array([0.2687 + 0.0375j, 0.2406 + 0.4090j, 0.0502 + 0.6162j, 0.2413 + 0.5107j]),
    np.array([0.0565 + 0.3355j, 0.0508 + 0.0686j, 0.4885 + 0.5191j, 0.5689 + 0.2125j]),
    np.array([0.1953 + 0.4438j, 0.4958 + 0.4009j, 0.0069 + 0.3495j, 0.0322 + 0.4848j]),
]
weights = [0.2936, 0.0655, 0.6409]
rho = sum(w * projector(v) for w, v in zip(weights, kets))
outlier = instance_from_density_matrices([rho, np.eye(4) / 4])
print("criterion values:", np.round(outlier.criterion_values[0], 4))
print("entangled by PPT:", outlier.truth[0],
      f"(smallest PT eigenvalue {eb.min_ppt_eigenvalue(rho):+.4f})")
res = eb.workflow_arbitrary(outlier, delta=0.2, seed=(6, 0))
print(f"walk outcome: inconclusive={res.inconclusive} after {res.wbms_used} WBMs "
      f"({res.copies} copies spent)")
