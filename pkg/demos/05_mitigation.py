#!/usr/bin/env python3
"""Readout noise shifts the criterion goalposts; count mitigation restores them.

Two-percent local bit flips move every outcome distribution toward uniform,
dragging criterion values toward +0.25. Inverting the confusion matrix on
the running counts every F shots recovers the noiseless goalposts at the
price of integer-rounding jitter when F is very small.
"""

import numpy as np

import entbandit as eb
from entbandit.states import bds_probs_from_criterion_values

noise = eb.NoiseModel.symmetric_flip(0.02)
p = bds_probs_from_criterion_values(-0.25, 0.55)
inst = eb.make_instance(
    [
        eb.StateSpec("BellDiagonal", {"p": [float(x) for x in p]}),
        eb.StateSpec("BellDiagonal", {"p": [0.25, 0.25, 0.25, 0.25]}),
    ]
)

print("=== noiseless vs corrupted criterion values (WBM 1) ===")
for arm in range(inst.k):
    f = eb.outcome_probs(inst.rhos[arm], eb.build_wbm(1))
    f_noisy = noise.joint() @ f
    s = eb.criterion_from_probs(f)
    s_noisy = eb.criterion_from_probs(f_noisy)
    print(f"  arm {arm}: S = {s:+.4f} -> corrupted {s_noisy:+.4f} (shift {s_noisy - s:+.4f})")

print("\n=== copies to finish the workflow at delta = 0.2 ===")
base = []
for trial in range(10):
    res = eb.workflow_bds(inst, 0.2, seed=(9, 0, trial), noise=noise, estimator="plugin")
    base.append(res.copies)
print(f"unmitigated: mean {np.mean(base):,.0f} copies over 10 runs")
for cadence in (200, 1000, 5000, 50_000):
    runs = []
    ok = 0
    for trial in range(10):
        res = eb.workflow_bds(
            inst, 0.2, seed=(9, cadence, trial), noise=noise,
            estimator="plugin", mitigation_cadence=cadence,
        )
        runs.append(res.copies)
        ok += res.success
    gain = 100 * (np.mean(base) - np.mean(runs)) / np.mean(base)
    print(f"mitigate every {cadence:>6} shots: mean {np.mean(runs):>9,.0f} copies "
          f"({gain:+5.1f}%), truth preserved {ok}/10")
print("\ncadences beyond the total pull count never fire, so the gain fades to zero.")
