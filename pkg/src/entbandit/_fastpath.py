"""Compiled inner loop for the thresholding policy.

Optional acceleration: when numba is importable, the policy's round loop runs
as machine code over pre-drawn per-arm uniform blocks. The arithmetic and the
uniform-consumption order match the pure-Python engine exactly (each arm owns
one PCG64 stream and consumes it sequentially), so both engines produce
identical run records; a cross-check test asserts this.

Without mitigation only: the nested count-mitigation cycle stays on the
Python engine.
"""

from __future__ import annotations

import math

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*a, **k):
        def wrap(f):
            return f

        return wrap


STATUS_ACTIVE = 0
STATUS_SEPARABLE = 1
STATUS_ENTANGLED = 2


@njit(cache=True)
def hdoc_core(
    cum,            # (K, 4) cumulative outcome distributions
    uniforms,       # (K, M) pre-drawn uniforms per arm
    warm_start,     # pair samples per arm before adaptive play
    zeta,
    delta_prime,
    width_scale,
    one_plus_eps,
    sign,           # +1 optimistic index, -1 pessimistic
    plugin,         # count-based estimate instead of the pair mean
    max_copies,
):
    k, m = cum.shape[0], uniforms.shape[1]
    counts = np.zeros((k, 4), dtype=np.int64)
    n_pairs = np.zeros(k, dtype=np.int64)
    s_sum = np.zeros(k, dtype=np.float64)
    used = np.zeros(k, dtype=np.int64)
    status = np.zeros(k, dtype=np.int8)
    flag_order = np.full(k, -1, dtype=np.int64)

    j_table = np.zeros((4, 4), dtype=np.float64)
    j_table[0, 1] = 4.0
    j_table[2, 2] = -1.0
    j_table[2, 3] = 1.0
    j_table[3, 2] = 1.0
    j_table[3, 3] = -1.0

    copies = 0
    t_rounds = 0
    cutoff = False
    exhausted = False
    n_flagged = 0

    # warm start
    for arm in range(k):
        for _ in range(warm_start):
            if copies + 2 > max_copies:
                cutoff = True
                break
            if used[arm] + 2 > m:
                exhausted = True
                break
            u = uniforms[arm, used[arm]]
            y1 = 0
            while y1 < 3 and u >= cum[arm, y1]:
                y1 += 1
            used[arm] += 1
            u = uniforms[arm, used[arm]]
            y2 = 0
            while y2 < 3 and u >= cum[arm, y2]:
                y2 += 1
            used[arm] += 1
            counts[arm, y1] += 1
            counts[arm, y2] += 1
            s_sum[arm] += j_table[y1, y2]
            n_pairs[arm] += 1
            t_rounds += 1
            copies += 2
        if cutoff or exhausted:
            break

    while not cutoff and not exhausted:
        # any active?
        any_active = False
        for arm in range(k):
            if status[arm] == STATUS_ACTIVE:
                any_active = True
                break
        if not any_active:
            break

        log_t = math.log(t_rounds) if t_rounds > 1 else 0.0
        best = -1
        best_val = -np.inf
        for arm in range(k):
            if status[arm] != STATUS_ACTIVE:
                continue
            if plugin:
                n_sh = 2 * n_pairs[arm]
                s_hat = (
                    4.0 * counts[arm, 0] * counts[arm, 1]
                    - float((counts[arm, 2] - counts[arm, 3]) ** 2)
                ) / (n_sh * n_sh)
            else:
                s_hat = s_sum[arm] / n_pairs[arm]
            val = sign * s_hat + math.sqrt(log_t / (2.0 * n_pairs[arm]))
            if val > best_val:
                best = arm
                best_val = val

        if copies + 2 > max_copies:
            cutoff = True
            break
        if used[best] + 2 > m:
            exhausted = True
            break
        u = uniforms[best, used[best]]
        y1 = 0
        while y1 < 3 and u >= cum[best, y1]:
            y1 += 1
        used[best] += 1
        u = uniforms[best, used[best]]
        y2 = 0
        while y2 < 3 and u >= cum[best, y2]:
            y2 += 1
        used[best] += 1
        counts[best, y1] += 1
        counts[best, y2] += 1
        s_sum[best] += j_table[y1, y2]
        n_pairs[best] += 1
        t_rounds += 1
        copies += 2

        t = n_pairs[best]
        inner = math.log(one_plus_eps * t) / delta_prime
        if inner <= 1.0:
            continue
        width = math.sqrt(width_scale / t * math.log(inner))
        if plugin:
            n_sh = 2 * t
            s_hat = (
                4.0 * counts[best, 0] * counts[best, 1]
                - float((counts[best, 2] - counts[best, 3]) ** 2)
            ) / (n_sh * n_sh)
        else:
            s_hat = s_sum[best] / t
        if s_hat - width >= zeta:
            status[best] = STATUS_SEPARABLE
        elif s_hat + width < zeta:
            status[best] = STATUS_ENTANGLED
            flag_order[best] = n_flagged
            n_flagged += 1

    return counts, n_pairs, s_sum, used, status, flag_order, copies, t_rounds, cutoff, exhausted
