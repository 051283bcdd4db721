"""Closed-form self-check suite behind the ``verify`` command.

Each check compares an analytic identity against direct numerical
computation and reports its maximum observed deviation. The suite is the
fast smoke test that the measurement bases, state constructors and count
bookkeeping agree with their closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .linalg import partial_transpose
from .sampler import counts_from_parity_sums, counts_to_parity_expectations, probs_from_parity_expectations, substream
from .states import amplitude_damp, bell_diagonal, depolarized_bell, ppt_entangled
from .witness import all_wbms, build_wbm, exact_criterion

__all__ = ["CheckResult", "run_all_checks", "damped_pt_eigenvalues_phi", "damped_pt_eigenvalues_psi"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    max_dev: float
    tol: float
    detail: str = ""


# WBM that conclusively detects each depolarized Bell family
DETECTING_WBM = {"phi_plus": 2, "psi_plus": 1, "psi_minus": 1, "phi_minus": 2}


def check_depolarized_closed_form() -> CheckResult:
    """S(w) = (w-1)^2/4 - w^2 under the detecting WBM, for all four families."""
    ws = np.linspace(-1.0 / 3.0, 1.0, 41)
    dev = 0.0
    for bell, wbm_id in DETECTING_WBM.items():
        wbm = build_wbm(wbm_id)
        for w in ws:
            s = exact_criterion(depolarized_bell(bell, float(w)), wbm)
            dev = max(dev, abs(s - ((w - 1.0) ** 2 / 4.0 - w * w)))
    return CheckResult("depolarized-bell closed form", dev <= 1e-12, dev, 1e-12)


def check_povm_closure(perturb: float = 0.0) -> CheckResult:
    """Projector sets close to the identity and are idempotent rank-1.

    ``perturb`` adds a deliberate defect to one projector (negative control).
    """
    dev = 0.0
    for wbm in all_wbms():
        projs = [p.copy() for p in wbm.projectors]
        if perturb:
            projs[0] = projs[0] + perturb * np.eye(4)
        dev = max(dev, float(np.max(np.abs(sum(projs) - np.eye(4)))))
        for p in projs:
            dev = max(dev, float(np.max(np.abs(p @ p - p))))
            dev = max(dev, abs(float(np.trace(p).real) - 1.0))
    return CheckResult("POVM closure and rank-1 idempotency", dev <= 1e-12, dev, 1e-12)


def check_bds_detectability(step: float = 0.05) -> CheckResult:
    """Sign of min(S under WBM 1, S under WBM 2) vs the PPT oracle on a weight grid."""
    wbm1, wbm2 = build_wbm(1), build_wbm(2)
    n = int(round(1.0 / step))
    bad = 0
    total = 0
    for i, j, k in product(range(n + 1), repeat=3):
        if i + j + k > n:
            continue
        p = np.array([i, j, k, n - i - j - k], dtype=float) / n
        rho = bell_diagonal(p)
        s_min = min(exact_criterion(rho, wbm1), exact_criterion(rho, wbm2))
        total += 1
        bad += (s_min < -1e-10) != ppt_entangled(rho)
    return CheckResult(
        "two-WBM detectability matches PPT on the weight simplex",
        bad == 0,
        float(bad),
        0.0,
        detail=f"{total} grid points",
    )


def damped_pt_eigenvalues_phi(w: float, r: float) -> np.ndarray:
    """Closed-form partial-transpose spectrum of a damped phi-type state.

    The fourth expression is the trace-consistent correction
    (1-r)(1-3w+(1+w)r)/4; the widely quoted variant
    (-r^2(w-1)+wr+(1-3w))/4 fails the trace identity for every r > 0.
    """
    return np.sort(
        np.array(
            [
                (w + 1.0) * (1.0 - r * r) / 4.0,
                (w + 1.0) * (1.0 - r) ** 2 / 4.0,
                (w * (r - 1.0) ** 2 + (r + 1.0) ** 2) / 4.0,
                (1.0 - r) * (1.0 - 3.0 * w + (1.0 + w) * r) / 4.0,
            ]
        )
    )


def damped_pt_eigenvalues_psi(w: float, r: float) -> np.ndarray:
    """Closed-form partial-transpose spectrum of a damped psi-type state."""
    root = 2.0 * math.sqrt(w * w * (1.0 - r) ** 2 + r * r)
    lam12 = (1.0 - r) * (1.0 + r + w - w * r) / 4.0
    return np.sort(
        np.array(
            [
                lam12,
                lam12,
                (r * r + 1.0 - w * (1.0 - r) ** 2 + root) / 4.0,
                (r * r + 1.0 - w * (1.0 - r) ** 2 - root) / 4.0,
            ]
        )
    )


def check_damped_eigenvalues(grid: int = 20) -> CheckResult:
    """Closed-form damped-state spectra vs direct eigensolves on a (w, r) grid."""
    ws = np.linspace(0.0, 1.0, grid)
    rs = np.linspace(0.0, 0.95, grid)
    dev = 0.0
    for w in ws:
        for r in rs:
            for bell, formula in (("phi_plus", damped_pt_eigenvalues_phi), ("psi_minus", damped_pt_eigenvalues_psi)):
                rho = amplitude_damp(depolarized_bell(bell, float(w)), float(r))
                eigs = np.linalg.eigvalsh(partial_transpose(rho))
                dev = max(dev, float(np.max(np.abs(eigs - formula(float(w), float(r))))))
    return CheckResult("damped-state eigenvalue formulas", dev <= 1e-9, dev, 1e-9)


def check_parity_round_trip(samples: int = 200, seed: int = 7) -> CheckResult:
    """counts -> parity sums -> counts is exact; the float map is a bijection."""
    rng = substream(seed, 0x9E)
    dev = 0.0
    exact = True
    for _ in range(samples):
        counts = [int(x) for x in rng.integers(0, 1000, size=4)]
        n = sum(counts)
        if n == 0:
            continue
        iz, zi, zz = counts_to_parity_expectations(counts)
        exact &= counts_from_parity_sums(n, iz, zi, zz) == counts
        f = probs_from_parity_expectations(iz / n, zi / n, zz / n)
        dev = max(dev, float(np.max(np.abs(f - np.asarray(counts) / n))))
    return CheckResult("count/parity-expectation round trip", exact and dev <= 1e-15, dev, 1e-15)


def check_criterion_factor_regression() -> CheckResult:
    """The quadratic criterion factors as (1-p1-p4)^2 - (p1-p4)^2 under WBM 2.

    Counterexample weights (0.4, 0.3, 0.3, 0): the variant closed form with
    a factor 4 on the difference term yields -0.28 and would flag this
    separable state; the direct criterion gives +0.20 and agrees with PPT.
    """
    p = np.array([0.4, 0.3, 0.3, 0.0])
    rho = bell_diagonal(p)
    direct = exact_criterion(rho, build_wbm(2))
    exact = (1.0 - p[0] - p[3]) ** 2 - (p[0] - p[3]) ** 2
    variant = (1.0 - p[0] - p[3]) ** 2 - 4.0 * (p[0] - p[3]) ** 2
    dev = abs(direct - exact)
    ok = dev <= 1e-12 and variant < 0 < direct and not ppt_entangled(rho)
    return CheckResult(
        "criterion factor regression on weights (0.4, 0.3, 0.3, 0)",
        ok,
        dev,
        1e-12,
        detail=f"direct={direct:+.6f}, factor-4 variant={variant:+.6f} (would misflag)",
    )


def check_dominant_weight_detection() -> CheckResult:
    """Each dominant-weight pattern is detected by its designated WBM."""
    wbm_of_dominant = {0: 2, 1: 1, 2: 1, 3: 2}
    bad = 0
    for dom, wbm_id in wbm_of_dominant.items():
        for excess in (0.55, 0.7, 0.9):
            p = np.full(4, (1.0 - excess) / 3.0)
            p[dom] = excess
            s = exact_criterion(bell_diagonal(p), build_wbm(wbm_id))
            bad += not s < 0
    # depolarized family w > 1/3 detected, w <= 1/3 not
    for bell, wbm_id in DETECTING_WBM.items():
        wbm = build_wbm(wbm_id)
        for w in (0.34, 0.5, 0.9):
            bad += not exact_criterion(depolarized_bell(bell, w), wbm) < 0
        for w in (-0.3, 0.0, 1.0 / 3.0):
            bad += exact_criterion(depolarized_bell(bell, w), wbm) < -1e-10
    return CheckResult("dominant-weight and depolarized detectability", bad == 0, float(bad), 0.0)


def run_all_checks() -> list[CheckResult]:
    return [
        check_depolarized_closed_form(),
        check_povm_closure(),
        check_dominant_weight_detection(),
        check_bds_detectability(),
        check_damped_eigenvalues(),
        check_parity_round_trip(),
        check_criterion_factor_regression(),
    ]
