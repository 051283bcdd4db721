"""End-to-end detection pipelines, the correctness harness and the sweeps.

Two pipelines: the Bell-diagonal workflow runs the thresholding policy under
WBM 1, then re-runs it under WBM 2 on whatever was not flagged (two phases
cover every detectable Bell-diagonal state); the arbitrary-state workflow
walks a permutation of all six WBMs until some phase flags exactly one arm,
or reports inconclusive after exhausting them.

Sweeps aggregate many seeded runs into CSV-ready rows. Every cell owns a
seed-tree path, so sweeps are reproducible and embarrassingly parallel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bandit import BudgetExceededError, LilParams, RunRecord, lil_hdoc
from .sampler import NoiseModel
from .states import ProblemInstance, ginibre_promise_instance
from .tomography import required_shots
from .witness import build_wbm

__all__ = [
    "WorkflowResult",
    "workflow_bds",
    "workflow_arbitrary",
    "wilson_interval",
    "delta_correctness_harness",
    "sweep_fig6",
    "sweep_fig7_fig8",
    "sweep_fig9",
]

ARBITRARY_ZETA = -1e-3


def _pmap(fn, tasks, workers: int):
    """Order-preserving map, optionally across processes.

    Every task carries its own seed path, so results are independent of
    scheduling; outputs are gathered in task order.
    """
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (8 * workers))))


def _bds_cell(task):
    """One seeded Bell-diagonal workflow run; returns (copies, flags, success)."""
    instance, delta, seed, kwargs = task
    try:
        res = workflow_bds(instance, delta, seed, **kwargs)
        return res.copies, tuple(res.flagged_arms), res.success
    except BudgetExceededError as err:
        return err.record.copies, tuple(err.record.flagged_arms), False


def _arbitrary_cell(task):
    instance, delta, seed, order, kwargs = task
    res = workflow_arbitrary(instance, delta, seed, order=order, raise_on_budget=False, **kwargs)
    return res.success, res.inconclusive, res.wbms_used, res.copies


@dataclass(frozen=True)
class WorkflowResult:
    """Outcome of a multi-phase detection pipeline."""

    workflow: str
    flagged_arms: tuple[int, ...]
    success: bool
    inconclusive: bool
    pulls: int
    copies: int
    wbms_used: int
    phases: tuple[RunRecord, ...]
    seed: tuple[int, ...]
    meta: dict

    def to_json_dict(self) -> dict:
        return {
            "workflow": self.workflow,
            "flagged_arms": list(self.flagged_arms),
            "success": self.success,
            "inconclusive": self.inconclusive,
            "pulls": self.pulls,
            "copies": self.copies,
            "wbms_used": self.wbms_used,
            "phases": [p.to_json_dict() for p in self.phases],
            "seed": list(self.seed),
            "meta": dict(self.meta),
        }


def _seed_path(seed) -> tuple[int, ...]:
    if isinstance(seed, (int, np.integer)):
        return (int(seed),)
    return tuple(int(s) for s in seed)


def workflow_bds(
    instance: ProblemInstance,
    delta: float,
    seed,
    first_wbm: int = 1,
    epsilon: float = 0.5,
    sigma: float = 2.5,
    zeta: float = 0.0,
    split_delta: bool = False,
    warm_start: int | None = None,
    max_copies_per_phase: int = 10_000_000,
    noise: NoiseModel | None = None,
    mitigation_cadence: int | None = None,
    estimator: str | None = None,
) -> WorkflowResult:
    """Two-phase detection for Bell-diagonal batches.

    Phase 1 runs the thresholding policy under ``first_wbm`` (1 or 2) on all
    arms; if any arms remain unflagged, phase 2 runs under the other WBM on
    just those. ``split_delta`` spends delta/2 per phase instead of the full
    delta (union-bound mode). Budget errors propagate.
    """
    if first_wbm not in (1, 2):
        raise ValueError(f"first_wbm must be 1 or 2, got {first_wbm!r}")
    if estimator is None:
        estimator = "plugin" if mitigation_cadence is not None else "pairs"
    path = _seed_path(seed)
    delta_phase = delta / 2.0 if split_delta else delta
    order = (first_wbm, 3 - first_wbm)

    phases: list[RunRecord] = []
    rec1 = lil_hdoc(
        instance,
        build_wbm(order[0]),
        LilParams(delta=delta_phase, k=instance.k, epsilon=epsilon, sigma=sigma),
        path + (1,),
        warm_start=warm_start,
        zeta=zeta,
        max_copies=max_copies_per_phase,
        noise=noise,
        mitigation_cadence=mitigation_cadence,
        estimator=estimator,
    )
    phases.append(rec1)
    flagged = list(rec1.flagged_arms)

    if len(flagged) < instance.k:
        rest = [a for a in range(instance.k) if a not in flagged]
        rec2 = lil_hdoc(
            instance,
            build_wbm(order[1]),
            LilParams(delta=delta_phase, k=len(rest), epsilon=epsilon, sigma=sigma),
            path + (2,),
            warm_start=warm_start,
            zeta=zeta,
            max_copies=max_copies_per_phase,
            noise=noise,
            mitigation_cadence=mitigation_cadence,
            estimator=estimator,
            arm_subset=rest,
        )
        phases.append(rec2)
        flagged.extend(rec2.flagged_arms)

    flagged_t = tuple(sorted(flagged))
    return WorkflowResult(
        workflow="bds",
        flagged_arms=flagged_t,
        success=set(flagged_t) == set(instance.entangled_arms()),
        inconclusive=False,
        pulls=sum(p.pulls for p in phases),
        copies=sum(p.copies for p in phases),
        wbms_used=len(phases),
        phases=tuple(phases),
        seed=path,
        meta={"first_wbm": first_wbm, "split_delta": split_delta, "delta": delta},
    )


def workflow_arbitrary(
    instance: ProblemInstance,
    delta: float,
    seed,
    order=(1, 2, 3, 4, 5, 6),
    epsilon: float = 0.5,
    sigma: float = 2.5,
    zeta: float = ARBITRARY_ZETA,
    warm_start: int | None = None,
    max_copies_per_phase: int = 10_000_000,
    noise: NoiseModel | None = None,
    mitigation_cadence: int | None = None,
    estimator: str | None = None,
    raise_on_budget: bool = True,
) -> WorkflowResult:
    """Walk WBMs in ``order`` until one phase flags exactly one arm.

    Intended for promise batches with a single entangled state; a flagged
    arm is (with confidence 1 - delta) truly sub-threshold, so a singleton
    ends the walk. If no phase produces a singleton the result is marked
    inconclusive. With ``raise_on_budget=False`` a phase that exhausts its
    copy budget contributes its partial flags instead of aborting the walk.
    """
    order = tuple(int(x) for x in order)
    if sorted(order) != [1, 2, 3, 4, 5, 6]:
        raise ValueError(f"order must be a permutation of 1..6, got {order!r}")
    if estimator is None:
        estimator = "plugin" if mitigation_cadence is not None else "pairs"
    path = _seed_path(seed)

    truth = instance.entangled_arms()
    phases: list[RunRecord] = []
    flagged: tuple[int, ...] = ()
    hit = False
    for phase_idx, wbm_id in enumerate(order, start=1):
        try:
            rec = lil_hdoc(
                instance,
                build_wbm(wbm_id),
                LilParams(delta=delta, k=instance.k, epsilon=epsilon, sigma=sigma),
                path + (phase_idx,),
                warm_start=warm_start,
                zeta=zeta,
                max_copies=max_copies_per_phase,
                noise=noise,
                mitigation_cadence=mitigation_cadence,
                estimator=estimator,
            )
        except BudgetExceededError as err:
            if raise_on_budget:
                raise
            rec = err.record
        phases.append(rec)
        if len(rec.flagged_arms) == 1:
            flagged = rec.flagged_arms
            hit = True
            break

    return WorkflowResult(
        workflow="arbitrary",
        flagged_arms=flagged,
        success=hit and set(flagged) == set(truth),
        inconclusive=not hit,
        pulls=sum(p.pulls for p in phases),
        copies=sum(p.copies for p in phases),
        wbms_used=len(phases),
        phases=tuple(phases),
        seed=path,
        meta={"order": list(order), "delta": delta, "zeta": zeta},
    )


def wilson_interval(errors: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """95% (by default) Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    p = errors / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2.0 * trials)) / denom
    half = z * math.sqrt(p * (1.0 - p) / trials + z2 / (4.0 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def delta_correctness_harness(
    instance: ProblemInstance,
    policy: str,
    deltas,
    trials: int,
    master_seed: int,
    wbm_id: int = 1,
    epsilon: float = 0.5,
    sigma: float = 2.5,
    zeta: float = 0.0,
    noise: NoiseModel | None = None,
    mitigation_cadence: int | None = None,
    max_copies: int = 10_000_000,
) -> list[dict]:
    """Empirical error rates of a policy across a delta grid.

    ``policy`` is one of ``se``, ``lilhdoc``, ``workflow_bds``,
    ``workflow_arbitrary``. For the single-WBM policies the reference answer
    is the set of arms whose exact criterion value under that WBM falls below
    ``zeta``; for the workflows it is the PPT truth. A trial that exhausts
    its copy budget counts as an error. Each row carries the 95% Wilson
    interval of the error rate and passes when its lower end does not exceed
    the target delta.
    """
    if trials < 100:
        raise ValueError(f"the harness needs at least 100 trials, got {trials}")
    if policy not in ("se", "lilhdoc", "workflow_bds", "workflow_arbitrary"):
        raise ValueError(f"unknown policy {policy!r}")

    from .bandit import successive_elimination  # local to avoid cycle confusion

    wbm = build_wbm(wbm_id)
    if policy in ("se", "lilhdoc"):
        reference = set(instance.detectable_under(wbm_id, zeta=zeta))
    else:
        reference = set(instance.entangled_arms())

    rows = []
    for d_idx, delta in enumerate(deltas):
        errors = 0
        for trial in range(trials):
            seed = (master_seed, d_idx, trial)
            try:
                if policy == "se":
                    rec = successive_elimination(
                        instance,
                        wbm,
                        LilParams(delta=delta, k=instance.k, epsilon=epsilon, sigma=sigma),
                        seed,
                        zeta=zeta,
                        max_copies=max_copies,
                        noise=noise,
                        mitigation_cadence=mitigation_cadence,
                        estimator="plugin" if mitigation_cadence else "pairs",
                    )
                    flagged = set(rec.flagged_arms)
                elif policy == "lilhdoc":
                    rec = lil_hdoc(
                        instance,
                        wbm,
                        LilParams(delta=delta, k=instance.k, epsilon=epsilon, sigma=sigma),
                        seed,
                        zeta=zeta,
                        max_copies=max_copies,
                        noise=noise,
                        mitigation_cadence=mitigation_cadence,
                        estimator="plugin" if mitigation_cadence else "pairs",
                    )
                    flagged = set(rec.flagged_arms)
                elif policy == "workflow_bds":
                    res = workflow_bds(
                        instance, delta, seed, zeta=zeta, epsilon=epsilon, sigma=sigma,
                        max_copies_per_phase=max_copies, noise=noise,
                        mitigation_cadence=mitigation_cadence,
                    )
                    flagged = set(res.flagged_arms)
                else:
                    res = workflow_arbitrary(
                        instance, delta, seed, epsilon=epsilon, sigma=sigma,
                        max_copies_per_phase=max_copies, noise=noise,
                        mitigation_cadence=mitigation_cadence,
                    )
                    flagged = set(res.flagged_arms)
            except BudgetExceededError:
                errors += 1
                continue
            if flagged != reference:
                errors += 1
        lo, hi = wilson_interval(errors, trials)
        rows.append(
            {
                "delta": float(delta),
                "trials": trials,
                "errors": errors,
                "error_rate": errors / trials,
                "wilson_lo": lo,
                "wilson_hi": hi,
                "pass": lo <= delta,
            }
        )
    return rows


def sweep_fig6(
    instance: ProblemInstance,
    deltas,
    trials: int,
    master_seed: int,
    variants=None,
    baseline_epsilon: float | None = None,
    epsilon: float = 0.5,
    sigma: float = 2.5,
    max_copies_per_phase: int = 10_000_000,
    workers: int = 1,
) -> list[dict]:
    """Mean copy complexity of the Bell-diagonal workflow across deltas.

    ``variants`` is a list of (tag, noise, mitigation_cadence); the default
    is a single noiseless variant. With ``baseline_epsilon`` set, a
    deterministic tomography-baseline row (K * per-state copies) is appended
    per delta. Rows: delta, tag, mean_copies, std_copies, trials.
    """
    if variants is None:
        variants = [("noiseless", None, None)]
    rows = []
    for d_idx, delta in enumerate(deltas):
        for v_idx, (tag, noise, cadence) in enumerate(variants):
            kwargs = dict(
                epsilon=epsilon, sigma=sigma, noise=noise, mitigation_cadence=cadence,
                max_copies_per_phase=max_copies_per_phase,
            )
            tasks = [
                (instance, delta, (master_seed, v_idx, d_idx, trial), kwargs)
                for trial in range(trials)
            ]
            copies = [c for c, _, _ in _pmap(_bds_cell, tasks, workers)]
            arr = np.asarray(copies, dtype=float)
            rows.append(
                {
                    "delta": float(delta),
                    "tag": tag,
                    "mean_copies": float(arr.mean()),
                    "std_copies": float(arr.std(ddof=1)) if len(arr) > 1 else 0.0,
                    "trials": trials,
                }
            )
        if baseline_epsilon is not None:
            _, n = required_shots(baseline_epsilon, delta)
            rows.append(
                {
                    "delta": float(delta),
                    "tag": f"tomography_eps_{baseline_epsilon:g}",
                    "mean_copies": float(instance.k * n),
                    "std_copies": 0.0,
                    "trials": 0,
                }
            )
    return rows


def sweep_fig7_fig8(
    n_instances: int,
    k: int,
    deltas,
    master_seed: int,
    epsilon: float = 0.5,
    sigma: float = 2.5,
    zeta: float = ARBITRARY_ZETA,
    max_copies_per_phase: int = 10_000_000,
    workers: int = 1,
) -> tuple[list[dict], list[dict], list[dict]]:
    """Detection ratio and WBM-usage histogram over random promise batches.

    Generates ``n_instances`` full-rank batches with exactly one entangled
    state, runs the arbitrary-state workflow per (instance, delta) with a
    random per-instance WBM order, and aggregates the fraction of correct
    singleton detections (fig7 rows) plus the cumulative histogram of how
    many WBMs the terminating runs consumed (fig8 rows). Runs whose phases
    exhaust the per-phase budget keep their partial flags.

    The same per-instance sampling streams are reused across the delta grid
    (common random numbers), so ratio differences between deltas reflect the
    confidence level rather than fresh sampling noise.
    """
    from .sampler import substream

    instances = []
    orders = []
    for i in range(n_instances):
        instances.append(ginibre_promise_instance(k, seed=(master_seed, 0x7F, i)))
        perm = substream(master_seed, 0x0D, i).permutation(6) + 1
        orders.append(tuple(int(x) for x in perm))

    kwargs = dict(epsilon=epsilon, sigma=sigma, zeta=zeta, max_copies_per_phase=max_copies_per_phase)
    fig7, fig8, detail = [], [], []
    for delta in deltas:
        tasks = [
            (inst, delta, (master_seed, 0xA1, i), orders[i], kwargs)
            for i, inst in enumerate(instances)
        ]
        outcomes = _pmap(_arbitrary_cell, tasks, workers)
        successes = 0
        used_counts = []
        for i, (success, inconclusive, wbms_used, copies) in enumerate(outcomes):
            successes += success
            if not inconclusive:
                used_counts.append(wbms_used)
            detail.append(
                {
                    "delta": float(delta),
                    "instance": i,
                    "success": success,
                    "inconclusive": inconclusive,
                    "wbms_used": wbms_used,
                    "copies": copies,
                }
            )
        fig7.append(
            {
                "delta": float(delta),
                "detection_ratio": successes / n_instances,
                "n_instances": n_instances,
            }
        )
        for w in range(1, 7):
            fig8.append(
                {
                    "delta": float(delta),
                    "wbms_used": w,
                    "cumulative_count": int(sum(1 for u in used_counts if u <= w)),
                }
            )
    return fig7, fig8, detail


def sweep_fig9(
    instance: ProblemInstance,
    deltas,
    f_grid,
    noise: NoiseModel,
    trials: int,
    master_seed: int,
    baseline_trials: int | None = None,
    epsilon: float = 0.5,
    sigma: float = 2.5,
    max_copies_per_phase: int = 10_000_000,
    workers: int = 1,
) -> list[dict]:
    """Copy-complexity reduction from nested count mitigation.

    For every delta an unmitigated baseline (same noise, count-based
    estimator) is averaged over ``baseline_trials`` runs; each (delta, F)
    cell then averages ``trials`` mitigated runs at cadence F. Rows carry
    the percent reduction in mean copies and a correctness flag: the cell's
    flag sets must match the PPT truth at rate consistent with delta (Wilson
    lower bound of the error rate at or below delta).
    """
    if baseline_trials is None:
        baseline_trials = max(trials, 20)
    rows = []
    truth = set(instance.entangled_arms())
    base_kwargs = dict(
        epsilon=epsilon, sigma=sigma, noise=noise, estimator="plugin",
        max_copies_per_phase=max_copies_per_phase,
    )
    for d_idx, delta in enumerate(deltas):
        base_tasks = [
            (instance, delta, (master_seed, d_idx, 0, trial), base_kwargs)
            for trial in range(baseline_trials)
        ]
        base_mean = float(np.mean([c for c, _, _ in _pmap(_bds_cell, base_tasks, workers)]))
        cell_tasks = []
        for f_idx, cadence in enumerate(f_grid, start=1):
            kwargs = dict(base_kwargs, mitigation_cadence=int(cadence))
            cell_tasks.extend(
                (instance, delta, (master_seed, d_idx, f_idx, trial), kwargs)
                for trial in range(trials)
            )
        outcomes = _pmap(_bds_cell, cell_tasks, workers)
        for f_idx, cadence in enumerate(f_grid):
            cell = outcomes[f_idx * trials : (f_idx + 1) * trials]
            copies = [c for c, _, _ in cell]
            errors = sum(set(flags) != truth for _, flags, _ in cell)
            lo, _ = wilson_interval(errors, trials)
            rows.append(
                {
                    "delta": float(delta),
                    "F": int(cadence),
                    "pct_reduction": 100.0 * (base_mean - float(np.mean(copies))) / base_mean,
                    "correct": lo <= delta,
                }
            )
    return rows
