"""Fixed-confidence bandit policies driven by witness measurements.

Each bandit round spends one pair of measurement shots on an arm and turns
the two outcomes (y, y') into the unbiased pair estimate

    J = 4*1[y=1]*1[y'=2] - (1[y=3] - 1[y=4]) * (1[y'=3] - 1[y'=4]),

whose mean is the quadratic criterion value S of that arm. Anytime-valid
confidence widths follow the finite law-of-iterated-logarithm bound

    U(t, d) = (1 + sqrt(eps)) * sqrt(2 sigma^2 (1+eps)/t * log(log((1+eps) t)/d)),

with the per-arm error budget d = delta / (c_eps * K) and
c_eps = (2+eps)/eps * (1/log(1+eps))^(1+eps).

Copy accounting: a "pull" is a single measurement shot and consumes exactly
one state copy, so record pull totals and copy totals coincide; one bandit
round costs two of them.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from . import _fastpath
from .sampler import ArmSampler, NoiseModel, outcome_cumulative, substream
from .witness import WBM, outcome_probs

__all__ = [
    "J_VALUES",
    "pair_estimate",
    "LilParams",
    "lil_width",
    "warm_start_T",
    "theoretical_budget_se",
    "EstimatorState",
    "RunRecord",
    "BudgetExceededError",
    "successive_elimination",
    "lil_hdoc",
]

# J lookup, indexed [y-1][y2-1]
J_VALUES = (
    (0.0, 4.0, 0.0, 0.0),
    (0.0, 0.0, 0.0, 0.0),
    (0.0, 0.0, -1.0, 1.0),
    (0.0, 0.0, 1.0, -1.0),
)


def pair_estimate(y: int, y2: int) -> float:
    """Single-pair unbiased estimate of S from two i.i.d. outcomes in 1..4."""
    if not (1 <= y <= 4 and 1 <= y2 <= 4):
        raise ValueError(f"outcomes must be in 1..4, got ({y}, {y2})")
    return J_VALUES[y - 1][y2 - 1]


@dataclass
class LilParams:
    """Tuning of the confidence machinery for a K-arm run.

    ``sigma`` defaults to 2.5, the subgaussian scale implied by the pair
    estimate's range [-1, 4]; ``epsilon`` trades tightness of the width
    against the constant c_eps.
    """

    delta: float
    k: int
    epsilon: float = 0.5
    sigma: float = 2.5

    c_eps: float = field(init=False)
    delta_prime: float = field(init=False)
    width_scale: float = field(init=False)
    one_plus_eps: float = field(init=False)

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must be in (0, 1), got {self.delta!r}")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must be in (0, 1), got {self.epsilon!r}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k!r}")
        eps = self.epsilon
        self.c_eps = (2.0 + eps) / eps * (1.0 / math.log1p(eps)) ** (1.0 + eps)
        self.delta_prime = self.delta / (self.c_eps * self.k)
        self.width_scale = (1.0 + math.sqrt(eps)) ** 2 * 2.0 * self.sigma**2 * (1.0 + eps)
        self.one_plus_eps = 1.0 + eps
        limit = math.log1p(eps) / math.e
        if not self.delta_prime < limit:
            warnings.warn(
                f"per-arm budget {self.delta_prime:.4g} exceeds the validity bound "
                f"log(1+eps)/e = {limit:.4g}; the width is used heuristically",
                stacklevel=2,
            )

    def with_k(self, k: int) -> "LilParams":
        return replace(self, k=k) if k != self.k else self


def lil_width(t: int, delta_prime: float, params: LilParams) -> float:
    """Anytime confidence width after t pair samples at per-arm budget delta_prime.

    Returns ``inf`` while log((1+eps) t) <= delta_prime, where the bound is
    undefined; callers make no elimination decision there.
    """
    if t < 1:
        return math.inf
    inner = math.log(params.one_plus_eps * t) / delta_prime
    if inner <= 1.0:
        return math.inf
    return math.sqrt(params.width_scale / t * math.log(inner))


def warm_start_T(params: LilParams) -> int:
    """Initial pair samples per arm before adaptive allocation starts.

    Smallest integer T with
    T >= 1/4 * log(K+1) * log(max(1/delta, 2)) * c_eps^(3/2), at least 1.
    """
    val = 0.25 * math.log(params.k + 1.0) * math.log(max(1.0 / params.delta, 2.0)) * params.c_eps**1.5
    return max(1, math.ceil(val - 1e-12))


def theoretical_budget_se(gaps, params: LilParams) -> list[int]:
    """Per-arm pair-sample budgets sufficient for elimination at the given gaps.

    Evaluates, for each gap D,

        N = 8(1+eps)(1+sqrt(eps))^2 / D^2
            * log(2 c_eps K log(8 c_eps (1+eps)^2 (1+sqrt(eps))^2 K / (delta D^2)) / delta)

    and returns the ceilings. Raises on a zero gap (unbounded budget).
    """
    eps, c, k, delta = params.epsilon, params.c_eps, params.k, params.delta
    pref = 8.0 * (1.0 + eps) * (1.0 + math.sqrt(eps)) ** 2
    out = []
    for d in gaps:
        if d <= 0.0:
            raise ValueError(f"gap must be positive, got {d!r}")
        inner = 8.0 * c * (1.0 + eps) ** 2 * (1.0 + math.sqrt(eps)) ** 2 * k / (delta * d * d)
        n = pref / (d * d) * math.log(2.0 * c * k * math.log(inner) / delta)
        out.append(math.ceil(n))
    return out


@dataclass(frozen=True)
class EstimatorState:
    """Snapshot of one arm's running statistics at termination."""

    arm: int
    n_pairs: int
    pending: int
    shots: int
    s_hat: float
    width: float
    status: str  # active | flagged_entangled | flagged_separable


@dataclass(frozen=True)
class RunRecord:
    """Outcome of one policy run, JSON-serializable."""

    policy: str
    wbm_id: int
    delta: float
    epsilon: float
    sigma: float
    T: int | None
    zeta: float
    flagged_arms: tuple[int, ...]
    pulls: int
    copies: int
    per_arm: tuple[EstimatorState, ...]
    seed: tuple[int, ...]
    cutoff_hit: bool
    meta: dict

    def to_json_dict(self) -> dict:
        return {
            "policy": self.policy,
            "wbm_id": self.wbm_id,
            "delta": self.delta,
            "epsilon": self.epsilon,
            "sigma": self.sigma,
            "T": self.T,
            "zeta": self.zeta,
            "flagged_arms": list(self.flagged_arms),
            "pulls": self.pulls,
            "copies": self.copies,
            "per_arm": [
                {"arm": a.arm, "pulls": a.shots, "S_hat": a.s_hat, "status": a.status}
                for a in self.per_arm
            ],
            "seed": list(self.seed),
            "cutoff_hit": self.cutoff_hit,
            "meta": dict(self.meta),
        }


class BudgetExceededError(RuntimeError):
    """Copy budget exhausted before the policy could stop; carries the partial record."""

    def __init__(self, message: str, record: RunRecord):
        super().__init__(message)
        self.record = record


def _seed_path(seed) -> tuple[int, ...]:
    if isinstance(seed, (int, np.integer)):
        return (int(seed),)
    return tuple(int(s) for s in seed)


class _ArmRun:
    """Mutable per-arm state for the policy engines.

    Estimator modes: ``pairs`` averages one pair estimate per round over
    disjoint shot pairs (the independence structure the correctness analysis
    assumes); ``overlap`` additionally scores the pair straddling consecutive
    rounds (an overlapping-pairs average, still unbiased but correlated);
    ``plugin`` evaluates the criterion on the empirical (possibly mitigated)
    outcome frequencies.
    """

    __slots__ = ("arm", "sampler", "n_pairs", "s_sum", "status", "mode", "last")

    def __init__(self, arm: int, sampler: ArmSampler, mode: str):
        self.arm = arm
        self.sampler = sampler
        self.n_pairs = 0
        self.s_sum = 0.0
        self.status = "active"
        self.mode = mode
        self.last = 0  # previous round's final outcome (overlap mode)

    def play_round(self) -> None:
        y = self.sampler.pull()
        y2 = self.sampler.pull()
        if self.mode == "overlap" and self.last:
            self.s_sum += J_VALUES[self.last - 1][y - 1]
            self.n_pairs += 1
        self.s_sum += J_VALUES[y - 1][y2 - 1]
        self.n_pairs += 1
        self.last = y2

    def s_hat(self) -> float:
        if self.n_pairs == 0:
            return 0.0
        if self.mode == "plugin":
            c1, c2, c3, c4 = self.sampler.store.working
            n = self.sampler.store.pulls
            return (4.0 * c1 * c2 - float(c3 - c4) ** 2) / (n * n)
        return self.s_sum / self.n_pairs

    def snapshot(self, width: float) -> EstimatorState:
        shots = self.sampler.store.pulls
        pending = shots - 2 * self.n_pairs if self.mode != "overlap" else 0
        return EstimatorState(
            arm=self.arm,
            n_pairs=self.n_pairs,
            pending=pending,
            shots=shots,
            s_hat=self.s_hat(),
            width=width,
            status=self.status,
        )


def _setup_arms(
    instance,
    wbm: WBM,
    arm_ids,
    seed_path: tuple[int, ...],
    noise: NoiseModel | None,
    mitigation_cadence: int | None,
    estimator: str,
) -> list[_ArmRun]:
    if estimator not in ("pairs", "overlap", "plugin"):
        raise ValueError(f"estimator must be 'pairs', 'overlap' or 'plugin', got {estimator!r}")
    if mitigation_cadence is not None and estimator != "plugin":
        raise ValueError("count mitigation requires the count-based ('plugin') estimator")
    runs = []
    for a in arm_ids:
        probs = outcome_probs(instance.rhos[a], wbm)
        rng = substream(seed_path[0], *seed_path[1:], a)
        sampler = ArmSampler(probs, rng, noise=noise, mitigation_cadence=mitigation_cadence)
        runs.append(_ArmRun(a, sampler, mode=estimator))
    return runs


def _record(
    policy: str,
    wbm: WBM,
    params: LilParams,
    T: int | None,
    zeta: float,
    flagged,
    runs: list[_ArmRun],
    seed_path,
    cutoff_hit: bool,
    meta: dict,
) -> RunRecord:
    dp = params.delta_prime
    per_arm = tuple(r.snapshot(lil_width(r.n_pairs, dp, params)) for r in runs)
    shots = sum(r.sampler.store.pulls for r in runs)
    return RunRecord(
        policy=policy,
        wbm_id=wbm.id,
        delta=params.delta,
        epsilon=params.epsilon,
        sigma=params.sigma,
        T=T,
        zeta=zeta,
        flagged_arms=tuple(flagged),
        pulls=shots,
        copies=shots,
        per_arm=per_arm,
        seed=tuple(seed_path),
        cutoff_hit=cutoff_hit,
        meta=meta,
    )


def successive_elimination(
    instance,
    wbm: WBM,
    params: LilParams,
    seed,
    zeta: float = 0.0,
    max_copies: int = 10_000_000,
    noise: NoiseModel | None = None,
    mitigation_cadence: int | None = None,
    estimator: str = "pairs",
) -> RunRecord:
    """Identify the single sub-threshold arm by eliminating confident others.

    Every round each active arm receives one pair sample; an arm leaves the
    active set once its lower confidence bound S_hat - U exceeds ``zeta``.
    Stops when one arm remains and returns it as the flagged arm. Assumes the
    promise that exactly one arm has criterion value below ``zeta`` (the
    promise is never used by the policy itself, only by harness scoring).

    Raises :class:`BudgetExceededError` once sampling would exceed
    ``max_copies`` measurement shots; the partial record rides on the error.
    """
    seed_path = _seed_path(seed)
    arm_ids = list(range(instance.k))
    params = params.with_k(len(arm_ids))
    meta = {"estimator": estimator}
    runs = _setup_arms(instance, wbm, arm_ids, seed_path, noise, mitigation_cadence, estimator)
    if len(arm_ids) == 1:
        runs[0].status = "flagged_entangled"
        return _record("successive_elimination", wbm, params, None, zeta,
                       (arm_ids[0],), runs, seed_path, False, meta)

    dp = params.delta_prime
    active = list(range(len(runs)))
    copies = 0
    while len(active) > 1:
        if copies + 2 * len(active) > max_copies:
            rec = _record("successive_elimination", wbm, params, None, zeta,
                          (), runs, seed_path, True, meta)
            raise BudgetExceededError(f"copy budget {max_copies} exhausted", rec)
        keep = []
        for i in active:
            r = runs[i]
            r.play_round()
            copies += 2
            u = lil_width(r.n_pairs, dp, params)
            if r.s_hat() - u > zeta:
                r.status = "flagged_separable"
            else:
                keep.append(i)
        active = keep

    flagged = ()
    if active:
        runs[active[0]].status = "flagged_entangled"
        flagged = (runs[active[0]].arm,)
    return _record("successive_elimination", wbm, params, None, zeta,
                   flagged, runs, seed_path, False, meta)


def lil_hdoc(
    instance,
    wbm: WBM,
    params: LilParams,
    seed,
    warm_start: int | None = None,
    zeta: float = 0.0,
    max_copies: int = 10_000_000,
    noise: NoiseModel | None = None,
    mitigation_cadence: int | None = None,
    estimator: str = "pairs",
    arm_subset=None,
    ucb_rule: str = "argmax",
    engine: str = "auto",
) -> RunRecord:
    """Flag every arm with criterion value below ``zeta``, count unknown.

    After ``warm_start`` pair samples per arm (defaulting to
    :func:`warm_start_T`), each round plays the active arm maximizing the
    optimistic index S_hat + sqrt(log t / (2 n)). The played arm is removed
    as separable once S_hat - U >= zeta and flagged entangled once
    S_hat + U < zeta; the run ends when no arm is active.

    ``ucb_rule='argmin'`` instead plays the arm minimizing S_hat - bonus,
    a pessimistic variant exposed for measurement. ``arm_subset`` restricts
    the run to the given arm indices; the per-arm budget then uses the subset
    size as K.

    ``engine`` selects the round-loop implementation: ``auto`` uses the
    compiled loop when numba is available and no mitigation cadence is set,
    ``python`` forces the reference loop, ``compiled`` requires the compiled
    one. Both engines consume identical random streams and produce identical
    records.

    Raises :class:`BudgetExceededError` as in :func:`successive_elimination`.
    """
    if ucb_rule not in ("argmax", "argmin"):
        raise ValueError(f"ucb_rule must be 'argmax' or 'argmin', got {ucb_rule!r}")
    if engine not in ("auto", "python", "compiled"):
        raise ValueError(f"engine must be 'auto', 'python' or 'compiled', got {engine!r}")
    seed_path = _seed_path(seed)
    arm_ids = list(range(instance.k)) if arm_subset is None else [int(a) for a in arm_subset]
    if not arm_ids:
        raise ValueError("lil_hdoc needs at least one arm")
    params = params.with_k(len(arm_ids))
    T = warm_start_T(params) if warm_start is None else int(warm_start)
    if T < 1:
        raise ValueError(f"warm start must be >= 1 pair sample, got {T}")
    meta = {
        "estimator": estimator,
        "ucb_rule": ucb_rule,
        "warm_start_rule": "ceil(0.25 log(K+1) log(max(1/delta,2)) c_eps^1.5)"
        if warm_start is None
        else "override",
        "arms": list(arm_ids),
    }

    use_compiled = (
        _fastpath.HAVE_NUMBA and mitigation_cadence is None and estimator in ("pairs", "plugin")
    )
    if engine == "compiled" and not use_compiled:
        raise ValueError(
            "compiled engine unavailable (numba missing, mitigation requested or overlap estimator)"
        )
    if engine != "python" and use_compiled:
        return _lil_hdoc_compiled(
            instance, wbm, params, seed_path, arm_ids, T, zeta, max_copies,
            noise, estimator, ucb_rule, meta,
        )

    runs = _setup_arms(instance, wbm, arm_ids, seed_path, noise, mitigation_cadence, estimator)
    dp = params.delta_prime

    def budget_stop() -> None:
        flagged = tuple(r.arm for r in runs if r.status == "flagged_entangled")
        rec = _record("lil_hdoc", wbm, params, T, zeta, flagged, runs, seed_path, True, meta)
        raise BudgetExceededError(f"copy budget {max_copies} exhausted", rec)

    copies = 0
    t_rounds = 0
    for r in runs:
        for _ in range(T):
            if copies + 2 > max_copies:
                budget_stop()
            r.play_round()
            t_rounds += 1
            copies += 2

    flagged: list[int] = []
    active = list(range(len(runs)))
    sign = 1.0 if ucb_rule == "argmax" else -1.0
    while active:
        log_t = math.log(t_rounds) if t_rounds > 1 else 0.0
        best, best_val = active[0], -math.inf
        for i in active:
            r = runs[i]
            bonus = math.sqrt(log_t / (2.0 * r.n_pairs))
            val = sign * r.s_hat() + bonus
            if val > best_val:
                best, best_val = i, val
        r = runs[best]
        if copies + 2 > max_copies:
            budget_stop()
        r.play_round()
        t_rounds += 1
        copies += 2
        u = lil_width(r.n_pairs, dp, params)
        sh = r.s_hat()
        if sh - u >= zeta:
            r.status = "flagged_separable"
            active.remove(best)
        elif sh + u < zeta:
            r.status = "flagged_entangled"
            flagged.append(r.arm)
            active.remove(best)

    return _record("lil_hdoc", wbm, params, T, zeta, tuple(flagged), runs, seed_path, False, meta)


def _lil_hdoc_compiled(
    instance,
    wbm: WBM,
    params: LilParams,
    seed_path: tuple[int, ...],
    arm_ids: list[int],
    T: int,
    zeta: float,
    max_copies: int,
    noise: NoiseModel | None,
    estimator: str,
    ucb_rule: str,
    meta: dict,
) -> RunRecord:
    """Run the compiled round loop over pre-drawn per-arm uniform blocks.

    Buffers grow geometrically on exhaustion and the run restarts; restarts
    consume the same stream prefixes, so results never depend on the buffer
    schedule.
    """
    k = len(arm_ids)
    cum = np.stack([
        outcome_cumulative(outcome_probs(instance.rhos[a], wbm), noise) for a in arm_ids
    ])
    sign = 1.0 if ucb_rule == "argmax" else -1.0
    plugin = estimator == "plugin"

    m = 2 * T + 8192
    while True:
        uniforms = np.empty((k, m))
        for i, a in enumerate(arm_ids):
            rng = substream(seed_path[0], *seed_path[1:], a)
            uniforms[i] = rng.random(m)
        (counts, n_pairs, s_sum, _used, status, flag_order,
         copies, _t_rounds, cutoff, exhausted) = _fastpath.hdoc_core(
            cum, uniforms, T, zeta, params.delta_prime, params.width_scale,
            params.one_plus_eps, sign, plugin, max_copies,
        )
        if not exhausted:
            break
        m = min(4 * m, max_copies + 2)

    status_name = {0: "active", 1: "flagged_separable", 2: "flagged_entangled"}
    per_arm = []
    for i, a in enumerate(arm_ids):
        n = int(n_pairs[i])
        if n == 0:
            s_hat = 0.0
        elif plugin:
            c1, c2, c3, c4 = (int(x) for x in counts[i])
            n_sh = 2 * n
            s_hat = (4.0 * c1 * c2 - float(c3 - c4) ** 2) / (n_sh * n_sh)
        else:
            s_hat = float(s_sum[i]) / n
        per_arm.append(
            EstimatorState(
                arm=a,
                n_pairs=n,
                pending=0,
                shots=2 * n,
                s_hat=s_hat,
                width=lil_width(n, params.delta_prime, params),
                status=status_name[int(status[i])],
            )
        )
    order = np.flatnonzero(flag_order >= 0)
    flagged = tuple(arm_ids[int(i)] for i in order[np.argsort(flag_order[order])])
    rec = RunRecord(
        policy="lil_hdoc",
        wbm_id=wbm.id,
        delta=params.delta,
        epsilon=params.epsilon,
        sigma=params.sigma,
        T=T,
        zeta=zeta,
        flagged_arms=flagged,
        pulls=int(copies),
        copies=int(copies),
        per_arm=tuple(per_arm),
        seed=tuple(seed_path),
        cutoff_hit=bool(cutoff),
        meta=meta,
    )
    if cutoff:
        raise BudgetExceededError(f"copy budget {max_copies} exhausted", rec)
    return rec
