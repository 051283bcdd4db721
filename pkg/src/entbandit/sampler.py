"""Shot-by-shot measurement simulation, readout noise and count mitigation.

Outcomes are indices 1..4 tied to register bitstrings by
``witness.BITSTRING_OF_OUTCOME``. Readout noise flips each register bit
independently per an assignment matrix A[observed, true]; mitigation inverts
the joint assignment matrix on the empirical count vector, clips, renormalizes
and rounds back to integer counts by largest remainder.

Randomness: every consumer derives its own ``numpy`` PCG64 generator from a
``SeedSequence`` path via :func:`substream`, so concurrent trials never share
generator state and reruns are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import TOL
from .witness import WBM, outcome_probs

__all__ = [
    "NoiseModel",
    "CountStore",
    "MitigationError",
    "substream",
    "sample_outcome",
    "apply_readout_noise",
    "apply_readout_noise_batch",
    "noisy_outcome_distribution",
    "outcome_cumulative",
    "largest_remainder_round",
    "mitigate_counts",
    "pull",
    "ArmSampler",
    "counts_to_parity_expectations",
    "probs_from_parity_expectations",
    "counts_from_parity_sums",
]


class MitigationError(RuntimeError):
    """Mitigation is unavailable (singular assignment matrix)."""


def substream(master_seed: int, *path: int) -> np.random.Generator:
    """Independent generator for a node of the seed tree.

    The stream is keyed on the full integer path, e.g.
    ``substream(seed, trial, arm)``.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((int(master_seed),) + tuple(int(p) for p in path))))


def _check_assignment(a: np.ndarray, name: str) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.shape != (2, 2):
        raise ValueError(f"{name}: assignment matrix must be 2x2, got {a.shape}")
    if a.min() < -TOL.arithmetic or a.max() > 1.0 + TOL.arithmetic:
        raise ValueError(f"{name}: entries must be probabilities: {a!r}")
    colsums = a.sum(axis=0)
    if np.max(np.abs(colsums - 1.0)) > TOL.arithmetic:
        raise ValueError(f"{name}: columns must sum to 1, got {colsums!r}")
    return a


@dataclass(frozen=True, eq=False)
class NoiseModel:
    """Local readout confusion: one column-stochastic 2x2 matrix per qubit.

    ``assignment_q0`` acts on the first register bit, ``assignment_q1`` on the
    second; A[i, j] is the probability of reading bit value i when the true
    value is j.
    """

    assignment_q0: np.ndarray
    assignment_q1: np.ndarray
    enabled: bool = True

    def __post_init__(self):
        object.__setattr__(self, "assignment_q0", _check_assignment(self.assignment_q0, "assignment_q0"))
        object.__setattr__(self, "assignment_q1", _check_assignment(self.assignment_q1, "assignment_q1"))

    @classmethod
    def identity(cls, enabled: bool = True) -> "NoiseModel":
        return cls(np.eye(2), np.eye(2), enabled=enabled)

    @classmethod
    def symmetric_flip(cls, p: float, p1: float | None = None) -> "NoiseModel":
        """Both bits flip with probability ``p`` (or ``p``/``p1`` per bit)."""
        if p1 is None:
            p1 = p
        a0 = np.array([[1.0 - p, p], [p, 1.0 - p]])
        a1 = np.array([[1.0 - p1, p1], [p1, 1.0 - p1]])
        return cls(a0, a1)

    def joint(self) -> np.ndarray:
        """4x4 confusion matrix acting on outcome-indexed distributions."""
        return np.kron(self.assignment_q0, self.assignment_q1)

    def to_json_dict(self) -> dict:
        return {
            "assignment_q0": [[float(x) for x in row] for row in self.assignment_q0],
            "assignment_q1": [[float(x) for x in row] for row in self.assignment_q1],
            "enabled": bool(self.enabled),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "NoiseModel":
        return cls(
            np.asarray(d["assignment_q0"], dtype=float),
            np.asarray(d["assignment_q1"], dtype=float),
            enabled=bool(d.get("enabled", True)),
        )


@dataclass
class CountStore:
    """Per-arm outcome tallies for one measurement basis.

    ``raw`` accumulates the outcomes as sampled; ``working`` is what the
    estimator sees and is rebuilt by mitigation (mitigated base plus raw
    increments since the last mitigation). Both always sum to ``pulls``.
    """

    raw: list[int] = field(default_factory=lambda: [0, 0, 0, 0])
    working: list[int] = field(default_factory=lambda: [0, 0, 0, 0])
    pulls: int = 0
    since_mitigation: int = 0
    mitigations: int = 0

    def record(self, outcome: int) -> None:
        self.raw[outcome - 1] += 1
        self.working[outcome - 1] += 1
        self.pulls += 1
        self.since_mitigation += 1

    def frequencies(self) -> np.ndarray:
        if self.pulls == 0:
            raise ValueError("no outcomes recorded yet")
        return np.asarray(self.working, dtype=float) / self.pulls


def sample_outcome(rho: np.ndarray, wbm: WBM, rng: np.random.Generator) -> int:
    """Draw one outcome 1..4 with probabilities Tr(E_j rho)."""
    f = outcome_probs(rho, wbm)
    return int(np.searchsorted(np.cumsum(f), rng.random(), side="right")) + 1


def apply_readout_noise(outcome: int, noise: NoiseModel, rng: np.random.Generator) -> int:
    """Flip each register bit of the outcome independently per the noise model."""
    idx = outcome - 1
    b0, b1 = (idx >> 1) & 1, idx & 1
    if rng.random() < noise.assignment_q0[1 - b0, b0]:
        b0 ^= 1
    if rng.random() < noise.assignment_q1[1 - b1, b1]:
        b1 ^= 1
    return (b0 << 1 | b1) + 1


def apply_readout_noise_batch(outcomes: np.ndarray, noise: NoiseModel, rng: np.random.Generator) -> np.ndarray:
    """Vectorized form of :func:`apply_readout_noise` for outcome arrays."""
    idx = np.asarray(outcomes, dtype=np.int64) - 1
    b0, b1 = (idx >> 1) & 1, idx & 1
    flip0 = noise.assignment_q0[1 - b0, b0]
    flip1 = noise.assignment_q1[1 - b1, b1]
    b0 ^= rng.random(idx.shape) < flip0
    b1 ^= rng.random(idx.shape) < flip1
    return (b0 << 1 | b1) + 1


def noisy_outcome_distribution(probs: np.ndarray, noise: NoiseModel | None) -> np.ndarray:
    """Outcome distribution after the confusion matrix (identity if disabled)."""
    probs = np.asarray(probs, dtype=float)
    if noise is None or not noise.enabled:
        return probs
    return noise.joint() @ probs


def outcome_cumulative(probs: np.ndarray, noise: NoiseModel | None) -> np.ndarray:
    """Cumulative outcome distribution used for inverse-CDF sampling.

    Shared by every sampler so engines draw identical outcome streams from
    identical uniform streams.
    """
    cum = np.cumsum(noisy_outcome_distribution(probs, noise))
    cum[-1] = 1.0
    return cum


def largest_remainder_round(weights: np.ndarray, total: int) -> list[int]:
    """Non-negative integers summing to ``total`` proportional to ``weights``."""
    weights = np.clip(np.asarray(weights, dtype=float), 0.0, None)
    s = weights.sum()
    if s <= 0:
        raise ValueError("cannot apportion counts from an all-zero weight vector")
    quota = weights * (total / s)
    base = np.floor(quota).astype(int)
    short = total - int(base.sum())
    if short:
        order = np.argsort(-(quota - base), kind="stable")
        base[order[:short]] += 1
    return [int(x) for x in base]


def mitigate_counts(store: CountStore, noise: NoiseModel) -> CountStore:
    """Invert the joint confusion matrix on the working counts, in place.

    Negative corrected entries are clipped to zero, the vector renormalized
    and converted back to integers summing to the pull count by largest
    remainder.
    """
    if store.pulls <= 0:
        raise ValueError("mitigation needs at least one recorded outcome")
    joint = noise.joint()
    det = np.linalg.det(joint)
    if abs(det) < 1e-12:
        raise MitigationError(f"assignment matrix is singular (det={det:.3e})")
    corrected = np.linalg.solve(joint, np.asarray(store.working, dtype=float))
    store.working = largest_remainder_round(corrected, store.pulls)
    store.since_mitigation = 0
    store.mitigations += 1
    return store


def pull(
    arm_idx: int,
    instance,
    wbm: WBM,
    noise: NoiseModel | None,
    mitigation_cadence: int | None,
    store: CountStore,
    rng: np.random.Generator,
) -> int:
    """One measurement shot on arm ``arm_idx``: sample, corrupt, tally, mitigate.

    When ``mitigation_cadence`` is set, :func:`mitigate_counts` runs every
    that many shots and later statistics build on the corrected counts.
    """
    y = sample_outcome(instance.rhos[arm_idx], wbm, rng)
    if noise is not None and noise.enabled:
        y = apply_readout_noise(y, noise, rng)
    store.record(y)
    if mitigation_cadence is not None and noise is not None:
        if mitigation_cadence < 1:
            raise ValueError("mitigation cadence must be >= 1")
        if store.since_mitigation >= mitigation_cadence:
            mitigate_counts(store, noise)
    return y


class ArmSampler:
    """Buffered sampler for one (state, WBM) pair inside a policy run.

    Draws outcomes in blocks from the (noise-corrupted) outcome distribution,
    tallies them in a :class:`CountStore` and runs the mitigation cadence.
    Distribution-level corruption is equivalent to per-shot bit flips and
    keeps the per-shot cost flat.
    """

    def __init__(
        self,
        probs: np.ndarray,
        rng: np.random.Generator,
        noise: NoiseModel | None = None,
        mitigation_cadence: int | None = None,
        block: int = 4096,
    ):
        self.cum = outcome_cumulative(probs, noise)
        self.rng = rng
        self.noise = noise
        self.cadence = mitigation_cadence
        if self.cadence is not None and self.cadence < 1:
            raise ValueError("mitigation cadence must be >= 1")
        if self.cadence is not None and noise is None:
            raise ValueError("mitigation cadence given without a noise model")
        self.block = block
        self.store = CountStore()
        self._buf: list[int] = []
        self._pos = 0

    def _refill(self) -> None:
        draws = np.searchsorted(self.cum, self.rng.random(self.block), side="right") + 1
        self._buf = draws.tolist()
        self._pos = 0

    def pull(self) -> int:
        if self._pos >= len(self._buf):
            self._refill()
        y = self._buf[self._pos]
        self._pos += 1
        store = self.store
        store.raw[y - 1] += 1
        store.working[y - 1] += 1
        store.pulls += 1
        store.since_mitigation += 1
        if self.cadence is not None and store.since_mitigation >= self.cadence:
            mitigate_counts(store, self.noise)
        return y


def counts_to_parity_expectations(counts) -> tuple[int, int, int]:
    """Unnormalized Z-parity sums (IZ, ZI, ZZ) of an outcome count vector.

    Integer arithmetic; divide by the shot total for expectation values.
    """
    c1, c2, c3, c4 = (int(c) for c in counts)
    iz = c1 - c2 + c3 - c4
    zi = c1 + c2 - c3 - c4
    zz = c1 - c2 - c3 + c4
    return iz, zi, zz


def probs_from_parity_expectations(iz: float, zi: float, zz: float) -> np.ndarray:
    """Outcome probabilities from the three Z-parity expectation values."""
    return 0.25 * np.array(
        [
            1.0 + iz + zi + zz,
            1.0 - iz + zi - zz,
            1.0 + iz - zi - zz,
            1.0 - iz - zi + zz,
        ]
    )


def counts_from_parity_sums(n: int, iz: int, zi: int, zz: int) -> list[int]:
    """Exact inverse of :func:`counts_to_parity_expectations` on integers."""
    c1 = (n + iz + zi + zz) // 4
    c2 = (n - iz + zi - zz) // 4
    c3 = (n + iz - zi - zz) // 4
    c4 = (n - iz - zi + zz) // 4
    if c1 + c2 + c3 + c4 != n or min(c1, c2, c3, c4) < 0:
        raise ValueError("parity sums are inconsistent with the shot total")
    return [c1, c2, c3, c4]
