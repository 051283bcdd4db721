"""Non-adaptive tomography baseline for Bell-diagonal states.

Estimates the three Pauli correlators <XX>, <YY>, <ZZ> from +/-1 samples,
reconstructs the Bell-basis eigenvalues through the affine map
p = (1 + A c) / 4 and classifies a state as entangled when the largest
reconstructed eigenvalue exceeds 1/2. The shot budget

    t >= 9 / (2 eps^2) * ln(6 / delta)    per setting, N = 3 t per state

guarantees trace-distance accuracy eps with probability 1 - delta.
Classification is additionally guaranteed to match the true status whenever
eps < |p_max - 1/2| for the true eigenvalues.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import BELL_KETS, BELL_ORDER, PAULI_X, PAULI_Y, PAULI_Z, tensor
from .sampler import NoiseModel, substream

__all__ = [
    "SIGN_MATRIX",
    "PAULI_SETTINGS",
    "pauli_correlators",
    "bell_weights_of",
    "measure_correlator",
    "reconstruct_bds",
    "required_shots",
    "TomographyResult",
    "sweep_tomography",
    "classify_batch",
]

# Rows map (XX, YY, ZZ) correlators onto the Bell weights in BELL_ORDER;
# each column sums to zero, so reconstructed weights always sum to one.
SIGN_MATRIX = np.array(
    [
        [1.0, -1.0, 1.0],
        [1.0, 1.0, -1.0],
        [-1.0, -1.0, -1.0],
        [-1.0, 1.0, 1.0],
    ]
)

PAULI_SETTINGS = ("xx", "yy", "zz")
_PAULI_OF = {"xx": PAULI_X, "yy": PAULI_Y, "zz": PAULI_Z}


def pauli_correlators(rho: np.ndarray) -> np.ndarray:
    """Exact (<XX>, <YY>, <ZZ>) of a two-qubit state."""
    return np.array(
        [np.trace(tensor(_PAULI_OF[s], _PAULI_OF[s]) @ rho).real for s in PAULI_SETTINGS]
    )


def bell_weights_of(rho: np.ndarray) -> np.ndarray:
    """Diagonal of a state in the Bell basis (the true weights for a BDS)."""
    return np.array([(BELL_KETS[n].conj() @ rho @ BELL_KETS[n]).real for n in BELL_ORDER])


def measure_correlator(
    rho: np.ndarray,
    pauli: str,
    shots: int,
    rng: np.random.Generator,
    noise: NoiseModel | None = None,
) -> float:
    """Empirical mean of ``shots`` +/-1 samples of one Pauli-pair observable.

    Readout noise, when enabled, is applied to the computational-basis (zz)
    setting only; the rotated settings are treated as ideal.
    """
    if pauli not in PAULI_SETTINGS:
        raise ValueError(f"pauli must be one of {PAULI_SETTINGS}, got {pauli!r}")
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots!r}")
    mean = float(np.trace(tensor(_PAULI_OF[pauli], _PAULI_OF[pauli]) @ rho).real)
    if noise is not None and noise.enabled and pauli == "zz":
        # local bit flips turn <Z> into g<Z> + b per qubit with
        # g = A00 + A11 - 1 and b = A00 - A11
        a0, a1 = noise.assignment_q0, noise.assignment_q1
        g0, b0 = a0[0, 0] + a0[1, 1] - 1.0, a0[0, 0] - a0[1, 1]
        g1, b1 = a1[0, 0] + a1[1, 1] - 1.0, a1[0, 0] - a1[1, 1]
        eye2 = np.eye(2, dtype=complex)
        zi = float(np.trace(tensor(PAULI_Z, eye2) @ rho).real)
        iz = float(np.trace(tensor(eye2, PAULI_Z) @ rho).real)
        mean = g0 * g1 * mean + g0 * b1 * zi + b0 * g1 * iz + b0 * b1
    p_plus = min(max((1.0 + mean) / 2.0, 0.0), 1.0)
    ups = int(rng.binomial(shots, p_plus))
    return (2.0 * ups - shots) / shots


def reconstruct_bds(c_hat) -> np.ndarray:
    """Affine reconstruction of the Bell weights from correlator estimates.

    Components may dip slightly negative; they are reported raw. The last
    component is closed against the first three so the sequential sum is
    exactly one.
    """
    c_hat = np.asarray(c_hat, dtype=float)
    if c_hat.shape != (3,):
        raise ValueError(f"expected three correlator estimates, got shape {c_hat.shape}")
    if np.max(np.abs(c_hat)) > 1.0 + 1e-12:
        raise ValueError(f"correlator estimates must lie in [-1, 1]: {c_hat!r}")
    p = 0.25 * (1.0 + SIGN_MATRIX @ c_hat)
    p[3] = 1.0 - (p[0] + p[1] + p[2])
    return p


def required_shots(epsilon: float, delta: float) -> tuple[int, int]:
    """Per-setting and per-state shot counts for accuracy/confidence targets.

    Returns ``(t, n)`` with t = ceil(9/(2 eps^2) ln(6/delta)) and n = 3 t.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must be in (0, 1), got {epsilon!r}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must be in (0, 1), got {delta!r}")
    t = math.ceil(9.0 / (2.0 * epsilon**2) * math.log(6.0 / delta))
    return t, 3 * t


@dataclass(frozen=True)
class TomographyResult:
    """Reconstruction and classification of one state."""

    arm: int
    c_hat: tuple[float, float, float]
    p_hat: tuple[float, float, float, float]
    shots_per_setting: int
    copies: int
    entangled: bool
    epsilon: float
    delta: float
    status_margin_ok: bool  # eps < |true p_max - 1/2|
    true_p_max: float

    def to_json_dict(self) -> dict:
        return {
            "arm": self.arm,
            "c_hat": list(self.c_hat),
            "p_hat": list(self.p_hat),
            "shots_per_setting": self.shots_per_setting,
            "copies": self.copies,
            "entangled": self.entangled,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "status_margin_ok": self.status_margin_ok,
            "true_p_max": self.true_p_max,
        }


def classify_batch(
    instance,
    epsilon: float,
    delta: float,
    seed,
    noise: NoiseModel | None = None,
) -> list[TomographyResult]:
    """Measure and classify every state of a Bell-diagonal batch.

    Each state spends ``required_shots(epsilon, delta)`` copies split evenly
    over the three settings. Entangled means max reconstructed weight > 1/2;
    exact ties classify as separable.
    """
    t, n = required_shots(epsilon, delta)
    path = (seed,) if isinstance(seed, int) else tuple(seed)
    out = []
    for arm, rho in enumerate(instance.rhos):
        rng = substream(path[0], *path[1:], arm)
        c_hat = np.array(
            [measure_correlator(rho, s, t, rng, noise=noise) for s in PAULI_SETTINGS]
        )
        p_hat = reconstruct_bds(c_hat)
        true_p = bell_weights_of(rho)
        true_p_max = float(true_p.max())
        out.append(
            TomographyResult(
                arm=arm,
                c_hat=tuple(float(x) for x in c_hat),
                p_hat=tuple(float(x) for x in p_hat),
                shots_per_setting=t,
                copies=n,
                entangled=bool(p_hat.max() > 0.5),
                epsilon=epsilon,
                delta=delta,
                status_margin_ok=bool(epsilon < abs(true_p_max - 0.5)),
                true_p_max=true_p_max,
            )
        )
    return out


def sweep_tomography(
    instance,
    epsilon: float,
    deltas,
    trials: int,
    master_seed: int,
    noise: NoiseModel | None = None,
) -> list[dict]:
    """Classification accuracy and copy budget of the baseline across deltas.

    Accuracy is the fraction of trials whose whole batch classifies
    correctly. Rows: delta, epsilon, copies_per_state, total_copies,
    accuracy.
    """
    rows = []
    truth = list(instance.truth)
    for d_idx, delta in enumerate(deltas):
        _, n = required_shots(epsilon, delta)
        correct = 0
        for trial in range(trials):
            results = classify_batch(instance, epsilon, delta, (master_seed, d_idx, trial), noise=noise)
            correct += [r.entangled for r in results] == truth
        rows.append(
            {
                "delta": float(delta),
                "epsilon": float(epsilon),
                "copies_per_state": n,
                "total_copies": n * instance.k,
                "accuracy": correct / trials,
            }
        )
    return rows
