"""Witness-basis measurements (WBMs) and the quadratic separability criterion.

A WBM is the rank-1 projective measurement onto the eigenbasis of the
partially transposed projector |psi><psi| with |psi> = cos(a)|00> + sin(a)|11>.
The base measurement is

    E1 = { |00><00|, |11><11|, |Psi+><Psi+|, |Psi-><Psi-| }

and five further bases are generated by conjugating with local unitaries
(U1 (x) U2). From the four outcome probabilities f = (f1, f2, f3, f4) the
criterion

    S = 4*f1*f2 - (f3 - f4)^2

is non-negative on every separable two-qubit state, so S < 0 certifies
entanglement while S >= 0 is inconclusive.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .linalg import (
    BELL_KETS,
    ID2,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    TOL,
    dagger,
    ket,
    partial_transpose,
    projector,
    tensor,
)

__all__ = [
    "WBM",
    "WBM_IDS",
    "BITSTRING_OF_OUTCOME",
    "cyclic_pauli_unitary",
    "adaptation_pairs",
    "build_wbm",
    "all_wbms",
    "outcome_probs",
    "criterion_from_probs",
    "exact_criterion",
    "criterion_table",
    "witness_operator",
]

WBM_IDS = (1, 2, 3, 4, 5, 6)

# Outcome index -> measured register bitstring. Fixed once for all WBMs; the
# readout-noise model and the parity-expectation bookkeeping both key off it.
BITSTRING_OF_OUTCOME = {1: "00", 2: "01", 3: "10", 4: "11"}


@dataclass(frozen=True, eq=False)
class WBM:
    """One witness-basis measurement: four rank-1 projectors forming a POVM."""

    id: int
    projectors: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]
    unitary_pair: tuple[np.ndarray, np.ndarray]
    bitstring_map: dict[int, str]

    def __post_init__(self):
        total = sum(self.projectors)
        closure = np.max(np.abs(total - np.eye(4)))
        if closure > TOL.arithmetic:
            raise ValueError(f"WBM {self.id}: projectors do not close to identity ({closure:.3e})")
        for j, e in enumerate(self.projectors, start=1):
            idem = np.max(np.abs(e @ e - e))
            if idem > TOL.arithmetic or abs(np.trace(e).real - 1.0) > TOL.arithmetic:
                raise ValueError(f"WBM {self.id}: outcome {j} is not a rank-1 projector")


def cyclic_pauli_unitary() -> np.ndarray:
    """Unitary C with C X C^dag = Y, C Y C^dag = Z, C Z C^dag = X.

    Realized as (I - i(X+Y+Z))/2, a rotation by 2*pi/3 about the Bloch
    diagonal; C^3 = -I.
    """
    return 0.5 * (ID2 - 1j * (PAULI_X + PAULI_Y + PAULI_Z))


def adaptation_pairs() -> tuple[tuple[np.ndarray, np.ndarray], ...]:
    """The six local-unitary pairs (U1, U2), in canonical id order 1..6."""
    c = cyclic_pauli_unitary()
    cd = dagger(c)
    return (
        (ID2, ID2),
        (ID2, PAULI_X),
        (cd, c),
        (cd, PAULI_X @ c),
        (c, cd),
        (c, PAULI_X @ cd),
    )


def _base_projectors() -> tuple[np.ndarray, ...]:
    return (
        projector(ket("00")),
        projector(ket("11")),
        projector(BELL_KETS["psi_plus"]),
        projector(BELL_KETS["psi_minus"]),
    )


@lru_cache(maxsize=None)
def build_wbm(wbm_id: int) -> WBM:
    """Construct measurement ``wbm_id`` in 1..6.

    Outcome j of basis k is (U1 (x) U2)^dag E_j (U1 (x) U2) with the pair
    taken from :func:`adaptation_pairs`; id 1 is the base measurement itself.
    """
    if wbm_id not in WBM_IDS:
        raise ValueError(f"WBM id must be in 1..6, got {wbm_id!r}")
    u1, u2 = adaptation_pairs()[wbm_id - 1]
    u = tensor(u1, u2)
    ud = dagger(u)
    projectors = tuple(ud @ e @ u for e in _base_projectors())
    return WBM(
        id=wbm_id,
        projectors=projectors,
        unitary_pair=(u1, u2),
        bitstring_map=dict(BITSTRING_OF_OUTCOME),
    )


def all_wbms() -> tuple[WBM, ...]:
    return tuple(build_wbm(i) for i in WBM_IDS)


def outcome_probs(rho: np.ndarray, wbm: WBM) -> np.ndarray:
    """Outcome probabilities f_j = Tr(E_j rho), clamped onto the simplex.

    Tiny negative values from rounding are clipped to zero and the vector is
    renormalized.
    """
    f = np.array([np.trace(e @ rho).real for e in wbm.projectors])
    f = np.clip(f, 0.0, None)
    return f / f.sum()


def criterion_from_probs(f) -> float:
    """S = 4*f1*f2 - (f3 - f4)^2 for a probability 4-vector; range [-1, 1/4]."""
    f = np.asarray(f, dtype=float)
    if f.shape != (4,):
        raise ValueError(f"expected four probabilities, got shape {f.shape}")
    if abs(float(f.sum()) - 1.0) > 1e-9 or float(f.min()) < -TOL.arithmetic:
        raise ValueError(f"probabilities do not lie on the simplex: {f!r}")
    return float(4.0 * f[0] * f[1] - (f[2] - f[3]) ** 2)


def exact_criterion(rho: np.ndarray, wbm: WBM) -> float:
    """Exact criterion value of a state under one measurement basis."""
    return criterion_from_probs(outcome_probs(rho, wbm))


def criterion_table(rhos) -> np.ndarray:
    """Exact criterion values for a batch of states under all six WBMs.

    Returns shape (len(rhos), 6), column j-1 holding values for WBM id j.
    """
    rhos = np.asarray(rhos, dtype=complex)
    if rhos.ndim == 2:
        rhos = rhos[None, :, :]
    out = np.empty((rhos.shape[0], 6))
    for j, wbm in enumerate(all_wbms()):
        es = np.stack(wbm.projectors)  # (4, 4, 4)
        f = np.einsum("oab,kba->ko", es, rhos).real
        f = np.clip(f, 0.0, None)
        f /= f.sum(axis=1, keepdims=True)
        out[:, j] = 4.0 * f[:, 0] * f[:, 1] - (f[:, 2] - f[:, 3]) ** 2
    return out


def witness_operator(alpha: float) -> np.ndarray:
    """Witness cos^2(a) I - (|psi><psi|)^T_b for |psi> = cos(a)|00> + sin(a)|11>.

    Hermitian with non-negative expectation on every separable state;
    ``alpha`` must lie in [0, pi/4] so the Schmidt coefficients are ordered.
    """
    if not 0.0 <= alpha <= np.pi / 4 + TOL.arithmetic:
        raise ValueError(f"alpha must be in [0, pi/4], got {alpha!r}")
    psi = np.cos(alpha) * ket("00") + np.sin(alpha) * ket("11")
    return np.cos(alpha) ** 2 * np.eye(4) - partial_transpose(projector(psi))
