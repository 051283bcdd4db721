"""Two-qubit state families, the PPT ground-truth oracle and labeled batches.

The constructors cover the parameterized family used throughout the package
(depolarized Bell states, Bell-diagonal states, amplitude-damped depolarized
Bell states) plus random full-rank and random separable states. A
:class:`ProblemInstance` bundles K states with their PPT truth flags and the
exact criterion value of every state under each of the six WBMs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    BELL_KETS,
    BELL_ORDER,
    TOL,
    ket,
    partial_trace,
    partial_transpose,
    projector,
    validate_density_matrix,
)
from .witness import criterion_table

__all__ = [
    "FAMILY_DEPOLARIZED_BELL",
    "FAMILY_BELL_DIAGONAL",
    "FAMILY_AMP_DAMPED",
    "FAMILY_GINIBRE",
    "FAMILY_SEPARABLE",
    "StateSpec",
    "ProblemInstance",
    "bell_state",
    "product_state",
    "depolarized_bell",
    "bell_diagonal",
    "canonical_angles_from_probs",
    "bds_from_canonical_angles",
    "bds_circuit_reference",
    "amplitude_damp",
    "ppt_entangled",
    "min_ppt_eigenvalue",
    "random_ginibre",
    "random_separable",
    "build_state",
    "make_instance",
    "instance_from_density_matrices",
    "random_bds_instance",
    "ginibre_promise_instance",
    "bds_probs_from_criterion_values",
    "reference_bds_instance",
    "REFERENCE_CRITERION_VALUES",
]

FAMILY_DEPOLARIZED_BELL = "DepolarizedBell"
FAMILY_BELL_DIAGONAL = "BellDiagonal"
FAMILY_AMP_DAMPED = "AmpDampedDepolarizedBell"
FAMILY_GINIBRE = "Ginibre"
FAMILY_SEPARABLE = "SeparableMixture"

_FAMILIES = (
    FAMILY_DEPOLARIZED_BELL,
    FAMILY_BELL_DIAGONAL,
    FAMILY_AMP_DAMPED,
    FAMILY_GINIBRE,
    FAMILY_SEPARABLE,
)


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    entropy = (int(seed),) if isinstance(seed, (int, np.integer)) else tuple(int(s) for s in seed)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def bell_state(which: str) -> np.ndarray:
    """Projector onto one of the four Bell states."""
    if which not in BELL_KETS:
        raise ValueError(f"unknown Bell selector {which!r}; choose from {sorted(BELL_KETS)}")
    return projector(BELL_KETS[which])


def product_state(ket_a: np.ndarray, ket_b: np.ndarray) -> np.ndarray:
    """Projector onto |a> (x) |b| for single-qubit kets."""
    return projector(np.kron(np.asarray(ket_a, complex), np.asarray(ket_b, complex)))


def depolarized_bell(which: str, w: float) -> np.ndarray:
    """Mixture w |bell><bell| + (1-w) I/4, valid for -1/3 <= w <= 1.

    Separable exactly when w <= 1/3.
    """
    if not -1.0 / 3.0 - TOL.arithmetic <= w <= 1.0 + TOL.arithmetic:
        raise ValueError(f"depolarization weight must be in [-1/3, 1], got {w!r}")
    rho = w * bell_state(which) + (1.0 - w) * np.eye(4, dtype=complex) / 4.0
    return validate_density_matrix(rho, name="depolarized_bell")


def bell_diagonal(p) -> np.ndarray:
    """Mixture of the four Bell states with weights p = (p1, p2, p3, p4).

    Weight order follows ``BELL_ORDER`` (phi+, psi+, psi-, phi-). Entangled
    exactly when some weight exceeds 1/2; the partial-transpose eigenvalues
    are 1/2 - p_i.
    """
    p = np.asarray(p, dtype=float)
    if p.shape != (4,):
        raise ValueError(f"expected four mixture weights, got shape {p.shape}")
    if p.min() < -TOL.arithmetic or abs(float(p.sum()) - 1.0) > TOL.arithmetic:
        raise ValueError(f"mixture weights must lie on the simplex: {p!r}")
    rho = sum(pi * bell_state(name) for pi, name in zip(p, BELL_ORDER))
    return validate_density_matrix(rho, name="bell_diagonal")


def canonical_angles_from_probs(p) -> tuple[float, float, float]:
    """Invert the 3-sphere encoding: weights -> (psi, theta, phi) in [0, pi/2]."""
    p = np.asarray(p, dtype=float)
    sq = np.sqrt(np.clip(p, 0.0, 1.0))
    psi = math.acos(min(sq[0], 1.0))
    rem1 = 1.0 - p[0]
    theta = 0.0 if rem1 <= TOL.arithmetic else math.acos(min(math.sqrt(p[1] / rem1), 1.0))
    rem2 = rem1 - p[1]
    phi = 0.0 if rem2 <= TOL.arithmetic else math.acos(min(math.sqrt(p[2] / rem2), 1.0))
    return psi, theta, phi


def bds_from_canonical_angles(psi: float, theta: float, phi: float) -> tuple[np.ndarray, np.ndarray]:
    """Bell-diagonal state from hyperspherical angles on the weight 3-sphere.

    The square roots of the weights are
    (cos psi, sin psi cos theta, sin psi sin theta cos phi,
    sin psi sin theta sin phi); returns ``(p, rho)``.
    """
    for name, a in (("psi", psi), ("theta", theta), ("phi", phi)):
        if not 0.0 <= a <= math.pi / 2 + TOL.arithmetic:
            raise ValueError(f"angle {name} must be in [0, pi/2], got {a!r}")
    amps = np.array(
        [
            math.cos(psi),
            math.sin(psi) * math.cos(theta),
            math.sin(psi) * math.sin(theta) * math.cos(phi),
            math.sin(psi) * math.sin(theta) * math.sin(phi),
        ]
    )
    p = amps**2
    p[3] = max(0.0, 1.0 - p[0] - p[1] - p[2])
    return p, bell_diagonal(p)


def bds_circuit_reference(psi: float, theta: float, phi: float) -> np.ndarray:
    """Four-qubit statevector realization of the same Bell-diagonal state.

    Prepares the weight amplitudes on qubits (a, b), entangles register pairs
    with CNOT(a->c), CNOT(b->d), H(c), CNOT(c->d) as 16x16 unitaries and
    traces out (a, b). Serves as an independent cross-check of
    :func:`bds_from_canonical_angles`.
    """
    c_ps, s_ps = math.cos(psi), math.sin(psi)
    c_th, s_th = math.cos(theta), math.sin(theta)
    c_ph, s_ph = math.cos(phi), math.sin(phi)
    # amplitudes on |ab> produced by the Ry ladder: the |10> slot picks up a
    # sign and holds the fourth weight, |11> the third
    amp = np.array(
        [c_ps, s_ps * c_th, -s_ps * s_th * s_ph, s_ps * s_th * c_ph], dtype=complex
    )
    state = np.kron(amp, ket("00"))  # qubits a,b,c,d

    eye = np.eye(2, dtype=complex)
    h = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2.0)

    def cnot(control: int, target: int) -> np.ndarray:
        u = np.zeros((16, 16), dtype=complex)
        for idx in range(16):
            bits = [(idx >> (3 - q)) & 1 for q in range(4)]
            if bits[control]:
                bits[target] ^= 1
            j = sum(b << (3 - q) for q, b in enumerate(bits))
            u[j, idx] = 1.0
        return u

    def single(q: int, g: np.ndarray) -> np.ndarray:
        u = np.array([[1.0 + 0j]])
        for pos in range(4):
            u = np.kron(u, g if pos == q else eye)
        return u

    for u in (cnot(0, 2), cnot(1, 3), single(2, h), cnot(2, 3)):
        state = u @ state
    rho_full = np.outer(state, state.conj())
    return partial_trace(rho_full, keep=(2, 3))


def amplitude_damp(rho: np.ndarray, r: float, q: float | None = None) -> np.ndarray:
    """Amplitude damping applied to both qubits of a two-qubit state.

    ``r`` is the decay probability of the first qubit and ``q`` of the second
    (defaults to ``r``). Kraus pair per qubit: K0 = [[0, sqrt(r)], [0, 0]],
    K1 = [[1, 0], [0, sqrt(1-r)]].
    """
    if q is None:
        q = r
    for name, val in (("r", r), ("q", q)):
        if not 0.0 <= val <= 1.0:
            raise ValueError(f"damping probability {name} must be in [0, 1], got {val!r}")
    rho = np.asarray(rho, dtype=complex)

    def kraus(g: float) -> tuple[np.ndarray, np.ndarray]:
        k0 = np.array([[0.0, math.sqrt(g)], [0.0, 0.0]], dtype=complex)
        k1 = np.array([[1.0, 0.0], [0.0, math.sqrt(1.0 - g)]], dtype=complex)
        return k0, k1

    out = np.zeros((4, 4), dtype=complex)
    for ka in kraus(r):
        for kb in kraus(q):
            k = np.kron(ka, kb)
            out += k @ rho @ k.conj().T
    return validate_density_matrix(out, name="amplitude_damp")


def min_ppt_eigenvalue(rho: np.ndarray) -> float:
    """Smallest eigenvalue of the partial transpose."""
    return float(np.linalg.eigvalsh(partial_transpose(rho))[0])


def ppt_entangled(rho: np.ndarray, tol: float = TOL.structural) -> bool:
    """Ground-truth entanglement oracle, exact for two qubits.

    True exactly when the partial transpose has an eigenvalue below ``-tol``;
    values in [-tol, 0] count as separable so boundary states classify
    deterministically.
    """
    return min_ppt_eigenvalue(rho) < -tol


def random_ginibre(seed: int | np.random.SeedSequence) -> np.ndarray:
    """Random full-rank state G G^dag / Tr(G G^dag) with complex Gaussian G."""
    rng = _rng(seed)
    g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    rho = g @ g.conj().T
    rho /= np.trace(rho).real
    rho = 0.5 * (rho + rho.conj().T)
    return validate_density_matrix(rho, name="random_ginibre")


def random_haar_qubit(rng: np.random.Generator) -> np.ndarray:
    """Haar-random single-qubit ket via a normalized complex Gaussian pair."""
    v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    return v / np.linalg.norm(v)


def random_separable(seed: int | np.random.SeedSequence, terms: int = 100) -> np.ndarray:
    """Convex mixture of ``terms`` random product states; separable by construction."""
    if terms < 1:
        raise ValueError(f"terms must be >= 1, got {terms!r}")
    rng = _rng(seed)
    weights = rng.dirichlet(np.ones(terms))
    rho = np.zeros((4, 4), dtype=complex)
    for w in weights:
        rho += w * product_state(random_haar_qubit(rng), random_haar_qubit(rng))
    rho = 0.5 * (rho + rho.conj().T)
    return validate_density_matrix(rho, name="random_separable")


@dataclass(frozen=True)
class StateSpec:
    """Serializable recipe for one state: family tag, parameters, seed."""

    family: str
    params: dict = field(default_factory=dict)
    seed: int | None = None

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; choose from {_FAMILIES}")

    def to_json_dict(self) -> dict:
        d = {"family": self.family, "params": _jsonify(self.params)}
        if self.seed is not None:
            d["seed"] = int(self.seed)
        return d

    @classmethod
    def from_json_dict(cls, d: dict) -> "StateSpec":
        return cls(family=d["family"], params=dict(d.get("params", {})), seed=d.get("seed"))


def _jsonify(obj):
    if isinstance(obj, dict):
        return {k: _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    return obj


def build_state(spec: StateSpec) -> np.ndarray:
    """Materialize the density matrix described by a spec, deterministically."""
    p = spec.params
    if spec.family == FAMILY_DEPOLARIZED_BELL:
        return depolarized_bell(p["bell"], p["w"])
    if spec.family == FAMILY_BELL_DIAGONAL:
        return bell_diagonal(p["p"])
    if spec.family == FAMILY_AMP_DAMPED:
        return amplitude_damp(depolarized_bell(p["bell"], p["w"]), p["r"], p.get("q"))
    if spec.family == FAMILY_GINIBRE:
        return random_ginibre(spec.seed)
    if spec.family == FAMILY_SEPARABLE:
        return random_separable(spec.seed, p.get("terms", 100))
    raise ValueError(f"unknown family {spec.family!r}")


@dataclass(frozen=True)
class ProblemInstance:
    """K labeled states with PPT truth flags and exact criterion values.

    ``criterion_values`` has shape (K, 6); column j-1 holds the exact value
    under WBM id j.
    """

    specs: tuple[StateSpec, ...]
    rhos: tuple[np.ndarray, ...]
    truth: tuple[bool, ...]
    criterion_values: np.ndarray

    @property
    def k(self) -> int:
        return len(self.rhos)

    @property
    def m(self) -> int:
        return int(sum(self.truth))

    def entangled_arms(self) -> tuple[int, ...]:
        return tuple(i for i, t in enumerate(self.truth) if t)

    def detectable_under(self, wbm_id: int, zeta: float = 0.0) -> tuple[int, ...]:
        """Arms whose exact criterion value under a WBM falls below ``zeta``."""
        col = self.criterion_values[:, wbm_id - 1]
        return tuple(int(i) for i in np.flatnonzero(col < zeta))


def make_instance(specs) -> ProblemInstance:
    """Build a labeled instance from state specs (K >= 2)."""
    specs = tuple(specs)
    if len(specs) < 2:
        raise ValueError(f"an instance needs at least two states, got {len(specs)}")
    rhos = tuple(build_state(s) for s in specs)
    truth = tuple(ppt_entangled(r) for r in rhos)
    table = criterion_table(np.stack(rhos))
    return ProblemInstance(specs=specs, rhos=rhos, truth=truth, criterion_values=table)


def instance_from_density_matrices(rhos) -> ProblemInstance:
    """Label a batch of explicit density matrices (not serializable)."""
    rhos = tuple(validate_density_matrix(np.asarray(r, dtype=complex)) for r in rhos)
    truth = tuple(ppt_entangled(r) for r in rhos)
    table = criterion_table(np.stack(rhos))
    return ProblemInstance(specs=(), rhos=rhos, truth=truth, criterion_values=table)


def random_bds_instance(
    k: int,
    m: int,
    seed,
    dominant_range: tuple[float, float] = (0.55, 0.85),
    separable_cap: float = 0.45,
    min_gap: float = 0.05,
    max_tries: int = 10**6,
) -> ProblemInstance:
    """Random Bell-diagonal batch with exactly ``m`` entangled states.

    Entangled states get a dominant weight drawn from ``dominant_range``;
    separable states keep every weight at or below ``separable_cap``. States
    whose criterion value under either of the first two WBMs comes within
    ``min_gap`` of zero are rejected so downstream policies face bounded
    gaps.
    """
    if not 0 <= m <= k:
        raise ValueError(f"need 0 <= m <= k, got m={m}, k={k}")
    entropy = (seed,) if isinstance(seed, int) else tuple(seed)
    rng = _rng(np.random.SeedSequence(entropy + (0x1D5,)))
    specs = []
    flags = [True] * m + [False] * (k - m)
    for want_entangled in flags:
        for _ in range(max_tries):
            if want_entangled:
                dom = rng.uniform(*dominant_range)
                rest = rng.dirichlet(np.ones(3)) * (1.0 - dom)
                p = np.insert(rest, int(rng.integers(4)), dom)
            else:
                p = rng.dirichlet(np.ones(4))
                if p.max() > separable_cap:
                    continue
            s1 = (1.0 - 2.0 * p[1]) * (1.0 - 2.0 * p[2])
            s2 = (1.0 - 2.0 * p[0]) * (1.0 - 2.0 * p[3])
            if min(abs(s1), abs(s2)) < min_gap:
                continue
            specs.append(StateSpec(FAMILY_BELL_DIAGONAL, {"p": [float(x) for x in p]}))
            break
        else:
            raise RuntimeError("rejection sampling exhausted while drawing a BDS state")
    return make_instance(specs)


def ginibre_promise_instance(k: int, seed, max_tries: int = 10**6) -> ProblemInstance:
    """Random full-rank batch conditioned on exactly one entangled state.

    Whole batches are rejection-sampled against the PPT oracle; the accepted
    per-state integer seeds are recorded so the instance rebuilds exactly.
    """
    entropy = (seed,) if isinstance(seed, int) else tuple(seed)
    rng = _rng(np.random.SeedSequence(entropy + (0x61B,)))
    for _ in range(max_tries):
        seeds = [int(s) for s in rng.integers(0, 2**62, size=k)]
        rhos = [random_ginibre(s) for s in seeds]
        if sum(ppt_entangled(r) for r in rhos) == 1:
            specs = tuple(StateSpec(FAMILY_GINIBRE, seed=s) for s in seeds)
            return make_instance(specs)
    raise RuntimeError(f"no promise instance found in {max_tries} tries")


def bds_probs_from_criterion_values(s1: float, s2: float) -> np.ndarray:
    """Mixture weights of a Bell-diagonal state with prescribed criterion values.

    ``s1`` and ``s2`` are the target values under WBM 1 and WBM 2. They
    factor as s1 = (1-2p2)(1-2p3) and s2 = (1-2p1)(1-2p4), which leaves one
    free parameter; it is pinned to the midpoint of its feasible interval so
    the construction is deterministic.
    """
    lo = max(2.0 * math.sqrt(max(s1, 0.0)), 1.0 - s2, -(1.0 + s1))
    hi = min(1.0 + s1, 2.0 - 2.0 * math.sqrt(max(s2, 0.0)))
    if lo > hi + TOL.arithmetic:
        raise ValueError(f"criterion pair ({s1}, {s2}) is not realizable by a Bell-diagonal state")
    t = 0.5 * (lo + hi)
    du = math.sqrt(max(t * t / 4.0 - s1, 0.0))
    u, v = t / 2.0 + du, t / 2.0 - du
    c = (2.0 - t) / 2.0
    dx = math.sqrt(max(c * c - s2, 0.0))
    x, y = c + dx, c - dx
    p = np.array([(1.0 - x) / 2.0, (1.0 - u) / 2.0, (1.0 - v) / 2.0, (1.0 - y) / 2.0])
    p = np.clip(p, 0.0, 1.0)
    p[3] = max(0.0, 1.0 - p[0] - p[1] - p[2])
    return p


# Criterion values of the bundled five-state reference batch under WBMs 1 and
# 2: three states are entangled, split across the two detecting bases, and
# the smallest magnitude (0.0695) sets the hardness of the batch.
REFERENCE_CRITERION_VALUES = (
    (0.6306, -0.0749),
    (-0.2688, 0.5963),
    (0.5232, -0.1735),
    (0.1796, 0.2801),
    (0.0695, 0.3768),
)


def reference_bds_instance() -> ProblemInstance:
    """The bundled K=5, m=3 Bell-diagonal benchmark batch."""
    specs = []
    for s1, s2 in REFERENCE_CRITERION_VALUES:
        p = bds_probs_from_criterion_values(s1, s2)
        specs.append(StateSpec(FAMILY_BELL_DIAGONAL, {"p": [float(x) for x in p]}))
    return make_instance(specs)
