import math

import numpy as np
import pytest

from entbandit.linalg import BELL_KETS, projector
from entbandit.sampler import NoiseModel, substream
from entbandit.states import StateSpec, bell_diagonal, make_instance, reference_bds_instance
from entbandit.tomography import (
    SIGN_MATRIX,
    bell_weights_of,
    classify_batch,
    measure_correlator,
    pauli_correlators,
    reconstruct_bds,
    required_shots,
)


def test_sign_matrix_columns_sum_to_zero():
    assert np.array_equal(SIGN_MATRIX.sum(axis=0), np.zeros(3))


def test_exact_correlators_of_bell_states():
    assert np.allclose(pauli_correlators(projector(BELL_KETS["phi_plus"])), [1, -1, 1])
    assert np.allclose(pauli_correlators(projector(BELL_KETS["psi_minus"])), [-1, -1, -1])
    assert np.allclose(pauli_correlators(np.eye(4) / 4), [0, 0, 0])


def test_measure_correlator_deterministic_extreme():
    rho = projector(BELL_KETS["phi_plus"])
    rng = substream(1, 1)
    assert measure_correlator(rho, "xx", 1000, rng) == 1.0
    assert measure_correlator(rho, "yy", 1000, rng) == -1.0


def test_measure_correlator_maximally_mixed_concentrates():
    n = 100_000
    got = measure_correlator(np.eye(4) / 4, "zz", n, substream(2, 1))
    assert abs(got) < 4 / math.sqrt(n)


def test_measure_correlator_determinism_and_validation():
    rho = bell_diagonal([0.4, 0.3, 0.2, 0.1])
    a = measure_correlator(rho, "zz", 5000, substream(3, 7))
    b = measure_correlator(rho, "zz", 5000, substream(3, 7))
    assert a == b
    with pytest.raises(ValueError):
        measure_correlator(rho, "zx", 10, substream(0, 0))
    with pytest.raises(ValueError):
        measure_correlator(rho, "zz", 0, substream(0, 0))


def test_measure_correlator_noise_scales_zz():
    rho = projector(BELL_KETS["phi_plus"])
    noise = NoiseModel.symmetric_flip(0.1)
    n = 200_000
    got = measure_correlator(rho, "zz", n, substream(4, 2), noise=noise)
    # symmetric flips scale the parity by (1-2p)^2
    assert got == pytest.approx(0.8 * 0.8, abs=4 / math.sqrt(n))
    ideal = measure_correlator(rho, "xx", n, substream(4, 3), noise=noise)
    assert ideal == 1.0  # rotated settings treated as ideal


def test_reconstruct_bds_reference_points():
    assert np.allclose(reconstruct_bds([0, 0, 0]), [0.25] * 4)
    assert np.allclose(reconstruct_bds([1, -1, 1]), [1, 0, 0, 0])
    assert np.allclose(reconstruct_bds([-1, -1, -1]), [0, 0, 1, 0])
    with pytest.raises(ValueError):
        reconstruct_bds([1.5, 0, 0])


def test_reconstruct_bds_sums_to_one_exactly():
    rng = substream(5, 5)
    for _ in range(500):
        c = rng.uniform(-1, 1, size=3)
        p = reconstruct_bds(c)
        assert math.fsum([p[0], p[1], p[2], p[3]]) == pytest.approx(1.0, abs=5e-16)
        assert ((p[0] + p[1]) + p[2]) + p[3] == 1.0


def test_reconstruct_matches_true_weights_on_exact_input():
    rng = substream(6, 1)
    for _ in range(50):
        p = rng.dirichlet(np.ones(4))
        rho = bell_diagonal(p)
        assert np.allclose(reconstruct_bds(pauli_correlators(rho)), p, atol=1e-12)
        assert np.allclose(bell_weights_of(rho), p, atol=1e-12)


def test_required_shots_reference_values():
    t, n = required_shots(0.01, 0.05)
    assert (t, n) == (215_438, 646_314)
    t2, n2 = required_shots(0.005, 0.05)
    assert 3.9 < n2 / n < 4.1  # quartic in 1/eps... quadratic: eps halved -> x4
    t3, _ = required_shots(0.01, 0.005)
    assert t3 > t  # log growth in 1/delta
    with pytest.raises(ValueError):
        required_shots(0.0, 0.05)


def test_classify_batch_reference_instance():
    inst = reference_bds_instance()
    results = classify_batch(inst, epsilon=0.01, delta=0.05, seed=900)
    assert [r.entangled for r in results] == list(inst.truth)
    for r in results:
        assert r.copies == 646_314
        assert r.status_margin_ok  # eps < |p_max - 1/2| on every arm
        assert abs(sum(r.p_hat) - 1.0) < 1e-12


def test_classify_batch_determinism():
    inst = reference_bds_instance()
    a = classify_batch(inst, 0.05, 0.1, seed=901)
    b = classify_batch(inst, 0.05, 0.1, seed=901)
    assert [r.to_json_dict() for r in a] == [r.to_json_dict() for r in b]


def test_classify_batch_margin_flag_near_boundary():
    inst = make_instance(
        [
            StateSpec("BellDiagonal", {"p": [0.505, 0.3, 0.1, 0.095]}),
            StateSpec("BellDiagonal", {"p": [0.25, 0.25, 0.25, 0.25]}),
        ]
    )
    results = classify_batch(inst, epsilon=0.05, delta=0.1, seed=902)
    assert not results[0].status_margin_ok  # eps=0.05 >= |0.505-0.5|
    assert results[1].status_margin_ok


def test_hoeffding_coverage_and_trace_chain():
    """Correlator deviations stay within the budgeted band, and the
    trace-distance chain |p_hat - p|_1 / 2 <= 1.5 * |c_hat - c|_inf holds
    for every sample."""
    eps, delta = 0.05, 0.1
    t, _ = required_shots(eps, delta)
    rho = bell_diagonal([0.4, 0.3, 0.2, 0.1])
    c_true = pauli_correlators(rho)
    p_true = bell_weights_of(rho)
    trials, bad = 500, 0
    for trial in range(trials):
        rng = substream(903, trial)
        c_hat = np.array([measure_correlator(rho, s, t, rng) for s in ("xx", "yy", "zz")])
        dev = np.max(np.abs(c_hat - c_true))
        bad += dev > (2.0 / 3.0) * eps
        p_hat = reconstruct_bds(c_hat)
        assert 0.5 * np.abs(p_hat - p_true).sum() <= 1.5 * dev + 1e-12
    assert bad / trials <= delta


def test_sweep_tomography_rows():
    from entbandit.tomography import sweep_tomography

    inst = reference_bds_instance()
    rows = sweep_tomography(inst, 0.05, [0.3, 0.1], trials=5, master_seed=55)
    assert [r["delta"] for r in rows] == [0.3, 0.1]
    for r in rows:
        t, n = required_shots(r["epsilon"], r["delta"])
        assert r["copies_per_state"] == n
        assert r["total_copies"] == n * inst.k
        assert 0.0 <= r["accuracy"] <= 1.0
    again = sweep_tomography(inst, 0.05, [0.3, 0.1], trials=5, master_seed=55)
    assert rows == again
