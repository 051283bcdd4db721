import numpy as np
import pytest

from entbandit.linalg import BELL_KETS, projector
from entbandit.sampler import (
    ArmSampler,
    CountStore,
    MitigationError,
    NoiseModel,
    apply_readout_noise,
    apply_readout_noise_batch,
    counts_to_parity_expectations,
    largest_remainder_round,
    mitigate_counts,
    noisy_outcome_distribution,
    probs_from_parity_expectations,
    pull,
    sample_outcome,
    substream,
)
from entbandit.states import depolarized_bell, make_instance, StateSpec
from entbandit.witness import build_wbm, outcome_probs


def test_sample_outcome_deterministic_measurement():
    wbm = build_wbm(2)
    rho = projector(BELL_KETS["phi_plus"])
    rng = substream(1, 2)
    assert all(sample_outcome(rho, wbm, rng) == 3 for _ in range(100))


def test_sample_outcome_seed_determinism():
    wbm = build_wbm(1)
    rho = depolarized_bell("psi_minus", 0.4)
    a = [sample_outcome(rho, wbm, substream(7, 1, i)) for i in range(50)]
    b = [sample_outcome(rho, wbm, substream(7, 1, i)) for i in range(50)]
    assert a == b


def test_sample_outcome_uniform_frequencies():
    wbm = build_wbm(3)
    rho = np.eye(4) / 4
    n = 100_000
    sampler = ArmSampler(outcome_probs(rho, wbm), substream(3, 9))
    counts = np.zeros(4)
    for _ in range(n):
        counts[sampler.pull() - 1] += 1
    # 4 sigma of a binomial quarter
    sigma = np.sqrt(n * 0.25 * 0.75)
    assert np.max(np.abs(counts - n / 4)) < 4 * sigma


def test_readout_noise_identity_and_full_flip():
    rng = substream(5, 5)
    ident = NoiseModel.identity()
    assert all(apply_readout_noise(y, ident, rng) == y for y in (1, 2, 3, 4))
    full = NoiseModel.symmetric_flip(1.0)
    assert [apply_readout_noise(y, full, rng) for y in (1, 2, 3, 4)] == [4, 3, 2, 1]


def test_readout_noise_confusion_matches_joint_matrix():
    p = 0.02
    noise = NoiseModel.symmetric_flip(p)
    n = 1_000_000
    rng = substream(11, 0)
    true = np.repeat([1, 2, 3, 4], n // 4)
    observed = apply_readout_noise_batch(true, noise, rng)
    joint = noise.joint()
    for t in range(4):
        obs = observed[true == t + 1]
        for o in range(4):
            got = np.mean(obs == o + 1)
            expect = joint[o, t]
            sigma = np.sqrt(expect * (1 - expect) / (n // 4)) + 1e-9
            assert abs(got - expect) < 4 * sigma + 1e-6


def test_noise_model_validation_and_json():
    with pytest.raises(ValueError):
        NoiseModel(np.array([[0.9, 0.2], [0.2, 0.8]]), np.eye(2))
    noise = NoiseModel.symmetric_flip(0.05, 0.02)
    again = NoiseModel.from_json_dict(noise.to_json_dict())
    assert np.array_equal(noise.assignment_q0, again.assignment_q0)
    assert np.array_equal(noise.assignment_q1, again.assignment_q1)


def test_largest_remainder_round():
    assert largest_remainder_round(np.array([1.0, 1.0, 1.0, 1.0]), 10) == [3, 3, 2, 2]
    assert sum(largest_remainder_round(np.array([0.1, 0.9, 0.0, 0.0]), 7)) == 7
    assert largest_remainder_round(np.array([0.0, 0.0, 1.0, 0.0]), 5) == [0, 0, 5, 0]


def test_mitigate_counts_identity_noise_is_fixed_point():
    store = CountStore()
    for y, c in zip((1, 2, 3, 4), (10, 20, 30, 40)):
        for _ in range(c):
            store.record(y)
    mitigate_counts(store, NoiseModel.identity())
    assert store.working == [10, 20, 30, 40]
    assert store.mitigations == 1 and store.since_mitigation == 0


def test_mitigate_counts_singular_matrix_raises():
    store = CountStore()
    store.record(1)
    bad = NoiseModel(np.array([[0.5, 0.5], [0.5, 0.5]]), np.eye(2))
    with pytest.raises(MitigationError):
        mitigate_counts(store, bad)


def test_mitigate_counts_uniform_is_statistical_fixed_point():
    p_flip = 0.02
    noise = NoiseModel.symmetric_flip(p_flip)
    n = 200_000
    rng = substream(13, 1)
    sampler = ArmSampler(np.full(4, 0.25), rng, noise=noise)
    for _ in range(n):
        sampler.pull()
    mitigate_counts(sampler.store, noise)
    f = sampler.store.frequencies()
    sigma = np.sqrt(0.25 * 0.75 / n)
    assert np.max(np.abs(f - 0.25)) < 4 * sigma + 4 / n


def test_mitigation_removes_known_bias():
    truth = np.array([0.1, 0.1, 0.7, 0.1])
    noise = NoiseModel.symmetric_flip(0.05)
    biased = noise.joint() @ truth
    assert biased[2] < truth[2] - 0.05  # third outcome biased visibly low
    n = 400_000
    sampler = ArmSampler(truth, substream(17, 3), noise=noise)
    for _ in range(n):
        sampler.pull()
    raw_f = np.asarray(sampler.store.raw, dtype=float) / n
    sigma = np.sqrt(biased * (1 - biased) / n)
    assert np.max(np.abs(raw_f - biased)) < 4 * np.max(sigma)
    mitigate_counts(sampler.store, noise)
    f = sampler.store.frequencies()
    # mitigated estimate unbiased within 4 sigma of the multinomial noise
    assert np.max(np.abs(f - truth)) < 4 * np.max(sigma) + 4 / n


def test_pull_cadence_invokes_mitigation_exactly():
    inst = make_instance(
        [
            StateSpec("BellDiagonal", {"p": [0.25, 0.25, 0.25, 0.25]}),
            StateSpec("BellDiagonal", {"p": [0.7, 0.1, 0.1, 0.1]}),
        ]
    )
    noise = NoiseModel.symmetric_flip(0.02)
    store = CountStore()
    rng = substream(19, 0)
    for _ in range(200):
        pull(0, inst, build_wbm(1), noise, 50, store, rng)
    assert store.pulls == 200
    assert store.mitigations == 4
    assert sum(store.working) == 200 and sum(store.raw) == 200


def test_pull_without_mitigation_matches_raw_tallies():
    inst = make_instance(
        [
            StateSpec("BellDiagonal", {"p": [0.25, 0.25, 0.25, 0.25]}),
            StateSpec("BellDiagonal", {"p": [0.7, 0.1, 0.1, 0.1]}),
        ]
    )
    store = CountStore()
    rng = substream(23, 0)
    for _ in range(500):
        pull(1, inst, build_wbm(2), None, None, store, rng)
    assert store.raw == store.working
    assert store.pulls == 500 == sum(store.raw)


def test_noiseless_mitigation_only_moves_counts_by_rounding():
    n = 10_000
    probs = np.array([0.4, 0.3, 0.2, 0.1])
    sampler = ArmSampler(probs, substream(29, 1), noise=NoiseModel.identity(), mitigation_cadence=100)
    for _ in range(n):
        sampler.pull()
    raw = np.asarray(sampler.store.raw, dtype=float) / n
    work = np.asarray(sampler.store.working, dtype=float) / n
    assert np.max(np.abs(raw - work)) <= 4.0 / n


def test_parity_expectation_round_trip_is_exact():
    from entbandit.sampler import counts_from_parity_sums

    rng = substream(31, 4)
    for _ in range(200):
        counts = [int(x) for x in rng.integers(0, 500, size=4)]
        n = sum(counts)
        if n == 0:
            continue
        iz, zi, zz = counts_to_parity_expectations(counts)
        assert counts_from_parity_sums(n, iz, zi, zz) == counts
        f = probs_from_parity_expectations(iz / n, zi / n, zz / n)
        assert np.max(np.abs(f - np.asarray(counts, dtype=float) / n)) <= 1e-15


def test_noisy_distribution_composition():
    probs = np.array([0.5, 0.25, 0.125, 0.125])
    noise = NoiseModel.symmetric_flip(0.1, 0.3)
    assert np.allclose(noisy_outcome_distribution(probs, noise), noise.joint() @ probs)
    assert np.array_equal(noisy_outcome_distribution(probs, None), probs)
    disabled = NoiseModel.identity(enabled=False)
    assert np.array_equal(noisy_outcome_distribution(probs, disabled), probs)


def test_arm_sampler_copy_accounting_and_determinism():
    probs = np.array([0.3, 0.3, 0.2, 0.2])

    def run():
        s = ArmSampler(probs, substream(37, 0))
        return [s.pull() for _ in range(5000)], s.store

    seq_a, store_a = run()
    seq_b, store_b = run()
    assert seq_a == seq_b
    assert store_a.raw == store_b.raw
    assert store_a.pulls == 5000 == sum(store_a.raw)
