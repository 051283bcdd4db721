import numpy as np
import pytest

from entbandit.linalg import (
    BELL_KETS,
    ID2,
    PAULI_X,
    PAULI_Z,
    hermitian_eigensystem,
    is_density_matrix,
    ket,
    partial_trace,
    partial_transpose,
    projector,
    tensor,
    validate_density_matrix,
)


def test_tensor_identity_and_paulis():
    assert np.allclose(tensor(ID2, ID2), np.eye(4))
    assert np.allclose(tensor(PAULI_Z, PAULI_Z), np.diag([1, -1, -1, 1]))


def test_tensor_bit_flip_on_both_qubits():
    xx = tensor(PAULI_X, PAULI_X)
    assert np.allclose(xx @ ket("00"), ket("11"))


def test_tensor_rejects_non_square():
    with pytest.raises(ValueError):
        tensor(np.ones((2, 3)), ID2)


def test_tensor_associative():
    from entbandit.linalg import PAULI_Y

    # exact equality for exactly representable entries (the operator algebra
    # this package builds on), allclose for general floats
    for a, b, c in [(PAULI_X, PAULI_Y, PAULI_Z), (ID2, PAULI_X, PAULI_Z)]:
        assert np.array_equal(tensor(tensor(a, b), c), tensor(a, tensor(b, c)))
    rng = np.random.default_rng(3)
    a, b, c = (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)) for _ in range(3))
    assert np.allclose(tensor(tensor(a, b), c), tensor(a, tensor(b, c)), atol=1e-13)


def test_partial_transpose_maximally_mixed_invariant():
    assert np.allclose(partial_transpose(np.eye(4) / 4), np.eye(4) / 4)


def test_partial_transpose_bell_state_gives_swap_over_two():
    rho = projector(BELL_KETS["phi_plus"])
    pt = partial_transpose(rho)
    swap = np.zeros((4, 4), dtype=complex)
    for a in "01":
        for b in "01":
            swap += np.outer(ket(a + b), ket(b + a).conj())
    assert np.allclose(pt, swap / 2)
    eigs = np.linalg.eigvalsh(pt)
    assert np.allclose(np.sort(eigs), [-0.5, 0.5, 0.5, 0.5])


def test_partial_transpose_is_involution():
    rng = np.random.default_rng(11)
    m = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    assert np.array_equal(partial_transpose(partial_transpose(m)), m)


def test_partial_transpose_preserves_trace_and_hermiticity():
    rng = np.random.default_rng(12)
    g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    rho = g @ g.conj().T
    rho /= np.trace(rho)
    pt = partial_transpose(rho)
    assert abs(np.trace(pt) - 1.0) < 1e-12
    assert np.max(np.abs(pt - pt.conj().T)) < 1e-12


def test_hermitian_eigensystem_diagonal():
    w, v = hermitian_eigensystem(np.diag([3.0, 1.0, 2.0, 0.0]).astype(complex))
    assert np.allclose(w, [0, 1, 2, 3])
    assert np.allclose(v.conj().T @ v, np.eye(4), atol=1e-12)


def test_hermitian_eigensystem_rank_one_projector():
    w, _ = hermitian_eigensystem(projector(BELL_KETS["phi_plus"]))
    assert np.allclose(w, [0, 0, 0, 1], atol=1e-12)


def test_hermitian_eigensystem_reconstruction_contract():
    rng = np.random.default_rng(5)
    for _ in range(20):
        g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        m = g + g.conj().T
        w, v = hermitian_eigensystem(m)
        assert np.all(np.diff(w) >= -1e-12)
        assert np.max(np.abs(m - (v * w) @ v.conj().T)) < 1e-10
        assert abs(w.sum() - np.trace(m).real) < 1e-10
        assert np.max(np.abs(v.conj().T @ v - np.eye(4))) < 1e-10


def test_hermitian_eigensystem_rejects_non_hermitian():
    m = np.eye(4, dtype=complex)
    m[0, 1] = 1e-6
    with pytest.raises(ValueError):
        hermitian_eigensystem(m)


def test_partial_trace_product_state():
    rng = np.random.default_rng(8)

    def rand_dm(d):
        g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        r = g @ g.conj().T
        return r / np.trace(r)

    sigma, tau = rand_dm(4), rand_dm(4)
    full = np.kron(sigma, tau)  # qubits (0,1) hold sigma, (2,3) hold tau
    assert np.allclose(partial_trace(full, keep=(2, 3)), tau, atol=1e-12)
    assert np.allclose(partial_trace(full, keep=(0, 1)), sigma, atol=1e-12)


def test_partial_trace_maximally_mixed():
    assert np.allclose(partial_trace(np.eye(16) / 16, keep=(1, 2)), np.eye(4) / 4)


def test_partial_trace_preserves_trace():
    rng = np.random.default_rng(21)
    g = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
    rho = g @ g.conj().T
    rho /= np.trace(rho)
    out = partial_trace(rho, keep=(0, 3))
    assert abs(np.trace(out) - 1.0) < 1e-12


def test_partial_trace_invalid_selection():
    with pytest.raises(ValueError):
        partial_trace(np.eye(16), keep=(0, 4))
    with pytest.raises(ValueError):
        partial_trace(np.eye(16), keep=(2, 2))


def test_validate_density_matrix_flags_defects():
    good = np.eye(4, dtype=complex) / 4
    validate_density_matrix(good)
    assert is_density_matrix(good)

    not_trace = np.eye(4, dtype=complex) / 2
    assert not is_density_matrix(not_trace)

    not_herm = good.copy()
    not_herm[0, 1] = 1e-6
    assert not is_density_matrix(not_herm)

    not_psd = np.diag([0.6, 0.6, -0.1, -0.1]).astype(complex)
    assert not is_density_matrix(not_psd)
