"""Dense complex linear algebra for one-, two- and four-qubit operators.

Everything here works on plain ``numpy`` arrays of ``complex128``. Matrices
are small (2x2 up to 16x16), so clarity beats cleverness throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Tolerances",
    "TOL",
    "ID2",
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
    "KET_0",
    "KET_1",
    "BELL_KETS",
    "BELL_ORDER",
    "ket",
    "projector",
    "dagger",
    "tensor",
    "partial_transpose",
    "partial_trace",
    "hermitian_eigensystem",
    "validate_density_matrix",
    "is_density_matrix",
]


@dataclass(frozen=True)
class Tolerances:
    """Shared numeric tolerances.

    ``structural`` guards decompositions and eigenvalue floors,
    ``arithmetic`` guards identities that hold up to rounding only
    (hermiticity, traces, probability sums).
    """

    structural: float = 1e-10
    arithmetic: float = 1e-12


TOL = Tolerances()

ID2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)

KET_0 = np.array([1, 0], dtype=complex)
KET_1 = np.array([0, 1], dtype=complex)


def ket(bits: str) -> np.ndarray:
    """Computational-basis ket for a bitstring, first character = first qubit."""
    out = np.array([1.0 + 0j])
    for b in bits:
        out = np.kron(out, KET_1 if b == "1" else KET_0)
    return out


# Maximally entangled two-qubit kets; BELL_ORDER fixes the canonical ordering
# used for mixture weights everywhere in the package.
BELL_KETS = {
    "phi_plus": (ket("00") + ket("11")) / np.sqrt(2.0),
    "phi_minus": (ket("00") - ket("11")) / np.sqrt(2.0),
    "psi_plus": (ket("01") + ket("10")) / np.sqrt(2.0),
    "psi_minus": (ket("01") - ket("10")) / np.sqrt(2.0),
}
BELL_ORDER = ("phi_plus", "psi_plus", "psi_minus", "phi_minus")


def projector(v: np.ndarray) -> np.ndarray:
    """Rank-1 projector |v><v| (v need not be normalized)."""
    v = np.asarray(v, dtype=complex)
    n2 = np.vdot(v, v).real
    return np.outer(v, v.conj()) / n2


def dagger(m: np.ndarray) -> np.ndarray:
    return np.asarray(m).conj().T


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product of two square matrices."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"tensor: first factor is not square, shape {a.shape}")
    if b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise ValueError(f"tensor: second factor is not square, shape {b.shape}")
    return np.kron(a, b)


def partial_transpose(rho: np.ndarray) -> np.ndarray:
    """Transpose of the second qubit of a 4x4 two-qubit operator.

    Preserves trace and hermiticity; applying it twice is the identity.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError(f"partial_transpose expects a 4x4 matrix, got {rho.shape}")
    r = rho.reshape(2, 2, 2, 2)
    return r.transpose(0, 3, 2, 1).reshape(4, 4)


def partial_trace(m: np.ndarray, keep: tuple[int, ...]) -> np.ndarray:
    """Trace out all qubits of a multi-qubit operator except ``keep``.

    ``m`` is ``2^n x 2^n`` with qubit 0 as the most significant index;
    ``keep`` lists the qubit positions to retain, in order.
    """
    m = np.asarray(m, dtype=complex)
    dim = m.shape[0]
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"partial_trace expects a square matrix, got {m.shape}")
    n = int(round(np.log2(dim)))
    if 2**n != dim:
        raise ValueError(f"partial_trace: dimension {dim} is not a power of two")
    keep = tuple(keep)
    if len(set(keep)) != len(keep) or any(q < 0 or q >= n for q in keep):
        raise ValueError(f"partial_trace: invalid qubit selection {keep} for {n} qubits")
    traced = [q for q in range(n) if q not in keep]
    t = m.reshape((2,) * (2 * n))
    for q in sorted(traced, reverse=True):
        t = np.trace(t, axis1=q, axis2=q + (t.ndim // 2))
    # np.trace contracts pairs but leaves remaining axes in row/col order
    k = len(keep)
    # axes are currently (kept row axes ..., kept col axes ...) in the original
    # relative order; reorder rows to the order requested by ``keep``
    order = np.argsort(np.argsort(keep))
    t = t.transpose(tuple(order) + tuple(order + k))
    return t.reshape(2**k, 2**k)


def hermitian_eigensystem(m: np.ndarray, tol: float = TOL.structural) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.

    Raises ``ValueError`` if the input deviates from Hermitian by more than
    ``tol`` in any entry. Columns of the returned matrix are eigenvectors.
    """
    m = np.asarray(m, dtype=complex)
    dev = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
    if dev > tol:
        raise ValueError(f"hermitian_eigensystem: input not Hermitian (max deviation {dev:.3e})")
    w, v = np.linalg.eigh(m)
    return w, v


def validate_density_matrix(rho: np.ndarray, name: str = "rho", tol: Tolerances = TOL) -> np.ndarray:
    """Check hermiticity, unit trace and positivity; return the array.

    Eigenvalues are allowed to dip to ``-tol.structural`` to absorb rounding.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError(f"{name}: expected a 4x4 density matrix, got shape {rho.shape}")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > tol.arithmetic:
        raise ValueError(f"{name}: not Hermitian (max deviation {herm:.3e})")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > tol.arithmetic:
        raise ValueError(f"{name}: trace is {tr!r}, expected 1")
    lo = float(np.linalg.eigvalsh(rho)[0])
    if lo < -tol.structural:
        raise ValueError(f"{name}: negative eigenvalue {lo:.3e}")
    return rho


def is_density_matrix(rho: np.ndarray, tol: Tolerances = TOL) -> bool:
    try:
        validate_density_matrix(rho, tol=tol)
    except ValueError:
        return False
    return True
