"""Dense complex linear algebra for small (dim <= 4) Hilbert spaces.

Everything is a plain ``numpy`` array of ``complex128``; the helpers here add
the validation, propagator construction, and basis bookkeeping the rest of
the package relies on.  Basis orderings are fixed globally:

* two-qubit computational basis: ``(|00>, |01>, |10>, |11>)``, first label is
  qubit 0;
* single-excitation basis: ``(|10>, |01>)``;
* dressed basis: ``(|1~>, |0~>)`` with ``|1~> = (|10>+|01>)/sqrt(2)`` and
  ``|0~> = (|10>-|01>)/sqrt(2)``;
* three-level dressed triad: ``(|1~>, |0~>, |00>)``.
"""

from __future__ import annotations

import numpy as np

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10
TRACE_TOL = 1e-10
EIGENVALUE_FLOOR = -1e-9

ID2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)  # |0><1|
SIGMA_PLUS = np.array([[0, 0], [1, 0]], dtype=complex)   # |1><0|

# Dressed states in the single-excitation basis (|10>, |01>).
KET_DRESSED_1 = np.array([1, 1], dtype=complex) / np.sqrt(2.0)
KET_DRESSED_0 = np.array([1, -1], dtype=complex) / np.sqrt(2.0)

# Hadamard-like involution mapping the bare single-excitation basis to the
# dressed one; it is real, symmetric and its own inverse.
_DRESSED_CHANGE = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2.0)

# Index of the single-excitation basis states inside the two-qubit
# computational basis: |10> -> 2, |01> -> 1.
SINGLE_EXCITATION_INDICES = (2, 1)


def ket(dim: int, index: int) -> np.ndarray:
    """Computational basis vector |index> in a ``dim``-dimensional space."""
    if not 0 <= index < dim:
        raise ValueError(f"basis index {index} out of range for dim {dim}")
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def normalized(psi: np.ndarray) -> np.ndarray:
    """Return ``psi`` scaled to unit norm."""
    psi = np.asarray(psi, dtype=complex)
    n = np.linalg.norm(psi)
    if n == 0:
        raise ValueError("cannot normalize the zero vector")
    return psi / n


def density_from_ket(psi: np.ndarray) -> np.ndarray:
    """Rank-one density matrix |psi><psi| for a normalized state vector."""
    psi = normalized(psi)
    return np.outer(psi, psi.conj())


def hermiticity_defect(m: np.ndarray) -> float:
    """max |M - M^dagger| entrywise."""
    m = np.asarray(m, dtype=complex)
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0

def unitarity_defect(u: np.ndarray) -> float:
    """max |U^dagger U - I| entrywise."""
    u = np.asarray(u, dtype=complex)
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))

def is_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return hermiticity_defect(m) < tol

def is_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    return unitarity_defect(u) < tol


def check_density_matrix(rho: np.ndarray, *, hermitian_tol: float = HERMITIAN_TOL,
                         trace_tol: float = TRACE_TOL,
                         eigenvalue_floor: float = EIGENVALUE_FLOOR) -> None:
    """Validate Hermiticity, unit trace and positivity of a density matrix.

    Raises ``ValueError`` naming the violated property.  The positivity check
    tolerates tiny negative eigenvalues down to ``eigenvalue_floor``.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    defect = hermiticity_defect(rho)
    if defect >= hermitian_tol:
        raise ValueError(f"density matrix not Hermitian (defect {defect:.3e})")
    tr = rho.trace()
    if abs(tr - 1.0) >= trace_tol:
        raise ValueError(f"density matrix trace {tr:.12f} != 1")
    w = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    if w.min() < eigenvalue_floor:
        raise ValueError(f"density matrix has negative eigenvalue {w.min():.3e}")


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor product of two operators (row-major, qubit 0 on the left)."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def hermitian_expm(h: np.ndarray, scale: float = 1.0,
                   tol: float = 1e-9) -> np.ndarray:
    """Unitary propagator ``exp(-i * scale * h)`` of a Hermitian generator.

    Uses the eigendecomposition of ``h``, which is exact at these dimensions
    and keeps the result unitary to machine precision.  Rejects arguments
    whose Hermiticity defect exceeds ``tol``.
    """
    h = np.asarray(h, dtype=complex)
    defect = hermiticity_defect(h)
    if defect >= tol:
        raise ValueError(f"hermitian_expm requires a Hermitian matrix "
                         f"(defect {defect:.3e} >= {tol:.1e})")
    w, v = np.linalg.eigh(0.5 * (h + h.conj().T))
    return (v * np.exp(-1j * scale * w)) @ v.conj().T


def hermitian_expm_batch(h: np.ndarray, scale: float = 1.0) -> np.ndarray:
    """Batched ``exp(-i * scale * h_k)`` over a stack of Hermitian matrices.

    No Hermiticity check per element; callers build the stack from operators
    already known to be Hermitian.
    """
    h = np.asarray(h, dtype=complex)
    w, v = np.linalg.eigh(h)
    phases = np.exp(-1j * scale * w)
    return np.einsum("...ij,...j,...kj->...ik", v, phases, v.conj())


def pauli_strings(n_qubits: int) -> list[np.ndarray]:
    """The 4^n - 1 non-identity Pauli strings on ``n_qubits`` qubits.

    Unnormalized (entries in {0, +-1, +-i}), traceless and trace-orthogonal:
    Tr[P_i P_j] = d * delta_ij with d = 2^n.  Ordering is lexicographic in
    (I, X, Y, Z) labels with the identity string dropped.
    """
    if n_qubits not in (1, 2):
        raise ValueError("pauli_strings supports 1 or 2 qubits")
    singles = [ID2, SIGMA_X, SIGMA_Y, SIGMA_Z]
    if n_qubits == 1:
        return [SIGMA_X, SIGMA_Y, SIGMA_Z]
    strings = []
    for a in singles:
        for b in singles:
            strings.append(np.kron(a, b))
    return strings[1:]  # drop identity x identity


def dressed_basis_change(op: np.ndarray) -> np.ndarray:
    """Conjugate a single-excitation operator into the dressed basis.

    The input is 2x2 in the bare basis ``(|10>, |01>)``; the output is the
    same operator in ``(|1~>, |0~>)``.  The change-of-basis matrix is a real
    involution, so applying this twice returns the input.  Longitudinal
    detuning noise ``diag(1, -1)/2`` maps to the transverse ``sigma_x / 2``.
    """
    op = np.asarray(op, dtype=complex)
    if op.shape != (2, 2):
        raise ValueError(f"expected a 2x2 single-excitation operator, got {op.shape}")
    return _DRESSED_CHANGE @ op @ _DRESSED_CHANGE


def embed_single_excitation(op: np.ndarray, dim: int = 4) -> np.ndarray:
    """Embed a 2x2 single-excitation operator into the two-qubit space.

    Rows/columns outside the ``(|10>, |01>)`` block are zero; the embedded
    operator annihilates |00> and |11>.
    """
    op = np.asarray(op, dtype=complex)
    if op.shape != (2, 2):
        raise ValueError(f"expected a 2x2 operator, got {op.shape}")
    out = np.zeros((dim, dim), dtype=complex)
    idx = SINGLE_EXCITATION_INDICES
    for i in range(2):
        for j in range(2):
            out[idx[i], idx[j]] = op[i, j]
    return out
