"""
Dense complex linear algebra for small Hermitian problems.

Qubit ordering is fixed everywhere: the leftmost tensor factor is qubit 1 and
the most significant bit of a computational-basis index, so row ``0b101`` is
``|101>``.
"""
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, List, Optional, Sequence, Tuple
import itertools
import logging

import numpy as np

from app.core.errors import InvalidArgumentError, NumericalError

logger = logging.getLogger(__name__)

# Tolerances (overridable per call)
HERMITIAN_TOL = 1e-10
PSD_CLIP_TOL = 1e-10
JACOBI_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100
UNITARY_TOL = 1e-10

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = {"I": I2, "X": SX, "Y": SY, "Z": SZ}

# |0><0| and |1><1|
P0 = np.array([[1, 0], [0, 0]], dtype=complex)
P1 = np.array([[0, 0], [0, 1]], dtype=complex)


@dataclass(frozen=True)
class HermEigResult:
    """Spectral decomposition of a Hermitian matrix (ascending eigenvalues)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sweeps: int = 0

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """
    Coerce input to a finite, square complex128 array.

    Raises:
        InvalidArgumentError: If the input is not square or has non-finite entries
    """
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise InvalidArgumentError(f"{name} must be a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidArgumentError(f"{name} has non-finite entries")
    return m


def matmul(a, b) -> np.ndarray:
    """Matrix product of two square matrices of equal dimension."""
    a, b = as_matrix(a, "a"), as_matrix(b, "b")
    if a.shape != b.shape:
        raise InvalidArgumentError(f"Dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    return a @ b


def dagger(a) -> np.ndarray:
    return as_matrix(a).conj().T


def tensor(a, b) -> np.ndarray:
    """Kronecker product; ``a`` is the more significant (leftmost) factor."""
    return np.kron(as_matrix(a, "a"), as_matrix(b, "b"))


def kron_all(*ops) -> np.ndarray:
    return reduce(np.kron, ops)


def embed(op, qubit: int, n_qubits: int = 3) -> np.ndarray:
    """Place a one-qubit operator on ``qubit`` (1-based) of an n-qubit register."""
    if not 1 <= qubit <= n_qubits:
        raise InvalidArgumentError(f"Qubit index {qubit} out of range 1..{n_qubits}")
    factors = [I2] * n_qubits
    factors[qubit - 1] = np.asarray(op, dtype=complex)
    return kron_all(*factors)


def trace(a) -> complex:
    return complex(np.trace(as_matrix(a)))


def frobenius_distance(a, b) -> float:
    a, b = as_matrix(a, "a"), as_matrix(b, "b")
    if a.shape != b.shape:
        raise InvalidArgumentError(f"Dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    return float(np.linalg.norm(a - b))


def is_hermitian(a, tol: float = HERMITIAN_TOL) -> bool:
    m = as_matrix(a)
    return bool(np.max(np.abs(m - m.conj().T)) <= tol)


def is_unitary(u, tol: float = UNITARY_TOL) -> bool:
    m = as_matrix(u)
    return bool(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))) <= tol)


def _check_dims(m: np.ndarray, dims: Sequence[int]) -> Tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 1 for d in dims) or int(np.prod(dims)) != m.shape[0]:
        raise InvalidArgumentError(f"Factor dims {list(dims)} do not match matrix dimension {m.shape[0]}")
    return dims


def partial_transpose(rho, dims: Sequence[int], which: int) -> np.ndarray:
    """
    Transpose only the tensor factor ``which`` (0-based).

    Args:
        rho: Square matrix on the product space
        dims: Factor dimensions, most significant first
        which: Index of the factor to transpose

    Returns:
        The partially transposed matrix

    Raises:
        InvalidArgumentError: If dims do not multiply to the matrix dimension
    """
    m = as_matrix(rho, "rho")
    dims = _check_dims(m, dims)
    k = len(dims)
    if not 0 <= which < k:
        raise InvalidArgumentError(f"Factor index {which} out of range for dims {list(dims)}")
    t = m.reshape(dims + dims)
    t = np.swapaxes(t, which, which + k)
    return t.reshape(m.shape)


def partial_trace(rho, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Reduced operator on the factors listed in ``keep`` (0-based)."""
    m = as_matrix(rho, "rho")
    dims = _check_dims(m, dims)
    keep = sorted(set(int(i) for i in keep))
    if any(not 0 <= i < len(dims) for i in keep):
        raise InvalidArgumentError(f"Kept factors {keep} out of range for dims {list(dims)}")

    t = m.reshape(dims + dims)
    n = len(dims)
    for i in reversed(range(len(dims))):
        if i in keep:
            continue
        t = np.trace(t, axis1=i, axis2=i + n)
        n -= 1
    d_keep = int(np.prod([dims[i] for i in keep])) if keep else 1
    return t.reshape(d_keep, d_keep)


def _symmetrized(h, tol: float) -> np.ndarray:
    m = as_matrix(h, "h")
    if np.max(np.abs(m - m.conj().T)) > tol:
        raise NumericalError("Matrix is not Hermitian within tolerance")
    return 0.5 * (m + m.conj().T)


def off_diagonal_norm(a: np.ndarray) -> float:
    """Frobenius norm of the strictly off-diagonal part."""
    return float(np.linalg.norm(a - np.diag(np.diag(a))))


def jacobi_eigh(
    h,
    tol: float = JACOBI_TOL,
    max_sweeps: int = JACOBI_MAX_SWEEPS,
    hermitian_tol: float = HERMITIAN_TOL,
) -> HermEigResult:
    """
    Cyclic complex Jacobi diagonalization.

    Each pivot (p, q) first removes the phase of a[p, q] with a diagonal
    unitary, then applies the real Jacobi rotation that zeroes it.
    Sweeps stop once the off-diagonal norm is below tol * max(1, ||H||_F).

    Raises:
        NumericalError: On non-Hermitian input or if the sweep cap is hit
    """
    a = _symmetrized(h, hermitian_tol).copy()
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    threshold = tol * max(1.0, float(np.linalg.norm(a)))

    for sweep in range(max_sweeps + 1):
        off = off_diagonal_norm(a)
        if off < threshold:
            order = np.argsort(np.real(np.diag(a)), kind="stable")
            logger.debug(f"Jacobi converged after {sweep} sweeps (off-norm {off:.2e})")
            return HermEigResult(
                eigenvalues=np.real(np.diag(a))[order],
                eigenvectors=v[:, order],
                sweeps=sweep,
            )
        if sweep == max_sweeps:
            break

        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r < 1e-300:
                    continue
                phase = apq / r
                app, aqq = a[p, p].real, a[q, q].real
                phi = (aqq - app) / (2.0 * r)
                t = 1.0 / (abs(phi) + np.sqrt(phi * phi + 1.0))
                if phi < 0.0:
                    t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c

                u = np.eye(n, dtype=complex)
                u[p, p] = c
                u[p, q] = s
                u[q, p] = -s * np.conj(phase)
                u[q, q] = c * np.conj(phase)

                a = u.conj().T @ a @ u
                a[p, q] = a[q, p] = 0.0
                v = v @ u

    raise NumericalError(f"Jacobi eigensolver did not converge in {max_sweeps} sweeps")


def herm_eig(h, method: str = "lapack", tol: float = HERMITIAN_TOL) -> HermEigResult:
    """
    Spectral decomposition of a Hermitian matrix.

    Args:
        h: Hermitian matrix (symmetrized internally)
        method: "lapack" (numpy.linalg.eigh) or "jacobi"
        tol: Hermiticity tolerance

    Returns:
        HermEigResult with ascending eigenvalues and matching eigenvector columns

    Raises:
        NumericalError: If the input is not Hermitian or the solver fails
    """
    if method == "jacobi":
        return jacobi_eigh(h, hermitian_tol=tol)
    if method != "lapack":
        raise InvalidArgumentError(f"Unknown eigensolver method: {method}")

    m = _symmetrized(h, tol)
    try:
        w, v = np.linalg.eigh(m)
    except np.linalg.LinAlgError as e:
        raise NumericalError(f"Eigensolver failed: {e}") from e
    return HermEigResult(eigenvalues=w, eigenvectors=v)


def min_eigenvalue(h, tol: float = HERMITIAN_TOL) -> float:
    return float(herm_eig(h, tol=tol).eigenvalues[0])


def psd_sqrt(a, clip_tol: float = PSD_CLIP_TOL) -> np.ndarray:
    """
    Hermitian positive square root.

    Eigenvalues in [-clip_tol, 0) are treated as zero.

    Raises:
        NumericalError: If an eigenvalue is below -clip_tol
    """
    eig = herm_eig(a)
    w = eig.eigenvalues
    if w[0] < -clip_tol:
        raise NumericalError(f"Matrix has significantly negative eigenvalue {w[0]:.3e}")
    root = np.sqrt(np.clip(w, 0.0, None))
    v = eig.eigenvectors
    return (v * root) @ v.conj().T


def pauli_basis(n_qubits: int = 3) -> List[Tuple[str, np.ndarray]]:
    """All 4**n tensor-product Pauli operators, identity first, labels like 'IXZ'."""
    basis = []
    for labels in itertools.product("IXYZ", repeat=n_qubits):
        basis.append(("".join(labels), kron_all(*(PAULIS[c] for c in labels))))
    return basis


def random_hermitian(dim: int, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """H = A + A^dagger with complex Gaussian A."""
    rng = rng or np.random.default_rng()
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return a + a.conj().T
