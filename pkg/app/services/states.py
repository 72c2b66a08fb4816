"""
Construction of the sigma_b family, its five pure components, pseudo-pure
states and the Uhlmann fidelity.

sigma_b = 7b/(7b+1) * sigma_insep + 1/(7b+1) * |phi_b><phi_b| with

    sigma_insep = 2/7 * sum_k |psi_k><psi_k| + 1/7 * |011><011|

so the five mixture weights are 2b/(7b+1) (x3), b/(7b+1) and 1/(7b+1).
"""
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple
import logging

import numpy as np
from pydantic import BaseModel

from app.core.errors import InvalidArgumentError, NumericalError
from app.services import qlinalg

logger = logging.getLogger(__name__)

DIM = 8
QUBIT_DIMS: Tuple[int, ...] = (2, 2, 2)
QUBIT_QUQUART_DIMS: Tuple[int, ...] = (2, 4)

NORM_TOL = 1e-12
DENSITY_HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10

# Thermal spin polarisation of a room-temperature NMR ensemble
THERMAL_EPSILON = 1e-5


def check_b(b: float) -> float:
    """Validate the family parameter; both endpoints are allowed."""
    b = float(b)
    if not np.isfinite(b) or not 0.0 <= b <= 1.0:
        raise InvalidArgumentError(f"b must lie in [0, 1], got {b}")
    return b


@dataclass(frozen=True)
class DensityOperator:
    """
    8x8 density operator with bipartition metadata.

    ``dims`` is (2, 2, 2) for the three-qubit view or (2, 4) for the
    qubit-ququart view; it never changes the entries.
    """

    matrix: np.ndarray
    dims: Tuple[int, ...] = QUBIT_DIMS

    def __post_init__(self):
        m = qlinalg.as_matrix(self.matrix, "density matrix")
        if m.shape != (DIM, DIM):
            raise InvalidArgumentError(f"Density operator must be {DIM}x{DIM}, got {m.shape}")
        if int(np.prod(self.dims)) != DIM:
            raise InvalidArgumentError(f"Bipartition dims {self.dims} do not multiply to {DIM}")
        if np.max(np.abs(m - m.conj().T)) > DENSITY_HERMITIAN_TOL:
            raise NumericalError("Density operator is not Hermitian")
        tr = np.trace(m)
        if abs(tr - 1.0) > TRACE_TOL:
            raise NumericalError(f"Density operator trace {tr.real:.15f} != 1")
        w_min = float(np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0])
        if w_min < -PSD_TOL:
            raise NumericalError(f"Density operator has negative eigenvalue {w_min:.3e}")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))

    @classmethod
    def from_matrix(cls, matrix, dims: Sequence[int] = QUBIT_DIMS, hermitize: bool = False) -> "DensityOperator":
        m = np.asarray(matrix, dtype=complex)
        if hermitize:
            m = 0.5 * (m + m.conj().T)
        return cls(matrix=m, dims=tuple(dims))

    def view(self, dims: Sequence[int]) -> "DensityOperator":
        return DensityOperator(matrix=self.matrix, dims=tuple(dims))

    def expect(self, op) -> complex:
        return complex(np.trace(self.matrix @ np.asarray(op, dtype=complex)))


@dataclass(frozen=True)
class PseudoPureState:
    """(1 - epsilon)/8 * I_8 + epsilon * pure_part."""

    epsilon: float
    pure_part: DensityOperator

    def __post_init__(self):
        if not 0.0 < self.epsilon <= 1.0:
            raise InvalidArgumentError(f"epsilon must lie in (0, 1], got {self.epsilon}")

    def assemble(self) -> DensityOperator:
        m = (1.0 - self.epsilon) / DIM * np.eye(DIM) + self.epsilon * self.pure_part.matrix
        return DensityOperator(matrix=m, dims=self.pure_part.dims)


class MixtureWeights(BaseModel):
    """Convex weights of the five pure components of sigma_b."""

    w_psi1: float
    w_psi2: float
    w_psi3: float
    w_011: float
    w_phi: float

    def as_tuple(self) -> Tuple[float, float, float, float, float]:
        return (self.w_psi1, self.w_psi2, self.w_psi3, self.w_011, self.w_phi)


def _normalized(amplitudes) -> np.ndarray:
    v = np.asarray(amplitudes, dtype=complex).reshape(-1)
    if abs(np.linalg.norm(v) - 1.0) > NORM_TOL:
        raise NumericalError(f"State is not normalized (norm {np.linalg.norm(v):.15f})")
    return v


def basis_state(bits: str) -> np.ndarray:
    """Computational-basis ket for a bit string such as '011' (qubit 1 first)."""
    if len(bits) != 3 or any(c not in "01" for c in bits):
        raise InvalidArgumentError(f"Expected a 3-bit string, got {bits!r}")
    v = np.zeros(DIM, dtype=complex)
    v[int(bits, 2)] = 1.0
    return v


def projector(psi) -> np.ndarray:
    v = np.asarray(psi, dtype=complex).reshape(-1)
    return np.outer(v, v.conj())


def pure_density(psi, dims: Sequence[int] = QUBIT_DIMS) -> DensityOperator:
    return DensityOperator(matrix=projector(_normalized(psi)), dims=tuple(dims))


def psi_k(k: int) -> np.ndarray:
    """
    The Bell-like components:
    psi_1 = (|000> + |101>)/sqrt2, psi_2 = (|001> + |110>)/sqrt2,
    psi_3 = (|010> + |111>)/sqrt2.
    """
    supports = {1: (0b000, 0b101), 2: (0b001, 0b110), 3: (0b010, 0b111)}
    if k not in supports:
        raise InvalidArgumentError(f"psi index must be 1, 2 or 3, got {k}")
    v = np.zeros(DIM, dtype=complex)
    for idx in supports[k]:
        v[idx] = 1.0 / np.sqrt(2.0)
    return _normalized(v)


def phi_b(b: float) -> np.ndarray:
    """|phi_b> = |1> (x) (sqrt(1+b)|00> + sqrt(1-b)|11>)/sqrt2."""
    b = check_b(b)
    v = np.zeros(DIM, dtype=complex)
    v[0b100] = np.sqrt(1.0 + b) / np.sqrt(2.0)
    v[0b111] = np.sqrt(1.0 - b) / np.sqrt(2.0)
    return _normalized(v)


def mixture_weights(b: float) -> MixtureWeights:
    b = check_b(b)
    norm = 7.0 * b + 1.0
    w_psi = 2.0 * b / norm
    return MixtureWeights(
        w_psi1=w_psi,
        w_psi2=w_psi,
        w_psi3=w_psi,
        w_011=b / norm,
        w_phi=1.0 / norm,
    )


def component_states(b: float) -> List[Tuple[str, np.ndarray]]:
    """The five pure components in mixture-weight order."""
    return [
        ("psi1", psi_k(1)),
        ("psi2", psi_k(2)),
        ("psi3", psi_k(3)),
        ("011", basis_state("011")),
        ("phi_b", phi_b(b)),
    ]


def sigma_insep() -> DensityOperator:
    m = sum(2.0 / 7.0 * projector(psi_k(k)) for k in (1, 2, 3))
    m = m + 1.0 / 7.0 * projector(basis_state("011"))
    return DensityOperator(matrix=m)


def sigma_b_mixture(b: float, dims: Sequence[int] = QUBIT_DIMS) -> DensityOperator:
    """sigma_b as the weighted sum of its five component projectors."""
    weights = mixture_weights(b).as_tuple()
    m = np.zeros((DIM, DIM), dtype=complex)
    for w, (_, psi) in zip(weights, component_states(b)):
        m += w * projector(psi)
    return DensityOperator(matrix=m, dims=tuple(dims))


def sigma_b_matrix(b: float, dims: Sequence[int] = QUBIT_DIMS) -> DensityOperator:
    """sigma_b written out entry by entry in the computational basis."""
    b = check_b(b)
    m = np.zeros((DIM, DIM), dtype=complex)
    for i in (0, 1, 2, 3, 5, 6):
        m[i, i] = b
    # coherences of psi_1, psi_2 and psi_3
    for i, j in ((0, 5), (1, 6), (2, 7)):
        m[i, j] = m[j, i] = b
    m[4, 4] = m[7, 7] = (1.0 + b) / 2.0
    m[4, 7] = m[7, 4] = np.sqrt(1.0 - b * b) / 2.0
    return DensityOperator(matrix=m / (1.0 + 7.0 * b), dims=tuple(dims))


def sigma_b(b: float, dims: Sequence[int] = QUBIT_DIMS) -> DensityOperator:
    return sigma_b_matrix(b, dims)


def maximally_mixed(dims: Sequence[int] = QUBIT_DIMS) -> DensityOperator:
    return DensityOperator(matrix=np.eye(DIM, dtype=complex) / DIM, dims=tuple(dims))


def pps(epsilon: float, pure: DensityOperator) -> DensityOperator:
    """
    Pseudo-pure state (1 - epsilon)/8 * I_8 + epsilon * pure.

    Raises:
        InvalidArgumentError: If epsilon is outside (0, 1]
    """
    return PseudoPureState(epsilon=float(epsilon), pure_part=pure).assemble()


def fidelity(rho_th: DensityOperator, rho_ex: DensityOperator) -> float:
    """
    Uhlmann fidelity F = [Tr sqrt(sqrt(rho_th) rho_ex sqrt(rho_th))]^2.

    Args:
        rho_th: Theoretically expected state
        rho_ex: Prepared (or reconstructed) state

    Returns:
        Fidelity in [0, 1]

    Raises:
        NumericalError: If either argument is not a valid density operator
    """
    if not isinstance(rho_th, DensityOperator) or not isinstance(rho_ex, DensityOperator):
        raise NumericalError("fidelity requires two DensityOperator arguments")
    root = qlinalg.psd_sqrt(rho_th.matrix)
    inner = root @ rho_ex.matrix @ root
    inner = 0.5 * (inner + inner.conj().T)
    w = np.clip(qlinalg.herm_eig(inner).eigenvalues, 0.0, None)
    f = float(np.sum(np.sqrt(w)) ** 2)
    return min(max(f, 0.0), 1.0)


def random_density_operator(
    seed: Optional[int] = None,
    rank: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> DensityOperator:
    """Ginibre-ensemble density operator G G^dagger / Tr(G G^dagger)."""
    rng = rng or np.random.default_rng(seed)
    rank = DIM if rank is None else int(rank)
    if not 1 <= rank <= DIM:
        raise InvalidArgumentError(f"rank must be in 1..{DIM}, got {rank}")
    g = rng.normal(size=(DIM, rank)) + 1j * rng.normal(size=(DIM, rank))
    m = g @ g.conj().T
    m = m / np.trace(m).real
    return DensityOperator(matrix=0.5 * (m + m.conj().T))
