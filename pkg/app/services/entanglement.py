"""
Witness observables, the four separability inequalities, and PPT tests.

Every three-qubit separable state obeys |<B1> +- <B2> +- <B3>| <= 1 for

    B1 = I (x) X (x) X,  B2 = I (x) Y (x) Y,  B3 = Z (x) Z (x) Z
"""
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple
import logging

import numpy as np
from pydantic import BaseModel

from app.core.errors import InvalidArgumentError, NumericalError
from app.services import qlinalg
from app.services.qlinalg import I2, SX, SY, SZ
from app.services.states import (
    DensityOperator,
    QUBIT_DIMS,
    QUBIT_QUQUART_DIMS,
    check_b,
    projector,
)

logger = logging.getLogger(__name__)

VERDICT_TOL = 1e-9
PPT_TOL = 1e-10
IMAG_TOL = 1e-10

# Sign pairs applied to (<B2>, <B3>), in reporting order
SIGN_CHOICES: Tuple[Tuple[int, int], ...] = ((1, 1), (1, -1), (-1, 1), (-1, -1))


@dataclass(frozen=True)
class Observable:
    matrix: np.ndarray
    label: str


class WitnessReport(BaseModel):
    """Expectation values and the four signed inequality values."""

    b1: float
    b2: float
    b3: float
    four_values: List[float]
    max_value: float
    max_signs: Tuple[int, int]
    violated: bool


class PptReport(BaseModel):
    bipartition: str
    dims: List[int]
    transposed_factor: int
    min_eigenvalue: float
    is_ppt: bool


def observables() -> Tuple[Observable, Observable, Observable]:
    return (
        Observable(qlinalg.kron_all(I2, SX, SX), "B1"),
        Observable(qlinalg.kron_all(I2, SY, SY), "B2"),
        Observable(qlinalg.kron_all(SZ, SZ, SZ), "B3"),
    )


def expectation(rho: DensityOperator, o: Observable, imag_tol: float = IMAG_TOL) -> float:
    """
    Tr(rho O) as a real number.

    Raises:
        NumericalError: If the imaginary part exceeds ``imag_tol``
    """
    value = rho.expect(o.matrix)
    if abs(value.imag) > imag_tol:
        raise NumericalError(f"<{o.label}> has imaginary part {value.imag:.3e}")
    return float(value.real)


def witness_from_expectations(
    b1: float, b2: float, b3: float, verdict_tol: float = VERDICT_TOL
) -> WitnessReport:
    """Evaluate all four inequalities from three expectation values."""
    four = [abs(b1 + s2 * b2 + s3 * b3) for s2, s3 in SIGN_CHOICES]
    best = int(np.argmax(four))  # first maximum wins ties
    max_value = four[best]
    return WitnessReport(
        b1=b1,
        b2=b2,
        b3=b3,
        four_values=four,
        max_value=max_value,
        max_signs=SIGN_CHOICES[best],
        violated=max_value > 1.0 + verdict_tol,
    )


def witness(rho: DensityOperator, verdict_tol: float = VERDICT_TOL) -> WitnessReport:
    b1, b2, b3 = (expectation(rho, o) for o in observables())
    return witness_from_expectations(b1, b2, b3, verdict_tol=verdict_tol)


def max_violation_analytic(b: float) -> float:
    """(2 sqrt(1 - b^2) + 1 - b) / (1 + 7b)."""
    b = check_b(b)
    return (2.0 * np.sqrt(1.0 - b * b) + 1.0 - b) / (1.0 + 7.0 * b)


def detection_window() -> float:
    """Upper end of the detected range: 1/sqrt(17)."""
    return 1.0 / np.sqrt(17.0)


def statistically_violated(value: float, sigma: float, k: float = 2.0) -> bool:
    """Violation verdict for sampled data: value - 1 > k * sigma."""
    return bool(value - 1.0 > k * sigma)


def _bipartition_label(dims: Sequence[int], which: int) -> str:
    """
    "transposed qubits|other qubits", e.g. "3|12"; the qubit|ququart view is "2|4".

    Raises:
        InvalidArgumentError: If a factor is not a whole number of qubits
    """
    dims = [int(d) for d in dims]
    if dims == list(QUBIT_QUQUART_DIMS):
        return "2|4" if which == 0 else "4|2"
    if any(d < 2 or d & (d - 1) for d in dims):
        raise InvalidArgumentError(f"Factor dims {dims} do not group whole qubits")
    groups, start = [], 1
    for d in dims:
        n = d.bit_length() - 1
        groups.append("".join(str(q) for q in range(start, start + n)))
        start += n
    rest = "".join(g for i, g in enumerate(groups) if i != which)
    return f"{groups[which]}|{rest}"


def ppt_check(
    rho: DensityOperator,
    dims: Optional[Sequence[int]] = None,
    which: int = 0,
    tol: float = PPT_TOL,
) -> PptReport:
    """
    Minimum eigenvalue of the partial transpose on factor ``which``.

    Args:
        rho: State to test
        dims: Factor dimensions (defaults to the state's own view)
        which: 0-based factor to transpose
        tol: Negative eigenvalues above -tol count as zero

    Returns:
        PptReport with the PPT verdict
    """
    dims = tuple(rho.dims if dims is None else dims)
    pt = qlinalg.partial_transpose(rho.matrix, dims, which)
    w_min = qlinalg.min_eigenvalue(pt)
    report = PptReport(
        bipartition=_bipartition_label(dims, which),
        dims=list(dims),
        transposed_factor=which,
        min_eigenvalue=w_min,
        is_ppt=w_min >= -tol,
    )
    logger.debug(f"PPT {report.bipartition}: min eig {w_min:.3e}")
    return report


def ppt_all_cuts(rho: DensityOperator, tol: float = PPT_TOL) -> Dict[str, PptReport]:
    """PPT reports for the qubit|ququart cut and each single-qubit cut."""
    reports = {"2|4": ppt_check(rho, QUBIT_QUQUART_DIMS, 0, tol)}
    for which in range(3):
        report = ppt_check(rho, QUBIT_DIMS, which, tol)
        reports[report.bipartition] = report
    return reports


def _haar_qubit(rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    return v / np.linalg.norm(v)


def random_product_state(
    rng_seed: Optional[int] = None, rng: Optional[np.random.Generator] = None
) -> DensityOperator:
    """|a><a| (x) |c><c| (x) |d><d| from Haar-random single-qubit states."""
    rng = rng or np.random.default_rng(rng_seed)
    psi = qlinalg.kron_all(*(_haar_qubit(rng) for _ in range(3)))
    return DensityOperator(matrix=projector(psi))


def random_separable_mixture(
    rng_seed: Optional[int] = None, max_terms: int = 8
) -> DensityOperator:
    """Dirichlet-weighted convex mixture of 1..max_terms random product states."""
    if max_terms < 1:
        raise InvalidArgumentError("max_terms must be at least 1")
    rng = np.random.default_rng(rng_seed)
    n = int(rng.integers(1, max_terms + 1))
    weights = rng.dirichlet(np.ones(n))
    m = sum(w * random_product_state(rng=rng).matrix for w in weights)
    m = m / np.trace(m).real
    return DensityOperator(matrix=0.5 * (m + m.conj().T))
