"""
Seven-setting state tomography with transition-resolved readout.

Each setting applies local pi/2 pulses (I = nothing, X/Y = phase x/y) and the
spectrum yields the 12 single-quantum coherences rho'[m, n], where m and n
differ only in the bit of the observed spin (bit 0 in m, bit 1 in n).
"""
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple, Union
import json
import logging

import numpy as np
from pydantic import BaseModel, Field, model_validator

from app.core.errors import InvalidArgumentError, NumericalError
from app.services import qlinalg
from app.services.circuits import rotation_matrix
from app.services.entanglement import VERDICT_TOL, WitnessReport, witness
from app.services.states import DIM, DensityOperator

logger = logging.getLogger(__name__)

SETTINGS: Tuple[str, ...] = ("III", "XXX", "IIY", "XYX", "YII", "XXY", "IYY")
TomoSetting = Literal["III", "XXX", "IIY", "XYX", "YII", "XXY", "IYY"]

RANK_TOL = 1e-10
PROJECTION_TOL = 1e-10
N_PARAMETERS = DIM * DIM  # 63 traceless + trace


class TransitionAmplitude(BaseModel):
    spin: int = Field(ge=1, le=3)
    bra_index: int = Field(ge=0, lt=DIM)
    ket_index: int = Field(ge=0, lt=DIM)
    re: float
    im: float


class ReadoutRecord(BaseModel):
    setting: TomoSetting
    transitions: List[TransitionAmplitude]
    shots: Optional[int] = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _check_transitions(self) -> "ReadoutRecord":
        expected = transitions()
        got = [(t.spin, t.bra_index, t.ket_index) for t in self.transitions]
        if sorted(got) != sorted(expected):
            raise ValueError(f"setting {self.setting} must carry exactly the 12 single-quantum transitions")
        if not all(np.isfinite([t.re for t in self.transitions] + [t.im for t in self.transitions])):
            raise ValueError("non-finite amplitude")
        return self

    def amplitudes(self) -> np.ndarray:
        """Amplitudes in the fixed transition order."""
        lookup = {(t.spin, t.bra_index, t.ket_index): complex(t.re, t.im) for t in self.transitions}
        return np.array([lookup[key] for key in transitions()], dtype=complex)


class TomoDataset(BaseModel):
    records: List[ReadoutRecord]
    seed: Optional[int] = None

    @model_validator(mode="after")
    def _check_settings(self) -> "TomoDataset":
        labels = [r.setting for r in self.records]
        if sorted(labels) != sorted(SETTINGS):
            raise ValueError(f"dataset must contain each of {SETTINGS} exactly once, got {labels}")
        return self

    def record(self, setting: str) -> ReadoutRecord:
        return next(r for r in self.records if r.setting == setting)

    def to_rows(self) -> List[Dict]:
        rows = []
        for r in self.records:
            for t in r.transitions:
                rows.append({"setting": r.setting, **t.model_dump()})
        return rows

    @classmethod
    def from_rows(cls, rows: List[Dict], seed: Optional[int] = None) -> "TomoDataset":
        """
        Group flat transition rows by setting.

        Raises:
            InvalidArgumentError: If the rows are not a list of objects with a ``setting``
            ValidationError: If a row or record fails validation
        """
        if not isinstance(rows, list) or not all(isinstance(row, dict) for row in rows):
            raise InvalidArgumentError("Tomography data must be a list of row objects")
        grouped: Dict[str, List[TransitionAmplitude]] = {}
        for row in rows:
            row = dict(row)
            if "setting" not in row:
                raise InvalidArgumentError(f"Tomography row without a setting: {row}")
            setting = row.pop("setting")
            try:
                grouped.setdefault(setting, []).append(TransitionAmplitude(**row))
            except TypeError as e:
                raise InvalidArgumentError(f"Malformed tomography row {row}: {e}") from e
        records = [ReadoutRecord(setting=s, transitions=ts) for s, ts in grouped.items()]
        return cls(records=records, seed=seed)

    def save_json(self, path: Union[str, Path]):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as f:
            json.dump(self.to_rows(), f, indent=2)
        logger.info(f"✓ Saved tomography dataset ({len(self.records)} settings) to {path}")

    @classmethod
    def load_json(cls, path: Union[str, Path]) -> "TomoDataset":
        with open(path, "r") as f:
            try:
                rows = json.load(f)
            except json.JSONDecodeError as e:
                raise InvalidArgumentError(f"{path} is not valid JSON: {e}") from e
        return cls.from_rows(rows)


@dataclass(frozen=True)
class ReconstructionResult:
    rho_est: DensityOperator
    raw_matrix: np.ndarray
    residual_norm: float
    projected: bool


@lru_cache()
def transitions() -> Tuple[Tuple[int, int, int], ...]:
    """(spin, bra, ket) for the 4 transitions of each spin, passive bits ascending."""
    out = []
    for spin in (1, 2, 3):
        mask = 1 << (3 - spin)
        for m in range(DIM):
            if not m & mask:
                out.append((spin, m, m | mask))
    return tuple(out)


def _check_setting(s: str) -> str:
    if s not in SETTINGS:
        raise InvalidArgumentError(f"Unknown tomography setting {s!r}; expected one of {SETTINGS}")
    return s


def setting_unitary(s: str) -> np.ndarray:
    """Tensor product of per-qubit identity or pi/2 pulses with phase x / y."""
    _check_setting(s)
    pulses = {"I": qlinalg.I2, "X": rotation_matrix(np.pi / 2.0, 0.0), "Y": rotation_matrix(np.pi / 2.0, np.pi / 2.0)}
    return qlinalg.kron_all(*(pulses[ch] for ch in s))


def _coherences(matrix: np.ndarray, s: str) -> np.ndarray:
    u = setting_unitary(s)
    rotated = u @ matrix @ u.conj().T
    return np.array([rotated[m, n] for _, m, n in transitions()], dtype=complex)


def simulate_readout(
    rho: DensityOperator,
    s: str,
    shots: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> ReadoutRecord:
    """
    Readout of one setting; with ``shots`` each quadrature gets independent
    Gaussian noise of standard deviation 1/sqrt(shots).

    Raises:
        InvalidArgumentError: On non-positive shots, or shots without ``rng``
    """
    amps = _coherences(rho.matrix, _check_setting(s))
    if shots is not None:
        if shots < 1:
            raise InvalidArgumentError(f"shots must be positive, got {shots}")
        if rng is None:
            raise InvalidArgumentError("shot noise needs a seeded generator (pass rng)")
        sigma = 1.0 / np.sqrt(shots)
        amps = amps + rng.normal(0.0, sigma, amps.shape) + 1j * rng.normal(0.0, sigma, amps.shape)
    return ReadoutRecord(
        setting=s,
        transitions=[
            TransitionAmplitude(spin=spin, bra_index=m, ket_index=n, re=float(a.real), im=float(a.imag))
            for (spin, m, n), a in zip(transitions(), amps)
        ],
        shots=shots,
    )


def simulate_dataset(
    rho: DensityOperator, shots: Optional[int] = None, seed: Optional[int] = None
) -> TomoDataset:
    """Readout of all seven settings; shot noise requires a ``seed``."""
    if shots is not None and seed is None:
        raise InvalidArgumentError("simulated shot noise needs a seed")
    rng = np.random.default_rng(seed) if shots is not None else None
    records = [simulate_readout(rho, s, shots, rng) for s in SETTINGS]
    return TomoDataset(records=records, seed=seed if shots is not None else None)


def _readout_vector(amplitudes_by_setting: List[np.ndarray]) -> np.ndarray:
    z = np.concatenate(amplitudes_by_setting)
    return np.concatenate([z.real, z.imag])


@lru_cache()
def _pauli_operators() -> Tuple[Tuple[str, np.ndarray], ...]:
    return tuple(qlinalg.pauli_basis(3))


@lru_cache()
def design_matrix() -> np.ndarray:
    """
    Real-linear map from Pauli coordinates c_k = Tr(rho P_k) (identity first)
    to the 168 real readout numbers, ordered [Re of all settings, Im of all].
    """
    columns = []
    for _, p in _pauli_operators():
        op = p / DIM
        columns.append(_readout_vector([_coherences(op, s) for s in SETTINGS]))
    a = np.array(columns).T
    a.setflags(write=False)
    return a


def design_rank(tol: float = RANK_TOL) -> int:
    """
    Numerical rank of the design matrix on the traceless subspace, from the
    spectrum of its normal matrix.

    Raises:
        NumericalError: If the rank is below 63
    """
    a = design_matrix()[:, 1:]
    w = qlinalg.herm_eig(a.T @ a).eigenvalues
    rank = int(np.sum(w > tol * w[-1]))
    if rank < N_PARAMETERS - 1:
        raise NumericalError(f"Tomography design is rank deficient ({rank} < {N_PARAMETERS - 1})")
    return rank


def matrix_from_pauli_coordinates(coords: np.ndarray) -> np.ndarray:
    m = sum(c * p for c, (_, p) in zip(coords, _pauli_operators()))
    return m / DIM


def reconstruct(data: TomoDataset, projection_tol: float = PROJECTION_TOL) -> ReconstructionResult:
    """
    Least-squares inversion with unit trace imposed, followed by PSD projection
    when the raw estimate has an eigenvalue below -projection_tol.

    Args:
        data: Complete seven-setting dataset
        projection_tol: Negative-eigenvalue threshold that triggers projection

    Returns:
        ReconstructionResult with the estimate and least-squares residual

    Raises:
        NumericalError: If the normal equations are singular
    """
    y = _readout_vector([data.record(s).amplitudes() for s in SETTINGS])
    a = design_matrix()
    a_traceless = a[:, 1:]
    # identity column is zero (no coherences), so the trace does not enter y
    rhs = y - a[:, 0]
    coords, _, rank, _ = np.linalg.lstsq(a_traceless, rhs, rcond=None)
    if rank < N_PARAMETERS - 1:
        raise NumericalError(f"Singular normal equations (rank {rank})")
    residual = float(np.linalg.norm(a_traceless @ coords - rhs))

    raw = matrix_from_pauli_coordinates(np.concatenate([[1.0], coords]))
    raw = 0.5 * (raw + raw.conj().T)

    eig = qlinalg.herm_eig(raw)
    projected = bool(eig.eigenvalues[0] < -projection_tol)
    estimate = raw
    if projected:
        w = np.clip(eig.eigenvalues, 0.0, None)
        w = w / np.sum(w)
        v = eig.eigenvectors
        estimate = (v * w) @ v.conj().T
        logger.warning(f"Raw estimate had eigenvalue {eig.eigenvalues[0]:.3e}; projected onto PSD cone")
    logger.debug(f"Tomography residual {residual:.3e}")

    return ReconstructionResult(
        rho_est=DensityOperator.from_matrix(estimate, hermitize=True),
        raw_matrix=raw,
        residual_norm=residual,
        projected=projected,
    )


def witness_from_tomography(data: TomoDataset, verdict_tol: float = VERDICT_TOL) -> WitnessReport:
    return witness(reconstruct(data).rho_est, verdict_tol)
