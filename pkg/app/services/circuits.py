"""
Gate-level simulation of the preparation and observable-mapping circuits,
temporal averaging, and the emulation noise model.

Conventions:
    R(theta, phi) = exp(-i theta (cos(phi) X + sin(phi) Y) / 2)
    Rz(theta)     = exp(-i theta Z / 2)
    JEV(tau)      = exp(-i 2 pi tau Iz Iz), Iz = Z/2; tau = 1/2 is the (2J)^-1 delay
A "barred" pulse phase is phi + pi. Circuits act first-gate-first.
"""
from typing import List, Literal, Optional, Tuple
import logging

import numpy as np
from pydantic import BaseModel, Field, model_validator

from app.core.errors import InvalidArgumentError, NumericalError
from app.services import qlinalg
from app.services.qlinalg import I2, P0, P1, SX, SY, SZ
from app.services.states import (
    DIM,
    DensityOperator,
    basis_state,
    check_b,
    mixture_weights,
    pps,
    pure_density,
)

logger = logging.getLogger(__name__)

N_QUBITS = 3
ZERO_STATE = "000"

GateKind = Literal["rotation", "cnot", "cphase", "j_evolution"]


class Gate(BaseModel):
    """A single gate on the three-qubit register (qubits numbered 1..3)."""

    kind: GateKind
    target: Optional[int] = None
    control: Optional[int] = None
    qubits: Optional[Tuple[int, int]] = None
    theta: float = 0.0
    phi: float = 0.0
    axis: Literal["xy", "z"] = "xy"
    tau: float = 0.0

    @model_validator(mode="after")
    def _check_operands(self) -> "Gate":
        def valid(q):
            return q is not None and 1 <= q <= N_QUBITS

        if not all(np.isfinite([self.theta, self.phi, self.tau])):
            raise ValueError("gate parameters must be finite")
        if self.kind == "rotation":
            if not valid(self.target):
                raise ValueError(f"invalid target qubit {self.target}")
        elif self.kind in ("cnot", "cphase"):
            if not (valid(self.control) and valid(self.target)):
                raise ValueError(f"invalid qubits c={self.control} t={self.target}")
            if self.control == self.target:
                raise ValueError("control and target must differ")
        else:
            if self.qubits is None or not all(valid(q) for q in self.qubits):
                raise ValueError(f"invalid qubit pair {self.qubits}")
            if self.qubits[0] == self.qubits[1]:
                raise ValueError("J-evolution needs two distinct qubits")
        return self

    @classmethod
    def rotation(cls, target: int, theta: float, phi: float = 0.0) -> "Gate":
        return cls(kind="rotation", target=target, theta=theta, phi=phi)

    @classmethod
    def rz(cls, target: int, theta: float) -> "Gate":
        return cls(kind="rotation", target=target, theta=theta, axis="z")

    @classmethod
    def cnot(cls, control: int, target: int) -> "Gate":
        return cls(kind="cnot", control=control, target=target)

    @classmethod
    def cphase(cls, control: int, target: int) -> "Gate":
        return cls(kind="cphase", control=control, target=target)

    @classmethod
    def j_evolution(cls, q1: int, q2: int, tau: float) -> "Gate":
        return cls(kind="j_evolution", qubits=(q1, q2), tau=tau)

    def to_text(self) -> str:
        if self.kind == "rotation" and self.axis == "z":
            return f"RZ q={self.target} theta={self.theta:.12g}"
        if self.kind == "rotation":
            return f"ROT q={self.target} theta={self.theta:.12g} phi={self.phi:.12g}"
        if self.kind == "cnot":
            return f"CNOT c={self.control} t={self.target}"
        if self.kind == "cphase":
            return f"CPHASE c={self.control} t={self.target}"
        return f"JEV q={self.qubits[0]},{self.qubits[1]} tau={self.tau:.12g}"


class Circuit(BaseModel):
    gates: List[Gate] = Field(default_factory=list)
    n_qubits: Literal[3] = N_QUBITS

    def __add__(self, other: "Circuit") -> "Circuit":
        return Circuit(gates=list(self.gates) + list(other.gates))

    def __len__(self) -> int:
        return len(self.gates)

    def to_text(self) -> str:
        return "".join(g.to_text() + "\n" for g in self.gates)

    @classmethod
    def from_text(cls, text: str) -> "Circuit":
        """
        Parse the line format written by ``to_text``.

        Raises:
            InvalidArgumentError: On an unrecognised line
        """
        gates = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            op, *fields = line.split()
            try:
                kv = dict(f.split("=", 1) for f in fields)
                if op == "ROT":
                    gates.append(Gate.rotation(int(kv["q"]), float(kv["theta"]), float(kv["phi"])))
                elif op == "RZ":
                    gates.append(Gate.rz(int(kv["q"]), float(kv["theta"])))
                elif op == "CNOT":
                    gates.append(Gate.cnot(int(kv["c"]), int(kv["t"])))
                elif op == "CPHASE":
                    gates.append(Gate.cphase(int(kv["c"]), int(kv["t"])))
                elif op == "JEV":
                    q1, q2 = (int(q) for q in kv["q"].split(","))
                    gates.append(Gate.j_evolution(q1, q2, float(kv["tau"])))
                else:
                    raise KeyError(op)
            except (KeyError, ValueError) as e:
                raise InvalidArgumentError(f"Bad circuit line {lineno}: {raw!r}") from e
        return cls(gates=gates)


class NoiseSpec(BaseModel):
    """Global depolarizing strength and per-rotation angle jitter."""

    depolarizing_p: float = Field(default=0.05, ge=0.0, le=1.0)
    angle_jitter_sigma: float = Field(default=0.02, ge=0.0)
    seed: int = 0


def _bit(index: int, qubit: int) -> int:
    return (index >> (N_QUBITS - qubit)) & 1


def rotation_matrix(theta: float, phi: float = 0.0, axis: str = "xy") -> np.ndarray:
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    if axis == "z":
        return c * I2 - 1j * s * SZ
    return c * I2 - 1j * s * (np.cos(phi) * SX + np.sin(phi) * SY)


def gate_unitary(g: Gate) -> np.ndarray:
    """
    8x8 unitary of a gate, identities tensored onto idle qubits.

    Raises:
        InvalidArgumentError: If a qubit index is out of range
    """
    if g.kind == "rotation":
        return qlinalg.embed(rotation_matrix(g.theta, g.phi, g.axis), g.target, N_QUBITS)
    if g.kind in ("cnot", "cphase"):
        flip = SX if g.kind == "cnot" else SZ
        return qlinalg.embed(P0, g.control) + qlinalg.embed(P1, g.control) @ qlinalg.embed(flip, g.target)

    q1, q2 = g.qubits
    phases = np.empty(DIM, dtype=complex)
    for idx in range(DIM):
        zz = (1 - 2 * _bit(idx, q1)) * (1 - 2 * _bit(idx, q2))
        phases[idx] = np.exp(-1j * np.pi * g.tau * zz / 2.0)
    return np.diag(phases)


def circuit_unitary(c: Circuit, tol: float = qlinalg.UNITARY_TOL) -> np.ndarray:
    """
    Ordered product of the gate unitaries (first gate acts first).

    Raises:
        NumericalError: If the product drifts from unitarity beyond ``tol``
    """
    u = np.eye(DIM, dtype=complex)
    for g in c.gates:
        u = gate_unitary(g) @ u
    if not qlinalg.is_unitary(u, tol):
        raise NumericalError("Circuit unitary failed the unitarity check")
    return u


def prepare_state(c: Circuit) -> np.ndarray:
    """State vector U|000>."""
    return circuit_unitary(c) @ basis_state(ZERO_STATE)


def phi_b_angle(b: float) -> float:
    """theta = arccos(sqrt(1 + b) / sqrt(2)); pi/4 at b = 0."""
    b = check_b(b)
    return float(np.arccos(np.clip(np.sqrt(1.0 + b) / np.sqrt(2.0), -1.0, 1.0)))


def prepare_phi_b(b: float) -> Circuit:
    """|000> -> |phi_b> (up to global phase)."""
    theta = phi_b_angle(b)
    return Circuit(gates=[
        # y-rotation through 2*theta leaves cos(theta)|0> + sin(theta)|1> on qubit 2
        Gate.rotation(2, 2.0 * theta, np.pi / 2.0),
        Gate.cnot(2, 3),
        Gate.rotation(1, np.pi, 0.0),
    ])


def prepare_psi_k(k: int) -> Circuit:
    """|000> -> |psi_k> (up to global phase)."""
    hadamard_like = Gate.rotation(1, np.pi / 2.0, np.pi / 2.0)
    if k == 1:
        gates = [hadamard_like, Gate.cnot(1, 3)]
    elif k == 2:
        gates = [hadamard_like, Gate.cnot(1, 2), Gate.cnot(1, 3), Gate.rotation(3, np.pi, 0.0)]
    elif k == 3:
        gates = [hadamard_like, Gate.cnot(1, 3), Gate.rotation(2, np.pi, 0.0)]
    else:
        raise InvalidArgumentError(f"psi index must be 1, 2 or 3, got {k}")
    return Circuit(gates=gates)


def prepare_basis(s: str) -> Circuit:
    """|000> -> |s> with a pi pulse on every qubit whose bit is 1."""
    if len(s) != N_QUBITS or any(ch not in "01" for ch in s):
        raise InvalidArgumentError(f"Expected a 3-bit string, got {s!r}")
    return Circuit(gates=[Gate.rotation(q, np.pi, 0.0) for q, ch in enumerate(s, 1) if ch == "1"])


def component_circuits(b: float) -> List[Tuple[str, Circuit]]:
    """Preparation circuits of the five components, in mixture-weight order."""
    return [
        ("psi1", prepare_psi_k(1)),
        ("psi2", prepare_psi_k(2)),
        ("psi3", prepare_psi_k(3)),
        ("011", prepare_basis("011")),
        ("phi_b", prepare_phi_b(b)),
    ]


def mapping_circuit(i: int) -> Circuit:
    """
    Circuit V_i with V_i^dagger (I I Z) V_i = B_i, so <B_i> is read as the
    z magnetisation of qubit 3 after the mapping.
    """
    if i == 1:
        # Ry(-pi/2) turns X into Z under conjugation
        gates = [Gate.rotation(2, np.pi / 2.0, -np.pi / 2.0), Gate.rotation(3, np.pi / 2.0, -np.pi / 2.0)]
        gates.append(Gate.cnot(2, 3))
    elif i == 2:
        # Rx(pi/2) turns Y into Z under conjugation
        gates = [Gate.rotation(2, np.pi / 2.0, 0.0), Gate.rotation(3, np.pi / 2.0, 0.0)]
        gates.append(Gate.cnot(2, 3))
    elif i == 3:
        gates = [Gate.cnot(2, 3), Gate.cnot(1, 3)]
    else:
        raise InvalidArgumentError(f"Observable index must be 1, 2 or 3, got {i}")
    return Circuit(gates=gates)


def native_decomposition(c: Circuit) -> Circuit:
    """
    Rewrite CNOT and controlled-phase gates with pi/2 pulses, z-rotations and a
    (2J)^-1 free evolution. Equal to ``c`` up to global phase.
    """
    gates: List[Gate] = []
    for g in c.gates:
        if g.kind not in ("cnot", "cphase"):
            gates.append(g)
            continue
        cz = [
            Gate.rz(g.control, -np.pi / 2.0),
            Gate.rz(g.target, -np.pi / 2.0),
            Gate.j_evolution(g.control, g.target, 0.5),
        ]
        if g.kind == "cphase":
            gates.extend(cz)
        else:
            gates.append(Gate.rotation(g.target, np.pi / 2.0, -np.pi / 2.0))
            gates.extend(cz)
            gates.append(Gate.rotation(g.target, np.pi / 2.0, np.pi / 2.0))
    return Circuit(gates=gates)


def jitter_circuit(c: Circuit, noise: NoiseSpec, rng: Optional[np.random.Generator] = None) -> Circuit:
    """Perturb every rotation angle by N(0, sigma^2); other gates are untouched."""
    rng = rng or np.random.default_rng(noise.seed)
    if noise.angle_jitter_sigma == 0.0:
        return c
    gates = []
    for g in c.gates:
        if g.kind == "rotation":
            g = g.model_copy(update={"theta": g.theta + rng.normal(0.0, noise.angle_jitter_sigma)})
        gates.append(g)
    return Circuit(gates=gates)


def apply_noise(rho: DensityOperator, noise: NoiseSpec) -> DensityOperator:
    """Global depolarizing channel (1 - p) rho + p I/8."""
    p = noise.depolarizing_p
    m = (1.0 - p) * rho.matrix + p * np.eye(DIM) / DIM
    return DensityOperator(matrix=m, dims=rho.dims)


def evolve(rho: DensityOperator, u: np.ndarray) -> DensityOperator:
    m = u @ rho.matrix @ u.conj().T
    return DensityOperator.from_matrix(m, rho.dims, hermitize=True)


def prepared_density(
    c: Circuit,
    noise: Optional[NoiseSpec] = None,
    rng: Optional[np.random.Generator] = None,
    epsilon: float = 1.0,
) -> DensityOperator:
    """Run ``c`` on the |000> (pseudo-pure) state, with optional noise."""
    start = pps(epsilon, pure_density(basis_state(ZERO_STATE)))
    if noise is not None:
        rng = rng or np.random.default_rng(noise.seed)
        c = jitter_circuit(c, noise, rng)
    rho = evolve(start, circuit_unitary(c))
    if noise is not None:
        rho = apply_noise(rho, noise)
    return rho


def prepared_components(
    b: float, noise: Optional[NoiseSpec] = None, epsilon: float = 1.0
) -> List[Tuple[str, float, DensityOperator]]:
    """
    The five separately prepared runs as (label, weight, state), in mixture
    order. Noisy runs share one generator seeded from ``noise.seed``.
    """
    weights = mixture_weights(b).as_tuple()
    rng = np.random.default_rng(noise.seed) if noise is not None else None
    return [
        (label, w, prepared_density(circuit, noise, rng, epsilon))
        for w, (label, circuit) in zip(weights, component_circuits(b))
    ]


def temporal_average(
    b: float, noise: Optional[NoiseSpec] = None, epsilon: float = 1.0
) -> DensityOperator:
    """
    Assemble sigma_b from five separately prepared runs, weighted by the
    mixture weights.

    Args:
        b: Family parameter in [0, 1]
        noise: Optional noise applied independently to each run
        epsilon: Pseudo-pure polarisation of the starting |000> state

    Returns:
        The averaged density operator
    """
    m = np.zeros((DIM, DIM), dtype=complex)
    for _, w, rho in prepared_components(b, noise, epsilon):
        m += w * rho.matrix
    logger.debug(f"Temporal average assembled for b={b} (noise={'on' if noise else 'off'})")
    return DensityOperator.from_matrix(m, hermitize=True)


def mapped_expectation(
    rho: DensityOperator,
    i: int,
    noise: Optional[NoiseSpec] = None,
    rng: Optional[np.random.Generator] = None,
    shots: Optional[int] = None,
) -> float:
    """
    <B_i> read out as the qubit-3 z expectation after the mapping circuit.

    Args:
        rho: State to measure
        i: Observable index 1..3
        noise: Optional angle jitter on the mapping pulses
        rng: Random generator for jitter and readout noise
        shots: Optional ensemble size; adds N(0, 1/shots) readout noise
    """
    c = mapping_circuit(i)
    if shots is not None:
        if shots < 1:
            raise InvalidArgumentError(f"shots must be positive, got {shots}")
        if rng is None and noise is None:
            raise InvalidArgumentError("shot noise needs a seeded generator (pass rng or noise)")
    if noise is not None:
        rng = rng or np.random.default_rng(noise.seed)
        c = jitter_circuit(c, noise, rng)
    mapped = evolve(rho, circuit_unitary(c))
    value = float(mapped.expect(qlinalg.embed(SZ, 3)).real)
    if shots is not None:
        value += rng.normal(0.0, 1.0 / np.sqrt(shots))
    return value
