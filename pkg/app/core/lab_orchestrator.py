"""
Lab orchestrator: runs the table, scan, tomography, preparation and PPT
workflows on top of the simulation services. Shared by the CLI and HTTP
front ends.
"""
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple
import logging

import numpy as np
from pydantic import BaseModel, Field, field_validator

from app.core.config import Settings, get_settings
from app.core.errors import InvalidArgumentError
from app.services import circuits, entanglement, states, tomography
from app.services.circuits import Circuit, NoiseSpec
from app.services.entanglement import PptReport, WitnessReport
from app.services.export import ResultRow

logger = logging.getLogger(__name__)

TABLE_B_VALUES = (0.04, 0.08, 0.12, 0.16, 0.20)
PPT_CUTS = ("2|4", "1|23", "2|13", "3|12", "all")

NOISELESS = NoiseSpec(depolarizing_p=0.0, angle_jitter_sigma=0.0, seed=0)


def _check_b_values(values: List[float]) -> List[float]:
    for b in values:
        states.check_b(b)
    return values


class RunConfig(BaseModel):
    """Parameters of a batch run."""

    b_values: List[float] = Field(default_factory=lambda: list(TABLE_B_VALUES))
    shots: Optional[int] = Field(default=None, ge=1)
    noise: NoiseSpec = NOISELESS
    seed: int = 2019
    repetitions: int = Field(default=30, ge=30)
    verdict_k: float = Field(default=2.0, gt=0.0)
    output_path: Optional[str] = None
    format: Literal["csv", "json"] = "csv"

    @field_validator("b_values")
    @classmethod
    def _b_in_range(cls, v: List[float]) -> List[float]:
        if not v:
            raise ValueError("at least one b value is required")
        return _check_b_values(v)

    @property
    def stochastic(self) -> bool:
        return (
            self.shots is not None
            or self.noise.depolarizing_p > 0.0
            or self.noise.angle_jitter_sigma > 0.0
        )


class TomoReport(BaseModel):
    b: Optional[float]
    shots: Optional[int]
    seed: Optional[int]
    fidelity: Optional[float]
    residual_norm: float
    projected: bool
    ppt_min_eig: float
    witness: WitnessReport


class PrepareReport(BaseModel):
    b: float
    noisy: bool
    pps_fidelity: float
    component_fidelities: Dict[str, float]
    assembled_fidelity: float
    circuit_path: Optional[str] = None


def crossing_point(rows: List[ResultRow]) -> Optional[float]:
    """Linear interpolation of the first b where the theory value drops to 1."""
    for lo, hi in zip(rows, rows[1:]):
        if lo.inequality_theory > 1.0 >= hi.inequality_theory:
            frac = (lo.inequality_theory - 1.0) / (lo.inequality_theory - hi.inequality_theory)
            return lo.b + frac * (hi.b - lo.b)
    return None


class LabOrchestrator:
    """
    Runs the batch workflows.

    Noiseless runs are single deterministic simulations. Runs with noise or
    shots repeat the emulated experiment ``repetitions`` times with derived
    seeds and report means plus the sample standard deviation.
    """

    def __init__(self, settings: Optional[Settings] = None):
        self.settings = settings or get_settings()
        logger.debug("Lab orchestrator initialized")

    def default_noise(self, seed: Optional[int] = None) -> NoiseSpec:
        return NoiseSpec(
            depolarizing_p=self.settings.noise_p,
            angle_jitter_sigma=self.settings.angle_jitter_sigma,
            seed=self.settings.seed if seed is None else seed,
        )

    @staticmethod
    def _rep_seeds(seed: int, b: float, repetitions: int) -> List[int]:
        seq = np.random.SeedSequence([seed, int(round(b * 1e6))])
        return [int(s) for s in seq.generate_state(repetitions)]

    @staticmethod
    def _ppt_min_eig(b: float) -> float:
        rho = states.sigma_b(b, states.QUBIT_QUQUART_DIMS)
        return entanglement.ppt_check(rho, which=0).min_eigenvalue

    def _emulate_once(
        self, b: float, noise: Optional[NoiseSpec], shots: Optional[int], seed: int
    ) -> Tuple[float, WitnessReport, WitnessReport]:
        """One emulated experiment: fidelity, direct witness, tomography witness."""
        rho = circuits.temporal_average(b, noise)
        fid = states.fidelity(states.sigma_b(b), rho)

        rng = np.random.default_rng([seed, 1])
        expectations = [circuits.mapped_expectation(rho, i, noise, rng, shots) for i in (1, 2, 3)]
        direct = entanglement.witness_from_expectations(*expectations, verdict_tol=self.settings.verdict_tolerance)

        data = tomography.simulate_dataset(rho, shots=shots, seed=seed)
        tomo = tomography.witness_from_tomography(data, self.settings.verdict_tolerance)
        return fid, direct, tomo

    def run_row(self, b: float, config: RunConfig) -> ResultRow:
        theory = entanglement.max_violation_analytic(b)
        ppt_min = self._ppt_min_eig(b)

        if not config.stochastic:
            fid, direct, tomo = self._emulate_once(b, None, None, config.seed)
            return ResultRow(
                b=b,
                fidelity_prepared=fid,
                inequality_theory=theory,
                inequality_direct=direct.max_value,
                inequality_tomo=tomo.max_value,
                ppt_min_eig=ppt_min,
                violated=direct.violated,
                sigma_est=0.0,
            )

        fids, directs, tomos = [], [], []
        for seed in self._rep_seeds(config.seed, b, config.repetitions):
            noise = config.noise.model_copy(update={"seed": seed})
            fid, direct, tomo = self._emulate_once(b, noise, config.shots, seed)
            fids.append(fid)
            directs.append(direct.max_value)
            tomos.append(tomo.max_value)

        direct_mean = float(np.mean(directs))
        sigma = float(np.std(directs, ddof=1))
        return ResultRow(
            b=b,
            fidelity_prepared=float(np.mean(fids)),
            inequality_theory=theory,
            inequality_direct=direct_mean,
            inequality_tomo=float(np.mean(tomos)),
            ppt_min_eig=ppt_min,
            violated=entanglement.statistically_violated(direct_mean, sigma, config.verdict_k),
            sigma_est=sigma,
        )

    def cmd_table(self, config: RunConfig) -> List[ResultRow]:
        """
        Theory, direct and tomography inequality values per b.

        Args:
            config: Run configuration (defaults reproduce the five-state table)

        Returns:
            One ResultRow per b value, in input order
        """
        logger.info(f"Step 1: Table run over b={config.b_values} "
                    f"({'stochastic, %d reps' % config.repetitions if config.stochastic else 'noiseless'})")
        rows = [self.run_row(b, config) for b in config.b_values]
        for row in rows:
            logger.info(f"  b={row.b:.4f} theory={row.inequality_theory:.4f} "
                        f"direct={row.inequality_direct:.4f} tomo={row.inequality_tomo:.4f} "
                        f"violated={row.violated}")
        logger.info(f"✓ Table complete ({len(rows)} rows)")
        return rows

    def cmd_scan(self, b_min: float, b_max: float, steps: int) -> List[ResultRow]:
        """
        Noiseless scan of the violation over [b_min, b_max].

        Raises:
            InvalidArgumentError: On a bad range or fewer than 2 steps
        """
        if not (0.0 <= b_min < b_max <= 1.0):
            raise InvalidArgumentError(f"Bad scan range [{b_min}, {b_max}]")
        if steps < 2:
            raise InvalidArgumentError(f"steps must be at least 2, got {steps}")

        rows = []
        for b in np.linspace(b_min, b_max, steps):
            b = float(b)
            rho = states.sigma_b(b)
            direct = entanglement.witness(rho, self.settings.verdict_tolerance)
            tomo = tomography.witness_from_tomography(
                tomography.simulate_dataset(rho), self.settings.verdict_tolerance
            )
            rows.append(ResultRow(
                b=b,
                fidelity_prepared=states.fidelity(rho, circuits.temporal_average(b)),
                inequality_theory=entanglement.max_violation_analytic(b),
                inequality_direct=direct.max_value,
                inequality_tomo=tomo.max_value,
                ppt_min_eig=self._ppt_min_eig(b),
                violated=direct.violated,
            ))
        crossing = crossing_point(rows)
        if crossing is not None:
            logger.info(f"✓ Scan complete: violation ends near b={crossing:.5f} "
                        f"(1/sqrt(17) = {entanglement.detection_window():.5f})")
        else:
            logger.info("✓ Scan complete: no crossing of the separable bound in range")
        return rows

    def cmd_tomo(
        self,
        b: Optional[float] = None,
        shots: Optional[int] = None,
        seed: Optional[int] = None,
        input_path: Optional[str] = None,
        save_data: Optional[str] = None,
    ) -> TomoReport:
        """
        Reconstruct a state from a simulated (or loaded) seven-setting dataset.

        Args:
            b: Family parameter; the reference state for fidelity
            shots: Optional ensemble size for readout noise
            seed: Seed for the readout noise
            input_path: Load the dataset from JSON instead of simulating
            save_data: Write the simulated dataset to this JSON path

        Returns:
            TomoReport with fidelity, residual and witness values
        """
        if input_path is not None:
            data = tomography.TomoDataset.load_json(input_path)
            logger.info(f"Loaded tomography dataset from {input_path}")
        else:
            if b is None:
                raise InvalidArgumentError("tomo needs --b or --input")
            seed = self.settings.seed if seed is None else seed
            data = tomography.simulate_dataset(circuits.temporal_average(b), shots=shots, seed=seed)
            if save_data:
                data.save_json(save_data)

        result = tomography.reconstruct(data)
        fid = states.fidelity(states.sigma_b(b), result.rho_est) if b is not None else None
        ppt_min = entanglement.ppt_check(result.rho_est.view(states.QUBIT_QUQUART_DIMS)).min_eigenvalue
        report = TomoReport(
            b=b,
            shots=shots,
            seed=data.seed,
            fidelity=fid,
            residual_norm=result.residual_norm,
            projected=result.projected,
            ppt_min_eig=ppt_min,
            witness=entanglement.witness(result.rho_est, self.settings.verdict_tolerance),
        )
        logger.info(f"✓ Tomography complete: max inequality value {report.witness.max_value:.4f}")
        return report

    def cmd_prepare(
        self,
        b: float,
        noise: Optional[NoiseSpec] = None,
        dump_path: Optional[str] = None,
        native: bool = False,
    ) -> PrepareReport:
        """Fidelities of the five prepared components and the assembled sigma_b."""
        states.check_b(b)
        targets = dict(states.component_states(b))

        pps_state = circuits.prepared_density(Circuit(), noise)
        pps_fid = states.fidelity(states.pure_density(states.basis_state("000")), pps_state)

        # the same runs feed the component fidelities and the assembled state
        component_fids = {}
        m = np.zeros((states.DIM, states.DIM), dtype=complex)
        for label, w, prepared in circuits.prepared_components(b, noise):
            component_fids[label] = states.fidelity(states.pure_density(targets[label]), prepared)
            m += w * prepared.matrix
        assembled = states.fidelity(states.sigma_b(b), states.DensityOperator.from_matrix(m, hermitize=True))

        if dump_path is not None:
            self.dump_circuits(b, dump_path, native)

        logger.info(f"✓ Prepared sigma_b at b={b}: assembled fidelity {assembled:.6f}")
        return PrepareReport(
            b=b,
            noisy=noise is not None,
            pps_fidelity=pps_fid,
            component_fidelities=component_fids,
            assembled_fidelity=assembled,
            circuit_path=dump_path,
        )

    def dump_circuits(self, b: float, path: str, native: bool = False) -> str:
        """Write the five preparation and three mapping circuits in the text format."""
        sections = [(f"prepare {label}", c) for label, c in circuits.component_circuits(b)]
        sections += [(f"map B{i}", circuits.mapping_circuit(i)) for i in (1, 2, 3)]
        text = f"# b={b:.6g}\n"
        for title, c in sections:
            if native:
                c = circuits.native_decomposition(c)
            text += f"# {title}\n{c.to_text()}"
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)
        logger.info(f"✓ Circuits written to {path}")
        return text

    def cmd_ppt(self, b: float, cut: str = "2|4") -> List[PptReport]:
        """PPT report(s) of sigma_b for the requested cut."""
        if cut not in PPT_CUTS:
            raise InvalidArgumentError(f"Unknown cut {cut!r}; expected one of {PPT_CUTS}")
        rho = states.sigma_b(b)
        tol = self.settings.ppt_tolerance
        if cut == "all":
            return list(entanglement.ppt_all_cuts(rho, tol).values())
        if cut == "2|4":
            return [entanglement.ppt_check(rho, states.QUBIT_QUQUART_DIMS, 0, tol)]
        which = int(cut[0]) - 1
        return [entanglement.ppt_check(rho, states.QUBIT_DIMS, which, tol)]
