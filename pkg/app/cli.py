"""
Command-line front end: ``ppt-witness-lab table|scan|tomo|prepare|ppt``.

Exit codes: 0 success, 1 I/O failure, 2 invalid arguments, 3 numerical failure.
"""
from typing import List, Optional
import argparse
import logging
import sys

from pydantic import ValidationError

from app.core.config import get_settings, ensure_directories
from app.core.errors import InvalidArgumentError, NumericalError
from app.core.lab_orchestrator import NOISELESS, PPT_CUTS, TABLE_B_VALUES, LabOrchestrator, RunConfig
from app.services.circuits import NoiseSpec
from app.services.export import render, write_output

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_IO = 1
EXIT_INVALID = 2
EXIT_NUMERICAL = 3


def build_parser() -> argparse.ArgumentParser:
    settings = get_settings()
    parser = argparse.ArgumentParser(
        prog="ppt-witness-lab",
        description="Simulate and detect qubit-ququart PPT entanglement with a three-observable witness.",
    )
    parser.add_argument("--log-level", default=settings.log_level, help="Logging level (default from settings)")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--b", type=float, nargs="+", help="Family parameter value(s) in [0, 1]")
    common.add_argument("--shots", type=int, default=settings.default_shots, help="Ensemble size for readout noise")
    common.add_argument("--noise-p", type=float, default=None, help="Depolarizing strength per prepared state")
    common.add_argument("--jitter", type=float, default=None, help="Rotation-angle jitter std (radians)")
    common.add_argument("--noisy", action="store_true", help="Use the default noise profile from settings")
    common.add_argument("--seed", type=int, default=settings.seed)
    common.add_argument("--reps", type=int, default=settings.monte_carlo_repetitions, help="Monte Carlo repetitions (>= 30)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", default=None, help="Output file (stdout if omitted)")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("table", parents=[common], help="Reproduce the theory/direct/tomography inequality table")

    scan = sub.add_parser("scan", parents=[common], help="Scan the violation window over b")
    scan.add_argument("--b-min", type=float, default=0.0)
    scan.add_argument("--b-max", type=float, default=1.0)
    scan.add_argument("--steps", type=int, default=101)

    tomo = sub.add_parser("tomo", parents=[common], help="Seven-setting tomography of sigma_b")
    tomo.add_argument("--input", default=None, help="Tomography dataset JSON to reconstruct")
    tomo.add_argument("--save-data", default=None, help="Write the simulated dataset JSON here")

    prepare = sub.add_parser("prepare", parents=[common], help="Prepare sigma_b by temporal averaging")
    prepare.add_argument("--dump-circuit", default=None, help="Write the circuits in text format")
    prepare.add_argument("--native", action="store_true", help="Dump circuits with CNOTs as J-evolution sequences")

    ppt = sub.add_parser("ppt", parents=[common], help="Partial-transpose test of sigma_b")
    ppt.add_argument("--cut", choices=PPT_CUTS, default="2|4")
    return parser


def noise_from_args(args: argparse.Namespace) -> Optional[NoiseSpec]:
    """NoiseSpec from flags; None when every noise knob is off."""
    settings = get_settings()
    if not args.noisy and args.noise_p is None and args.jitter is None:
        return None
    p = args.noise_p if args.noise_p is not None else (settings.noise_p if args.noisy else 0.0)
    jitter = args.jitter if args.jitter is not None else (settings.angle_jitter_sigma if args.noisy else 0.0)
    return NoiseSpec(depolarizing_p=p, angle_jitter_sigma=jitter, seed=args.seed)


def _single_b(args: argparse.Namespace) -> float:
    if not args.b or len(args.b) != 1:
        raise InvalidArgumentError(f"{args.command} needs exactly one --b value")
    return args.b[0]


def run(args: argparse.Namespace, orchestrator: Optional[LabOrchestrator] = None) -> str:
    """Execute a parsed command and return the rendered output."""
    orchestrator = orchestrator or LabOrchestrator()
    noise = noise_from_args(args)

    if args.command in ("table", "scan"):
        if args.command == "table":
            config = RunConfig(
                b_values=args.b or list(TABLE_B_VALUES),
                shots=args.shots,
                noise=noise or NOISELESS,
                seed=args.seed,
                repetitions=args.reps,
                verdict_k=orchestrator.settings.verdict_sigma_k,
                output_path=args.out,
                format=args.format,
            )
            payload = orchestrator.cmd_table(config)
        else:
            payload = orchestrator.cmd_scan(args.b_min, args.b_max, args.steps)
        return render(payload, args.format)

    if args.command == "tomo":
        b = _single_b(args) if args.input is None or args.b else None
        payload = orchestrator.cmd_tomo(b, args.shots, args.seed, args.input, args.save_data)
    elif args.command == "prepare":
        payload = orchestrator.cmd_prepare(_single_b(args), noise, args.dump_circuit, args.native)
    else:
        payload = orchestrator.cmd_ppt(_single_b(args), args.cut)
    # reports are structured, so they are always JSON
    return render(payload, "json")


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.INFO),
        format="%(asctime)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )

    try:
        ensure_directories()
        text = run(args)
        write_output(text, args.out, sys.stdout)
        return EXIT_OK
    except (InvalidArgumentError, ValidationError) as e:
        logger.error(f"Invalid arguments: {str(e)}")
        return EXIT_INVALID
    except NumericalError as e:
        logger.error(f"Numerical failure: {str(e)}")
        return EXIT_NUMERICAL
    except OSError as e:
        logger.error(f"I/O failure: {str(e)}")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
