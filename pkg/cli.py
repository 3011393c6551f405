"""
Command-line harness for the CGLMP / Bell experiments.

    python cli.py pure --samples 1000 --out results/pure.csv
    python cli.py mixed --samples 100 --format json --out results/mixed.json
    python cli.py entanglement --samples 1000 --out results/scatter.csv
    python cli.py noise --p-min 0.6 --p-max 0.8 --steps 201
    python cli.py single --theta1 0.7853981634 --theta2 1.5707963268 --theta3 1.5707963268
"""
import argparse
import json
import logging
import sys
from typing import List, Optional

import config
from models import ExperimentConfig, ExperimentResult
from services.experiments import run_experiment

LOG_FORMAT = "[%(name)s:%(funcName)s:%(lineno)s] %(levelname)s: %(message)s"

EXIT_OK = 0
EXIT_INVALID_CONFIG = 2
EXIT_IO_FAILURE = 3

logger = logging.getLogger("cli")


def _common_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=config.DEFAULT_SEED, help="Master seed of every random stream.")
    parser.add_argument("--restarts", type=int, default=config.DEFAULT_RESTARTS, help="Nelder-Mead restarts per state.")
    parser.add_argument("--tolerance", type=float, default=config.DEFAULT_TOLERANCE,
                        help="Standard-error stopping tolerance of the simplex search.")
    parser.add_argument("--out", type=str, default=None, help="Output file (omit to print the summary only).")
    parser.add_argument("--format", choices=["csv", "json"], default="csv", help="Output file format.")
    parser.add_argument("--workers", type=int, default=config.DEFAULT_WORKERS, help="Process pool size.")
    parser.add_argument("--log-level", type=str, default=config.LOG_LEVEL, help="Logging level.")


def _ensemble_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--samples", type=int, default=None, help="Number of sampled states.")
    parser.add_argument("--bin-width", type=float, default=None, help="Histogram bin width.")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="CGLMP and CHSH non-locality experiments on 4x4 Bell states")
    commands = parser.add_subparsers(dest="experiment", required=True)

    for name, help_text in (
        ("pure", "Pure Bell states: I_4 histogram and power-law decay fit"),
        ("mixed", "Mixed Bell states: I_4 histogram"),
        ("entanglement", "Pure Bell states: I_4 against 1 - |P|"),
    ):
        sub = commands.add_parser(name, help=help_text)
        _common_arguments(sub)
        _ensemble_arguments(sub)

    noise = commands.add_parser("noise", help="Noisy maximally entangled state: I_4 and CHSH against visibility")
    _common_arguments(noise)
    noise.add_argument("--p-min", type=float, default=0.0)
    noise.add_argument("--p-max", type=float, default=1.0)
    noise.add_argument("--steps", type=int, default=101)

    single = commands.add_parser("single", help="Evaluate one explicitly parametrized state")
    _common_arguments(single)
    for key in ("theta1", "theta2", "theta3", "gamma1", "gamma2", "gamma3", "p1", "p2", "p3", "p4"):
        single.add_argument(f"--{key}", type=float, default=None)
    single.add_argument("--noise-p", type=float, default=None, help="Visibility of the noisy state.")
    for key in ("alpha1", "alpha2", "beta1", "beta2"):
        single.add_argument(f"--{key}", type=float, default=None, help="Override one measurement phase.")
    single.add_argument("--optimize", action="store_true", help="Maximize over the phases instead of evaluating.")
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    """ExperimentConfig from parsed arguments; raises ValidationError on invalid values."""
    values = {key: value for key, value in vars(args).items() if value is not None}
    values.pop("log_level", None)
    if "out" in values:
        values["output_path"] = values.pop("out")
    return ExperimentConfig(**values)


def summary_text(result: ExperimentResult) -> str:
    return json.dumps(result.summary.model_dump(exclude_none=True), indent=2)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        logging.basicConfig(level=args.log_level.upper(), format=LOG_FORMAT)
        cfg = config_from_args(args)
        result = run_experiment(cfg)
    except ValueError as e:
        logger.error("Invalid configuration: %s", e)
        return EXIT_INVALID_CONFIG
    except OSError as e:
        logger.error("I/O failure: %s", e)
        return EXIT_IO_FAILURE

    print(summary_text(result))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
