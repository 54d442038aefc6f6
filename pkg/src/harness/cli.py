"""
Command-line entry point.

    mqkd run    --config FILE [--seed S] [--trials T] [--out PATH] [--workers W] [--metrics-out PATH]
    mqkd codes  [--code-file FILE]
    mqkd game   [--parties N] [--blocks B] [--questions M] [--strategy S] [--hidden BITS] ...
    mqkd oracle [--code NAME] [--inject R:P:PAULI] [--perturb EPS] ...

Exit codes: 0 on success, 1 when an oracle diverges, 2 on any
configuration or validation error.
"""

import argparse
import json
import sys
from typing import Optional, Sequence

import pandas as pd
from pydantic import ValidationError

from src.codes.bitstring import BitString
from src.codes.catalog import available_css_codes, load_code_file, resolve_css
from src.codes.css_codes import dephase_average, phase_sum
from src.ghz.verification import StrategyKind, nonzero_survival_bound, survival_probability
from src.harness.config_parser import apply_overrides, load_config
from src.harness.experiment import run_experiment, write_report
from src.harness.metrics import SessionMetricsCollector
from src.harness.schemas import ExperimentSpec, GameSettings, ProtocolKind
from src.protocols.equivalence import compare_protocol_equivalence
from src.protocols.schemas import InjectedError, ProtocolConfig
from src.utils import logging
from src.utils.config import DEFAULT_MASTER_SEED, DEFAULT_QUESTIONS, master_seed_override
from src.utils.errors import ConfigParseError, OracleDivergenceError

EXIT_OK = 0
EXIT_DIVERGENCE = 1
EXIT_INVALID = 2


def _print_summary(title: str, rows: dict) -> None:
    print("\n" + "=" * 60)
    print(title)
    print("=" * 60)
    for key, value in rows.items():
        print(f"{key}: {value}")
    print("=" * 60 + "\n")


def _master_seed(flag: Optional[int]) -> Optional[int]:
    """--seed beats the environment override, which beats the config file."""
    return flag if flag is not None else master_seed_override()


def _run_batch(spec: ExperimentSpec, metrics_out: Optional[str]) -> None:
    collector = SessionMetricsCollector()
    report = run_experiment(spec, on_record=collector.record_session)
    collector.update_summary(report)

    if spec.output_path:
        write_report(report, spec.output_path)
    if metrics_out:
        collector.write(metrics_out)
        logging.info(f"Metrics written to {metrics_out}")
    print(json.dumps(report.model_dump(mode="json"), sort_keys=True, indent=2))


def command_run(args: argparse.Namespace) -> int:
    spec = apply_overrides(
        load_config(args.config),
        master_seed=_master_seed(args.seed),
        trials=args.trials,
        output_path=args.out,
        workers=args.workers,
    )
    _run_batch(spec, args.metrics_out)
    return EXIT_OK


def command_codes(args: argparse.Namespace) -> int:
    if args.code_file:
        library = load_code_file(args.code_file)
        logging.info(f"{args.code_file}: {len(library.codes)} codes, {len(library.pairs)} pairs valid")
    rows = [
        {
            "name": name,
            "n": code.n,
            "k": code.k,
            "t": code.t,
            "c1": code.c1.name,
            "c2": code.c2.name,
            "d1": code.c1.d,
            "d2_dual": code.c2_dual.d,
        }
        for name, code in available_css_codes(args.code_file).items()
    ]
    table = pd.DataFrame(rows).sort_values(["n", "name"]).reset_index(drop=True)
    print(table.to_string(index=False))
    return EXIT_OK


def command_game(args: argparse.Namespace) -> int:
    game = GameSettings(
        questions=args.questions,
        blocks=args.blocks,
        strategy=args.strategy,
        hidden=args.hidden,
        honest_weight=args.honest_weight,
        include_zero=args.include_zero,
    )
    seed = _master_seed(args.seed)
    spec = ExperimentSpec(
        protocol=ProtocolKind.VERIFICATION_GAME,
        config=ProtocolConfig(N=args.parties),
        game=game,
        trials=args.trials,
        master_seed=DEFAULT_MASTER_SEED if seed is None else seed,
        output_path=args.out,
        workers=args.workers,
    )
    _run_batch(spec, args.metrics_out)

    if args.hidden and args.parties * args.blocks <= 20:
        hidden = BitString.from_str(args.hidden)
        _print_summary("EXACT SURVIVAL", {
            "hidden label": hidden,
            "survival probability": float(survival_probability(hidden, args.questions, args.include_zero)),
            "non-zero question bound": float(nonzero_survival_bound(hidden.length, args.questions)),
            "uniform question bound": 2.0 ** -args.questions,
        })
    return EXIT_OK


def _parse_injection(text: str) -> InjectedError:
    try:
        receiver, position, pauli = text.split(":")
        return InjectedError(receiver=int(receiver), position=int(position), pauli=pauli.upper())
    except (ValueError, ValidationError) as e:
        raise ConfigParseError(f"expected RECEIVER:POSITION:PAULI, got {text!r}", key="--inject") from e


def command_oracle(args: argparse.Namespace) -> int:
    config = ProtocolConfig(
        N=args.parties,
        n=args.n,
        css=args.code,
        code_file=args.code_file,
        seed=args.seed if args.seed is not None else 0,
        injected_errors=[_parse_injection(item) for item in args.inject],
    )
    css = resolve_css(args.code, args.code_file)

    identity_failures = [
        x for x in range(1 << css.n)
        if phase_sum(BitString(x, css.n)) != ((1 << css.n) if x == 0 else 0)
    ]
    worst = 0.0
    try:
        for label_value in range(css.num_cosets):
            representative = css.representative(BitString(label_value, css.k))
            for x_value in range(1 << css.n):
                report = dephase_average(css, representative, BitString(x_value, css.n))
                worst = max(worst, report.max_difference)
        equivalence = compare_protocol_equivalence(config, perturbation=args.perturb)
        equivalence.assert_passed()
    except OracleDivergenceError as e:
        logging.error(f"Oracle divergence: {e}")
        return EXIT_DIVERGENCE
    finally:
        _print_summary("ORACLE RESULTS", {
            "code": css.name,
            "phase-sum identity failures": len(identity_failures),
            "max dephasing difference": f"{worst:.3e}",
        })

    _print_summary("PROTOCOL EQUIVALENCE", {
        "operator difference": f"{equivalence.max_difference:.3e}",
        "css keys": [str(k) for k in equivalence.css_keys or ()],
        "pm keys": [str(k) for k in equivalence.pm_keys or ()],
        "passed": equivalence.passed,
    })
    return EXIT_OK if not identity_failures else EXIT_DIVERGENCE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mqkd",
        description="Simulate multiparty quantum key distribution protocols and their oracles."
    )
    parser.add_argument('--log-level', type=str, default='INFO',
                        help='Logging level (DEBUG, INFO, WARNING, ERROR).')
    subparsers = parser.add_subparsers(dest="command", required=True)

    run = subparsers.add_parser("run", help="Run an experiment batch from a config file.")
    run.add_argument('--config', type=str, required=True, help='Experiment config file (key = value lines).')
    run.add_argument('--seed', type=int, default=None, help='Master seed (overrides file and environment).')
    run.add_argument('--trials', type=int, default=None, help='Number of sessions.')
    run.add_argument('--out', type=str, default=None, help='JSON-lines results file.')
    run.add_argument('--workers', type=int, default=None, help='Worker processes (-1 = all cores).')
    run.add_argument('--metrics-out', type=str, default=None, help='Prometheus text file for batch metrics.')
    run.set_defaults(handler=command_run)

    codes = subparsers.add_parser("codes", help="List the CSS catalog and validate a code file.")
    codes.add_argument('--code-file', type=str, default=None, help='Extra code definition file.')
    codes.set_defaults(handler=command_codes)

    game = subparsers.add_parser("game", help="Play the random-parity verification game.")
    game.add_argument('--parties', type=int, default=3)
    game.add_argument('--blocks', type=int, default=1)
    game.add_argument('--questions', type=int, default=DEFAULT_QUESTIONS)
    game.add_argument('--strategy', type=str, default=str(StrategyKind.HONEST),
                      choices=[str(StrategyKind.HONEST), str(StrategyKind.FIXED_STRING),
                               str(StrategyKind.CLASSICAL_MIXTURE)])
    game.add_argument('--hidden', type=str, default=None, help='Prover label (N·blocks bits).')
    game.add_argument('--honest-weight', type=float, default=0.5)
    game.add_argument('--include-zero', action='store_true', help='Allow the all-zero question.')
    game.add_argument('--trials', type=int, default=1000)
    game.add_argument('--seed', type=int, default=None)
    game.add_argument('--out', type=str, default=None)
    game.add_argument('--workers', type=int, default=1)
    game.add_argument('--metrics-out', type=str, default=None)
    game.set_defaults(handler=command_game)

    oracle = subparsers.add_parser("oracle", help="Dephasing and protocol equivalence checks.")
    oracle.add_argument('--code', type=str, default='rep3', help='CSS pair with n ≤ 6 and two cosets.')
    oracle.add_argument('--code-file', type=str, default=None)
    oracle.add_argument('--parties', type=int, default=3)
    oracle.add_argument('--n', type=int, default=4)
    oracle.add_argument('--seed', type=int, default=None)
    oracle.add_argument('--inject', action='append', default=[], help='RECEIVER:POSITION:PAULI, repeatable.')
    oracle.add_argument('--perturb', type=float, default=0.0, help='Deliberate operator perturbation.')
    oracle.set_defaults(handler=command_oracle)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main function for CLI usage."""
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        logging.setup_logging(log_level=logging.level_from_name(args.log_level))
        return args.handler(args)
    # ConfigParseError, DomainError and pydantic ValidationError are ValueErrors
    except (ValueError, FileNotFoundError, KeyError) as e:
        logging.error(f"Invalid configuration: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
