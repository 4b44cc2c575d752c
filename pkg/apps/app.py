"""
Command-line front end: solve puzzle files, run zero-knowledge proofs, replay
transcripts and audit the protocols.

Coordinates in picks lines and transcripts are 0-based (row,col).
"""

import argparse
import logging
import os
import sys

from dotenv import load_dotenv

from utils.card_engine import RiggedShuffleEngine
from utils.goishi_hiroi import GoishiPuzzle, solve_goishi
from utils.abc_end_view import solve_abc
from utils.puzzle_files import PuzzleFormatError, format_witness, load_puzzle_file
from utils.result_manager import (create_result_directory, get_all_result_dirs, get_result_info,
                                  save_report, save_transcript)
from utils.transcript_file import TranscriptFormatError, dump_transcript, read_transcript, write_transcript
from utils.transcript_verifier import TranscriptViolation, verify_transcript
from utils.verification_harness import (build_protocol, completeness_sweep, cost_audit,
                                        rigged_engine_factory, zk_uniformity_audit)
import config

logger = logging.getLogger(__name__)


def _configure_logging() -> None:
    logging.basicConfig(
        level=config.LOG_LEVEL,
        format=config.LOG_FORMAT,
        stream=sys.stderr,
    )


def _seed(raw: str) -> int:
    try:
        value = int(raw)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {raw!r}") from None
    if not 0 <= value <= config.MAX_SEED:
        raise argparse.ArgumentTypeError(f"seed must be a 64-bit unsigned integer, got {value}")
    return value


def _non_negative(raw: str) -> int:
    try:
        value = int(raw)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {raw!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {value}")
    return value


def _positive(raw: str) -> int:
    value = _non_negative(raw)
    if value == 0:
        raise argparse.ArgumentTypeError("expected a positive integer, got 0")
    return value


def _error(message: str) -> None:
    print(message, file=sys.stderr)


def _load(path):
    """Parse a puzzle file; returns None after reporting a parse error."""
    try:
        return load_puzzle_file(path)
    except (PuzzleFormatError, OSError) as e:
        _error(config.ERROR_MESSAGES['parse_failed'].format(path=path, error=e))
        return None


def _puzzle_name(path):
    return os.path.splitext(os.path.basename(path))[0]


def cmd_solve(args) -> int:
    parsed = _load(args.path)
    if parsed is None:
        return config.EXIT_PARSE_ERROR

    if isinstance(parsed.puzzle, GoishiPuzzle):
        solutions = solve_goishi(parsed.puzzle, args.limit)
    else:
        solutions = solve_abc(parsed.puzzle, args.limit)

    if not solutions:
        _error(config.ERROR_MESSAGES['no_solutions'])
        return config.EXIT_REJECTED
    print("\n".join(format_witness(solution) for solution in solutions), end="")
    logger.info("Found %d solutions for %s", len(solutions), args.path)
    return config.EXIT_OK


def cmd_prove(args) -> int:
    parsed = _load(args.path)
    if parsed is None:
        return config.EXIT_PARSE_ERROR
    if parsed.witness is None:
        _error(config.ERROR_MESSAGES['missing_witness'].format(path=args.path))
        return config.EXIT_MISSING_WITNESS

    protocol = build_protocol(parsed.puzzle, parsed.witness)
    outcome = protocol.run(seed=args.seed)

    if args.transcript:
        write_transcript(outcome.transcript, args.transcript)
        summary = outcome.verdict.value
        if not outcome.accepted:
            summary += f" reason={outcome.reason}" + (f" at={outcome.location}" if outcome.location else "")
        print(summary)
    else:
        print(dump_transcript(outcome.transcript), end="")

    if args.save:
        name = _puzzle_name(args.path)
        result_dir = create_result_directory(config.RESULTS_BASE_DIR, label=f"prove_{name}")
        save_transcript(outcome.transcript, result_dir, name)
        save_report({
            "command": "prove",
            "puzzle": protocol.describe(),
            "seed": args.seed,
            "verdict": outcome.verdict.value,
            "reason": outcome.reason,
            "location": outcome.location,
            "shuffles": outcome.transcript.shuffle_count(),
            "cards_allocated": outcome.cards_allocated,
            "passed": outcome.accepted,
        }, result_dir, name)
        logger.info("Saved proof run to %s", result_dir)

    return config.EXIT_OK if outcome.accepted else config.EXIT_REJECTED


def cmd_verify_transcript(args) -> int:
    parsed = _load(args.puzzle_path)
    if parsed is None:
        return config.EXIT_PARSE_ERROR
    try:
        transcript = read_transcript(args.transcript_path)
    except (TranscriptFormatError, OSError) as e:
        _error(config.ERROR_MESSAGES['transcript_unreadable'].format(path=args.transcript_path, error=e))
        return config.EXIT_REJECTED
    try:
        verify_transcript(parsed.puzzle, transcript)
    except TranscriptViolation as e:
        _error(config.ERROR_MESSAGES['transcript_rejected'].format(error=e))
        return config.EXIT_REJECTED
    print("ok")
    return config.EXIT_OK


def cmd_audit(args) -> int:
    parsed = _load(args.path)
    if parsed is None:
        return config.EXIT_PARSE_ERROR
    if parsed.witness is None:
        _error(config.ERROR_MESSAGES['missing_witness'].format(path=args.path))
        return config.EXIT_MISSING_WITNESS

    protocol = build_protocol(parsed.puzzle, parsed.witness)
    engine_factory = rigged_engine_factory() if args.biased_shuffle else None
    if args.biased_shuffle:
        logger.warning("Using %s: uniformity is expected to fail", RiggedShuffleEngine.__name__)

    sweep = completeness_sweep(protocol, args.trials, args.seed, workers=args.workers, engine_factory=engine_factory)
    uniformity = zk_uniformity_audit(
        protocol,
        args.trials,
        args.seed,
        engine_factory=engine_factory,
        significance=config.CHI_SQUARE_SIGNIFICANCE,
    )
    cost = cost_audit(protocol, args.seed)

    checks = {
        "completeness": sweep.accepts == sweep.runs,
        "uniformity": uniformity.passed,
        "cost": cost.ok,
    }
    print(f"# {protocol.describe()}")
    print("## completeness")
    print(sweep.to_text(), end="")
    print("## uniformity")
    print(uniformity.to_text(), end="")
    print("## cost")
    print(cost.to_text(), end="")

    passed = all(checks.values())
    if not passed:
        failed = ", ".join(name for name, ok in checks.items() if not ok)
        _error(config.ERROR_MESSAGES['audit_failed'].format(checks=failed))

    if args.save:
        name = _puzzle_name(args.path)
        result_dir = create_result_directory(config.RESULTS_BASE_DIR, label=f"audit_{name}")
        save_report({
            "command": "audit",
            "puzzle": protocol.describe(),
            "seed": args.seed,
            "trials": args.trials,
            "biased_shuffle": args.biased_shuffle,
            "completeness": sweep.to_dict(),
            "uniformity": uniformity.to_dict(),
            "cost": cost.to_dict(),
            "checks": checks,
            "passed": passed,
        }, result_dir, name)
        logger.info("Saved audit report to %s", result_dir)

    return config.EXIT_OK if passed else config.EXIT_REJECTED


def cmd_list_results(args) -> int:
    result_dirs = get_all_result_dirs(config.RESULTS_BASE_DIR)
    if not result_dirs:
        print(f"No saved results under {config.RESULTS_BASE_DIR}")
        return config.EXIT_OK
    for result_dir in result_dirs:
        info = get_result_info(result_dir)
        status = {True: "pass", False: "fail", None: "-"}[info["passed"]]
        print(f"{info['timestamp']}  {info['command'] or '-'}  {info['puzzle_name'] or '-'}  {status}  {info['dir']}")
    return config.EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cardzk",
        description="Card-based zero-knowledge proofs for ABC End View and Goishi Hiroi. "
                    "Coordinates are 0-based (row,col).",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    solve = subparsers.add_parser("solve", help="Print the solutions of a puzzle file")
    solve.add_argument("path")
    solve.add_argument("--limit", type=_positive, default=None, help="Stop after this many solutions")
    solve.set_defaults(handler=cmd_solve)

    prove = subparsers.add_parser("prove", help="Run the proof with the file's solution/picks block")
    prove.add_argument("path")
    prove.add_argument("--seed", type=_seed, default=config.DEFAULT_SEED, help="64-bit unsigned seed")
    prove.add_argument("--transcript", default=None, help="Write the transcript here instead of stdout")
    prove.add_argument("--save", action="store_true", help="Keep report and transcript under the results directory")
    prove.set_defaults(handler=cmd_prove)

    verify = subparsers.add_parser("verify-transcript", help="Replay a transcript against the public puzzle")
    verify.add_argument("puzzle_path")
    verify.add_argument("transcript_path")
    verify.set_defaults(handler=cmd_verify_transcript)

    audit = subparsers.add_parser("audit", help="Completeness sweep, uniformity audit and cost audit")
    audit.add_argument("path")
    audit.add_argument("--trials", type=_non_negative, default=config.DEFAULT_TRIALS)
    audit.add_argument("--seed", type=_seed, default=config.DEFAULT_SEED, help="64-bit unsigned seed")
    audit.add_argument("--workers", type=_non_negative, default=config.AUDIT_WORKERS,
                       help="Worker processes for the completeness sweep (0 = automatic)")
    audit.add_argument("--biased-shuffle", action="store_true",
                       help="Debug: use a constant shuffle offset (the uniformity audit must fail)")
    audit.add_argument("--save", action="store_true", help="Keep the report under the results directory")
    audit.set_defaults(handler=cmd_audit)

    list_results = subparsers.add_parser("list-results", help="List saved runs")
    list_results.set_defaults(handler=cmd_list_results)

    return parser


def main(argv=None) -> int:
    load_dotenv(override=False)
    _configure_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except Exception as e:
        logger.exception("Command failed. command=%s", args.command)
        _error(config.ERROR_MESSAGES['unexpected_error'].format(error=e))
        return config.EXIT_REJECTED


if __name__ == "__main__":
    sys.exit(main())
