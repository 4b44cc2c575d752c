"""
Executable checks of the protocols: completeness sweeps, exhaustive soundness
against the oracle validators, zero-knowledge statistical audits and cost audits.
"""

from __future__ import annotations

import functools
import itertools
import json
import logging
import math
import os
from collections import Counter
from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
import pandas as pd
from scipy.stats import chi2, chisquare

from .abc_end_view import AbcEndViewProtocol, AbcPuzzle, AbcSolution, validate_abc
from .card_engine import CardEngine, RevealEvent, RiggedShuffleEngine, ShuffleEvent, ShuffleKind, Transcript
from .goishi_hiroi import GoishiHiroiProtocol, GoishiPuzzle, GoishiSolution, validate_goishi
from .transcript_file import format_event
from .zk_primitives import ANCHOR_ROW, MARKER_ROW, BaseZkProtocol, InvalidWitnessError, ProtocolOutcome

logger = logging.getLogger(__name__)

DEFAULT_SEED = 42
DEFAULT_SIGNIFICANCE = 0.01
DEFAULT_TV_THRESHOLD = 0.05
DEFAULT_ENUMERATION_LIMIT = 10**6
PARALLEL_SWEEP_MIN_TRIALS = 200

EngineFactory = Callable[..., CardEngine]


class EnumerationTooLargeError(ValueError):
    """Raised when an exhaustive sweep would enumerate too many witnesses."""


def build_protocol(puzzle: AbcPuzzle | GoishiPuzzle, witness: AbcSolution | GoishiSolution) -> BaseZkProtocol:
    """Bind a puzzle to the prover's witness."""
    if isinstance(puzzle, AbcPuzzle):
        return AbcEndViewProtocol(puzzle, witness)
    if isinstance(puzzle, GoishiPuzzle):
        return GoishiHiroiProtocol(puzzle, witness)
    raise TypeError(f"No protocol for puzzle type {type(puzzle).__name__}")


def is_valid_witness(puzzle: AbcPuzzle | GoishiPuzzle, witness: AbcSolution | GoishiSolution) -> bool:
    if isinstance(puzzle, AbcPuzzle):
        try:
            return validate_abc(puzzle, witness)
        except InvalidWitnessError:
            return False
    return validate_goishi(puzzle, witness)


def rigged_engine_factory(offset: int = 1) -> EngineFactory:
    """Engine factory whose pile-shifting shuffles always use the same offset."""
    return functools.partial(RiggedShuffleEngine, offset=offset)


def _run_once(instance: BaseZkProtocol, seed, engine_factory: EngineFactory | None) -> ProtocolOutcome:
    if engine_factory is None:
        return instance.run(seed=seed)
    return instance.run(engine=engine_factory(instance.max_value(), seed=seed))


# Reports

@dataclass
class TrialReport:
    runs: int = 0
    accepts: int = 0
    rejects_by_reason: dict[str, int] = field(default_factory=dict)
    shuffle_histogram: dict[int, int] = field(default_factory=dict)
    marker_histogram: dict[int, int] = field(default_factory=dict)
    disagreements: int = 0

    @property
    def rejects(self) -> int:
        return sum(self.rejects_by_reason.values())

    def record(self, outcome: ProtocolOutcome) -> None:
        self.runs += 1
        if outcome.accepted:
            self.accepts += 1
        else:
            self.rejects_by_reason[outcome.reason] = self.rejects_by_reason.get(outcome.reason, 0) + 1
        shuffles = outcome.transcript.shuffle_count()
        self.shuffle_histogram[shuffles] = self.shuffle_histogram.get(shuffles, 0) + 1
        for observation in marker_positions(outcome.transcript):
            if observation.row == MARKER_ROW:
                self.marker_histogram[observation.column] = self.marker_histogram.get(observation.column, 0) + 1

    def merge(self, other: TrialReport) -> TrialReport:
        return TrialReport(
            runs=self.runs + other.runs,
            accepts=self.accepts + other.accepts,
            rejects_by_reason=dict(Counter(self.rejects_by_reason) + Counter(other.rejects_by_reason)),
            shuffle_histogram=dict(Counter(self.shuffle_histogram) + Counter(other.shuffle_histogram)),
            marker_histogram=dict(Counter(self.marker_histogram) + Counter(other.marker_histogram)),
            disagreements=self.disagreements + other.disagreements,
        )

    def to_dict(self) -> dict:
        return {
            "runs": self.runs,
            "accepts": self.accepts,
            "rejects_by_reason": dict(sorted(self.rejects_by_reason.items())),
            "shuffle_histogram": {str(k): v for k, v in sorted(self.shuffle_histogram.items())},
            "marker_histogram": {str(k): v for k, v in sorted(self.marker_histogram.items())},
            "disagreements": self.disagreements,
        }

    def to_text(self) -> str:
        lines = [
            f"runs: {self.runs}",
            f"accepts: {self.accepts}",
            f"rejects: {self.rejects}",
        ]
        lines += [f"  {reason}: {count}" for reason, count in sorted(self.rejects_by_reason.items())]
        lines.append("shuffles: " + " ".join(f"{k}x{v}" for k, v in sorted(self.shuffle_histogram.items())))
        lines.append("marker columns: " + " ".join(f"{k}:{v}" for k, v in sorted(self.marker_histogram.items())))
        if self.disagreements:
            lines.append(f"disagreements: {self.disagreements}")
        return "\n".join(lines) + "\n"


@dataclass
class ZkAuditReport:
    chi_square_stat: float
    dof: int
    p_value: float
    passed: bool
    sites: int = 0
    trials: int = 0
    tv_distance: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    def to_text(self) -> str:
        lines = [
            f"trials: {self.trials}",
            f"cut sites: {self.sites}",
            f"chi-square: {self.chi_square_stat:.4f} (dof {self.dof})",
            f"p-value: {self.p_value:.4f}",
        ]
        if self.tv_distance is not None:
            lines.append(f"tv distance: {self.tv_distance:.4f}")
        lines.append(f"result: {'pass' if self.passed else 'fail'}")
        return "\n".join(lines) + "\n"


@dataclass
class CostReport:
    kind: str
    cards_allocated: int
    grid_cards: int
    peak_matrix_cards: int
    shuffles: int
    expected_shuffles: int
    accepted: bool

    @property
    def ok(self) -> bool:
        return self.accepted and self.shuffles == self.expected_shuffles

    def to_dict(self) -> dict:
        return {**asdict(self), "ok": self.ok}

    def to_text(self) -> str:
        return (
            f"kind: {self.kind}\n"
            f"cards allocated: {self.cards_allocated}\n"
            f"grid cards: {self.grid_cards}\n"
            f"peak matrix cards: {self.peak_matrix_cards}\n"
            f"shuffles: {self.shuffles} (expected {self.expected_shuffles})\n"
            f"result: {'pass' if self.ok else 'fail'}\n"
        )


def report_json(*reports) -> str:
    return json.dumps([report.to_dict() for report in reports], ensure_ascii=False, indent=4)


# Transcript observations

@dataclass(frozen=True)
class CutObservation:
    site: int
    row: int
    column: int
    cols: int


def marker_positions(transcript: Transcript) -> list[CutObservation]:
    """
    Column of the single 1 in every chosen-cut marker or anchor reveal.

    A chosen cut shows up as a 3-row pile-shifting shuffle followed by one full
    row of reveals; site numbers those rows in transcript order.
    """
    events = list(transcript)
    observations = []
    for index, event in enumerate(events):
        if not (isinstance(event, ShuffleEvent) and event.kind is ShuffleKind.CYCLIC and event.rows == 3):
            continue
        row_events = events[index + 1:index + 1 + event.cols]
        if len(row_events) != event.cols or not all(isinstance(e, RevealEvent) for e in row_events):
            continue
        rows = {e.row for e in row_events}
        values = [e.value for e in row_events]
        if len(rows) != 1 or rows.isdisjoint({MARKER_ROW, ANCHOR_ROW}) or values.count(1) != 1:
            continue
        observations.append(CutObservation(len(observations), rows.pop(), values.index(1), event.cols))
    return observations


# Sweeps

def _sweep_chunk(instance: BaseZkProtocol, seeds: Sequence, engine_factory: EngineFactory | None) -> TrialReport:
    report = TrialReport()
    for seed in seeds:
        report.record(_run_once(instance, seed, engine_factory))
    return report


def resolve_workers(workers: int | None, trials: int) -> int:
    """Worker count for a sweep, never more than the number of trials."""
    if workers is None or workers <= 0:
        workers = (os.cpu_count() or 1) if trials >= PARALLEL_SWEEP_MIN_TRIALS else 1
    return max(1, min(workers, trials))


def completeness_sweep(
    instance: BaseZkProtocol,
    trials: int,
    seed: int = DEFAULT_SEED,
    workers: int | None = None,
    engine_factory: EngineFactory | None = None,
) -> TrialReport:
    """
    Run the protocol trials times with seeds split from the master seed.

    Args:
        instance: Protocol bound to a valid witness
        trials: Number of runs
        seed: Master seed
        workers: Worker processes; chunks are merged in submission order.
            None or 0 uses every CPU once trials reach PARALLEL_SWEEP_MIN_TRIALS
        engine_factory: Replacement engine constructor (max_value, seed=...)

    Returns:
        TrialReport: Merged report; accepts equals trials for a valid witness
    """
    seeds = np.random.SeedSequence(seed).spawn(trials)
    workers = resolve_workers(workers, trials)
    if workers <= 1:
        report = _sweep_chunk(instance, seeds, engine_factory)
    else:
        chunk_size = math.ceil(trials / workers)
        chunks = [seeds[i:i + chunk_size] for i in range(0, trials, chunk_size)]
        report = TrialReport()
        with ProcessPoolExecutor(max_workers=workers) as executor:
            futures = [executor.submit(_sweep_chunk, instance, chunk, engine_factory) for chunk in chunks]
            for future in futures:
                report = report.merge(future.result())
    logger.info("%s: %d/%d runs accepted", instance.describe(), report.accepts, report.runs)
    return report


def _candidate_witnesses(puzzle: AbcPuzzle | GoishiPuzzle, limit: int):
    if isinstance(puzzle, AbcPuzzle):
        count = (puzzle.k + 1) ** (puzzle.n ** 2)
        if count > limit:
            raise EnumerationTooLargeError(f"{count} candidate grids exceed the limit of {limit}")
        cells = itertools.product(range(puzzle.k + 1), repeat=puzzle.n ** 2)
        return (
            AbcSolution.from_rows(flat[r * puzzle.n:(r + 1) * puzzle.n] for r in range(puzzle.n))
            for flat in cells
        )
    count = math.factorial(puzzle.m)
    if count > limit:
        raise EnumerationTooLargeError(f"{count} pick orders exceed the limit of {limit}")
    return (GoishiSolution(order) for order in itertools.permutations(sorted(puzzle.stones)))


def soundness_exhaustive(
    puzzle: AbcPuzzle | GoishiPuzzle,
    seed: int = DEFAULT_SEED,
    limit: int = DEFAULT_ENUMERATION_LIMIT,
) -> TrialReport:
    """
    Prove with every candidate witness and compare each verdict with the oracle.

    ABC candidates are all grids over 0..k; Goishi candidates are all pick orders.

    Raises:
        EnumerationTooLargeError: when the candidate count exceeds limit
    """
    report = TrialReport()
    for witness in _candidate_witnesses(puzzle, limit):
        outcome = build_protocol(puzzle, witness).run(seed=seed)
        report.record(outcome)
        if outcome.accepted != is_valid_witness(puzzle, witness):
            report.disagreements += 1
            logger.warning("Verdict disagrees with the oracle for %s", witness)
    logger.info("Soundness sweep: %d witnesses, %d disagreements", report.runs, report.disagreements)
    return report


# Zero-knowledge audits

def _combined_chi_square(observations: pd.DataFrame) -> tuple[float, int, int]:
    total_stat, total_dof, sites = 0.0, 0, 0
    for (_, cols), group in observations.groupby(["site", "cols"]):
        sites += 1
        if cols < 2:
            continue
        counts = group["column"].value_counts().reindex(range(cols), fill_value=0)
        stat, _ = chisquare(counts.to_numpy())
        total_stat += float(stat)
        total_dof += cols - 1
    return total_stat, total_dof, sites


def zk_uniformity_audit(
    instance: BaseZkProtocol,
    trials: int,
    seed: int = DEFAULT_SEED,
    engine_factory: EngineFactory | None = None,
    significance: float = DEFAULT_SIGNIFICANCE,
) -> ZkAuditReport:
    """
    Chi-square goodness of fit of chosen-cut marker and anchor positions against uniform.

    Each cut site is tested separately; statistics and degrees of freedom are
    summed into one test. Sites with a single column carry no information.
    """
    rows = []
    for trial_seed in np.random.SeedSequence(seed).spawn(trials):
        outcome = _run_once(instance, trial_seed, engine_factory)
        rows.extend(asdict(observation) for observation in marker_positions(outcome.transcript))
    observations = pd.DataFrame(rows, columns=["site", "row", "column", "cols"])

    stat, dof, sites = _combined_chi_square(observations)
    p_value = float(chi2.sf(stat, dof)) if dof > 0 else 1.0
    report = ZkAuditReport(
        chi_square_stat=stat,
        dof=dof,
        p_value=p_value,
        passed=p_value >= significance,
        sites=sites,
        trials=trials,
    )
    logger.info("Uniformity audit of %s: chi2=%.3f dof=%d p=%.4f", instance.describe(), stat, dof, p_value)
    return report


def event_histogram(transcripts: Sequence[Transcript]) -> pd.Series:
    """Event counts binned by kind, position and revealed value."""
    counts = Counter(format_event(event) for transcript in transcripts for event in transcript)
    return pd.Series(counts, dtype="float64")


def tv_distance(left: pd.Series, right: pd.Series) -> float:
    table = pd.concat([left, right], axis=1).fillna(0.0)
    totals = table.sum()
    if (totals == 0).any():
        return 0.0 if (totals == 0).all() else 1.0
    probabilities = table / totals
    return float((probabilities.iloc[:, 0] - probabilities.iloc[:, 1]).abs().sum() / 2)


def zk_witness_equivalence(
    puzzle: AbcPuzzle | GoishiPuzzle,
    w1: AbcSolution | GoishiSolution,
    w2: AbcSolution | GoishiSolution,
    trials: int,
    seed: int = DEFAULT_SEED,
    engine_factory: EngineFactory | None = None,
    threshold: float = DEFAULT_TV_THRESHOLD,
) -> ZkAuditReport:
    """
    Compare the transcript distributions produced by two valid witnesses.

    Raises:
        InvalidWitnessError: when either witness is not a solution
    """
    for witness in (w1, w2):
        if not is_valid_witness(puzzle, witness):
            raise InvalidWitnessError(f"Not a solution of the puzzle: {witness}")

    histograms = []
    for witness, stream in zip((w1, w2), np.random.SeedSequence(seed).spawn(2)):
        instance = build_protocol(puzzle, witness)
        transcripts = [_run_once(instance, s, engine_factory).transcript for s in stream.spawn(trials)]
        histograms.append(event_histogram(transcripts))

    distance = tv_distance(*histograms)
    logger.info("Witness equivalence: tv=%.4f over %d trials each", distance, trials)
    return ZkAuditReport(
        chi_square_stat=0.0,
        dof=0,
        p_value=1.0,
        passed=distance < threshold,
        trials=trials,
        tv_distance=distance,
    )


def cost_audit(instance: BaseZkProtocol, seed: int = DEFAULT_SEED) -> CostReport:
    """Count cards and shuffles of a single run against the closed-form totals."""
    outcome = instance.run(seed=seed)
    report = CostReport(
        kind=instance.kind,
        cards_allocated=outcome.cards_allocated,
        grid_cards=instance.grid_cards(),
        peak_matrix_cards=outcome.peak_matrix_cards,
        shuffles=outcome.transcript.shuffle_count(),
        expected_shuffles=instance.expected_shuffles(),
        accepted=outcome.accepted,
    )
    if not report.ok:
        logger.warning("Cost audit of %s failed: %s", instance.describe(), report)
    return report
