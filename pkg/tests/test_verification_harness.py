import time

import pandas as pd
import pytest

from utils.abc_end_view import AbcEndViewProtocol, AbcPuzzle, AbcSolution, solve_abc
from utils.goishi_hiroi import GoishiHiroiProtocol, GoishiPuzzle, GoishiSolution
from utils.verification_harness import (
    EnumerationTooLargeError,
    TrialReport,
    build_protocol,
    completeness_sweep,
    cost_audit,
    marker_positions,
    resolve_workers,
    rigged_engine_factory,
    soundness_exhaustive,
    tv_distance,
    zk_uniformity_audit,
    zk_witness_equivalence,
)
from utils.zk_primitives import FirstNonZeroProtocol, InvalidWitnessError


def test_build_protocol(abc5_puzzle, abc5_solution, goishi6_puzzle, goishi6_solution):
    assert isinstance(build_protocol(abc5_puzzle, abc5_solution), AbcEndViewProtocol)
    assert isinstance(build_protocol(goishi6_puzzle, goishi6_solution), GoishiHiroiProtocol)
    with pytest.raises(TypeError):
        build_protocol("puzzle", abc5_solution)


# Completeness

def test_completeness_abc5(abc5_puzzle, abc5_solution):
    report = completeness_sweep(build_protocol(abc5_puzzle, abc5_solution), trials=1000, seed=1)
    assert report.runs == report.accepts == 1000
    assert report.shuffle_histogram == {36: 1000}


def test_completeness_goishi6_small(goishi6_puzzle, goishi6_solution):
    report = completeness_sweep(build_protocol(goishi6_puzzle, goishi6_solution), trials=20, seed=1)
    assert report.accepts == 20
    assert report.shuffle_histogram == {68: 20}


@pytest.mark.slow
def test_completeness_goishi6_thousand_runs_in_time(goishi6_puzzle, goishi6_solution):
    instance = build_protocol(goishi6_puzzle, goishi6_solution)
    started = time.perf_counter()
    report = completeness_sweep(instance, trials=1000, seed=1)
    elapsed = time.perf_counter() - started
    assert report.runs == report.accepts == 1000
    assert report.shuffle_histogram == {68: 1000}
    assert elapsed < 10


@pytest.mark.parametrize("workers, trials, expected", [
    (1, 1000, 1),
    (4, 1000, 4),
    (8, 3, 3),
    (None, 199, 1),
    (0, 50, 1),
    (3, 0, 1),
])
def test_resolve_workers(workers, trials, expected):
    assert resolve_workers(workers, trials) == expected


def test_resolve_workers_automatic_for_large_sweeps(monkeypatch):
    monkeypatch.setattr("utils.verification_harness.os.cpu_count", lambda: 6)
    assert resolve_workers(None, 1000) == 6
    assert resolve_workers(0, 4) == 1
    monkeypatch.setattr("utils.verification_harness.os.cpu_count", lambda: None)
    assert resolve_workers(None, 1000) == 1


def test_completeness_trivial_instances():
    abc = completeness_sweep(build_protocol(AbcPuzzle.blank(1, 1), AbcSolution.from_rows([[1]])), trials=10)
    goishi = completeness_sweep(
        build_protocol(GoishiPuzzle.from_cells(1, [(0, 0)]), GoishiSolution.from_cells([(0, 0)])),
        trials=10,
    )
    assert abc.accepts == goishi.accepts == 10


def test_completeness_workers_match_sequential(abc5_puzzle, abc5_solution):
    instance = build_protocol(abc5_puzzle, abc5_solution)
    sequential = completeness_sweep(instance, trials=40, seed=9)
    parallel = completeness_sweep(instance, trials=40, seed=9, workers=2)
    assert parallel.to_dict() == sequential.to_dict()


def test_completeness_same_seed_same_report(abc5_puzzle, abc5_solution):
    instance = build_protocol(abc5_puzzle, abc5_solution)
    first = completeness_sweep(instance, trials=30, seed=5)
    second = completeness_sweep(instance, trials=30, seed=5)
    assert first.to_text() == second.to_text()


def test_trial_report_merge():
    left = TrialReport(runs=2, accepts=1, rejects_by_reason={"multiset-mismatch": 1}, shuffle_histogram={2: 2})
    right = TrialReport(runs=1, accepts=0, rejects_by_reason={"multiset-mismatch": 1}, shuffle_histogram={2: 1})
    merged = left.merge(right)
    assert merged.runs == merged.accepts + merged.rejects == 3
    assert merged.rejects_by_reason == {"multiset-mismatch": 2}
    assert merged.shuffle_histogram == {2: 3}


# Soundness

@pytest.mark.parametrize("puzzle, candidates", [
    (AbcPuzzle.blank(2, 1), 16),
    (AbcPuzzle(2, 1, (None, 1), (None, None), (None, None), (None, None)), 16),
    (AbcPuzzle.blank(2, 2), 81),
    (AbcPuzzle(2, 2, (2, None), (None, None), (None, None), (None, None)), 81),
    (AbcPuzzle.blank(3, 1), 512),
    (AbcPuzzle(3, 1, (None,) * 3, (None,) * 3, (None, 1, None), (None,) * 3), 512),
    pytest.param(
        AbcPuzzle(3, 2, (1, None, 2), (None,) * 3, (None, 2, None), (None,) * 3), 3 ** 9,
        marks=pytest.mark.slow,
    ),
])
def test_soundness_abc(puzzle, candidates):
    report = soundness_exhaustive(puzzle)
    assert report.runs == candidates
    assert report.disagreements == 0
    assert report.accepts == len(solve_abc(puzzle))


@pytest.mark.parametrize("cells", [
    [(0, 0), (0, 1), (0, 2)],
    [(0, 0), (0, 2), (2, 2)],
    [(0, 0), (0, 1), (1, 1), (1, 0)],
    [(0, 1), (1, 0), (1, 1), (1, 2)],
])
def test_soundness_goishi(cells):
    report = soundness_exhaustive(GoishiPuzzle.from_cells(3, cells))
    assert report.disagreements == 0
    assert report.runs in (6, 24)


def test_soundness_guard():
    with pytest.raises(EnumerationTooLargeError):
        soundness_exhaustive(AbcPuzzle.blank(4, 2))
    with pytest.raises(EnumerationTooLargeError):
        soundness_exhaustive(GoishiPuzzle.from_cells(4, [(r, c) for r in range(4) for c in range(3)]))


# Zero knowledge

def test_marker_positions_read_public_view(abc5_puzzle, abc5_solution):
    outcome = build_protocol(abc5_puzzle, abc5_solution).run(seed=4)
    observations = marker_positions(outcome.transcript)
    # one marker and one anchor row per clue check
    assert len(observations) == 2 * abc5_puzzle.clue_count()
    assert all(observation.cols == 9 for observation in observations)
    assert [observation.site for observation in observations] == list(range(16))


def test_uniformity_abc5(abc5_puzzle, abc5_solution):
    instance = build_protocol(abc5_puzzle, abc5_solution)
    assert zk_uniformity_audit(instance, trials=300, seed=42).passed
    assert not zk_uniformity_audit(instance, trials=300, seed=42, engine_factory=rigged_engine_factory()).passed


@pytest.mark.slow
def test_uniformity_abc5_ten_thousand_runs(abc5_puzzle, abc5_solution):
    report = zk_uniformity_audit(build_protocol(abc5_puzzle, abc5_solution), trials=10_000, seed=42)
    assert report.passed
    assert report.p_value >= 0.01


def test_uniformity_zero_trials():
    report = zk_uniformity_audit(FirstNonZeroProtocol([0, 1], 1), trials=0)
    assert report.passed
    assert report.dof == 0


def test_witness_equivalence_abc():
    puzzle = AbcPuzzle.blank(3, 1)
    first, second = solve_abc(puzzle)[:2]
    assert zk_witness_equivalence(puzzle, first, second, trials=2000, seed=3).passed


@pytest.mark.slow
def test_witness_equivalence_abc_ten_thousand_runs():
    puzzle = AbcPuzzle.blank(3, 1)
    first, second = solve_abc(puzzle)[:2]
    report = zk_witness_equivalence(puzzle, first, second, trials=10_000, seed=3)
    assert report.passed
    assert report.tv_distance < 0.05


def test_witness_equivalence_same_witness():
    puzzle = AbcPuzzle.blank(3, 1)
    witness = solve_abc(puzzle)[0]
    report = zk_witness_equivalence(puzzle, witness, witness, trials=2000, seed=3)
    assert report.tv_distance < 0.02


def test_witness_equivalence_goishi(pair_puzzle):
    east = GoishiSolution.from_cells([(0, 0), (0, 1)])
    west = GoishiSolution.from_cells([(0, 1), (0, 0)])
    assert zk_witness_equivalence(pair_puzzle, east, west, trials=1000, seed=8).passed


def test_witness_equivalence_negative_control(pair_puzzle):
    east = GoishiSolution.from_cells([(0, 0), (0, 1)])
    west = GoishiSolution.from_cells([(0, 1), (0, 0)])
    report = zk_witness_equivalence(
        pair_puzzle, east, west, trials=50, seed=8, engine_factory=rigged_engine_factory()
    )
    assert not report.passed


def test_witness_equivalence_invalid_witness(pair_puzzle):
    with pytest.raises(InvalidWitnessError):
        zk_witness_equivalence(
            pair_puzzle,
            GoishiSolution.from_cells([(0, 0), (0, 1)]),
            GoishiSolution.from_cells([(0, 0)]),
            trials=10,
        )


def test_tv_distance_bounds():
    assert tv_distance(pd.Series({"a": 1.0}), pd.Series({"a": 3.0})) == 0.0
    assert tv_distance(pd.Series({"a": 1.0}), pd.Series({"b": 1.0})) == 1.0


# Cost

def test_cost_first_non_zero():
    report = cost_audit(FirstNonZeroProtocol([0, 0, 2, 1, 0], 2))
    assert report.ok
    assert report.shuffles == 2
    assert report.peak_matrix_cards == 3 * 9


def test_cost_abc5(abc5_puzzle, abc5_solution):
    report = cost_audit(build_protocol(abc5_puzzle, abc5_solution))
    assert report.ok
    assert report.shuffles == 36
    assert report.grid_cards == 25


def test_cost_goishi6(goishi6_puzzle, goishi6_solution):
    report = cost_audit(build_protocol(goishi6_puzzle, goishi6_solution))
    assert report.ok
    assert report.shuffles == 68


def test_cost_flags_rejected_run(abc5_puzzle):
    report = cost_audit(build_protocol(abc5_puzzle, AbcSolution.from_rows([[0] * 5] * 5)))
    assert not report.ok
