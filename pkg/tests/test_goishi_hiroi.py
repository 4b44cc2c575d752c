import itertools

import numpy as np
import pytest

from conftest import snake_cells
from utils.card_engine import CardEngine, CardEngineError
from utils.goishi_hiroi import (
    DUMMY,
    NORTH,
    PICKED,
    STONE,
    WEST,
    ExtendedGrid,
    GoishiHiroiProtocol,
    GoishiPuzzle,
    GoishiSolution,
    move_between,
    path_positions,
    path_stacks,
    pick_first_stone,
    pick_next_stone,
    prove_goishi,
    setup_grid,
    solve_goishi,
    validate_goishi,
)
from utils.zk_primitives import InvalidPuzzleError, ProtocolRejected, first_non_zero


def swapped(picks, i, j):
    picks = list(picks)
    picks[i], picks[j] = picks[j], picks[i]
    return GoishiSolution.from_cells(picks)


# Oracle and solver

def test_validate_goishi6(goishi6_puzzle, goishi6_solution):
    assert validate_goishi(goishi6_puzzle, goishi6_solution)


def test_validate_goishi6_swapped(goishi6_puzzle, goishi6_solution):
    assert not validate_goishi(goishi6_puzzle, swapped(goishi6_solution.picks, 3, 4))


def test_validate_single_stone():
    puzzle = GoishiPuzzle.from_cells(3, [(1, 1)])
    assert validate_goishi(puzzle, GoishiSolution.from_cells([(1, 1)]))


def test_validate_rejects_skipping_a_stone(line_puzzle):
    assert not validate_goishi(line_puzzle, GoishiSolution.from_cells([(0, 0), (0, 2), (0, 1)]))


def test_validate_rejects_reverse_move(line_puzzle):
    assert not validate_goishi(line_puzzle, GoishiSolution.from_cells([(0, 1), (0, 2), (0, 0)]))


def test_move_between():
    assert move_between((2, 2), (0, 2)) == (NORTH, 2)
    assert move_between((2, 2), (2, 1)) == (WEST, 1)
    assert move_between((0, 0), (1, 1)) is None


def test_puzzle_needs_a_stone():
    with pytest.raises(InvalidPuzzleError):
        GoishiPuzzle(3, frozenset())
    with pytest.raises(InvalidPuzzleError):
        GoishiPuzzle.from_cells(2, [(2, 0)])


def test_solve_goishi6_contains_solution(goishi6_puzzle, goishi6_solution):
    solutions = solve_goishi(goishi6_puzzle)
    assert goishi6_solution in solutions
    assert all(validate_goishi(goishi6_puzzle, s) for s in solutions)


def test_solve_pair_finds_both_orders(pair_puzzle):
    picks = {s.picks for s in solve_goishi(pair_puzzle)}
    assert picks == {((0, 0), (0, 1)), ((0, 1), (0, 0))}


def test_solve_unaligned_pair():
    assert solve_goishi(GoishiPuzzle.from_cells(2, [(0, 0), (1, 1)])) == []


# Extended grid

def test_setup_grid_border_and_stones():
    puzzle = GoishiPuzzle.from_cells(3, [(0, 0), (1, 2)])
    engine = CardEngine(max_value=DUMMY)
    grid = setup_grid(engine, puzzle)
    assert grid.size == 7
    assert len(grid.cards) == 49
    values = grid.values()
    for row in range(7):
        for col in range(7):
            inner = 2 <= row <= 4 and 2 <= col <= 4
            if not inner:
                assert values[row * 7 + col] == DUMMY
    assert values[grid.flat_index(0, 0)] == STONE
    assert values[grid.flat_index(1, 2)] == STONE
    assert values.count(STONE) == 2
    assert len(engine.transcript) == 49


def test_setup_grid_single_cell():
    engine = CardEngine(max_value=DUMMY)
    grid = setup_grid(engine, GoishiPuzzle.from_cells(1, [(0, 0)]))
    assert grid.values() == [STONE]


def test_setup_grid_card_count():
    engine = CardEngine(max_value=DUMMY)
    grid = setup_grid(engine, GoishiPuzzle.from_cells(6, [(0, 0)]))
    assert len(grid.cards) == 256


def test_neighbour_arithmetic():
    grid = ExtendedGrid(3, [])
    i = grid.flat_index(1, 1)
    assert grid.north(i) == grid.flat_index(0, 1)
    assert grid.south(i) == grid.flat_index(2, 1)
    assert grid.east(i) == grid.flat_index(1, 2)
    assert grid.west(i) == grid.flat_index(1, 0)


def test_path_stacks_center():
    engine = CardEngine(max_value=DUMMY)
    grid = setup_grid(engine, GoishiPuzzle.from_cells(3, [(1, 1)]))
    stacks = path_stacks(grid, grid.flat_index(1, 1))
    assert [len(stack) for stack in stacks] == [2, 2, 2, 2]


def test_path_stacks_corner_rays_hit_dummies():
    engine = CardEngine(max_value=DUMMY)
    grid = setup_grid(engine, GoishiPuzzle.from_cells(3, [(0, 0)]))
    north, _, _, west = path_stacks(grid, grid.flat_index(0, 0))
    assert [card.value for card in north] == [DUMMY, DUMMY]
    assert [card.value for card in west] == [DUMMY, DUMMY]


def test_path_stacks_every_inner_cell():
    engine = CardEngine(max_value=DUMMY)
    puzzle = GoishiPuzzle.from_cells(4, [(0, 0)])
    grid = setup_grid(engine, puzzle)
    for row in range(4):
        for col in range(4):
            assert all(len(stack) == 3 for stack in path_stacks(grid, grid.flat_index(row, col)))


def test_path_stacks_reject_border_position():
    engine = CardEngine(max_value=DUMMY)
    grid = setup_grid(engine, GoishiPuzzle.from_cells(3, [(0, 0)]))
    with pytest.raises(CardEngineError):
        path_positions(grid, 0)


def test_dummy_wall_stops_out_of_grid_travel():
    engine = CardEngine(max_value=DUMMY, seed=1)
    grid = setup_grid(engine, GoishiPuzzle.from_cells(3, [(0, 0)]))
    west = path_stacks(grid, grid.flat_index(0, 0))[WEST]
    with pytest.raises(ProtocolRejected):
        first_non_zero(engine, west.cards, 0, expected=STONE)


# Protocol

def test_prove_goishi6_accepts(goishi6_puzzle, goishi6_solution):
    outcome = prove_goishi(goishi6_puzzle, goishi6_solution, seed=42)
    assert outcome.accepted
    assert outcome.transcript.shuffle_count() == 68


def test_prove_goishi6_swapped_rejects(goishi6_puzzle, goishi6_solution):
    outcome = prove_goishi(goishi6_puzzle, swapped(goishi6_solution.picks, 3, 4), seed=42)
    assert not outcome.accepted
    assert outcome.reason == "first-on-path-mismatch"
    assert outcome.location == "pick:3"


def test_prove_reverse_direction_rejects(line_puzzle):
    outcome = prove_goishi(line_puzzle, GoishiSolution.from_cells([(0, 1), (0, 2), (0, 0)]), seed=7)
    assert outcome.reason == "forbidden-direction"
    assert outcome.location == "pick:2"


def test_prove_skipped_stone_rejects(line_puzzle):
    outcome = prove_goishi(line_puzzle, GoishiSolution.from_cells([(0, 0), (0, 2), (0, 1)]), seed=7)
    assert outcome.reason == "first-on-path-mismatch"
    assert outcome.location == "pick:1"


def test_prove_single_stone():
    outcome = prove_goishi(GoishiPuzzle.from_cells(2, [(1, 0)]), GoishiSolution.from_cells([(1, 0)]), seed=0)
    assert outcome.accepted
    assert outcome.transcript.shuffle_count() == 2


@pytest.mark.parametrize("picks", [
    [(0, 0), (0, 1)],
    [(0, 0), (0, 1), (0, 1)],
    [(0, 0), (0, 0), (0, 1)],
    [(0, 0), (0, 1), (5, 5)],
])
def test_prove_malformed_witness(line_puzzle, picks):
    outcome = prove_goishi(line_puzzle, GoishiSolution.from_cells(picks), seed=0)
    assert outcome.reason == "malformed-witness"
    assert len(outcome.transcript) == 1


def test_first_pick_must_be_a_stone():
    engine = CardEngine(max_value=DUMMY, seed=0)
    grid = setup_grid(engine, GoishiPuzzle.from_cells(2, [(0, 0)]))
    with pytest.raises(ProtocolRejected) as excinfo:
        pick_first_stone(engine, grid, (1, 1))
    assert excinfo.value.reason == "no-stone-at-first-pick"


def check_iteration_invariants(puzzle, solution, seed):
    engine = CardEngine(max_value=DUMMY, seed=seed)
    grid = setup_grid(engine, puzzle)
    picks = list(solution.picks)

    pick_first_stone(engine, grid, picks[0])
    assert grid.values().count(PICKED) == 1
    assert grid.values()[grid.flat_index(*picks[0])] == PICKED

    markers = None
    for index in range(1, len(picks)):
        before = [card.id for card in grid.cards]
        changed = {grid.flat_index(*picks[index - 1]), grid.flat_index(*picks[index])}
        markers = pick_next_stone(engine, grid, picks[index - 1], picks[index], markers)

        values = grid.values()
        assert values.count(PICKED) == 1
        assert values[grid.flat_index(*picks[index])] == PICKED
        assert [card.value for card in markers].count(1) == 1
        assert sum(v == 0 for v in (card.value for card in markers)) == 3
        after = [card.id for card in grid.cards]
        assert all(before[i] == after[i] for i in range(len(before)) if i not in changed)

    assert grid.values().count(STONE) == 0


@pytest.mark.parametrize("seed", range(5))
def test_iteration_invariants(goishi6_puzzle, goishi6_solution, seed):
    check_iteration_invariants(goishi6_puzzle, goishi6_solution, seed)


@pytest.mark.slow
def test_iteration_invariants_over_many_seeds():
    cells = snake_cells(3, 5)
    puzzle = GoishiPuzzle.from_cells(3, cells)
    for seed in np.random.SeedSequence(17).spawn(1000):
        check_iteration_invariants(puzzle, GoishiSolution.from_cells(cells), seed)


@pytest.mark.parametrize("order", list(itertools.permutations([(0, 0), (0, 1), (0, 2)])))
def test_verdict_does_not_depend_on_seed(line_puzzle, order):
    solution = GoishiSolution(order)
    verdicts = {
        (outcome.accepted, outcome.reason, outcome.location)
        for outcome in (prove_goishi(line_puzzle, solution, seed=s) for s in np.random.SeedSequence(5).spawn(100))
    }
    assert len(verdicts) == 1


@pytest.mark.parametrize("m", range(1, 13))
def test_shuffle_count_is_linear_in_stones(m):
    cells = snake_cells(4, m)
    puzzle = GoishiPuzzle.from_cells(4, cells)
    outcome = prove_goishi(puzzle, GoishiSolution.from_cells(cells), seed=m)
    assert outcome.accepted
    assert outcome.transcript.shuffle_count() == 2 + 6 * (m - 1)
    assert GoishiHiroiProtocol(puzzle, GoishiSolution.from_cells(cells)).expected_shuffles() == 2 + 6 * (m - 1)


def test_every_order_agrees_with_oracle(line_puzzle):
    for order in itertools.permutations(sorted(line_puzzle.stones)):
        solution = GoishiSolution(order)
        outcome = prove_goishi(line_puzzle, solution, seed=11)
        assert outcome.accepted == validate_goishi(line_puzzle, solution), order
