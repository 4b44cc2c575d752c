"""
Goishi Hiroi: puzzle model, oracle validator and solver, the extended card grid
with dummy border, and the zero-knowledge protocol.

Directions are indexed north=0, east=1, south=2, west=3; coordinates are
(row, col), 0-based from the top-left cell.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from itertools import pairwise

import numpy as np

from .card_engine import Card, CardEngine, CardEngineError, Pile, Visibility
from .zk_primitives import (
    TARGET_ROW,
    BaseZkProtocol,
    InvalidPuzzleError,
    ProtocolOutcome,
    ProtocolRejected,
    chosen_cut_begin,
    chosen_cut_end,
    chosen_cut_relative,
    first_non_zero,
    rejection_scope,
)

logger = logging.getLogger(__name__)

Cell = tuple[int, int]

EMPTY = 0
STONE = 1
PICKED = 2
DUMMY = 3

NORTH, EAST, SOUTH, WEST = range(4)
DIRECTIONS = (NORTH, EAST, SOUTH, WEST)
DIRECTION_NAMES = ("north", "east", "south", "west")
DELTAS = ((-1, 0), (0, 1), (1, 0), (0, -1))


def opposite(direction: int) -> int:
    return (direction + 2) % 4


@dataclass(frozen=True)
class GoishiPuzzle:
    n: int
    stones: frozenset[Cell]

    def __post_init__(self) -> None:
        if self.n < 1:
            raise InvalidPuzzleError(f"Grid size must be positive, got {self.n}")
        if not self.stones:
            raise InvalidPuzzleError("A puzzle needs at least one stone")
        for row, col in self.stones:
            if not (0 <= row < self.n and 0 <= col < self.n):
                raise InvalidPuzzleError(f"Stone ({row}, {col}) outside the {self.n}x{self.n} grid")

    @classmethod
    def from_cells(cls, n: int, cells) -> GoishiPuzzle:
        return cls(n, frozenset(tuple(cell) for cell in cells))

    @property
    def m(self) -> int:
        return len(self.stones)


@dataclass(frozen=True)
class GoishiSolution:
    picks: tuple[Cell, ...]

    @classmethod
    def from_cells(cls, cells) -> GoishiSolution:
        return cls(tuple(tuple(cell) for cell in cells))


def move_between(start: Cell, end: Cell) -> tuple[int, int] | None:
    """Direction and distance of a straight move, or None when not aligned."""
    (r0, c0), (r1, c1) = start, end
    if start == end:
        return None
    if r0 == r1:
        return (EAST if c1 > c0 else WEST), abs(c1 - c0)
    if c0 == c1:
        return (SOUTH if r1 > r0 else NORTH), abs(r1 - r0)
    return None


def validate_goishi(p: GoishiPuzzle, s: GoishiSolution) -> bool:
    picks = list(s.picks)
    if len(picks) != p.m or set(picks) != p.stones:
        return False
    remaining = set(p.stones)
    remaining.discard(picks[0])
    previous_direction = None
    for start, end in pairwise(picks):
        move = move_between(start, end)
        if move is None:
            return False
        direction, distance = move
        if previous_direction is not None and direction == opposite(previous_direction):
            return False
        dr, dc = DELTAS[direction]
        if any((start[0] + dr * step, start[1] + dc * step) in remaining for step in range(1, distance)):
            return False
        remaining.discard(end)
        previous_direction = direction
    return True


def solve_goishi(p: GoishiPuzzle, limit: int | None = None) -> list[GoishiSolution]:
    """Depth-first search over first stone and travel directions."""
    solutions: list[GoishiSolution] = []
    path: list[Cell] = []
    remaining = set(p.stones)

    def first_on_ray(start: Cell, direction: int) -> Cell | None:
        dr, dc = DELTAS[direction]
        row, col = start[0] + dr, start[1] + dc
        while 0 <= row < p.n and 0 <= col < p.n:
            if (row, col) in remaining:
                return row, col
            row, col = row + dr, col + dc
        return None

    def search(previous_direction: int | None) -> bool:
        if not remaining:
            solutions.append(GoishiSolution(tuple(path)))
            return limit is not None and len(solutions) >= limit
        for direction in DIRECTIONS:
            if previous_direction is not None and direction == opposite(previous_direction):
                continue
            target = first_on_ray(path[-1], direction)
            if target is None:
                continue
            path.append(target)
            remaining.discard(target)
            done = search(direction)
            remaining.add(target)
            path.pop()
            if done:
                return True
        return False

    for first in sorted(p.stones):
        path.append(first)
        remaining.discard(first)
        done = search(None)
        remaining.add(first)
        path.pop()
        if done:
            break
    logger.debug("solve_goishi n=%d m=%d found %d solutions", p.n, p.m, len(solutions))
    return solutions


@dataclass
class ExtendedGrid:
    """The n x n grid padded by n-1 dummy cells on every side, stored row-major."""

    n: int
    cards: list[Card]

    @property
    def size(self) -> int:
        return 3 * self.n - 2

    def flat_index(self, row: int, col: int) -> int:
        """Flat position of a puzzle cell."""
        return (row + self.n - 1) * self.size + (col + self.n - 1)

    def north(self, i: int) -> int:
        return i - self.size

    def east(self, i: int) -> int:
        return i + 1

    def south(self, i: int) -> int:
        return i + self.size

    def west(self, i: int) -> int:
        return i - 1

    def step_offsets(self) -> tuple[int, int, int, int]:
        return -self.size, 1, self.size, -1

    def ray_offsets(self) -> list[list[int]]:
        """Flat offsets of the n-1 cells in each direction, nearest first."""
        return [[offset * step for step in range(1, self.n)] for offset in self.step_offsets()]

    def is_inner(self, i: int) -> bool:
        row, col = divmod(i, self.size)
        return self.n - 1 <= row < 2 * self.n - 1 and self.n - 1 <= col < 2 * self.n - 1

    def piles(self) -> list[Pile]:
        return [Pile([card]) for card in self.cards]

    def restore(self, piles: list[Pile]) -> None:
        self.cards = [pile.top for pile in piles]

    def values(self) -> list[int]:
        return [card.value for card in self.cards]


def setup_grid(engine: CardEngine, p: GoishiPuzzle) -> ExtendedGrid:
    """Publicly lay out stones as 1, empty cells as 0 and the border as dummy 3s."""
    size = 3 * p.n - 2
    cards = []
    for row in range(size):
        for col in range(size):
            inner = (row - p.n + 1, col - p.n + 1)
            if not (0 <= inner[0] < p.n and 0 <= inner[1] < p.n):
                value = DUMMY
            else:
                value = STONE if inner in p.stones else EMPTY
            card = engine.new_card(value)
            engine.place_public(row, col, card)
            cards.append(card)
    return ExtendedGrid(p.n, cards)


def path_positions(g: ExtendedGrid, flat_pos: int) -> list[list[int]]:
    if not 0 <= flat_pos < len(g.cards) or not g.is_inner(flat_pos):
        raise CardEngineError(f"Position {flat_pos} is not a puzzle cell of the extended grid")
    return [[flat_pos + offset for offset in ray] for ray in g.ray_offsets()]


def path_stacks(g: ExtendedGrid, flat_pos: int) -> list[Pile]:
    """The n-1 cards on each ray north, east, south and west, nearest first."""
    return [Pile([g.cards[i] for i in ray]) for ray in path_positions(g, flat_pos)]


def prover_move(start: Cell, end: Cell) -> tuple[int, int]:
    """Direction and distance the prover commits to; unaligned claims fall back to one step north."""
    return move_between(start, end) or (NORTH, 1)


def pick_first_stone(engine: CardEngine, grid: ExtendedGrid, stone: Cell) -> None:
    session = chosen_cut_begin(engine, grid.piles(), grid.flat_index(*stone))
    row, col = chosen_cut_relative(session, 0)
    if engine.reveal(session.matrix, row, col) != STONE:
        raise ProtocolRejected("no-stone-at-first-pick")
    engine.replace_card(session.matrix, row, col, engine.new_card(PICKED), Visibility.PUBLIC)
    grid.restore(chosen_cut_end(engine, session))


def pick_next_stone(
    engine: CardEngine,
    grid: ExtendedGrid,
    previous: Cell,
    current: Cell,
    markers: list[Card] | None,
) -> list[Card]:
    """
    Move from the last picked stone to the next one.

    Args:
        engine: Engine of the current run
        grid: Extended grid, holding exactly one 2 at the last picked stone
        previous: Cell of the last picked stone
        current: Cell the prover claims to pick now
        markers: Direction markers kept from the previous move, or None on the second pick

    Returns:
        list: Direction markers (north, east, south, west) with a 1 on the direction just travelled
    """
    if markers is not None:
        # the 1 now sits on the way back, which is forbidden
        markers = [markers[SOUTH], markers[WEST], markers[NORTH], markers[EAST]]

    session = chosen_cut_begin(engine, grid.piles(), grid.flat_index(*previous))
    matrix = session.matrix
    row, col = chosen_cut_relative(session, 0)
    if engine.reveal(matrix, row, col) != PICKED:
        raise ProtocolRejected("lost-current-marker")
    engine.replace_card(matrix, row, col, engine.new_card(EMPTY), Visibility.PUBLIC)

    addresses = [[chosen_cut_relative(session, offset) for offset in ray] for ray in grid.ray_offsets()]
    tops = markers if markers is not None else engine.new_cards([EMPTY] * 4)
    stacks = [Pile([tops[d], *(matrix.card(r, c) for r, c in addresses[d])]) for d in DIRECTIONS]

    direction, distance = prover_move(previous, current)
    direction_session = chosen_cut_begin(engine, stacks, direction)
    stack_matrix = direction_session.matrix
    _, stack_col = chosen_cut_relative(direction_session, 0)
    if markers is not None and engine.reveal(stack_matrix, TARGET_ROW, stack_col, depth=0) != 0:
        raise ProtocolRejected("forbidden-direction")

    chosen = stack_matrix.pile(TARGET_ROW, stack_col)
    try:
        _, path = first_non_zero(
            engine,
            chosen.cards[1:],
            distance - 1,
            expected=STONE,
            replacement=engine.new_card(PICKED),
        )
    except ProtocolRejected as exc:
        raise ProtocolRejected("first-on-path-mismatch") from exc
    chosen.cards[1:] = path

    for c in range(stack_matrix.cols):
        marker = engine.new_card(1 if c == stack_col else 0)
        engine.replace_card(stack_matrix, TARGET_ROW, c, marker, Visibility.PUBLIC, depth=0)

    restored = chosen_cut_end(engine, direction_session)
    for ray_addresses, pile in zip(addresses, restored):
        for (r, c), card in zip(ray_addresses, pile.cards[1:]):
            matrix.set_card(r, c, card)
    grid.restore(chosen_cut_end(engine, session))
    return [pile.top for pile in restored]


@dataclass
class GoishiHiroiProtocol(BaseZkProtocol):
    puzzle: GoishiPuzzle
    solution: GoishiSolution

    kind = "goishi"

    def max_value(self) -> int:
        return DUMMY

    def expected_shuffles(self) -> int:
        return 2 + 6 * (self.puzzle.m - 1)

    def grid_cards(self) -> int:
        return (3 * self.puzzle.n - 2) ** 2

    def describe(self) -> str:
        return f"goishi n={self.puzzle.n} m={self.puzzle.m}"

    def _execute(self, engine: CardEngine) -> None:
        picks = list(self.solution.picks)
        # The prover can only follow a witness that picks every stone once
        if len(picks) != self.puzzle.m or set(picks) != self.puzzle.stones:
            raise ProtocolRejected("malformed-witness", "witness")

        grid = setup_grid(engine, self.puzzle)
        with rejection_scope("pick:0"):
            pick_first_stone(engine, grid, picks[0])
        markers = None
        for index, (previous, current) in enumerate(pairwise(picks), start=1):
            with rejection_scope(f"pick:{index}"):
                markers = pick_next_stone(engine, grid, previous, current, markers)


def prove_goishi(
    p: GoishiPuzzle,
    s: GoishiSolution,
    seed: int | np.random.SeedSequence | None = None,
    engine: CardEngine | None = None,
) -> ProtocolOutcome:
    """Run the Goishi Hiroi proof once."""
    return GoishiHiroiProtocol(p, s).run(seed=seed, engine=engine)
