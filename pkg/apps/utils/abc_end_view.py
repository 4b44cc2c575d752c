"""
ABC End View: puzzle model, oracle validator and solver, card encoding and the
zero-knowledge protocol built from multiset verification and FirstNonZero.
"""

from __future__ import annotations

import itertools
import logging
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .card_engine import Card, CardEngine, CardEngineError
from .zk_primitives import (
    BaseZkProtocol,
    InvalidPuzzleError,
    InvalidWitnessError,
    ProtocolOutcome,
    ProtocolRejected,
    first_non_zero,
    first_nonzero_index,
    rejection_scope,
    verify_multiset,
)

logger = logging.getLogger(__name__)

BLANK = 0
EDGES = ("top", "bottom", "left", "right")


class EncodingError(CardEngineError):
    """Raised when a grid value has no card encoding for the puzzle."""


@dataclass(frozen=True)
class AbcPuzzle:
    n: int
    k: int
    top: tuple[int | None, ...]
    bottom: tuple[int | None, ...]
    left: tuple[int | None, ...]
    right: tuple[int | None, ...]

    def __post_init__(self) -> None:
        if self.n < 1:
            raise InvalidPuzzleError(f"Grid size must be positive, got {self.n}")
        if not 1 <= self.k <= self.n:
            raise InvalidPuzzleError(f"Letter count {self.k} must be in 1..{self.n}")
        for edge in EDGES:
            clues = self.clues(edge)
            if len(clues) != self.n:
                raise InvalidPuzzleError(f"{edge} clues need {self.n} entries, got {len(clues)}")
            for clue in clues:
                if clue is not None and not 1 <= clue <= self.k:
                    raise InvalidPuzzleError(f"{edge} clue {clue} outside letters 1..{self.k}")

    @classmethod
    def blank(cls, n: int, k: int) -> AbcPuzzle:
        empty = (None,) * n
        return cls(n, k, empty, empty, empty, empty)

    def clues(self, edge: str) -> tuple[int | None, ...]:
        return getattr(self, edge)

    def clue_count(self) -> int:
        return sum(clue is not None for edge in EDGES for clue in self.clues(edge))

    def line_multiset(self) -> Counter:
        """Every row and column holds each letter once and n-k blanks."""
        return Counter({**{letter: 1 for letter in range(1, self.k + 1)}, BLANK: self.n - self.k})


@dataclass(frozen=True)
class AbcSolution:
    grid: tuple[tuple[int, ...], ...]

    @classmethod
    def from_rows(cls, rows) -> AbcSolution:
        return cls(tuple(tuple(row) for row in rows))


def clue_line(n: int, edge: str, index: int) -> list[tuple[int, int]]:
    """Cells of the line a clue looks along, read from that edge inward."""
    inward = range(n)
    outward = range(n - 1, -1, -1)
    if edge == "top":
        return [(r, index) for r in inward]
    if edge == "bottom":
        return [(r, index) for r in outward]
    if edge == "left":
        return [(index, c) for c in inward]
    if edge == "right":
        return [(index, c) for c in outward]
    raise ValueError(f"Unknown edge: {edge}")


def _check_dimensions(p: AbcPuzzle, s: AbcSolution) -> None:
    if len(s.grid) != p.n or any(len(row) != p.n for row in s.grid):
        raise InvalidWitnessError(f"Solution grid must be {p.n}x{p.n}")


def validate_abc(p: AbcPuzzle, s: AbcSolution) -> bool:
    _check_dimensions(p, s)
    required = p.line_multiset()
    lines = [list(row) for row in s.grid] + [[s.grid[r][c] for r in range(p.n)] for c in range(p.n)]
    if any(Counter(line) != required for line in lines):
        return False
    for edge in EDGES:
        for index, clue in enumerate(p.clues(edge)):
            if clue is None:
                continue
            values = [s.grid[r][c] for r, c in clue_line(p.n, edge, index)]
            first = first_nonzero_index(values)
            if first is None or values[first] != clue:
                return False
    return True


def solve_abc(p: AbcPuzzle, limit: int | None = None) -> list[AbcSolution]:
    """
    Enumerate solutions by filling rows top to bottom.

    Args:
        p: Puzzle to solve
        limit: Stop after this many solutions

    Returns:
        list: Solutions in lexicographic row order
    """
    n, k = p.n, p.k
    row_values = list(range(1, k + 1)) + [BLANK] * (n - k)

    def row_fits(r: int, row: tuple[int, ...]) -> bool:
        for edge, cells in (("left", row), ("right", row[::-1])):
            clue = p.clues(edge)[r]
            if clue is not None and cells[first_nonzero_index(cells)] != clue:
                return False
        return True

    all_rows = sorted(set(itertools.permutations(row_values)))
    candidates = [[row for row in all_rows if row_fits(r, row)] for r in range(n)]

    solutions: list[AbcSolution] = []
    rows: list[tuple[int, ...]] = []
    column_counts = [Counter() for _ in range(n)]

    def column_allows(c: int, value: int) -> bool:
        seen = column_counts[c][value]
        if value == BLANK:
            if seen >= n - k:
                return False
        elif seen >= 1:
            return False
        clue = p.top[c]
        if clue is not None and value not in (BLANK, clue) and all(row[c] == BLANK for row in rows):
            return False
        return True

    def search() -> bool:
        if len(rows) == n:
            candidate = AbcSolution.from_rows(rows)
            if validate_abc(p, candidate):
                solutions.append(candidate)
            return limit is not None and len(solutions) >= limit
        for row in candidates[len(rows)]:
            if not all(column_allows(c, value) for c, value in enumerate(row)):
                continue
            rows.append(row)
            for c, value in enumerate(row):
                column_counts[c][value] += 1
            done = search()
            for c, value in enumerate(row):
                column_counts[c][value] -= 1
            rows.pop()
            if done:
                return True
        return False

    search()
    logger.debug("solve_abc n=%d k=%d found %d solutions", n, k, len(solutions))
    return solutions


def encode_solution(engine: CardEngine, p: AbcPuzzle, s: AbcSolution) -> list[list[Card]]:
    """One face-down card per cell: letter i as value i, blank as 0."""
    _check_dimensions(p, s)
    for row in s.grid:
        for value in row:
            if not 0 <= value <= p.k:
                raise EncodingError(f"Cell value {value} outside 0..{p.k}")
    return [engine.new_cards(row) for row in s.grid]


def verify_grid(engine: CardEngine, p: AbcPuzzle, grid: list[list[Card]]) -> list[list[Card]]:
    """
    Run every line and clue check on an encoded grid.

    Checks run rows top to bottom, then columns left to right, then clues by edge
    (top, bottom, left, right) and index. Cards go back to their cells after each check.

    Returns:
        list: The grid, with every card at its original cell
    """
    n = p.n
    required = p.line_multiset()
    for r in range(n):
        with rejection_scope(f"row:{r}"):
            grid[r] = verify_multiset(engine, grid[r], required)
    for c in range(n):
        with rejection_scope(f"col:{c}"):
            restored = verify_multiset(engine, [grid[r][c] for r in range(n)], required)
        for r, card in enumerate(restored):
            grid[r][c] = card
    for edge in EDGES:
        for index, clue in enumerate(p.clues(edge)):
            if clue is None:
                continue
            cells = clue_line(n, edge, index)
            cards = [grid[r][c] for r, c in cells]
            # The prover points at the first nonzero of its own line
            claim = first_nonzero_index([card.value for card in cards])
            with rejection_scope(f"{edge}:{index}"):
                _, restored = first_non_zero(engine, cards, claim if claim is not None else 0, expected=clue)
            for (r, c), card in zip(cells, restored):
                grid[r][c] = card
    return grid


@dataclass
class AbcEndViewProtocol(BaseZkProtocol):
    puzzle: AbcPuzzle
    solution: AbcSolution

    kind = "abc"

    def max_value(self) -> int:
        # index cards of the multiset check run up to n
        return max(self.puzzle.k, self.puzzle.n)

    def expected_shuffles(self) -> int:
        return 2 * (2 * self.puzzle.n + self.puzzle.clue_count())

    def grid_cards(self) -> int:
        return self.puzzle.n ** 2

    def describe(self) -> str:
        return f"abc n={self.puzzle.n} k={self.puzzle.k} clues={self.puzzle.clue_count()}"

    def _execute(self, engine: CardEngine) -> None:
        try:
            grid = encode_solution(engine, self.puzzle, self.solution)
        except (EncodingError, InvalidWitnessError) as exc:
            raise ProtocolRejected("unencodable-witness") from exc
        verify_grid(engine, self.puzzle, grid)


def prove_abc(
    p: AbcPuzzle,
    s: AbcSolution,
    seed: int | np.random.SeedSequence | None = None,
    engine: CardEngine | None = None,
) -> ProtocolOutcome:
    """Run the ABC End View proof once."""
    return AbcEndViewProtocol(p, s).run(seed=seed, engine=engine)
