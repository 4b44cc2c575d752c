"""
Text formats for puzzle files.

ABC End View::

    abc 5 3
    top: B C . . .
    bottom: . . . A A
    left: . A . B .
    right: . C . . B
    solution:
    B . A C .
    ...

Goishi Hiroi (picks are 0-based row,col pairs)::

    goishi 6
    o.....
    ...o.o
    picks: 3,1 4,1 4,5

Blank lines and lines starting with '#' are ignored.
"""

from __future__ import annotations

import logging
import string
from dataclasses import dataclass

from .abc_end_view import BLANK, EDGES, AbcPuzzle, AbcSolution
from .goishi_hiroi import GoishiPuzzle, GoishiSolution
from .zk_primitives import InvalidPuzzleError

logger = logging.getLogger(__name__)

LETTERS = string.ascii_uppercase
BLANK_TOKEN = "."
STONE_CHAR = "o"
EMPTY_CHAR = "."

Puzzle = AbcPuzzle | GoishiPuzzle
Witness = AbcSolution | GoishiSolution


class PuzzleFormatError(ValueError):
    """Raised when a puzzle file is malformed. line is 1-based."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.message = message


@dataclass
class PuzzleFile:
    puzzle: Puzzle
    witness: Witness | None = None


def _content_lines(text: str) -> list[tuple[int, str]]:
    lines = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line and not line.startswith("#"):
            lines.append((line_no, line))
    return lines


def _letter_value(token: str, k: int, line_no: int) -> int:
    if token == BLANK_TOKEN:
        return BLANK
    if len(token) != 1 or token not in LETTERS[:k]:
        raise PuzzleFormatError(line_no, f"{token!r} is not one of . {' '.join(LETTERS[:k])}")
    return LETTERS.index(token) + 1


def _letter_token(value: int | None) -> str:
    return BLANK_TOKEN if not value else LETTERS[value - 1]


def _header_size(tokens: list[str], expected: int, line_no: int) -> list[int]:
    if len(tokens) != expected:
        raise PuzzleFormatError(line_no, f"header needs {expected - 1} size field(s)")
    try:
        sizes = [int(token) for token in tokens[1:]]
    except ValueError:
        raise PuzzleFormatError(line_no, f"header sizes must be integers: {' '.join(tokens[1:])}") from None
    if any(size < 1 for size in sizes):
        raise PuzzleFormatError(line_no, "header sizes must be positive")
    return sizes


def _parse_abc(lines: list[tuple[int, str]]) -> PuzzleFile:
    header_no, header = lines[0]
    n, k = _header_size(header.split(), 3, header_no)
    if k > min(n, len(LETTERS)):
        raise PuzzleFormatError(header_no, f"letter count {k} must be at most {min(n, len(LETTERS))}")

    rest = lines[1:]
    if len(rest) < len(EDGES):
        raise PuzzleFormatError(lines[-1][0], "expected top:, bottom:, left: and right: clue lines")
    clues = {}
    for (line_no, line), edge in zip(rest, EDGES):
        label, _, body = line.partition(":")
        if label.strip() != edge:
            raise PuzzleFormatError(line_no, f"expected '{edge}:' clue line")
        tokens = body.split()
        if len(tokens) != n:
            raise PuzzleFormatError(line_no, f"{edge} needs {n} tokens, got {len(tokens)}")
        clues[edge] = tuple(_letter_value(token, k, line_no) or None for token in tokens)

    witness = None
    rest = rest[len(EDGES):]
    if rest:
        line_no, line = rest[0]
        if line != "solution:":
            raise PuzzleFormatError(line_no, "expected 'solution:' or end of file")
        rows = rest[1:]
        if len(rows) != n:
            raise PuzzleFormatError(rows[-1][0] if rows else line_no, f"solution needs {n} rows, got {len(rows)}")
        grid = []
        for row_no, row in rows:
            tokens = row.split()
            if len(tokens) != n:
                raise PuzzleFormatError(row_no, f"solution row needs {n} tokens, got {len(tokens)}")
            grid.append([_letter_value(token, k, row_no) for token in tokens])
        witness = AbcSolution.from_rows(grid)

    try:
        puzzle = AbcPuzzle(n, k, **clues)
    except InvalidPuzzleError as exc:
        raise PuzzleFormatError(header_no, str(exc)) from exc
    return PuzzleFile(puzzle, witness)


def _parse_pick(token: str, line_no: int) -> tuple[int, int]:
    row, sep, col = token.partition(",")
    if not sep:
        raise PuzzleFormatError(line_no, f"pick {token!r} must be 'row,col'")
    try:
        return int(row), int(col)
    except ValueError:
        raise PuzzleFormatError(line_no, f"pick {token!r} must be 'row,col'") from None


def _parse_goishi(lines: list[tuple[int, str]]) -> PuzzleFile:
    header_no, header = lines[0]
    (n,) = _header_size(header.split(), 2, header_no)

    board = lines[1:n + 1]
    if len(board) != n or any(line.startswith("picks:") for _, line in board):
        raise PuzzleFormatError(board[-1][0] if board else header_no, f"board needs {n} rows")
    stones = set()
    for r, (line_no, line) in enumerate(board):
        if len(line) != n or set(line) - {STONE_CHAR, EMPTY_CHAR}:
            raise PuzzleFormatError(line_no, f"board row needs {n} characters from '{EMPTY_CHAR}{STONE_CHAR}'")
        stones.update((r, c) for c, char in enumerate(line) if char == STONE_CHAR)
    if not stones:
        raise PuzzleFormatError(header_no, "board has no stones")

    witness = None
    rest = lines[n + 1:]
    if rest:
        line_no, line = rest[0]
        label, _, body = line.partition(":")
        if label != "picks" or len(rest) > 1:
            raise PuzzleFormatError(line_no if label != "picks" else rest[1][0], "expected a single 'picks:' line")
        picks = [_parse_pick(token, line_no) for token in body.split()]
        if len(set(picks)) != len(picks):
            raise PuzzleFormatError(line_no, "picks repeat a cell")
        for pick in picks:
            if pick not in stones:
                raise PuzzleFormatError(line_no, f"pick {pick[0]},{pick[1]} is not a stone")
        witness = GoishiSolution(tuple(picks))

    return PuzzleFile(GoishiPuzzle(n, frozenset(stones)), witness)


def parse_puzzle(text: str) -> PuzzleFile:
    lines = _content_lines(text)
    if not lines:
        raise PuzzleFormatError(1, "empty puzzle file")
    line_no, header = lines[0]
    kind = header.split()[0]
    if kind == "abc":
        return _parse_abc(lines)
    if kind == "goishi":
        return _parse_goishi(lines)
    raise PuzzleFormatError(line_no, f"unknown puzzle kind {kind!r}, expected 'abc' or 'goishi'")


def load_puzzle_file(path: str) -> PuzzleFile:
    with open(path, 'r', encoding='utf-8') as f:
        parsed = parse_puzzle(f.read())
    logger.info("Loaded %s puzzle from %s", type(parsed.puzzle).__name__, path)
    return parsed


def format_abc_solution(s: AbcSolution) -> str:
    return "".join(" ".join(_letter_token(value) for value in row) + "\n" for row in s.grid)


def format_goishi_picks(s: GoishiSolution) -> str:
    return "picks: " + " ".join(f"{r},{c}" for r, c in s.picks) + "\n"


def format_witness(witness: Witness) -> str:
    """A witness in the file's solution/picks syntax."""
    if isinstance(witness, AbcSolution):
        return "solution:\n" + format_abc_solution(witness)
    return format_goishi_picks(witness)


def serialize_puzzle(puzzle: Puzzle, witness: Witness | None = None) -> str:
    if isinstance(puzzle, AbcPuzzle):
        lines = [f"abc {puzzle.n} {puzzle.k}"]
        lines += [f"{edge}: " + " ".join(_letter_token(clue) for clue in puzzle.clues(edge)) for edge in EDGES]
    else:
        lines = [f"goishi {puzzle.n}"]
        lines += [
            "".join(STONE_CHAR if (r, c) in puzzle.stones else EMPTY_CHAR for c in range(puzzle.n))
            for r in range(puzzle.n)
        ]
    text = "".join(line + "\n" for line in lines)
    if witness is not None:
        text += format_witness(witness)
    return text
