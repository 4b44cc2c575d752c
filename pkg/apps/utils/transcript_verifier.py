"""
Witness-free replay of a transcript against the public puzzle.

The verifier walks the event skeleton each protocol produces, recomputes every
deterministic consequence (columns, depths, flip counts, public shifts, shuffle
totals) and checks every revealed value against what the puzzle alone allows.
"""

from __future__ import annotations

import logging
from collections import Counter

from .abc_end_view import EDGES, AbcEndViewProtocol, AbcPuzzle, AbcSolution
from .card_engine import (
    PlaceEvent,
    PublicShiftEvent,
    RevealEvent,
    ShuffleEvent,
    ShuffleKind,
    Transcript,
    TranscriptEvent,
    VerdictEvent,
    Visibility,
)
from .goishi_hiroi import DUMMY, EMPTY, PICKED, STONE, GoishiHiroiProtocol, GoishiPuzzle, GoishiSolution
from .zk_primitives import ANCHOR_ROW, MARKER_ROW, TARGET_ROW

logger = logging.getLogger(__name__)

DIRECTION_COUNT = 4


class TranscriptViolation(Exception):
    """A transcript is not a legal accepting view. line is 1-based; 0 means the end of file."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}" if line else f"end of transcript: {message}")
        self.line = line
        self.message = message


class TranscriptVerifier:
    """Cursor over the events with one expect_* method per public action."""

    def __init__(self, transcript: Transcript):
        self.events: list[TranscriptEvent] = list(transcript)
        self.position = 0

    @property
    def line(self) -> int:
        return self.position + 1

    def fail(self, message: str, line: int | None = None):
        raise TranscriptViolation(self.line if line is None else line, message)

    def _next(self, event_type: type, label: str):
        if self.position >= len(self.events):
            raise TranscriptViolation(0, f"truncated, expected {label}")
        event = self.events[self.position]
        if not isinstance(event, event_type):
            self.fail(f"expected {label}, got {type(event).__name__}")
        self.position += 1
        return event

    # Primitive events

    def expect_shuffle(self, kind: ShuffleKind, rows: int, cols: int, flipped: int) -> None:
        event = self._next(ShuffleEvent, f"SHUFFLE kind={kind.value}")
        expected = ShuffleEvent(kind, rows, cols, flipped)
        if event != expected:
            self.fail(f"expected {expected}, got {event}", self.position)

    def expect_reveal(self, row: int, col: int, depth: int = 0) -> int:
        event = self._next(RevealEvent, f"REVEAL r={row} c={col} d={depth}")
        if (event.row, event.col, event.depth) != (row, col, depth):
            self.fail(f"expected reveal at r={row} c={col} d={depth}", self.position)
        return event.value

    def expect_reveal_value(self, row: int, col: int, allowed: set[int], depth: int = 0) -> int:
        value = self.expect_reveal(row, col, depth)
        if value not in allowed:
            self.fail(f"revealed value {value} not in {sorted(allowed)}", self.position)
        return value

    def expect_place(self, row: int, col: int, depth: int, value: int) -> None:
        event = self._next(PlaceEvent, "PLACE")
        expected = PlaceEvent(row, col, depth, Visibility.PUBLIC, value)
        if event != expected:
            self.fail(f"expected {expected}, got {event}", self.position)

    def expect_shift(self, offset: int) -> None:
        event = self._next(PublicShiftEvent, "SHIFT")
        if event.offset != offset:
            self.fail(f"expected shift {offset}, got {event.offset}", self.position)

    def _expect_single_one(self, row: int, cols: int) -> int:
        values = [self.expect_reveal(row, col) for col in range(cols)]
        if values.count(1) != 1 or values.count(0) != cols - 1:
            self.fail(f"row {row} must show a single 1 among 0s, got {values}", self.position)
        return values.index(1)

    # Building blocks

    def chosen_cut_begin(self, cols: int, flipped: int = 0) -> int:
        self.expect_shuffle(ShuffleKind.CYCLIC, 3, cols, flipped)
        return self._expect_single_one(MARKER_ROW, cols)

    def chosen_cut_end(self, cols: int, flipped: int) -> None:
        self.expect_shuffle(ShuffleKind.CYCLIC, 3, cols, flipped)
        self.expect_shift(self._expect_single_one(ANCHOR_ROW, cols))

    def first_non_zero(self, length: int, expected: int, replacement: int | None = None) -> None:
        cols = 2 * length - 1
        chosen = self.chosen_cut_begin(cols)
        for offset in range(-(length - 1), 0):
            self.expect_reveal_value(TARGET_ROW, (chosen + offset) % cols, {0})
        self.expect_reveal_value(TARGET_ROW, chosen, {expected})
        if replacement is not None:
            self.expect_place(TARGET_ROW, chosen, 0, replacement)
        self.chosen_cut_end(cols, cols + (length - 1) + (0 if replacement is not None else 1))

    def multiset(self, required: Counter) -> None:
        n = sum(required.values())
        self.expect_shuffle(ShuffleKind.PERMUTATION, 2, n, 0)
        shown = Counter(self.expect_reveal(0, col) for col in range(n))
        if shown != +required:
            self.fail(f"line shows {dict(shown)}, expected {dict(+required)}", self.position)
        self.expect_shuffle(ShuffleKind.PERMUTATION, 2, n, n)
        labels = [self.expect_reveal(1, col) for col in range(n)]
        if sorted(labels) != list(range(1, n + 1)):
            self.fail(f"index cards {labels} are not 1..{n}", self.position)

    def finish(self, expected_shuffles: int) -> None:
        verdict = self._next(VerdictEvent, "VERDICT")
        if not verdict.accepted:
            self.fail(f"run was rejected ({verdict.reason})", self.position)
        if self.position != len(self.events):
            self.fail("events after the verdict")
        shuffles = sum(isinstance(event, ShuffleEvent) for event in self.events)
        if shuffles != expected_shuffles:
            raise TranscriptViolation(0, f"{shuffles} shuffles, expected {expected_shuffles}")


def _verify_abc(verifier: TranscriptVerifier, p: AbcPuzzle) -> int:
    required = p.line_multiset()
    for _ in range(2 * p.n):
        verifier.multiset(required)
    for edge in EDGES:
        for clue in p.clues(edge):
            if clue is not None:
                verifier.first_non_zero(p.n, expected=clue)
    return AbcEndViewProtocol(p, AbcSolution(())).expected_shuffles()


def _verify_goishi(verifier: TranscriptVerifier, p: GoishiPuzzle) -> int:
    n, size = p.n, 3 * p.n - 2
    cells = size * size
    for row in range(size):
        for col in range(size):
            inner = (row - n + 1, col - n + 1)
            if not (0 <= inner[0] < n and 0 <= inner[1] < n):
                value = DUMMY
            else:
                value = STONE if inner in p.stones else EMPTY
            verifier.expect_place(row, col, 0, value)

    chosen = verifier.chosen_cut_begin(cells)
    verifier.expect_reveal_value(TARGET_ROW, chosen, {STONE})
    verifier.expect_place(TARGET_ROW, chosen, 0, PICKED)
    verifier.chosen_cut_end(cells, cells)

    for index in range(1, p.m):
        chosen = verifier.chosen_cut_begin(cells)
        verifier.expect_reveal_value(TARGET_ROW, chosen, {PICKED})
        verifier.expect_place(TARGET_ROW, chosen, 0, EMPTY)

        direction = verifier.chosen_cut_begin(DIRECTION_COUNT)
        if index >= 2:
            verifier.expect_reveal_value(TARGET_ROW, direction, {0})
        verifier.first_non_zero(n - 1, expected=STONE, replacement=PICKED)
        for col in range(DIRECTION_COUNT):
            verifier.expect_place(TARGET_ROW, col, 0, 1 if col == direction else 0)
        verifier.chosen_cut_end(DIRECTION_COUNT, DIRECTION_COUNT)

        verifier.chosen_cut_end(cells, cells)
    return GoishiHiroiProtocol(p, GoishiSolution(())).expected_shuffles()


def verify_transcript(puzzle: AbcPuzzle | GoishiPuzzle, transcript: Transcript) -> None:
    """
    Check that transcript is a legal accepting view for puzzle.

    Raises:
        TranscriptViolation: naming the first bad line
    """
    verifier = TranscriptVerifier(transcript)
    if isinstance(puzzle, AbcPuzzle):
        expected_shuffles = _verify_abc(verifier, puzzle)
    elif isinstance(puzzle, GoishiPuzzle):
        expected_shuffles = _verify_goishi(verifier, puzzle)
    else:
        raise TypeError(f"No transcript rules for {type(puzzle).__name__}")
    verifier.finish(expected_shuffles)
    logger.info("Transcript of %d events verified", len(verifier.events))
