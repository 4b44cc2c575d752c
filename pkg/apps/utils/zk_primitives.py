"""
Reusable protocol building blocks: chosen cut, FirstNonZero and multiset
(uniqueness) verification, plus the protocol base class the puzzle protocols share.
"""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from collections import Counter
from collections.abc import Iterator, Mapping, Sequence
from contextlib import contextmanager
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .card_engine import (
    Card,
    CardEngine,
    CardEngineError,
    CardMatrix,
    Pile,
    Transcript,
    VerdictEvent,
    Visibility,
)

logger = logging.getLogger(__name__)

# Chosen-cut matrix rows
TARGET_ROW = 0
MARKER_ROW = 1
ANCHOR_ROW = 2


class SessionClosedError(CardEngineError):
    """Raised when a chosen cut session is used after it ended."""


class InvalidPuzzleError(ValueError):
    """Raised when puzzle data violates the puzzle's own invariants."""


class InvalidWitnessError(ValueError):
    """Raised when a witness does not fit the puzzle it is paired with."""


class ProtocolRejected(Exception):
    """The verifier rejects: a public check failed."""

    def __init__(self, reason: str, location: str | None = None):
        super().__init__(reason if location is None else f"{reason} at {location}")
        self.reason = reason
        self.location = location


@contextmanager
def rejection_scope(location: str) -> Iterator[None]:
    """Tag rejections raised inside the block with a public location."""
    try:
        yield
    except ProtocolRejected as exc:
        if exc.location is None:
            raise ProtocolRejected(exc.reason, location) from exc
        raise


class Verdict(str, Enum):
    ACCEPT = "accept"
    REJECT = "reject"


@dataclass
class ProtocolOutcome:
    verdict: Verdict
    transcript: Transcript
    reason: str | None = None
    location: str | None = None
    cards_allocated: int = 0
    peak_matrix_cards: int = 0

    @property
    def accepted(self) -> bool:
        return self.verdict is Verdict.ACCEPT


@dataclass
class ChosenCutSession:
    matrix: CardMatrix
    chosen_col_public: int
    open: bool = True


# Chosen cut

def chosen_cut_begin(
    engine: CardEngine,
    seq: Sequence[Pile],
    secret_index: int,
    marker_values: Sequence[int] | None = None,
) -> ChosenCutSession:
    """
    Select seq[secret_index] without revealing the index.

    Args:
        engine: Engine of the current run
        seq: Piles to choose from, all of equal length
        secret_index: Prover's choice (0-based)
        marker_values: Override for the prover's marker row, for cheating-prover doubles

    Returns:
        ChosenCutSession: Open session; the chosen pile sits in row 0 at chosen_col_public
    """
    n = len(seq)
    if not 0 <= secret_index < n:
        raise CardEngineError(f"Chosen index {secret_index} out of range for {n} piles")
    if marker_values is None:
        marker_values = [1 if i == secret_index else 0 for i in range(n)]
    elif len(marker_values) != n:
        raise CardEngineError(f"Marker row needs {n} values, got {len(marker_values)}")
    markers = [Pile([card]) for card in engine.new_cards(marker_values)]
    anchors = [Pile([card]) for card in engine.new_cards([1] + [0] * (n - 1))]
    matrix = engine.new_matrix(3, n, [*seq, *markers, *anchors])

    engine.pile_shifting_shuffle(matrix)
    revealed = engine.reveal_row(matrix, MARKER_ROW)
    if revealed.count(1) != 1 or revealed.count(0) != n - 1:
        raise ProtocolRejected("malformed-marker-row")
    return ChosenCutSession(matrix=matrix, chosen_col_public=revealed.index(1))


def chosen_cut_relative(session: ChosenCutSession, offset: int) -> tuple[int, int]:
    """Public address of the pile at a cyclic offset from the chosen one."""
    if not session.open:
        raise SessionClosedError("Chosen cut session already ended")
    return TARGET_ROW, (session.chosen_col_public + offset) % session.matrix.cols


def chosen_cut_end(engine: CardEngine, session: ChosenCutSession) -> list[Pile]:
    """Shuffle again, align the anchor to column 0 and hand back row 0 in original order."""
    if not session.open:
        raise SessionClosedError("Chosen cut session already ended")
    matrix = session.matrix
    engine.pile_shifting_shuffle(matrix)
    revealed = engine.reveal_row(matrix, ANCHOR_ROW)
    if revealed.count(1) != 1 or revealed.count(0) != matrix.cols - 1:
        raise ProtocolRejected("malformed-anchor-row")
    engine.public_cyclic_shift(matrix, revealed.index(1))
    session.open = False
    return matrix.row(TARGET_ROW)


# FirstNonZero

def first_non_zero(
    engine: CardEngine,
    seq: Sequence[Card],
    k: int,
    expected: int | None = None,
    replacement: Card | None = None,
) -> tuple[int, list[Card]]:
    """
    Show the value of the first nonzero card of seq without revealing its position.

    The prover claims seq[k] is that card. Raises ProtocolRejected with
    nonzero-before, zero-at-chosen or unexpected-value.

    Returns:
        tuple: (revealed value, seq in original order with the optional replacement at k)
    """
    n = len(seq)
    if n < 1:
        raise CardEngineError("FirstNonZero needs a non-empty sequence")
    if not 0 <= k < n:
        raise CardEngineError(f"Claimed index {k} out of range for length {n}")

    pads = engine.new_cards([0] * (n - 1))
    piles = [Pile([card]) for card in (*pads, *seq)]
    session = chosen_cut_begin(engine, piles, k + n - 1)

    for offset in range(-(n - 1), 0):
        row, col = chosen_cut_relative(session, offset)
        if engine.reveal(session.matrix, row, col) != 0:
            raise ProtocolRejected("nonzero-before")
    row, col = chosen_cut_relative(session, 0)
    value = engine.reveal(session.matrix, row, col)
    if value == 0:
        raise ProtocolRejected("zero-at-chosen")
    if expected is not None and value != expected:
        raise ProtocolRejected("unexpected-value")
    if replacement is not None:
        engine.replace_card(session.matrix, row, col, replacement, Visibility.PUBLIC)

    restored = chosen_cut_end(engine, session)
    return value, [pile.top for pile in restored[n - 1:]]


# Uniqueness verification, generalized to multisets

def verify_multiset(
    engine: CardEngine,
    seq: Sequence[Card],
    required: Mapping[int, int],
) -> list[Card]:
    """
    Show that seq holds exactly the values in required, keeping the order hidden.

    Returns:
        list: seq restored to its original order
    """
    n = len(seq)
    if n != sum(required.values()):
        raise CardEngineError(f"Sequence of {n} cards cannot match a multiset of {sum(required.values())}")
    index_cards = engine.new_cards(range(1, n + 1))
    matrix = engine.new_matrix(2, n, [*(Pile([card]) for card in seq), *(Pile([card]) for card in index_cards)])

    engine.pile_scramble_shuffle(matrix)
    shown = engine.reveal_row(matrix, 0)
    if Counter(shown) != Counter({value: count for value, count in required.items() if count}):
        raise ProtocolRejected("multiset-mismatch")

    engine.pile_scramble_shuffle(matrix)
    labels = engine.reveal_row(matrix, 1)
    engine.public_reorder(matrix, sorted(range(n), key=lambda col: labels[col]))
    return [pile.top for pile in matrix.row(0)]


# Protocol instances

class BaseZkProtocol(ABC):
    """A puzzle (or sequence) bound to the prover's witness, runnable many times."""

    kind: str = "base"

    @abstractmethod
    def max_value(self) -> int:
        raise NotImplementedError

    @abstractmethod
    def expected_shuffles(self) -> int:
        raise NotImplementedError

    @abstractmethod
    def _execute(self, engine: CardEngine) -> None:
        raise NotImplementedError

    def grid_cards(self) -> int:
        return 0

    def describe(self) -> str:
        return self.kind

    def create_engine(self, seed: int | np.random.SeedSequence | None = None) -> CardEngine:
        return CardEngine(self.max_value(), seed=seed)

    def run(
        self,
        seed: int | np.random.SeedSequence | None = None,
        engine: CardEngine | None = None,
    ) -> ProtocolOutcome:
        engine = engine if engine is not None else self.create_engine(seed)
        try:
            self._execute(engine)
        except ProtocolRejected as exc:
            engine.transcript.append(VerdictEvent(False, exc.reason, exc.location))
            logger.debug("%s rejected: %s", self.describe(), exc)
            return self._outcome(engine, Verdict.REJECT, exc.reason, exc.location)
        engine.transcript.append(VerdictEvent(True))
        logger.debug("%s accepted after %d shuffles", self.describe(), engine.transcript.shuffle_count())
        return self._outcome(engine, Verdict.ACCEPT)

    @staticmethod
    def _outcome(
        engine: CardEngine,
        verdict: Verdict,
        reason: str | None = None,
        location: str | None = None,
    ) -> ProtocolOutcome:
        return ProtocolOutcome(
            verdict=verdict,
            transcript=engine.transcript,
            reason=reason,
            location=location,
            cards_allocated=engine.cards_created,
            peak_matrix_cards=engine.peak_matrix_cards,
        )


@dataclass
class FirstNonZeroProtocol(BaseZkProtocol):
    """FirstNonZero on its own: the prover holds values and claims index k."""

    values: list[int]
    k: int
    expected: int | None = None
    replacement_value: int | None = None

    kind = "first-non-zero"

    def max_value(self) -> int:
        return max([1, *self.values, *([self.replacement_value] if self.replacement_value is not None else [])])

    def expected_shuffles(self) -> int:
        return 2

    def describe(self) -> str:
        return f"{self.kind} n={len(self.values)}"

    def _execute(self, engine: CardEngine) -> None:
        cards = engine.new_cards(self.values)
        replacement = engine.new_card(self.replacement_value) if self.replacement_value is not None else None
        first_non_zero(engine, cards, self.k, self.expected, replacement)


def first_nonzero_index(values: Sequence[int]) -> int | None:
    """Linear-scan oracle."""
    for index, value in enumerate(values):
        if value != 0:
            return index
    return None
