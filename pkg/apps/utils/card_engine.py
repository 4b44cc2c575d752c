"""
Cards, piles and card matrices, plus the shuffles and reveals that act on them.

Every public action is appended to the engine's transcript. Shuffle offsets and
permutations are drawn from the engine's generator and never recorded.
"""

from __future__ import annotations

import logging
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

logger = logging.getLogger(__name__)


class CardEngineError(ValueError):
    """Raised when a card operation is used outside its preconditions."""


class Face(str, Enum):
    UP = "up"
    DOWN = "down"


class Visibility(str, Enum):
    PUBLIC = "public"
    HIDDEN = "hidden"


class ShuffleKind(str, Enum):
    CYCLIC = "cyclic"
    PERMUTATION = "permutation"


@dataclass(slots=True)
class Card:
    id: int
    value: int
    face: Face = Face.DOWN

    @property
    def face_up(self) -> bool:
        return self.face is Face.UP


@dataclass(slots=True)
class Pile:
    """Cards stacked top to bottom; depth 0 is the top card."""

    cards: list[Card] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.cards)

    def __iter__(self) -> Iterator[Card]:
        return iter(self.cards)

    @property
    def top(self) -> Card:
        return self.cards[0]


# Transcript events. Field order is the serialization order.

@dataclass(frozen=True, slots=True)
class ShuffleEvent:
    kind: ShuffleKind
    rows: int
    cols: int
    flipped: int


@dataclass(frozen=True, slots=True)
class RevealEvent:
    row: int
    col: int
    depth: int
    value: int


@dataclass(frozen=True, slots=True)
class PlaceEvent:
    row: int
    col: int
    depth: int
    visibility: Visibility
    value: int | None = None


@dataclass(frozen=True, slots=True)
class PublicShiftEvent:
    offset: int


@dataclass(frozen=True, slots=True)
class VerdictEvent:
    accepted: bool
    reason: str | None = None
    location: str | None = None


TranscriptEvent = ShuffleEvent | RevealEvent | PlaceEvent | PublicShiftEvent | VerdictEvent


@dataclass
class Transcript:
    """The verifier's view of a protocol run, in order."""

    events: list[TranscriptEvent] = field(default_factory=list)

    def append(self, event: TranscriptEvent) -> None:
        self.events.append(event)

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self) -> Iterator[TranscriptEvent]:
        return iter(self.events)

    def shuffle_count(self) -> int:
        return sum(isinstance(event, ShuffleEvent) for event in self.events)

    @property
    def verdict(self) -> VerdictEvent | None:
        if self.events and isinstance(self.events[-1], VerdictEvent):
            return self.events[-1]
        return None


class CardMatrix:
    """A rows x cols table of piles. Columns move as a unit under shuffles."""

    __slots__ = ("rows", "cols", "_columns")

    def __init__(self, rows: int, cols: int, columns: list[list[Pile]]):
        self.rows = rows
        self.cols = cols
        self._columns = columns

    def pile(self, row: int, col: int) -> Pile:
        self._check_address(row, col)
        return self._columns[col][row]

    def card(self, row: int, col: int, depth: int = 0) -> Card:
        pile = self.pile(row, col)
        if not 0 <= depth < len(pile):
            raise CardEngineError(f"No card at depth {depth} of pile ({row}, {col})")
        return pile.cards[depth]

    def set_card(self, row: int, col: int, card: Card, depth: int = 0) -> Card:
        """Positional bookkeeping only: swaps a card in place without any event."""
        pile = self.pile(row, col)
        if not 0 <= depth < len(pile):
            raise CardEngineError(f"No card at depth {depth} of pile ({row}, {col})")
        old = pile.cards[depth]
        pile.cards[depth] = card
        return old

    def row(self, row: int) -> list[Pile]:
        if not 0 <= row < self.rows:
            raise CardEngineError(f"Row {row} out of range for {self.rows} rows")
        return [column[row] for column in self._columns]

    def cards(self) -> Iterator[Card]:
        for column in self._columns:
            for pile in column:
                yield from pile.cards

    def card_count(self) -> int:
        return sum(len(pile) for column in self._columns for pile in column)

    def id_layout(self) -> list[list[list[int]]]:
        """Card ids per row, column and depth; used by restoration checks."""
        return [[[card.id for card in pile] for pile in self.row(r)] for r in range(self.rows)]

    def _check_address(self, row: int, col: int) -> None:
        if not (0 <= row < self.rows and 0 <= col < self.cols):
            raise CardEngineError(f"Address ({row}, {col}) outside {self.rows}x{self.cols} matrix")

    def _reorder(self, order: Sequence[int]) -> None:
        # order[j] is the old column that lands at column j
        self._columns = [self._columns[i] for i in order]


class CardEngine:
    """
    One engine per protocol run: owns the card ids, the generator and the transcript.

    Args:
        max_value: Largest card value the protocol's alphabet allows
        seed: Seed (or SeedSequence) for the run's generator
        rng: Explicit generator; takes precedence over seed
    """

    def __init__(
        self,
        max_value: int,
        seed: int | np.random.SeedSequence | None = None,
        rng: np.random.Generator | None = None,
    ):
        if max_value < 1:
            raise CardEngineError("The alphabet must allow at least the values 0 and 1")
        self.max_value = max_value
        self.rng = rng if rng is not None else np.random.default_rng(seed)
        self.transcript = Transcript()
        self.cards_created = 0
        self.peak_matrix_cards = 0
        self._next_id = 0

    # Cards and matrices

    def new_card(self, value: int) -> Card:
        if not 0 <= value <= self.max_value:
            raise CardEngineError(f"Card value {value} outside alphabet 0..{self.max_value}")
        card = Card(id=self._next_id, value=value)
        self._next_id += 1
        self.cards_created += 1
        return card

    def new_cards(self, values: Sequence[int]) -> list[Card]:
        values = list(values)
        if values and not (0 <= min(values) and max(values) <= self.max_value):
            bad = next(v for v in values if not 0 <= v <= self.max_value)
            raise CardEngineError(f"Card value {bad} outside alphabet 0..{self.max_value}")
        first = self._next_id
        cards = [Card(first + i, value) for i, value in enumerate(values)]
        self._next_id += len(cards)
        self.cards_created += len(cards)
        return cards

    def new_matrix(self, rows: int, cols: int, piles: Sequence[Pile]) -> CardMatrix:
        """Build a matrix from row-major piles. Emits no events."""
        if rows < 1 or cols < 1:
            raise CardEngineError(f"Matrix dimensions must be positive, got {rows}x{cols}")
        if len(piles) != rows * cols:
            raise CardEngineError(f"Expected {rows * cols} piles for a {rows}x{cols} matrix, got {len(piles)}")
        for r in range(rows):
            lengths = {len(pile) for pile in piles[r * cols:(r + 1) * cols]}
            if len(lengths) != 1:
                raise CardEngineError(f"Row {r} has piles of differing lengths {sorted(lengths)}")
        columns = [[piles[r * cols + c] for r in range(rows)] for c in range(cols)]
        matrix = CardMatrix(rows, cols, columns)
        self.peak_matrix_cards = max(self.peak_matrix_cards, matrix.card_count())
        return matrix

    # Shuffles

    def pile_shifting_shuffle(self, m: CardMatrix) -> None:
        flipped = self._turn_all_down(m)
        offset = self._draw_offset(m.cols)
        m._reorder([(j - offset) % m.cols for j in range(m.cols)])
        self.transcript.append(ShuffleEvent(ShuffleKind.CYCLIC, m.rows, m.cols, flipped))

    def pile_scramble_shuffle(self, m: CardMatrix) -> None:
        flipped = self._turn_all_down(m)
        m._reorder(self._draw_permutation(m.cols))
        self.transcript.append(ShuffleEvent(ShuffleKind.PERMUTATION, m.rows, m.cols, flipped))

    def _draw_offset(self, cols: int) -> int:
        return int(self.rng.integers(cols))

    def _draw_permutation(self, cols: int) -> list[int]:
        return [int(i) for i in self.rng.permutation(cols)]

    @staticmethod
    def _turn_all_down(m: CardMatrix) -> int:
        flipped = 0
        down = Face.DOWN
        for column in m._columns:
            for pile in column:
                for card in pile.cards:
                    if card.face is not down:
                        card.face = down
                        flipped += 1
        return flipped

    # Public actions

    def reveal(self, m: CardMatrix, row: int, col: int, depth: int = 0) -> int:
        card = m.card(row, col, depth)
        card.face = Face.UP
        self.transcript.append(RevealEvent(row, col, depth, card.value))
        return card.value

    def reveal_row(self, m: CardMatrix, row: int, depth: int = 0) -> list[int]:
        piles = m.row(row)
        if any(not 0 <= depth < len(pile) for pile in piles):
            raise CardEngineError(f"No card at depth {depth} in row {row}")
        up = Face.UP
        record = self.transcript.events.append
        values = []
        for col, pile in enumerate(piles):
            card = pile.cards[depth]
            card.face = up
            record(RevealEvent(row, col, depth, card.value))
            values.append(card.value)
        return values

    def replace_card(
        self,
        m: CardMatrix,
        row: int,
        col: int,
        new: Card,
        visibility: Visibility,
        depth: int = 0,
    ) -> Card:
        new.face = Face.DOWN
        old = m.set_card(row, col, new, depth)
        value = new.value if visibility is Visibility.PUBLIC else None
        self.transcript.append(PlaceEvent(row, col, depth, visibility, value))
        return old

    def place_public(self, row: int, col: int, card: Card) -> None:
        """Record a public placement of a fresh card on the table (setup layouts)."""
        card.face = Face.DOWN
        self.transcript.append(PlaceEvent(row, col, 0, Visibility.PUBLIC, card.value))

    def public_cyclic_shift(self, m: CardMatrix, target_col_of_marker: int) -> None:
        """Rotate columns left so the column holding the marker becomes column 0."""
        offset = target_col_of_marker % m.cols
        m._reorder([(j + offset) % m.cols for j in range(m.cols)])
        self.transcript.append(PublicShiftEvent(offset))

    def public_reorder(self, m: CardMatrix, order: Sequence[int]) -> None:
        """Rearrange columns openly; order[j] is the current column moved to j.

        Only used when the order follows from values everybody just saw, so
        nothing is recorded.
        """
        if sorted(order) != list(range(m.cols)):
            raise CardEngineError(f"Not a permutation of {m.cols} columns: {list(order)}")
        m._reorder(order)


class RiggedShuffleEngine(CardEngine):
    """Negative control: every pile-shifting shuffle uses the same offset."""

    def __init__(self, max_value: int, offset: int = 1, **kwargs):
        super().__init__(max_value, **kwargs)
        self.offset = offset

    def _draw_offset(self, cols: int) -> int:
        return self.offset % cols
