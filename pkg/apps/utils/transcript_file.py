"""
Line-oriented transcript files, one event per line.

Serialization is canonical (single spaces, fixed key order, newline-terminated,
integers without leading zeros) so identical runs give byte-identical files.
"""

from __future__ import annotations

import logging
import re

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

logger = logging.getLogger(__name__)

_INT_PATTERN = re.compile(r"0|[1-9][0-9]*")
_WORD_PATTERN = re.compile(r"[a-z0-9][a-z0-9:_-]*")


class TranscriptFormatError(ValueError):
    """Raised when a transcript line cannot be parsed. line is 1-based."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.message = message


def format_event(event: TranscriptEvent) -> str:
    if isinstance(event, ShuffleEvent):
        return f"SHUFFLE kind={event.kind.value} rows={event.rows} cols={event.cols} flip={event.flipped}"
    if isinstance(event, RevealEvent):
        return f"REVEAL r={event.row} c={event.col} d={event.depth} v={event.value}"
    if isinstance(event, PlaceEvent):
        line = f"PLACE r={event.row} c={event.col} d={event.depth} vis={event.visibility.value}"
        if event.visibility is Visibility.PUBLIC:
            line += f" v={event.value}"
        return line
    if isinstance(event, PublicShiftEvent):
        return f"SHIFT off={event.offset}"
    if isinstance(event, VerdictEvent):
        if event.accepted:
            return "VERDICT accept"
        line = f"VERDICT reject reason={event.reason}"
        if event.location is not None:
            line += f" at={event.location}"
        return line
    raise TypeError(f"Unknown transcript event: {event!r}")


def dump_transcript(transcript: Transcript) -> str:
    return "".join(format_event(event) + "\n" for event in transcript)


def _fields(tokens: list[str], keys: list[str], line_no: int) -> dict[str, str]:
    if len(tokens) != len(keys):
        raise TranscriptFormatError(line_no, f"expected fields {' '.join(keys)}")
    values = {}
    for token, key in zip(tokens, keys):
        name, sep, value = token.partition("=")
        if not sep or name != key or not value:
            raise TranscriptFormatError(line_no, f"expected {key}=..., got {token!r}")
        values[key] = value
    return values


def _int(values: dict[str, str], key: str, line_no: int) -> int:
    raw = values[key]
    if not _INT_PATTERN.fullmatch(raw):
        raise TranscriptFormatError(line_no, f"{key} must be a non-negative integer, got {raw!r}")
    return int(raw)


def _word(values: dict[str, str], key: str, line_no: int) -> str:
    raw = values[key]
    if not _WORD_PATTERN.fullmatch(raw):
        raise TranscriptFormatError(line_no, f"{key} has invalid characters: {raw!r}")
    return raw


def parse_event(line: str, line_no: int) -> TranscriptEvent:
    tokens = line.split(" ")
    head, rest = tokens[0], tokens[1:]

    if head == "SHUFFLE":
        values = _fields(rest, ["kind", "rows", "cols", "flip"], line_no)
        try:
            kind = ShuffleKind(values["kind"])
        except ValueError:
            raise TranscriptFormatError(line_no, f"unknown shuffle kind {values['kind']!r}") from None
        return ShuffleEvent(kind, _int(values, "rows", line_no), _int(values, "cols", line_no), _int(values, "flip", line_no))

    if head == "REVEAL":
        values = _fields(rest, ["r", "c", "d", "v"], line_no)
        return RevealEvent(*(_int(values, key, line_no) for key in ("r", "c", "d", "v")))

    if head == "PLACE":
        if len(rest) == 5:
            values = _fields(rest, ["r", "c", "d", "vis", "v"], line_no)
            if values["vis"] != Visibility.PUBLIC.value:
                raise TranscriptFormatError(line_no, "only public placements carry a value")
            value = _int(values, "v", line_no)
        else:
            values = _fields(rest, ["r", "c", "d", "vis"], line_no)
            if values["vis"] != Visibility.HIDDEN.value:
                raise TranscriptFormatError(line_no, "public placements need a value")
            value = None
        return PlaceEvent(
            _int(values, "r", line_no),
            _int(values, "c", line_no),
            _int(values, "d", line_no),
            Visibility(values["vis"]),
            value,
        )

    if head == "SHIFT":
        values = _fields(rest, ["off"], line_no)
        return PublicShiftEvent(_int(values, "off", line_no))

    if head == "VERDICT":
        if rest == ["accept"]:
            return VerdictEvent(True)
        if rest and rest[0] == "reject":
            keys = ["reason", "at"] if len(rest) == 3 else ["reason"]
            values = _fields(rest[1:], keys, line_no)
            location = _word(values, "at", line_no) if "at" in values else None
            return VerdictEvent(False, _word(values, "reason", line_no), location)
        raise TranscriptFormatError(line_no, "verdict must be 'accept' or 'reject reason=...'")

    raise TranscriptFormatError(line_no, f"unknown event {head!r}")


def load_transcript(text: str) -> Transcript:
    """Parse canonical transcript text. A missing final newline counts as truncation."""
    if not text:
        return Transcript()
    if not text.endswith("\n"):
        raise TranscriptFormatError(text.count("\n") + 1, "last line is not newline-terminated")
    transcript = Transcript()
    for line_no, line in enumerate(text[:-1].split("\n"), start=1):
        transcript.append(parse_event(line, line_no))
    return transcript


def write_transcript(transcript: Transcript, path: str) -> str:
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(dump_transcript(transcript))
    logger.info("Transcript with %d events written to %s", len(transcript), path)
    return path


def read_transcript(path: str) -> Transcript:
    with open(path, 'r', encoding='utf-8', newline='') as f:
        return load_transcript(f.read())
