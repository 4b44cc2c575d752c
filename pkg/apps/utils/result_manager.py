import datetime
import itertools
import json
import os

from .card_engine import Transcript
from .transcript_file import write_transcript

REPORT_SUFFIX = "_report.json"
TRANSCRIPT_SUFFIX = "_transcript.txt"
STAMP_FORMAT = "%Y%m%d_%H%M%S"
STAMP_LENGTH = len("YYYYmmdd_HHMMSS")


def create_result_directory(base_path="results", label=None, now=None):
    """
    Create a fresh directory for one saved run.

    The name is the run's timestamp followed by the label, e.g.
    ``20260101_120000_prove_abc5``. Runs that land on the same name get a
    ``-2``, ``-3``, ... suffix.

    Args:
        base_path: Results directory, created on first use
        label: Short run label (command and puzzle name)
        now: Timestamp to use instead of the current time

    Returns:
        str: Path to the created directory
    """
    os.makedirs(base_path, exist_ok=True)
    stamp = (now or datetime.datetime.now()).strftime(STAMP_FORMAT)
    name = f"{stamp}_{label}" if label else stamp

    for attempt in itertools.count(1):
        result_dir = os.path.join(base_path, name if attempt == 1 else f"{name}-{attempt}")
        try:
            os.mkdir(result_dir)
        except FileExistsError:
            continue
        return result_dir


def _has_saved_files(path):
    return any(f.endswith((REPORT_SUFFIX, TRANSCRIPT_SUFFIX)) for f in os.listdir(path))


def get_all_result_dirs(base_path="results"):
    """
    Saved run directories, newest first.

    Directories without a report or transcript (an interrupted save) are skipped.
    Names start with the timestamp, so name order is time order.
    """
    if not os.path.isdir(base_path):
        return []

    with os.scandir(base_path) as entries:
        result_dirs = [entry.path for entry in entries if entry.is_dir() and _has_saved_files(entry.path)]
    return sorted(result_dirs, key=os.path.basename, reverse=True)


def save_report(report, result_dir, puzzle_name):
    """
    Save a run or audit report as JSON.

    Args:
        report: JSON-serializable report data
        result_dir: Directory to save the report
        puzzle_name: Name of the puzzle file the report is about

    Returns:
        str: Path to the saved report file
    """
    report_path = os.path.join(result_dir, f"{puzzle_name}{REPORT_SUFFIX}")
    with open(report_path, 'w', encoding='utf-8') as f:
        json.dump(report, f, ensure_ascii=False, indent=4)
    return report_path


def save_transcript(transcript: Transcript, result_dir, puzzle_name):
    """Save a protocol transcript next to its report."""
    return write_transcript(transcript, os.path.join(result_dir, f"{puzzle_name}{TRANSCRIPT_SUFFIX}"))


def load_report(result_dir, report_filename):
    report_path = os.path.join(result_dir, report_filename)
    if not os.path.exists(report_path):
        return None

    with open(report_path, 'r', encoding='utf-8') as f:
        return json.load(f)


def get_result_info(result_dir):
    """
    Summarize a saved run directory.

    Returns:
        dict: dir, timestamp, command, puzzle_name, passed and the saved file names
    """
    files = sorted(os.listdir(result_dir))
    report_file = next((f for f in files if f.endswith(REPORT_SUFFIX)), None)
    transcript_file = next((f for f in files if f.endswith(TRANSCRIPT_SUFFIX)), None)

    puzzle_name = None
    if report_file:
        puzzle_name = report_file[:-len(REPORT_SUFFIX)]
    elif transcript_file:
        puzzle_name = transcript_file[:-len(TRANSCRIPT_SUFFIX)]

    report = load_report(result_dir, report_file) if report_file else None
    if not isinstance(report, dict):
        report = {}

    return {
        "dir": result_dir,
        "timestamp": os.path.basename(result_dir)[:STAMP_LENGTH],
        "command": report.get("command"),
        "puzzle_name": puzzle_name,
        "has_report": report_file is not None,
        "has_transcript": transcript_file is not None,
        "passed": report.get("passed"),
        "report_file": report_file,
        "transcript_file": transcript_file,
    }
