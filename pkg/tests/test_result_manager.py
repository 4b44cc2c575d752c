import datetime
import os

from utils.card_engine import Transcript, VerdictEvent
from utils.result_manager import (
    create_result_directory,
    get_all_result_dirs,
    get_result_info,
    save_report,
    save_transcript,
)

NOON = datetime.datetime(2026, 1, 2, 12, 0, 0)


def test_directory_name_carries_stamp_and_label(tmp_path):
    result_dir = create_result_directory(str(tmp_path / "results"), label="prove_abc5", now=NOON)
    assert os.path.basename(result_dir) == "20260102_120000_prove_abc5"
    assert os.path.isdir(result_dir)


def test_same_second_same_label_gets_suffix(tmp_path):
    base = str(tmp_path)
    first = create_result_directory(base, label="audit_abc5", now=NOON)
    second = create_result_directory(base, label="audit_abc5", now=NOON)
    third = create_result_directory(base, label="audit_abc5", now=NOON)
    assert [os.path.basename(d) for d in (first, second, third)] == [
        "20260102_120000_audit_abc5",
        "20260102_120000_audit_abc5-2",
        "20260102_120000_audit_abc5-3",
    ]


def test_listing_skips_empty_dirs_and_is_newest_first(tmp_path):
    base = str(tmp_path)
    older = create_result_directory(base, label="prove_abc5", now=NOON)
    newer = create_result_directory(base, label="audit_goishi6", now=NOON + datetime.timedelta(minutes=1))
    create_result_directory(base, label="interrupted", now=NOON + datetime.timedelta(minutes=2))
    save_report({"command": "prove", "passed": True}, older, "abc5")
    save_report({"command": "audit", "passed": False}, newer, "goishi6")

    assert get_all_result_dirs(base) == [newer, older]


def test_listing_missing_base(tmp_path):
    assert get_all_result_dirs(str(tmp_path / "nowhere")) == []


def test_result_info(tmp_path):
    result_dir = create_result_directory(str(tmp_path), label="prove_abc5", now=NOON)
    save_transcript(Transcript([VerdictEvent(True)]), result_dir, "abc5")
    save_report({"command": "prove", "passed": True}, result_dir, "abc5")

    info = get_result_info(result_dir)
    assert info["timestamp"] == "20260102_120000"
    assert info["command"] == "prove"
    assert info["puzzle_name"] == "abc5"
    assert info["passed"] is True
    assert info["has_report"] and info["has_transcript"]
    assert info["report_file"] == "abc5_report.json"
    assert info["transcript_file"] == "abc5_transcript.txt"


def test_result_info_transcript_only(tmp_path):
    result_dir = create_result_directory(str(tmp_path), label="prove_line", now=NOON)
    save_transcript(Transcript([VerdictEvent(False, "multiset-mismatch", "row:0")]), result_dir, "line")

    info = get_result_info(result_dir)
    assert info["puzzle_name"] == "line"
    assert info["passed"] is None
    assert info["command"] is None
    assert not info["has_report"]
