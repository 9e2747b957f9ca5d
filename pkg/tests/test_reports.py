import json

import pandas as pd
import pytest

from config import RunConfig
from reports import CheckRecord, VerificationReport, validate_report, write_report


def record(status, witness=None):
    return CheckRecord(f"demo.{status}", "énoncé", status, witness or {}, 1.5, "demo")


def test_status_validated():
    with pytest.raises(ValueError):
        record("maybe")


@pytest.mark.parametrize("statuses, code", [
    ((), 0),
    (("pass", "skipped"), 0),
    (("pass", "fail"), 1),
    (("inconclusive",), 0),
])
def test_exit_codes(statuses, code):
    report = VerificationReport("verify", RunConfig(), [record(s) for s in statuses])
    assert report.exit_code() == code


def test_cap_exit_code():
    capped = record("inconclusive", {"cap": 10})
    assert capped.cap_exhausted
    assert VerificationReport("verify", RunConfig(), [capped]).exit_code() == 3
    assert VerificationReport("verify", RunConfig(), [capped, record("fail")]).exit_code() == 1


def test_summary_counts():
    report = VerificationReport("verify", RunConfig(), [record("pass"), record("pass"), record("fail")])
    assert report.summary() == {"pass": 2, "fail": 1, "inconclusive": 0, "skipped": 0}


def test_json_without_timings():
    report = VerificationReport("spectral", RunConfig(timings=False), [record("pass")],
                                {"table": pd.DataFrame([{"gap": 0.5, "runtime_ms": 3.0}])})
    data = json.loads(report.render("json"))
    assert "runtime_ms" not in data["records"][0]
    assert data["extra"]["table"] == [{"gap": 0.5}]
    assert data["config"]["timings"] is False


def test_json_with_timings():
    data = json.loads(VerificationReport("verify", RunConfig(), [record("pass")]).render("json"))
    assert data["records"][0]["runtime_ms"] == 1.5
    assert data["version"] == "0.1.0"


def test_markdown_lists_witnesses():
    report = VerificationReport("verify", RunConfig(), [record("pass"), record("fail", {"order": 7})],
                                {"notes": {"k": 1}})
    text = report.render("markdown")
    assert "## Témoins" in text
    assert "`demo.fail` (fail)" in text
    assert "`demo.pass`" not in text.split("## Témoins")[1].split("## notes")[0]
    assert "## notes" in text


def test_write_report(tmp_path):
    path = tmp_path / "out.md"
    text = write_report(VerificationReport("verify", RunConfig()), "markdown", str(path))
    assert path.read_text(encoding="utf-8") == text


def test_emitted_report_matches_schema():
    report = VerificationReport("verify", RunConfig(), [record("pass"), record("fail", {"n": 3})],
                                {"table": pd.DataFrame([{"p": 2, "gap": 0.5}])})
    text = write_report(report, "json", None)
    assert validate_report(json.loads(text)) == []


def test_schema_rejects_altered_report():
    data = json.loads(VerificationReport("verify", RunConfig(), [record("pass")]).render("json"))
    data["records"][0]["status"] = "maybe"
    data["unexpected"] = True
    errors = validate_report(data)
    assert len(errors) == 2
    assert any(error.startswith("records.0.status") for error in errors)
