import json

import pytest

from config import RunConfig
from exceptions import ConfigError
from main import main, run
from suites import SUITES, named_group, resolve_suites, run_check, run_suite


def write_config(tmp_path, document) -> str:
    path = tmp_path / "run.json"
    path.write_text(json.dumps(document), encoding="utf-8")
    return str(path)


class TestNamedGroups:
    @pytest.mark.parametrize("name, order, rank", [
        ("Z/6", 6, 1),
        ("D_6", 12, 2),
        ("Sym(4)", 24, 2),
        ("Alt(5)", 60, 2),
    ])
    def test_finite(self, name, order, rank):
        group = named_group(name)
        assert group.order().value == order
        assert group.rank == rank

    @pytest.mark.parametrize("name", ["Z", "Z^2", "D_inf", "D_∞"])
    def test_infinite(self, name):
        assert not named_group(name).finite

    @pytest.mark.parametrize("name", ["Q8", "Z/", "Sym(x)"])
    def test_unknown(self, name):
        with pytest.raises(ConfigError):
            named_group(name)


def test_resolve_suites():
    assert resolve_suites(()) == sorted(SUITES)
    assert resolve_suites(["ore", "hall", "ore"]) == ["hall", "ore"]
    with pytest.raises(ConfigError):
        resolve_suites(["nope"])


def test_run_suite_records():
    records = run_suite("fp_recovery", RunConfig().caps)
    assert [r.name for r in records] == ["fp_recovery.z8_after_two", "fp_recovery.z16_refuted",
                                         "fp_recovery.sym3_constant"]
    assert {r.suite for r in records} == {"fp_recovery"}


def test_list(capsys):
    assert main(["--list"]) == 0
    rows = [line.split("\t") for line in capsys.readouterr().out.splitlines()]
    assert [row[0] for row in rows] == sorted(SUITES)
    assert all(row[2] == SUITES[row[0]].anchor for row in rows)


@pytest.mark.parametrize("name, anchor", [
    ("goursat", "Sufficient condition for density"),
    ("key_proposition", "Key proposition: combination of the absorption trick and a Hall-type argument"),
    ("ore", "may be written as a single commutator"),
])
def test_anchors_are_statement_labels(name, anchor):
    assert SUITES[name].anchor == anchor
    assert run_check(SUITES[name], "noop", lambda: (True, {})).anchor == anchor


def test_goursat_collects_surjective_pairs():
    record = run_suite("goursat", RunConfig().caps)[0]
    assert record.name == "goursat.alt5_z7_random_pairs"
    assert record.status == "pass"
    assert record.witness["surjective"] == 200
    assert record.witness["order"] == 420


def test_missing_config():
    assert main([]) == 2


def test_invalid_config(tmp_path):
    assert main(["--config", write_config(tmp_path, {"command": "explode"})]) == 2
    assert main(["--config", str(tmp_path / "absent.json")]) == 2
    assert main(["--config", write_config(tmp_path, {"suites": ["nope"]})]) == 2


def test_invalid_jobs(tmp_path):
    assert main(["--config", write_config(tmp_path, {}), "--jobs", "0"]) == 2


def test_reproducible_report(tmp_path):
    config = write_config(tmp_path, {"suites": ["fp_recovery"]})
    outputs, codes = [], []
    out = tmp_path / "report.json"
    for _ in range(2):
        codes.append(main(["--config", config, "--out", str(out), "--no-timings", "-q"]))
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]
    assert codes[0] == codes[1]
    report = json.loads(outputs[0])
    assert report["command"] == "verify"
    assert all("runtime_ms" not in record for record in report["records"])
    assert sum(report["summary"].values()) == 3


def test_agreement_command(tmp_path):
    config = write_config(tmp_path, {"command": "agreement",
                                     "agreement": [{"left": "Z/6", "right": "Z", "rmax": 10}]})
    out = tmp_path / "agreement.json"
    assert main(["--config", config, "--out", str(out)]) == 0
    report = json.loads(out.read_text(encoding="utf-8"))
    record = report["records"][0]
    assert record["status"] == "pass"
    assert record["witness"]["value"] == 2
    assert not record["witness"]["at_least"]
    assert report["extra"]["agreement"][0]["radius"] == "2"


def test_agreement_rank_mismatch(tmp_path):
    config = write_config(tmp_path, {"command": "agreement", "agreement": [{"left": "Z", "right": "D_inf"}]})
    assert main(["--config", config, "--out", str(tmp_path / "out.json")]) == 1


def test_agreement_without_pairs():
    with pytest.raises(ConfigError):
        run(RunConfig(command="agreement"))


def test_markdown_to_stdout(tmp_path, capsys):
    config = write_config(tmp_path, {"command": "agreement", "format": "markdown",
                                     "agreement": [{"left": "D_6", "right": "D_inf"}]})
    assert main(["--config", config]) == 0
    text = capsys.readouterr().out
    assert text.startswith("# mgk ")
    assert "agreement.D_6~D_inf" in text
