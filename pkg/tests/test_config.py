import json
import logging

import pytest

from config import (
    AgreementPair, Caps, PipelineConfig, RunConfig, SpectralRow, load_config, parse_config, setup_logging,
)
from exceptions import ConfigError


def test_defaults():
    config = parse_config({})
    assert config == RunConfig()
    assert config.command == "verify"
    assert config.timings


def test_full_document():
    config = parse_config({
        "command": "spectral",
        "format": "markdown",
        "caps": {"closure": 5000},
        "jobs": 2,
        "spectral": {"rows": [{"l_prime": 1, "p": 3}], "prefixes": [[{"l_prime": 1, "p": 2}, {"l_prime": 1, "p": 3}]]},
        "agreement": [{"left": "Z/6", "right": "Z"}],
        "pipeline": {"prefix_n": 2, "sidon": [1, 2], "primes": [[2, 5], [2, 7]], "ore_constraint": [2, 3]},
    })
    assert config.caps == Caps(closure=5000)
    assert config.pipeline.caps == config.caps
    assert config.pipeline.primes == ((2, 5), (2, 7))
    assert config.pipeline.sidon == (1, 2)
    assert config.spectral.rows == (SpectralRow(1, 3),)
    assert len(config.spectral.prefixes[0]) == 2
    assert config.agreement == (AgreementPair("Z/6", "Z", 10),)


@pytest.mark.parametrize("document", [
    {"unknown": 1},
    {"command": "explode"},
    {"format": "xml"},
    {"caps": {"ball": 0}},
    {"caps": {"ball": True}},
    {"jobs": -1},
    {"suites": "goursat"},
    {"timings": "no"},
    {"pipeline": {"base_chain": "cyclic"}},
    {"pipeline": {"primes": [[1, 2, 3]]}},
    {"pipeline": {"ore_constraint": [5]}},
    {"pipeline": {"extra": True}},
    {"spectral": {"rows": [{"l_prime": 1}]}},
    {"agreement": [{"left": "Z", "right": "Z", "radius": 3}]},
], ids=lambda d: json.dumps(d)[:30])
def test_invalid(document):
    with pytest.raises(ConfigError):
        parse_config(document)


def test_not_an_object():
    with pytest.raises(ConfigError):
        parse_config([])


def test_load(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"command": "construct", "pipeline": {"prefix_n": 1}}), encoding="utf-8")
    config = load_config(str(path))
    assert config.command == "construct"
    assert config.pipeline == PipelineConfig(prefix_n=1)


def test_load_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "missing.json"))
    broken = tmp_path / "broken.json"
    broken.write_text("{", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(str(broken))


def test_setup_logging():
    setup_logging(logging.DEBUG)
    assert logging.getLogger().level == logging.DEBUG
    setup_logging()
    assert logging.getLogger().level == logging.INFO


def test_schema_error_names_the_field():
    with pytest.raises(ConfigError, match="pipeline.prefix_n"):
        parse_config({"pipeline": {"prefix_n": 0}})
