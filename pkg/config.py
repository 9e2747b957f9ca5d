import json
import logging
from dataclasses import dataclass, field, fields
from typing import Any, Dict, List, Optional, Tuple

from exceptions import ConfigError
from utils import schema_errors

COMMANDS = ("verify", "construct", "agreement", "spectral")
FORMATS = ("json", "markdown")
BASE_CHAINS = ("dihedral",)
VERSION = "0.1.0"

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def setup_logging(level: int = logging.INFO) -> None:
    """Configure la journalisation du processus (appelé uniquement par main)."""
    logging.basicConfig(level=level, format=LOG_FORMAT, force=True)


@dataclass(frozen=True)
class Caps:
    """Plafonds de ressources."""
    ball: int = 2_000_000
    closure: int = 200_000
    bsgs_points: int = 20_000
    eigen_dense: int = 4000


@dataclass(frozen=True)
class PipelineConfig:
    base_chain: str = "dihedral"
    prefix_n: int = 1
    sidon: Optional[Tuple[int, ...]] = None
    primes: Optional[Tuple[Tuple[int, int], ...]] = None
    caps: Caps = field(default_factory=Caps)
    ore_constraint: Optional[Tuple[int, ...]] = None
    literal_schedule: bool = False
    agreement_rmax: int = 2


@dataclass(frozen=True)
class AgreementPair:
    left: str
    right: str
    rmax: int = 10


@dataclass(frozen=True)
class SpectralRow:
    l_prime: int
    p: int


@dataclass(frozen=True)
class SpectralConfig:
    rows: Tuple[SpectralRow, ...] = (SpectralRow(1, 2),)
    prefixes: Tuple[Tuple[SpectralRow, ...], ...] = ()


@dataclass(frozen=True)
class RunConfig:
    command: str = "verify"
    suites: Tuple[str, ...] = ()
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    agreement: Tuple[AgreementPair, ...] = ()
    spectral: SpectralConfig = field(default_factory=SpectralConfig)
    output: Optional[str] = None
    format: str = "json"
    caps: Caps = field(default_factory=Caps)
    jobs: int = 1
    timings: bool = True


def _check_keys(section: str, data: Any, cls) -> Dict[str, Any]:
    if not isinstance(data, dict):
        raise ConfigError(f"{section} : objet JSON attendu")
    allowed = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"{section} : clés inconnues {unknown}")
    return data


def _positive_int(section: str, value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value <= 0:
        raise ConfigError(f"{section} : entier strictement positif attendu, reçu {value!r}")
    return value


def _parse_caps(section: str, data: Any) -> Caps:
    data = _check_keys(section, data, Caps)
    return Caps(**{key: _positive_int(f"{section}.{key}", value) for key, value in data.items()})


def _parse_pipeline(data: Any, caps: Caps) -> PipelineConfig:
    data = dict(_check_keys("pipeline", data, PipelineConfig))
    if "caps" in data:
        data["caps"] = _parse_caps("pipeline.caps", data["caps"])
    else:
        data["caps"] = caps
    if data.get("base_chain", "dihedral") not in BASE_CHAINS:
        raise ConfigError(f"pipeline.base_chain inconnu : {data['base_chain']!r}")
    if "prefix_n" in data:
        _positive_int("pipeline.prefix_n", data["prefix_n"])
    if "agreement_rmax" in data:
        _positive_int("pipeline.agreement_rmax", data["agreement_rmax"])
    if data.get("sidon") is not None:
        data["sidon"] = tuple(int(x) for x in data["sidon"])
    if data.get("primes") is not None:
        try:
            data["primes"] = tuple((int(a), int(b)) for a, b in data["primes"])
        except (TypeError, ValueError):
            raise ConfigError("pipeline.primes : liste de paires [p', p] attendue")
    if data.get("ore_constraint") is not None:
        data["ore_constraint"] = tuple(int(x) for x in data["ore_constraint"])
        if not set(data["ore_constraint"]) <= {2, 3}:
            raise ConfigError("pipeline.ore_constraint : ordres autorisés 2 et 3")
    return PipelineConfig(**data)


def _parse_spectral(data: Any) -> SpectralConfig:
    data = _check_keys("spectral", data, SpectralConfig)

    def row(item: Any) -> SpectralRow:
        item = _check_keys("spectral.rows[]", item, SpectralRow)
        return SpectralRow(_positive_int("l_prime", item.get("l_prime")), _positive_int("p", item.get("p")))

    rows = tuple(row(item) for item in data.get("rows", [{"l_prime": 1, "p": 2}]))
    prefixes = tuple(tuple(row(item) for item in prefix) for prefix in data.get("prefixes", []))
    return SpectralConfig(rows, prefixes)


def parse_config(data: Any) -> RunConfig:
    """Analyse stricte d'un document de configuration déjà décodé."""
    errors = schema_errors(data, "config")
    if errors:
        raise ConfigError("document non conforme au schéma : " + " ; ".join(errors))
    data = dict(_check_keys("config", data, RunConfig))
    if data.get("command", "verify") not in COMMANDS:
        raise ConfigError(f"commande inconnue : {data.get('command')!r}")
    if data.get("format", "json") not in FORMATS:
        raise ConfigError(f"format inconnu : {data.get('format')!r}")
    caps = _parse_caps("caps", data["caps"]) if "caps" in data else Caps()
    data["caps"] = caps
    if "jobs" in data:
        _positive_int("jobs", data["jobs"])
    if not isinstance(data.get("timings", True), bool):
        raise ConfigError("timings : booléen attendu")
    if "suites" in data:
        if not isinstance(data["suites"], list) or not all(isinstance(s, str) for s in data["suites"]):
            raise ConfigError("suites : liste de noms attendue")
        data["suites"] = tuple(data["suites"])
    data["pipeline"] = _parse_pipeline(data.get("pipeline", {}), caps)
    if "agreement" in data:
        pairs: List[AgreementPair] = []
        for item in data["agreement"]:
            item = _check_keys("agreement[]", item, AgreementPair)
            pairs.append(AgreementPair(str(item["left"]), str(item["right"]),
                                       _positive_int("agreement.rmax", item.get("rmax", 10))))
        data["agreement"] = tuple(pairs)
    if "spectral" in data:
        data["spectral"] = _parse_spectral(data["spectral"])
    return RunConfig(**data)


def load_config(path: str) -> RunConfig:
    """Lit et valide le fichier JSON de configuration."""
    try:
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
    except OSError as e:
        raise ConfigError(f"lecture impossible de {path} : {e}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"JSON invalide dans {path} : {e}")
    return parse_config(data)
