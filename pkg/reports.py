import json
import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional

import pandas as pd

from config import VERSION, RunConfig
from utils import dataframe_to_markdown, dumps, schema_errors

logger = logging.getLogger(__name__)

STATUSES = ("pass", "fail", "inconclusive", "skipped")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
EXIT_RESOURCES = 3


@dataclass(frozen=True)
class CheckRecord:
    """Résultat d'une vérification : nom, ancre de l'énoncé vérifié, statut, témoin et durée."""
    name: str
    anchor: str
    status: str
    witness: Dict[str, Any] = field(default_factory=dict)
    runtime_ms: Optional[float] = None
    suite: str = ""

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"statut inconnu : {self.status!r}")

    @property
    def cap_exhausted(self) -> bool:
        return self.status == "inconclusive" and "cap" in self.witness

    def to_json(self, timings: bool = True) -> Dict[str, Any]:
        data = {"name": self.name, "suite": self.suite, "anchor": self.anchor, "status": self.status,
                "witness": self.witness}
        if timings:
            data["runtime_ms"] = self.runtime_ms
        return data


@dataclass
class VerificationReport:
    command: str
    config: RunConfig
    records: List[CheckRecord] = field(default_factory=list)
    extra: Dict[str, Any] = field(default_factory=dict)
    version: str = VERSION

    def summary(self) -> Dict[str, int]:
        counts = {status: 0 for status in STATUSES}
        for record in self.records:
            counts[record.status] += 1
        return counts

    def exit_code(self) -> int:
        """1 dès qu'une vérification échoue, 3 si seul un plafond a empêché de conclure."""
        if any(r.status == "fail" for r in self.records):
            return EXIT_FAILED
        if any(r.cap_exhausted for r in self.records):
            return EXIT_RESOURCES
        return EXIT_OK

    def to_json(self) -> Dict[str, Any]:
        timings = self.config.timings
        extra = dict(self.extra)
        if not timings:
            extra = {key: _without_timings(value) for key, value in extra.items()}
        return {
            "version": self.version,
            "command": self.command,
            "config": asdict(self.config),
            "summary": self.summary(),
            "records": [r.to_json(timings) for r in self.records],
            "extra": extra,
        }

    def to_markdown(self) -> str:
        lines = [f"# mgk {self.version} : {self.command}", ""]
        summary = self.summary()
        lines.append(" ; ".join(f"{status} : {summary[status]}" for status in STATUSES))
        lines.append("")
        if self.records:
            table = pd.DataFrame([{
                "suite": r.suite, "vérification": r.name, "statut": r.status, "ancre": r.anchor,
                **({"ms": r.runtime_ms} if self.config.timings else {}),
            } for r in self.records])
            lines.append(dataframe_to_markdown(table))
            lines.append("")
        failed = [r for r in self.records if r.status != "pass"]
        if failed:
            lines.append("## Témoins")
            lines.append("")
            for r in failed:
                lines.append(f"- `{r.name}` ({r.status}) : {dumps(r.witness)}")
            lines.append("")
        for key, value in sorted(self.extra.items()):
            lines.append(f"## {key}")
            lines.append("")
            if isinstance(value, pd.DataFrame):
                if not self.config.timings:
                    value = value.drop(columns=["runtime_ms"], errors="ignore")
                lines.append(dataframe_to_markdown(value))
            elif hasattr(value, "to_markdown"):
                lines.append(value.to_markdown())
            else:
                lines.append("```json")
                lines.append(dumps(value))
                lines.append("```")
            lines.append("")
        return "\n".join(lines)

    def render(self, fmt: str) -> str:
        if fmt == "markdown":
            return self.to_markdown()
        return dumps(self.to_json()) + "\n"


def _without_timings(value: Any) -> Any:
    if isinstance(value, pd.DataFrame):
        return value.drop(columns=["runtime_ms"], errors="ignore")
    return value


def validate_report(data: Dict[str, Any]) -> List[str]:
    """Violations de docs/report.schema.json par un rapport JSON décodé."""
    return schema_errors(data, "report")


def write_report(report: VerificationReport, fmt: str, path: Optional[str]) -> str:
    """Rend le rapport et l'écrit dans path (ou le renvoie seulement si path est None)."""
    text = report.render(fmt)
    if fmt == "json":
        for error in validate_report(json.loads(text)):
            logger.error("Rapport non conforme au schéma : %s", error)
    if path:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(text)
        logger.info("Rapport écrit dans %s", path)
    return text
