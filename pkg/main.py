import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from typing import List, Optional

import pandas as pd

from config import FORMATS, RunConfig, load_config, setup_logging
from exceptions import ConfigError, MgkError, ResourceCapExceeded, StageFailure
from marked_cayley import agreement_radius
from pipeline import theorem1_assemble
from reports import EXIT_CONFIG, EXIT_FAILED, EXIT_RESOURCES, CheckRecord, VerificationReport, write_report
from spectral import expander_table
from suites import SUITES, named_group, resolve_suites, run_suite
from utils import stopwatch

logger = logging.getLogger(__name__)

CONSTRUCT_ANCHOR = ("Main theorem: Embedding theorem in the context of finitely generated dense subgroups "
                    "in a compact group")
AGREEMENT_ANCHOR = "The space of marked groups"
SPECTRAL_ANCHOR = "forms an expander family"


def run_verify(config: RunConfig) -> List[CheckRecord]:
    names = resolve_suites(config.suites)
    if config.jobs > 1 and len(names) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            batches = list(pool.map(run_suite, names, [config.caps] * len(names)))
    else:
        batches = [run_suite(name, config.caps) for name in names]
    return [record for batch in batches for record in batch]


def run_construct(config: RunConfig, report: VerificationReport) -> None:
    with stopwatch() as timer:
        try:
            result = theorem1_assemble(config.pipeline)
        except StageFailure as e:
            report.records.append(CheckRecord("construct.assemble", CONSTRUCT_ANCHOR, "fail",
                                              {"stage": e.stage, "reason": e.reason}, None, "construct"))
            return
    report.extra["theorem1"] = result

    def record(name: str, ok: Optional[bool], witness: dict) -> None:
        status = "inconclusive" if ok is None else ("pass" if ok else "fail")
        report.records.append(CheckRecord(f"construct.{name}", CONSTRUCT_ANCHOR, status, witness,
                                          round(timer["ms"], 1), "construct"))

    for stage, full, hall in zip(result.stages, result.full_wreath, result.hall_recovered):
        record(f"stage_{stage.m}.same_group", stage.same_group, {"order": stage.order_u})
        record(f"stage_{stage.m}.t_equals_u_power", stage.t_is_power_of_u, {"p_prime": stage.p_prime})
        record(f"stage_{stage.m}.full_wreath", full, {"order": stage.order_u, "p": stage.p})
        record(f"stage_{stage.m}.hall_recovered", hall, {})
    record("radii_nondecreasing", result.radii_nondecreasing, {})
    for label, verdict in (("density_wt", result.density_wt), ("density_wu", result.density_wu)):
        if verdict is not None:
            record(label, verdict.dense, verdict.to_json())
    if result.failure:
        record("completed", None, {"cap": True, **result.failure})


def run_agreement(config: RunConfig, report: VerificationReport) -> None:
    if not config.agreement:
        raise ConfigError("agreement : aucune paire de groupes")
    rows = []
    for pair in config.agreement:
        left, right = named_group(pair.left), named_group(pair.right)
        with stopwatch() as timer:
            radius = agreement_radius(left, right, pair.rmax, config.caps.ball, on_cap="bound")
        witness = radius.to_json()
        status = "inconclusive" if radius.bounded_by == "cap" else "pass"
        if status == "inconclusive":
            witness["cap"] = config.caps.ball
        report.records.append(CheckRecord(f"agreement.{pair.left}~{pair.right}", AGREEMENT_ANCHOR, status,
                                          witness, round(timer["ms"], 1), "agreement"))
        rows.append({"left": pair.left, "right": pair.right, "rmax": pair.rmax, "radius": str(radius),
                     "runtime_ms": round(timer["ms"], 1)})
    report.extra["agreement"] = pd.DataFrame(rows)


def run_spectral(config: RunConfig, report: VerificationReport) -> None:
    table = expander_table(config.spectral.rows, config.spectral.prefixes, config.caps)
    report.extra["spectral"] = table
    for row in table.to_dict(orient="records"):
        name = f"spectral.{row['kind']}[{row['l_prime']};{row['p']}]"
        if row.get("status") == "cap":
            status, witness = "inconclusive", {"cap": config.caps.closure}
        elif row.get("status") in ("ok", "residual"):
            witness = {"gap": row["gap"], "lambda2": row["lambda2"], "residual": row["residual"]}
            if row["status"] == "residual":
                status = "inconclusive"
            else:
                status = "pass" if row["gap"] > 0 else "fail"
        else:
            status, witness = "fail", {"reason": row.get("status")}
        report.records.append(CheckRecord(name, SPECTRAL_ANCHOR, status, witness, row.get("runtime_ms"), "spectral"))


def run(config: RunConfig) -> VerificationReport:
    """Exécute la commande de la configuration et renvoie le rapport."""
    report = VerificationReport(config.command, config)
    if config.command == "verify":
        report.records.extend(run_verify(config))
    elif config.command == "construct":
        run_construct(config, report)
    elif config.command == "agreement":
        run_agreement(config, report)
    else:
        run_spectral(config, report)
    logger.info("Bilan : %s", report.summary())
    return report


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(prog="mgk", description="Vérifications sur les groupes marqués")
    parser.add_argument("--config", help="fichier JSON de configuration")
    parser.add_argument("--out", help="fichier de sortie du rapport (sinon sortie standard)")
    parser.add_argument("--format", choices=FORMATS, help="format du rapport")
    parser.add_argument("--jobs", type=int, help="nombre de processus pour les suites")
    parser.add_argument("--list", action="store_true", help="liste les suites et leurs énoncés")
    parser.add_argument("--no-timings", action="store_true", help="omet les durées (rapport reproductible)")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true")
    verbosity.add_argument("-q", "--quiet", action="store_true")
    return parser.parse_args(argv)


def main(argv: Optional[List[str]] = None) -> int:
    args = parse_args(argv)
    setup_logging(logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO)

    if args.list:
        for name in sorted(SUITES):
            print(f"{name}\t{SUITES[name].description}\t{SUITES[name].anchor}")
        return 0
    if not args.config:
        logger.error("--config est requis")
        return EXIT_CONFIG

    try:
        config = load_config(args.config)
        overrides = {}
        if args.out:
            overrides["output"] = args.out
        if args.format:
            overrides["format"] = args.format
        if args.jobs is not None:
            if args.jobs < 1:
                raise ConfigError("--jobs doit être ≥ 1")
            overrides["jobs"] = args.jobs
        if args.no_timings:
            overrides["timings"] = False
        config = replace(config, **overrides)
        report = run(config)
    except ConfigError as e:
        logger.error("Configuration invalide : %s", e)
        return EXIT_CONFIG
    except ResourceCapExceeded as e:
        logger.error("Plafond de ressources atteint : %s", e)
        return EXIT_RESOURCES
    except MgkError as e:
        logger.error("Échec : %s", e)
        return EXIT_FAILED

    text = write_report(report, config.format, config.output)
    if not config.output:
        sys.stdout.write(text)
    return report.exit_code()


if __name__ == "__main__":
    sys.exit(main())
