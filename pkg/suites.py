"""
Suites de vérification exécutables par `mgk verify`.
Chaque suite regroupe des vérifications nommées rattachées à l'énoncé qu'elles contrôlent.
"""
import logging
import math
import random
import re
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Tuple

from amalgam import SIDE_A, SIDE_B, Amalgam
from config import Caps
from core_groups import (
    GroupElement, MarkedGroup, abelian_element, abelian_group, alternating_group, commutator, cyclic_group,
    dihedral, element_order, product_element, symmetric_group,
)
from diagonal_density import (
    FinitePresentation, density_check, diagonal_product, fp_recovery_check, goursat_full_check,
    prefix_quotient_consistency, short_exact_sequence_check,
)
from exceptions import ConfigError, MgkError, PreconditionError, ResourceCapExceeded
from group_encodings import alt_encode, ore_commutator, sl_encode, sym_encode, verify_certificate
from marked_cayley import agreement_radius, ball, balls_isomorphic
from pipeline import PrimeSchedule, key_proposition, step1_involution_lift
from reports import CheckRecord
from spectral import cayley_graph, elementary_block_marking, interlacing_holds, spectral_gap
from utils import stopwatch
from wreath import (
    absorption_limit, absorption_markings, hall_commutator_table, hall_conjugates, hall_elements, hall_wreath_marking,
    support, wreath_order,
)

logger = logging.getLogger(__name__)

SEED = 20240531
PIPELINE_STAGES = ((5, 7), (6, 11), (7, 13))
GOURSAT_SAMPLES = 200
GOURSAT_MAX_RESAMPLES = 10 * GOURSAT_SAMPLES
CONVERGENCE_SAMPLES = 100

Outcome = Tuple[bool, Dict[str, Any]]
Check = Tuple[str, Callable[[], Outcome]]


@dataclass(frozen=True)
class Suite:
    """anchor : intitulé exact de l'énoncé vérifié ; description : résumé affiché par --list."""
    name: str
    anchor: str
    description: str
    checks: Callable[[Caps], List[Check]]


# --- groupes nommés ---

_NAMED = [
    (re.compile(r"^Z/(\d+)$"), lambda m: cyclic_group(int(m.group(1)))),
    (re.compile(r"^Z$"), lambda m: cyclic_group(0)),
    (re.compile(r"^Z\^(\d+)$"), lambda m: abelian_group((0,) * int(m.group(1)))),
    (re.compile(r"^D_(inf|∞)$"), lambda m: dihedral("inf")),
    (re.compile(r"^D_(\d+)$"), lambda m: dihedral(int(m.group(1)))),
    (re.compile(r"^Sym\((\d+)\)$"), lambda m: symmetric_group(int(m.group(1)))),
    (re.compile(r"^Alt\((\d+)\)$"), lambda m: alternating_group(int(m.group(1)))),
]


def named_group(name: str) -> MarkedGroup:
    """Groupe marqué standard désigné par son nom : Z/n, Z, Z^d, D_n, D_inf, Sym(n), Alt(n)."""
    text = name.replace(" ", "")
    for pattern, build in _NAMED:
        match = pattern.match(text)
        if match:
            try:
                return build(match)
            except PreconditionError as e:
                raise ConfigError(f"groupe {name!r} : {e}") from e
    raise ConfigError(f"groupe inconnu : {name!r}")


# --- goursat ---

def _goursat_checks(caps: Caps) -> List[Check]:
    alt5, z7 = alternating_group(5), cyclic_group(7)
    rng = random.Random(SEED)
    left = sorted(alt5.elements().elements, key=lambda g: g.sort_key())
    right = sorted(z7.elements().elements, key=lambda g: g.sort_key())

    def random_pairs() -> Outcome:
        # paires retirées jusqu'à obtenir GOURSAT_SAMPLES paires à projections surjectives
        surjective, resampled = 0, 0
        while surjective < GOURSAT_SAMPLES:
            if resampled > GOURSAT_MAX_RESAMPLES:
                return False, {"surjective": surjective, "resampled": resampled}
            gens = [product_element([rng.choice(left), rng.choice(right)]) for _ in range(2)]
            verdict = goursat_full_check(alt5, z7, gens, caps.closure)
            if not verdict.surjective:
                resampled += 1
                continue
            if verdict.status != "full" or verdict.order != 420:
                return False, {"sample": surjective, "generators": [g.describe() for g in gens],
                               "verdict": verdict.to_json()}
            surjective += 1
        return True, {"surjective": surjective, "resampled": resampled, "order": 420}

    def diagonal_alt5() -> Outcome:
        gens = [product_element([s, s]) for s in alt5.marking]
        verdict = goursat_full_check(alt5, alt5, gens, caps.closure)
        return verdict.status == "hypothesis-violated" and verdict.order == 60, verdict.to_json()

    def coprime_cyclic() -> Outcome:
        z2, z3 = cyclic_group(2), cyclic_group(3)
        verdict = goursat_full_check(z2, z3, [product_element([z2.marking[0], z3.marking[0]])], caps.closure)
        return verdict.status == "full" and verdict.order == 6, verdict.to_json()

    return [("alt5_z7_random_pairs", random_pairs), ("alt5_diagonal", diagonal_alt5),
            ("z2_z3_diagonal", coprime_cyclic)]


# --- ore ---

def _ore_checks(caps: Caps) -> List[Check]:
    def exhaustive(n: int) -> Callable[[], Outcome]:
        def run() -> Outcome:
            elements = sorted(alternating_group(n).elements(caps.closure).elements, key=lambda g: g.sort_key())
            for target in elements:
                witness = ore_commutator(target)
                if not witness.found or commutator(witness.eta, witness.zeta) != target:
                    return False, {"target": target.describe()}
            return True, {"elements": len(elements)}
        return run

    def constrained() -> Outcome:
        target = alternating_group(5).marking[1]
        witness = ore_commutator(target, (2, 3))
        if not witness.found:
            return False, {"target": target.describe()}
        orders = sorted({element_order(witness.eta).value, element_order(witness.zeta).value})
        ok = commutator(witness.eta, witness.zeta) == target and set(orders) <= {2, 3}
        return ok, {"eta": witness.eta.describe(), "zeta": witness.zeta.describe(), "orders": orders}

    return [("alt5_every_element", exhaustive(5)), ("alt6_every_element", exhaustive(6)),
            ("alt5_orders_2_3", constrained)]


# --- hall ---

def _hall_checks(caps: Caps) -> List[Check]:
    sym3 = symmetric_group(3)
    placement = (2, 4)

    def commutators() -> Outcome:
        table = hall_commutator_table(sym3, placement)
        mismatches = table.loc[~table["match"], ["i", "j"]].values.tolist()
        return not mismatches, {"rows": len(table), "mismatches": mismatches}

    def conjugate_supports() -> Outcome:
        w, u = hall_elements(sym3, placement)
        found = []
        for i, wi in enumerate(hall_conjugates(w, u, placement)):
            positions = sorted(x.payload[1][0] for x in support(wi))
            found.append(positions)
            expected = {tuple(sorted(a - placement[i] for a in placement)),
                        tuple(sorted(placement[i] - a for a in placement))}
            if tuple(positions) not in expected:
                return False, {"index": i + 1, "support": positions}
        return True, {"supports": found}

    return [("sym3_commutators", commutators), ("sym3_conjugate_supports", conjugate_supports)]


# --- absorption ---

def _absorption_checks(caps: Caps) -> List[Check]:
    def radii() -> Outcome:
        sym3 = symmetric_group(3)
        limit = absorption_limit(sym3)
        values = []
        for m in range(1, 5):
            radius = agreement_radius(absorption_markings(sym3, m), limit, 5, caps.ball, on_cap="bound")
            values.append(radius.to_json())
        plain = [v["value"] for v in values]
        ok = all(a <= b for a, b in zip(plain, plain[1:])) and plain[2] >= 2
        return ok, {"radii": values}

    return [("sym3_absorption_radii", radii)]


# --- encodages ---

def _encoding_checks(caps: Caps) -> List[Check]:
    def sym_z3() -> Outcome:
        encoded = sym_encode(cyclic_group(3), caps.closure)
        order = encoded.order(caps.closure).value
        return order == 6, {"order": order}

    def alt_d4() -> Outcome:
        encoded = alt_encode(dihedral(4), caps.closure)
        order = encoded.order(caps.closure).value
        return order == math.factorial(8) // 2 and encoded.rank == 5, {"order": order, "rank": encoded.rank}

    def odd_theta_rejected() -> Outcome:
        try:
            alt_encode(cyclic_group(2), caps.closure)
        except PreconditionError as e:
            return True, {"error": str(e), **e.witness}
        return False, {"error": None}

    return [("sym_z3", sym_z3), ("alt_d4", alt_d4), ("alt_odd_theta_rejected", odd_theta_rejected)]


# --- SL ---

def _sl_checks(caps: Caps) -> List[Check]:
    def sl_z3() -> Outcome:
        encoding = sl_encode(cyclic_group(3), 2, caps.closure)
        order = encoding.group.order(caps.closure).value
        certified = verify_certificate(encoding.group.marking, encoding.certificate)
        return order == 168 and certified, {"order": order, "certified": certified}

    def block(l_prime: int, p: int, expected: int) -> Callable[[], Outcome]:
        def run() -> Outcome:
            marking = elementary_block_marking(l_prime, p)
            order = marking.group.order(caps.closure).value
            certified = verify_certificate(marking.group.marking, marking.certificate)
            return order == expected and certified, {"order": order, "certified": certified,
                                                     "entries": len(marking.certificate.entries)}
        return run

    return [("sl_z3_f2", sl_z3), ("block_1_2", block(1, 2, 20160)), ("block_1_3", block(1, 3, 12130560))]


# --- amalgames ---

def _amalgam_checks(caps: Caps) -> List[Check]:
    def embedding_oracle() -> Outcome:
        d2, z4, z2 = dihedral(2), cyclic_group(4), cyclic_group(2)
        c, d = d2.marking
        product = Amalgam(d2, z4, z2, [c * d], [z4.marking[0] * z4.marking[0]], caps.closure)
        marked = product.marked_group([(SIDE_A, c), (SIDE_A, d), (SIDE_B, z4.marking[0])], "D_2 *_{Z/2} Z/4")
        sigma0, sigma1 = dihedral("inf").marking
        oracle = MarkedGroup("Z/4 × D_inf", (
            product_element([abelian_element((4,), (0,)), sigma0]),
            product_element([abelian_element((4,), (2,)), sigma0]),
            product_element([abelian_element((4,), (1,)), sigma1]),
        ), product_element([abelian_element((4,), (0,)), dihedral("inf").identity]), finite=False)
        radius = agreement_radius(marked, oracle, 4, caps.ball)
        return radius.value == 4 and radius.at_least, radius.to_json()

    def lift_cyclic() -> Outcome:
        lift = step1_involution_lift([cyclic_group(4)], cap=caps.closure, ball_cap=caps.ball)
        lifted = lift.stages[0]
        orders = [element_order(s).value for s in lifted.marking]
        order = lifted.order(caps.closure).value
        return orders == [2, 2] and order == 8, {"orders": orders, "group_order": order,
                                                 "positions": list(lift.positions)}

    def dihedral_untouched() -> Outcome:
        lift = step1_involution_lift([dihedral(8)], ball_cap=caps.ball)
        return lift.iterations == 0, {"positions": list(lift.positions)}

    return [("d2_z4_embeds_in_z4_x_dinf", embedding_oracle), ("lift_z4", lift_cyclic),
            ("lift_d8_noop", dihedral_untouched)]


# --- densité ---

def _density_checks(caps: Caps) -> List[Check]:
    def coprime() -> Outcome:
        verdict = density_check([cyclic_group(4), cyclic_group(9)], caps.bsgs_points, caps.closure)
        return verdict.dense and verdict.achieved_order == 36, verdict.to_json()

    def not_dense() -> Outcome:
        verdict = density_check([cyclic_group(2), cyclic_group(4)], caps.bsgs_points, caps.closure)
        return not verdict.dense and verdict.achieved_order == 4, verdict.to_json()

    def alt_and_cyclic() -> Outcome:
        verdict = density_check([alternating_group(5), alternating_group(6), cyclic_group(7)],
                                caps.bsgs_points, caps.closure)
        return verdict.dense and bool(verdict.shortcut_dense), verdict.to_json()

    def pipeline_stages() -> Outcome:
        # (Alt(l) ≀ Z/p ; w, u) pour (l, p) = (5, 7), (6, 11), (7, 13)
        stages = [hall_wreath_marking(alternating_group(l), (1, 2), cyclic_group(p)) for l, p in PIPELINE_STAGES]
        verdict = density_check(stages, caps.bsgs_points, caps.closure)
        expected = math.prod(wreath_order(math.factorial(l) // 2, p) for l, p in PIPELINE_STAGES)
        return verdict.dense and verdict.achieved_order == expected, verdict.to_json()

    def prefixes() -> Outcome:
        result = prefix_quotient_consistency([cyclic_group(2), cyclic_group(4), cyclic_group(8)],
                                             cap=caps.closure)
        return result.holds, result.to_json()

    def exact_sequence() -> Outcome:
        result = short_exact_sequence_check([cyclic_group(6), cyclic_group(4)], cyclic_group(2), caps.closure)
        return result.holds and result.kernel_order == 6, result.to_json()

    return [("z4_z9_dense", coprime), ("z2_z4_not_dense", not_dense), ("alt5_alt6_z7_dense", alt_and_cyclic),
            ("pipeline_three_stages_dense", pipeline_stages), ("prefix_quotients", prefixes),
            ("short_exact_sequence", exact_sequence)]


# --- présentations finies ---

def _fp_checks(caps: Caps) -> List[Check]:
    z8 = FinitePresentation(1, ((1,) * 8,), cyclic_group(8))

    def cyclic_tail() -> Outcome:
        chain = [cyclic_group(2), cyclic_group(4), cyclic_group(8), cyclic_group(8)]
        result = fp_recovery_check(z8, chain, cap=caps.closure)
        return result.holds and result.deleted == 2, result.to_json()

    def wrong_tail() -> Outcome:
        result = fp_recovery_check(z8, [cyclic_group(16), cyclic_group(16)], cap=caps.closure)
        return result.status == "refuted", result.to_json()

    def sym3_constant() -> Outcome:
        presentation = FinitePresentation(2, ((1, 1), (2, 2, 2), (1, 2, 1, 2)), symmetric_group(3))
        result = fp_recovery_check(presentation, [symmetric_group(3)] * 3, cap=caps.closure)
        return result.holds and result.deleted == 0, result.to_json()

    return [("z8_after_two", cyclic_tail), ("z16_refuted", wrong_tail), ("sym3_constant", sym3_constant)]


# --- topologie de Cayley ---

def _convergence_checks(caps: Caps) -> List[Check]:
    def pair(left: MarkedGroup, right: MarkedGroup, rmax: int, expected: int) -> Callable[[], Outcome]:
        def run() -> Outcome:
            radius = agreement_radius(left, right, rmax, caps.ball)
            return radius.value == expected and not radius.at_least, radius.to_json()
        return run

    def downward_closed() -> Outcome:
        rng = random.Random(SEED)
        pool = [cyclic_group(n) for n in range(2, 13)] + [cyclic_group(0)]
        for sample in range(CONVERGENCE_SAMPLES):
            left, right = rng.choice(pool), rng.choice(pool)
            radius = agreement_radius(left, right, 8, caps.ball)
            below = [bool(balls_isomorphic(ball(left, r), ball(right, r))) for r in range(radius.value + 1)]
            above = radius.at_least or not balls_isomorphic(ball(left, radius.value + 1),
                                                            ball(right, radius.value + 1))
            if not all(below) or not above:
                return False, {"sample": sample, "left": left.name, "right": right.name, "radius": radius.to_json()}
        return True, {"samples": CONVERGENCE_SAMPLES}

    return [("z6_vs_z", pair(cyclic_group(6), cyclic_group(0), 10, 2)),
            ("d6_vs_dinf", pair(dihedral(6), dihedral("inf"), 10, 5)),
            ("d12_vs_dinf", pair(dihedral(12), dihedral("inf"), 20, 11)),
            ("downward_closed", downward_closed)]


# --- spectral ---

def _spectral_checks(caps: Caps) -> List[Check]:
    def cycles() -> Outcome:
        errors = {}
        for n in range(4, 65):
            report = spectral_gap(cayley_graph(cyclic_group(n), caps.closure), caps.eigen_dense)
            errors[n] = abs(report.lambda2 - math.cos(2 * math.pi / n))
        worst = max(errors, key=errors.get)
        return errors[worst] < 1e-9, {"n": [4, 64], "worst_n": worst, "max_error": errors[worst]}

    def sl4_f2() -> Outcome:
        report = spectral_gap(cayley_graph(elementary_block_marking(1, 2).group, caps.closure), caps.eigen_dense)
        return report.gap > 0 and report.residual < 1e-9, report.to_json()

    def interlacing() -> Outcome:
        source = diagonal_product([cyclic_group(4), cyclic_group(6)])
        big = spectral_gap(cayley_graph(source, caps.closure), caps.eigen_dense)
        small = spectral_gap(cayley_graph(cyclic_group(4), caps.closure), caps.eigen_dense)
        return interlacing_holds(big, small), {"source": big.lambda2, "quotient": small.lambda2}

    return [("cycle_eigenvalues", cycles), ("sl4_f2_gap", sl4_f2), ("diagonal_interlacing", interlacing)]


# --- proposition clé ---

def _key_proposition_checks(caps: Caps) -> List[Check]:
    def sym3_stage() -> Outcome:
        schedule = PrimeSchedule((2, 4), ((5, 31),))
        stage = key_proposition([symmetric_group(3)], schedule, rmax=2, ball_cap=caps.ball)[0]
        ok = (stage.same_group and stage.t_is_power_of_u and stage.commutators_exact
              and stage.limit_order == 6 and stage.radius_t.value == 2 and stage.radius_t.at_least)
        return ok, stage.to_json()

    def rejects_short_exponent() -> Outcome:
        try:
            key_proposition([symmetric_group(3)], PrimeSchedule((2, 4), ((2, 31),)), ball_cap=caps.ball)
        except PreconditionError as e:
            return True, {"error": str(e)}
        return False, {"error": None}

    return [("sym3_wreath_z31", sym3_stage), ("exponent_below_span_rejected", rejects_short_exponent)]


SUITES: Dict[str, Suite] = {suite.name: suite for suite in [
    Suite("absorption", "Prototype of the absorption trick",
          "Absorption : (G ≀ Z ; S_m) converge vers (C_1 × … × C_k) ≀ Z", _absorption_checks),
    Suite("amalgam", "Embedding into a LEF group generated by involutions",
          "Amalgame D_n *_{Z/n} G engendré par des involutions", _amalgam_checks),
    Suite("convergence", "The space of marked groups",
          "Topologie de Cayley : rayons de coïncidence des boules", _convergence_checks),
    Suite("density", "Diagonal products and LFNF-lifts",
          "Produits diagonaux denses dans Π L_m", _density_checks),
    Suite("encodings", "Encoding into symmetric groups; Encoding into alternating groups",
          "Encodages Sym(G) et Alt(G) par (χ, θ)", _encoding_checks),
    Suite("fp_recovery", "after deleting finitely many",
          "Présentation finie retrouvée par Δ d'une queue d'approximants", _fp_checks),
    Suite("goursat", "Sufficient condition for density",
          "Goursat : sous-produit sous-direct sans quotient simple commun", _goursat_checks),
    Suite("hall", "Adaptation of the Hall embedding",
          "Plongement de Hall : commutateurs des conjugués [w_i, w_j]", _hall_checks),
    Suite("key_proposition", "Key proposition: combination of the absorption trick and a Hall-type argument",
          "Proposition clé : ⟨w, t⟩ = ⟨w, u⟩, limites C ≀ Z et Γ₂", _key_proposition_checks),
    Suite("ore", "may be written as a single commutator",
          "Ore : tout élément de Alt(n), n ≥ 5, est un commutateur", _ore_checks),
    Suite("sl", "Encoding into special linear groups",
          "Encodage dans SL(G, F_p) et générateurs élémentaires par blocs", _sl_checks),
    Suite("spectral", "forms an expander family",
          "Trou spectral des graphes de Cayley finis", _spectral_checks),
]}


def resolve_suites(names) -> List[str]:
    """Noms demandés (tous si vide), triés ; ConfigError pour un nom inconnu."""
    if not names:
        return sorted(SUITES)
    unknown = sorted(set(names) - set(SUITES))
    if unknown:
        raise ConfigError(f"suites inconnues : {unknown}")
    return sorted(set(names))


def run_check(suite: Suite, name: str, check: Callable[[], Outcome]) -> CheckRecord:
    with stopwatch() as timer:
        try:
            ok, witness = check()
            status = "pass" if ok else "fail"
        except ResourceCapExceeded as e:
            status, witness = "inconclusive", {"cap": e.cap, "reached": e.reached, "reason": str(e)}
        except MgkError as e:
            status, witness = "fail", {"error": type(e).__name__, "reason": str(e)}
    if status != "pass":
        logger.warning("%s.%s : %s", suite.name, name, status)
    return CheckRecord(f"{suite.name}.{name}", suite.anchor, status, witness, round(timer["ms"], 1), suite.name)


def run_suite(name: str, caps: Caps) -> List[CheckRecord]:
    suite = SUITES[name]
    logger.info("Suite %s", name)
    try:
        checks = suite.checks(caps)
    except MgkError as e:
        return [CheckRecord(f"{name}.setup", suite.anchor, "fail", {"reason": str(e)}, None, name)]
    return [run_check(suite, check_name, check) for check_name, check in checks]
