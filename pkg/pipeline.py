"""
Chaîne de construction des groupes Λ1, Λ2 sur des préfixes finis :
relèvement en involutions, encodage alterné, commutateurs d'Ore, proposition clé
(absorption et argument de Hall), produits diagonaux et densité.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

import pandas as pd
from sympy import isprime, nextprime

from amalgam import SIDE_A, SIDE_B, Amalgam
from config import PipelineConfig
from core_groups import (
    GroupElement, MarkedGroup, cyclic_group, dihedral, element_order, power,
)
from diagonal_density import DensityVerdict, density_check
from exceptions import MgkError, PreconditionError, ResourceCapExceeded, StageFailure
from group_encodings import OreWitness, alt_encode, ore_commutator
from marked_cayley import AgreementRadius, agreement_radius
from utils import dataframe_to_markdown, dumps, is_sidon, mian_chowla, powers_of_two, sidon_collision
from wreath import (
    combined_order, cyclic_wreath_limit, gamma_limits, hall_commutator_table, hall_wreath_marking,
    marked_in_wreath, shift, wreath_element, wreath_order,
)

logger = logging.getLogger(__name__)

MIN_PRIME = 5


# --- échéancier des premiers ---

@dataclass(frozen=True)
class PrimeSchedule:
    """
    Placement de Sidon et paires (p', p) par étape : span(sidon) < p' < p, p premier,
    pgcd(p, p') = 1, premiers strictement croissants, placement de Sidon modulo p.
    """
    sidon: Tuple[int, ...]
    pairs: Tuple[Tuple[int, int], ...]

    @property
    def span(self) -> int:
        return max(self.sidon) - min(self.sidon) if self.sidon else 0

    @property
    def primes(self) -> List[int]:
        return [p for _, p in self.pairs]

    @property
    def exponents(self) -> List[int]:
        return [q for q, _ in self.pairs]

    def validate(self, k: int) -> None:
        if len(self.sidon) != k:
            raise PreconditionError("placement et marquage de longueurs différentes",
                                    {"placement": len(self.sidon), "rank": k})
        if not is_sidon(self.sidon):
            raise PreconditionError("le placement n'est pas un ensemble de Sidon",
                                    {"collision": sidon_collision(self.sidon)})
        previous = 0
        for m, (q, p) in enumerate(self.pairs):
            if not isprime(p) or p <= previous:
                raise PreconditionError(f"étape {m} : p = {p} doit être premier et strictement croissant",
                                        {"stage": m, "p": p})
            if not self.span < q < p or math.gcd(p, q) != 1:
                raise PreconditionError(f"étape {m} : il faut span < p' < p et pgcd(p, p') = 1",
                                        {"stage": m, "span": self.span, "p_prime": q, "p": p})
            if not is_sidon(self.sidon, p):
                raise PreconditionError(f"étape {m} : placement non Sidon modulo {p}",
                                        {"stage": m, "collision": sidon_collision(self.sidon, p)})
            previous = p

    def admits_t_equals_u_cubed(self) -> bool:
        """p' = 3 est-il admissible à chaque étape ?"""
        return self.span < 3 and all(p > 3 for p in self.primes)

    def to_json(self) -> Dict[str, Any]:
        return {"sidon": list(self.sidon), "pairs": [list(pair) for pair in self.pairs]}


def build_schedule(k: int, n: int, sidon: Optional[Sequence[int]] = None, literal: bool = False) -> PrimeSchedule:
    """
    Échéancier déterministe : Mian–Chowla par défaut, 2^1..2^k si literal ;
    p le plus petit premier convenable au-dessus du précédent, p' = span + 1.
    """
    placement = tuple(sidon) if sidon is not None else tuple(powers_of_two(k) if literal else mian_chowla(k))
    span = max(placement) - min(placement) if placement else 0
    pairs = []
    previous = MIN_PRIME - 1
    for _ in range(n):
        p = nextprime(max(previous, span + 1))
        while not is_sidon(placement, p):
            p = nextprime(p)
        pairs.append((span + 1, int(p)))
        previous = p
    schedule = PrimeSchedule(placement, tuple(pairs))
    schedule.validate(k)
    logger.info("Échéancier : placement %s, paires %s", list(placement), pairs)
    return schedule


def schedule_from_config(config: PipelineConfig, k: int) -> PrimeSchedule:
    if config.primes is None:
        return build_schedule(k, config.prefix_n, config.sidon, config.literal_schedule)
    placement = config.sidon or tuple(powers_of_two(k) if config.literal_schedule else mian_chowla(k))
    schedule = PrimeSchedule(tuple(placement), tuple(config.primes))
    if len(schedule.pairs) < config.prefix_n:
        raise PreconditionError("moins de paires (p', p) que d'étapes",
                                {"pairs": len(schedule.pairs), "prefix_n": config.prefix_n})
    schedule.validate(k)
    return schedule


# --- étape 1 : relèvement en involutions ---

@dataclass(frozen=True)
class InvolutionLift:
    stages: Tuple[MarkedGroup, ...]
    positions: Tuple[int, ...]
    radii: Tuple[AgreementRadius, ...] = ()
    against: str = "none"

    @property
    def iterations(self) -> int:
        return len(self.positions)


def _generator_order(mg: MarkedGroup, j: int) -> int:
    order = element_order(mg.marking[j]).value
    if order is None:
        raise StageFailure(j, f"générateur {j + 1} de {mg.name} d'ordre infini dans une étape finie")
    return order


def _lift_generator(mg: MarkedGroup, j: int, order: int, cap: int) -> MarkedGroup:
    """D_n *_{Z/n} G avec 1 ↦ cd et 1 ↦ s_j ; s_j est remplacé par (c, d)."""
    if order < 2:
        raise PreconditionError(f"générateur {j + 1} de {mg.name} trivial", {"index": j + 1})
    dn = dihedral(order)
    c, d = dn.marking
    product = Amalgam(dn, mg, cyclic_group(order), [c * d], [mg.marking[j]], cap)
    marking = ([(SIDE_B, s) for s in mg.marking[:j]] + [(SIDE_A, c), (SIDE_A, d)]
               + [(SIDE_B, s) for s in mg.marking[j + 1:]])
    return product.marked_group(marking, name=f"{dn.name} *_Z/{order} {mg.name}")


def _lift(mg: MarkedGroup, positions: Sequence[int], cap: int) -> MarkedGroup:
    # de la dernière position à la première : les indices antérieurs restent valides
    for j in sorted(positions, reverse=True):
        mg = _lift_generator(mg, j, _generator_order(mg, j), cap)
    return mg


def step1_involution_lift(stages: Sequence[MarkedGroup], limit: Optional[MarkedGroup] = None,
                          rmax: int = 3, cap: int = 200_000, ball_cap: int = 2_000_000) -> InvolutionLift:
    """
    Relève chaque générateur qui n'est pas une involution en une paire d'involutions (c, d).
    Rayons de coïncidence : contre la limite relevée si elle est finie, sinon entre étapes consécutives.
    """
    if not stages:
        raise PreconditionError("aucune étape")
    rank = stages[0].rank
    groups = list(stages) + ([limit] if limit is not None and limit.finite else [])
    positions = sorted({j for mg in groups for j in range(rank) if _generator_order(mg, j) > 2})
    if not positions:
        logger.info("Marquage déjà engendré par des involutions")
        return InvolutionLift(tuple(stages), ())
    logger.info("Relèvement des positions %s sur %d étapes", [j + 1 for j in positions], len(stages))
    lifted = [_lift(mg, positions, cap) for mg in stages]
    if limit is not None and limit.finite:
        target = _lift(limit, positions, cap)
        radii = [agreement_radius(mg, target, rmax, ball_cap, on_cap="bound") for mg in lifted]
        against = "limit"
    else:
        radii = [agreement_radius(a, b, rmax, ball_cap, on_cap="bound") for a, b in zip(lifted, lifted[1:])]
        against = "consecutive"
    return InvolutionLift(tuple(lifted), tuple(positions), tuple(radii), against)


# --- proposition clé ---

@dataclass(frozen=True)
class KeyPropositionStage:
    """
    Étape m : L = ⟨w, u⟩ ≤ G_m ≀ Z/p_m, t = u^{p'_m}.
    with_t et with_u sont les marquages (L; w, t) et (L; w, u).
    """
    m: int
    p: int
    p_prime: int
    with_t: MarkedGroup
    with_u: MarkedGroup
    w: GroupElement
    t: GroupElement
    u: GroupElement
    order_t: int
    order_u: int
    radius_t: Optional[AgreementRadius]
    radius_u: Optional[AgreementRadius]
    limit_order: Optional[int]
    commutators: pd.DataFrame = field(compare=False, repr=False)

    @property
    def same_group(self) -> bool:
        return self.order_t == self.order_u

    @property
    def t_is_power_of_u(self) -> bool:
        return self.t == power(self.u, self.p_prime)

    @property
    def commutators_exact(self) -> bool:
        return bool(self.commutators["match"].all())

    def to_json(self) -> Dict[str, Any]:
        return {
            "m": self.m,
            "p": self.p,
            "p_prime": self.p_prime,
            "order_wt": self.order_t,
            "order_wu": self.order_u,
            "same_group": self.same_group,
            "t_equals_u_power": self.t_is_power_of_u,
            "limit_cyclic_order": self.limit_order,
            "radius_wt": self.radius_t,
            "radius_wu": self.radius_u,
            "commutators_exact": self.commutators_exact,
        }


def _marked_order(mg: MarkedGroup, stage: int) -> int:
    order = mg.order().value
    if order is None:
        raise StageFailure(stage, f"ordre de {mg.name} inaccessible")
    return order


def key_proposition(stages: Sequence[MarkedGroup], schedule: PrimeSchedule, limit: Optional[MarkedGroup] = None,
                    rmax: int = 2, ball_cap: int = 2_000_000) -> List[KeyPropositionStage]:
    """
    Pour chaque étape : w = (f, 0) avec f(a_j) = s_j, u = (𝐞, 1), t = u^{p'}.
    Certifie ⟨w, t⟩ = ⟨w, u⟩, compare (L; w, t) à C ≀ Z et (L; w, u) à Γ₂, et dresse la table de Hall.
    C et Γ₂ se lisent sur la limite (G_∞; s^∞) ; sans limite, chaque étape sert de référence à elle-même.
    """
    if not stages:
        return []
    schedule.validate(stages[0].rank)
    if limit is not None and limit.rank != stages[0].rank:
        raise PreconditionError("limite et étapes de rangs différents",
                                {"limit": limit.rank, "stages": stages[0].rank})
    if len(schedule.pairs) < len(stages):
        raise PreconditionError("échéancier plus court que la suite d'étapes",
                                {"pairs": len(schedule.pairs), "stages": len(stages)})
    results = []
    for m, mg in enumerate(stages):
        q, p = schedule.pairs[m]
        top = cyclic_group(p)
        with_u = hall_wreath_marking(mg, schedule.sidon, top)
        w, u = with_u.marking
        t = power(u, q)
        with_t = replace(with_u, marking=(w, t), name=f"({mg.name} ≀ Z/{p}; w, t)")
        with_u = replace(with_u, name=f"({mg.name} ≀ Z/{p}; w, u)")
        order_u = _marked_order(with_u, m)
        order_t = _marked_order(with_t, m)
        if order_t != order_u:
            raise StageFailure(m, f"⟨w, t⟩ et ⟨w, u⟩ d'ordres différents ({order_t} ≠ {order_u})")

        radius_t = None
        reference = limit if limit is not None else mg
        limit_order = combined_order(reference)
        if limit_order:
            radius_t = agreement_radius(with_t, cyclic_wreath_limit(limit_order), rmax, ball_cap, on_cap="bound")
        else:
            logger.warning("Étape %d : ⊕ s_j δ_j d'ordre infini, comparaison à C ≀ Z omise", m)
        _, gamma2 = gamma_limits(reference, schedule.sidon)
        radius_u = agreement_radius(with_u, gamma2, rmax, ball_cap, on_cap="bound")
        table = hall_commutator_table(mg, schedule.sidon, top)
        logger.info("Étape %d (p = %d, p' = %d) : |L| = %d, rayons %s / %s", m, p, q, order_u, radius_t, radius_u)
        results.append(KeyPropositionStage(m, p, q, with_t, with_u, w, t, u, order_t, order_u,
                                           radius_t, radius_u, limit_order or None, table))
    return results


# --- assemblage du théorème ---

def base_chain(prefix_n: int) -> List[MarkedGroup]:
    """Quotients diédraux D_{2(m+2)} de D_∞ : ordres 4(m+2), divisibles par 4."""
    return [dihedral(2 * (m + 2)) for m in range(prefix_n)]


def ore_marking(encoded: MarkedGroup, constraint: Optional[Sequence[int]] = None
                ) -> Tuple[MarkedGroup, List[OreWitness]]:
    """(ξ_1, …, ξ_r, η_1, …, η_r, ζ_1, …, ζ_r) avec ξ_j = [η_j, ζ_j]."""
    witnesses = [ore_commutator(xi, constraint) for xi in encoded.marking]
    missing = [j + 1 for j, witness in enumerate(witnesses) if not witness.found]
    if missing:
        raise PreconditionError("commutateur d'Ore introuvable", {"generators": missing})
    marking = (tuple(encoded.marking) + tuple(wt.eta for wt in witnesses) + tuple(wt.zeta for wt in witnesses))
    return replace(encoded, marking=marking, name=f"{encoded.name} [ξ, η, ζ]"), witnesses


def hall_recovery(table: pd.DataFrame, r: int) -> bool:
    """Chaque ξ_j = [η_j, ζ_j] apparaît seul à la coordonnée 0 via [w_{η_j}, w_{ζ_j}]."""
    rows = table.set_index(["i", "j"])
    return all(bool(rows.loc[(r + j, 2 * r + j), "match"]) for j in range(1, r + 1))


@dataclass
class Theorem1Report:
    l_sequence: List[int] = field(default_factory=list)
    p_sequence: List[int] = field(default_factory=list)
    p_prime_sequence: List[int] = field(default_factory=list)
    sidon: List[int] = field(default_factory=list)
    prefix_n: int = 0
    completed: int = 0
    order_k: Optional[int] = None
    order_lambda1: Optional[int] = None
    order_lambda2: Optional[int] = None
    density_wt: Optional[DensityVerdict] = None
    density_wu: Optional[DensityVerdict] = None
    stages: List[KeyPropositionStage] = field(default_factory=list)
    full_wreath: List[bool] = field(default_factory=list)
    hall_recovered: List[bool] = field(default_factory=list)
    t_equals_u_cubed_admissible: bool = False
    limit: str = ""
    failure: Optional[Dict[str, Any]] = None

    @property
    def radii_nondecreasing(self) -> bool:
        values = [s.radius_t.value for s in self.stages if s.radius_t is not None]
        return all(a <= b for a, b in zip(values, values[1:]))

    @property
    def dense(self) -> bool:
        return bool(self.density_wt and self.density_wt.dense and self.density_wu and self.density_wu.dense)

    def to_json(self) -> Dict[str, Any]:
        return {
            "l_sequence": self.l_sequence,
            "p_sequence": self.p_sequence,
            "p_prime_sequence": self.p_prime_sequence,
            "sidon": self.sidon,
            "prefix_n": self.prefix_n,
            "completed": self.completed,
            "order_k_prefix": self.order_k,
            "order_lambda1_prefix": self.order_lambda1,
            "order_lambda2_prefix": self.order_lambda2,
            "density_wt": self.density_wt,
            "density_wu": self.density_wu,
            "stages": self.stages,
            "full_wreath": self.full_wreath,
            "hall_recovered": self.hall_recovered,
            "radii_nondecreasing": self.radii_nondecreasing,
            "t_equals_u_cubed_admissible": self.t_equals_u_cubed_admissible,
            "limit": self.limit,
            "failure": self.failure,
        }

    def to_markdown(self) -> str:
        lines = ["# Assemblage sur préfixe fini", ""]
        lines.append(f"- l : {self.l_sequence}")
        lines.append(f"- p : {self.p_sequence} ; p' : {self.p_prime_sequence}")
        lines.append(f"- placement : {self.sidon}")
        lines.append(f"- limite de référence : {self.limit}")
        lines.append(f"- étapes terminées : {self.completed}/{self.prefix_n}")
        lines.append(f"- |K| = {self.order_k}")
        lines.append(f"- |Λ1| = {self.order_lambda1} ; |Λ2| = {self.order_lambda2}")
        lines.append(f"- dense : {self.dense}")
        if self.failure:
            lines.append(f"- échec : {self.failure}")
        lines.append("")
        rows = pd.DataFrame([{
            "m": s.m, "p": s.p, "p'": s.p_prime, "|L|": s.order_u,
            "R(w,t)": str(s.radius_t) if s.radius_t else "-", "R(w,u)": str(s.radius_u),
            "t = u^p'": s.t_is_power_of_u, "Hall": s.commutators_exact,
        } for s in self.stages])
        lines.append(dataframe_to_markdown(rows))
        return "\n".join(lines) + "\n"

    def dumps(self) -> str:
        return dumps(self.to_json())


def theorem1_assemble(config: PipelineConfig, limit: Optional[MarkedGroup] = None) -> Theorem1Report:
    """
    Étapes 2 à 4 sur la chaîne de base : encodage alterné, marquage d'Ore, proposition clé,
    égalité L_m = Alt(G_m) ≀ Z/p_m, puis densité des deux produits diagonaux.

    Les rayons de chaque étape sont mesurés contre une même limite : celle fournie, sinon le
    dernier approximant du préfixe (la limite du marquage d'Ore n'est pas explicite).
    """
    caps = config.caps
    chain = base_chain(config.prefix_n)
    report = Theorem1Report(prefix_n=config.prefix_n, l_sequence=[4 * (m + 2) for m in range(config.prefix_n)])
    stages: List[MarkedGroup] = []
    for m, mg in enumerate(chain):
        try:
            encoded = alt_encode(mg, caps.closure)
            enlarged, _ = ore_marking(encoded, config.ore_constraint)
        except MgkError as e:
            raise StageFailure(m, str(e)) from e
        stages.append(enlarged)
        logger.info("Étape %d : Alt(%s), marquage de taille %d", m, mg.name, enlarged.rank)

    r = stages[0].rank // 3
    schedule = schedule_from_config(config, stages[0].rank)
    report.sidon = list(schedule.sidon)
    report.p_sequence = schedule.primes[: config.prefix_n]
    report.p_prime_sequence = schedule.exponents[: config.prefix_n]
    report.t_equals_u_cubed_admissible = schedule.admits_t_equals_u_cubed()
    reference = limit if limit is not None else stages[-1]
    report.limit = reference.name
    logger.info("Limite de référence : %s", reference.name)

    for m, stage in enumerate(stages):
        try:
            result = key_proposition([stage], PrimeSchedule(schedule.sidon, (schedule.pairs[m],)), limit=reference,
                                     rmax=config.agreement_rmax, ball_cap=caps.ball)[0]
        except ResourceCapExceeded as e:
            report.failure = {"stage": m, "reason": str(e)}
            logger.warning("Étape %d interrompue : %s", m, e)
            break
        except MgkError as e:
            raise StageFailure(m, str(e)) from e
        result = replace(result, m=m)
        expected = wreath_order(stage.ambient_order, result.p)
        report.stages.append(result)
        report.full_wreath.append(result.order_u == expected)
        report.hall_recovered.append(hall_recovery(result.commutators, r))
        report.completed = m + 1
        if result.order_u != expected:
            logger.warning("Étape %d : L propre (%d < %d)", m, result.order_u, expected)

    if report.stages:
        points = caps.bsgs_points
        wt = [s.with_t for s in report.stages]
        wu = [s.with_u for s in report.stages]
        report.density_wt = density_check(wt, points, caps.closure)
        report.density_wu = density_check(wu, points, caps.closure)
        report.order_k = report.density_wt.full_order
        report.order_lambda1 = report.density_wt.achieved_order
        report.order_lambda2 = report.density_wu.achieved_order
    logger.info("Assemblage terminé : %d étapes, dense = %s", report.completed, report.dense)
    return report


# --- variante t = u³ : étage diédral ---

def dihedral_stage(mg: MarkedGroup, p: int, placement: Optional[Sequence[int]] = None,
                   certify: bool = True) -> MarkedGroup:
    """
    (J; y, a, b) avec J = G ≀ D_p, y = (g, e) où g(ρ^{2 a_j}) = s_j, a = (𝐞, c_p), b = (𝐞, d_p).
    certify : l'égalité ⟨y, a, b⟩ = J est vérifiée par generates_ambient(), StageFailure sinon.
    """
    if not isprime(p) or p < 3:
        raise PreconditionError(f"p = {p} doit être un premier impair", {"p": p})
    placement = tuple(placement) if placement is not None else tuple(mian_chowla(mg.rank))
    if len(placement) != mg.rank:
        raise PreconditionError("placement et marquage de longueurs différentes")
    if not is_sidon(placement, p):
        raise PreconditionError(f"débordement du placement dans ⟨(cd)²⟩ modulo {p}",
                                {"collision": sidon_collision(placement, p), "p": p})
    top = dihedral(p)
    c, d = top.marking
    rho2 = power(c * d, 2)
    y = wreath_element({power(rho2, a): s for a, s in zip(placement, mg.marking)}, top.identity)
    stage = marked_in_wreath(mg, top, (y, shift(c), shift(d)), f"({mg.name} ≀ D_{p}; y, a, b)")
    if certify and not stage.generates_ambient():
        raise StageFailure(0, f"⟨y, a, b⟩ propre dans {mg.name} ≀ D_{p}")
    return stage
