import logging
import math
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np
from sympy import factorint

from bsgs import StabilizerChain
from core_groups import (
    DEFAULT_CLOSURE_CAP, Backend, GroupElement, MarkedGroup, PermutationRepresentation, Word,
    enumerate_subgroup, evaluate_word, inverse, invert_word, product_element, product_representation,
    symmetric_letters,
)
from exceptions import PreconditionError, ResourceCapExceeded
from marked_cayley import ball, balls_isomorphic

logger = logging.getLogger(__name__)

DEFAULT_BSGS_POINTS = 20_000
DEFAULT_RELATOR_SAMPLE = 400

# Étiquettes de groupes simples : ("alt", n), ("cyclic", p), ("psl", n, p)
SimpleLabel = Tuple[Any, ...]

# Isomorphismes exceptionnels entre groupes simples des familles reconnues
_EXCEPTIONAL = {
    ("psl", 2, 5): ("alt", 5),
    ("psl", 4, 2): ("alt", 8),
    ("psl", 3, 2): ("psl", 2, 7),
}


# --- produits diagonaux ---

def diagonal_element(components: Sequence[GroupElement]) -> GroupElement:
    """v_j^(M) = (v_j^(m_1), v_j^(m_2), …), arithmétique composante par composante."""
    return product_element(components)


def diagonal_product(mgs: Sequence[MarkedGroup], ambient_order: Optional[int] = None,
                     name: Optional[str] = None) -> MarkedGroup:
    """
    Δ_{m∈M} (L_m ; S_m) : sous-groupe du produit direct engendré par les générateurs appariés.
    Si tous les facteurs ont une représentation par permutations, on attache l'action sur la réunion disjointe.
    """
    if not mgs:
        raise PreconditionError("produit diagonal sur un ensemble d'indices vide")
    rank = mgs[0].rank
    for m, mg in enumerate(mgs):
        if mg.rank != rank:
            raise PreconditionError("marquages de longueurs différentes",
                                    {"index": m, "expected": rank, "got": mg.rank})
    marking = tuple(diagonal_element([mg.marking[j] for mg in mgs]) for j in range(rank))
    identity = diagonal_element([mg.identity for mg in mgs])
    finite = all(mg.finite for mg in mgs)
    representation = None
    if finite and all(mg.representation is not None for mg in mgs):
        representation = product_representation([mg.representation for mg in mgs])
    if ambient_order is None and finite and all(mg.ambient_order for mg in mgs):
        ambient_order = math.prod(mg.ambient_order for mg in mgs)
    label = name or "Δ(" + ", ".join(mg.name for mg in mgs) + ")"
    return MarkedGroup(label, marking, identity, finite=finite, representation=representation,
                       ambient_order=ambient_order)


def _generated_order(gens: Sequence[GroupElement], identity: GroupElement,
                     representation: Optional[PermutationRepresentation], bound: Optional[int],
                     cap: int = DEFAULT_CLOSURE_CAP) -> int:
    if not gens:
        return 1
    if representation is not None:
        chain = StabilizerChain(representation.degree)
        chain.build([np.asarray(representation.act(g), dtype=np.int64) for g in gens], bound=bound)
        return chain.order()
    closure = enumerate_subgroup(gens, cap, identity)
    if not closure.complete:
        raise ResourceCapExceeded(f"clôture interrompue à {cap} éléments", cap=cap, reached=len(closure))
    return len(closure)


# --- familles reconnues ---

def _normalize_simple(label: SimpleLabel) -> SimpleLabel:
    return _EXCEPTIONAL.get(label, label)


def simple_quotients(family: Optional[Tuple[Any, ...]]) -> Optional[FrozenSet[SimpleLabel]]:
    """Quotients simples d'un groupe de famille reconnue, None sinon."""
    if not family:
        return None
    kind = family[0]
    if kind == "alternating" and family[1] >= 5:
        return frozenset({("alt", family[1])})
    if kind == "cyclic":
        return frozenset({("cyclic", family[1])})
    if kind == "alt_wreath":
        # base parfaite : seul le sommet survit
        return frozenset({("cyclic", family[2])})
    if kind == "psl":
        n, p = family[1], family[2]
        if (n, p) == (2, 2):
            return frozenset({("cyclic", 2)})
        if (n, p) == (2, 3):
            return frozenset({("cyclic", 3)})
        return frozenset({_normalize_simple(("psl", n, p))})
    return None


def composition_factors(family: Optional[Tuple[Any, ...]]) -> Optional[Counter]:
    """Facteurs de composition (avec multiplicités) d'un groupe de famille reconnue."""
    if not family:
        return None
    kind = family[0]
    if kind == "alternating" and family[1] >= 5:
        return Counter({("alt", family[1]): 1})
    if kind == "cyclic":
        return Counter({("cyclic", family[1]): 1})
    if kind == "alt_wreath":
        n, p = family[1], family[2]
        if n < 5:
            return None
        return Counter({("alt", n): p, ("cyclic", p): 1})
    if kind == "psl":
        n, p = family[1], family[2]
        if (n, p) == (2, 2):
            return Counter({("cyclic", 2): 1, ("cyclic", 3): 1})
        if (n, p) == (2, 3):
            return Counter({("cyclic", 2): 3, ("cyclic", 3): 1})
        factors = Counter({_normalize_simple(("psl", n, p)): 1})
        for q, e in factorint(math.gcd(n, p - 1)).items():
            factors[("cyclic", int(q))] += e
        return factors
    return None


def _certified_family(mg: MarkedGroup) -> Optional[Tuple[Any, ...]]:
    """Famille du groupe ambiant, retenue seulement si le marquage l'engendre."""
    if mg.family is None:
        return None
    if mg.ambient_order is not None and mg.representation is not None and not mg.generates_ambient():
        return None
    return mg.family


# --- lemme de Goursat ---

@dataclass(frozen=True)
class GoursatVerdict:
    status: str
    order: int
    full_order: int
    projection_orders: Tuple[int, int]
    surjective: bool
    common_quotients: Optional[Tuple[SimpleLabel, ...]] = None

    def to_json(self) -> Dict[str, Any]:
        return {
            "status": self.status,
            "order": self.order,
            "full_order": self.full_order,
            "projection_orders": list(self.projection_orders),
            "surjective": self.surjective,
            "common_quotients": None if self.common_quotients is None else [list(q) for q in self.common_quotients],
        }


def goursat_full_check(h0: MarkedGroup, h1: MarkedGroup, gens: Sequence[GroupElement],
                       cap: int = DEFAULT_CLOSURE_CAP) -> GoursatVerdict:
    """
    ⟨gens⟩ ≤ H0 × H1 est-il le produit entier ?
    Statuts : full, proper (dont projections non surjectives), hypothesis-violated
    (sous-groupe propre et quotient simple commun aux deux facteurs).
    """
    for g in gens:
        if g.tag != Backend.PRODUCT or len(g.payload) != 2 or not (h0.contains(g.payload[0]) and h1.contains(g.payload[1])):
            raise PreconditionError("générateur hors de H0 × H1", {"element": g.describe()})
    order0 = h0.order(cap).value
    order1 = h1.order(cap).value
    if order0 is None or order1 is None:
        raise PreconditionError("H0 et H1 doivent être finis")
    projections = (
        _generated_order([g.payload[0] for g in gens], h0.identity, h0.representation, order0, cap),
        _generated_order([g.payload[1] for g in gens], h1.identity, h1.representation, order1, cap),
    )
    surjective = projections == (order0, order1)
    full_order = order0 * order1
    representation = None
    if h0.representation is not None and h1.representation is not None:
        representation = product_representation([h0.representation, h1.representation])
    order = _generated_order(gens, product_element([h0.identity, h1.identity]), representation, full_order, cap)

    q0, q1 = simple_quotients(_certified_family(h0)), simple_quotients(_certified_family(h1))
    common = None if q0 is None or q1 is None else tuple(sorted(q0 & q1))
    if not surjective:
        status = "proper"
    elif order == full_order:
        status = "full"
    elif common:
        status = "hypothesis-violated"
    else:
        status = "proper"
        if common is not None:
            logger.error("Goursat : hypothèse vérifiée mais sous-groupe propre (%d < %d)", order, full_order)
    logger.debug("Goursat %s × %s : %s (%d / %d)", h0.name, h1.name, status, order, full_order)
    return GoursatVerdict(status, order, full_order, projections, surjective, common)


# --- densité ---

@dataclass(frozen=True)
class DensityVerdict:
    """
    dense : |Δ| = Π |L_m| sur le préfixe traité (completed_prefix facteurs sur total).
    recognized : facteurs de composition par facteur, si toutes les familles sont reconnues.
    """
    dense: bool
    method: str
    full_order: Optional[int]
    achieved_order: Optional[int]
    factor_orders: Tuple[int, ...]
    recognized: Optional[Tuple[Tuple[SimpleLabel, ...], ...]] = None
    shortcut_dense: Optional[bool] = None
    completed_prefix: int = 0
    total: int = 0

    @property
    def partial(self) -> bool:
        return self.completed_prefix < self.total

    def to_json(self) -> Dict[str, Any]:
        return {
            "dense": self.dense,
            "method": self.method,
            "full_order": self.full_order,
            "achieved_order": self.achieved_order,
            "factor_orders": list(self.factor_orders),
            "recognized": None if self.recognized is None else [[list(f) for f in factors] for factors in self.recognized],
            "shortcut_dense": self.shortcut_dense,
            "completed_prefix": self.completed_prefix,
            "total": self.total,
        }


def _recognized_shortcut(mgs: Sequence[MarkedGroup]) -> Tuple[Optional[Tuple], Optional[bool]]:
    """Chaque groupe simple est facteur de composition d'au plus un L_m ⇒ dense."""
    counters = [composition_factors(_certified_family(mg)) for mg in mgs]
    if any(c is None for c in counters):
        return None, None
    owners: Counter = Counter()
    for counter in counters:
        owners.update(set(counter))
    shortcut = all(n == 1 for n in owners.values())
    return tuple(tuple(sorted(c)) for c in counters), shortcut


def _prefix_within(mgs: Sequence[MarkedGroup], points: int) -> int:
    total = 0
    for n, mg in enumerate(mgs):
        total += mg.representation.degree
        if total > points:
            return n
    return len(mgs)


def density_check(mgs: Sequence[MarkedGroup], bsgs_points: int = DEFAULT_BSGS_POINTS,
                  cap: int = DEFAULT_CLOSURE_CAP) -> DensityVerdict:
    """
    Densité de Δ(mgs) dans Π L_m par égalité exacte des ordres.
    Au-delà de bsgs_points points, le verdict porte sur le plus long préfixe traitable.
    """
    if not mgs:
        raise PreconditionError("aucun facteur")
    if not all(mg.finite for mg in mgs):
        raise PreconditionError("facteurs finis requis")
    recognized, shortcut = _recognized_shortcut(mgs)
    prefix = len(mgs)
    if all(mg.representation is not None for mg in mgs):
        prefix = _prefix_within(mgs, bsgs_points)
        if prefix < len(mgs):
            logger.warning("BSGS : %d facteurs sur %d tiennent dans %d points", prefix, len(mgs), bsgs_points)
    if prefix == 0:
        if shortcut:
            return DensityVerdict(True, "recognized-factors", None, None, (), recognized, shortcut, len(mgs), len(mgs))
        raise ResourceCapExceeded("aucun préfixe ne tient dans le plafond BSGS", cap=bsgs_points,
                                  reached=mgs[0].representation.degree)
    factors = list(mgs[:prefix])
    try:
        factor_orders = tuple(mg.order(cap).value for mg in factors)
        if any(o is None for o in factor_orders):
            raise ResourceCapExceeded("ordre d'un facteur inaccessible", cap=cap)
        full_order = math.prod(factor_orders)
        delta = diagonal_product(factors, ambient_order=full_order)
        achieved = delta.order(cap).value
        if achieved is None:
            raise ResourceCapExceeded("clôture du produit diagonal interrompue", cap=cap)
    except ResourceCapExceeded:
        if shortcut:
            logger.warning("Ordres inaccessibles, verdict par facteurs reconnus")
            return DensityVerdict(True, "recognized-factors", None, None, (), recognized, shortcut, len(mgs), len(mgs))
        raise
    dense = achieved == full_order
    if shortcut and not dense:
        logger.error("Facteurs reconnus et égalité des ordres en désaccord (%d < %d)", achieved, full_order)
    logger.info("Densité sur %d facteurs : %s (%d / %d)", prefix, dense, achieved, full_order)
    return DensityVerdict(dense, "order-equality", full_order, achieved, factor_orders, recognized, shortcut,
                          prefix, len(mgs))


# --- cohérence des préfixes ---

def _relator_sample(mg: MarkedGroup, budget: int) -> List[Word]:
    """Relateurs issus des arêtes hors arbre d'un parcours en largeur (multiplication à gauche)."""
    letters = symmetric_letters(mg.marking)
    k = mg.rank
    signed = list(range(1, k + 1)) + [-j for j in range(1, k + 1)]
    words: Dict[GroupElement, Word] = {mg.identity: ()}
    queue = deque([mg.identity])
    relators: List[Word] = []
    while queue and len(relators) < budget:
        g = queue.popleft()
        for letter, s in zip(signed, letters):
            h = s * g
            word = (letter,) + words[g]
            if h in words:
                if word != words[h]:
                    relators.append(word + invert_word(words[h]))
                continue
            if len(words) < budget:
                words[h] = word
                queue.append(h)
    return relators[:budget]


@dataclass(frozen=True)
class PrefixConsistency:
    holds: bool
    checks: Tuple[Dict[str, Any], ...] = ()

    def __bool__(self) -> bool:
        return self.holds

    def to_json(self) -> Dict[str, Any]:
        return {"holds": self.holds, "checks": list(self.checks)}


def prefix_quotient_consistency(mgs: Sequence[MarkedGroup], sample: int = DEFAULT_RELATOR_SAMPLE,
                                cap: int = DEFAULT_CLOSURE_CAP) -> PrefixConsistency:
    """
    Δ_{M_{n+1}} → Δ_{M_n} (suppression de la dernière coordonnée) est un quotient marqué :
    les relateurs échantillonnés passent au quotient et |Δ_{M_n}| divise |Δ_{M_{n+1}}|.
    """
    checks = []
    holds = True
    for n in range(1, len(mgs)):
        source = diagonal_product(mgs[: n + 1])
        image = diagonal_product(mgs[:n])
        relators = _relator_sample(source, sample)
        broken = [r for r in relators if not evaluate_word(image.marking, r, image.identity).is_identity()]
        source_order = source.order(cap).value
        image_order = image.order(cap).value
        divides = source_order is not None and image_order is not None and source_order % image_order == 0
        ok = not broken and divides
        holds = holds and ok
        checks.append({"n": n, "relators_checked": len(relators), "source_order": source_order,
                       "image_order": image_order, "divides": divides,
                       "broken_relator": list(broken[0]) if broken else None})
    return PrefixConsistency(holds, tuple(checks))


# --- présentations finies ---

@dataclass(frozen=True)
class FinitePresentation:
    """⟨a_1, …, a_k | relateurs⟩, réalisée fidèlement par model."""
    rank: int
    relators: Tuple[Word, ...]
    model: MarkedGroup

    def __post_init__(self):
        if self.model.rank != self.rank:
            raise PreconditionError("modèle et présentation de rangs différents")
        for r in self.relators:
            if not evaluate_word(self.model.marking, r, self.model.identity).is_identity():
                raise PreconditionError("le modèle ne satisfait pas un relateur", {"relator": list(r)})

    @property
    def radius(self) -> int:
        return max((len(r) for r in self.relators), default=0)


@dataclass(frozen=True)
class FpRecovery:
    status: str
    deleted: Optional[int]
    radius: int
    order: Optional[int] = None
    expected_order: Optional[int] = None
    witness: Dict[str, Any] = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return self.status == "recovered"

    def __bool__(self) -> bool:
        return self.holds

    def to_json(self) -> Dict[str, Any]:
        return {"status": self.status, "holds": self.holds, "deleted": self.deleted, "radius": self.radius,
                "order": self.order, "expected_order": self.expected_order, "witness": self.witness}


def _violated_relator(mg: MarkedGroup, relators: Sequence[Word]) -> Optional[Word]:
    for r in relators:
        if not evaluate_word(mg.marking, r, mg.identity).is_identity():
            return r
    return None


def fp_recovery_check(presentation: FinitePresentation, approximants: Sequence[MarkedGroup],
                      rmax: Optional[int] = None, cap: int = DEFAULT_CLOSURE_CAP) -> FpRecovery:
    """
    On supprime le plus court préfixe d'approximants dont les boules de rayon R (longueur maximale
    des relateurs) diffèrent de celles de H, puis on compare Δ du reste à H : relateurs satisfaits
    et ordres égaux. Sans queue concordante : refuted si le dernier approximant viole un relateur,
    sinon inconclusive.
    """
    radius = presentation.radius
    if rmax is not None and radius > rmax:
        return FpRecovery("inconclusive", None, radius, witness={"reason": f"rayon {radius} > Rmax {rmax}"})
    model = presentation.model
    reference = ball(model, radius)
    agrees = [bool(balls_isomorphic(reference, ball(mg, radius))) for mg in approximants]
    deleted = len(agrees)
    while deleted > 0 and agrees[deleted - 1]:
        deleted -= 1
    expected = model.order(cap).value
    if deleted == len(approximants):
        violated = _violated_relator(approximants[-1], presentation.relators) if approximants else None
        if violated is not None:
            return FpRecovery("refuted", None, radius, expected_order=expected,
                              witness={"relator": list(violated), "approximant": approximants[-1].name})
        logger.warning("Aucune queue d'approximants ne coïncide avec %s au rayon %d", model.name, radius)
        return FpRecovery("inconclusive", None, radius, expected_order=expected,
                          witness={"reason": f"aucune queue concordante au rayon {radius}"})
    delta = diagonal_product(approximants[deleted:])
    violated = _violated_relator(delta, presentation.relators)
    order = delta.order(cap).value
    if violated is not None or order != expected:
        return FpRecovery("refuted", deleted, radius, order, expected,
                          witness={"relator": None if violated is None else list(violated)})
    return FpRecovery("recovered", deleted, radius, order, expected)


# --- suite exacte courte ---

@dataclass(frozen=True)
class QuotientMap:
    well_defined: bool
    kernel: Tuple[GroupElement, ...]
    source_order: int
    image_order: int
    witness: Optional[str] = None


def kernel_to_quotient(source: MarkedGroup, target: MarkedGroup, cap: int = DEFAULT_CLOSURE_CAP) -> QuotientMap:
    """Application s_j ↦ t_j : bien définie ? noyau par énumération exhaustive de la source."""
    if source.rank != target.rank:
        raise PreconditionError("marquages de longueurs différentes")
    letters = symmetric_letters(source.marking)
    images = symmetric_letters(target.marking)
    mapping: Dict[GroupElement, GroupElement] = {source.identity: target.identity}
    queue = deque([source.identity])
    while queue:
        g = queue.popleft()
        for s, t in zip(letters, images):
            h, image = s * g, t * mapping[g]
            if h in mapping:
                if mapping[h] != image:
                    return QuotientMap(False, (), len(mapping), len(set(mapping.values())), h.describe())
                continue
            if len(mapping) >= cap:
                raise ResourceCapExceeded(f"{source.name} : énumération interrompue", cap=cap, reached=len(mapping))
            mapping[h] = image
            queue.append(h)
    kernel = tuple(sorted((g for g, image in mapping.items() if image.is_identity()), key=lambda g: g.sort_key()))
    return QuotientMap(True, kernel, len(mapping), len(set(mapping.values())))


def _normal_closure_order(k: GroupElement, mg: MarkedGroup, cap: int) -> int:
    conjugates = {k}
    queue = deque([k])
    letters = symmetric_letters(mg.marking)
    while queue:
        x = queue.popleft()
        for s in letters:
            y = s * x * inverse(s)
            if y not in conjugates:
                conjugates.add(y)
                queue.append(y)
    return len(enumerate_subgroup(sorted(conjugates, key=lambda g: g.sort_key()), cap, mg.identity))


@dataclass(frozen=True)
class ExactSequence:
    holds: bool
    delta_order: int
    kernel_order: int
    limit_order: int
    normal_closure_max: int

    def to_json(self) -> Dict[str, Any]:
        return {"holds": self.holds, "delta_order": self.delta_order, "kernel_order": self.kernel_order,
                "limit_order": self.limit_order, "normal_closure_max": self.normal_closure_max}


def short_exact_sequence_check(mgs: Sequence[MarkedGroup], limit: MarkedGroup,
                               cap: int = DEFAULT_CLOSURE_CAP) -> ExactSequence:
    """
    1 → Δ ∩ ⊕ L_m → Δ → L∞ → 1 sur un préfixe fini : Δ porte la limite en dernière coordonnée,
    le noyau de la projection vers L∞ est comparé aux éléments de support fini (dernière coordonnée triviale).
    """
    delta = diagonal_product(list(mgs) + [limit])
    quotient = kernel_to_quotient(delta, limit, cap)
    if not quotient.well_defined:
        return ExactSequence(False, quotient.source_order, 0, quotient.image_order, 0)
    closure = enumerate_subgroup(delta.marking, cap, delta.identity)
    finitely_supported = {g for g in closure.elements if g.payload[-1].is_identity()}
    limit_order = limit.order(cap).value
    closures = [_normal_closure_order(k, delta, cap) for k in quotient.kernel]
    holds = (set(quotient.kernel) == finitely_supported
             and quotient.image_order == limit_order
             and quotient.source_order == len(quotient.kernel) * quotient.image_order
             and all(c <= quotient.source_order for c in closures))
    return ExactSequence(holds, quotient.source_order, len(quotient.kernel), quotient.image_order,
                         max(closures, default=1))
