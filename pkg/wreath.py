import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import pandas as pd

from core_groups import (
    Arithmetic, Backend, GroupElement, MarkedGroup, PermutationRepresentation,
    abelian_element, abelian_group, commutator, cyclic_group, element_order, enumerate_subgroup,
    identity_of, inverse, power, register_backend,
)
from exceptions import BackendMismatchError, PreconditionError
from utils import is_sidon, sidon_collision

logger = logging.getLogger(__name__)

# Charge : (entrées, sommet) où entrées est la suite triée des (position, valeur de base) non triviales.
Entries = Tuple[Tuple[GroupElement, GroupElement], ...]

TOP_BACKENDS = (Backend.ABELIAN, Backend.DIHEDRAL)


def _normalize(values: Dict[GroupElement, GroupElement]) -> Entries:
    return tuple(sorted(((x, v) for x, v in values.items() if not v.is_identity()),
                        key=lambda item: item[0].sort_key()))


def _act(entries: Entries, h: GroupElement) -> Dict[GroupElement, GroupElement]:
    """(h ▷ f)(x) = f(x·h) : la valeur en y passe en y·h⁻¹."""
    h_inv = inverse(h)
    return {y * h_inv: v for y, v in entries}


class _WreathArithmetic(Arithmetic):
    # (f1,h1)(f2,h2) = (f1 · (h1 ▷ f2), h1 h2)
    def multiply(self, a, b):
        f1, h1 = a
        f2, h2 = b
        values = dict(f1)
        for x, v in _act(f2, h1).items():
            values[x] = values[x] * v if x in values else v
        return (_normalize(values), h1 * h2)

    def inverse(self, a):
        f, h = a
        # (h⁻¹ ▷ f⁻¹, h⁻¹) : la valeur en y passe en y·h
        return (_normalize({y * h: inverse(v) for y, v in f}), inverse(h))

    def identity_like(self, a):
        return ((), identity_of(a[1]))

    def is_identity(self, a):
        return not a[0] and a[1].is_identity()

    def same_domain(self, a, b):
        return a[1].tag == b[1].tag

    def sort_key(self, a):
        f, h = a
        return (h.sort_key(), tuple((x.sort_key(), v.sort_key()) for x, v in f))

    def order(self, a):
        top = element_order(a[1])
        return None if top.is_finite else 0

    def describe(self, a):
        f, h = a
        support = ", ".join(f"{v.describe()}@{x.describe()}" for x, v in f) or "𝐞"
        return f"({support} | {h.describe()})"


register_backend(Backend.WREATH, _WreathArithmetic())


def wreath_element(values: Dict[GroupElement, GroupElement], top: GroupElement) -> GroupElement:
    return GroupElement(Backend.WREATH, (_normalize(values), top))


def delta(value: GroupElement, at: GroupElement) -> GroupElement:
    """(v δ_at, e_H)."""
    return wreath_element({at: value}, identity_of(at))


def shift(top: GroupElement) -> GroupElement:
    """(𝐞, h)."""
    return wreath_element({}, top)


def support(g: GroupElement) -> List[GroupElement]:
    if g.tag != Backend.WREATH:
        raise BackendMismatchError("support attend un élément de produit en couronne")
    return [x for x, _ in g.payload[0]]


def value_at(g: GroupElement, x: GroupElement, base_identity: GroupElement) -> GroupElement:
    return dict(g.payload[0]).get(x, base_identity)


def wreath_order(base_order: int, top_order: int) -> int:
    """|G ≀ H| = |G|^|H| · |H|."""
    return base_order ** top_order * top_order


def imprimitive_representation(base: PermutationRepresentation,
                               top_elements: Sequence[GroupElement]) -> PermutationRepresentation:
    """Action de G ≀ H sur (domaine de G) × H : (ω, x)^(f,h) = (ω^f(x), x·h), point x·deg + ω."""
    index = {x: i for i, x in enumerate(top_elements)}
    degree = base.degree
    base_identity = tuple(range(degree))

    def act(g: GroupElement) -> Tuple[int, ...]:
        f, h = g.payload
        values = {index[x]: base.act(v) for x, v in f}
        images: List[int] = []
        for i, x in enumerate(top_elements):
            target = index[x * h] * degree
            perm = values.get(i, base_identity)
            images.extend(target + perm[omega] for omega in range(degree))
        return tuple(images)

    return PermutationRepresentation(degree * len(top_elements), act)


def check_imprimitive_faithfulness(mg: MarkedGroup, samples: Sequence[Tuple[GroupElement, GroupElement]]) -> bool:
    """Vérifie sur des paires que l'action est un homomorphisme injectif : act(ab) = act(a) puis act(b)."""
    act = mg.representation.act
    for a, b in samples:
        left = act(a * b)
        pa, pb = act(a), act(b)
        if left != tuple(pb[i] for i in pa):
            return False
        if (sorted(pa) != list(range(len(pa)))) or (a.is_identity() != (pa == tuple(range(len(pa))))):
            return False
    return True


@dataclass(frozen=True)
class _Shell:
    identity: GroupElement
    finite: bool
    representation: Optional[PermutationRepresentation]
    ambient_order: Optional[int]
    family: Optional[Tuple[Any, ...]]
    top_elements: Optional[Tuple[GroupElement, ...]]


def _shell(base: MarkedGroup, top: MarkedGroup) -> _Shell:
    if top.identity.tag not in TOP_BACKENDS:
        raise PreconditionError(f"sommet non pris en charge : {top.identity.tag.value}")
    identity = shift(top.identity)
    if not (base.finite and top.finite):
        return _Shell(identity, False, None, None, None, None)
    top_elements = enumerate_subgroup(top.marking, 1 << 20, top.identity).elements
    representation = None
    if base.representation is not None:
        representation = imprimitive_representation(base.representation, top_elements)
    ambient = wreath_order(base.ambient_order, len(top_elements)) if base.ambient_order else None
    family = None
    if base.family and base.family[0] == "alternating" and top.family and top.family[0] == "cyclic":
        family = ("alt_wreath", base.family[1], top.family[1])
    return _Shell(identity, True, representation, ambient, family, top_elements)


def _marked(name: str, shell: _Shell, marking: Sequence[GroupElement]) -> MarkedGroup:
    return MarkedGroup(name, tuple(marking), shell.identity, finite=shell.finite,
                       representation=shell.representation, ambient_order=shell.ambient_order,
                       family=shell.family)


def marked_in_wreath(base: MarkedGroup, top: MarkedGroup, marking: Sequence[GroupElement], name: str) -> MarkedGroup:
    """Sous-groupe marqué de base ≀ top, avec la représentation imprimitive du groupe ambiant."""
    return _marked(name, _shell(base, top), marking)


def wreath(base: MarkedGroup, top: MarkedGroup) -> MarkedGroup:
    """(G ≀ H ; (s_1 δ_e, e), …, (s_k δ_e, e), (𝐞, t_1), …, (𝐞, t_l))."""
    shell = _shell(base, top)
    marking = [delta(s, top.identity) for s in base.marking] + [shift(t) for t in top.marking]
    return _marked(f"{base.name} ≀ {top.name}", shell, marking)


def _top_position(top: MarkedGroup, position: Any) -> GroupElement:
    """Entier a ↦ u^a pour un sommet cyclique ; tuple ↦ élément de Z^d."""
    if isinstance(position, GroupElement):
        return position
    if isinstance(position, tuple):
        return abelian_element(top.identity.payload[0], position)
    return power(top.marking[0], position)


def _check_placement(placement: Sequence[int], modulus: Optional[int]) -> None:
    collision = sidon_collision(placement)
    if len(set(placement)) != len(placement) or collision is not None:
        raise PreconditionError("le placement n'est pas un ensemble de Sidon",
                                {"collision": collision, "placement": list(placement)})
    if modulus is not None and not is_sidon(placement, modulus):
        raise PreconditionError(f"le placement n'est pas de Sidon modulo {modulus}",
                                {"collision": sidon_collision(placement, modulus), "placement": list(placement)})


def hall_elements(mg: MarkedGroup, placement: Sequence[int], top: Optional[MarkedGroup] = None
                  ) -> Tuple[GroupElement, GroupElement]:
    """w = (f, 0) avec f(a_j) = s_j, et u = (𝐞, 1)."""
    top = top or cyclic_group(0)
    if len(placement) != mg.rank:
        raise PreconditionError("placement et marquage de longueurs différentes",
                                {"placement": len(placement), "rank": mg.rank})
    modulus = top.identity.payload[0][0] if top.finite and top.identity.tag == Backend.ABELIAN else None
    _check_placement(placement, modulus)
    w = wreath_element({_top_position(top, a): s for a, s in zip(placement, mg.marking)}, top.identity)
    return w, shift(top.marking[0])


def hall_wreath_marking(mg: MarkedGroup, placement: Sequence[int], top: Optional[MarkedGroup] = None) -> MarkedGroup:
    """Plongement de Hall : (⟨w, u⟩ ; w, u) dans G ≀ Z (ou G ≀ Z/p si top est fini)."""
    top = top or cyclic_group(0)
    w, u = hall_elements(mg, placement, top)
    return _marked(f"Hall({mg.name}; {list(placement)})", _shell(mg, top), (w, u))


def hall_conjugates(w: GroupElement, u: GroupElement, placement: Sequence[int]) -> List[GroupElement]:
    """w_i = u^{a_i} w u^{−a_i}."""
    return [power(u, a) * w * power(u, -a) for a in placement]


def hall_commutator_table(mg: MarkedGroup, placement: Sequence[int], top: Optional[MarkedGroup] = None) -> pd.DataFrame:
    """Tableau des [w_i, w_j] : support, valeur, valeur attendue [s_i, s_j] en 0 et concordance."""
    top = top or cyclic_group(0)
    w, u = hall_elements(mg, placement, top)
    conjugates = hall_conjugates(w, u, placement)
    origin = top.identity
    rows = []
    for i, wi in enumerate(conjugates):
        for j, wj in enumerate(conjugates):
            c = commutator(wi, wj)
            expected = commutator(mg.marking[i], mg.marking[j])
            want = wreath_element({origin: expected}, origin)
            rows.append({
                "i": i + 1,
                "j": j + 1,
                "support": [x.describe() for x in support(c)],
                "value": value_at(c, origin, mg.identity).describe(),
                "expected": expected.describe(),
                "match": c == want,
            })
    return pd.DataFrame(rows)


def absorption_markings(mg: MarkedGroup, m: int) -> MarkedGroup:
    """S_m = (z_1, …, z_k, t) dans G ≀ Z avec z_j = s_j δ_{2^m (j−1)} et t = (𝐞, 1)."""
    if mg.rank < 1:
        raise PreconditionError("marquage vide")
    top = cyclic_group(0)
    z = [delta(s, abelian_element((0,), (2 ** m * j,))) for j, s in enumerate(mg.marking)]
    return _marked(f"{mg.name} ≀ Z ; S_{m}", _shell(mg, top), z + [shift(top.marking[0])])


def absorption_limit(mg: MarkedGroup) -> MarkedGroup:
    """(C_1 × … × C_k) ≀ Z avec C_j cyclique de l'ordre de s_j."""
    orders = []
    for s in mg.marking:
        order = element_order(s)
        if not order.is_finite:
            raise PreconditionError("générateur d'ordre infini", {"generator": s.describe()})
        orders.append(order.value)
    return wreath(abelian_group(orders), cyclic_group(0))


def gamma_limits(mg: MarkedGroup, placement: Sequence[int]) -> Tuple[MarkedGroup, MarkedGroup]:
    """
    Limites dans G ≀ Z² : Γ₁ = (⟨w, t⟩ ; w, t) avec t = (𝐞, (0,1)) et Γ₂ = (⟨w, u⟩ ; w, u) avec u = (𝐞, (1,0)),
    où f((a_j, 0)) = s_j.
    """
    if len(placement) != mg.rank:
        raise PreconditionError("placement et marquage de longueurs différentes")
    _check_placement(placement, None)
    top = abelian_group((0, 0))
    w = wreath_element({abelian_element((0, 0), (a, 0)): s for a, s in zip(placement, mg.marking)}, top.identity)
    shell = _shell(mg, top)
    t = shift(abelian_element((0, 0), (0, 1)))
    u = shift(abelian_element((0, 0), (1, 0)))
    return _marked(f"Γ₁({mg.name})", shell, (w, t)), _marked(f"Γ₂({mg.name})", shell, (w, u))


def cyclic_wreath_limit(order: int) -> MarkedGroup:
    """(C ≀ Z ; c δ_0, décalage) avec C cyclique d'ordre donné."""
    return wreath(cyclic_group(order), cyclic_group(0))


def combined_order(mg: MarkedGroup) -> int:
    """Ordre de ⊕_j s_j δ_j, c'est-à-dire le ppcm des ordres des générateurs."""
    return math.lcm(*[element_order(s).value or 0 for s in mg.marking])
