import logging
from typing import Dict, List, Optional, Sequence, Tuple

from core_groups import (
    Arithmetic, Backend, GroupElement, MarkedGroup, enumerate_subgroup, inverse, register_backend,
    symmetric_letters,
)
from exceptions import PreconditionError

logger = logging.getLogger(__name__)

SIDE_A, SIDE_B = 0, 1
Letter = Tuple[int, GroupElement]


class _FiniteFactor:
    """Facteur fini : table x ↦ (c, t) avec x = φ(c)·t, t représentant minimal de la classe à droite φ(C)·x."""

    def __init__(self, mg: MarkedGroup, image: Dict[GroupElement, GroupElement], cap: int):
        closure = mg.elements(cap)
        if not closure.complete:
            raise PreconditionError(f"{mg.name} : facteur non fini ou trop grand (plafond {cap})")
        self.mg = mg
        self.table: Dict[GroupElement, Tuple[GroupElement, GroupElement]] = {}
        for x in sorted(closure.elements, key=lambda g: g.sort_key()):
            if x in self.table:
                continue
            coset = {c: image[c] * x for c in image}
            rep = min(coset.values(), key=lambda g: g.sort_key())
            for c, a in image.items():
                self.table[a * rep] = (c, rep)

    def lead(self, x: GroupElement) -> GroupElement:
        return x

    def decompose(self, x: GroupElement) -> Tuple[GroupElement, GroupElement]:
        return self.table[x]


class _AmalgamFactor:
    """
    Facteur lui-même amalgame, dont le sous-groupe amalgamé vit dans le facteur fini le plus interne.
    La classe de x ne dépend que de sa partie initiale dans ce facteur fini.
    """

    def __init__(self, inner: "Amalgam", image: Dict[GroupElement, GroupElement], cap: int):
        self.inner = inner
        self.image = image
        base = inner.base_factor()
        base_image = {c: self._lead_of(a) for c, a in image.items()}
        for c, a in image.items():
            if inner.lift_base(base_image[c]) != a:
                raise PreconditionError("image hors du facteur fini interne", {"element": a.describe()})
        self.base = _FiniteFactor(base.mg, base_image, cap)

    def _lead_of(self, x: GroupElement) -> GroupElement:
        inner, head, word = x.payload
        g = inner.embed(SIDE_B, head)
        if word and word[0][0] == SIDE_B:
            g = g * word[0][1]
        return inner.factors[SIDE_B].lead(g)

    def lead(self, x: GroupElement) -> GroupElement:
        return self._lead_of(x)

    def decompose(self, x: GroupElement) -> Tuple[GroupElement, GroupElement]:
        c, _ = self.base.table[self._lead_of(x)]
        return c, inverse(self.image[c]) * x


class Amalgam:
    """
    A *_C B pour A fini et B fini (ou amalgame de ce type), C fini.
    Forme normale : c · r_1 ⋯ r_k, les r_i représentants non triviaux alternant entre A et B.
    """

    def __init__(self, a: MarkedGroup, b: MarkedGroup, c: MarkedGroup,
                 embed_a: Sequence[GroupElement], embed_b: Sequence[GroupElement], cap: int = 200_000):
        if len(embed_a) != c.rank or len(embed_b) != c.rank:
            raise PreconditionError("les plongements doivent donner une image par générateur de C")
        self.a, self.b, self.c = a, b, c
        self.c_elements = enumerate_subgroup(c.marking, cap, c.identity)
        if not self.c_elements.complete:
            raise PreconditionError("C doit être fini")
        self.images = (self._extend(embed_a, a.identity, "A"), self._extend(embed_b, b.identity, "B"))
        self.factors = (_FiniteFactor(a, self.images[SIDE_A], cap), self._factor_b(cap))
        self.name = f"{a.name} *_{c.name} {b.name}"

    def _factor_b(self, cap: int):
        if self.b.identity.tag == Backend.AMALGAM:
            return _AmalgamFactor(self.b.identity.payload[0], self.images[SIDE_B], cap)
        return _FiniteFactor(self.b, self.images[SIDE_B], cap)

    def _extend(self, images: Sequence[GroupElement], identity: GroupElement, label: str) -> Dict[GroupElement, GroupElement]:
        """Prolonge un plongement défini sur les générateurs de C ; vérifie homomorphisme et injectivité."""
        letters = symmetric_letters(self.c.marking)
        targets = list(images) + [inverse(g) for g in images]
        mapping = {self.c.identity: identity}
        queue = [self.c.identity]
        while queue:
            x = queue.pop(0)
            for s, t in zip(letters, targets):
                y, image = s * x, t * mapping[x]
                if y in mapping:
                    if mapping[y] != image:
                        raise PreconditionError(f"plongement dans {label} non homomorphe",
                                                {"element": y.describe(), "images": [mapping[y].describe(), image.describe()]})
                    continue
                mapping[y] = image
                queue.append(y)
        seen: Dict[GroupElement, GroupElement] = {}
        for x, image in mapping.items():
            if image in seen:
                raise PreconditionError(f"plongement dans {label} non injectif",
                                        {"elements": [seen[image].describe(), x.describe()]})
            seen[image] = x
        return mapping

    def base_factor(self) -> _FiniteFactor:
        factor = self.factors[SIDE_B]
        return factor if isinstance(factor, _FiniteFactor) else factor.inner.base_factor()

    def embed(self, side: int, c: GroupElement) -> GroupElement:
        return self.images[side][c]

    def lift_base(self, g: GroupElement) -> GroupElement:
        """Élément du facteur fini le plus interne vu dans l'amalgame."""
        factor = self.factors[SIDE_B]
        if isinstance(factor, _FiniteFactor):
            return self.factor_element(SIDE_B, g)
        return self.factor_element(SIDE_B, factor.inner.lift_base(g))

    # --- formes normales ---

    def _push(self, head: GroupElement, word: Tuple[Letter, ...], c: GroupElement) -> Tuple[GroupElement, Tuple[Letter, ...]]:
        """(head, word) · φ(c), en faisant traverser c vers la gauche."""
        letters = list(word)
        for i in range(len(letters) - 1, -1, -1):
            side, r = letters[i]
            c, t = self.factors[side].decompose(r * self.embed(side, c))
            letters[i] = (side, t)
        return head * c, tuple(letters)

    def _times_factor(self, head: GroupElement, word: Tuple[Letter, ...], side: int, g: GroupElement):
        if word and word[-1][0] == side:
            g = word[-1][1] * g
            word = word[:-1]
        c, t = self.factors[side].decompose(g)
        head, word = self._push(head, word, c)
        if not t.is_identity():
            word = word + ((side, t),)
        return head, word

    def multiply(self, x, y):
        _, h1, w1 = x
        _, h2, w2 = y
        head, word = self._push(h1, w1, h2)
        for side, r in w2:
            head, word = self._times_factor(head, word, side, r)
        return (self, head, word)

    def inverse(self, x):
        _, h, w = x
        head, word = self.c.identity, ()
        for side, r in reversed(w):
            head, word = self._times_factor(head, word, side, inverse(r))
        head, word = self._push(head, word, inverse(h))
        return (self, head, word)

    def factor_element(self, side: int, g: GroupElement) -> GroupElement:
        """Élément du facteur (A ou B) vu dans l'amalgame."""
        head, word = self._times_factor(self.c.identity, (), side, g)
        return GroupElement(Backend.AMALGAM, (self, head, word))

    def identity(self) -> GroupElement:
        return GroupElement(Backend.AMALGAM, (self, self.c.identity, ()))

    def marked_group(self, marking: Sequence[Tuple[int, GroupElement]], name: Optional[str] = None) -> MarkedGroup:
        """Marquage par des éléments des facteurs, donnés par (côté, élément)."""
        elements = tuple(self.factor_element(side, g) for side, g in marking)
        order_c = len(self.c_elements)
        finite = (self.a.finite and self.b.finite and
                  (order_c == self.a.order().value or order_c == self.b.order().value))
        return MarkedGroup(name or self.name, elements, self.identity(), finite=finite)


class _AmalgamArithmetic(Arithmetic):
    def multiply(self, a, b):
        return a[0].multiply(a, b)

    def inverse(self, a):
        return a[0].inverse(a)

    def identity_like(self, a):
        return (a[0], a[0].c.identity, ())

    def is_identity(self, a):
        return not a[2] and a[1].is_identity()

    def same_domain(self, a, b):
        return a[0] is b[0]

    def sort_key(self, a):
        return (len(a[2]), a[1].sort_key(), tuple((side, r.sort_key()) for side, r in a[2]))

    def describe(self, a):
        letters = " ".join(("A:" if side == SIDE_A else "B:") + r.describe() for side, r in a[2])
        return f"{a[1].describe()} {letters}".strip()


register_backend(Backend.AMALGAM, _AmalgamArithmetic())


def amalgam(a: MarkedGroup, b: MarkedGroup, c: MarkedGroup, embed_a: Sequence[GroupElement],
            embed_b: Sequence[GroupElement], marking: Optional[Sequence[Tuple[int, GroupElement]]] = None,
            cap: int = 200_000) -> MarkedGroup:
    """A *_C B marqué par défaut par les marquages de A puis de B."""
    product = Amalgam(a, b, c, embed_a, embed_b, cap)
    if marking is None:
        marking = [(SIDE_A, s) for s in a.marking] + [(SIDE_B, s) for s in b.marking]
    return product.marked_group(marking)
