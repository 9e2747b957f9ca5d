import logging
import math
from collections import deque
from dataclasses import dataclass, replace
from enum import Enum
from functools import cached_property, reduce
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from sympy import Matrix, isprime

from bsgs import StabilizerChain
from exceptions import BackendMismatchError, PreconditionError

logger = logging.getLogger(__name__)

DEFAULT_CLOSURE_CAP = 200_000
DEFAULT_ORDER_CAP = 1_000_000

Word = Tuple[int, ...]


class Backend(str, Enum):
    PERMUTATION = "permutation"
    MATRIX = "matrix"
    ABELIAN = "abelian"
    DIHEDRAL = "dihedral"
    PRODUCT = "product"
    WREATH = "wreath"
    FINITARY_PERMUTATION = "finitary_permutation"
    FINITARY_MATRIX = "finitary_matrix"
    AMALGAM = "amalgam"


class Arithmetic:
    """
    Arithmétique d'un backend sur des charges canoniques.
    Les sous-classes fournissent produit, inverse et neutre ; le reste a un comportement par défaut.
    """

    def multiply(self, a: Any, b: Any) -> Any:
        raise NotImplementedError

    def inverse(self, a: Any) -> Any:
        raise NotImplementedError

    def identity_like(self, a: Any) -> Any:
        raise NotImplementedError

    def is_identity(self, a: Any) -> bool:
        return a == self.identity_like(a)

    def same_domain(self, a: Any, b: Any) -> bool:
        return True

    def sort_key(self, a: Any) -> Any:
        return a

    def order(self, a: Any) -> Optional[int]:
        """Ordre connu directement : entier, 0 pour infini, None si inconnu."""
        return None

    def describe(self, a: Any) -> str:
        return repr(a)


_ARITHMETIC: Dict[Backend, Arithmetic] = {}


def register_backend(tag: Backend, arithmetic: Arithmetic) -> None:
    """Enregistre l'arithmétique d'un backend (appelé à l'import des modules de constructions)."""
    _ARITHMETIC[tag] = arithmetic


def _arithmetic(tag: Backend) -> Arithmetic:
    try:
        return _ARITHMETIC[tag]
    except KeyError:
        raise BackendMismatchError(f"backend non enregistré : {tag}")


@dataclass(frozen=True)
class GroupElement:
    tag: Backend
    payload: Any

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return multiply(self, other)

    def __pow__(self, n: int) -> "GroupElement":
        return power(self, n)

    def inverse(self) -> "GroupElement":
        return inverse(self)

    def is_identity(self) -> bool:
        return _arithmetic(self.tag).is_identity(self.payload)

    def sort_key(self) -> Any:
        return _arithmetic(self.tag).sort_key(self.payload)

    def describe(self) -> str:
        return _arithmetic(self.tag).describe(self.payload)

    def __repr__(self) -> str:
        return f"<{self.tag.value} {self.describe()}>"


@dataclass(frozen=True)
class BigOrder:
    value: Optional[int] = None

    def __post_init__(self):
        if self.value is not None and self.value < 1:
            raise ValueError(f"ordre invalide : {self.value}")

    @property
    def is_finite(self) -> bool:
        return self.value is not None

    def __str__(self) -> str:
        return str(self.value) if self.value is not None else "infinite/unknown"

    def to_json(self) -> str:
        return str(self)


# --- arithmétique générique ---

def multiply(a: GroupElement, b: GroupElement) -> GroupElement:
    if a.tag != b.tag:
        raise BackendMismatchError(f"backends différents : {a.tag.value} et {b.tag.value}")
    ops = _arithmetic(a.tag)
    if not ops.same_domain(a.payload, b.payload):
        raise BackendMismatchError(f"domaines différents pour le backend {a.tag.value}")
    return GroupElement(a.tag, ops.multiply(a.payload, b.payload))


def inverse(a: GroupElement) -> GroupElement:
    return GroupElement(a.tag, _arithmetic(a.tag).inverse(a.payload))


def identity_of(a: GroupElement) -> GroupElement:
    return GroupElement(a.tag, _arithmetic(a.tag).identity_like(a.payload))


def commutator(a: GroupElement, b: GroupElement) -> GroupElement:
    """[a,b] = a⁻¹b⁻¹ab."""
    return inverse(a) * inverse(b) * a * b


def conjugate(a: GroupElement, by: GroupElement) -> GroupElement:
    """by · a · by⁻¹."""
    return by * a * inverse(by)


def power(a: GroupElement, n: int) -> GroupElement:
    if n < 0:
        return power(inverse(a), -n)
    result = identity_of(a)
    base = a
    while n:
        if n & 1:
            result = result * base
        base = base * base
        n >>= 1
    return result


def element_order(a: GroupElement, cap: int = DEFAULT_ORDER_CAP) -> BigOrder:
    known = _arithmetic(a.tag).order(a.payload)
    if known is not None:
        return BigOrder(known) if known > 0 else BigOrder()
    current = a
    for k in range(1, cap + 1):
        if current.is_identity():
            return BigOrder(k)
        current = current * a
    return BigOrder()


def element_arithmetic(a: GroupElement, b: Optional[GroupElement], op: str,
                       n: Optional[int] = None) -> Union[GroupElement, BigOrder]:
    """Point d'entrée unique : multiply, inverse, commutator, power ou order."""
    if op == "multiply":
        return multiply(a, b)
    if op == "inverse":
        return inverse(a)
    if op == "commutator":
        return commutator(a, b)
    if op == "power":
        if n is None:
            raise PreconditionError("l'exposant est requis pour power")
        return power(a, n)
    if op == "order":
        return element_order(a)
    raise PreconditionError(f"opération inconnue : {op}")


def evaluate_word(marking: Sequence[GroupElement], word: Word,
                  identity: Optional[GroupElement] = None) -> GroupElement:
    """Évalue un mot signé (lettres 1..ℓ, négatif pour l'inverse) de gauche à droite."""
    if identity is None:
        if not marking:
            raise PreconditionError("marquage vide sans neutre")
        identity = identity_of(marking[0])
    result = identity
    for letter in word:
        index = abs(letter)
        if letter == 0 or index > len(marking):
            raise PreconditionError(f"lettre hors bornes : {letter}", {"letter": letter, "rank": len(marking)})
        result = result * (marking[index - 1] if letter > 0 else inverse(marking[index - 1]))
    return result


def invert_word(word: Word) -> Word:
    return tuple(-letter for letter in reversed(word))


def commutator_word(u: Word, v: Word) -> Word:
    return invert_word(u) + invert_word(v) + tuple(u) + tuple(v)


# --- permutations ---

def _cycle_lengths(p: Sequence[int]) -> List[int]:
    seen = [False] * len(p)
    lengths = []
    for start in range(len(p)):
        if seen[start]:
            continue
        length = 0
        x = start
        while not seen[x]:
            seen[x] = True
            x = p[x]
            length += 1
        lengths.append(length)
    return lengths


class _PermutationArithmetic(Arithmetic):
    # (pq)(x) = q(p(x)) : p d'abord, puis q
    def multiply(self, p, q):
        return tuple(q[i] for i in p)

    def inverse(self, p):
        inv = [0] * len(p)
        for i, j in enumerate(p):
            inv[j] = i
        return tuple(inv)

    def identity_like(self, p):
        return tuple(range(len(p)))

    def is_identity(self, p):
        return all(i == j for i, j in enumerate(p))

    def same_domain(self, p, q):
        return len(p) == len(q)

    def order(self, p):
        return reduce(math.lcm, _cycle_lengths(p), 1)

    def describe(self, p):
        seen = set()
        out = []
        for i in range(len(p)):
            if i in seen or p[i] == i:
                continue
            cycle = [i]
            j = p[i]
            while j != i:
                seen.add(j)
                cycle.append(j)
                j = p[j]
            out.append("(%s)" % " ".join(map(str, cycle)))
        return "".join(out) or "()"


def permutation(images: Iterable[int]) -> GroupElement:
    images = tuple(int(x) for x in images)
    if sorted(images) != list(range(len(images))):
        raise PreconditionError("ce n'est pas une permutation", {"images": list(images)})
    return GroupElement(Backend.PERMUTATION, images)


def perm_from_cycles(n: int, *cycles: Sequence[int]) -> GroupElement:
    """Produit de cycles sur {0,…,n−1}, appliqués de gauche à droite."""
    result = identity_permutation(n)
    for cycle in cycles:
        images = list(range(n))
        for i, j in zip(cycle, cycle[1:]):
            images[i] = j
        if cycle:
            images[cycle[-1]] = cycle[0]
        result = result * permutation(images)
    return result


def identity_permutation(n: int) -> GroupElement:
    return GroupElement(Backend.PERMUTATION, tuple(range(n)))


def perm_sign(p: GroupElement) -> int:
    """Signature d'une permutation : (−1)^(n − nombre de cycles)."""
    if p.tag != Backend.PERMUTATION:
        raise BackendMismatchError("perm_sign attend une permutation")
    parity = (len(p.payload) - len(_cycle_lengths(p.payload))) % 2
    return -1 if parity else 1


# --- matrices sur F_p ---

class _MatrixArithmetic(Arithmetic):
    def multiply(self, a, b):
        p, x = a
        _, y = b
        prod = (np.array(x, dtype=np.int64) @ np.array(y, dtype=np.int64)) % p
        return (p, tuple(map(tuple, prod.tolist())))

    def inverse(self, a):
        p, x = a
        inv = Matrix(x).inv_mod(p)
        return (p, tuple(tuple(int(v) % p for v in inv.row(i)) for i in range(inv.rows)))

    def identity_like(self, a):
        p, x = a
        n = len(x)
        return (p, tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    def same_domain(self, a, b):
        return a[0] == b[0] and len(a[1]) == len(b[1])

    def describe(self, a):
        return "[" + "; ".join(" ".join(map(str, row)) for row in a[1]) + f"] mod {a[0]}"


def matrix(rows: Sequence[Sequence[int]], p: int) -> GroupElement:
    return GroupElement(Backend.MATRIX, (p, tuple(tuple(int(v) % p for v in row) for row in rows)))


def identity_matrix(n: int, p: int) -> GroupElement:
    return matrix(np.eye(n, dtype=np.int64), p)


def elementary_matrix(n: int, i: int, j: int, p: int, coefficient: int = 1) -> GroupElement:
    """e_{i,j}^c = I + c·E_{i,j} (i ≠ j)."""
    if i == j:
        raise PreconditionError("une matrice élémentaire exige i ≠ j", {"i": i})
    rows = np.eye(n, dtype=np.int64)
    rows[i, j] = coefficient
    return matrix(rows, p)


def permutation_matrix(images: Sequence[int], p: int, signs: Optional[Sequence[int]] = None) -> GroupElement:
    """Matrice P avec P[i, π(i)] = signe_i, de sorte que π ↦ P_π soit un homomorphisme."""
    n = len(images)
    rows = np.zeros((n, n), dtype=np.int64)
    for i, j in enumerate(images):
        rows[i, j] = 1 if signs is None else signs[i]
    return matrix(rows, p)


def determinant(g: GroupElement) -> int:
    if g.tag != Backend.MATRIX:
        raise BackendMismatchError("determinant attend une matrice")
    p, rows = g.payload
    return int(Matrix(rows).det()) % p


# --- groupes abéliens de type fini (Z/m, Z, produits) ---

def _residue(modulus: int, value: int) -> int:
    return value % modulus if modulus else value


class _AbelianArithmetic(Arithmetic):
    def multiply(self, a, b):
        moduli, x = a
        return (moduli, tuple(_residue(m, u + v) for m, u, v in zip(moduli, x, b[1])))

    def inverse(self, a):
        moduli, x = a
        return (moduli, tuple(_residue(m, -v) for m, v in zip(moduli, x)))

    def identity_like(self, a):
        return (a[0], (0,) * len(a[0]))

    def is_identity(self, a):
        return not any(a[1])

    def same_domain(self, a, b):
        return a[0] == b[0]

    def sort_key(self, a):
        return a[1]

    def order(self, a):
        moduli, x = a
        if any(m == 0 and v for m, v in zip(moduli, x)):
            return 0
        return reduce(math.lcm, (m // math.gcd(m, v) for m, v in zip(moduli, x) if m), 1)

    def describe(self, a):
        return "(" + ", ".join(map(str, a[1])) + ")"


def abelian_element(moduli: Sequence[int], values: Sequence[int]) -> GroupElement:
    moduli = tuple(moduli)
    return GroupElement(Backend.ABELIAN, (moduli, tuple(_residue(m, v) for m, v in zip(moduli, values))))


# --- groupes diédraux D_n (n = 0 pour D_∞) ---

class _DihedralArithmetic(Arithmetic):
    # (n, r, f) représente ρ^r σ^f avec σρσ = ρ⁻¹
    def multiply(self, a, b):
        n, r1, f1 = a
        _, r2, f2 = b
        return (n, _residue(n, r1 + (-r2 if f1 else r2)), f1 ^ f2)

    def inverse(self, a):
        n, r, f = a
        return a if f else (n, _residue(n, -r), 0)

    def identity_like(self, a):
        return (a[0], 0, 0)

    def is_identity(self, a):
        return a[1] == 0 and a[2] == 0

    def same_domain(self, a, b):
        return a[0] == b[0]

    def sort_key(self, a):
        return (a[2], a[1])

    def order(self, a):
        n, r, f = a
        if f:
            return 2
        if r == 0:
            return 1
        return n // math.gcd(n, r) if n else 0

    def describe(self, a):
        n, r, f = a
        return f"ρ^{r}" + ("σ" if f else "")


# --- produits directs ---

class _ProductArithmetic(Arithmetic):
    def multiply(self, a, b):
        return tuple(x * y for x, y in zip(a, b))

    def inverse(self, a):
        return tuple(inverse(x) for x in a)

    def identity_like(self, a):
        return tuple(identity_of(x) for x in a)

    def is_identity(self, a):
        return all(x.is_identity() for x in a)

    def same_domain(self, a, b):
        return len(a) == len(b) and all(x.tag == y.tag for x, y in zip(a, b))

    def sort_key(self, a):
        return tuple(x.sort_key() for x in a)

    def order(self, a):
        orders = [element_order(x).value for x in a]
        if any(o is None for o in orders):
            return 0
        return reduce(math.lcm, orders, 1)

    def describe(self, a):
        return "(" + ", ".join(x.describe() for x in a) + ")"


def product_element(components: Sequence[GroupElement]) -> GroupElement:
    return GroupElement(Backend.PRODUCT, tuple(components))


register_backend(Backend.PERMUTATION, _PermutationArithmetic())
register_backend(Backend.MATRIX, _MatrixArithmetic())
register_backend(Backend.ABELIAN, _AbelianArithmetic())
register_backend(Backend.DIHEDRAL, _DihedralArithmetic())
register_backend(Backend.PRODUCT, _ProductArithmetic())


# --- groupes marqués ---

@dataclass(frozen=True)
class PermutationRepresentation:
    degree: int
    act: Callable[[GroupElement], Tuple[int, ...]]


@dataclass(frozen=True)
class Closure:
    elements: Tuple[GroupElement, ...]
    complete: bool

    def __len__(self) -> int:
        return len(self.elements)


@dataclass(frozen=True, eq=False)
class MarkedGroup:
    """
    Groupe marqué (G; s_1, …, s_k).
    ambient_order est l'ordre d'un groupe ambiant connu contenant le marquage (borne supérieure).
    """
    name: str
    marking: Tuple[GroupElement, ...]
    identity: GroupElement
    finite: bool = True
    representation: Optional[PermutationRepresentation] = None
    ambient_order: Optional[int] = None
    family: Optional[Tuple[Any, ...]] = None

    @property
    def rank(self) -> int:
        return len(self.marking)

    def with_marking(self, marking: Sequence[GroupElement], name: Optional[str] = None) -> "MarkedGroup":
        return replace(self, marking=tuple(marking), name=name or self.name, family=None)

    def permutation_generators(self) -> List[np.ndarray]:
        if self.representation is None:
            raise PreconditionError(f"{self.name} n'a pas de représentation par permutations")
        return [np.asarray(self.representation.act(s), dtype=np.int64) for s in self.marking]

    @cached_property
    def chain(self) -> StabilizerChain:
        """Chaîne de stabilisateurs du sous-groupe engendré (calculée une seule fois)."""
        chain = StabilizerChain(self.representation.degree if self.representation else 0)
        chain.build(self.permutation_generators(), bound=self.ambient_order)
        return chain

    def order(self, closure_cap: int = DEFAULT_CLOSURE_CAP) -> BigOrder:
        if not self.finite:
            return BigOrder()
        if self.representation is not None:
            return BigOrder(self.chain.order())
        closure = enumerate_subgroup(self.marking, closure_cap, identity=self.identity)
        return BigOrder(len(closure)) if closure.complete else BigOrder()

    def contains(self, element: GroupElement) -> bool:
        """Appartenance au sous-groupe engendré par le marquage."""
        if self.representation is None:
            return element in set(enumerate_subgroup(self.marking, DEFAULT_CLOSURE_CAP, self.identity).elements)
        return self.chain.contains(np.asarray(self.representation.act(element), dtype=np.int64))

    def generates_ambient(self) -> bool:
        return self.ambient_order is not None and self.order().value == self.ambient_order

    def elements(self, cap: int = DEFAULT_CLOSURE_CAP) -> Closure:
        return enumerate_subgroup(self.marking, cap, identity=self.identity)


@dataclass(frozen=True)
class BsgsCertificate:
    order: BigOrder
    chain: StabilizerChain

    def contains(self, element: GroupElement) -> bool:
        return self.chain.contains(np.asarray(element.payload, dtype=np.int64))


def bsgs_order(gens: Sequence[GroupElement], degree: Optional[int] = None,
               bound: Optional[int] = None) -> BsgsCertificate:
    """Ordre exact de ⟨gens⟩ (permutations d'un même domaine) par Schreier–Sims déterministe."""
    if any(g.tag != Backend.PERMUTATION for g in gens):
        raise BackendMismatchError("bsgs_order attend des permutations")
    if gens:
        degree = len(gens[0].payload)
        if any(len(g.payload) != degree for g in gens):
            raise BackendMismatchError("permutations de degrés différents")
    chain = StabilizerChain(degree or 0)
    chain.build([np.asarray(g.payload, dtype=np.int64) for g in gens], bound=bound)
    return BsgsCertificate(BigOrder(chain.order()), chain)


def symmetric_letters(marking: Sequence[GroupElement]) -> List[GroupElement]:
    """s_1, …, s_k puis s_1⁻¹, …, s_k⁻¹."""
    return list(marking) + [inverse(s) for s in marking]


def enumerate_subgroup(gens: Sequence[GroupElement], cap: int,
                       identity: Optional[GroupElement] = None) -> Closure:
    """
    Clôture de ⟨gens⟩ par parcours en largeur (longueur de mot, puis ordre lexicographique).
    Le dépassement du plafond est une valeur (complete=False), pas une erreur.
    """
    if identity is None:
        if not gens:
            raise PreconditionError("neutre requis pour un ensemble générateur vide")
        identity = identity_of(gens[0])
    letters = symmetric_letters(gens)
    seen = {identity}
    ordered = [identity]
    frontier = [identity]
    while frontier:
        next_frontier = []
        for g in frontier:
            for s in letters:
                h = s * g
                if h in seen:
                    continue
                if len(ordered) >= cap:
                    logger.debug("Clôture interrompue au plafond %d", cap)
                    return Closure(tuple(ordered), False)
                seen.add(h)
                ordered.append(h)
                next_frontier.append(h)
        frontier = next_frontier
    return Closure(tuple(ordered), True)


def regular_representation(elements: Sequence[GroupElement]) -> PermutationRepresentation:
    """Action à droite x ↦ x·g sur une énumération complète du groupe."""
    index = {g: i for i, g in enumerate(elements)}
    listed = list(elements)

    def act(g: GroupElement) -> Tuple[int, ...]:
        return tuple(index[x * g] for x in listed)

    return PermutationRepresentation(len(listed), act)


def product_representation(reps: Sequence[PermutationRepresentation]) -> PermutationRepresentation:
    """Action sur la réunion disjointe des domaines des facteurs."""
    offsets = np.cumsum([0] + [r.degree for r in reps[:-1]]).tolist()

    def act(g: GroupElement) -> Tuple[int, ...]:
        images: List[int] = []
        for rep, offset, component in zip(reps, offsets, g.payload):
            images.extend(offset + x for x in rep.act(component))
        return tuple(images)

    return PermutationRepresentation(sum(r.degree for r in reps), act)


def _permutation_group(name: str, marking: Sequence[GroupElement], ambient_order: Optional[int],
                       family: Optional[Tuple[Any, ...]] = None) -> MarkedGroup:
    n = len(marking[0].payload)
    return MarkedGroup(name, tuple(marking), identity_permutation(n),
                       representation=PermutationRepresentation(n, lambda g: g.payload),
                       ambient_order=ambient_order, family=family)


def permutation_group(name: str, marking: Sequence[GroupElement],
                      ambient_order: Optional[int] = None) -> MarkedGroup:
    return _permutation_group(name, marking, ambient_order)


def symmetric_group(n: int) -> MarkedGroup:
    """(Sym(n); (0 1), (0 1 … n−1))."""
    if n < 2:
        return _permutation_group("Sym(1)", [identity_permutation(max(n, 1))], 1)
    marking = [perm_from_cycles(n, [0, 1]), perm_from_cycles(n, list(range(n)))]
    return _permutation_group(f"Sym({n})", marking, math.factorial(n))


def alternating_group(n: int) -> MarkedGroup:
    """(Alt(n); (0 1 2), n-cycle ou (n−1)-cycle selon la parité de n)."""
    if n < 3:
        return _permutation_group(f"Alt({n})", [identity_permutation(max(n, 1))], 1)
    cycle = list(range(n)) if n % 2 else list(range(1, n))
    marking = [perm_from_cycles(n, [0, 1, 2]), perm_from_cycles(n, cycle)]
    family = ("alternating", n) if n >= 5 else None
    return _permutation_group(f"Alt({n})", marking, math.factorial(n) // 2, family)


def abelian_group(moduli: Sequence[int], marking: Optional[Sequence[Sequence[int]]] = None,
                  name: Optional[str] = None) -> MarkedGroup:
    """Groupe abélien Z/m_1 × … (m_i = 0 pour Z), marqué par la base canonique par défaut."""
    moduli = tuple(moduli)
    if marking is None:
        marking = [[int(i == j) for j in range(len(moduli))] for i in range(len(moduli))]
    elements = tuple(abelian_element(moduli, values) for values in marking)
    finite = all(moduli)
    representation = None
    ambient = None
    if finite:
        offsets = np.cumsum((0,) + moduli[:-1]).tolist()

        def act(g: GroupElement) -> Tuple[int, ...]:
            images: List[int] = []
            for m, offset, v in zip(moduli, offsets, g.payload[1]):
                images.extend(offset + (x + v) % m for x in range(m))
            return tuple(images)

        representation = PermutationRepresentation(sum(moduli), act)
        ambient = math.prod(moduli)
    label = name or " × ".join(f"Z/{m}" if m else "Z" for m in moduli)
    family = ("cyclic", moduli[0]) if len(moduli) == 1 and moduli[0] and _is_prime(moduli[0]) else None
    return MarkedGroup(label, elements, abelian_element(moduli, [0] * len(moduli)), finite=finite,
                       representation=representation, ambient_order=ambient, family=family)


def cyclic_group(n: int) -> MarkedGroup:
    """(Z/n; 1), ou (Z; 1) pour n = 0."""
    return abelian_group((n,))


def free_abelian(d: int) -> MarkedGroup:
    return abelian_group((0,) * d)


def _is_prime(n: int) -> bool:
    return bool(isprime(n))


def dihedral(n: Union[int, str]) -> MarkedGroup:
    """(D_n; c_n, d_n) avec c_n, d_n involutions et c_n d_n rotation d'ordre n ; n = 'infinite' pour D_∞."""
    if n in ("infinite", "inf", 0, None):
        c = GroupElement(Backend.DIHEDRAL, (0, 0, 1))
        d = GroupElement(Backend.DIHEDRAL, (0, -1, 1))
        return MarkedGroup("D_inf", (c, d), GroupElement(Backend.DIHEDRAL, (0, 0, 0)), finite=False,
                           family=("dihedral", 0))
    n = int(n)
    if n < 2:
        raise PreconditionError("D_n exige n ≥ 2", {"n": n})
    c = GroupElement(Backend.DIHEDRAL, (n, 0, 1))
    d = GroupElement(Backend.DIHEDRAL, (n, n - 1, 1))
    identity = GroupElement(Backend.DIHEDRAL, (n, 0, 0))
    if n >= 3:
        def act(g: GroupElement) -> Tuple[int, ...]:
            _, r, f = g.payload
            return tuple(((x + r) * (-1 if f else 1)) % n for x in range(n))

        representation = PermutationRepresentation(n, act)
    else:
        closure = enumerate_subgroup((c, d), 16, identity)
        representation = regular_representation(closure.elements)
    return MarkedGroup(f"D_{n}", (c, d), identity, representation=representation,
                       ambient_order=2 * n, family=("dihedral", n))


def matrix_representation(n: int, p: int) -> PermutationRepresentation:
    """Action à droite v ↦ v·M sur les vecteurs non nuls de F_p^n (fidèle sur GL)."""
    codes = np.arange(1, p ** n, dtype=np.int64)
    vectors = np.stack([(codes // p ** (n - 1 - i)) % p for i in range(n)], axis=1)
    weights = np.array([p ** (n - 1 - i) for i in range(n)], dtype=np.int64)

    def act(g: GroupElement) -> Tuple[int, ...]:
        images = (vectors @ np.array(g.payload[1], dtype=np.int64)) % p
        return tuple((images @ weights - 1).tolist())

    return PermutationRepresentation(p ** n - 1, act)


def matrix_group(name: str, marking: Sequence[GroupElement], ambient_order: Optional[int] = None,
                 family: Optional[Tuple[Any, ...]] = None) -> MarkedGroup:
    p, rows = marking[0].payload
    n = len(rows)
    return MarkedGroup(name, tuple(marking), identity_matrix(n, p),
                       representation=matrix_representation(n, p) if p ** n <= 1 << 16 else None,
                       ambient_order=ambient_order, family=family)


def special_linear_order(n: int, p: int) -> int:
    """|SL(n, F_p)| = p^{n(n−1)/2} · Π_{i=2..n} (p^i − 1)."""
    return p ** (n * (n - 1) // 2) * math.prod(p ** i - 1 for i in range(2, n + 1))


def involution_count(mg: MarkedGroup) -> int:
    return sum(1 for s in mg.marking if element_order(s).value == 2)
