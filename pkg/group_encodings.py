import logging
import math
import random
from collections import defaultdict
from dataclasses import dataclass, replace
from functools import lru_cache
from itertools import permutations
from typing import Any, Dict, List, Optional, Sequence, Set, Tuple

import numpy as np
from sympy import Matrix, isprime

from core_groups import (
    Arithmetic, Backend, GroupElement, MarkedGroup, Word, commutator, commutator_word,
    elementary_matrix, element_order, evaluate_word, identity_of, identity_permutation, inverse,
    invert_word, matrix_group, perm_from_cycles, perm_sign, permutation, permutation_group,
    permutation_matrix, register_backend, special_linear_order,
)
from exceptions import BackendMismatchError, PreconditionError

logger = logging.getLogger(__name__)

EXHAUSTIVE_ORE_MAX_DEGREE = 7
STRUCTURED_ORE_BUDGET = 20_000


# --- éléments limites : Sym_{<ℵ0}(G∞) ⋊ G∞ ---

def _map_key(entries) -> Tuple:
    return tuple((x.sort_key(), v.sort_key()) for x, v in entries)


class _FinitaryPermutationArithmetic(Arithmetic):
    """
    (σ, g) agit par x ↦ σ(x)·g, σ de support fini.
    (σ1, g1)(σ2, g2) = (σ1 puis σ2', g1 g2) avec σ2'(y) = σ2(y·g1)·g1⁻¹.
    """

    def multiply(self, a, b):
        s1, g1 = a
        s2, g2 = b
        g1_inv = inverse(g1)
        first = dict(s1)
        second = {y * g1_inv: v * g1_inv for y, v in s2}
        result = {}
        for x in set(first) | set(second):
            y = first.get(x, x)
            z = second.get(y, y)
            if z != x:
                result[x] = z
        return (tuple(sorted(result.items(), key=lambda item: item[0].sort_key())), g1 * g2)

    def inverse(self, a):
        s, g = a
        values = {v * g: y * g for y, v in s}
        return (tuple(sorted(values.items(), key=lambda item: item[0].sort_key())), inverse(g))

    def identity_like(self, a):
        return ((), identity_of(a[1]))

    def is_identity(self, a):
        return not a[0] and a[1].is_identity()

    def sort_key(self, a):
        return (a[1].sort_key(), _map_key(a[0]))

    def describe(self, a):
        s, g = a
        moved = ", ".join(f"{x.describe()}→{v.describe()}" for x, v in s) or "id"
        return f"[{moved}] ⋊ {g.describe()}"


class _FinitaryMatrixArithmetic(Arithmetic):
    """
    (A, g) avec A = I + D, D à support fini indexé par G∞ ; g agit par la matrice de permutation de x ↦ x·g.
    (A1, g1)(A2, g2) = (A1 · A2', g1 g2) où A2' déplace (r, c) en (r·g1⁻¹, c·g1⁻¹).
    """

    def multiply(self, a, b):
        p, d1, g1 = a
        _, d2, g2 = b
        g1_inv = inverse(g1)
        first = dict(d1)
        second = {(r * g1_inv, c * g1_inv): v for (r, c), v in d2}
        result = defaultdict(int)
        for key, v in first.items():
            result[key] += v
        for key, v in second.items():
            result[key] += v
        by_row = defaultdict(list)
        for (r, c), v in second.items():
            by_row[r].append((c, v))
        for (r, c), v in first.items():
            for c2, v2 in by_row.get(c, ()):
                result[(r, c2)] += v * v2
        return (p, _sparse(result, p), g1 * g2)

    def inverse(self, a):
        p, d, g = a
        if not d:
            return (p, (), inverse(g))
        points = sorted({x for (r, c), _ in d for x in (r, c)}, key=lambda x: x.sort_key())
        index = {x: i for i, x in enumerate(points)}
        block = np.eye(len(points), dtype=np.int64)
        for (r, c), v in d:
            block[index[r], index[c]] += v
        inv = Matrix(block.tolist()).inv_mod(p)
        values = {}
        for i, r in enumerate(points):
            for j, c in enumerate(points):
                v = (int(inv[i, j]) - int(i == j)) % p
                if v:
                    values[(r * g, c * g)] = v
        return (p, _sparse(values, p), inverse(g))

    def identity_like(self, a):
        return (a[0], (), identity_of(a[2]))

    def is_identity(self, a):
        return not a[1] and a[2].is_identity()

    def same_domain(self, a, b):
        return a[0] == b[0]

    def sort_key(self, a):
        return (a[2].sort_key(), tuple(((r.sort_key(), c.sort_key()), v) for (r, c), v in a[1]))

    def describe(self, a):
        p, d, g = a
        entries = ", ".join(f"({r.describe()},{c.describe()}):{v}" for (r, c), v in d) or "I"
        return f"[{entries}] ⋊ {g.describe()} mod {p}"


def _sparse(values: Dict[Tuple[GroupElement, GroupElement], int], p: int) -> Tuple:
    items = [(key, v % p) for key, v in values.items() if v % p]
    return tuple(sorted(items, key=lambda item: (item[0][0].sort_key(), item[0][1].sort_key())))


register_backend(Backend.FINITARY_PERMUTATION, _FinitaryPermutationArithmetic())
register_backend(Backend.FINITARY_MATRIX, _FinitaryMatrixArithmetic())


def finitary_transposition(gamma: GroupElement) -> GroupElement:
    e = identity_of(gamma)
    return GroupElement(Backend.FINITARY_PERMUTATION,
                        (tuple(sorted({e: gamma, gamma: e}.items(), key=lambda item: item[0].sort_key())), e))


def finitary_shift(gamma: GroupElement) -> GroupElement:
    return GroupElement(Backend.FINITARY_PERMUTATION, ((), gamma))


# --- encodages finis ---

def _check_no_identity(mg: MarkedGroup) -> None:
    for j, s in enumerate(mg.marking, 1):
        if s.is_identity():
            raise PreconditionError(f"le générateur {j} est le neutre", {"index": j})


@dataclass(frozen=True)
class _Regular:
    elements: Tuple[GroupElement, ...]
    index: Dict[GroupElement, int]


def _regular(mg: MarkedGroup, cap: int) -> _Regular:
    closure = mg.elements(cap)
    if not closure.complete:
        raise PreconditionError(f"{mg.name} : énumération incomplète (plafond {cap})")
    return _Regular(closure.elements, {g: i for i, g in enumerate(closure.elements)})


def chi(reg: _Regular, gamma: GroupElement) -> GroupElement:
    """Transposition sur {e, γ}."""
    return perm_from_cycles(len(reg.elements), [0, reg.index[gamma]])


def theta(reg: _Regular, gamma: GroupElement) -> GroupElement:
    """Multiplication à droite x ↦ x·γ."""
    return permutation(reg.index[x * gamma] for x in reg.elements)


def theta_signs(mg: MarkedGroup, cap: int = 200_000) -> List[int]:
    reg = _regular(mg, cap)
    return [perm_sign(theta(reg, s)) for s in mg.marking]


def sym_encode(mg: MarkedGroup, cap: int = 200_000) -> MarkedGroup:
    """(χ_{s_1}, …, χ_{s_k}, θ_{s_1}, …, θ_{s_k}) dans Sym(G), ou dans Sym_{<ℵ0}(G∞) ⋊ G∞ si G est infini."""
    _check_no_identity(mg)
    if not mg.finite:
        marking = [finitary_transposition(s) for s in mg.marking] + [finitary_shift(s) for s in mg.marking]
        return MarkedGroup(f"Sym<({mg.name}) ⋊ {mg.name}", tuple(marking), finitary_shift(mg.identity), finite=False)
    reg = _regular(mg, cap)
    marking = [chi(reg, s) for s in mg.marking] + [theta(reg, s) for s in mg.marking]
    return permutation_group(f"Sym({mg.name})", marking, math.factorial(len(reg.elements)))


def _alt_marking(chis: Sequence[GroupElement], thetas: Sequence[GroupElement]) -> List[GroupElement]:
    c1 = chis[0]
    return ([c1 * c for c in chis[1:]] + list(thetas) + [c1 * t * c1 for t in thetas])


def alt_encode(mg: MarkedGroup, cap: int = 200_000) -> MarkedGroup:
    """(χ1χ2, …, χ1χk, θ1, …, θk, χ1θ1χ1, …, χ1θkχ1) : (3k−1)-marquage de Alt(G)."""
    _check_no_identity(mg)
    if not mg.finite:
        chis = [finitary_transposition(s) for s in mg.marking]
        thetas = [finitary_shift(s) for s in mg.marking]
        return MarkedGroup(f"Alt<({mg.name}) ⋊ {mg.name}", tuple(_alt_marking(chis, thetas)),
                           finitary_shift(mg.identity), finite=False)
    reg = _regular(mg, cap)
    thetas = [theta(reg, s) for s in mg.marking]
    for j, t in enumerate(thetas, 1):
        if perm_sign(t) < 0:
            raise PreconditionError(f"θ du générateur {j} est impair", {"index": j, "sign": -1})
    chis = [chi(reg, s) for s in mg.marking]
    n = len(reg.elements)
    encoded = permutation_group(f"Alt({mg.name})", _alt_marking(chis, thetas), math.factorial(n) // 2)
    if n >= 5:
        encoded = replace(encoded, family=("alternating", n))
    return encoded


# --- encodage dans SL ---

@dataclass(frozen=True)
class CertificateEntry:
    row: int
    col: int
    word: Word


@dataclass(frozen=True)
class EliminationCertificate:
    """Mots du marquage donnant chaque matrice élémentaire e_{r,c}^1."""
    size: int
    p: int
    entries: Tuple[CertificateEntry, ...]

    def target(self, entry: CertificateEntry) -> GroupElement:
        return elementary_matrix(self.size, entry.row, entry.col, self.p)

    def to_json(self) -> List[Dict[str, Any]]:
        return [{"target": [list(r) for r in self.target(e).payload[1]], "word": list(e.word)}
                for e in self.entries]


class _Eliminator:
    """
    Élimination de Gauss par blocs : on manipule des e_{ij}^A = I + E_{ij} ⊗ A (i ≠ j blocs).
    Règles : conjugaison par les lettres non élémentaires, [e_ij^A, e_jk^B] = e_ik^{AB},
    e_ij^A e_ij^B = e_ij^{A+B}, inverse = e_ij^{−A}.
    """

    def __init__(self, marking: Sequence[GroupElement], block_size: int):
        self.p = marking[0].payload[0]
        self.b = block_size
        self.n = len(marking[0].payload[1])
        self.blocks = self.n // block_size
        self.store: Dict[Tuple[int, int], Dict[bytes, Tuple[np.ndarray, Word]]] = defaultdict(dict)
        self.movers: List[Tuple[np.ndarray, np.ndarray, int]] = []
        self.one = np.eye(block_size, dtype=np.int64)
        queue = []
        for letter, g in enumerate(marking, 1):
            m = np.array(g.payload[1], dtype=np.int64)
            parsed = self._parse(m)
            if parsed is None:
                self.movers.append((m, np.array(inverse(g).payload[1], dtype=np.int64), letter))
            else:
                queue.extend(self._add(*parsed, (letter,)))
        self._conjugation_closure(queue)

    def _key(self, a: np.ndarray) -> bytes:
        return (a % self.p).astype(np.int64).tobytes()

    def _parse(self, m: np.ndarray) -> Optional[Tuple[int, int, np.ndarray]]:
        d = (m - np.eye(self.n, dtype=np.int64)) % self.p
        rows, cols = np.nonzero(d)
        if not len(rows):
            return None
        bi, bj = set((rows // self.b).tolist()), set((cols // self.b).tolist())
        if len(bi) != 1 or len(bj) != 1:
            return None
        i, j = bi.pop(), bj.pop()
        if i == j:
            return None
        return i, j, d[i * self.b:(i + 1) * self.b, j * self.b:(j + 1) * self.b]

    def _matrix(self, i: int, j: int, a: np.ndarray) -> np.ndarray:
        m = np.eye(self.n, dtype=np.int64)
        m[i * self.b:(i + 1) * self.b, j * self.b:(j + 1) * self.b] = a % self.p
        return m

    def _add(self, i: int, j: int, a: np.ndarray, word: Word) -> List[Tuple[int, int, bytes]]:
        added = []
        for value, w in ((a % self.p, word), ((-a) % self.p, invert_word(word))):
            key = self._key(value)
            if key not in self.store[(i, j)]:
                self.store[(i, j)][key] = (value, w)
                added.append((i, j, key))
        return added

    def word(self, i: int, j: int, a: np.ndarray) -> Optional[Word]:
        found = self.store[(i, j)].get(self._key(a))
        return found[1] if found else None

    def _conjugation_closure(self, queue: List[Tuple[int, int, bytes]]) -> None:
        while queue:
            i, j, key = queue.pop(0)
            a, w = self.store[(i, j)][key]
            m = self._matrix(i, j, a)
            for mover, mover_inv, letter in self.movers:
                for conj, cw in (((mover_inv @ m @ mover) % self.p, (-letter,) + w + (letter,)),
                                 ((mover @ m @ mover_inv) % self.p, (letter,) + w + (-letter,))):
                    parsed = self._parse(conj)
                    if parsed is not None:
                        queue.extend(self._add(*parsed, cw))

    def pairs(self) -> List[Tuple[int, int]]:
        return [(i, j) for i in range(self.blocks) for j in range(self.blocks) if i != j]

    def product(self, i: int, k: int, j: int, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """e_ij^{AB} = [e_ik^A, e_kj^B]."""
        ab = (a @ b) % self.p
        if self.word(i, j, ab) is None:
            self._add(i, j, ab, commutator_word(self.word(i, k, a), self.word(k, j, b)))
        return ab

    def close_scalar(self) -> None:
        """Fermeture par commutateurs des e_ij^1."""
        changed = True
        while changed:
            changed = False
            known = [pair for pair in self.pairs() if self.word(*pair, self.one) is not None]
            for (i, j) in known:
                for (j2, k) in known:
                    if j2 == j and k != i and self.word(i, k, self.one) is None:
                        self.product(i, j, k, self.one, self.one)
                        changed = True

    def transport(self, a: np.ndarray) -> None:
        """Propage e^A d'une paire de blocs à toutes les autres."""
        changed = True
        while changed:
            changed = False
            for (i, j) in self.pairs():
                if self.word(i, j, a) is None:
                    continue
                for l in range(self.blocks):
                    if l in (i, j):
                        continue
                    if self.word(i, l, a) is None:
                        self.product(i, j, l, a, self.one)
                        changed = True
                    if self.word(l, j, a) is None:
                        self.product(l, i, j, self.one, a)
                        changed = True

    def add_same_pair(self, i: int, j: int, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        total = (a + b) % self.p
        if self.word(i, j, total) is None:
            self._add(i, j, total, self.word(i, j, a) + self.word(i, j, b))
        return total


def elimination_certificate(marking: Sequence[GroupElement], block_size: int = 1,
                            ring: Optional[Tuple[np.ndarray, np.ndarray]] = None) -> EliminationCertificate:
    """
    Certificat constructif ⟨marquage⟩ = SL(n, F_p) : un mot pour chaque e_{r,c}^1.
    ring = (x, y) : pour des blocs de taille l' > 1, E_ab = y^s (x − 1) y^t avec s = −a, t = b − 1.
    """
    if any(g.tag != Backend.MATRIX for g in marking):
        raise BackendMismatchError("le certificat d'élimination attend des matrices")
    elim = _Eliminator(marking, block_size)
    b, p, n = block_size, elim.p, elim.n
    if elim.blocks < 3 and block_size > 1:
        raise PreconditionError("au moins trois blocs sont nécessaires", {"blocks": elim.blocks})
    elim.close_scalar()
    missing = [pair for pair in elim.pairs() if elim.word(*pair, elim.one) is None]
    if missing:
        raise PreconditionError("élimination incomplète : paires de blocs inaccessibles", {"missing": missing[:10]})

    units: Dict[Tuple[int, int], np.ndarray] = {}
    if b == 1:
        units[(0, 0)] = elim.one
    else:
        if ring is None:
            raise PreconditionError("blocs de taille > 1 : générateurs d'anneau requis")
        x, y = (np.asarray(r, dtype=np.int64) % p for r in ring)
        for seed in (x, y):
            if not any(elim.word(*pair, seed) is not None for pair in elim.pairs()):
                raise PreconditionError("générateur d'anneau absent du marquage")
            elim.transport(seed)
        e01 = elim.add_same_pair(0, 1, x, (-elim.one) % p)
        elim.transport(e01)
        powers = [elim.one]
        for s in range(1, b):
            powers.append(elim.product(0, 2, 1, powers[-1], y))
            elim.transport(powers[-1])
        for a_idx in range(b):
            for b_idx in range(b):
                s, t = (-a_idx) % b, (b_idx - 1) % b
                left = elim.product(0, 3, 2, powers[s], e01)
                unit = elim.product(0, 2, 1, left, powers[t])
                elim.transport(unit)
                units[(a_idx, b_idx)] = unit

    entries = []
    for r in range(n):
        for c in range(n):
            if r == c:
                continue
            (i, a_idx), (j, b_idx) = divmod(r, b), divmod(c, b)
            if i != j:
                word = elim.word(i, j, units[(a_idx, b_idx)])
            else:
                k = (i + 1) % elim.blocks
                word = commutator_word(elim.word(i, k, units[(a_idx, 0)]), elim.word(k, i, units[(0, b_idx)]))
            entries.append(CertificateEntry(r, c, word))
    logger.debug("Certificat d'élimination : %d entrées, longueur max %d", len(entries),
                 max(len(e.word) for e in entries))
    return EliminationCertificate(n, p, tuple(entries))


def verify_certificate(marking: Sequence[GroupElement], certificate: EliminationCertificate) -> bool:
    """Réévalue chaque mot et le compare à sa matrice élémentaire cible."""
    return all(evaluate_word(marking, e.word) == certificate.target(e) for e in certificate.entries)


@dataclass(frozen=True)
class SLEncoding:
    group: MarkedGroup
    certificate: Optional[EliminationCertificate]


def sl_encode(mg: MarkedGroup, p: int, cap: int = 200_000, certify: bool = True) -> SLEncoding:
    """(σ_{s_1}, …, σ_{s_k}, τ_{s_1}, …, τ_{s_k}) avec σ_γ = e_{e,γ}^1 et τ_γ matrice de θ_γ."""
    if not isprime(p):
        raise PreconditionError(f"{p} n'est pas premier", {"p": p})
    _check_no_identity(mg)
    if not mg.finite:
        e = mg.identity
        sigmas = [GroupElement(Backend.FINITARY_MATRIX, (p, (((e, s), 1),), e)) for s in mg.marking]
        taus = [GroupElement(Backend.FINITARY_MATRIX, (p, (), s)) for s in mg.marking]
        group = MarkedGroup(f"SL<({mg.name}, F_{p})", tuple(sigmas + taus),
                            GroupElement(Backend.FINITARY_MATRIX, (p, (), e)), finite=False)
        return SLEncoding(group, None)
    reg = _regular(mg, cap)
    n = len(reg.elements)
    thetas = [theta(reg, s) for s in mg.marking]
    for j, t in enumerate(thetas, 1):
        if perm_sign(t) < 0:
            raise PreconditionError(f"θ du générateur {j} est impair", {"index": j, "sign": -1})
    sigmas = [elementary_matrix(n, 0, reg.index[s], p) for s in mg.marking]
    taus = [permutation_matrix(t.payload, p) for t in thetas]
    group = matrix_group(f"SL({mg.name}, F_{p})", sigmas + taus, special_linear_order(n, p), ("psl", n, p))
    certificate = elimination_certificate(group.marking) if certify else None
    return SLEncoding(group, certificate)


# --- commutateurs d'Ore ---

@dataclass(frozen=True)
class OreWitness:
    target: GroupElement
    eta: Optional[GroupElement]
    zeta: Optional[GroupElement]
    method: str
    exhausted: bool = False

    @property
    def found(self) -> bool:
        return self.eta is not None


@lru_cache(maxsize=8)
def _alternating_array(n: int) -> np.ndarray:
    """Éléments de Alt(n) en ordre lexicographique des images."""
    rows = [p for p in permutations(range(n)) if perm_sign(GroupElement(Backend.PERMUTATION, p)) > 0]
    return np.array(rows, dtype=np.int64)


def _orders(array: np.ndarray) -> np.ndarray:
    return np.array([element_order(GroupElement(Backend.PERMUTATION, tuple(r))).value for r in array.tolist()])


def _exhaustive_ore(target: GroupElement, order_constraint: Optional[Set[int]]) -> OreWitness:
    n = len(target.payload)
    elements = _alternating_array(n)
    inverses = np.argsort(elements, axis=1)
    t = np.asarray(target.payload, dtype=np.int64)
    allowed = np.ones(len(elements), dtype=bool)
    if order_constraint:
        allowed = np.isin(_orders(elements), sorted(order_constraint))
    candidates = np.flatnonzero(allowed)
    zetas, zeta_invs = elements[candidates], inverses[candidates]
    for e in candidates:
        eta = elements[e]
        # [η, ζ] = t  ⟺  ζ⁻¹ η ζ = η t
        wanted = t[eta]
        conjugated = np.take_along_axis(zetas, eta[zeta_invs], axis=1)
        hits = np.flatnonzero((conjugated == wanted).all(axis=1))
        if len(hits):
            return OreWitness(target, permutation(eta.tolist()), permutation(zetas[hits[0]].tolist()), "exhaustive")
    return OreWitness(target, None, None, "exhaustive", exhausted=True)


def _cycles(p: Sequence[int]) -> List[List[int]]:
    seen = [False] * len(p)
    out = []
    for start in range(len(p)):
        if seen[start]:
            continue
        cycle = []
        x = start
        while not seen[x]:
            seen[x] = True
            cycle.append(x)
            x = p[x]
        out.append(cycle)
    return out


def _conjugator(alpha: Sequence[int], beta: Sequence[int]) -> Optional[List[int]]:
    """ζ pair avec ζ⁻¹ α ζ = β, ou None si aucun alignement pair n'existe."""
    ca = sorted(_cycles(alpha), key=len)
    cb = sorted(_cycles(beta), key=len)
    if [len(c) for c in ca] != [len(c) for c in cb]:
        return None
    zeta = [0] * len(alpha)
    for x, y in zip(ca, cb):
        for u, v in zip(x, y):
            zeta[u] = v
    if perm_sign(GroupElement(Backend.PERMUTATION, tuple(zeta))) > 0:
        return zeta
    # correction de parité par un élément impair du centralisateur de α
    centralizer = None
    even = next((c for c in ca if len(c) % 2 == 0), None)
    fixed = [c[0] for c in ca if len(c) == 1]
    if even is not None:
        centralizer = {u: even[(i + 1) % len(even)] for i, u in enumerate(even)}
    elif len(fixed) >= 2:
        centralizer = {fixed[0]: fixed[1], fixed[1]: fixed[0]}
    else:
        for c1, c2 in zip(ca, ca[1:]):
            if len(c1) == len(c2):
                centralizer = {**{u: v for u, v in zip(c1, c2)}, **{v: u for u, v in zip(c1, c2)}}
                break
    if centralizer is None:
        return None
    # ζ' = c puis ζ
    return [zeta[centralizer.get(x, x)] for x in range(len(alpha))]


def _structured_ore(target: GroupElement, order_constraint: Optional[Set[int]], seed: int) -> OreWitness:
    n = len(target.payload)
    t = list(target.payload)
    rng = random.Random(seed)
    for _ in range(STRUCTURED_ORE_BUDGET):
        eta = list(range(n))
        rng.shuffle(eta)
        if perm_sign(GroupElement(Backend.PERMUTATION, tuple(eta))) < 0:
            eta[0], eta[1] = eta[1], eta[0]
        eta_el = permutation(eta)
        if order_constraint and element_order(eta_el).value not in order_constraint:
            continue
        zeta = _conjugator(eta, [t[x] for x in eta])
        if zeta is None:
            continue
        zeta_el = permutation(zeta)
        if order_constraint and element_order(zeta_el).value not in order_constraint:
            continue
        if commutator(eta_el, zeta_el) == target:
            return OreWitness(target, eta_el, zeta_el, "structured")
    return OreWitness(target, None, None, "structured", exhausted=True)


def ore_commutator(target: GroupElement, order_constraint: Optional[Sequence[int]] = None,
                   seed: int = 0) -> OreWitness:
    """
    (η, ζ) dans Alt(n) avec [η, ζ] = target.
    Jusqu'à n = 7 : recherche exhaustive, témoin lexicographiquement minimal.
    Au-delà : η pair tel que η et η·target soient conjugués, ζ construit par alignement des cycles.
    """
    if target.tag != Backend.PERMUTATION:
        raise BackendMismatchError("ore_commutator attend une permutation")
    n = len(target.payload)
    if n < 5:
        raise PreconditionError("Alt(n) exige n ≥ 5 pour les commutateurs d'Ore", {"n": n})
    if perm_sign(target) < 0:
        raise PreconditionError("la cible est impaire")
    constraint = set(order_constraint) if order_constraint else None
    if target.is_identity() and not constraint:
        identity = identity_permutation(n)
        return OreWitness(target, identity, identity, "trivial")
    if n <= EXHAUSTIVE_ORE_MAX_DEGREE:
        witness = _exhaustive_ore(target, constraint)
    else:
        witness = _structured_ore(target, constraint, seed)
    if witness.exhausted:
        logger.warning("Aucun témoin d'Ore pour %s (contrainte %s)", target.describe(), constraint)
    return witness
