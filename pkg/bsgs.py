import logging
import random
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from exceptions import PreconditionError

logger = logging.getLogger(__name__)

# Les permutations sont des tableaux numpy d'images ; (p*q)[x] = q[p[x]].
Perm = np.ndarray

DEFAULT_SEED = 20240531
STALL_ROUNDS = 48


def mult_perm(p: Perm, q: Perm) -> Perm:
    """p puis q."""
    return q[p]


def inv_perm(p: Perm) -> Perm:
    inv = np.empty_like(p)
    inv[p] = np.arange(len(p), dtype=p.dtype)
    return inv


def first_moved_point(p: Perm) -> Optional[int]:
    moved = np.flatnonzero(p != np.arange(len(p)))
    return int(moved[0]) if len(moved) else None


@dataclass
class _Level:
    """Un niveau de la chaîne : point de base, générateurs forts et vecteur de Schreier."""
    base: int
    gens: List[Perm] = field(default_factory=list)
    invs: List[Perm] = field(default_factory=list)
    tree: Optional[np.ndarray] = None
    orbit: List[int] = field(default_factory=list)

    def init_tree(self, degree: int) -> None:
        self.tree = np.full(degree, -1, dtype=np.int32)
        # -2 marque le point de base (racine)
        self.tree[self.base] = -2
        self.orbit = [self.base]

    def add_generator(self, gen: Perm, inv: Perm) -> None:
        """Ajoute un générateur et étend l'orbite (parcours vectorisé)."""
        self.gens.append(gen)
        self.invs.append(inv)
        k = len(self.gens) - 1
        frontier = self._extend(np.asarray(self.orbit, dtype=np.int64), [k])
        while len(frontier):
            frontier = self._extend(frontier, range(len(self.gens)))

    def _extend(self, points: np.ndarray, gen_indices) -> np.ndarray:
        found = []
        for k in gen_indices:
            images = self.gens[k][points]
            fresh = np.unique(images[self.tree[images] == -1])
            if len(fresh):
                self.tree[fresh] = k
                found.append(fresh)
        if not found:
            return np.empty(0, dtype=np.int64)
        fresh = np.concatenate(found)
        self.orbit.extend(fresh.tolist())
        return fresh

    def in_orbit(self, a: int) -> bool:
        return self.tree[a] != -1

    def to_base(self, a: int, p: Perm) -> Perm:
        """Compose p avec un élément du transversal ramenant a sur le point de base."""
        while a != self.base:
            k = self.tree[a]
            inv = self.invs[k]
            a = int(inv[a])
            p = inv[p]
        return p


class ProductReplacement:
    """
    Éléments pseudo-aléatoires par remplacement de produits (variante « rattle »).
    Déterministe pour une graine donnée.
    """

    def __init__(self, gens: Sequence[Perm], degree: int, seed: int = DEFAULT_SEED,
                 extra_slots: int = 8, accumulators: int = 4, scramble: int = 60):
        self.rng = random.Random(seed)
        identity = np.arange(degree, dtype=np.int64)
        self.reservoir = [identity] * extra_slots + [np.asarray(g, dtype=np.int64) for g in gens]
        self.accus = [identity] * accumulators
        self.accu = 0
        for _ in range(max(scramble, 10 * len(gens))):
            self.stir()

    def stir(self) -> Perm:
        rng = self.rng
        i = rng.randrange(1, len(self.reservoir))
        j = rng.randrange(1, len(self.reservoir))
        p = self.reservoir[i]
        if rng.randrange(2):
            p = inv_perm(p)
        self.reservoir[0] = c = mult_perm(self.reservoir[0], p)
        if rng.randrange(2):
            c = inv_perm(c)
        self.reservoir[j] = q = mult_perm(self.reservoir[j], c)
        if rng.randrange(2):
            q = inv_perm(q)
        self.accu = (self.accu + 1) % len(self.accus)
        self.accus[self.accu] = r = mult_perm(self.accus[self.accu], q)
        return r


class StabilizerChain:
    """
    Base et système générateur fort d'un groupe de permutations de degré fixé.

    Construction :
    - avec une borne supérieure connue de l'ordre, on tamise des éléments pseudo-aléatoires
      jusqu'à ce que le produit des orbites (borne inférieure) atteigne la borne ;
    - sinon, ou si la borne n'est pas atteinte, vérification complète par générateurs de Schreier.
    Dans les deux cas l'ordre renvoyé est exact.
    """

    def __init__(self, degree: int, seed: int = DEFAULT_SEED):
        self.degree = degree
        self.seed = seed
        self.levels: List[_Level] = []
        self.identity = np.arange(degree, dtype=np.int64)
        self.certified_by = "trivial"

    # --- requêtes ---

    @property
    def base(self) -> List[int]:
        return [level.base for level in self.levels]

    def order(self) -> int:
        result = 1
        for level in self.levels:
            result *= len(level.orbit)
        return result

    def strong_generators(self) -> List[Perm]:
        return list(self.levels[0].gens) if self.levels else []

    def sift(self, p: Perm, start: int = 0) -> Tuple[Perm, int]:
        """Tamise p à partir du niveau start ; renvoie (résidu, niveau d'arrêt)."""
        for index in range(start, len(self.levels)):
            level = self.levels[index]
            a = int(p[level.base])
            if not level.in_orbit(a):
                return p, index
            p = level.to_base(a, p)
        return p, len(self.levels)

    def contains(self, p: Perm) -> bool:
        if len(p) != self.degree:
            return False
        residue, _ = self.sift(np.asarray(p, dtype=np.int64))
        return bool(np.array_equal(residue, self.identity))

    # --- construction ---

    def build(self, gens: Sequence[Perm], bound: Optional[int] = None) -> "StabilizerChain":
        gens = [np.asarray(g, dtype=np.int64) for g in gens]
        for g in gens:
            if len(g) != self.degree:
                raise PreconditionError("degré incohérent", {"expected": self.degree, "got": len(g)})
            self._sift_and_add(g)
        if not self.levels:
            return self
        if bound is not None:
            self._build_against_bound(gens, bound)
            if self.order() == bound:
                self.certified_by = "bound"
                logger.debug("Chaîne certifiée par la borne %d (base de longueur %d)", bound, len(self.levels))
                return self
            logger.debug("Borne %d non atteinte (%d), vérification complète", bound, self.order())
        self._verify_schreier()
        self.certified_by = "schreier"
        return self

    def _sift_and_add(self, p: Perm) -> bool:
        residue, index = self.sift(p)
        if np.array_equal(residue, self.identity):
            return False
        self._add_strong_generator(residue, index)
        return True

    def _add_strong_generator(self, gen: Perm, index: int) -> None:
        """gen fixe les points de base des niveaux < index."""
        if index == len(self.levels):
            point = first_moved_point(gen)
            level = _Level(point)
            level.init_tree(self.degree)
            self.levels.append(level)
        inv = inv_perm(gen)
        for level in self.levels[: index + 1]:
            level.add_generator(gen, inv)

    def _build_against_bound(self, gens: Sequence[Perm], bound: int) -> None:
        rng = ProductReplacement(gens, self.degree, seed=self.seed)
        stalled = 0
        while self.order() < bound and stalled < STALL_ROUNDS:
            if self._sift_and_add(rng.stir()):
                stalled = 0
            else:
                stalled += 1
        if self.order() > bound:
            raise PreconditionError("la borne fournie est inférieure à l'ordre",
                                    {"bound": str(bound), "lower": str(self.order())})

    def _transversal(self, level: _Level) -> dict:
        """u_a⁻¹ pour chaque a de l'orbite : b^{u_a} = a."""
        return {a: level.to_base(a, self.identity) for a in level.orbit}

    def _first_failing(self, index: int) -> Optional[Tuple[Perm, int]]:
        level = self.levels[index]
        to_base = self._transversal(level)
        for a in level.orbit:
            u_a = inv_perm(to_base[a])
            for gen in level.gens:
                schreier = mult_perm(mult_perm(u_a, gen), to_base[int(gen[a])])
                residue, at = self.sift(schreier, index + 1)
                if not np.array_equal(residue, self.identity):
                    return residue, at
        return None

    def _verify_schreier(self) -> None:
        index = len(self.levels) - 1
        while index >= 0:
            failing = self._first_failing(index)
            if failing is None:
                index -= 1
                continue
            residue, at = failing
            self._add_strong_generator(residue, at)
            index = min(at, len(self.levels) - 1)
