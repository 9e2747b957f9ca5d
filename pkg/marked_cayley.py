import logging
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, List, Optional, Sequence, Tuple

from core_groups import GroupElement, MarkedGroup, Word, evaluate_word, inverse
from exceptions import PreconditionError, ResourceCapExceeded

logger = logging.getLogger(__name__)

DEFAULT_BALL_CAP = 2_000_000

Edge = Tuple[int, int, int]


@dataclass(frozen=True)
class RootedBall:
    """
    Boule de rayon R du diagramme de Cayley, enracinée au neutre.
    Arêtes (source, cible, couleur) avec cible = s_couleur · source, les deux extrémités dans la boule.
    """
    radius: int
    color_count: int
    vertices: Tuple[GroupElement, ...]
    distances: Tuple[int, ...]
    edges: Tuple[Edge, ...]

    @cached_property
    def outgoing(self) -> Dict[Tuple[int, int], int]:
        return {(src, color): dst for src, dst, color in self.edges}

    @cached_property
    def incoming(self) -> Dict[Tuple[int, int], int]:
        return {(dst, color): src for src, dst, color in self.edges}

    def __len__(self) -> int:
        return len(self.vertices)

    def to_json(self) -> Dict[str, Any]:
        return {
            "radius": self.radius,
            "vertices": [{"dist": d} for d in self.distances],
            "edges": [{"src": s, "dst": t, "color": c, "dir": 1} for s, t, c in self.edges],
        }


class CayleyExplorer:
    """Parcours en largeur paresseux du diagramme de Cayley, couche par couche."""

    def __init__(self, mg: MarkedGroup, cap: int = DEFAULT_BALL_CAP):
        self.mg = mg
        self.cap = cap
        self.letters = list(mg.marking)
        self.inverses = [inverse(s) for s in mg.marking]
        self.elements: List[GroupElement] = [mg.identity]
        self.dist: List[int] = [0]
        self.index: Dict[GroupElement, int] = {mg.identity: 0}
        self.layers: List[List[int]] = [[0]]
        # successeurs s_j · g pour les sommets déjà développés
        self.succ: Dict[int, Tuple[int, ...]] = {}
        self.complete = False

    @property
    def radius(self) -> int:
        return len(self.layers) - 1

    def grow_to(self, radius: int) -> None:
        while self.radius < radius and not self.complete:
            depth = len(self.layers)
            frontier = []
            for i in self.layers[-1]:
                g = self.elements[i]
                forward = []
                for h in [s * g for s in self.letters] + [t * g for t in self.inverses]:
                    j = self.index.get(h)
                    if j is None:
                        if len(self.elements) >= self.cap:
                            raise ResourceCapExceeded(
                                f"boule de {self.mg.name} : plafond de {self.cap} sommets atteint au rayon {depth}",
                                cap=self.cap, reached=len(self.elements))
                        j = len(self.elements)
                        self.index[h] = j
                        self.elements.append(h)
                        self.dist.append(depth)
                        frontier.append(j)
                    forward.append(j)
                self.succ[i] = tuple(forward[: len(self.letters)])
            if not frontier:
                self.complete = True
                break
            self.layers.append(frontier)
            logger.debug("%s : rayon %d, %d sommets", self.mg.name, depth, len(self.elements))

    def successors(self, i: int) -> Tuple[Optional[int], ...]:
        if i in self.succ:
            return self.succ[i]
        g = self.elements[i]
        return tuple(self.index.get(s * g) for s in self.letters)

    def ball(self, radius: int) -> RootedBall:
        self.grow_to(radius)
        members = [i for layer in self.layers[: radius + 1] for i in layer]
        members.sort(key=lambda i: (self.dist[i], self.elements[i].sort_key()))
        position = {i: k for k, i in enumerate(members)}
        edges: List[Edge] = []
        for i in members:
            for color, j in enumerate(self.successors(i)):
                if j is not None and j in position:
                    edges.append((position[i], position[j], color))
        return RootedBall(radius, len(self.letters), tuple(self.elements[i] for i in members),
                          tuple(self.dist[i] for i in members), tuple(edges))

    def sphere_sizes(self, radius: int) -> List[int]:
        self.grow_to(radius)
        return [len(layer) for layer in self.layers[: radius + 1]] + [0] * (radius - self.radius)


def ball(mg: MarkedGroup, radius: int, cap: int = DEFAULT_BALL_CAP) -> RootedBall:
    if radius < 0:
        raise PreconditionError("rayon négatif", {"radius": radius})
    return CayleyExplorer(mg, cap).ball(radius)


def ball_growth(mg: MarkedGroup, radius: int, cap: int = DEFAULT_BALL_CAP) -> List[int]:
    """Tailles des sphères de rayon 0..R."""
    return CayleyExplorer(mg, cap).sphere_sizes(radius)


@dataclass(frozen=True)
class Isomorphism:
    isomorphic: bool
    mapping: Optional[Dict[int, int]] = None
    reason: Optional[str] = None
    frontier: Optional[int] = None
    color: Optional[int] = None

    def __bool__(self) -> bool:
        return self.isomorphic


def balls_isomorphic(b1: RootedBall, b2: RootedBall) -> Isomorphism:
    """
    Isomorphisme de diagrammes enracinés : on apparie les racines puis on propage par couleur et sens.
    Les diagrammes de Cayley étant déterministes par couleur, aucun retour arrière n'est nécessaire.
    """
    if b1.radius != b2.radius or b1.color_count != b2.color_count:
        raise PreconditionError("rayons ou nombres de couleurs différents",
                                {"radius": (b1.radius, b2.radius), "colors": (b1.color_count, b2.color_count)})
    mapping = {0: 0}
    image = {0}
    queue = deque([(0, 0)])
    while queue:
        u, v = queue.popleft()
        for color in range(b1.color_count):
            for side, table1, table2 in (("sortante", b1.outgoing, b2.outgoing),
                                         ("entrante", b1.incoming, b2.incoming)):
                t1 = table1.get((u, color))
                t2 = table2.get((v, color))
                if (t1 is None) != (t2 is None):
                    return Isomorphism(False, reason=f"arête {side} présente d'un seul côté",
                                       frontier=b1.distances[u], color=color)
                if t1 is None:
                    continue
                if t1 in mapping:
                    if mapping[t1] != t2:
                        return Isomorphism(False, reason=f"cible {side} incohérente",
                                           frontier=b1.distances[u], color=color)
                    continue
                if t2 in image:
                    return Isomorphism(False, reason="deux sommets envoyés sur le même",
                                       frontier=b1.distances[u], color=color)
                mapping[t1] = t2
                image.add(t2)
                queue.append((t1, t2))
    if len(mapping) != len(b1) or len(b2) != len(b1):
        return Isomorphism(False, reason=f"tailles différentes ({len(b1)} contre {len(b2)})",
                           frontier=b1.radius)
    return Isomorphism(True, mapping=mapping)


@dataclass(frozen=True)
class AgreementRadius:
    """
    Plus grand R ≤ Rmax tel que les boules coïncident.
    at_least : la valeur est une borne inférieure (Rmax atteint ou plafond de ressources).
    """
    value: int
    at_least: bool = False
    bounded_by: Optional[str] = None
    failure: Optional[Isomorphism] = field(default=None, compare=False)

    def __str__(self) -> str:
        return f"≥ {self.value}" if self.at_least else str(self.value)

    def to_json(self) -> Dict[str, Any]:
        data = {"value": self.value, "at_least": self.at_least, "bounded_by": self.bounded_by}
        if self.failure is not None:
            data["first_failure"] = {"reason": self.failure.reason, "frontier": self.failure.frontier,
                                     "color": self.failure.color}
        return data


def agreement_radius(mg1: MarkedGroup, mg2: MarkedGroup, rmax: int, cap: int = DEFAULT_BALL_CAP,
                     on_cap: str = "raise") -> AgreementRadius:
    """
    Balayage linéaire R = 0, 1, … (la coïncidence des boules est close vers le bas).
    on_cap='bound' transforme un dépassement de plafond en borne inférieure.
    """
    if mg1.rank != mg2.rank:
        raise PreconditionError("marquages de longueurs différentes", {"ranks": (mg1.rank, mg2.rank)})
    left, right = CayleyExplorer(mg1, cap), CayleyExplorer(mg2, cap)
    for radius in range(rmax + 1):
        try:
            b1, b2 = left.ball(radius), right.ball(radius)
        except ResourceCapExceeded:
            if on_cap != "bound":
                raise
            logger.warning("Plafond atteint au rayon %d pour %s / %s", radius, mg1.name, mg2.name)
            return AgreementRadius(radius - 1, at_least=True, bounded_by="cap")
        result = balls_isomorphic(b1, b2)
        if not result:
            return AgreementRadius(radius - 1, failure=result)
        # au-delà des diamètres, les boules ne changent plus
        if left.complete and right.complete and radius > max(left.radius, right.radius):
            break
    return AgreementRadius(rmax, at_least=True, bounded_by="rmax")


def induce_marking(mg: MarkedGroup, words: Sequence[Word], name: Optional[str] = None) -> MarkedGroup:
    """Marquage (ω_1(v), …, ω_k(v)) du sous-groupe engendré ; mots en lettres signées 1..ℓ."""
    marking = [evaluate_word(mg.marking, tuple(word), mg.identity) for word in words]
    return mg.with_marking(marking, name or f"{mg.name}[{len(words)} mots]")
