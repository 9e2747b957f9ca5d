import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
import pandas as pd
from scipy.sparse import csr_matrix
from scipy.sparse.linalg import ArpackNoConvergence, eigsh
from sympy import isprime

from config import Caps, SpectralRow
from core_groups import (
    GroupElement, MarkedGroup, enumerate_subgroup, matrix, matrix_group, permutation_matrix,
    special_linear_order, symmetric_letters,
)
from diagonal_density import diagonal_product
from exceptions import MgkError, PreconditionError, ResourceCapExceeded
from group_encodings import EliminationCertificate, elimination_certificate, sl_encode
from utils import stopwatch

logger = logging.getLogger(__name__)

DENSE_LIMIT = 4000
EIGEN_TOL = 1e-9
ARPACK_MAXITER = 20_000

TABLE_COLUMNS = ["l_prime", "p", "n_vertices", "degree", "lambda2", "gap", "epsilon_lower", "runtime_ms"]


@dataclass(frozen=True)
class CayleyGraph:
    """Graphe de Cayley non orienté sur S ∪ S⁻¹ (arêtes multiples et boucles conservées), arêtes g ~ s·g."""
    name: str
    vertices: Tuple[GroupElement, ...]
    adjacency: csr_matrix
    degree: int

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def to_networkx(self) -> nx.Graph:
        return nx.from_scipy_sparse_array(self.adjacency)


def cayley_graph(mg: MarkedGroup, cap: int = 200_000) -> CayleyGraph:
    closure = enumerate_subgroup(mg.marking, cap, mg.identity)
    if not closure.complete:
        raise ResourceCapExceeded(f"{mg.name} : énumération interrompue à {cap} sommets", cap=cap,
                                  reached=len(closure))
    vertices = tuple(sorted(closure.elements, key=lambda g: g.sort_key()))
    index = {g: i for i, g in enumerate(vertices)}
    letters = symmetric_letters(mg.marking)
    rows, cols = [], []
    for s in letters:
        for i, g in enumerate(vertices):
            rows.append(i)
            cols.append(index[s * g])
    n = len(vertices)
    # les doublons sont sommés : A[g, h] = #{s ∈ S ∪ S⁻¹ : s·g = h}
    adjacency = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    logger.debug("Graphe de Cayley de %s : %d sommets, degré %d", mg.name, n, len(letters))
    return CayleyGraph(mg.name, vertices, adjacency, len(letters))


@dataclass(frozen=True)
class SpectralReport:
    """
    lambda2 : deuxième plus grande valeur propre de l'adjacence normalisée ; gap = 1 − lambda2.
    epsilon_lower = sqrt(2·gap/|S̃|) : le trou du laplacien moyen minore le déplacement maximal
    sur l'orthogonal des constantes.
    """
    n_vertices: int
    degree: int
    lambda2: float
    gap: float
    epsilon_lower: float
    residual: float
    method: str
    connected: bool
    components: Tuple[int, ...] = ()
    converged: bool = True

    def to_json(self) -> Dict[str, Any]:
        return {
            "n_vertices": self.n_vertices,
            "degree": self.degree,
            "lambda2": self.lambda2,
            "gap": self.gap,
            "epsilon_lower": self.epsilon_lower,
            "residual": self.residual,
            "method": self.method,
            "connected": self.connected,
            "components": list(self.components),
            "converged": self.converged,
        }


def _report(g: CayleyGraph, lambda2: float, residual: float, method: str, converged: bool = True) -> SpectralReport:
    lambda2 = min(1.0, max(-1.0, lambda2))
    gap = 1.0 - lambda2
    return SpectralReport(g.n_vertices, g.degree, lambda2, gap, math.sqrt(2.0 * gap / g.degree), residual,
                          method, True, (g.n_vertices,), converged)


def spectral_gap(g: CayleyGraph, dense_limit: int = DENSE_LIMIT) -> SpectralReport:
    """
    Trou spectral de l'adjacence normalisée : solveur dense jusqu'à dense_limit sommets, eigsh au-delà
    avec résidu ‖Av − λv‖. Un graphe non connexe a un trou nul, certifié par ses composantes.
    """
    n = g.n_vertices
    components = sorted((len(c) for c in nx.connected_components(g.to_networkx())), reverse=True)
    if len(components) > 1:
        logger.warning("%s : graphe non connexe (%d composantes)", g.name, len(components))
        return SpectralReport(n, g.degree, 1.0, 0.0, 0.0, 0.0, "components", False, tuple(components))
    if n == 1:
        # complément des constantes vide
        return _report(g, -1.0, 0.0, "trivial")
    normalized = g.adjacency / g.degree
    if n <= dense_limit:
        values, vectors = np.linalg.eigh(normalized.toarray())
        lambda2, v = float(values[-2]), vectors[:, -2]
        residual = float(np.linalg.norm(normalized @ v - lambda2 * v))
        return _report(g, lambda2, residual, "dense")
    try:
        values, vectors = eigsh(normalized, k=2, which="LA", tol=EIGEN_TOL * 1e-3, maxiter=ARPACK_MAXITER)
        converged = True
    except ArpackNoConvergence as e:
        if len(e.eigenvalues) < 2:
            raise ResourceCapExceeded(f"{g.name} : eigsh sans convergence", cap=ARPACK_MAXITER) from e
        values, vectors = e.eigenvalues, e.eigenvectors
        converged = False
    order = np.argsort(values)
    lambda2, v = float(values[order[0]]), vectors[:, order[0]]
    residual = float(np.linalg.norm(normalized @ v - lambda2 * v))
    if not converged or residual > EIGEN_TOL:
        logger.warning("%s : résidu %.3e (convergence %s)", g.name, residual, converged)
    return _report(g, lambda2, residual, "eigsh", converged and residual <= EIGEN_TOL)


# --- générateurs élémentaires par blocs ---

@dataclass(frozen=True)
class BlockMarking:
    group: MarkedGroup
    certificate: EliminationCertificate
    l_prime: int
    p: int


def _ring_generators(l_prime: int) -> Tuple[np.ndarray, np.ndarray]:
    """x = I + E_01 (ou 1), y matrice de permutation cyclique y[i, i+1] = 1."""
    x = np.eye(l_prime, dtype=np.int64)
    if l_prime > 1:
        x[0, 1] = 1
    y = np.zeros((l_prime, l_prime), dtype=np.int64)
    for i in range(l_prime):
        y[i, (i + 1) % l_prime] = 1
    return x, y


def _block_elementary(a: np.ndarray, p: int) -> GroupElement:
    """e_{0,1}^A dans M_4(M_l'(F_p))."""
    l_prime = len(a)
    rows = np.eye(4 * l_prime, dtype=np.int64)
    rows[0:l_prime, l_prime:2 * l_prime] = a
    return matrix(rows, p)


def elementary_block_marking(l_prime: int, p: int) -> BlockMarking:
    """
    T = (e_01^1, e_01^x, e_01^y, τ) dans SL(4l', F_p), τ permutation cyclique signée des quatre blocs.
    Le certificat d'élimination donne un mot pour chaque matrice élémentaire.
    """
    if l_prime < 1:
        raise PreconditionError("l' doit être ≥ 1", {"l_prime": l_prime})
    if not isprime(p):
        raise PreconditionError(f"{p} n'est pas premier", {"p": p})
    x, y = _ring_generators(l_prime)
    n = 4 * l_prime
    images = [(i + l_prime) % n for i in range(n)]
    signs = [1] * n
    if l_prime % 2:
        # l' 4-cycles disjoints : signe (−1)^{l'}
        signs[0] = -1
    tau = permutation_matrix(images, p, signs)
    marking = [_block_elementary(np.eye(l_prime, dtype=np.int64), p), _block_elementary(x, p),
               _block_elementary(y, p), tau]
    group = matrix_group(f"(SL({n}, F_{p}); T)", marking, special_linear_order(n, p), ("psl", n, p))
    ring = None if l_prime == 1 else (x, y)
    certificate = elimination_certificate(group.marking, block_size=l_prime, ring=ring)
    return BlockMarking(group, certificate, l_prime, p)


# --- tables ---

def _row(mg: MarkedGroup, caps: Caps, extra: Dict[str, Any]) -> Dict[str, Any]:
    row: Dict[str, Any] = dict(extra)
    with stopwatch() as timer:
        try:
            report = spectral_gap(cayley_graph(mg, caps.closure), caps.eigen_dense)
            row.update(n_vertices=report.n_vertices, degree=report.degree, lambda2=report.lambda2,
                       gap=report.gap, epsilon_lower=report.epsilon_lower, residual=report.residual,
                       connected=report.connected, status="ok" if report.converged else "residual")
        except ResourceCapExceeded as e:
            logger.warning("Ligne %s interrompue : %s", extra, e)
            row.update(n_vertices=None, degree=None, lambda2=None, gap=None, epsilon_lower=None,
                       residual=None, connected=None, status="cap")
    row["runtime_ms"] = round(timer["ms"], 1)
    return row


def expander_table(rows: Sequence[SpectralRow], prefixes: Sequence[Sequence[SpectralRow]] = (),
                   caps: Optional[Caps] = None) -> pd.DataFrame:
    """Trous de Cayley(SL(4l', F_p); T) par ligne, puis des préfixes diagonaux au marquage T partagé."""
    caps = caps or Caps()
    cache: Dict[Tuple[int, int], MarkedGroup] = {}

    def block(row: SpectralRow) -> MarkedGroup:
        key = (row.l_prime, row.p)
        if key not in cache:
            cache[key] = elementary_block_marking(row.l_prime, row.p).group
        return cache[key]

    records = []
    for row in rows:
        try:
            records.append(_row(block(row), caps, {"kind": "factor", "l_prime": row.l_prime, "p": row.p}))
        except MgkError as e:
            records.append({"kind": "factor", "l_prime": row.l_prime, "p": row.p, "status": f"erreur : {e}"})
    for prefix in prefixes:
        label = {"kind": "prefix", "l_prime": ",".join(str(r.l_prime) for r in prefix),
                 "p": ",".join(str(r.p) for r in prefix)}
        try:
            delta = diagonal_product([block(r) for r in prefix])
            records.append(_row(delta, caps, label))
        except MgkError as e:
            records.append({**label, "status": f"erreur : {e}"})
    table = pd.DataFrame(records)
    for column in TABLE_COLUMNS:
        if column not in table.columns:
            table[column] = None
    return table


def sl_stage_table(stages: Sequence[MarkedGroup], p: int, caps: Optional[Caps] = None) -> pd.DataFrame:
    """Trous spectraux des encodages (SL(G_m, F_p); σ, τ)."""
    caps = caps or Caps()
    records = []
    for mg in stages:
        try:
            encoded = sl_encode(mg, p, caps.closure, certify=False).group
            records.append(_row(encoded, caps, {"stage": mg.name, "p": p}))
        except MgkError as e:
            records.append({"stage": mg.name, "p": p, "status": f"erreur : {e}"})
    return pd.DataFrame(records)


def interlacing_holds(source: SpectralReport, quotient: SpectralReport, tol: float = EIGEN_TOL) -> bool:
    """λ2 d'un quotient marqué ≤ λ2 de la source (à tol près)."""
    return quotient.lambda2 <= source.lambda2 + tol
