import math
from dataclasses import replace

import numpy as np
import pytest

from config import Caps, SpectralRow
from core_groups import cyclic_group, dihedral, free_abelian
from diagonal_density import diagonal_product
from exceptions import PreconditionError, ResourceCapExceeded
from group_encodings import verify_certificate
from spectral import (
    TABLE_COLUMNS, cayley_graph, elementary_block_marking, expander_table, interlacing_holds, sl_stage_table,
    spectral_gap,
)


class TestCayleyGraph:
    def test_cycle_adjacency(self):
        g = cayley_graph(cyclic_group(5))
        assert g.n_vertices == 5
        assert g.degree == 2
        assert np.allclose(g.adjacency.sum(axis=1), 2)
        assert (g.adjacency != g.adjacency.T).nnz == 0

    def test_multi_edges_are_summed(self):
        # dans Z/2, s = s⁻¹ : deux arêtes parallèles
        g = cayley_graph(cyclic_group(2))
        assert g.adjacency.toarray().tolist() == [[0, 2], [2, 0]]

    def test_infinite_group_hits_cap(self):
        with pytest.raises(ResourceCapExceeded):
            cayley_graph(free_abelian(1), cap=100)


class TestSpectralGap:
    @pytest.mark.parametrize("n", range(4, 65))
    def test_cycles(self, n):
        report = spectral_gap(cayley_graph(cyclic_group(n)))
        assert report.lambda2 == pytest.approx(math.cos(2 * math.pi / n), abs=1e-9)
        assert report.method == "dense"
        assert report.residual < 1e-9

    def test_sparse_path_matches_dense(self):
        graph = cayley_graph(dihedral(30))
        dense = spectral_gap(graph)
        sparse = spectral_gap(graph, dense_limit=10)
        assert sparse.method == "eigsh"
        assert sparse.lambda2 == pytest.approx(dense.lambda2, abs=1e-8)

    def test_disconnected(self):
        graph = cayley_graph(cyclic_group(6))
        half = graph.adjacency.copy().tolil()
        half[0, 1] = half[1, 0] = half[3, 4] = half[4, 3] = 0
        report = spectral_gap(replace(graph, adjacency=half.tocsr()))
        assert not report.connected
        assert report.gap == 0.0
        assert sorted(report.components) == [3, 3]

    def test_trivial_group(self):
        report = spectral_gap(cayley_graph(cyclic_group(1)))
        assert report.lambda2 == -1.0
        assert report.gap == 2.0

    def test_epsilon_bound(self):
        report = spectral_gap(cayley_graph(cyclic_group(8)))
        assert report.epsilon_lower == pytest.approx(math.sqrt(2 * report.gap / report.degree))

    def test_interlacing(self):
        source = spectral_gap(cayley_graph(diagonal_product([cyclic_group(4), cyclic_group(6)])))
        quotient = spectral_gap(cayley_graph(cyclic_group(4)))
        assert source.lambda2 == pytest.approx(math.cos(math.pi / 6))
        assert interlacing_holds(source, quotient)
        assert not interlacing_holds(quotient, source)


class TestBlockMarking:
    def test_sl4_f2(self):
        block = elementary_block_marking(1, 2)
        assert block.group.rank == 4
        assert block.group.order().value == 20160
        assert verify_certificate(block.group.marking, block.certificate)

    def test_odd_characteristic(self):
        block = elementary_block_marking(1, 3)
        assert verify_certificate(block.group.marking, block.certificate)

    def test_ring_blocks(self):
        block = elementary_block_marking(2, 2)
        assert block.certificate.size == 8
        assert verify_certificate(block.group.marking, block.certificate)

    def test_preconditions(self):
        with pytest.raises(PreconditionError):
            elementary_block_marking(0, 2)
        with pytest.raises(PreconditionError):
            elementary_block_marking(1, 4)

    @pytest.mark.slow
    def test_sl4_f2_gap(self):
        report = spectral_gap(cayley_graph(elementary_block_marking(1, 2).group))
        assert report.method == "eigsh"
        assert report.gap > 0
        assert report.residual < 1e-9


class TestTables:
    def test_expander_table_with_cap(self):
        table = expander_table([SpectralRow(1, 2)], caps=Caps(closure=100))
        assert list(table["status"]) == ["cap"]
        assert set(TABLE_COLUMNS) <= set(table.columns)

    def test_sl_stage_table(self):
        table = sl_stage_table([cyclic_group(3)], 2)
        assert table.loc[0, "n_vertices"] == 168
        assert table.loc[0, "gap"] > 0

    def test_bad_row_is_reported(self):
        table = expander_table([SpectralRow(1, 4)], caps=Caps(closure=100))
        assert table.loc[0, "status"].startswith("erreur")
