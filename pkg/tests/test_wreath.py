import pytest

from core_groups import abelian_element, alternating_group, cyclic_group, element_order, power, symmetric_group
from exceptions import PreconditionError
from marked_cayley import agreement_radius
from wreath import (
    absorption_limit, absorption_markings, check_imprimitive_faithfulness, combined_order, cyclic_wreath_limit,
    delta, gamma_limits, hall_commutator_table, hall_conjugates, hall_elements, hall_wreath_marking, shift,
    support, value_at, wreath, wreath_element, wreath_order,
)


def _z(n: int):
    return abelian_element((0,), (n,))


class TestArithmetic:
    def test_shift_conjugation_moves_support(self, sym3):
        s = sym3.marking[0]
        t = shift(_z(1))
        moved = power(t, 3) * delta(s, _z(0)) * power(t, -3)
        assert len(support(moved)) == 1
        assert value_at(moved, support(moved)[0], sym3.identity) == s

    def test_identity_entries_are_dropped(self, sym3):
        g = wreath_element({_z(0): sym3.identity, _z(2): sym3.marking[0]}, _z(0))
        assert [x.payload[1][0] for x in support(g)] == [2]

    def test_finite_wreath_order(self):
        assert wreath(cyclic_group(2), cyclic_group(3)).order().value == 24
        assert wreath_order(60, 7) == 60 ** 7 * 7

    def test_infinite_wreath(self, sym3):
        lamplighter = wreath(cyclic_group(2), cyclic_group(0))
        assert not lamplighter.finite
        assert lamplighter.rank == 2

    def test_imprimitive_action_is_faithful(self, sym3):
        g = wreath(sym3, cyclic_group(3))
        samples = [(a, b) for a in g.marking for b in g.marking]
        assert check_imprimitive_faithfulness(g, samples)

    def test_alt_wreath_family(self):
        g = wreath(alternating_group(5), cyclic_group(3))
        assert g.family == ("alt_wreath", 5, 3)


class TestHall:
    def test_commutators_recovered(self, sym3):
        table = hall_commutator_table(sym3, (2, 4))
        assert len(table) == 4
        assert table["match"].all()
        off_diagonal = table[table["i"] != table["j"]]
        assert all(row == ["(0)"] for row in off_diagonal["support"])

    def test_conjugate_supports_are_differences(self, sym3):
        placement = (2, 4)
        w, u = hall_elements(sym3, placement)
        for a_i, wi in zip(placement, hall_conjugates(w, u, placement)):
            positions = sorted(x.payload[1][0] for x in support(wi))
            assert positions in (sorted(a - a_i for a in placement), sorted(a_i - a for a in placement))

    def test_finite_top(self, sym3):
        marked = hall_wreath_marking(sym3, (2, 4), cyclic_group(31))
        assert marked.finite
        w, u = marked.marking
        assert element_order(u).value == 31

    def test_non_sidon_placement(self, sym3):
        a, b = sym3.marking
        with pytest.raises(PreconditionError):
            hall_elements(sym3.with_marking([a, b, a * b]), (1, 2, 3))

    def test_placement_length(self, sym3):
        with pytest.raises(PreconditionError):
            hall_elements(sym3, (1, 2, 4))


class TestLimits:
    def test_absorption_radii_grow(self, sym3):
        limit = absorption_limit(sym3)
        radii = [agreement_radius(absorption_markings(sym3, m), limit, 5).value for m in range(1, 5)]
        assert radii == sorted(radii)
        assert radii[2] >= 2

    def test_absorption_limit_rank(self, sym3):
        assert absorption_limit(sym3).rank == 3
        assert absorption_markings(sym3, 2).rank == 3

    def test_gamma_limits(self, sym3):
        gamma1, gamma2 = gamma_limits(sym3, (2, 4))
        assert gamma1.rank == gamma2.rank == 2
        assert not gamma1.finite

    def test_combined_order(self, sym3):
        assert combined_order(sym3) == 6

    def test_cyclic_wreath_limit(self):
        limit = cyclic_wreath_limit(6)
        assert limit.rank == 2
        assert not limit.finite
