from collections import Counter

import pytest

from core_groups import alternating_group, cyclic_group, dihedral, product_element, symmetric_group
from diagonal_density import (
    FinitePresentation, composition_factors, density_check, diagonal_product, fp_recovery_check,
    goursat_full_check, kernel_to_quotient, prefix_quotient_consistency, short_exact_sequence_check,
    simple_quotients,
)
from exceptions import PreconditionError, ResourceCapExceeded
from group_encodings import sl_encode
from wreath import hall_wreath_marking


class TestDiagonalProduct:
    def test_cyclic_orders(self):
        assert diagonal_product([cyclic_group(4), cyclic_group(6)]).order().value == 12
        assert diagonal_product([cyclic_group(2), cyclic_group(4), cyclic_group(8)]).order().value == 8

    def test_rank_mismatch(self, sym3):
        with pytest.raises(PreconditionError):
            diagonal_product([sym3, cyclic_group(4)])

    def test_empty(self):
        with pytest.raises(PreconditionError):
            diagonal_product([])

    def test_infinite_factor(self, z_infinite):
        delta = diagonal_product([cyclic_group(3), z_infinite])
        assert not delta.finite
        assert delta.representation is None

    def test_componentwise(self, sym3):
        delta = diagonal_product([sym3, dihedral(3)])
        s = delta.marking[0]
        assert s.payload == (sym3.marking[0], dihedral(3).marking[0])


class TestFamilies:
    def test_simple_quotients(self):
        assert simple_quotients(("alternating", 6)) == {("alt", 6)}
        assert simple_quotients(("alt_wreath", 8, 11)) == {("cyclic", 11)}
        assert simple_quotients(("psl", 4, 2)) == {("alt", 8)}
        assert simple_quotients(("psl", 2, 3)) == {("cyclic", 3)}
        assert simple_quotients(("dihedral", 4)) is None
        assert simple_quotients(None) is None

    def test_composition_factors(self):
        assert composition_factors(("alt_wreath", 8, 11)) == Counter({("alt", 8): 11, ("cyclic", 11): 1})
        assert composition_factors(("psl", 3, 7)) == Counter({("psl", 3, 7): 1, ("cyclic", 3): 1})
        assert composition_factors(("psl", 3, 2)) == Counter({("psl", 2, 7): 1})


class TestGoursat:
    def test_full(self, alt5):
        z7 = cyclic_group(7)
        gens = [product_element([alt5.marking[0], z7.marking[0]]), product_element([alt5.marking[1], z7.identity])]
        verdict = goursat_full_check(alt5, z7, gens)
        assert verdict.status == "full"
        assert verdict.order == 420
        assert verdict.common_quotients == ()

    def test_diagonal_violates_hypothesis(self, alt5):
        gens = [product_element([s, s]) for s in alt5.marking]
        verdict = goursat_full_check(alt5, alt5, gens)
        assert verdict.status == "hypothesis-violated"
        assert verdict.order == 60
        assert verdict.common_quotients == (("alt", 5),)

    def test_not_surjective(self, alt5):
        z7 = cyclic_group(7)
        verdict = goursat_full_check(alt5, z7, [product_element([alt5.marking[0], z7.marking[0]])])
        assert verdict.status == "proper"
        assert not verdict.surjective
        assert verdict.projection_orders == (3, 7)

    def test_empty_generators(self):
        verdict = goursat_full_check(cyclic_group(2), cyclic_group(3), [])
        assert verdict.status == "proper"
        assert verdict.order == 1

    def test_generator_outside(self, alt5):
        z7 = cyclic_group(7)
        outside = product_element([symmetric_group(5).marking[0], z7.identity])
        with pytest.raises(PreconditionError):
            goursat_full_check(alt5, z7, [outside])


class TestDensity:
    def test_coprime_cyclic(self):
        verdict = density_check([cyclic_group(4), cyclic_group(9)])
        assert verdict.dense
        assert verdict.full_order == verdict.achieved_order == 36
        assert verdict.method == "order-equality"

    def test_not_dense(self):
        verdict = density_check([cyclic_group(2), cyclic_group(4)])
        assert not verdict.dense
        assert verdict.achieved_order == 4

    def test_recognized_factors_agree(self):
        verdict = density_check([alternating_group(5), alternating_group(6), cyclic_group(7)])
        assert verdict.dense
        assert verdict.shortcut_dense

    def test_repeated_factor_not_dense(self, alt5):
        verdict = density_check([alt5, alternating_group(5)])
        assert not verdict.dense
        assert verdict.shortcut_dense is False

    def test_partial_prefix(self):
        verdict = density_check([cyclic_group(4), cyclic_group(9), cyclic_group(25)], bsgs_points=15)
        assert verdict.partial
        assert verdict.completed_prefix == 2
        assert verdict.dense

    def test_no_prefix_fits(self):
        with pytest.raises(ResourceCapExceeded):
            density_check([cyclic_group(9)], bsgs_points=4)

    def test_sl_encodings(self):
        groups = [sl_encode(cyclic_group(3), 2).group, sl_encode(cyclic_group(3), 3).group]
        verdict = density_check(groups)
        assert verdict.dense
        assert verdict.achieved_order == 168 * 5616

    def test_two_hall_stages(self):
        stages = [hall_wreath_marking(alternating_group(l), (1, 2), cyclic_group(p)) for l, p in [(5, 7), (6, 11)]]
        verdict = density_check(stages)
        assert verdict.dense
        assert verdict.achieved_order == (60 ** 7 * 7) * (360 ** 11 * 11)

    @pytest.mark.slow
    def test_three_hall_stages(self):
        stages = [hall_wreath_marking(alternating_group(l), (1, 2), cyclic_group(p))
                  for l, p in [(5, 7), (6, 11), (7, 13)]]
        verdict = density_check(stages)
        assert verdict.dense
        assert verdict.achieved_order == (60 ** 7 * 7) * (360 ** 11 * 11) * (2520 ** 13 * 13)

    def test_json(self):
        data = density_check([cyclic_group(4), cyclic_group(9)]).to_json()
        assert data["dense"] is True
        assert data["factor_orders"] == [4, 9]


class TestPrefixes:
    def test_consistency(self):
        result = prefix_quotient_consistency([cyclic_group(2), cyclic_group(4), cyclic_group(8)])
        assert result
        assert [c["n"] for c in result.checks] == [1, 2]

    def test_kernel_to_quotient(self):
        source = diagonal_product([cyclic_group(6), cyclic_group(4)])
        quotient = kernel_to_quotient(source, cyclic_group(2))
        assert quotient.well_defined
        assert len(quotient.kernel) == 6
        assert quotient.image_order == 2

    def test_not_a_quotient(self):
        quotient = kernel_to_quotient(cyclic_group(3), cyclic_group(2))
        assert not quotient.well_defined

    def test_short_exact_sequence(self):
        result = short_exact_sequence_check([cyclic_group(6), cyclic_group(4)], cyclic_group(2))
        assert result.holds
        assert result.delta_order == 12
        assert result.kernel_order == 6
        assert result.limit_order == 2


class TestFinitePresentations:
    def test_cyclic_tail(self):
        presentation = FinitePresentation(1, ((1,) * 8,), cyclic_group(8))
        result = fp_recovery_check(presentation, [cyclic_group(2), cyclic_group(4), cyclic_group(8), cyclic_group(8)])
        assert result
        assert result.deleted == 2
        assert result.order == 8

    def test_refuted(self):
        presentation = FinitePresentation(1, ((1,) * 8,), cyclic_group(8))
        result = fp_recovery_check(presentation, [cyclic_group(16), cyclic_group(16)])
        assert result.status == "refuted"
        assert result.witness["relator"] == [1] * 8

    def test_sym3_constant(self):
        presentation = FinitePresentation(2, ((1, 1), (2, 2, 2), (1, 2, 1, 2)), symmetric_group(3))
        assert presentation.radius == 4
        result = fp_recovery_check(presentation, [symmetric_group(3)] * 3)
        assert result.holds
        assert result.deleted == 0

    def test_radius_beyond_rmax(self):
        presentation = FinitePresentation(1, ((1,) * 8,), cyclic_group(8))
        assert fp_recovery_check(presentation, [cyclic_group(8)], rmax=4).status == "inconclusive"

    def test_model_must_satisfy_relators(self):
        with pytest.raises(PreconditionError):
            FinitePresentation(1, ((1, 1, 1),), cyclic_group(4))
