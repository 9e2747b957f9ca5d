import random

import pytest

from amalgam import SIDE_A, SIDE_B, Amalgam, amalgam
from core_groups import (
    MarkedGroup, abelian_element, cyclic_group, dihedral, element_order, inverse, power, product_element,
)
from exceptions import PreconditionError
from marked_cayley import agreement_radius


@pytest.fixture
def d2_z4():
    d2, z4 = dihedral(2), cyclic_group(4)
    c, d = d2.marking
    return Amalgam(d2, z4, cyclic_group(2), [c * d], [z4.marking[0] * z4.marking[0]])


def _oracle():
    """Z/4 × D_∞ : c ↦ (0, σ0), d ↦ (2, σ0), g ↦ (1, σ1)."""
    d_inf = dihedral("inf")
    sigma0, sigma1 = d_inf.marking
    z = [abelian_element((4,), (v,)) for v in range(4)]
    return MarkedGroup("Z/4 × D_inf", (
        product_element([z[0], sigma0]),
        product_element([z[2], sigma0]),
        product_element([z[1], sigma1]),
    ), product_element([z[0], d_inf.identity]), finite=False)


def test_embeds_in_oracle(d2_z4):
    c, d = d2_z4.a.marking
    marked = d2_z4.marked_group([(SIDE_A, c), (SIDE_A, d), (SIDE_B, d2_z4.b.marking[0])])
    assert not marked.finite
    radius = agreement_radius(marked, _oracle(), 4)
    assert radius.at_least
    assert radius.value == 4


def test_amalgamated_relation(d2_z4):
    c, d = d2_z4.a.marking
    g = d2_z4.factor_element(SIDE_B, d2_z4.b.marking[0])
    cd = d2_z4.factor_element(SIDE_A, c * d)
    assert cd == g * g
    assert not cd.is_identity()


def test_alternating_word_has_infinite_order(d2_z4):
    c = d2_z4.factor_element(SIDE_A, d2_z4.a.marking[0])
    g = d2_z4.factor_element(SIDE_B, d2_z4.b.marking[0])
    x = c * g
    assert all(not power(x, k).is_identity() for k in range(1, 12))
    assert (x * x.inverse()).is_identity()


def test_amalgam_over_whole_factor_is_finite():
    d4, z4 = dihedral(4), cyclic_group(4)
    c, d = d4.marking
    marked = amalgam(d4, z4, cyclic_group(4), [c * d], [z4.marking[0]],
                     marking=[(SIDE_A, c), (SIDE_A, d)])
    assert marked.finite
    assert marked.order().value == 8
    assert [element_order(s).value for s in marked.marking] == [2, 2]


def test_non_homomorphic_embedding():
    d2, z4 = dihedral(2), cyclic_group(4)
    with pytest.raises(PreconditionError):
        Amalgam(d2, z4, cyclic_group(4), [d2.marking[0]], [z4.marking[0]])


def test_non_injective_embedding():
    d2, z4 = dihedral(2), cyclic_group(4)
    with pytest.raises(PreconditionError):
        Amalgam(d2, z4, cyclic_group(2), [d2.identity], [z4.marking[0] * z4.marking[0]])


def test_embedding_count():
    d2, z4 = dihedral(2), cyclic_group(4)
    with pytest.raises(PreconditionError):
        Amalgam(d2, z4, cyclic_group(2), [], [z4.marking[0]])


def test_nested_amalgam_factor():
    """D_n *_{Z/n} (D_m *_{Z/m} G) : le sous-groupe amalgamé vit dans le facteur fini interne."""
    z6 = cyclic_group(6)
    d6 = dihedral(6)
    c, d = d6.marking
    inner = Amalgam(d6, z6, cyclic_group(6), [c * d], [z6.marking[0]])
    inner_group = inner.marked_group([(SIDE_A, c), (SIDE_A, d)])
    d3 = dihedral(3)
    c3, d3_ = d3.marking
    generator = inner.lift_base(power(z6.marking[0], 2))
    outer = Amalgam(d3, inner_group, cyclic_group(3), [c3 * d3_], [generator])
    x = outer.factor_element(SIDE_A, c3 * d3_)
    y = outer.factor_element(SIDE_B, generator)
    assert x == y
    assert element_order(x).value == 3


def _random_word(rng, amalgam, factors):
    x = amalgam.identity()
    for _ in range(rng.randint(0, 6)):
        side = rng.choice((SIDE_A, SIDE_B))
        x = x * amalgam.factor_element(side, rng.choice(factors[side]))
    return x


def test_normal_forms_are_associative(d2_z4):
    rng = random.Random(20240531)
    factors = (d2_z4.a.elements().elements, d2_z4.b.elements().elements)
    for _ in range(10_000):
        x, y, z = (_random_word(rng, d2_z4, factors) for _ in range(3))
        assert (x * y) * z == x * (y * z)
        assert (x * inverse(x)).is_identity()
