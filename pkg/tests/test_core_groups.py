import math
import random

import pytest

from core_groups import (
    Backend, BigOrder, MarkedGroup, abelian_element, alternating_group, bsgs_order, commutator, cyclic_group, determinant,
    dihedral, element_arithmetic, element_order, elementary_matrix, enumerate_subgroup, evaluate_word,
    free_abelian, identity_matrix, identity_of, identity_permutation, inverse, invert_word, matrix, perm_from_cycles,
    perm_sign, permutation, permutation_matrix, power, product_element, special_linear_order, symmetric_group,
)
from exceptions import BackendMismatchError, PreconditionError


class TestPermutations:
    def test_left_to_right_composition(self):
        p = permutation([1, 2, 0])
        q = permutation([1, 0, 2])
        # (p·q)[x] = q[p[x]]
        assert (p * q).payload == (0, 2, 1)

    def test_commutator_convention(self):
        a = perm_from_cycles(4, [0, 1])
        b = perm_from_cycles(4, [1, 2])
        assert commutator(a, b) == inverse(a) * inverse(b) * a * b
        assert not commutator(a, b).is_identity()

    def test_commuting_elements(self):
        a = perm_from_cycles(4, [0, 1])
        b = perm_from_cycles(4, [2, 3])
        assert commutator(a, b).is_identity()

    def test_not_a_permutation(self):
        with pytest.raises(PreconditionError):
            permutation([0, 0, 1])

    @pytest.mark.parametrize("cycles, sign", [
        ([[0, 1]], -1),
        ([[0, 1, 2]], 1),
        ([[0, 1], [2, 3]], 1),
        ([[0, 1, 2, 3]], -1),
    ])
    def test_sign(self, cycles, sign):
        assert perm_sign(perm_from_cycles(5, *cycles)) == sign

    def test_degree_mismatch(self):
        with pytest.raises(BackendMismatchError):
            identity_permutation(3) * identity_permutation(4)

    def test_order(self):
        assert element_order(perm_from_cycles(7, [0, 1, 2], [3, 4])).value == 6


class TestWords:
    def test_evaluate_left_to_right(self, sym3):
        a, b = sym3.marking
        assert evaluate_word(sym3.marking, (1, -2, 2, 1)) == a * inverse(b) * b * a
        assert evaluate_word(sym3.marking, (), sym3.identity) == sym3.identity

    def test_out_of_range_letter(self, sym3):
        with pytest.raises(PreconditionError):
            evaluate_word(sym3.marking, (3,))
        with pytest.raises(PreconditionError):
            evaluate_word(sym3.marking, (0,))

    def test_inverse_word(self, sym3):
        word = (1, 2, -1, 2)
        g = evaluate_word(sym3.marking, word)
        assert evaluate_word(sym3.marking, invert_word(word)) == inverse(g)


class TestBackends:
    def test_mixed_backends(self):
        with pytest.raises(BackendMismatchError):
            identity_permutation(2) * identity_matrix(2, 3)

    def test_matrix_inverse(self):
        g = elementary_matrix(3, 0, 2, 5, 3) * permutation_matrix([1, 2, 0], 5)
        assert (g * inverse(g)) == identity_matrix(3, 5)

    def test_signed_permutation_matrix(self):
        assert determinant(permutation_matrix([1, 0], 7, [-1, 1])) == 1
        assert determinant(permutation_matrix([1, 0], 7)) == 6

    def test_abelian_with_free_part(self):
        g = abelian_element((0, 4), (2, 3))
        assert (g * g).payload == ((0, 4), (4, 2))
        assert element_order(g).value is None
        assert element_order(abelian_element((6, 4), (2, 2))).value == 6

    def test_product_order(self):
        g = product_element([abelian_element((4,), (1,)), perm_from_cycles(3, [0, 1, 2])])
        assert element_order(g).value == 12

    def test_power_negative(self):
        g = perm_from_cycles(5, [0, 1, 2, 3, 4])
        assert power(g, -2) == inverse(g * g)
        assert power(g, 5).is_identity()

    def test_element_arithmetic_entry_point(self):
        a = perm_from_cycles(4, [0, 1, 2])
        b = perm_from_cycles(4, [1, 2, 3])
        assert element_arithmetic(a, b, "multiply") == a * b
        assert element_arithmetic(a, None, "power", 3).is_identity()
        assert element_arithmetic(a, None, "order") == BigOrder(3)
        with pytest.raises(PreconditionError):
            element_arithmetic(a, None, "power")
        with pytest.raises(PreconditionError):
            element_arithmetic(a, b, "divide")


class TestDihedral:
    @pytest.mark.parametrize("n", [2, 3, 6, 12])
    def test_order_and_rotation(self, n):
        dn = dihedral(n)
        c, d = dn.marking
        assert dn.order().value == 2 * n
        assert element_order(c).value == 2
        assert element_order(d).value == 2
        assert element_order(c * d).value == n

    def test_infinite(self, d_infinite):
        c, d = d_infinite.marking
        assert not d_infinite.finite
        assert element_order(c * d).value is None
        assert not d_infinite.order().is_finite

    def test_too_small(self):
        with pytest.raises(PreconditionError):
            dihedral(1)


class TestMarkedGroup:
    @pytest.mark.parametrize("group, order", [
        (symmetric_group(4), 24),
        (alternating_group(5), 60),
        (alternating_group(6), 360),
        (cyclic_group(9), 9),
    ])
    def test_orders(self, group, order):
        assert group.order().value == order

    def test_generates_ambient(self, alt5):
        assert alt5.generates_ambient()
        three_cycle = alt5.with_marking([alt5.marking[0]])
        assert not three_cycle.generates_ambient()
        assert three_cycle.order().value == 3
        assert three_cycle.family is None

    def test_contains(self, alt5):
        assert alt5.contains(perm_from_cycles(5, [0, 1], [2, 3]))
        assert not alt5.contains(perm_from_cycles(5, [0, 1]))

    def test_infinite_order(self, z_infinite):
        assert z_infinite.order() == BigOrder()
        assert not free_abelian(2).finite

    def test_big_order_rejects_zero(self):
        with pytest.raises(ValueError):
            BigOrder(0)

    def test_closure_cap_is_a_value(self):
        closure = enumerate_subgroup(symmetric_group(4).marking, 5)
        assert not closure.complete
        assert len(closure) == 5

    def test_closure_without_identity(self):
        with pytest.raises(PreconditionError):
            enumerate_subgroup([], 10)

    def test_matrix_group_without_representation(self):
        g = MarkedGroup("SL(2, F_3)", (elementary_matrix(2, 0, 1, 3), elementary_matrix(2, 1, 0, 3)),
                        identity_matrix(2, 3))
        assert g.order().value == 24

    def test_special_linear_order(self):
        assert special_linear_order(2, 3) == 24
        assert special_linear_order(3, 2) == 168
        assert special_linear_order(4, 2) == math.factorial(8) // 2

    def test_matrix_tag(self):
        assert matrix([[1, 1], [0, 1]], 2).tag == Backend.MATRIX


# --- propriétés sur tirages pseudo-aléatoires reproductibles ---

SEED = 20240531
TRIPLES = 10_000
D7 = dihedral(7).elements().elements
D_INF = dihedral("inf")


def _random_permutation(rng: random.Random, n: int = 7):
    images = list(range(n))
    rng.shuffle(images)
    return permutation(images)


def _random_matrix(rng: random.Random):
    g = identity_matrix(3, 5)
    for _ in range(3):
        i, j = rng.sample(range(3), 2)
        g = g * elementary_matrix(3, i, j, 5, rng.randrange(1, 5))
    return g


def _random_abelian(rng: random.Random):
    return abelian_element((4, 6, 0), [rng.randrange(-50, 50) for _ in range(3)])


def _random_infinite_dihedral(rng: random.Random):
    c, d = D_INF.marking
    rotation = power(c * d, rng.randrange(-30, 30))
    return rotation * c if rng.random() < 0.5 else rotation


SAMPLERS = {
    "permutation": _random_permutation,
    "matrix": _random_matrix,
    "abelian": _random_abelian,
    "dihedral": lambda rng: rng.choice(D7),
    "dihedral_infinite": _random_infinite_dihedral,
    "product": lambda rng: product_element([_random_permutation(rng, 5), _random_abelian(rng)]),
}


class TestGroupAxioms:
    @pytest.mark.parametrize("backend", sorted(SAMPLERS))
    def test_random_triples(self, backend):
        rng = random.Random(SEED)
        sample = SAMPLERS[backend]
        for _ in range(TRIPLES):
            a, b, c = sample(rng), sample(rng), sample(rng)
            assert (a * b) * c == a * (b * c)
            e = identity_of(a)
            assert a * e == a == e * a
            inv = inverse(a)
            assert (a * inv).is_identity()
            assert (inv * a).is_identity()

    def test_sign_is_a_homomorphism(self):
        rng = random.Random(SEED)
        for _ in range(TRIPLES):
            a, b = _random_permutation(rng), _random_permutation(rng)
            assert perm_sign(a * b) == perm_sign(a) * perm_sign(b)

    def test_bsgs_matches_enumeration(self):
        rng = random.Random(SEED)
        for _ in range(200):
            gens = [_random_permutation(rng, 6) for _ in range(rng.randint(1, 3))]
            closure = enumerate_subgroup(gens, cap=1000)
            assert closure.complete
            assert bsgs_order(gens).order.value == len(closure.elements)
