import itertools
import math
from fractions import Fraction

import pytest

from tautring import InvalidInput, psi_intersection, vertex_integral


def test_base_values():
    assert psi_intersection(0, (0, 0, 0)) == 1
    assert psi_intersection(1, (1,)) == Fraction(1, 24)


@pytest.mark.parametrize("n", range(3, 9))
def test_genus_zero_multinomial(n):
    # <tau_a1 ... tau_an>_0 = (n-3)! / prod a_i!
    for a in itertools.product(range(n - 2), repeat=n):
        if sum(a) == n - 3:
            expected = Fraction(math.factorial(n - 3), math.prod(math.factorial(x) for x in a))
            assert psi_intersection(0, a) == expected


@pytest.mark.parametrize("g", range(1, 6))
def test_one_point_closed_form(g):
    assert psi_intersection(g, (3 * g - 2,)) == Fraction(1, 24**g * math.factorial(g))


@pytest.mark.parametrize("n", range(1, 7))
def test_genus_one_all_tau_one(n):
    assert psi_intersection(1, (1,) * n) == Fraction(math.factorial(n - 1), 24)


def test_genus_two_literature_values():
    assert psi_intersection(2, (4,)) == Fraction(1, 1152)
    assert psi_intersection(2, (3, 2)) == Fraction(29, 5760)
    assert psi_intersection(2, (2, 3)) == Fraction(29, 5760)
    assert psi_intersection(2, (2, 2, 2)) == Fraction(7, 240)
    assert psi_intersection(3, (7,)) == Fraction(1, 82944)


def test_degree_mismatch_rejected():
    # a two-point genus-2 key must have exponents summing to 5
    with pytest.raises(InvalidInput):
        psi_intersection(2, (2, 2))
    with pytest.raises(InvalidInput):
        psi_intersection(0, (0, 0))


def test_symmetric_in_markings():
    assert psi_intersection(2, (1, 2, 3)) == psi_intersection(2, (3, 1, 2))


def test_kappa_integrals():
    assert vertex_integral(1, (0,), (1,)) == Fraction(1, 24)
    assert vertex_integral(0, (0, 0, 0, 0), (1,)) == 1
    assert vertex_integral(2, (), (3,)) == Fraction(1, 1152)
    # inversion of the pushforward of psi_1^2 psi_2^2 psi_3^2 over the three
    # forgotten points, using the literature correlators
    k12 = Fraction(29, 5760) - Fraction(1, 1152)
    assert vertex_integral(2, (), (1, 2)) == k12
    assert vertex_integral(2, (), (1, 1, 1)) == Fraction(7, 240) - 3 * k12 - 2 * Fraction(1, 1152)
    assert vertex_integral(2, (), (1, 1, 1)) == Fraction(43, 2880)


def test_vertex_integral_off_degree_is_zero():
    assert vertex_integral(1, (0, 0), (1,)) == 0
    with pytest.raises(InvalidInput):
        vertex_integral(0, (0, 0))
