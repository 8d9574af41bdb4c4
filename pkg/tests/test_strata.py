import json
import random
from fractions import Fraction

import pytest

from conftest import random_class
from tautring import InvalidInput, TautClass, integrate_top
from tautring.graphs import StableGraph
from tautring.strata import Decoration, combine, degree_slice, make_stratum, parse_fraction


def test_relabeled_strata_coincide():
    a = StableGraph.build([0, 1], [(1, 0), (2, 0)], [(0, 1)])
    b = StableGraph.build([1, 0], [(2, 1), (1, 1)], [(1, 0)])
    psi_a = Decoration.of(a, psi={a.flags[1][0]: 1})
    psi_b = Decoration.of(b, psi={b.flags[0][0]: 1})
    assert make_stratum(a) == make_stratum(b)
    assert make_stratum(a, psi_a) == make_stratum(b, psi_b)


def test_normalization_by_automorphisms():
    # the irreducible nodal locus on M_1,1 integrates to 1/2
    node = StableGraph.build([0], [(1, 0)], [(0, 0)])
    assert integrate_top(make_stratum(node)) == Fraction(1, 2)
    # a boundary point of M_0,4 has no automorphisms
    d = StableGraph.build([0, 0], [(1, 0), (2, 0), (3, 1), (4, 1)], [(0, 1)])
    assert integrate_top(make_stratum(d)) == 1
    assert integrate_top(TautClass.psi(1, 1, {1: 1})) == Fraction(1, 24)


def test_combine_and_slice():
    psi = TautClass.psi(1, 2, {1: 1})
    kap = TautClass.kappa(1, 2, [1])
    mixed = combine(2, psi, Fraction(-1, 3), kap) + TautClass.fundamental(1, 2)
    assert mixed.degrees() == {0, 1}
    assert degree_slice(mixed, 1) == psi.scale(2) - kap.scale(Fraction(1, 3))
    assert degree_slice(mixed, 0) == TautClass.fundamental(1, 2)
    assert not (psi - psi)
    assert 3 * psi == psi + psi + psi


def test_ambient_mismatch():
    with pytest.raises(InvalidInput):
        TautClass.fundamental(1, 1) + TautClass.fundamental(0, 4)


def test_overloaded_decoration_rejected():
    with pytest.raises(InvalidInput):
        TautClass.psi(0, 4, {1: 2})
    node = StableGraph.build([0], [(1, 0)], [(0, 0)])
    with pytest.raises(InvalidInput):
        make_stratum(node, Decoration.of(node, kappa=[(1,)]))


def test_invalid_graph_rejected():
    with pytest.raises(InvalidInput):
        make_stratum(StableGraph.build([0], [(1, 0), (2, 0)]))


def test_json_round_trip():
    rng = random.Random(5)
    for g, n in ((0, 5), (1, 2), (2, 1)):
        for k in range(3):
            x = random_class(rng, g, n, k)
            text = json.dumps(x.to_json())
            assert TautClass.from_json(g, n, json.loads(text)) == x


def test_json_coefficients_are_exact_strings():
    x = TautClass.psi(1, 1, {1: 1}).scale(Fraction(-7, 3))
    (item,) = x.to_json()
    assert item["coeff"] == "-7/3"
    assert parse_fraction("5") == 5
    with pytest.raises(InvalidInput):
        parse_fraction("0.5")
