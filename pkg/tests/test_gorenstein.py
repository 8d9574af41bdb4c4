import math
import random
from fractions import Fraction

import pytest

from tautring import BudgetExceeded, InvalidInput, TautClass
from tautring.calculus import pairing
from tautring.gorenstein import (
    betti_numbers,
    generator_basis,
    gorenstein_report,
    known_status,
    pairing_matrix,
    rank_exact,
    socle_check,
)
from tautring.graphs import StableGraph
from tautring.strata import make_stratum


def _rank_by_elimination(rows):
    """Plain Gauss-Jordan over Fraction, as an independent check on Bareiss."""
    m = [[Fraction(x) for x in r] for r in rows]
    rank = 0
    for col in range(len(m[0]) if m else 0):
        piv = next((i for i in range(rank, len(m)) if m[i][col]), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for i in range(len(m)):
            if i != rank and m[i][col]:
                f = m[i][col] / m[rank][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[rank])]
        rank += 1
    return rank


def test_rank_exact_small_examples():
    assert rank_exact([[1, 2], [2, 4]]) == 1
    assert rank_exact([[Fraction(1, 3), 1], [1, 3]]) == 1
    assert rank_exact([[0, 0], [0, 0]]) == 0
    assert rank_exact([[1, 0, 0], [0, 1, 0], [0, 0, 1]]) == 3
    assert rank_exact([]) == 0


def test_rank_exact_random_low_rank():
    rng = random.Random(1)
    for _ in range(50):
        r, rows, cols = rng.randint(0, 4), rng.randint(1, 7), rng.randint(1, 7)
        left = [[Fraction(rng.randint(-5, 5), rng.randint(1, 3)) for _ in range(r)] for _ in range(rows)]
        right = [[rng.randint(-5, 5) for _ in range(cols)] for _ in range(r)]
        m = [[sum((left[i][t] * right[t][j] for t in range(r)), Fraction(0)) for j in range(cols)] for i in range(rows)]
        assert rank_exact(m) == _rank_by_elimination(m)


@pytest.mark.parametrize("n", range(4, 11))
def test_genus_zero_betti_second(n):
    # Picard rank of M_0,n
    b = betti_numbers(0, n)
    assert b[1] == 2 ** (n - 1) - math.comb(n, 2) - 1
    assert b == b[::-1]


def test_betti_literature_values():
    assert betti_numbers(0, 5) == (1, 5, 1)
    assert betti_numbers(0, 6) == (1, 16, 16, 1)
    assert betti_numbers(0, 7) == (1, 42, 127, 42, 1)
    assert sum(betti_numbers(0, 8)) == 1630  # Euler characteristic
    assert betti_numbers(1, 1) == (1, 1)
    assert betti_numbers(1, 2) == (1, 2, 1)
    assert betti_numbers(1, 3) == (1, 5, 5, 1)
    assert betti_numbers(2, 0) is None


def test_pairing_matrix_shape_and_entries():
    p = pairing_matrix(0, 4, 0)
    assert p.shape == (1, len(generator_basis(0, 4, 1)))
    assert all(x == 1 for x in p.entries[0])
    q = pairing_matrix(1, 1, 0)
    assert q.entries[0] == [pairing(q.rows[0], c) for c in q.cols]
    assert Fraction(1, 24) in q.entries[0]
    t = pairing_matrix(0, 5, 1).transpose()
    assert t.k == 1 and t.shape == pairing_matrix(0, 5, 1).shape[::-1]


def test_threads_do_not_change_entries():
    assert pairing_matrix(1, 3, 1, threads=3).entries == pairing_matrix(1, 3, 1).entries


@pytest.mark.parametrize("g,n", [(0, 5), (0, 6), (1, 2), (1, 3)])
def test_ranks_equal_betti_numbers(g, n):
    rep = gorenstein_report(g, n, "builtin")
    assert rep["degree_ranks"] == list(betti_numbers(g, n))
    assert rep["socle"] and rep["defects"] == []


def test_genus_two_report_without_oracle():
    rep = gorenstein_report(2, 0)
    assert rep["degree_ranks"][0] == rep["degree_ranks"][3] == 1
    assert rep["degree_ranks"] == rep["degree_ranks"][::-1]
    assert rep["dimensions"] is None and rep["socle"]


def test_defects_are_reported():
    rep = gorenstein_report(0, 5, [1, 6, 1])
    assert rep["defects"] == [1]
    with pytest.raises(InvalidInput):
        gorenstein_report(0, 5, [1, 5])


def _boundary_05(s):
    rest = [i for i in range(1, 6) if i not in s]
    return make_stratum(StableGraph.build([0, 0], [(i, 0) for i in s] + [(i, 1) for i in rest], [(0, 1)]))


def test_relation_vector_lies_in_kernel():
    # psi_1 = D_14 + D_15 + D_23 on M_0,5
    relation = TautClass.psi(0, 5, {1: 1}) - _boundary_05((1, 4)) - _boundary_05((1, 5)) - _boundary_05((2, 3))
    p = pairing_matrix(0, 5, 1)
    index = {s: i for i, s in enumerate(p.rows)}
    vec = [Fraction(0)] * len(p.rows)
    for s, c in relation.terms.items():
        vec[index[s]] += c
    combo = [sum((vec[i] * p.entries[i][j] for i in range(len(vec))), Fraction(0)) for j in range(len(p.cols))]
    assert all(x == 0 for x in combo)
    extended = p.entries + [[a + b for a, b in zip(p.entries[0], combo)]]
    assert rank_exact(extended) == rank_exact(p)


def test_socle_check():
    for g, n in ((0, 3), (0, 5), (1, 1), (1, 2), (2, 0)):
        assert socle_check(g, n)


def test_budget_exceeded():
    with pytest.raises(BudgetExceeded):
        pairing_matrix(2, 3, 2, budget=10)
    with pytest.raises(BudgetExceeded):
        generator_basis(3, 0, 3, budget=5)


def test_range_errors():
    with pytest.raises(InvalidInput):
        generator_basis(0, 4, 2)
    with pytest.raises(InvalidInput):
        pairing_matrix(0, 2, 0)


# -- known status --


def test_known_status_examples():
    assert known_status(2, 20).verdict == "NotGorenstein-proven"
    assert known_status(3, 11).verdict == "Gorenstein-proven"
    assert known_status(3, 11).source.startswith("table-d")
    assert known_status(3, 8).source.startswith("table-c")
    assert known_status(3, 15).verdict == "Conjectured-Gorenstein"
    assert known_status(0, 30).verdict == "Gorenstein-proven"
    assert known_status(1, 100).verdict == "Gorenstein-proven"
    assert known_status(12, 0).verdict == "NotGorenstein-proven"
    assert known_status(9, 5).verdict == "Conjectured-Gorenstein"


def test_known_status_odd_cohomology():
    assert known_status(1, 10).odd_cohomology_vanishes
    assert not known_status(1, 11).odd_cohomology_vanishes
    assert known_status(0, 40).odd_cohomology_vanishes
    assert known_status(9, 0).odd_cohomology_vanishes is None


def test_known_status_json_and_errors():
    data = known_status(4, 3).to_json()
    assert set(data) == {"g", "n", "verdict", "source", "odd_cohomology_vanishes"}
    with pytest.raises(InvalidInput):
        known_status(1, 0)
    with pytest.raises(InvalidInput):
        known_status(-1, 5)
