import random
from fractions import Fraction

import pytest

from tautring import TautClass
from tautring.calculus import FactoredClass
from tautring.gorenstein import generator_basis

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def random_class(rng: random.Random, g: int, n: int, k: int, terms: int = 3) -> TautClass:
    basis = generator_basis(g, n, k)
    out = TautClass.zero(g, n)
    for _ in range(rng.randint(1, terms)):
        s = rng.choice(basis)
        out = out + TautClass(g, n, {s: Fraction(rng.choice([-3, -2, -1, 1, 2, 3]), rng.randint(1, 4))})
    return out


def random_factored(rng: random.Random, factors, degrees) -> FactoredClass:
    return FactoredClass.tensor(*(random_class(rng, g, n, k, terms=2) for (g, n), k in zip(factors, degrees)))


@pytest.fixture
def rng():
    return random.Random(20240601)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {num}: {detail}")
