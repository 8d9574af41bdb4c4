"""Identity suites: the forgetful push-pull identity and the elliptic-tail
self-intersection with its -1/24 projection."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .calculus import FactoredClass, GluingMapSpec, multiply, pullback_forgetful, pullback_gluing, pushforward_forgetful, pushforward_gluing
from .graphs import StableGraph
from .strata import TautClass, make_stratum

__all__ = ["CheckResult", "push_pull_identity", "elliptic_tail_expansion", "push_pull_suite", "elliptic_tail_suite", "verify_lemmas"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}" + (f"  ({self.detail})" if self.detail else "")


def _low_generators(g: int, n: int, max_codim: int = 1):
    from .gorenstein import generator_basis

    d = 3 * g - 3 + n
    for k in range(min(max_codim, d) + 1):
        for s in generator_basis(g, n, k):
            yield TautClass(g, n, {s: 1})


def push_pull_identity(alpha: TautClass) -> TautClass:
    """``(1/(2g-2+n)) pi_*(pi^* alpha * psi_{n+1})``; equals alpha."""
    g, n = alpha.g, alpha.n
    up = pullback_forgetful(alpha)
    prod = multiply(up, TautClass.psi(g, n + 1, {n + 1: 1}))
    return pushforward_forgetful(prod).scale(Fraction(1, 2 * g - 2 + n))


def push_pull_suite(cases=((1, 1), (0, 4))) -> list[CheckResult]:
    out = []
    for g, n in cases:
        for alpha in _low_generators(g, n):
            (s, _), = alpha.terms.items()
            ok = push_pull_identity(alpha) == alpha
            out.append(CheckResult(f"push-pull ({g},{n}) codim {s.codim} graph={s.graph.genera}/{len(s.graph.edges)}e psi={s.psi} kappa={s.kappa}", ok))
    return out


def _delta_tail(g: int) -> TautClass:
    """delta_{1,emptyset} on M_{g,1}: an unmarked elliptic tail."""
    return make_stratum(StableGraph.build([g - 1, 1], [(1, 0)], [(0, 1)]))


def elliptic_tail_expansion(alpha: TautClass, excess_sign: int = -1):
    """Return ``(computed, expected)`` for phi^* phi_*(alpha (x) 1) on M_{g,1} x M_{1,1}."""
    g = alpha.g
    spec = GluingMapSpec.elliptic_tail(g)
    one = TautClass.fundamental(1, 1)
    image = pushforward_gluing(spec, FactoredClass.tensor(alpha, one))
    computed = pullback_gluing(spec, image, excess_sign=excess_sign)
    left = multiply(alpha, _delta_tail(g) - TautClass.psi(g, 1, {1: 1}))
    expected = FactoredClass.tensor(left, one) - FactoredClass.tensor(alpha, TautClass.psi(1, 1, {1: 1}))
    return computed, expected


def elliptic_tail_suite(g: int = 2, excess_sign: int = -1) -> list[CheckResult]:
    """The expansion for alpha = 1 and the -1/24 projection for alpha in {1, psi_1}.

    The literal expansion ``alpha*(delta - psi_1) (x) 1 - alpha (x) psi_1`` only
    holds for classes whose restriction to the elliptic-tail divisor is
    symmetric in the marking and the node; for psi_1 the divisor term carries
    psi on the node instead, which the tests check separately.
    """
    out = []
    one = TautClass.fundamental(g, 1)
    computed, expected = elliptic_tail_expansion(one, excess_sign)
    out.append(CheckResult(f"self-intersection expansion alpha=1 on M_{g},1", computed == expected))
    for name, alpha in (("1", one), ("psi_1", TautClass.psi(g, 1, {1: 1}))):
        computed, _ = elliptic_tail_expansion(alpha, excess_sign)
        proj = computed.project(0)
        ok = proj == alpha.scale(Fraction(-1, 24))
        out.append(CheckResult(f"pr_1* = -1/24 alpha, alpha={name}", ok))
    return out


def verify_lemmas(g: int | None = None, n: int | None = None, excess_sign: int = -1) -> list[CheckResult]:
    """Run the suites; restricting to (g, n) runs only what applies there."""
    if g is None:
        return push_pull_suite() + elliptic_tail_suite(2, excess_sign)
    results = []
    if n is not None and 2 * g - 2 + n > 0:
        results += push_pull_suite(((g, n),))
    if g >= 2 and n in (None, 1):
        results += elliptic_tail_suite(g, excess_sign)
    return results
