"""Intersection numbers of psi and kappa classes on a single moduli space."""
from __future__ import annotations

import itertools
from fractions import Fraction
from functools import lru_cache

from .errors import InvalidInput

__all__ = ["psi_intersection", "vertex_integral", "double_factorial"]


def double_factorial(k: int) -> int:
    """``k!!`` with ``(-1)!! = 1``."""
    out = 1
    while k > 1:
        out *= k
        k -= 2
    return out


def psi_intersection(g: int, exponents) -> Fraction:
    """The correlator <tau_{a_1} ... tau_{a_n}>_g.

    Raises InvalidInput unless ``sum(a) == 3g - 3 + n``.
    """
    a = tuple(int(x) for x in exponents)
    n = len(a)
    if g < 0 or any(x < 0 for x in a):
        raise InvalidInput("negative genus or exponent")
    if 2 * g - 2 + n <= 0:
        raise InvalidInput(f"M_{{{g},{n}}} is unstable")
    if sum(a) != 3 * g - 3 + n:
        raise InvalidInput(f"exponents {a} do not sum to 3g-3+n = {3 * g - 3 + n}")
    return _correlator(g, tuple(sorted(a, reverse=True)))


@lru_cache(maxsize=None)
def _correlator(g: int, a: tuple) -> Fraction:
    # a is sorted decreasingly, stable and of top degree
    n = len(a)
    if g == 0 and n == 3:
        return Fraction(1)
    if g == 1 and n == 1:
        return Fraction(1, 24)
    if a[-1] == 0:
        # string equation
        rest = a[:-1]
        total = Fraction(0)
        for i, x in enumerate(rest):
            if x > 0:
                total += _lookup(g, rest[:i] + (x - 1,) + rest[i + 1 :])
        return total
    # Dijkgraaf-Verlinde-Verlinde recursion on the largest exponent
    k, rest = a[0], a[1:]
    total = Fraction(0)
    for i, x in enumerate(rest):
        others = rest[:i] + rest[i + 1 :]
        coeff = Fraction(double_factorial(2 * k + 2 * x - 1), double_factorial(2 * x - 1))
        total += coeff * _lookup(g, (k + x - 1,) + others)
    half = Fraction(0)
    for r in range(k - 1):
        s = k - 2 - r
        w = double_factorial(2 * r + 1) * double_factorial(2 * s + 1)
        half += w * _lookup(g - 1, (r, s) + rest)
        m = len(rest)
        for mask in range(1 << m):
            left = tuple(rest[j] for j in range(m) if mask >> j & 1)
            right = tuple(rest[j] for j in range(m) if not mask >> j & 1)
            for g1 in range(g + 1):
                half += w * _lookup(g1, (r,) + left) * _lookup(g - g1, (s,) + right)
    total += half / 2
    return total / double_factorial(2 * k + 1)


def _lookup(g, a):
    n = len(a)
    if g < 0 or 2 * g - 2 + n <= 0 or any(x < 0 for x in a) or sum(a) != 3 * g - 3 + n:
        return Fraction(0)
    return _correlator(g, tuple(sorted(a, reverse=True)))


def vertex_integral(g: int, psi, kappa=()) -> Fraction:
    """Integral of ``prod psi_i^{a_i} * prod kappa_{b_j}`` over M_{g,n}.

    ``psi`` lists one exponent per marking (zeros allowed); kappa classes
    follow the convention kappa_b = pi_*(psi_{n+1}^{b+1}).  Returns 0 when the
    degree is not top.
    """
    a = tuple(psi)
    n = len(a)
    if 2 * g - 2 + n <= 0:
        raise InvalidInput(f"M_{{{g},{n}}} is unstable")
    if sum(a) + sum(kappa) != 3 * g - 3 + n:
        return Fraction(0)
    return _kappa_integral(g, tuple(sorted(a, reverse=True)), tuple(sorted(kappa)))


@lru_cache(maxsize=None)
def _kappa_integral(g, a, b):
    if not b:
        return _lookup(g, a)
    # integrate the last kappa over an extra marking, pulling the rest back:
    # pi^* kappa_c = kappa_c - psi_{n+1}^c
    last, rest = b[-1], b[:-1]
    total = Fraction(0)
    m = len(rest)
    for r in range(m + 1):
        for chosen in itertools.combinations(range(m), r):
            extra = last + 1 + sum(rest[j] for j in chosen)
            remaining = tuple(rest[j] for j in range(m) if j not in chosen)
            sign = -1 if r % 2 else 1
            total += sign * _kappa_integral(g, tuple(sorted(a + (extra,), reverse=True)), remaining)
    return total
