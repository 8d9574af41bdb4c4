"""Pairing matrices, exact ranks and Gorenstein bookkeeping."""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .calculus import FactoredClass, GluingMapSpec, integrate_top, pairing, pushforward_forgetful, pushforward_gluing
from .errors import BudgetExceeded, InvalidInput
from .graphs import StableGraph, enumerate_stable_graphs
from .strata import DecoratedStratum, TautClass

__all__ = [
    "DEFAULT_BUDGET",
    "PairingMatrix",
    "GorensteinStatus",
    "generator_basis",
    "pairing_matrix",
    "rank_exact",
    "betti_numbers",
    "gorenstein_report",
    "socle_check",
    "known_status",
    "C_TABLE",
    "D_TABLE",
    "E_TABLE",
]

DEFAULT_BUDGET = 20_000
INF = math.inf


def _check_range(g, n, k):
    if g < 0 or n < 0 or 2 * g - 2 + n <= 0:
        raise InvalidInput(f"(g, n) = ({g}, {n}) is not stable")
    d = 3 * g - 3 + n
    if not 0 <= k <= d:
        raise InvalidInput(f"degree {k} outside 0..{d}")
    return d


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------


def _partitions(m: int, largest: int | None = None):
    """Partitions of m as non-increasing tuples."""
    if m == 0:
        yield ()
        return
    largest = m if largest is None else largest
    for first in range(min(m, largest), 0, -1):
        for rest in _partitions(m - first, first):
            yield (first,) + rest


def _compositions(total: int, parts: int):
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _vertex_decorations(graph: StableGraph, v: int, degree: int):
    flags = graph.flags[v]
    for kdeg in range(degree + 1):
        for kappa in _partitions(kdeg):
            for exps in _compositions(degree - kdeg, len(flags)):
                yield tuple(sorted(kappa)), tuple((f, e) for f, e in zip(flags, exps) if e)


@lru_cache(maxsize=None)
def _basis_cached(g, n, k, budget):
    seen = {}
    for graph in enumerate_stable_graphs(g, n, min(k, 3 * g - 3 + n), budget=budget):
        rest = k - graph.num_edges
        if rest < 0:
            continue
        dims = [graph.vertex_dim(v) for v in range(graph.num_vertices)]
        for split in _compositions(rest, graph.num_vertices):
            if any(s > d for s, d in zip(split, dims)):
                continue
            per_vertex = [list(_vertex_decorations(graph, v, s)) for v, s in enumerate(split)]
            for combo in itertools.product(*per_vertex):
                kappa = [c[0] for c in combo]
                psi = tuple(sorted(p for c in combo for p in c[1]))
                key = DecoratedStratum.canonical(graph, kappa, psi)
                seen.setdefault(key, None)
                if budget is not None and len(seen) > budget:
                    raise BudgetExceeded(f"more than {budget} generators in R^{k}(M_{g},{n})")
    return tuple(sorted(seen, key=lambda s: s.sort_key()))


def generator_basis(g: int, n: int, k: int, budget: int | None = DEFAULT_BUDGET) -> list[DecoratedStratum]:
    """All codimension-k decorated strata up to isomorphism (a spanning set of R^k)."""
    _check_range(g, n, k)
    return list(_basis_cached(g, n, k, budget))


# ---------------------------------------------------------------------------
# pairing matrices and rank
# ---------------------------------------------------------------------------


@dataclass
class PairingMatrix:
    g: int
    n: int
    k: int
    rows: list
    cols: list
    entries: list = field(repr=False)

    @property
    def shape(self):
        return len(self.rows), len(self.cols)

    def transpose(self) -> "PairingMatrix":
        d = 3 * self.g - 3 + self.n
        t = [list(r) for r in zip(*self.entries)] if self.entries else []
        return PairingMatrix(self.g, self.n, d - self.k, self.cols, self.rows, t)


def pairing_matrix(g: int, n: int, k: int, budget: int | None = DEFAULT_BUDGET, threads: int = 1) -> PairingMatrix:
    """``entry(i, j) = integrate_top(row_i * col_j)`` for codim k against codim d-k.

    Raises BudgetExceeded before computing anything if either basis, or the
    matrix itself, is larger than ``budget``.
    """
    d = _check_range(g, n, k)
    rows = generator_basis(g, n, k, budget)
    cols = generator_basis(g, n, d - k, budget)
    if budget is not None and len(rows) * len(cols) > budget * 50:
        raise BudgetExceeded(f"pairing matrix {len(rows)}x{len(cols)} exceeds budget {budget}")

    def row(a):
        return [pairing(a, b) for b in cols]

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            entries = list(pool.map(row, rows))
    else:
        entries = [row(a) for a in rows]
    return PairingMatrix(g, n, k, rows, cols, entries)


def rank_exact(m) -> int:
    """Rank over Q by fraction-free (Bareiss) elimination."""
    entries = m.entries if isinstance(m, PairingMatrix) else m
    rows = []
    for r in entries:
        r = [Fraction(x) for x in r]
        den = math.lcm(*(x.denominator for x in r)) if r else 1
        rows.append([int(x * den) for x in r])
    if not rows or not rows[0]:
        return 0
    nrows, ncols = len(rows), len(rows[0])
    rank, prev = 0, 1
    for col in range(ncols):
        pivot = next((i for i in range(rank, nrows) if rows[i][col]), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        p = rows[rank][col]
        for i in range(rank + 1, nrows):
            a = rows[i][col]
            ri, rr = rows[i], rows[rank]
            rows[i] = [(p * ri[j] - a * rr[j]) // prev for j in range(ncols)]
        prev = p
        rank += 1
        if rank == nrows:
            break
    return rank


# ---------------------------------------------------------------------------
# dimension oracles
# ---------------------------------------------------------------------------


def _poly_mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _poly_add(a, b):
    out = [0] * max(len(a), len(b))
    for i, x in enumerate(a):
        out[i] += x
    for i, x in enumerate(b):
        out[i] += x
    return out


@lru_cache(maxsize=None)
def _genus0_poincare(n: int) -> tuple:
    """Poincare polynomial of M_{0,n} (in q = degree 1 per complex codim)."""
    if n == 3:
        return (1,)
    m = n - 1
    # P_{m+1} = (1+q) P_m + (q/2) sum_{j=2}^{m-2} C(m,j) P_{j+1} P_{m-j+1}
    out = _poly_mul([1, 1], list(_genus0_poincare(m)))
    acc = [0]
    for j in range(2, m - 1):
        term = _poly_mul(list(_genus0_poincare(j + 1)), list(_genus0_poincare(m - j + 1)))
        acc = _poly_add(acc, [math.comb(m, j) * c for c in term])
    acc = [Fraction(0)] + [Fraction(c, 2) for c in acc]
    total = _poly_add(out, acc)
    while len(total) > 1 and total[-1] == 0:
        total.pop()
    return tuple(int(c) for c in total)


def betti_numbers(g: int, n: int) -> tuple | None:
    """Even Betti numbers ``dim H^{2k}`` where a built-in oracle exists, else None.

    Genus 0 uses the boundary recursion; genus 1 with n <= 3 uses the Picard
    rank ``2^n - n`` and Poincare duality.
    """
    if g == 0 and n >= 3:
        return _genus0_poincare(n)
    if g == 1 and 1 <= n <= 3:
        pic = 2**n - n
        return {1: (1, 1), 2: (1, pic, 1), 3: (1, pic, pic, 1)}[n]
    return None


# ---------------------------------------------------------------------------
# known status
# ---------------------------------------------------------------------------

# n-bounds: Gorenstein (cohomological) for n < c(g); even cohomology
# tautological for n < d(g); odd cohomology vanishes for n < e(g).
C_TABLE = {0: INF, 1: INF, 2: 20, 3: 9, 4: 7, 5: 5, 6: 3, 7: 1}
D_TABLE = {0: INF, 1: INF, 2: 20, 3: 12, 4: 10, 5: 8, 6: 6, 7: 4, 8: 1}
E_TABLE = {0: INF, 1: 11, 2: 10, 3: 9, 4: 7, 5: 5, 6: 3, 7: 1}


@dataclass(frozen=True)
class GorensteinStatus:
    g: int
    n: int
    verdict: str
    source: str
    odd_cohomology_vanishes: bool | None = None

    def to_json(self) -> dict:
        return {
            "g": self.g,
            "n": self.n,
            "verdict": self.verdict,
            "source": self.source,
            "odd_cohomology_vanishes": self.odd_cohomology_vanishes,
        }


def known_status(g: int, n: int) -> GorensteinStatus:
    if g < 0 or n < 0 or 2 * g - 2 + n <= 0:
        raise InvalidInput(f"(g, n) = ({g}, {n}) is not stable")
    odd = None
    if g in E_TABLE:
        odd = n < E_TABLE[g]
    if g >= 2 and 2 * g + n >= 24:
        verdict, source = "NotGorenstein-proven", "non-gorenstein-region:g>=2,2g+n>=24"
    elif g in (0, 1):
        verdict, source = "Gorenstein-proven", "keel;petersen-genus-one"
    elif n < C_TABLE.get(g, 0):
        verdict, source = "Gorenstein-proven", f"table-c:n<c({g})={C_TABLE[g]}"
    elif n < D_TABLE.get(g, 0):
        verdict, source = "Gorenstein-proven", f"table-d:n<d({g})={D_TABLE[g]}"
    elif 2 * g + n < 24:
        verdict, source = "Conjectured-Gorenstein", "conjecture:g>=2,2g+n<24"
    else:  # pragma: no cover - every stable pair falls in one of the cases above
        verdict, source = "Open", "none"
    return GorensteinStatus(g, n, verdict, source, odd)


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


def _top_psi(g, n) -> TautClass:
    d = 3 * g - 3 + n
    if n == 0:
        return TautClass.kappa(g, n, [d]) if d else TautClass.fundamental(g, n)
    return TautClass.psi(g, n, {1: d}) if d else TautClass.fundamental(g, n)


def socle_check(g: int, n: int, budget: int | None = DEFAULT_BUDGET) -> bool:
    """Degree (0, d) pairing has rank 1, and top classes survive one
    forgetful and one self-gluing pushforward onto (g, n)."""
    d = _check_range(g, n, 0)
    if rank_exact(pairing_matrix(g, n, 0, budget)) != 1:
        return False
    # forgetful map M_{g,n+1} -> M_{g,n}
    up = _top_psi(g, n + 1)
    if integrate_top(up) == 0 or integrate_top(pushforward_forgetful(up)) == 0:
        return False
    if g >= 1 and 2 * (g - 1) - 2 + n + 2 > 0:
        spec = GluingMapSpec.self_gluing(g - 1, n)
        src = _top_psi(g - 1, n + 2)
        image = pushforward_gluing(spec, FactoredClass.tensor(src))
        if integrate_top(image) == 0:
            return False
    return d >= 0


def gorenstein_report(
    g: int,
    n: int,
    dimension_oracle=None,
    budget: int | None = DEFAULT_BUDGET,
    threads: int = 1,
) -> dict:
    """Per-degree pairing ranks, defects against a dimension table, socle and status.

    ``dimension_oracle`` may be a sequence of dimensions or the string
    ``"builtin"`` to use :func:`betti_numbers`.
    """
    d = _check_range(g, n, 0)
    if dimension_oracle == "builtin":
        dimension_oracle = betti_numbers(g, n)
    # budget check up front so no partial report is produced
    sizes = [len(generator_basis(g, n, k, budget)) for k in range(d + 1)]
    ranks = []
    for k in range(d + 1):
        if k <= d - k:
            ranks.append(rank_exact(pairing_matrix(g, n, k, budget, threads)))
        else:
            ranks.append(ranks[d - k])
    defects = []
    if dimension_oracle is not None:
        if len(dimension_oracle) != d + 1:
            raise InvalidInput(f"dimension table needs {d + 1} entries")
        defects = [k for k in range(d + 1) if ranks[k] < dimension_oracle[k]]
    return {
        "g": g,
        "n": n,
        "generators": sizes,
        "degree_ranks": ranks,
        "dimensions": list(dimension_oracle) if dimension_oracle is not None else None,
        "socle": socle_check(g, n, budget),
        "defects": defects,
        "status": known_status(g, n).to_json(),
    }
