"""Intersection calculus on decorated strata.

Products, forgetful pullback/pushforward, gluing pullback/pushforward and
top-degree integration.  The workhorse is :func:`_structures`, which lists the
generic (A, B)-structures: graphs Gamma degenerating every vertex of A such
that contracting the A-edges not shared with B recovers B.  Shared edges
contribute the excess factor ``-psi_h - psi_h'``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import InvalidInput
from .graphs import StableGraph, canonical_label, contract_edges, enumerate_stable_graphs, isomorphisms, validate
from .intnum import vertex_integral
from .strata import DecoratedStratum, TautClass, add_pushforward, overloaded

__all__ = [
    "GluingMapSpec",
    "FactoredClass",
    "multiply",
    "integrate_top",
    "integrate_stratum",
    "pullback_forgetful",
    "pushforward_forgetful",
    "pullback_gluing",
    "pushforward_gluing",
    "pairing",
]


# ---------------------------------------------------------------------------
# integration
# ---------------------------------------------------------------------------


def _integrate_decorated(graph: StableGraph, kappa, psi: dict) -> Fraction:
    """Integral of ``xi_{G*}(decoration)``, without the 1/|Aut| factor."""
    total = Fraction(1)
    for v, gv in enumerate(graph.genera):
        exps = [psi.get(f, 0) for f in graph.flags[v]]
        if sum(exps) + sum(kappa[v]) != graph.vertex_dim(v):
            return Fraction(0)
        total *= vertex_integral(gv, exps, kappa[v])
        if not total:
            return total
    return total


def integrate_stratum(s: DecoratedStratum) -> Fraction:
    if s.codim != s.graph.dim:
        return Fraction(0)
    aut = canonical_label(s.graph).automorphisms
    return _integrate_decorated(s.graph, s.kappa, dict(s.psi)) / aut


def integrate_top(a: TautClass) -> Fraction:
    """Degree of the top-codimension part of ``a``."""
    return sum((c * integrate_stratum(s) for s, c in a.terms.items()), Fraction(0))


# ---------------------------------------------------------------------------
# generic structures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Structure:
    gamma: StableGraph
    parent: tuple[int, ...]  # Gamma vertex -> A vertex
    shared: tuple[tuple[int, int], ...]  # A-edges kept in B (excess edges)
    weight: Fraction  # 1 / prod |Aut Gamma_v|
    pulls: tuple  # per isomorphism: (B vertex -> Gamma vertices, B flag -> Gamma flag)


def _factor_labels(graph: StableGraph, v: int) -> dict[int, int]:
    """A-flag at vertex ``v`` -> leg label of the factor M_{g_v, n_v}."""
    return {f: i + 1 for i, f in enumerate(graph.flags[v])}


@lru_cache(maxsize=None)
def _degenerations(g: int, n: int, max_edges: int):
    max_edges = min(max_edges, 3 * g - 3 + n)
    out = []
    for graph in enumerate_stable_graphs(g, n, max_edges):
        out.append((graph, canonical_label(graph).automorphisms))
    return tuple(out)


@lru_cache(maxsize=200_000)
def _structures(a: StableGraph, b: StableGraph) -> tuple[_Structure, ...]:
    """All generic (A, B)-structures, with A's flag ids kept in Gamma."""
    b_key = canonical_label(b).key
    result = []
    ea, eb = a.num_edges, b.num_edges
    fresh_start = max(a.max_flag(), b.max_flag()) + 1
    options = []
    for v, gv in enumerate(a.genera):
        options.append(_degenerations(gv, len(a.flags[v]), eb))
    for r in range(min(ea, eb) + 1):
        extra = eb - r
        for shared_idx in itertools.combinations(range(ea), r):
            for combo in itertools.product(*options):
                if sum(graph.num_edges for graph, _ in combo) != extra:
                    continue
                gamma, parent = _assemble(a, combo, fresh_start)
                contracted = [gamma.edges.index(a.edges[i]) for i in range(ea) if i not in shared_idx]
                gamma_s, morph = contract_edges(gamma, contracted)
                if gamma_s.num_vertices != b.num_vertices or canonical_label(gamma_s).key != b_key:
                    continue
                pulls = []
                for vmap, fmap in isomorphisms(gamma_s, b):
                    over = {}
                    for u, w in enumerate(morph.vertex_map):
                        over.setdefault(vmap[w], []).append(u)
                    flag_back = {bf: gf for gf, bf in fmap.items()}
                    pulls.append((tuple(tuple(over[w]) for w in range(b.num_vertices)), flag_back))
                weight = Fraction(1, math.prod(aut for _, aut in combo))
                result.append(_Structure(gamma, parent, tuple(a.edges[i] for i in shared_idx), weight, tuple(pulls)))
    return tuple(result)


def _assemble(a: StableGraph, combo, fresh_start: int):
    """Glue factor graphs into A; factor legs become A's flags."""
    genera, flags, parent = [], [], []
    edges = list(a.edges)
    nxt = fresh_start
    for v, (factor, _) in enumerate(combo):
        labels = {i + 1: f for i, f in enumerate(a.flags[v])}
        rename = dict(labels)
        for h in factor.half_edges:
            rename[h] = nxt
            nxt += 1
        for fv, gv in zip(factor.flags, factor.genera):
            genera.append(gv)
            flags.append(tuple(rename[f] for f in fv))
            parent.append(v)
        edges.extend((rename[h], rename[k]) for h, k in factor.edges)
    return StableGraph(tuple(genera), tuple(flags), tuple(edges)), tuple(parent)


def _pulled_decorations(st: _Structure, b_kappa, b_psi, excess_sign: int = -1):
    """Decorations on Gamma from one B-decoration, excess included.

    Yields ``(kappa per Gamma vertex, psi dict, coefficient)`` where the
    coefficient already includes ``weight / |Aut B|``.
    """
    nb = len(st.pulls)
    base = st.weight / nb
    nv = st.gamma.num_vertices
    for over, flag_back in st.pulls:
        psi = {}
        for f, e in b_psi:
            psi[flag_back[f]] = psi.get(flag_back[f], 0) + e
        for excess in itertools.product((0, 1), repeat=len(st.shared)):
            epsi = dict(psi)
            for (h, k), side in zip(st.shared, excess):
                f = k if side else h
                epsi[f] = epsi.get(f, 0) + 1
            coeff = base * (excess_sign ** len(st.shared))
            for kappa in _distribute_kappa(b_kappa, over, nv):
                yield kappa, epsi, coeff


def _distribute_kappa(b_kappa, over, nv):
    slots = []
    for w, ks in enumerate(b_kappa):
        for b in ks:
            slots.append((b, over[w]))
    for choice in itertools.product(*(targets for _, targets in slots)):
        kappa = [[] for _ in range(nv)]
        for (b, _), u in zip(slots, choice):
            kappa[u].append(b)
        yield kappa


# ---------------------------------------------------------------------------
# products
# ---------------------------------------------------------------------------


def _stratum_product(sa: DecoratedStratum, sb: DecoratedStratum, out: dict, coeff: Fraction):
    if sb.graph.num_edges > sa.graph.num_edges:
        sa, sb = sb, sa
    a = sa.graph
    aut_a = canonical_label(a).automorphisms
    for st in _structures(a, sb.graph):
        a_kappas = list(_distribute_kappa(sa.kappa, _over(st, len(a.genera)), st.gamma.num_vertices))
        for kappa, psi, c in _pulled_decorations(st, sb.kappa, sb.psi):
            for ak in a_kappas:
                tot_psi = dict(psi)
                for f, e in sa.psi:
                    tot_psi[f] = tot_psi.get(f, 0) + e
                tot_kappa = [kappa[u] + ak[u] for u in range(len(kappa))]
                add_pushforward(out, st.gamma, tot_kappa, tot_psi, coeff * c / aut_a)


def _over(st: _Structure, na: int):
    over = [[] for _ in range(na)]
    for u, v in enumerate(st.parent):
        over[v].append(u)
    return tuple(tuple(x) for x in over)


def multiply(a: TautClass, b: TautClass) -> TautClass:
    """Product in the tautological ring, as a canonical strata combination."""
    a._check(b)
    out = {}
    dim = 3 * a.g - 3 + a.n
    for sa, ca in a.terms.items():
        for sb, cb in b.terms.items():
            if sa.codim + sb.codim > dim:
                continue
            _stratum_product(sa, sb, out, ca * cb)
    return TautClass(a.g, a.n, out)


def pairing(sa: DecoratedStratum, sb: DecoratedStratum) -> Fraction:
    """``integrate_top([A,a] * [B,b])`` without building the product."""
    if sa.codim + sb.codim != sa.graph.dim:
        return Fraction(0)
    if sb.graph.num_edges > sa.graph.num_edges:
        sa, sb = sb, sa
    a = sa.graph
    aut_a = canonical_label(a).automorphisms
    total = Fraction(0)
    for st in _structures(a, sb.graph):
        gamma = st.gamma
        a_kappas = list(_distribute_kappa(sa.kappa, _over(st, len(a.genera)), gamma.num_vertices))
        for kappa, psi, c in _pulled_decorations(st, sb.kappa, sb.psi):
            tot_psi = dict(psi)
            for f, e in sa.psi:
                tot_psi[f] = tot_psi.get(f, 0) + e
            for ak in a_kappas:
                tot_kappa = [tuple(kappa[u] + ak[u]) for u in range(len(kappa))]
                val = _integrate_decorated(gamma, tot_kappa, tot_psi)
                if val:
                    total += c * val
    return total / aut_a


# ---------------------------------------------------------------------------
# forgetful maps
# ---------------------------------------------------------------------------


def _check_stable(g, n):
    if g < 0 or n < 0 or 2 * g - 2 + n <= 0:
        raise InvalidInput(f"(g, n) = ({g}, {n}) is not stable")


def pullback_forgetful(a: TautClass) -> TautClass:
    """Pull back along the map M_{g,n+1} -> M_{g,n} forgetting marking n+1."""
    _check_stable(a.g, a.n)
    new = a.n + 1
    out = {}
    for s, coeff in a.terms.items():
        graph = s.graph
        aut = canonical_label(graph).automorphisms
        shift = {h: h + 1 for h in graph.half_edges}
        psi = {shift.get(f, f): e for f, e in s.psi}
        fresh = graph.max_flag() + 2
        base = _relabel(graph, shift)
        for v in range(graph.num_vertices):
            flags = list(base.flags)
            flags[v] = flags[v] + (new,)
            gv = StableGraph(base.genera, tuple(flags), base.edges)
            kv = list(s.kappa[v])
            # kappa_b -> kappa_b - psi_new^b
            for r in range(len(kv) + 1):
                for chosen in itertools.combinations(range(len(kv)), r):
                    kappa = list(s.kappa)
                    kappa[v] = tuple(kv[j] for j in range(len(kv)) if j not in chosen)
                    p = dict(psi)
                    extra = sum(kv[j] for j in chosen)
                    if extra:
                        p[new] = extra
                    add_pushforward(out, gv, kappa, p, coeff * (-1) ** r / aut)
            # psi_h -> psi_h - D_{h,new}: a rational bubble carrying h and new
            for h in base.flags[v]:
                e = psi.get(h, 0)
                if not e:
                    continue
                h_main, h_bub = fresh, fresh + 1
                flags = list(base.flags)
                flags[v] = tuple(f for f in flags[v] if f != h) + (h_main,)
                flags.append((h, new, h_bub))
                gb = StableGraph(base.genera + (0,), tuple(flags), base.edges + ((h_main, h_bub),))
                p = {f: x for f, x in psi.items() if f != h}
                if e > 1:
                    p[h_main] = e - 1
                kappa = list(s.kappa) + [()]
                add_pushforward(out, gb, kappa, p, -coeff / aut)
    return TautClass(a.g, new, out)


def _relabel(graph: StableGraph, mapping: dict) -> StableGraph:
    get = lambda f: mapping.get(f, f)  # noqa: E731
    return StableGraph(
        graph.genera,
        tuple(tuple(get(f) for f in fl) for fl in graph.flags),
        tuple((get(h), get(k)) for h, k in graph.edges),
    )


def pushforward_forgetful(a: TautClass) -> TautClass:
    """Push forward along M_{g,n} -> M_{g,n-1} forgetting the last marking."""
    if a.n < 1:
        raise InvalidInput("no marking to forget")
    g, n = a.g, a.n - 1
    _check_stable(g, n)
    last = a.n
    out = {}
    for s, coeff in a.terms.items():
        graph = s.graph
        aut = canonical_label(graph).automorphisms
        v = graph.vertex_of[last]
        psi = dict(s.psi)
        kappa = [list(k) for k in s.kappa]
        remaining = tuple(f for f in graph.flags[v] if f != last)
        gv = graph.genera[v]
        if 2 * gv - 2 + len(remaining) > 0:
            flags = list(graph.flags)
            flags[v] = remaining
            target = StableGraph(graph.genera, tuple(flags), graph.edges)
            for kap, p, c in _forget_at_vertex(gv, len(remaining), kappa[v], psi, last, remaining):
                kk = list(kappa)
                kk[v] = kap
                add_pushforward(out, target, kk, p, coeff * c / aut)
            continue
        # unstable rational vertex with two other flags: contract it away
        if s.kappa[v] or any(psi.get(f, 0) for f in graph.flags[v]):
            continue
        x, y = remaining
        partner = graph.partner
        flags = [fl for i, fl in enumerate(graph.flags) if i != v]
        edges = [e for e in graph.edges if x not in e and y not in e]
        keep = [k for i, k in enumerate(kappa) if i != v]
        newpsi = dict(psi)
        if x in partner and y in partner:
            edges.append((partner[x], partner[y]))
        else:
            leg, half = (x, y) if y in partner else (y, x)
            other = partner[half]
            flags = [tuple(leg if f == other else f for f in fl) for fl in flags]
            if other in newpsi:
                newpsi[leg] = newpsi.pop(other)
        target = StableGraph(tuple(gg for i, gg in enumerate(graph.genera) if i != v), tuple(flags), tuple(edges))
        add_pushforward(out, target, keep, newpsi, coeff / aut)
    return TautClass(g, n, out)


def _forget_at_vertex(gv, nv, kv, psi, last, remaining):
    """pi_* of a decoration on M_{gv, nv+1} at one vertex; yields (kappa, psi, coeff)."""
    a = psi.get(last, 0)
    base = {f: e for f, e in psi.items() if f != last}
    m = len(kv)
    kappa0 = 2 * gv - 2 + nv
    for r in range(m + 1):
        for chosen in itertools.combinations(range(m), r):
            c = a + sum(kv[j] for j in chosen)
            rest = [kv[j] for j in range(m) if j not in chosen]
            if c >= 1:
                if c == 1:
                    yield rest, base, Fraction(kappa0)
                else:
                    yield rest + [c - 1], base, Fraction(1)
            else:
                for h in remaining:
                    e = base.get(h, 0)
                    if e:
                        p = dict(base)
                        p[h] = e - 1
                        yield rest, p, Fraction(1)


# ---------------------------------------------------------------------------
# gluing maps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GluingMapSpec:
    """The gluing map of a stable graph, onto M_{g,n}.

    Factor ``v`` is M_{g_v, n_v}; its leg ``i`` is the ``i``-th flag of vertex
    ``v`` in increasing order.
    """

    graph: StableGraph

    def __post_init__(self):
        rep = validate(self.graph)
        if not rep:
            raise InvalidInput(f"invalid gluing graph ({rep.invariant}): {rep.message}")

    @property
    def ambient(self) -> tuple[int, int]:
        return self.graph.genus, self.graph.n

    @property
    def factors(self) -> tuple[tuple[int, int], ...]:
        return tuple((gv, len(fl)) for gv, fl in zip(self.graph.genera, self.graph.flags))

    @classmethod
    def elliptic_tail(cls, g: int) -> "GluingMapSpec":
        """M_{g,1} x M_{1,1} -> M_{g+1}."""
        return cls(StableGraph.build([g, 1], [], [(0, 1)]))

    @classmethod
    def self_gluing(cls, g: int, n: int, loops: int = 1) -> "GluingMapSpec":
        """M_{g,n+2k} -> M_{g+k,n}, identifying the last k pairs of markings."""
        return cls(StableGraph.build([g], [(i, 0) for i in range(1, n + 1)], [(0, 0)] * loops))


class FactoredClass:
    """A sum of tensor products of decorated strata on a product of moduli spaces."""

    __slots__ = ("factors", "terms")

    def __init__(self, factors, terms=None):
        self.factors = tuple(tuple(f) for f in factors)
        self.terms = {k: Fraction(c) for k, c in (terms or {}).items() if c}

    @classmethod
    def tensor(cls, *classes: TautClass) -> "FactoredClass":
        terms = {}
        for combo in itertools.product(*(c.terms.items() for c in classes)):
            key = tuple(s for s, _ in combo)
            coeff = math.prod((c for _, c in combo), start=Fraction(1))
            terms[key] = terms.get(key, 0) + coeff
        return cls([(c.g, c.n) for c in classes], terms)

    def __add__(self, other):
        if self.factors != other.factors:
            raise InvalidInput("factor mismatch")
        terms = dict(self.terms)
        for k, c in other.terms.items():
            terms[k] = terms.get(k, 0) + c
        return FactoredClass(self.factors, terms)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c) -> "FactoredClass":
        return FactoredClass(self.factors, {k: v * c for k, v in self.terms.items()})

    def __eq__(self, other):
        return isinstance(other, FactoredClass) and self.factors == other.factors and self.terms == other.terms

    def __repr__(self):
        return f"FactoredClass({self.factors}, {len(self.terms)} terms)"

    def project(self, i: int) -> TautClass:
        """Push forward to factor ``i`` by integrating over the others."""
        g, n = self.factors[i]
        out = {}
        for key, c in self.terms.items():
            w = c
            for j, s in enumerate(key):
                if j != i:
                    w *= integrate_stratum(s)
                    if not w:
                        break
            if w:
                out[key[i]] = out.get(key[i], 0) + w
        return TautClass(g, n, out)

    def integrate(self) -> Fraction:
        total = Fraction(0)
        for key, c in self.terms.items():
            total += c * math.prod((integrate_stratum(s) for s in key), start=Fraction(1))
        return total

    def multiply(self, other: "FactoredClass") -> "FactoredClass":
        """Factorwise product."""
        if self.factors != other.factors:
            raise InvalidInput("factor mismatch")
        out = FactoredClass(self.factors)
        for ka, ca in self.terms.items():
            for kb, cb in other.terms.items():
                parts = [
                    multiply(TautClass(g, n, {sa: 1}), TautClass(g, n, {sb: 1}))
                    for (g, n), sa, sb in zip(self.factors, ka, kb)
                ]
                out = out + FactoredClass.tensor(*parts).scale(ca * cb)
        return out

    def to_json(self) -> dict:
        return {
            "factors": [list(f) for f in self.factors],
            "terms": [
                {"factors": [s.to_json(Fraction(1)) for s in key], "coeff": f"{c.numerator}/{c.denominator}"}
                for key, c in sorted(self.terms.items(), key=lambda kv: [s.sort_key() for s in kv[0]])
            ],
        }


def _split_into_factors(a: StableGraph, st: _Structure, kappa, psi):
    """Cut Gamma along the A-edges; each piece is a canonical stratum on its factor."""
    keys = []
    for v in range(a.num_vertices):
        members = [u for u, p in enumerate(st.parent) if p == v]
        labels = _factor_labels(a, v)
        internal = [e for e in st.gamma.edges if st.gamma.vertex_of[e[0]] in members and e not in a.edges]
        nxt = len(labels) + 1
        rename = dict(labels)
        for h, k in internal:
            rename[h], rename[k] = nxt, nxt + 1
            nxt += 2
        piece = StableGraph(
            tuple(st.gamma.genera[u] for u in members),
            tuple(tuple(rename[f] for f in st.gamma.flags[u]) for u in members),
            tuple((rename[h], rename[k]) for h, k in internal),
        )
        pk = [tuple(sorted(kappa[u])) for u in members]
        pp = {rename[f]: e for f, e in psi.items() if f in rename and st.gamma.vertex_of[f] in members}
        pp_t = tuple(sorted((f, e) for f, e in pp.items() if e))
        if overloaded(piece, pk, pp_t):
            return None
        keys.append(DecoratedStratum.canonical(piece, pk, pp_t))
    return tuple(keys)


def pullback_gluing(spec: GluingMapSpec, a: TautClass, excess_sign: int = -1) -> FactoredClass:
    """``xi^* a`` for the gluing map of ``spec``, in tensor form.

    ``excess_sign`` exists for mutation tests only; the geometric value is -1.
    """
    if spec.ambient != (a.g, a.n):
        raise InvalidInput(f"spec lands in {spec.ambient}, class lives on ({a.g},{a.n})")
    graph = spec.graph
    out = {}
    for sb, cb in a.terms.items():
        for st in _structures(graph, sb.graph):
            for kappa, psi, c in _pulled_decorations(st, sb.kappa, sb.psi, excess_sign):
                key = _split_into_factors(graph, st, kappa, psi)
                if key is None:
                    continue
                # xi_{Gamma->A *} = prod |Aut Gamma_v| * (tensor of normalized pieces)
                out[key] = out.get(key, 0) + cb * c / st.weight
    return FactoredClass(spec.factors, out)


def pushforward_gluing(spec: GluingMapSpec, fc: FactoredClass) -> TautClass:
    if fc.factors != spec.factors:
        raise InvalidInput(f"factors {fc.factors} do not match spec {spec.factors}")
    graph = spec.graph
    g, n = spec.ambient
    out = {}
    fresh = graph.max_flag() + 1
    for key, c in fc.terms.items():
        genera, flags, edges = [], [], list(graph.edges)
        kappa, psi = [], {}
        weight = Fraction(c)
        for v, s in enumerate(key):
            labels = {i + 1: f for i, f in enumerate(graph.flags[v])}
            rename = dict(labels)
            for h in s.graph.half_edges:
                rename[h] = fresh
                fresh += 1
            genera.extend(s.graph.genera)
            flags.extend(tuple(rename[f] for f in fl) for fl in s.graph.flags)
            edges.extend((rename[h], rename[k]) for h, k in s.graph.edges)
            kappa.extend(s.kappa)
            for f, e in s.psi:
                psi[rename[f]] = e
            weight /= canonical_label(s.graph).automorphisms
        gamma = StableGraph(tuple(genera), tuple(flags), tuple(edges))
        add_pushforward(out, gamma, kappa, psi, weight)
    return TautClass(g, n, out)
