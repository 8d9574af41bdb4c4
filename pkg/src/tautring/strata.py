"""Decorated strata and formal rational combinations of them.

A term ``[G, d]`` stands for ``(1/|Aut G|) * xi_{G*}(d)`` where ``xi_G`` is the
gluing map of the stable graph ``G`` and ``d`` is a monomial in kappa classes
on vertices and psi classes on flags.  Terms are stored in canonical form, so
two TautClass objects are equal iff their term dictionaries are equal.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from .errors import InvalidInput
from .graphs import StableGraph, canonical_label, validate

__all__ = [
    "Decoration",
    "DecoratedStratum",
    "TautClass",
    "make_stratum",
    "combine",
    "degree_slice",
    "add_pushforward",
    "parse_fraction",
]


@dataclass(frozen=True)
class Decoration:
    """kappa exponents per vertex and psi exponents per flag (legs and half-edges)."""

    kappa: tuple[tuple[int, ...], ...]
    psi: tuple[tuple[int, int], ...] = ()

    @classmethod
    def empty(cls, graph: StableGraph) -> "Decoration":
        return cls(tuple(() for _ in graph.genera), ())

    @classmethod
    def of(cls, graph: StableGraph, kappa=None, psi=None) -> "Decoration":
        if kappa is None:
            kappa = [() for _ in graph.genera]
        if isinstance(kappa, dict):
            kappa = [kappa.get(v, ()) for v in range(graph.num_vertices)]
        psi = psi or {}
        if not isinstance(psi, dict):
            psi = dict(psi)
        return cls(
            tuple(tuple(sorted(k)) for k in kappa),
            tuple(sorted((f, e) for f, e in psi.items() if e)),
        )

    @property
    def psi_dict(self) -> dict[int, int]:
        return dict(self.psi)

    def vertex_degree(self, graph: StableGraph, v: int) -> int:
        p = self.psi_dict
        return sum(self.kappa[v]) + sum(p.get(f, 0) for f in graph.flags[v])

    @property
    def degree(self) -> int:
        return sum(sum(k) for k in self.kappa) + sum(e for _, e in self.psi)


def _check_decoration(graph: StableGraph, kappa, psi):
    if len(kappa) != graph.num_vertices:
        raise InvalidInput("kappa needs one entry per vertex")
    flags = set(graph.vertex_of)
    for f, e in psi:
        if f not in flags or e < 0:
            raise InvalidInput(f"psi exponent on unknown flag {f}")
    for k in kappa:
        if any(b <= 0 for b in k):
            raise InvalidInput("kappa indices must be positive")


def overloaded(graph: StableGraph, kappa, psi) -> bool:
    """True if some vertex carries more degree than its dimension."""
    deg = [sum(k) for k in kappa]
    vof = graph.vertex_of
    for f, e in psi:
        deg[vof[f]] += e
    return any(deg[v] > graph.vertex_dim(v) for v in range(graph.num_vertices))


@dataclass(frozen=True)
class DecoratedStratum:
    """A canonical (graph, decoration) pair."""

    graph: StableGraph
    kappa: tuple[tuple[int, ...], ...]
    psi: tuple[tuple[int, int], ...]

    @classmethod
    def canonical(cls, graph: StableGraph, kappa=None, psi=None) -> "DecoratedStratum":
        c = canonical_label(graph, kappa, psi)
        return cls(c.graph, c.kappa, c.psi)

    @property
    def decoration(self) -> Decoration:
        return Decoration(self.kappa, self.psi)

    @cached_property
    def codim(self) -> int:
        return self.graph.num_edges + sum(sum(k) for k in self.kappa) + sum(e for _, e in self.psi)

    @property
    def ambient(self) -> tuple[int, int]:
        return self.graph.genus, self.graph.n

    def sort_key(self):
        return (self.codim, canonical_label(self.graph).key, self.kappa, self.psi)

    def to_json(self, coeff: Fraction) -> dict:
        return {
            "graph": self.graph.to_json(),
            "kappa": [list(k) for k in self.kappa],
            "psi": [[f, e] for f, e in self.psi],
            "coeff": f"{coeff.numerator}/{coeff.denominator}",
        }


def parse_fraction(text) -> Fraction:
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    if not isinstance(text, str) or "." in text or "e" in text.lower():
        raise InvalidInput(f"coefficient {text!r} is not an exact fraction string")
    return Fraction(text)


class TautClass:
    """A rational linear combination of decorated strata on M_{g,n}."""

    __slots__ = ("g", "n", "terms", "_hash")

    def __init__(self, g: int, n: int, terms=None):
        self.g = g
        self.n = n
        clean = {}
        for key, c in (terms or {}).items():
            c = Fraction(c)
            if c:
                clean[key] = c
        self.terms = clean
        self._hash = None

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, g: int, n: int) -> "TautClass":
        return cls(g, n)

    @classmethod
    def fundamental(cls, g: int, n: int) -> "TautClass":
        return make_stratum(StableGraph.smooth(g, n))

    @classmethod
    def psi(cls, g: int, n: int, exponents: dict) -> "TautClass":
        return make_stratum(StableGraph.smooth(g, n), Decoration.of(StableGraph.smooth(g, n), psi=exponents))

    @classmethod
    def kappa(cls, g: int, n: int, indices) -> "TautClass":
        smooth = StableGraph.smooth(g, n)
        return make_stratum(smooth, Decoration.of(smooth, kappa=[tuple(indices)]))

    # -- arithmetic -------------------------------------------------------

    def _check(self, other):
        if (self.g, self.n) != (other.g, other.n):
            raise InvalidInput(f"ambient mismatch: ({self.g},{self.n}) vs ({other.g},{other.n})")

    def __add__(self, other):
        if not isinstance(other, TautClass):
            return NotImplemented
        return combine(1, self, 1, other)

    def __sub__(self, other):
        if not isinstance(other, TautClass):
            return NotImplemented
        return combine(1, self, -1, other)

    def __neg__(self):
        return TautClass(self.g, self.n, {k: -c for k, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, TautClass):
            from .calculus import multiply

            return multiply(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def scale(self, c) -> "TautClass":
        c = Fraction(c)
        return TautClass(self.g, self.n, {k: c * v for k, v in self.terms.items()})

    def __eq__(self, other):
        if not isinstance(other, TautClass):
            return NotImplemented
        return (self.g, self.n) == (other.g, other.n) and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.g, self.n, frozenset(self.terms.items())))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.sorted_terms())

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: kv[0].sort_key())

    def degrees(self) -> set[int]:
        return {k.codim for k in self.terms}

    def __repr__(self):
        if not self.terms:
            return f"TautClass({self.g},{self.n}: 0)"
        parts = [f"{c}*[{s.graph.genera}, E={s.graph.edges}, k={s.kappa}, psi={s.psi}]" for s, c in self.sorted_terms()]
        return f"TautClass({self.g},{self.n}: " + " + ".join(parts) + ")"

    # -- serialization ----------------------------------------------------

    def to_json(self) -> list:
        return [s.to_json(c) for s, c in self.sorted_terms()]

    @classmethod
    def from_json(cls, g: int, n: int, data) -> "TautClass":
        out = TautClass(g, n)
        for item in data:
            graph = StableGraph.from_json(item["graph"])
            dec = Decoration.of(graph, [tuple(k) for k in item["kappa"]], {f: e for f, e in item["psi"]})
            out = out + make_stratum(graph, dec).scale(parse_fraction(item["coeff"]))
        return out


def make_stratum(graph: StableGraph, decoration: Decoration | None = None) -> TautClass:
    """The class ``(1/|Aut G|) xi_{G*}(decoration)`` as a one-term TautClass."""
    rep = validate(graph)
    if not rep:
        raise InvalidInput(f"invalid stable graph ({rep.invariant}): {rep.message}")
    if decoration is None:
        decoration = Decoration.empty(graph)
    _check_decoration(graph, decoration.kappa, decoration.psi)
    for v in range(graph.num_vertices):
        if decoration.vertex_degree(graph, v) > graph.vertex_dim(v):
            raise InvalidInput(f"decoration at vertex {v} exceeds its dimension {graph.vertex_dim(v)}")
    key = DecoratedStratum.canonical(graph, decoration.kappa, decoration.psi)
    return TautClass(graph.genus, graph.n, {key: Fraction(1)})


def combine(coeff_a, a: TautClass, coeff_b, b: TautClass) -> TautClass:
    a._check(b)
    ca, cb = Fraction(coeff_a), Fraction(coeff_b)
    terms = {k: ca * c for k, c in a.terms.items()}
    for k, c in b.terms.items():
        terms[k] = terms.get(k, 0) + cb * c
    return TautClass(a.g, a.n, terms)


def degree_slice(a: TautClass, k: int) -> TautClass:
    return TautClass(a.g, a.n, {s: c for s, c in a.terms.items() if s.codim == k})


def add_pushforward(terms: dict, graph: StableGraph, kappa, psi, coeff) -> None:
    """Accumulate ``coeff * xi_{graph*}(kappa, psi)`` into a term dictionary.

    Works for any (non-canonical) labeling of ``graph``; overloaded
    decorations are dropped since they vanish.
    """
    if not coeff:
        return
    kappa = tuple(tuple(sorted(k)) for k in kappa)
    if isinstance(psi, dict):
        psi = tuple(sorted((f, e) for f, e in psi.items() if e))
    if overloaded(graph, kappa, psi):
        return
    c = canonical_label(graph, kappa, psi)
    aut = canonical_label(graph).automorphisms
    key = DecoratedStratum(c.graph, c.kappa, c.psi)
    terms[key] = terms.get(key, 0) + Fraction(coeff) * aut


def kappa_distributions(kappa_list, targets):
    """Ways to hand each kappa index in ``kappa_list`` to one of ``targets``."""
    for choice in itertools.product(targets, repeat=len(kappa_list)):
        out = {}
        for b, t in zip(kappa_list, choice):
            out.setdefault(t, []).append(b)
        yield out
