"""Admissible double covers and the pullback of Hurwitz cycles to boundary strata.

G is always Z/2.  An admissible G-graph is a stable graph ``Gamma`` with an
involution ``sigma`` on flags.  A flag has stabilizer Z/2 exactly when sigma
fixes it; a vertex fixed by sigma carries a connected double cover branched
at its fixed flags, a swapped pair of vertices carries a trivial cover.

Given a target graph ``B``, a generic B-structure is a graph ``Gamma`` that
degenerates every vertex of ``B`` (so B's edges sit inside Gamma and the other
edges get contracted) together with an involution for which every edge of
Gamma lies in ``Im(beta) U sigma(Im(beta))``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

from .calculus import FactoredClass
from .errors import BudgetExceeded, InvalidInput
from .graphs import GraphMorphism, StableGraph, ValidationReport, canonical_label, contract_edges, enumerate_stable_graphs, isomorphisms
from .strata import TautClass

__all__ = [
    "MonodromyData",
    "AdmissibleGGraph",
    "GenericStructure",
    "Classification",
    "HurwitzPullbackTerm",
    "HurwitzPullback",
    "enumerate_generic_structures",
    "excess_top_chern",
    "classify_term",
    "pullback_hurwitz",
    "riemann_hurwitz_check",
    "loop_tower",
    "tower_xi",
    "bielliptic_image",
]

DEFAULT_BUDGET = 20_000


# ---------------------------------------------------------------------------
# monodromy
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MonodromyData:
    """``xi`` over {0, 1}: a 1 marks one ramification point, a 0 marks a swapped pair."""

    xi: tuple[int, ...]

    def __post_init__(self):
        xi = tuple(int(a) for a in self.xi)
        if any(a not in (0, 1) for a in xi):
            raise InvalidInput("monodromy entries must be 0 or 1")
        if sum(xi) % 2:
            raise InvalidInput("the number of ramification entries must be even")
        object.__setattr__(self, "xi", xi)

    @property
    def ramified(self) -> int:
        return sum(self.xi)

    @property
    def num_legs(self) -> int:
        return self.ramified + 2 * (len(self.xi) - self.ramified)

    def target_genus(self, g: int) -> int:
        """h with ``#ones = 2g - 4h + 2``."""
        num = 2 * g + 2 - self.ramified
        if num < 0 or num % 4:
            raise InvalidInput(f"xi with {self.ramified} ramification points does not fit genus {g}")
        return num // 4

    def leg_action(self) -> dict[int, int]:
        """Involution on source leg labels: 1-entries fixed, 0-entries swapped."""
        out, label = {}, 1
        for a in self.xi:
            if a:
                out[label] = label
                label += 1
            else:
                out[label], out[label + 1] = label + 1, label
                label += 2
        return out


# ---------------------------------------------------------------------------
# admissible G-graphs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AdmissibleGGraph:
    graph: StableGraph
    sigma: tuple[tuple[int, int], ...]  # flag -> flag, sorted

    @classmethod
    def make(cls, graph: StableGraph, sigma: dict) -> "AdmissibleGGraph":
        return cls(graph, tuple(sorted(sigma.items())))

    @cached_property
    def action(self) -> dict[int, int]:
        return dict(self.sigma)

    def stabilizer(self, flag: int) -> str:
        return "Z/2" if self.action[flag] == flag else "0"

    @cached_property
    def vertex_action(self) -> tuple[int, ...]:
        vof = self.graph.vertex_of
        out = []
        for v, fl in enumerate(self.graph.flags):
            images = {vof[self.action[f]] for f in fl}
            out.append(images.pop() if len(images) == 1 else -1)
        return tuple(out)

    @cached_property
    def edge_action(self) -> dict:
        index = {e: i for i, e in enumerate(self.graph.edges)}
        out = {}
        for i, (h, k) in enumerate(self.graph.edges):
            image = tuple(sorted((self.action[h], self.action[k])))
            out[i] = index.get(image, -1)
        return out

    def fixed_flags(self, v: int) -> int:
        return sum(1 for f in self.graph.flags[v] if self.action[f] == f)

    def vertex_orbits(self) -> list[tuple[int, ...]]:
        seen, out = set(), []
        for v, w in enumerate(self.vertex_action):
            if v not in seen:
                orbit = tuple(sorted({v, w}))
                seen.update(orbit)
                out.append(orbit)
        return out

    def edge_orbits(self) -> list[tuple[int, ...]]:
        seen, out = set(), []
        for i, j in self.edge_action.items():
            if i not in seen:
                orbit = tuple(sorted({i, j}))
                seen.update(orbit)
                out.append(orbit)
        return out

    def vertex_target_genus(self, v: int) -> Fraction:
        """Genus of the quotient at ``v``; from Riemann-Hurwitz when v is fixed."""
        gv = self.graph.genera[v]
        if self.vertex_action[v] != v:
            return Fraction(gv)
        return Fraction(2 * gv + 2 - self.fixed_flags(v), 4)

    def quotient_betti(self) -> int:
        return len(self.edge_orbits()) - len(self.vertex_orbits()) + 1

    def target_genus(self) -> Fraction:
        return sum((self.vertex_target_genus(o[0]) for o in self.vertex_orbits()), Fraction(0)) + self.quotient_betti()

    def vertex_stabilizer_order(self, v: int) -> int:
        return 2 if self.vertex_action[v] == v else 1

    def to_json(self) -> dict:
        return {"graph": self.graph.to_json(), "sigma": [list(p) for p in self.sigma if p[0] != p[1]]}


def riemann_hurwitz_check(ag: AdmissibleGGraph, xi: MonodromyData | None = None) -> ValidationReport:
    """Per-vertex and global Riemann-Hurwitz consistency of an admissible G-graph."""
    graph, s = ag.graph, ag.action
    flags = set(graph.vertex_of)
    if set(s) != flags or any(s[s[f]] != f for f in flags):
        return ValidationReport(False, "involution", "sigma is not an involution on the flags")
    partner = graph.partner
    vof = graph.vertex_of
    for h, k in graph.edges:
        if s[h] == k:
            return ValidationReport(False, "involution", f"edge ({h},{k}) has its branches swapped")
        if partner.get(s[h]) != s[k]:
            return ValidationReport(False, "involution", "sigma does not preserve edges")
    for v, fl in enumerate(graph.flags):
        if len({vof[s[f]] for f in fl}) != 1:
            return ValidationReport(False, "involution", f"sigma does not act on vertex {v}")
    for leg in graph.legs:
        if s[leg] not in graph.legs:
            return ValidationReport(False, "involution", "sigma moves a leg to a half-edge")
    for v, w in enumerate(ag.vertex_action):
        if w == v:
            h = ag.vertex_target_genus(v)
            if h.denominator != 1 or h < 0:
                return ValidationReport(False, "riemann-hurwitz", f"vertex {v}: genus {graph.genera[v]} with {ag.fixed_flags(v)} fixed flags")
            r = ag.fixed_flags(v)
            if 2 * h - 2 + r + (len(graph.flags[v]) - r) // 2 <= 0:
                return ValidationReport(False, "stability", f"vertex {v} maps to an unstable rational component")
        elif graph.genera[v] != graph.genera[w]:
            return ValidationReport(False, "riemann-hurwitz", f"swapped vertices {v},{w} differ in genus")
    if xi is not None:
        if xi.num_legs != graph.n:
            return ValidationReport(False, "legs", f"xi needs {xi.num_legs} legs, graph has {graph.n}")
        if any(s[leg] != img for leg, img in xi.leg_action().items()):
            return ValidationReport(False, "legs", "leg stabilizers disagree with xi")
        try:
            h = xi.target_genus(graph.genus)
        except InvalidInput as exc:
            return ValidationReport(False, "riemann-hurwitz", str(exc))
        if ag.target_genus() != h:
            return ValidationReport(False, "riemann-hurwitz", f"quotient genus {ag.target_genus()} != {h}")
    return ValidationReport(True)


# ---------------------------------------------------------------------------
# generic structures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GenericStructure:
    source: AdmissibleGGraph
    target: StableGraph
    morphism: GraphMorphism = field(compare=False, repr=False)
    beta: tuple[tuple[int, int], ...]  # Im(beta): target edges as edges of Gamma
    parent: tuple[int, ...]  # Gamma vertex -> target vertex
    factor_autos: int = field(compare=False, default=1)  # |prod Aut(Gamma_v)|
    centralizer: int = field(compare=False, default=1)  # |Aut_B(Gamma, sigma)|
    target_genus: int = 0

    @property
    def graph(self) -> StableGraph:
        return self.source.graph

    def beta_indices(self) -> set[int]:
        edges = self.graph.edges
        return {edges.index(e) for e in self.beta}

    def excess_rank(self) -> int:
        return len(self.beta) - len(self.source.edge_orbits())

    def orbit_representatives(self) -> tuple[tuple[int, int], ...]:
        """Lexicographically least edge of Im(beta) in each edge orbit."""
        edges = self.graph.edges
        image = self.beta_indices()
        reps = []
        for orbit in self.source.edge_orbits():
            reps.append(min(edges[i] for i in orbit if i in image))
        return tuple(sorted(reps))

    def to_json(self) -> dict:
        return {
            "source": self.source.to_json(),
            "target": self.target.to_json(),
            "beta": [list(e) for e in self.beta],
        }


def _factor_aut_maps(factor: StableGraph, rename: dict) -> list[dict]:
    return [{rename[a]: rename[b] for a, b in fmap.items()} for _, fmap in isomorphisms(factor, factor)]


def _glue(target: StableGraph, combo, fresh: int):
    genera, flags, parent, autos = [], [], [], []
    edges = list(target.edges)
    for v, factor in enumerate(combo):
        rename = {i + 1: f for i, f in enumerate(target.flags[v])}
        for h in factor.half_edges:
            rename[h] = fresh
            fresh += 1
        for fv, gv in zip(factor.flags, factor.genera):
            genera.append(gv)
            flags.append(tuple(rename[f] for f in fv))
            parent.append(v)
        edges.extend((rename[h], rename[k]) for h, k in factor.edges)
        autos.append(_factor_aut_maps(factor, rename))
    return StableGraph(tuple(genera), tuple(flags), tuple(edges)), tuple(parent), autos


def _factor_group(autos):
    """All elements of prod Aut(Gamma_v) as flag maps on Gamma."""
    for choice in itertools.product(*autos):
        g = {}
        for m in choice:
            g.update(m)
        yield g


def _involutions(graph: StableGraph, leg_action: dict):
    """Graph involutions acting on legs by ``leg_action`` with no edge flipped."""
    twisted = StableGraph(
        graph.genera,
        tuple(tuple(leg_action.get(f, f) for f in fl) for fl in graph.flags),
        graph.edges,
    )
    for _, fmap in isomorphisms(graph, twisted):
        # legs are matched by label, so leg l lands in the slot of leg_action[l]
        sigma = {f: (leg_action[f] if f in leg_action else fmap[f]) for f in fmap}
        if any(sigma[sigma[f]] != f for f in sigma):
            continue
        if any(sigma[h] == k for h, k in graph.edges):
            continue
        yield sigma


def enumerate_generic_structures(
    target: StableGraph, g: int, xi, budget: int | None = DEFAULT_BUDGET
) -> list[GenericStructure]:
    """One representative per isomorphism class of admissible G-graphs with a
    generic ``target``-structure (legs of ``target`` are labeled as ``xi``)."""
    xi = xi if isinstance(xi, MonodromyData) else MonodromyData(tuple(xi))
    h = xi.target_genus(g)
    if target.genus != g:
        raise InvalidInput(f"target has genus {target.genus}, expected {g}")
    if target.n != xi.num_legs:
        raise InvalidInput(f"target has {target.n} legs, xi needs {xi.num_legs}")
    leg_action = xi.leg_action()
    extra = target.num_edges  # genericity: |E(Gamma)| <= 2 |E(target)|
    options = []
    for v, gv in enumerate(target.genera):
        nv = len(target.flags[v])
        cap = min(extra, 3 * gv - 3 + nv)
        options.append(enumerate_stable_graphs(gv, nv, cap, budget=budget))
    fresh = target.max_flag() + 1
    out = []
    for combo in itertools.product(*options):
        if sum(f.num_edges for f in combo) > extra:
            continue
        gamma, parent, autos = _glue(target, combo, fresh)
        beta = target.edges
        beta_set = set(beta)
        group = list(_factor_group(autos))
        seen = set()
        for sigma in _involutions(gamma, leg_action):
            ag = AdmissibleGGraph.make(gamma, sigma)
            # genericity
            if any(e not in beta_set and tuple(sorted((sigma[e[0]], sigma[e[1]]))) not in beta_set for e in gamma.edges):
                continue
            if not riemann_hurwitz_check(ag, xi):
                continue
            conj = [tuple(sorted((a[f], a[sigma[f]]) for f in sigma)) for a in group]  # a sigma a^-1
            key = min(conj)
            if key in seen:
                continue
            seen.add(key)
            centralizer = sum(1 for c in conj if c == ag.sigma)
            _, morph = contract_edges(gamma, [i for i, e in enumerate(gamma.edges) if e not in beta_set])
            out.append(
                GenericStructure(
                    AdmissibleGGraph(gamma, key),
                    target,
                    morph,
                    beta,
                    parent,
                    len(group),
                    centralizer,
                    h,
                )
            )
            if budget is not None and len(out) > budget:
                raise BudgetExceeded(f"more than {budget} generic structures")
    return out


# ---------------------------------------------------------------------------
# excess classes
# ---------------------------------------------------------------------------


def excess_top_chern(s: GenericStructure, representatives=None):
    """``prod_{(h,h') in Im(beta) \\ N} (-psi_h - psi_h')`` on the target's factors.

    Returns a TautClass when the target has one vertex, else a FactoredClass.
    ``representatives`` overrides the default choice of N.
    """
    target = s.target
    reps = set(representatives) if representatives is not None else set(s.orbit_representatives())
    if not reps <= set(s.beta):
        raise InvalidInput("orbit representatives must lie in Im(beta)")
    excess = [e for e in s.beta if e not in reps]
    factors = [(gv, len(fl)) for gv, fl in zip(target.genera, target.flags)]
    labels = {}
    for v, fl in enumerate(target.flags):
        for i, f in enumerate(fl):
            labels[f] = (v, i + 1)
    result = FactoredClass.tensor(*(TautClass.fundamental(*fac) for fac in factors))
    for h, k in excess:
        term = None
        for f in (h, k):
            v, label = labels[f]
            parts = [TautClass.fundamental(*fac) for fac in factors]
            parts[v] = TautClass.psi(*factors[v], {label: 1})
            piece = FactoredClass.tensor(*parts).scale(-1)
            term = piece if term is None else term + piece
        result = result.multiply(term)
    if len(factors) == 1:
        return TautClass(factors[0][0], factors[0][1], {k[0]: c for k, c in result.terms.items()})
    return result


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------

RULES = (
    "property-1",
    "property-2",
    "property-3",
    "property-4",
    "property-5",
    "property-6",
    "property-7",
    "boundary-supported",
    "hyperelliptic",
    "bielliptic-multiple",
)


@dataclass(frozen=True)
class Classification:
    rule: str
    properties: tuple[str, ...] = ()
    multiplicity: Fraction | None = None

    @property
    def tautological(self) -> bool:
        return self.rule != "bielliptic-multiple"

    def to_json(self) -> dict:
        m = self.multiplicity
        return {
            "rule": self.rule,
            "tautological": self.tautological,
            "properties": list(self.properties),
            "multiplicity": None if m is None else f"{m.numerator}/{m.denominator}",
        }


def _is_loop_tower(target: StableGraph) -> bool:
    return target.num_vertices == 1 and target.genera[0] == 2


def _properties(s: GenericStructure) -> list[str]:
    ag, graph = s.source, s.graph
    vof = graph.vertex_of
    found = []
    if s.excess_rank() >= 1:
        found.append("property-1")
    if 2 not in graph.genera:
        found.append("property-2")
    if any(w != v for v, w in enumerate(ag.vertex_action)):
        found.append("property-3")
    if ag.quotient_betti() == 1:
        found.append("property-4")
    if any(vof[h] == vof[k] for h, k in graph.edges):
        found.append("property-5")
    if any(ag.action[h] == h and ag.action[k] == k for h, k in graph.edges):
        found.append("property-6")
    multiplicity = {}
    for h, k in graph.edges:
        a, b = sorted((vof[h], vof[k]))
        if a != b:
            multiplicity[(a, b)] = multiplicity.get((a, b), 0) + 1
    if any(m != 2 for m in multiplicity.values()):
        found.append("property-7")
    return found


def bielliptic_multiplicity(s: GenericStructure) -> Fraction:
    """``prod_{v in V} 1/|G_v|`` over vertex-orbit representatives, divided by the
    number of automorphisms of the structure (the centralizer of sigma)."""
    ag = s.source
    value = Fraction(1, s.centralizer)
    for orbit in ag.vertex_orbits():
        value /= ag.vertex_stabilizer_order(orbit[0])
    return value


def classify_term(s: GenericStructure) -> Classification:
    """First matching rule: hyperelliptic target, properties 1-7, then the final cases."""
    if not _is_loop_tower(s.target):
        raise InvalidInput("classification needs a loop tower target (one genus-2 vertex with loops)")
    props = tuple(_properties(s))
    if s.target_genus == 0:
        return Classification("hyperelliptic", props)
    if props:
        return Classification(props[0], props)
    graph = s.graph
    vof = graph.vertex_of
    top = graph.genera.index(2)
    near = {vof[k] for h, k in graph.edges if vof[h] == top} | {vof[h] for h, k in graph.edges if vof[k] == top}
    if any(gv == 0 and v not in near for v, gv in enumerate(graph.genera)):
        return Classification("boundary-supported", props)
    m = bielliptic_multiplicity(s)
    if m <= 0:  # pragma: no cover - the formula is a product of positive factors
        raise AssertionError("bielliptic multiplicity must be positive")
    return Classification("bielliptic-multiple", props, m)


def bielliptic_image(s: GenericStructure) -> dict[int, int]:
    """Pairing of the A-flags induced on the genus-2 component after forgetting legs.

    Each A-flag lands on the genus-2 vertex either directly or, when it sits on
    a rational satellite, at the far end of the satellite's other edge; the
    covering involution then pairs up these points.
    """
    graph, sigma = s.graph, s.source.action
    vof, partner = graph.vertex_of, graph.partner
    top = graph.genera.index(2)
    a_flags = [f for e in s.beta for f in e]
    position = {}
    for p in a_flags:
        v = vof[p]
        if v == top:
            position[p] = p
            continue
        others = [f for f in graph.flags[v] if f != p and f in partner]
        if len(others) != 1:
            raise InvalidInput("A-flag on a satellite that does not contract")
        position[p] = partner[others[0]]
    back = {pos: p for p, pos in position.items()}
    return {p: back[sigma[position[p]]] for p in a_flags if sigma[position[p]] in back}


# ---------------------------------------------------------------------------
# towers and the pullback formula
# ---------------------------------------------------------------------------


def loop_tower(loops: int, genus: int = 2) -> tuple[StableGraph, int]:
    """The self-gluing graph A (one vertex, ``loops`` loops) and the total genus."""
    if loops < 0:
        raise InvalidInput("number of loops must be nonnegative")
    return StableGraph.build([genus], [], [(0, 0)] * loops), genus + loops


def tower_xi(g: int, h: int = 1) -> MonodromyData:
    return MonodromyData((1,) * (2 * g - 4 * h + 2))


def _add_legs(a: StableGraph, b: int) -> StableGraph:
    """B: the graph A with legs 1..b added on vertex 0 and half-edges shifted past b."""
    shift = {f: f + b for f in a.vertex_of}
    flags = [tuple(shift[f] for f in fl) for fl in a.flags]
    flags[0] = tuple(range(1, b + 1)) + flags[0]
    return StableGraph(a.genera, tuple(flags), tuple((shift[h], shift[k]) for h, k in a.edges))


@dataclass(frozen=True)
class HurwitzPullbackTerm:
    structure: GenericStructure
    excess: TautClass
    classification: Classification

    def to_json(self) -> dict:
        return {
            "structure": self.structure.to_json(),
            "excess": self.excess.to_json(),
            "classification": self.classification.to_json(),
        }


@dataclass
class HurwitzPullback:
    a_graph: StableGraph
    b_graph: StableGraph
    g: int
    xi: MonodromyData
    terms: list

    @property
    def coefficient(self) -> Fraction:
        """Sum of the bielliptic multiplicities: the constant in front of the
        bielliptic class, everything else being tautological."""
        return sum((t.classification.multiplicity for t in self.terms if t.classification.rule == "bielliptic-multiple"), Fraction(0))

    def summary(self) -> dict[str, int]:
        out = {r: 0 for r in RULES}
        for t in self.terms:
            out[t.classification.rule] += 1
        return out

    def residue_pairings(self) -> set:
        """Distinct A-flag pairings among the non-tautological terms."""
        return {
            tuple(sorted(bielliptic_image(t.structure).items()))
            for t in self.terms
            if t.classification.rule == "bielliptic-multiple"
        }

    def to_json(self) -> dict:
        c = self.coefficient
        return {
            "A": self.a_graph.to_json(),
            "B": self.b_graph.to_json(),
            "g": self.g,
            "xi": list(self.xi.xi),
            "terms": [t.to_json() for t in self.terms],
            "summary": self.summary(),
            "coefficient": f"{c.numerator}/{c.denominator}",
        }


def pullback_hurwitz(a_graph: StableGraph, g: int, xi=None, budget: int | None = DEFAULT_BUDGET) -> HurwitzPullback:
    """Term list of the excess-intersection pullback of the cover locus along
    the gluing map of ``a_graph`` (a genus-2 vertex with loops)."""
    if not _is_loop_tower(a_graph) or a_graph.n:
        raise InvalidInput("A must be one genus-2 vertex with only loop edges")
    if a_graph.genus != g:
        raise InvalidInput(f"A glues to genus {a_graph.genus}, not {g}")
    xi = tower_xi(g) if xi is None else (xi if isinstance(xi, MonodromyData) else MonodromyData(tuple(xi)))
    b = _add_legs(a_graph, xi.num_legs)
    # a cheap bound before any enumeration: the one vertex splits in at most
    # 3 * 2^flags ways, and that already exceeds the budget for large towers
    if budget is not None and 3 * 2 ** len(b.flags[0]) > 4 * budget:
        raise BudgetExceeded(f"tower with {a_graph.num_edges} loops exceeds budget {budget}")
    structures = enumerate_generic_structures(b, g, xi, budget)
    terms = [HurwitzPullbackTerm(s, excess_top_chern(s), classify_term(s)) for s in structures]
    return HurwitzPullback(a_graph, b, g, xi, terms)
