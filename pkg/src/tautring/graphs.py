"""Stable graphs of type (g, n).

A graph is stored through its *flags*: every vertex owns a tuple of flag
ids.  Flags that do not occur in an edge are legs and carry the marking
labels ``1..n``; the remaining flags are half-edges and have ids larger than
every leg label.  Decorations (kappa monomials per vertex, psi exponents per
flag) ride along in the canonical labeling so that decorated strata can be
compared by identity.
"""
from __future__ import annotations

import itertools
import json
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from functools import cached_property, lru_cache

from .errors import BudgetExceeded, InvalidInput

__all__ = [
    "StableGraph",
    "GraphMorphism",
    "ValidationReport",
    "CanonicalLabel",
    "validate",
    "canonical_label",
    "canonicalize",
    "isomorphisms",
    "automorphism_count",
    "enumerate_stable_graphs",
    "contract_edges",
]

Kappa = tuple  # per-vertex tuple of sorted tuples of positive ints
Psi = tuple  # sorted tuple of (flag, exponent) with exponent > 0


@dataclass(frozen=True)
class StableGraph:
    genera: tuple[int, ...]
    flags: tuple[tuple[int, ...], ...]
    edges: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "genera", tuple(int(x) for x in self.genera))
        object.__setattr__(self, "flags", tuple(tuple(sorted(f)) for f in self.flags))
        edges = tuple(sorted(tuple(sorted(e)) for e in self.edges))
        object.__setattr__(self, "edges", edges)

    # -- construction ---------------------------------------------------

    @classmethod
    def smooth(cls, g: int, n: int) -> "StableGraph":
        return cls((g,), (tuple(range(1, n + 1)),), ())

    @classmethod
    def build(cls, genera, legs=(), edges=()) -> "StableGraph":
        """Build from vertex genera, ``(label, vertex)`` legs and ``(v, w)`` edges.

        Half-edge ids are assigned consecutively after the largest leg label.
        """
        flags = [[] for _ in genera]
        top = 0
        for label, v in legs:
            flags[v].append(label)
            top = max(top, label)
        pairs = []
        h = top + 1
        for v, w in edges:
            flags[v].append(h)
            flags[w].append(h + 1)
            pairs.append((h, h + 1))
            h += 2
        return cls(tuple(genera), tuple(tuple(f) for f in flags), tuple(pairs))

    # -- derived data ---------------------------------------------------

    @cached_property
    def vertex_of(self) -> dict[int, int]:
        return {f: v for v, fl in enumerate(self.flags) for f in fl}

    @cached_property
    def partner(self) -> dict[int, int]:
        out = {}
        for h, k in self.edges:
            out[h] = k
            out[k] = h
        return out

    @cached_property
    def legs(self) -> tuple[int, ...]:
        return tuple(sorted(f for fl in self.flags for f in fl if f not in self.partner))

    @cached_property
    def half_edges(self) -> tuple[int, ...]:
        return tuple(sorted(self.partner))

    @property
    def n(self) -> int:
        return len(self.legs)

    @property
    def num_vertices(self) -> int:
        return len(self.genera)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def num_components(self) -> int:
        parent = list(range(self.num_vertices))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for h, k in self.edges:
            a, b = find(self.vertex_of[h]), find(self.vertex_of[k])
            if a != b:
                parent[a] = b
        return len({find(v) for v in range(self.num_vertices)})

    @property
    def betti(self) -> int:
        return self.num_edges - self.num_vertices + self.num_components

    @property
    def genus(self) -> int:
        return sum(self.genera) + self.betti

    @property
    def dim(self) -> int:
        return 3 * self.genus - 3 + self.n

    def valence(self, v: int) -> int:
        return len(self.flags[v])

    def vertex_dim(self, v: int) -> int:
        return 3 * self.genera[v] - 3 + len(self.flags[v])

    def is_loop(self, edge) -> bool:
        h, k = edge
        return self.vertex_of[h] == self.vertex_of[k]

    def legs_at(self, v: int) -> tuple[int, ...]:
        return tuple(f for f in self.flags[v] if f not in self.partner)

    def max_flag(self) -> int:
        return max((f for fl in self.flags for f in fl), default=0)

    # -- serialization ---------------------------------------------------

    def to_json(self) -> dict:
        """``{"vertices", "legs", "edges"}``; a half-edge is ``[vertex, id]``."""
        vof = self.vertex_of
        return {
            "vertices": list(self.genera),
            "legs": [[leg, vof[leg]] for leg in self.legs],
            "edges": [[[vof[h], h], [vof[k], k]] for h, k in self.edges],
        }

    @classmethod
    def from_json(cls, data) -> "StableGraph":
        if isinstance(data, str):
            data = json.loads(data)
        genera = data["vertices"]
        flags = [[] for _ in genera]
        for label, v in data["legs"]:
            flags[v].append(label)
        edges = []
        for (v, h), (w, k) in data["edges"]:
            flags[v].append(h)
            flags[w].append(k)
            edges.append((h, k))
        return cls(tuple(genera), tuple(tuple(f) for f in flags), tuple(edges))

    def __repr__(self):
        return f"StableGraph(genera={self.genera}, flags={self.flags}, edges={self.edges})"


@dataclass(frozen=True)
class GraphMorphism:
    """A contraction ``source -> target``.

    ``edge_map[i]`` is the index of the source edge that target edge ``i``
    comes from; source edges outside its image are contracted.
    """

    source: StableGraph
    target: StableGraph
    vertex_map: tuple[int, ...]
    edge_map: tuple[int, ...]
    leg_map: tuple[tuple[int, int], ...]

    @property
    def contracted(self) -> tuple[int, ...]:
        used = set(self.edge_map)
        return tuple(i for i in range(self.source.num_edges) if i not in used)


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    invariant: str | None = None
    message: str = ""

    def __bool__(self):
        return self.ok


def validate(graph: StableGraph, genus: int | None = None, n: int | None = None) -> ValidationReport:
    """Check every stable-graph invariant; report the first one that fails."""
    seen = Counter(f for fl in graph.flags for f in fl)
    dup = [f for f, c in seen.items() if c > 1]
    if dup:
        return ValidationReport(False, "structure", f"flags {dup} occur at several vertices")
    in_edges = Counter(f for e in graph.edges for f in e)
    bad = [f for f, c in in_edges.items() if c > 1 or f not in seen]
    if bad or any(h == k for h, k in graph.edges):
        return ValidationReport(False, "structure", f"half-edges {bad} are not paired exactly once")
    if graph.num_vertices == 0:
        return ValidationReport(False, "structure", "graph has no vertices")
    if any(x < 0 for x in graph.genera):
        return ValidationReport(False, "structure", "negative vertex genus")
    if graph.num_components != 1:
        return ValidationReport(False, "connected", "graph is disconnected")
    legs = graph.legs
    if legs != tuple(range(1, len(legs) + 1)):
        return ValidationReport(False, "legs", f"leg labels {legs} are not 1..{len(legs)}")
    if graph.half_edges and min(graph.half_edges) <= len(legs):
        return ValidationReport(False, "legs", "half-edge ids collide with leg labels")
    if n is not None and len(legs) != n:
        return ValidationReport(False, "legs", f"expected {n} legs, found {len(legs)}")
    for v, gv in enumerate(graph.genera):
        if 2 * gv - 2 + graph.valence(v) <= 0:
            return ValidationReport(False, "stability", f"vertex {v} (genus {gv}, valence {graph.valence(v)}) is unstable")
    if genus is not None and graph.genus != genus:
        return ValidationReport(False, "genus", f"total genus {graph.genus} != declared {genus}")
    return ValidationReport(True)


# ---------------------------------------------------------------------------
# canonical labeling
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CanonicalLabel:
    """Canonical form of a (decorated) graph together with the relabeling used."""

    graph: StableGraph
    kappa: Kappa
    psi: Psi
    key: tuple
    vertex_map: tuple[int, ...]  # original vertex -> canonical vertex
    flag_map: dict  # original flag -> canonical flag
    automorphisms: int


def _empty_kappa(graph):
    return tuple(() for _ in graph.genera)


def _adjacency(graph, psi):
    adj = [[] for _ in graph.genera]
    vof = graph.vertex_of
    for h, k in graph.edges:
        v, w = vof[h], vof[k]
        ph, pk = psi.get(h, 0), psi.get(k, 0)
        adj[v].append((w, ph, pk))
        adj[w].append((v, pk, ph))
    return adj


def _ranks(sigs):
    table = {s: i for i, s in enumerate(sorted(set(sigs)))}
    return [table[s] for s in sigs]


def _refine(colors, adj):
    count = len(set(colors))
    while True:
        sigs = [(colors[v], tuple(sorted((colors[u], a, b) for u, a, b in adj[v]))) for v in range(len(colors))]
        new = _ranks(sigs)
        k = len(set(new))
        if k == count:
            return new
        colors, count = new, k


def _leaf_orders(colors, adj):
    colors = _refine(colors, adj)
    counts = Counter(colors)
    split = min((c for c, m in counts.items() if m > 1), default=None)
    if split is None:
        yield sorted(range(len(colors)), key=colors.__getitem__)
        return
    for v in range(len(colors)):
        if colors[v] != split:
            continue
        individualized = [2 * c + (1 if c == split and u != v else 0) for u, c in enumerate(colors)]
        yield from _leaf_orders(individualized, adj)


def _key_for_order(graph, kappa, psi, order):
    pos = [0] * len(order)
    for i, v in enumerate(order):
        pos[v] = i
    vof = graph.vertex_of
    vertices = tuple(
        (graph.genera[v], kappa[v], tuple((leg, psi.get(leg, 0)) for leg in graph.legs_at(v))) for v in order
    )
    edges = []
    for h, k in graph.edges:
        a = (pos[vof[h]], psi.get(h, 0))
        b = (pos[vof[k]], psi.get(k, 0))
        edges.append((a, b) if a <= b else (b, a))
    return (vertices, tuple(sorted(edges))), pos


@lru_cache(maxsize=200_000)
def _search(graph: StableGraph, kappa: Kappa, psi: Psi):
    psid = dict(psi)
    adj = _adjacency(graph, psid)
    initial = _ranks(
        [
            (graph.genera[v], kappa[v], tuple((leg, psid.get(leg, 0)) for leg in graph.legs_at(v)), len(adj[v]))
            for v in range(graph.num_vertices)
        ]
    )
    best = None
    leaves = []
    for order in _leaf_orders(initial, adj):
        key, pos = _key_for_order(graph, kappa, psid, order)
        if best is None or key < best:
            best, leaves = key, [pos]
        elif key == best:
            leaves.append(pos)
    return best, tuple(tuple(p) for p in leaves)


def _edge_slots(key, first_half_edge):
    """Canonical half-edge ids for each edge type, in canonical order."""
    slots = defaultdict(list)
    for i, etype in enumerate(key[1]):
        slots[etype].append((first_half_edge + 2 * i, first_half_edge + 2 * i + 1))
    return slots


def _edge_types(graph, psid, pos):
    vof = graph.vertex_of
    out = []
    for h, k in graph.edges:
        a = (pos[vof[h]], psid.get(h, 0))
        b = (pos[vof[k]], psid.get(k, 0))
        if a <= b:
            out.append(((a, b), h, k))
        else:
            out.append(((b, a), k, h))
    return out


def _flag_map(graph, psid, key, pos, first_half_edge):
    slots = {t: list(s) for t, s in _edge_slots(key, first_half_edge).items()}
    fmap = {leg: leg for leg in graph.legs}
    for etype, h, k in _edge_types(graph, psid, pos):
        c1, c2 = slots[etype].pop(0)
        fmap[h], fmap[k] = c1, c2
    return fmap


def _all_flag_maps(graph, psid, key, pos, first_half_edge):
    """Every flag bijection onto the canonical graph compatible with ``pos``."""
    slots = _edge_slots(key, first_half_edge)
    groups = defaultdict(list)
    for etype, h, k in _edge_types(graph, psid, pos):
        groups[etype].append((h, k))
    choices = []
    for etype, originals in groups.items():
        targets = slots[etype]
        symmetric = etype[0] == etype[1]
        options = []
        for perm in itertools.permutations(targets):
            flips = itertools.product((False, True), repeat=len(perm)) if symmetric else [(False,) * len(perm)]
            for flip in flips:
                part = {}
                for (h, k), (c1, c2), f in zip(originals, perm, flip):
                    if f:
                        c1, c2 = c2, c1
                    part[h], part[k] = c1, c2
                options.append(part)
        choices.append(options)
    base = {leg: leg for leg in graph.legs}
    for combo in itertools.product(*choices):
        fmap = dict(base)
        for part in combo:
            fmap.update(part)
        yield fmap


def _first_half_edge(graph):
    return max(graph.legs, default=0) + 1


def _normalize_decoration(graph, kappa, psi):
    if kappa is None:
        kappa = _empty_kappa(graph)
    else:
        kappa = tuple(tuple(sorted(k)) for k in kappa)
    if psi is None:
        psi = ()
    elif isinstance(psi, dict):
        psi = tuple(sorted((f, e) for f, e in psi.items() if e))
    else:
        psi = tuple(sorted((f, e) for f, e in psi if e))
    return kappa, psi


@lru_cache(maxsize=200_000)
def _canonical_cached(graph, kappa, psi):
    key, leaves = _search(graph, kappa, psi)
    pos = leaves[0]
    psid = dict(psi)
    start = _first_half_edge(graph)
    fmap = _flag_map(graph, psid, key, pos, start)

    nlegs = len(graph.legs)
    flags = [[] for _ in graph.genera]
    can_kappa = []
    can_psi = []
    for i, (gv, kv, legs) in enumerate(key[0]):
        can_kappa.append(kv)
        for leg, p in legs:
            flags[i].append(leg)
            if p:
                can_psi.append((leg, p))
    edges = []
    for idx, ((a, pa), (b, pb)) in enumerate(key[1]):
        h, k = start + 2 * idx, start + 2 * idx + 1
        flags[a].append(h)
        flags[b].append(k)
        edges.append((h, k))
        if pa:
            can_psi.append((h, pa))
        if pb:
            can_psi.append((k, pb))
    genera = tuple(v[0] for v in key[0])
    cgraph = StableGraph(genera, tuple(tuple(f) for f in flags), tuple(edges))

    mult = Counter(key[1])
    edge_aut = 1
    for etype, m in mult.items():
        edge_aut *= math.factorial(m)
        if etype[0] == etype[1]:
            edge_aut *= 2**m
    del nlegs
    return CanonicalLabel(
        graph=cgraph,
        kappa=tuple(can_kappa),
        psi=tuple(sorted(can_psi)),
        key=key,
        vertex_map=pos,
        flag_map=fmap,
        automorphisms=len(leaves) * edge_aut,
    )


def canonical_label(graph: StableGraph, kappa=None, psi=None) -> CanonicalLabel:
    """Canonical relabeling of a graph with optional decorations.

    Two decorated graphs are isomorphic (by an isomorphism fixing the legs)
    iff their canonical forms coincide.  ``automorphisms`` counts the
    decoration-preserving automorphisms, half-edge swaps on loops included.
    """
    kappa, psi = _normalize_decoration(graph, kappa, psi)
    return _canonical_cached(graph, kappa, psi)


def canonicalize(graph: StableGraph) -> tuple[StableGraph, int]:
    rep = validate(graph)
    if not rep:
        raise InvalidInput(f"invalid stable graph ({rep.invariant}): {rep.message}")
    c = canonical_label(graph)
    return c.graph, c.automorphisms


def automorphism_count(graph: StableGraph) -> int:
    return canonical_label(graph).automorphisms


def canonical_maps(graph: StableGraph, kappa=None, psi=None):
    """All flag bijections of ``graph`` onto its canonical form.

    Yields ``(vertex_map, flag_map)``; there are exactly ``automorphisms``
    of them.
    """
    kappa, psi = _normalize_decoration(graph, kappa, psi)
    key, leaves = _search(graph, kappa, psi)
    psid = dict(psi)
    start = _first_half_edge(graph)
    for pos in leaves:
        for fmap in _all_flag_maps(graph, psid, key, pos, start):
            yield pos, fmap


@lru_cache(maxsize=50_000)
def _canonical_maps_list(graph):
    return tuple(canonical_maps(graph))


def isomorphisms(source: StableGraph, target: StableGraph):
    """Yield every leg-preserving isomorphism ``source -> target``.

    Each is a pair ``(vertex_map, flag_map)`` of dicts.
    """
    cs = canonical_label(source)
    ct = canonical_label(target)
    if cs.key != ct.key:
        return
    for tpos, tmap in _canonical_maps_list(target):
        inv_v = {c: v for v, c in enumerate(tpos)}
        inv_f = {c: f for f, c in tmap.items()}
        vmap = {v: inv_v[c] for v, c in enumerate(cs.vertex_map)}
        fmap = {f: inv_f[c] for f, c in cs.flag_map.items()}
        yield vmap, fmap


# ---------------------------------------------------------------------------
# contraction and enumeration
# ---------------------------------------------------------------------------


def contract_edges(graph: StableGraph, edge_subset) -> tuple[StableGraph, GraphMorphism]:
    """Contract the edges with the given indices; other flag ids are kept."""
    subset = set(edge_subset)
    if any(i < 0 or i >= graph.num_edges for i in subset):
        raise InvalidInput("edge index out of range")
    parent = list(range(graph.num_vertices))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    vof = graph.vertex_of
    for i in sorted(subset):
        h, k = graph.edges[i]
        a, b = find(vof[h]), find(vof[k])
        if a != b:
            parent[max(a, b)] = min(a, b)
    roots = sorted({find(v) for v in range(graph.num_vertices)})
    new_index = {r: i for i, r in enumerate(roots)}
    vertex_map = tuple(new_index[find(v)] for v in range(graph.num_vertices))

    genera = [0] * len(roots)
    members = Counter(vertex_map)
    internal = Counter()
    for v, gv in enumerate(graph.genera):
        genera[vertex_map[v]] += gv
    for i in subset:
        internal[vertex_map[vof[graph.edges[i][0]]]] += 1
    for c in range(len(roots)):
        genera[c] += internal[c] - members[c] + 1

    dropped = {f for i in subset for f in graph.edges[i]}
    flags = [[] for _ in roots]
    for v, fl in enumerate(graph.flags):
        flags[vertex_map[v]].extend(f for f in fl if f not in dropped)
    kept = [e for i, e in enumerate(graph.edges) if i not in subset]
    target = StableGraph(tuple(genera), tuple(tuple(f) for f in flags), tuple(kept))
    index_of = {e: i for i, e in enumerate(graph.edges)}
    edge_map = tuple(index_of[e] for e in target.edges)
    morphism = GraphMorphism(graph, target, vertex_map, edge_map, tuple((leg, leg) for leg in graph.legs))
    return target, morphism


def _vertex_splits(graph: StableGraph, v: int, budget: int | None):
    """All one-edge degenerations of vertex ``v``."""
    gv = graph.genera[v]
    fl = graph.flags[v]
    if budget is not None and (gv + 1) * 2 ** len(fl) > 4 * budget:
        raise BudgetExceeded(f"splitting a vertex with {len(fl)} flags exceeds budget {budget}")
    h = graph.max_flag() + 1
    others = [i for i in range(graph.num_vertices) if i != v]

    def assemble(new_vertices, new_edge):
        genera = [graph.genera[i] for i in others] + [g for g, _ in new_vertices]
        flags = [graph.flags[i] for i in others] + [f for _, f in new_vertices]
        return StableGraph(tuple(genera), tuple(flags), graph.edges + (new_edge,))

    if gv >= 1:
        yield assemble([(gv - 1, fl + (h, h + 1))], (h, h + 1))
    first = fl[0] if fl else None
    for r in range(len(fl) + 1):
        for part in itertools.combinations(fl, r):
            rest = tuple(f for f in fl if f not in part)
            for g1 in range(gv + 1):
                g2 = gv - g1
                # the side holding the first flag is listed first, which halves the work
                if fl and first not in part:
                    continue
                if not fl and g1 > g2:
                    continue
                if 2 * g1 - 2 + len(part) + 1 <= 0 or 2 * g2 - 2 + len(rest) + 1 <= 0:
                    continue
                yield assemble([(g1, part + (h,)), (g2, rest + (h + 1,))], (h, h + 1))


def enumerate_stable_graphs(g: int, n: int, max_edges: int | None = None, budget: int | None = None) -> list[StableGraph]:
    """One canonical representative per isomorphism class of stable graphs.

    Ordered by number of edges, then by canonical key.
    """
    if g < 0 or n < 0 or 2 * g - 2 + n <= 0:
        raise InvalidInput(f"(g, n) = ({g}, {n}) is not stable")
    top = 3 * g - 3 + n
    if max_edges is None:
        max_edges = top
    if max_edges > top:
        raise InvalidInput(f"max_edges {max_edges} exceeds 3g-3+n = {top}")
    return list(_enumerate_cached(g, n, max_edges, budget))


@lru_cache(maxsize=None)
def _enumerate_cached(g, n, max_edges, budget):
    smooth = canonical_label(StableGraph.smooth(g, n))
    level = {smooth.key: smooth.graph}
    result = [smooth.graph]
    for _ in range(max_edges):
        nxt = {}
        for graph in level.values():
            for v in range(graph.num_vertices):
                for split in _vertex_splits(graph, v, budget):
                    c = canonical_label(split)
                    if c.key not in nxt:
                        nxt[c.key] = c.graph
                        if budget is not None and len(result) + len(nxt) > budget:
                            raise BudgetExceeded(
                                f"more than {budget} stable graphs of type ({g}, {n})"
                            )
        level = nxt
        result.extend(level[k] for k in sorted(level))
    return tuple(result)


def relabel_flags(graph: StableGraph, mapping: dict) -> StableGraph:
    """Rename flags; ids missing from ``mapping`` are kept."""
    get = lambda f: mapping.get(f, f)  # noqa: E731
    return StableGraph(
        graph.genera,
        tuple(tuple(get(f) for f in fl) for fl in graph.flags),
        tuple((get(h), get(k)) for h, k in graph.edges),
    )
