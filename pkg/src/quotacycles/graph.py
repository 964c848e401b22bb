"""Directed multigraphs on signals with one labelled edge per task.

Edge ``k`` of a report graph runs from the true signal of task ``k`` to the
signal reported for it. Labels are 1-based task indices. Loops are allowed and
count once towards both the in- and out-degree of their vertex.
"""

from __future__ import annotations

from collections import defaultdict, deque
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import NamedTuple

from .core import Message, Profile
from .errors import LengthMismatch, NotBalanced, TooLarge

__all__ = [
    "Edge",
    "ReportGraph",
    "Cycle",
    "BalancedMatch",
    "build_report_graph",
    "is_balanced",
    "has_nonloop_cycle",
    "find_simple_cycle",
    "decompose_cycles",
    "max_circulation",
    "max_balanced_subset",
    "brute_force_balanced_subset",
    "balanced_upper_bound",
]

BRUTE_FORCE_LIMIT = 16


class Edge(NamedTuple):
    label: int
    tail: int
    head: int

    @property
    def is_loop(self) -> bool:
        return self.tail == self.head


@dataclass(frozen=True)
class ReportGraph:
    """Immutable labelled multigraph on vertices ``0..n_vertices-1``."""

    n_vertices: int
    edges: tuple[Edge, ...]
    vertex_names: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        edges = sorted(e if type(e) is Edge else Edge(*e) for e in self.edges)
        object.__setattr__(self, "edges", tuple(edges))
        n = self.n_vertices
        seen: set[int] = set()
        for e in edges:
            if e.label in seen:
                raise ValueError(f"duplicate edge label {e.label}")
            seen.add(e.label)
            if not (0 <= e.tail < n and 0 <= e.head < n):
                raise ValueError(f"edge {e} has an endpoint outside 0..{n - 1}")
        if not self.vertex_names:
            object.__setattr__(
                self, "vertex_names", tuple(str(i) for i in range(self.n_vertices))
            )
        elif len(self.vertex_names) != self.n_vertices:
            raise ValueError("one name per vertex required")

    @classmethod
    def _trusted(
        cls, n_vertices: int, edges: tuple[Edge, ...], vertex_names: tuple[str, ...]
    ) -> ReportGraph:
        """Skip validation; ``edges`` must already be label-sorted ``Edge`` values."""
        graph = object.__new__(cls)
        object.__setattr__(graph, "n_vertices", n_vertices)
        object.__setattr__(graph, "edges", edges)
        object.__setattr__(graph, "vertex_names", vertex_names)
        return graph

    @property
    def labels(self) -> tuple[int, ...]:
        return tuple(e.label for e in self.edges)

    def edge(self, label: int) -> Edge:
        for e in self.edges:
            if e.label == label:
                return e
        raise KeyError(label)

    def restrict(self, labels: Iterable[int]) -> ReportGraph:
        keep = set(labels)
        return ReportGraph._trusted(
            self.n_vertices, tuple(e for e in self.edges if e.label in keep), self.vertex_names
        )

    def out_degrees(self) -> list[int]:
        deg = [0] * self.n_vertices
        for e in self.edges:
            deg[e.tail] += 1
        return deg

    def in_degrees(self) -> list[int]:
        deg = [0] * self.n_vertices
        for e in self.edges:
            deg[e.head] += 1
        return deg

    def describe(self) -> str:
        names = self.vertex_names
        return ",".join(f"{e.label}:{names[e.tail]}>{names[e.head]}" for e in self.edges)


@dataclass(frozen=True)
class Cycle:
    """Edge labels in walk order; the tails are pairwise distinct."""

    edge_labels: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.edge_labels)

    def as_list(self) -> list[int]:
        return list(self.edge_labels)


@dataclass(frozen=True)
class BalancedMatch:
    """A balanced label set ``t_set`` with a bijection ``pi`` such that head(k) == tail(pi[k])."""

    t_set: tuple[int, ...]
    pi: dict[int, int] = field(compare=True)

    def __len__(self) -> int:
        return len(self.t_set)


def build_report_graph(profile: Profile, message: Message | Profile) -> ReportGraph:
    if len(profile) != len(message):
        raise LengthMismatch(f"lengths differ: {len(profile)} vs {len(message)}")
    alphabet = profile.alphabet
    edges = tuple(map(Edge, range(1, len(profile) + 1), profile.entries, message.entries))
    return ReportGraph._trusted(alphabet.size, edges, alphabet.names)


def is_balanced(graph: ReportGraph) -> bool:
    return graph.out_degrees() == graph.in_degrees()


def balanced_upper_bound(graph: ReportGraph) -> int:
    """``sum_v min(out(v), in(v))``; no balanced subset can be larger."""
    return sum(min(o, i) for o, i in zip(graph.out_degrees(), graph.in_degrees()))


def _out_lists(graph: ReportGraph, *, loops: bool) -> list[list[Edge]]:
    out: list[list[Edge]] = [[] for _ in range(graph.n_vertices)]
    for e in graph.edges:  # edges are sorted by label
        if loops or not e.is_loop:
            out[e.tail].append(e)
    return out


def has_nonloop_cycle(graph: ReportGraph) -> bool:
    """True iff the graph minus its loops is not acyclic (Kahn's algorithm)."""
    n = graph.n_vertices
    succ: list[set[int]] = [set() for _ in range(n)]
    for e in graph.edges:
        if not e.is_loop:
            succ[e.tail].add(e.head)
    indeg = [0] * n
    for s in succ:
        for v in s:
            indeg[v] += 1
    queue = [v for v in range(n) if indeg[v] == 0]
    removed = 0
    while queue:
        u = queue.pop()
        removed += 1
        for v in succ[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                queue.append(v)
    return removed < n


def find_simple_cycle(graph: ReportGraph) -> Cycle | None:
    """Shortest non-loop cycle through the lowest-indexed vertex that lies on one.

    Each start vertex is searched breadth-first with out-edges scanned in label
    order, so ties between equally short cycles go to the lowest labels.
    """
    out = _out_lists(graph, loops=False)
    for start in range(graph.n_vertices):
        if not out[start]:
            continue
        parent: dict[int, Edge | None] = {start: None}
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for e in out[u]:
                if e.head == start:
                    labels = [e.label]
                    v = u
                    while (pe := parent[v]) is not None:
                        labels.append(pe.label)
                        v = pe.tail
                    return Cycle(tuple(reversed(labels)))
                if e.head not in parent:
                    parent[e.head] = e
                    queue.append(e.head)
    return None


def decompose_cycles(graph: ReportGraph) -> list[Cycle]:
    """Split a balanced multigraph into edge-disjoint simple cycles.

    Walks start at the lowest-indexed vertex with an unused out-edge and always
    take the lowest unused label. When the walk revisits a vertex, the closed
    part is removed as a cycle. Loops come out as cycles of length one.

    After a removal the walk resumes at the vertex where the cycle closed rather
    than starting over: the vertices before it on the path lost no out-edges, so
    a fresh walk would retrace exactly the same prefix.
    """
    n = graph.n_vertices
    net = [0] * n
    out: list[list[Edge]] = [[] for _ in range(n)]
    for e in graph.edges:
        net[e.tail] += 1
        net[e.head] -= 1
        out[e.tail].append(e)
    if any(net):
        bad = ", ".join(graph.vertex_names[v] for v in range(n) if net[v])
        raise NotBalanced(f"in-degree differs from out-degree at {bad}")

    ptr = [0] * n
    cycles: list[Cycle] = []
    for start in range(n):
        while ptr[start] < len(out[start]):
            path: list[int] = [start]
            walk: list[Edge] = []
            position = {start: 0}
            v = start
            while True:
                e = out[v][ptr[v]]
                ptr[v] += 1
                walk.append(e)
                h = e.head
                if h not in position:
                    position[h] = len(path)
                    path.append(h)
                    v = h
                    continue
                i = position[h]
                cycles.append(Cycle(tuple(x.label for x in walk[i:])))
                for u in path[i + 1:]:
                    del position[u]
                del path[i + 1:]
                del walk[i:]
                if not walk:
                    break
                v = h
    return cycles


def max_circulation(n: int, capacity: dict[tuple[int, int], int]) -> dict[tuple[int, int], int]:
    """Maximum total flow of a circulation under the given arc capacities.

    Every unit of flow is worth one, so this is a min-cost circulation with
    cost -1 per unit, solved by cancelling negative residual cycles found with
    Bellman-Ford. Arcs with ``u == v`` are ignored; callers add loops back.
    """
    key = tuple(sorted((a, c) for a, c in capacity.items() if a[0] != a[1] and c > 0))
    return dict(_max_circulation(n, key))


@lru_cache(maxsize=1 << 16)
def _max_circulation(
    n: int, key: tuple[tuple[tuple[int, int], int], ...]
) -> tuple[tuple[tuple[int, int], int], ...]:
    capacity = dict(key)
    arcs = [a for a, _ in key]
    flow = {a: 0 for a in arcs}
    while True:
        cycle = _negative_residual_cycle(n, arcs, capacity, flow)
        if cycle is None:
            return tuple(flow.items())
        for arc, direction in cycle:
            flow[arc] += direction


def _negative_residual_cycle(
    n: int,
    arcs: list[tuple[int, int]],
    capacity: dict[tuple[int, int], int],
    flow: dict[tuple[int, int], int],
) -> list[tuple[tuple[int, int], int]] | None:
    residual: list[tuple[int, int, int, tuple[int, int], int]] = []
    for arc in arcs:
        u, v = arc
        if flow[arc] < capacity[arc]:
            residual.append((u, v, -1, arc, +1))
        if flow[arc] > 0:
            residual.append((v, u, +1, arc, -1))
    dist = [0] * n
    pred: list[tuple[int, int, int, tuple[int, int], int] | None] = [None] * n
    last = -1
    for _ in range(n):
        last = -1
        for r in residual:
            u, v, cost = r[0], r[1], r[2]
            if dist[u] + cost < dist[v]:
                dist[v] = dist[u] + cost
                pred[v] = r
                last = v
        if last < 0:
            return None
    v = last
    for _ in range(n):
        v = pred[v][0]  # type: ignore[index]
    cycle = []
    u = v
    while True:
        r = pred[u]
        assert r is not None
        cycle.append((r[3], r[4]))
        u = r[0]
        if u == v:
            break
    return cycle


def _assemble_pi(graph: ReportGraph, t_set: Sequence[int]) -> dict[int, int]:
    keep = set(t_set)
    by_head: list[list[int]] = [[] for _ in range(graph.n_vertices)]
    by_tail: list[list[int]] = [[] for _ in range(graph.n_vertices)]
    for e in graph.edges:
        if e.label in keep:
            by_head[e.head].append(e.label)
            by_tail[e.tail].append(e.label)
    pi: dict[int, int] = {}
    for v, (incoming, outgoing) in enumerate(zip(by_head, by_tail)):
        if len(incoming) != len(outgoing):
            raise NotBalanced(f"label set is not balanced at vertex {graph.vertex_names[v]}")
        pi.update(zip(incoming, outgoing))
    return dict(sorted(pi.items()))


def max_balanced_subset(graph: ReportGraph) -> BalancedMatch:
    """Largest label set whose edges form a balanced sub-multigraph, with its bijection.

    Loops are always kept. The non-loop part is a maximum unit-capacity
    circulation; each arc's flow is realised by its lowest labels.
    """
    capacity: dict[tuple[int, int], int] = {}
    for e in graph.edges:
        if e.tail != e.head:
            arc = (e.tail, e.head)
            capacity[arc] = capacity.get(arc, 0) + 1
    take = dict(_max_circulation(graph.n_vertices, tuple(sorted(capacity.items()))))
    t_set: list[int] = []
    for e in graph.edges:
        if e.tail == e.head:
            t_set.append(e.label)
        else:
            arc = (e.tail, e.head)
            left = take[arc]
            if left:
                take[arc] = left - 1
                t_set.append(e.label)
    t = tuple(t_set)
    return BalancedMatch(t, _assemble_pi(graph, t))


def brute_force_balanced_subset(
    graph: ReportGraph, limit: int = BRUTE_FORCE_LIMIT
) -> BalancedMatch:
    """Exhaustive oracle: the lexicographically first balanced label set of maximum size."""
    k = len(graph.edges)
    if k > limit:
        raise TooLarge(f"{k} edges exceeds the exhaustive bound of {limit}")
    n = graph.n_vertices
    edges = graph.edges
    for r in range(k, -1, -1):
        for combo in combinations(edges, r):
            net = [0] * n
            for e in combo:
                net[e.tail] += 1
                net[e.head] -= 1
            if not any(net):
                t = tuple(e.label for e in combo)
                return BalancedMatch(t, _assemble_pi(graph, t))
    raise AssertionError("the empty set is always balanced")
