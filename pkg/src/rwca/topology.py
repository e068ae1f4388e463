"""Directed-arc graph model of an optical network plus hop-count path utilities.

Nodes are 0-based integers internally.  Files and reports use 1-based labels.
Every undirected fiber becomes two antiparallel arcs; wavelength clashes are
tracked per arc, so opposite directions of one fiber never conflict.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Iterator, Sequence


class TopologyError(ValueError):
    """Base class for malformed topology input."""


class NodeRangeError(TopologyError):
    pass


class SelfLoopError(TopologyError):
    pass


class DuplicateEdgeError(TopologyError):
    pass


class TopologySyntaxError(TopologyError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass(frozen=True)
class Arc:
    id: int
    tail: int
    head: int


@dataclass(frozen=True)
class Path:
    nodes: tuple[int, ...]
    arcs: tuple[int, ...]

    @property
    def hops(self) -> int:
        return len(self.arcs)

    @property
    def src(self) -> int:
        return self.nodes[0]

    @property
    def dst(self) -> int:
        return self.nodes[-1]

    def label(self) -> str:
        return "-".join(str(v + 1) for v in self.nodes)


@dataclass(frozen=True)
class Topology:
    name: str
    node_count: int
    node_labels: tuple[str, ...]
    arcs: tuple[Arc, ...]
    out_arcs: tuple[tuple[int, ...], ...] = field(repr=False, compare=False)
    in_arcs: tuple[tuple[int, ...], ...] = field(repr=False, compare=False)
    arc_index: dict = field(repr=False, compare=False, hash=False)

    @property
    def arc_count(self) -> int:
        return len(self.arcs)

    def arc_id(self, tail: int, head: int) -> int:
        return self.arc_index[(tail, head)]

    def has_arc(self, tail: int, head: int) -> bool:
        return (tail, head) in self.arc_index

    def successors(self, v: int) -> list[int]:
        return [self.arcs[a].head for a in self.out_arcs[v]]

    def in_degree(self, v: int) -> int:
        return len(self.in_arcs[v])

    def out_degree(self, v: int) -> int:
        return len(self.out_arcs[v])

    def undirected_edges(self) -> list[tuple[int, int]]:
        return sorted((a.tail, a.head) for a in self.arcs if a.tail < a.head)

    def path(self, nodes: Sequence[int]) -> Path:
        """Build a Path from a node sequence, checking arcs and simplicity."""
        nodes = tuple(nodes)
        if len(nodes) < 2:
            raise ValueError("a path needs at least two nodes")
        if len(set(nodes)) != len(nodes):
            raise ValueError(f"path {nodes} repeats a node")
        try:
            arcs = tuple(self.arc_index[(u, v)] for u, v in zip(nodes, nodes[1:]))
        except KeyError as exc:
            raise ValueError(f"path {nodes} uses missing arc {exc.args[0]}") from None
        return Path(nodes, arcs)

    def node(self, label: str | int) -> int:
        """Resolve a 1-based index or a node label to an internal node id."""
        if isinstance(label, int):
            v = label - 1
        elif label in self.node_labels:
            return self.node_labels.index(label)
        else:
            v = int(label) - 1
        if not 0 <= v < self.node_count:
            raise NodeRangeError(f"node {label} outside 1..{self.node_count}")
        return v


def build_topology(node_count: int, undirected_edges: Iterable[tuple[int, int]],
                   name: str = "topology", labels: Sequence[str] | None = None) -> Topology:
    """Build a topology from 0-based undirected edges.

    Edges are canonicalized and sorted, so two builds from the same edge set
    produce identical arc ids regardless of input order.
    """
    if node_count < 1:
        raise TopologyError("node_count must be positive")
    seen: set[tuple[int, int]] = set()
    for u, v in undirected_edges:
        for x in (u, v):
            if not 0 <= x < node_count:
                raise NodeRangeError(f"edge ({u + 1},{v + 1}) references node {x + 1} outside 1..{node_count}")
        if u == v:
            raise SelfLoopError(f"self-loop at node {u + 1}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise DuplicateEdgeError(f"duplicate edge ({key[0] + 1},{key[1] + 1})")
        seen.add(key)

    if labels is None:
        labels = [str(i + 1) for i in range(node_count)]
    if len(labels) != node_count:
        raise TopologyError("label count does not match node_count")

    arcs = []
    for u, v in sorted(seen):
        arcs.append(Arc(len(arcs), u, v))
        arcs.append(Arc(len(arcs), v, u))
    out_arcs: list[list[int]] = [[] for _ in range(node_count)]
    in_arcs: list[list[int]] = [[] for _ in range(node_count)]
    # adjacency sorted by neighbor id: search order below depends on it
    for a in sorted(arcs, key=lambda a: (a.tail, a.head)):
        out_arcs[a.tail].append(a.id)
    for a in sorted(arcs, key=lambda a: (a.head, a.tail)):
        in_arcs[a.head].append(a.id)
    return Topology(
        name=name,
        node_count=node_count,
        node_labels=tuple(labels),
        arcs=tuple(arcs),
        out_arcs=tuple(tuple(x) for x in out_arcs),
        in_arcs=tuple(tuple(x) for x in in_arcs),
        arc_index={(a.tail, a.head): a.id for a in arcs},
    )


# ---------------------------------------------------------------------------
# text format

def load_topology(text: str) -> Topology:
    name = None
    node_count = 0
    labels: dict[int, str] = {}
    edges: list[tuple[int, int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        if name is None:
            if tok[0] != "topology" or len(tok) != 3:
                raise TopologySyntaxError(lineno, "expected 'topology <name> <node_count>' header")
            name = tok[1]
            node_count = _int(tok[2], lineno)
            if node_count < 1:
                raise TopologySyntaxError(lineno, "node_count must be positive")
            continue
        if tok[0] == "label":
            if len(tok) < 3:
                raise TopologySyntaxError(lineno, "expected 'label <index> <text>'")
            idx = _int(tok[1], lineno)
            if not 1 <= idx <= node_count:
                raise NodeRangeError(f"line {lineno}: label for node {idx} outside 1..{node_count}")
            labels[idx - 1] = " ".join(tok[2:])
        elif tok[0] == "edge":
            if len(tok) != 3:
                raise TopologySyntaxError(lineno, "expected 'edge <u> <v>'")
            edges.append((_int(tok[1], lineno) - 1, _int(tok[2], lineno) - 1, lineno))
        else:
            raise TopologySyntaxError(lineno, f"unknown record '{tok[0]}'")
    if name is None:
        raise TopologySyntaxError(1, "missing 'topology' header")

    seen = set()
    for u, v, lineno in edges:
        # re-raise with the offending record attached
        try:
            build_topology(node_count, [(u, v)])
        except TopologyError as exc:
            raise type(exc)(f"line {lineno}: {exc}") from None
        key = (min(u, v), max(u, v))
        if key in seen:
            raise DuplicateEdgeError(f"line {lineno}: duplicate edge ({u + 1},{v + 1})")
        seen.add(key)
    node_labels = [labels.get(i, str(i + 1)) for i in range(node_count)]
    return build_topology(node_count, [(u, v) for u, v, _ in edges], name=name, labels=node_labels)


def _int(tok: str, lineno: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise TopologySyntaxError(lineno, f"expected integer, got '{tok}'") from None


def serialize_topology(t: Topology) -> str:
    lines = [f"topology {t.name} {t.node_count}"]
    for i, lab in enumerate(t.node_labels):
        if lab != str(i + 1):
            lines.append(f"label {i + 1} {lab}")
    for u, v in t.undirected_edges():
        lines.append(f"edge {u + 1} {v + 1}")
    return "\n".join(lines) + "\n"


def builtin_cost239() -> Topology:
    return load_topology(resources.files("rwca.data").joinpath("cost239.topo").read_text("utf-8"))


def builtin_toy() -> Topology:
    """Five-node example network: A-X, B-X, X-I, I-C."""
    return load_topology(resources.files("rwca.data").joinpath("toy.topo").read_text("utf-8"))


BUILTIN_TOPOLOGIES = {"cost239": builtin_cost239, "toy": builtin_toy}


# ---------------------------------------------------------------------------
# hop-count path utilities

def hop_distances_to(t: Topology, dst: int, usable=None) -> list[int]:
    """Reverse BFS hop distance from every node to dst (-1 if unreachable).

    ``usable`` optionally filters arc ids.
    """
    dist = [-1] * t.node_count
    dist[dst] = 0
    queue = deque([dst])
    while queue:
        v = queue.popleft()
        for a in t.in_arcs[v]:
            if usable is not None and not usable(a):
                continue
            u = t.arcs[a].tail
            if dist[u] < 0:
                dist[u] = dist[v] + 1
                queue.append(u)
    return dist


def hop_distance_matrix(t: Topology) -> list[list[int]]:
    """``m[u][v]`` is the hop distance from u to v, -1 when unreachable."""
    to = [hop_distances_to(t, v) for v in range(t.node_count)]
    return [[to[v][u] for v in range(t.node_count)] for u in range(t.node_count)]


def _lexmin_shortest(t: Topology, src: int, dst: int, banned_nodes: set[int],
                     banned_arcs: set[int]) -> tuple[int, ...] | None:
    def usable(a: int) -> bool:
        arc = t.arcs[a]
        return a not in banned_arcs and arc.tail not in banned_nodes and arc.head not in banned_nodes

    if src in banned_nodes:
        return None
    dist = hop_distances_to(t, dst, usable)
    if dist[src] < 0:
        return None
    nodes = [src]
    v = src
    while v != dst:
        # out_arcs are sorted by head id, so the first match is the lexicographic minimum
        for a in t.out_arcs[v]:
            if usable(a) and dist[t.arcs[a].head] == dist[v] - 1:
                v = t.arcs[a].head
                break
        nodes.append(v)
    return tuple(nodes)


def k_shortest_simple_paths(t: Topology, src: int, dst: int, k: int) -> list[Path]:
    """Yen's algorithm on hop count, ties broken by node-sequence order."""
    if src == dst:
        raise ValueError("src and dst must differ")
    if k < 1:
        raise ValueError("k must be >= 1")
    return list(_yen(t, src, dst, k))


def iter_shortest_simple_paths(t: Topology, src: int, dst: int) -> Iterator[Path]:
    """Unbounded Yen generator, same order as k_shortest_simple_paths."""
    return _yen(t, src, dst, None)


def _yen(t: Topology, src: int, dst: int, k: int | None) -> Iterator[Path]:
    first = _lexmin_shortest(t, src, dst, set(), set())
    if first is None:
        return
    found: list[tuple[int, ...]] = [first]
    yield t.path(first)
    candidates: list[tuple[int, tuple[int, ...]]] = []
    in_heap: set[tuple[int, ...]] = set()
    while k is None or len(found) < k:
        last = found[-1]
        for i in range(len(last) - 1):
            root = last[: i + 1]
            banned_arcs = {
                t.arc_index[(p[i], p[i + 1])]
                for p in found
                if len(p) > i + 1 and p[: i + 1] == root
            }
            spur = _lexmin_shortest(t, root[-1], dst, set(root[:-1]), banned_arcs)
            if spur is None:
                continue
            cand = root[:-1] + spur
            if cand not in in_heap:
                in_heap.add(cand)
                heapq.heappush(candidates, (len(cand), cand))
        if not candidates:
            return
        _, best = heapq.heappop(candidates)
        found.append(best)
        yield t.path(best)


def all_simple_paths(t: Topology, src: int, dst: int, max_hops: int | None = None) -> list[Path]:
    """Every simple src->dst path, sorted by (hops, node sequence)."""
    out = []
    stack = [src]
    on_path = {src}

    def rec(v: int) -> None:
        if v == dst:
            out.append(tuple(stack))
            return
        if max_hops is not None and len(stack) - 1 >= max_hops:
            return
        for w in t.successors(v):
            if w not in on_path:
                stack.append(w)
                on_path.add(w)
                rec(w)
                stack.pop()
                on_path.discard(w)

    rec(src)
    out.sort(key=lambda p: (len(p), p))
    return [t.path(p) for p in out]
