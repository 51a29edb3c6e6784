"""Directed acyclic graphs, layerings, and d-separation.

Nodes are small integer ids indexing a fixed label registry, so ids stay
stable when residual graphs are carved out of a larger graph. Everything
is immutable once built.
"""

from __future__ import annotations

import heapq
from collections import deque
from collections.abc import Callable, Iterable, Sequence
from collections.abc import Set as AbstractSet
from dataclasses import dataclass

NodeId = int


class CycleError(ValueError):
    """The edge set contains a directed cycle."""


class Dag:
    """Immutable DAG over integer node ids with string labels.

    ``labels`` is the full registry; ``nodes`` may be a subset of registry
    ids (residual graphs keep the registry of the graph they came from).
    """

    __slots__ = ("_labels", "_nodes", "_edges", "_parents", "_children", "_id_of")

    def __init__(
        self,
        labels: Sequence[str],
        edges: Iterable[tuple[NodeId, NodeId]] = (),
        nodes: Iterable[NodeId] | None = None,
    ):
        self._labels = tuple(str(x) for x in labels)
        if len(set(self._labels)) != len(self._labels):
            raise ValueError("node labels must be unique")
        if nodes is None:
            self._nodes = frozenset(range(len(self._labels)))
        else:
            self._nodes = frozenset(int(v) for v in nodes)
        for v in self._nodes:
            if not 0 <= v < len(self._labels):
                raise ValueError(f"node id {v} has no label registry entry")
        self._id_of = {lab: i for i, lab in enumerate(self._labels)}

        edge_set: set[tuple[int, int]] = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u not in self._nodes or v not in self._nodes:
                raise ValueError(f"edge ({u}, {v}) mentions an unknown node")
            if u == v:
                raise ValueError(f"self-loop on node {u}")
            if (v, u) in edge_set:
                raise ValueError(f"edges in both directions between {u} and {v}")
            edge_set.add((u, v))
        self._edges = frozenset(edge_set)

        parents: dict[int, set[int]] = {v: set() for v in self._nodes}
        children: dict[int, set[int]] = {v: set() for v in self._nodes}
        for u, v in self._edges:
            children[u].add(v)
            parents[v].add(u)
        self._parents = {v: frozenset(s) for v, s in parents.items()}
        self._children = {v: frozenset(s) for v, s in children.items()}
        self.topological_order()  # raises CycleError on a cycle

    @classmethod
    def of(cls, labels: Sequence[str], edges: Iterable[tuple[str, str]] = ()) -> Dag:
        """Build from label pairs, e.g. ``Dag.of("ABC", [("A", "B")])``."""
        labels = [str(x) for x in labels]
        idx = {lab: i for i, lab in enumerate(labels)}
        try:
            id_edges = [(idx[a], idx[b]) for a, b in edges]
        except KeyError as exc:
            raise ValueError(f"edge mentions unknown label {exc.args[0]!r}") from None
        return cls(labels, id_edges)

    @property
    def labels(self) -> tuple[str, ...]:
        return self._labels

    @property
    def nodes(self) -> frozenset[NodeId]:
        return self._nodes

    @property
    def edges(self) -> frozenset[tuple[NodeId, NodeId]]:
        return self._edges

    def __len__(self) -> int:
        return len(self._nodes)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dag):
            return NotImplemented
        return (
            self._labels == other._labels
            and self._nodes == other._nodes
            and self._edges == other._edges
        )

    def __hash__(self) -> int:
        return hash((self._labels, self._nodes, self._edges))

    def __repr__(self) -> str:
        ns = ",".join(self.label(v) for v in sorted(self._nodes))
        es = ",".join(f"{self.label(u)}->{self.label(v)}" for u, v in sorted(self._edges))
        return f"Dag([{ns}], [{es}])"

    def _require(self, v: NodeId) -> None:
        if v not in self._nodes:
            raise ValueError(f"unknown node {v}")

    def label(self, v: NodeId) -> str:
        self._require(v)
        return self._labels[v]

    def id_of(self, label: str) -> NodeId:
        v = self._id_of.get(label)
        if v is None or v not in self._nodes:
            raise ValueError(f"unknown node label {label!r}")
        return v

    def parents(self, v: NodeId) -> frozenset[NodeId]:
        self._require(v)
        return self._parents[v]

    def children(self, v: NodeId) -> frozenset[NodeId]:
        self._require(v)
        return self._children[v]

    def descendants(self, v: NodeId) -> frozenset[NodeId]:
        """All nodes reachable from ``v`` by directed edges, excluding ``v``."""
        self._require(v)
        seen: set[int] = set()
        stack = list(self._children[v])
        while stack:
            u = stack.pop()
            if u not in seen:
                seen.add(u)
                stack.extend(self._children[u])
        return frozenset(seen)

    def ancestors(self, v: NodeId) -> frozenset[NodeId]:
        """All nodes with a directed path to ``v``, excluding ``v``."""
        self._require(v)
        seen: set[int] = set()
        stack = list(self._parents[v])
        while stack:
            u = stack.pop()
            if u not in seen:
                seen.add(u)
                stack.extend(self._parents[u])
        return frozenset(seen)

    def sources(self) -> frozenset[NodeId]:
        return frozenset(v for v in self._nodes if not self._parents[v])

    def sinks(self) -> frozenset[NodeId]:
        return frozenset(v for v in self._nodes if not self._children[v])

    def residual(self, keep: Iterable[NodeId]) -> Dag:
        """The induced subgraph on ``keep``, with ids kept stable."""
        keep = frozenset(int(v) for v in keep)
        if not keep <= self._nodes:
            bad = sorted(keep - self._nodes)
            raise ValueError(f"keep set contains unknown nodes {bad}")
        kept_edges = [(u, v) for u, v in self._edges if u in keep and v in keep]
        return Dag(self._labels, kept_edges, keep)

    def unmediated_parents(self, v: NodeId) -> frozenset[NodeId]:
        """Parents of ``v`` with no descendant among the other parents of ``v``."""
        ps = self.parents(v)
        return frozenset(p for p in ps if not (self.descendants(p) & ps))

    def topological_order(self) -> tuple[NodeId, ...]:
        """Kahn's algorithm; ties broken by smallest node id."""
        indeg = {v: len(self._parents[v]) for v in self._nodes}
        ready = [v for v in self._nodes if indeg[v] == 0]
        heapq.heapify(ready)
        out: list[int] = []
        while ready:
            v = heapq.heappop(ready)
            out.append(v)
            for c in self._children[v]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    heapq.heappush(ready, c)
        if len(out) != len(self._nodes):
            raise CycleError("graph contains a directed cycle")
        return tuple(out)


@dataclass(frozen=True)
class Layering:
    """An ordered tuple of non-empty, mutually disjoint node sets."""

    layers: tuple[frozenset[NodeId], ...]

    def __post_init__(self) -> None:
        seen: set[int] = set()
        for layer in self.layers:
            if not isinstance(layer, frozenset):
                raise TypeError("layers must be frozensets; use Layering.of(...)")
            if not layer:
                raise ValueError("layers must be non-empty")
            if layer & seen:
                raise ValueError("layers must be disjoint")
            seen |= layer

    @classmethod
    def of(cls, layers: Iterable[Iterable[NodeId]]) -> Layering:
        return cls(tuple(frozenset(int(v) for v in layer) for layer in layers))

    @property
    def nodes(self) -> frozenset[NodeId]:
        out: set[int] = set()
        for layer in self.layers:
            out |= layer
        return frozenset(out)

    def positions(self) -> dict[NodeId, int]:
        return {v: i for i, layer in enumerate(self.layers) for v in layer}

    def __iter__(self):
        return iter(self.layers)

    def __len__(self) -> int:
        return len(self.layers)

    def __getitem__(self, i: int) -> frozenset[NodeId]:
        return self.layers[i]


def layering_violations(g: Dag, layering: Layering) -> tuple[str, ...]:
    """Reasons ``layering`` fails to be a layering of ``g``; empty if valid.

    A valid layering partitions ``g.nodes`` and every edge goes from a
    strictly earlier layer to a strictly later one.
    """
    reasons: list[str] = []
    covered = layering.nodes
    missing = g.nodes - covered
    extra = covered - g.nodes
    if missing:
        reasons.append("missing nodes: " + ", ".join(g.label(v) for v in sorted(missing)))
    if extra:
        reasons.append("unknown nodes: " + ", ".join(str(v) for v in sorted(extra)))
    pos = layering.positions()
    for u, v in sorted(g.edges):
        if u in pos and v in pos and pos[u] >= pos[v]:
            reasons.append(
                f"edge {g.label(u)} -> {g.label(v)} not strictly forward "
                f"(layer {pos[u] + 1} vs {pos[v] + 1})"
            )
    return tuple(reasons)


def is_layering(g: Dag, layering: Layering) -> bool:
    return not layering_violations(g, layering)


def d_separated(
    g: Dag,
    xs: Iterable[NodeId],
    ys: Iterable[NodeId],
    zs: Iterable[NodeId] = (),
) -> bool:
    """Whether ``xs`` and ``ys`` are d-separated given ``zs``.

    Linear-time reachability sweep over (node, entry-direction) states.
    A collider is open iff it or one of its descendants is conditioned on,
    which the sweep encodes via the ancestor set of ``zs``.
    """
    xs = frozenset(int(v) for v in xs)
    ys = frozenset(int(v) for v in ys)
    zs = frozenset(int(v) for v in zs)
    if not xs or not ys:
        raise ValueError("both endpoint sets must be non-empty")
    for s in (xs, ys, zs):
        for v in s:
            g._require(v)
    if xs & ys or xs & zs or ys & zs:
        raise ValueError("endpoint and conditioning sets must be pairwise disjoint")

    # ancestors of zs, including zs
    anc = set(zs)
    stack = list(zs)
    while stack:
        v = stack.pop()
        for p in g.parents(v):
            if p not in anc:
                anc.add(p)
                stack.append(p)

    UP, DOWN = 0, 1  # UP: entered against an edge (from a child); DOWN: from a parent
    frontier: deque[tuple[int, int]] = deque((x, UP) for x in xs)
    visited: set[tuple[int, int]] = set()
    while frontier:
        v, direction = frontier.popleft()
        if (v, direction) in visited:
            continue
        visited.add((v, direction))
        if v in ys:
            return False
        if direction == UP:
            if v not in zs:
                for p in g.parents(v):
                    frontier.append((p, UP))
                for c in g.children(v):
                    frontier.append((c, DOWN))
        else:
            if v not in zs:
                for c in g.children(v):
                    frontier.append((c, DOWN))
            if v in anc:  # collider (or observed chain head) opens toward parents
                for p in g.parents(v):
                    frontier.append((p, UP))
    return True


# --- removal-based layering ------------------------------------------------

RemovalSelector = Callable[
    [frozenset[NodeId], frozenset[NodeId]],
    tuple[AbstractSet[NodeId], AbstractSet[NodeId]],
]
SetSelector = Callable[[frozenset[NodeId]], AbstractSet[NodeId]]


def select_all(
    sources: frozenset[NodeId], sinks: frozenset[NodeId]
) -> tuple[frozenset[NodeId], frozenset[NodeId]]:
    """Default removal choice: every source, plus every sink that is not a source."""
    return sources, sinks - sources


def take_k_by_label(g: Dag, k: int = 1) -> SetSelector:
    """Selector keeping the ``k`` candidates with lexicographically smallest labels."""
    if k < 1:
        raise ValueError("k must be positive")

    def pick(candidates: frozenset[NodeId]) -> frozenset[NodeId]:
        chosen = sorted(candidates, key=g.label)[:k]
        return frozenset(chosen)

    return pick


def rr(g: Dag, select: RemovalSelector | None = None) -> Layering:
    """Layer a DAG by repeatedly removing chosen sources and sinks.

    Each round the selector sees the residual graph's sources and sinks and
    returns (SR, SN) with SR a set of sources, SN a set of sinks, disjoint,
    not both empty. Removed source groups extend the layering at the front
    in removal order; sink groups extend it at the back in reverse order.
    Any such sequence of choices yields a valid layering.
    """
    chooser = select if select is not None else select_all
    remaining = set(g.nodes)
    front: list[frozenset[int]] = []
    back: deque[frozenset[int]] = deque()
    while remaining:
        res = g.residual(remaining)
        sr_raw, sn_raw = chooser(res.sources(), res.sinks())
        sr, sn = frozenset(sr_raw), frozenset(sn_raw)
        if not sr <= res.sources():
            raise ValueError("selector returned nodes that are not current sources")
        if not sn <= res.sinks():
            raise ValueError("selector returned nodes that are not current sinks")
        if not (sr or sn):
            raise ValueError("selector returned two empty sets")
        if sr & sn:
            raise ValueError("selector returned overlapping source and sink sets")
        if sr:
            front.append(sr)
        if sn:
            back.appendleft(sn)
        remaining -= sr | sn
    return Layering(tuple(front) + tuple(back))


def sour_layering(g: Dag, select: SetSelector | None = None) -> Layering:
    """Layering by repeated source removal (every layer is a source group)."""
    remaining = set(g.nodes)
    layers: list[frozenset[int]] = []
    while remaining:
        res = g.residual(remaining)
        candidates = res.sources()
        sr = frozenset(select(candidates)) if select is not None else candidates
        if not sr:
            raise ValueError("selector returned an empty source set")
        if not sr <= candidates:
            raise ValueError("selector returned nodes that are not current sources")
        layers.append(sr)
        remaining -= sr
    return Layering(tuple(layers))


def sir_layering(g: Dag, select: SetSelector | None = None) -> Layering:
    """Layering by repeated sink removal (built back to front)."""
    remaining = set(g.nodes)
    layers: deque[frozenset[int]] = deque()
    while remaining:
        res = g.residual(remaining)
        candidates = res.sinks()
        sn = frozenset(select(candidates)) if select is not None else candidates
        if not sn:
            raise ValueError("selector returned an empty sink set")
        if not sn <= candidates:
            raise ValueError("selector returned nodes that are not current sinks")
        layers.appendleft(sn)
        remaining -= sn
    return Layering(tuple(layers))


# --- text formats -----------------------------------------------------------


def render_dag(g: Dag) -> str:
    """One ``nodes:`` header line plus one ``edge:`` line per edge."""
    lines = ["nodes: " + ", ".join(g.label(v) for v in sorted(g.nodes))]
    for u, v in sorted(g.edges):
        lines.append(f"edge: {g.label(u)} -> {g.label(v)}")
    return "\n".join(lines) + "\n"


def parse_dag(text: str) -> Dag:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("nodes:"):
        raise ValueError("graph text must start with a 'nodes:' line")
    labels = [p.strip() for p in lines[0][len("nodes:"):].split(",") if p.strip()]
    edges: list[tuple[str, str]] = []
    for ln in lines[1:]:
        if not ln.startswith("edge:"):
            raise ValueError(f"unrecognized line in graph text: {ln!r}")
        body = ln[len("edge:"):]
        if "->" not in body:
            raise ValueError(f"malformed edge line: {ln!r}")
        a, b = (p.strip() for p in body.split("->", 1))
        edges.append((a, b))
    return Dag.of(labels, edges)


def render_layering(layering: Layering, g: Dag) -> str:
    """``layer <i>: <labels>`` lines, one per layer, in order."""
    lines = []
    for i, layer in enumerate(layering, start=1):
        lines.append(f"layer {i}: " + ", ".join(sorted(g.label(v) for v in layer)))
    return "\n".join(lines) + "\n"


def parse_layering(text: str, g: Dag) -> Layering:
    layers: list[frozenset[int]] = []
    for n, ln in enumerate((ln.strip() for ln in text.splitlines() if ln.strip()), start=1):
        head, _, body = ln.partition(":")
        if head.strip() != f"layer {n}":
            raise ValueError(f"expected 'layer {n}:' line, got {ln!r}")
        labels = [p.strip() for p in body.split(",") if p.strip()]
        layers.append(frozenset(g.id_of(lab) for lab in labels))
    return Layering(tuple(layers))
