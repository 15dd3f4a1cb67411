"""Abstract supply-chain graphs: validation, flow relations, and cost shares.

Centers are 1-indexed so care-matrix rows and columns read directly as
agent labels. The implicit source->first-center and last-center->sink
tiles are *not* graph edges; sources/sinks are derived from in/out degrees.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class TopologyError(ValueError):
    """Base class for invalid supply-chain graphs."""


class SelfLoop(TopologyError):
    pass


class DuplicateEdge(TopologyError):
    pass


class CycleDetected(TopologyError):
    pass


class UnreachableCenter(TopologyError):
    pass


class InvalidCenter(TopologyError):
    pass


class NotATree(TopologyError):
    """Raised by cost-share analysis on merge topologies."""


# A source-side edge in cost maps: SOURCE_NODE -> some source center.
SOURCE_NODE = 0


@dataclass(frozen=True)
class Topology:
    """A validated directed acyclic graph of processing centers.

    Immutable after construction; safe to share across threads.
    """

    num_centers: int
    edges: tuple[tuple[int, int], ...]
    source_centers: frozenset[int] = field(default_factory=frozenset)
    sink_centers: frozenset[int] = field(default_factory=frozenset)

    @property
    def centers(self) -> range:
        return range(1, self.num_centers + 1)

    def successors(self, i: int) -> tuple[int, ...]:
        _check_center(self, i)
        return tuple(b for a, b in self.edges if a == i)

    def predecessors(self, i: int) -> tuple[int, ...]:
        _check_center(self, i)
        return tuple(a for a, b in self.edges if b == i)

    def is_chain(self) -> bool:
        """True when the graph is a single directed path."""
        if self.num_centers == 1:
            return True
        indeg = {c: 0 for c in self.centers}
        outdeg = {c: 0 for c in self.centers}
        for a, b in self.edges:
            outdeg[a] += 1
            indeg[b] += 1
        return (
            all(d <= 1 for d in indeg.values())
            and all(d <= 1 for d in outdeg.values())
            and len(self.edges) == self.num_centers - 1
        )

    def chain_order(self) -> list[int]:
        """Centers in path order; only valid for chain topologies."""
        if not self.is_chain():
            raise NotATree("chain order is only defined for chain topologies")
        order = [next(iter(sorted(self.source_centers)))]
        nxt = dict(self.edges)
        while order[-1] in nxt:
            order.append(nxt[order[-1]])
        return order

    def topological_order(self) -> list[int]:
        """Kahn ordering; deterministic (ascending index among ready centers)."""
        indeg = {c: 0 for c in self.centers}
        for _, b in self.edges:
            indeg[b] += 1
        ready = sorted(c for c in self.centers if indeg[c] == 0)
        order: list[int] = []
        while ready:
            c = ready.pop(0)
            order.append(c)
            for d in self.successors(c):
                indeg[d] -= 1
                if indeg[d] == 0:
                    # insert keeping 'ready' sorted
                    lo = 0
                    while lo < len(ready) and ready[lo] < d:
                        lo += 1
                    ready.insert(lo, d)
        return order


def _check_center(t: Topology, i: int) -> None:
    if not isinstance(i, int) or not (1 <= i <= t.num_centers):
        raise InvalidCenter(f"center {i!r} not in [1, {t.num_centers}]")


def build_topology(num_centers: int, edges: list[tuple[int, int]] | list[list[int]]) -> Topology:
    """Validate and construct a Topology.

    Raises SelfLoop, DuplicateEdge, CycleDetected, UnreachableCenter or
    InvalidCenter. The single-vertex graph with no edges is accepted as a
    degenerate chain (its one center is both source and sink).
    """
    if num_centers < 1:
        raise InvalidCenter(f"num_centers must be >= 1, got {num_centers}")
    norm: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for e in edges:
        a, b = int(e[0]), int(e[1])
        if not (1 <= a <= num_centers) or not (1 <= b <= num_centers):
            raise InvalidCenter(f"edge ({a},{b}) references a center outside [1,{num_centers}]")
        if a == b:
            raise SelfLoop(f"edge ({a},{b}) is a self-loop")
        if (a, b) in seen:
            raise DuplicateEdge(f"edge ({a},{b}) appears twice")
        seen.add((a, b))
        norm.append((a, b))

    indeg = {c: 0 for c in range(1, num_centers + 1)}
    outdeg = {c: 0 for c in range(1, num_centers + 1)}
    for a, b in norm:
        outdeg[a] += 1
        indeg[b] += 1

    if num_centers > 1:
        isolated = [c for c in indeg if indeg[c] == 0 and outdeg[c] == 0]
        if isolated:
            raise UnreachableCenter(f"centers {isolated} touch no edge")

    # Cycle check: Kahn's algorithm.
    deg = dict(indeg)
    ready = [c for c in deg if deg[c] == 0]
    visited = 0
    adj: dict[int, list[int]] = {c: [] for c in deg}
    for a, b in norm:
        adj[a].append(b)
    while ready:
        c = ready.pop()
        visited += 1
        for d in adj[c]:
            deg[d] -= 1
            if deg[d] == 0:
                ready.append(d)
    if visited != num_centers:
        raise CycleDetected("graph contains a directed cycle")

    sources = frozenset(c for c in indeg if indeg[c] == 0)
    sinks = frozenset(c for c in outdeg if outdeg[c] == 0)

    # Every center must sit on some source->sink flow.
    from_sources = _reachable(adj, sources)
    radj: dict[int, list[int]] = {c: [] for c in deg}
    for a, b in norm:
        radj[b].append(a)
    to_sinks = _reachable(radj, sinks)
    stranded = sorted(set(indeg) - (from_sources & to_sinks))
    if stranded:
        raise UnreachableCenter(f"centers {stranded} are not on a source-to-sink flow")

    return Topology(
        num_centers=num_centers,
        edges=tuple(norm),
        source_centers=sources,
        sink_centers=sinks,
    )


def _reachable(adj: dict[int, list[int]], start: frozenset[int]) -> set[int]:
    out = set(start)
    stack = list(start)
    while stack:
        c = stack.pop()
        for d in adj[c]:
            if d not in out:
                out.add(d)
                stack.append(d)
    return out


def upstream_set(t: Topology, i: int) -> set[int]:
    """Centers from which a unit could flow to i (i excluded)."""
    _check_center(t, i)
    radj: dict[int, list[int]] = {c: [] for c in t.centers}
    for a, b in t.edges:
        radj[b].append(a)
    out = _reachable(radj, frozenset([i]))
    out.discard(i)
    return out


def downstream_set(t: Topology, i: int) -> set[int]:
    """Centers a unit could flow to from i (i excluded)."""
    _check_center(t, i)
    adj: dict[int, list[int]] = {c: [] for c in t.centers}
    for a, b in t.edges:
        adj[a].append(b)
    out = _reachable(adj, frozenset([i]))
    out.discard(i)
    return out


def shapley_cost_shares(
    t: Topology, edge_costs: dict[tuple[int, int], float]
) -> dict[int, float]:
    """Equal-split cost shares on a cost tree.

    Each edge's cost is divided equally among all centers downstream of
    (and including) the edge's head; a center's share is the sum over the
    edges on its source path. Source-side edges are keyed (0, source_center).
    Rejects merge topologies (any center with two parents) with NotATree.
    """
    for c in t.centers:
        if len(t.predecessors(c)) > 1:
            raise NotATree(f"center {c} has multiple incoming edges; cost shares need a tree")
    valid_keys = set(t.edges) | {(SOURCE_NODE, s) for s in t.source_centers}
    shares = {c: 0.0 for c in t.centers}
    for edge, cost in edge_costs.items():
        key = (int(edge[0]), int(edge[1]))
        if key not in valid_keys:
            raise InvalidCenter(f"{key} is neither a topology edge nor a source edge")
        if cost < 0:
            raise ValueError(f"edge {key} has negative cost {cost}")
        head = key[1]
        users = downstream_set(t, head) | {head}
        per_user = cost / len(users)
        for c in users:
            shares[c] += per_user
    return shares
