"""Network formation games: graphs, topology grammar, paths, state vectors.

Networks are finite directed graphs with strictly positive edge costs.  The
composition operations (series, parallel, single-edge extension) mirror the
grammar that defines the extension-parallel (EP) and series-of-parallel-paths
(SPP) topology classes; `classify` recognizes membership structurally so the
two directions can be cross-checked.

A `NetworkFormationGame` materializes each player's strategy space as an
explicit list of simple source-to-target paths (capped, since the exhaustive
oracle needs explicit spaces), while `br_path` recomputes best responses as a
cheapest-path problem under marginal-share edge weights so the two routes can
validate each other.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Mapping, Sequence

from .core import (
    Game,
    GameError,
    PlayerId,
    Profile,
    ResourceId,
    SocialCostKind,
    Strategy,
    ZERO,
)

NodeId = int


class NetworkError(GameError):
    """Malformed network or composition with mismatched terminals."""


class PathCapExceeded(NetworkError):
    """Simple-path enumeration hit the oracle-scale guard."""


@dataclass(frozen=True)
class Edge:
    id: ResourceId
    tail: NodeId
    head: NodeId
    cost: Fraction

    def __post_init__(self) -> None:
        if self.cost <= 0:
            raise NetworkError(f"edge {self.id} needs a positive cost, got {self.cost}")


@dataclass(frozen=True)
class Network:
    """Directed graph with optional designated source/sink terminals."""

    edges: tuple[Edge, ...]
    source: NodeId | None = None
    sink: NodeId | None = None

    def __post_init__(self) -> None:
        seen = set()
        for e in self.edges:
            if e.id in seen:
                raise NetworkError(f"duplicate edge id {e.id}")
            seen.add(e.id)

    @property
    def nodes(self) -> tuple[NodeId, ...]:
        out: set[NodeId] = set()
        for e in self.edges:
            out.add(e.tail)
            out.add(e.head)
        if self.source is not None:
            out.add(self.source)
        if self.sink is not None:
            out.add(self.sink)
        return tuple(sorted(out))

    def edge(self, edge_id: ResourceId) -> Edge:
        for e in self.edges:
            if e.id == edge_id:
                return e
        raise NetworkError(f"no edge with id {edge_id}")

    def out_edges(self, node: NodeId) -> tuple[Edge, ...]:
        return tuple(sorted((e for e in self.edges if e.tail == node), key=lambda e: e.id))

    def in_edges(self, node: NodeId) -> tuple[Edge, ...]:
        return tuple(sorted((e for e in self.edges if e.head == node), key=lambda e: e.id))

    def _require_terminals(self) -> tuple[NodeId, NodeId]:
        if self.source is None or self.sink is None:
            raise NetworkError("operation needs designated source and sink")
        return self.source, self.sink


def single_edge(edge_id: ResourceId, cost: Fraction | int | str, tail: NodeId = 0, head: NodeId = 1) -> Network:
    return Network((Edge(edge_id, tail, head, Fraction(cost)),), source=tail, sink=head)


def _relabel(net: Network, mapping: Mapping[NodeId, NodeId]) -> tuple[Edge, ...]:
    return tuple(
        Edge(e.id, mapping.get(e.tail, e.tail), mapping.get(e.head, e.head), e.cost)
        for e in net.edges
    )


def _fresh_nodes(a: Network, b: Network) -> Mapping[NodeId, NodeId]:
    taken = set(a.nodes)
    all_nodes = taken | set(b.nodes)
    mapping: dict[NodeId, NodeId] = {}
    next_id = max(all_nodes) + 1 if all_nodes else 0
    for v in b.nodes:
        if v in taken:
            mapping[v] = next_id
            next_id += 1
    return mapping


def compose_series(g1: Network, g2: Network) -> Network:
    """Identify g1's sink with g2's source; terminals become (s1, t2)."""
    s1, t1 = g1._require_terminals()
    s2, t2 = g2._require_terminals()
    mapping = dict(_fresh_nodes(g1, g2))
    mapping[s2] = t1
    edges2 = _relabel(g2, mapping)
    clash = {e.id for e in g1.edges} & {e.id for e in edges2}
    if clash:
        raise NetworkError(f"edge ids clash in composition: {sorted(clash)}")
    return Network(g1.edges + edges2, source=s1, sink=mapping.get(t2, t2))


def compose_parallel(g1: Network, g2: Network) -> Network:
    """Identify the two sources and the two sinks."""
    s1, t1 = g1._require_terminals()
    s2, t2 = g2._require_terminals()
    mapping = dict(_fresh_nodes(g1, g2))
    mapping[s2] = s1
    mapping[t2] = t1
    edges2 = _relabel(g2, mapping)
    clash = {e.id for e in g1.edges} & {e.id for e in edges2}
    if clash:
        raise NetworkError(f"edge ids clash in composition: {sorted(clash)}")
    return Network(g1.edges + edges2, source=s1, sink=t1)


def extend_with_edge(g: Network, edge_id: ResourceId, cost: Fraction | int | str, side: str) -> Network:
    """EP extension: a single new edge in series, before or after `g`."""
    s, t = g._require_terminals()
    new_node = max(g.nodes) + 1
    if side == "after":
        return Network(
            g.edges + (Edge(edge_id, t, new_node, Fraction(cost)),), source=s, sink=new_node
        )
    if side == "before":
        return Network(
            g.edges + (Edge(edge_id, new_node, s, Fraction(cost)),), source=new_node, sink=t
        )
    raise NetworkError(f"side must be 'before' or 'after', got {side!r}")


# -- topology recognition ----------------------------------------------------


class Topology(Enum):
    PARALLEL_EDGE = "parallel-edge"
    SPP = "spp"
    EP = "ep"
    GENERAL = "general"


def spp_decomposition(
    net: Network,
) -> tuple[tuple[NodeId, ...], tuple[tuple[Edge, ...], ...]] | None:
    """Chain vertices and segment blocks if the network is a series of
    parallel-edge blocks between its terminals, else None."""
    if net.source is None or net.sink is None or not net.edges:
        return None
    segments: list[tuple[Edge, ...]] = []
    vertices: list[NodeId] = [net.source]
    current = net.source
    seen_nodes = {current}
    remaining = set(e.id for e in net.edges)
    while current != net.sink:
        block = net.out_edges(current)
        if not block:
            return None
        heads = {e.head for e in block}
        if len(heads) != 1:
            return None
        head = heads.pop()
        if head in seen_nodes:
            return None
        # all traffic into the next vertex must come from this block
        if set(net.in_edges(head)) != set(block):
            return None
        segments.append(block)
        remaining -= {e.id for e in block}
        seen_nodes.add(head)
        vertices.append(head)
        current = head
    if remaining:
        return None
    return tuple(vertices), tuple(segments)


def spp_segments(net: Network) -> tuple[tuple[Edge, ...], ...] | None:
    decomposition = spp_decomposition(net)
    return None if decomposition is None else decomposition[1]


def is_spp(net: Network) -> bool:
    return spp_segments(net) is not None


def is_ep(net: Network) -> bool:
    """Membership in the extension-parallel grammar: a single edge, a
    parallel composition of EP networks, or an EP network extended by one
    edge in series."""
    if net.source is None or net.sink is None:
        return False
    return _is_ep(net.edges, net.source, net.sink)


def _is_ep(edges: tuple[Edge, ...], s: NodeId, t: NodeId) -> bool:
    if not edges:
        return False
    if len(edges) == 1:
        return edges[0].tail == s and edges[0].head == t
    blocks = _parallel_blocks(edges, s, t)
    if blocks is None:
        return False
    if len(blocks) > 1:
        return all(_is_ep(tuple(block), s, t) for block in blocks)
    # single block: try peeling one series edge off either terminal
    out_s = [e for e in edges if e.tail == s]
    if len(out_s) == 1 and not any(e.head == s for e in edges):
        e = out_s[0]
        if not any(o is not e and o.head == e.head for o in edges) and e.head != t:
            return _is_ep(tuple(o for o in edges if o is not e), e.head, t)
    in_t = [e for e in edges if e.head == t]
    if len(in_t) == 1 and not any(e.tail == t for e in edges):
        e = in_t[0]
        if not any(o is not e and o.tail == e.tail for o in edges) and e.tail != s:
            return _is_ep(tuple(o for o in edges if o is not e), s, e.tail)
    return False


def _parallel_blocks(
    edges: tuple[Edge, ...], s: NodeId, t: NodeId
) -> list[list[Edge]] | None:
    """Partition into components attached only at {s, t}; None if some edge
    avoids both terminals' component structure (disconnected garbage)."""
    parent: dict = {}

    def find(x):
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        parent[find(a)] = find(b)

    for e in edges:
        tail = ("n", e.tail) if e.tail not in (s, t) else ("e", e.id)
        head = ("n", e.head) if e.head not in (s, t) else ("e", e.id)
        union(("e", e.id), tail)
        union(("e", e.id), head)
    groups: dict = {}
    for e in edges:
        groups.setdefault(find(("e", e.id)), []).append(e)
    return [sorted(g, key=lambda e: e.id) for g in groups.values()]


def classify(net: Network) -> Topology:
    segs = spp_segments(net)
    if segs is not None and len(segs) == 1:
        return Topology.PARALLEL_EDGE
    if segs is not None:
        return Topology.SPP
    if is_ep(net):
        return Topology.EP
    return Topology.GENERAL


# -- paths --------------------------------------------------------------------

DEFAULT_PATH_CAP = 10_000


def enumerate_paths(
    net: Network, s: NodeId, t: NodeId, cap: int = DEFAULT_PATH_CAP
) -> tuple[Strategy, ...]:
    """All simple directed s-t paths as edge-id tuples, in lexicographic
    order of the edge-id sequence.  Raises PathCapExceeded beyond `cap`."""
    paths: list[Strategy] = []

    def walk(node: NodeId, visited: frozenset[NodeId], acc: tuple[ResourceId, ...]) -> None:
        if node == t:
            paths.append(acc)
            if len(paths) > cap:
                raise PathCapExceeded(f"more than {cap} simple paths from {s} to {t}")
            return
        for e in sorted(net.out_edges(node), key=lambda e: e.id):
            if e.head in visited:
                continue
            walk(e.head, visited | {e.head}, acc + (e.id,))

    walk(s, frozenset({s}), ())
    if not paths:
        raise NetworkError(f"no path from {s} to {t}")
    return tuple(sorted(paths))


# -- the game -----------------------------------------------------------------


@dataclass(frozen=True)
class PlayerSpec:
    source: NodeId
    target: NodeId
    weight: Fraction = Fraction(1)

    def __post_init__(self) -> None:
        if self.weight <= 0:
            raise NetworkError(f"player weight must be positive, got {self.weight}")


@dataclass(frozen=True)
class NfgStateVector:
    """The local information a deviator rule may see about one player."""

    current_cost: Fraction
    current_path_cost: Fraction
    br_cost: Fraction
    br_path_cost: Fraction
    weight: Fraction | None = None


class NetworkFormationGame(Game):
    """Fair-share network formation game; weighted variants share each edge
    cost proportionally to weight.

    Weighted games are only admitted on parallel-edge and 1-2 segment SPP
    topologies, the settings where best-response dynamics is known to
    converge; anything else is rejected at construction.
    """

    def __init__(
        self,
        network: Network,
        players: Sequence[PlayerSpec],
        path_cap: int = DEFAULT_PATH_CAP,
    ) -> None:
        self.network = network
        self.specs = tuple(players)
        weights = [p.weight for p in self.specs]
        if any(w != 1 for w in weights):
            segs = spp_segments(network)
            if segs is None or len(segs) > 2:
                raise NetworkError(
                    "weighted players are restricted to parallel-edge and "
                    "2-segment SPP networks"
                )
        self._edge_cost = {e.id: e.cost for e in network.edges}
        spaces = [
            enumerate_paths(network, p.source, p.target, cap=path_cap) for p in self.specs
        ]
        used = {e for space in spaces for path in space for e in path}
        unused = {e.id for e in network.edges} - used
        if unused:
            raise NetworkError(
                f"edges {sorted(unused)} lie on no player's source-target path"
            )
        super().__init__(spaces, weights, SocialCostKind.SUM)

    def edge_cost(self, edge_id: ResourceId) -> Fraction:
        return self._edge_cost[edge_id]

    def path_cost(self, path: Strategy) -> Fraction:
        return sum((self._edge_cost[e] for e in path), ZERO)

    def _cost_against(self, player, strategy, counts, weights):
        w = self.weight(player)
        total = ZERO
        for e in strategy:
            total += w * self._edge_cost[e] / (weights.get(e, ZERO) + w)
        return total

    def _unit_resource_cost(self, resource: ResourceId, multiplicity: int) -> Fraction:
        return self._edge_cost[resource] / multiplicity

    # strategy spaces are stored in lexicographic edge-id order, so the
    # inherited lowest-index tie-break picks the lex-smallest tied path

    # -- marginal-cost shortest paths -----------------------------------

    def br_path(self, profile: Profile, player: PlayerId) -> tuple[Strategy, ...]:
        """Best-response paths recomputed as cheapest paths under marginal
        share weights (the player's cost of joining each edge, herself
        excluded).  Must agree with `best_response`; the test suite
        cross-checks the two on every enumerable game."""
        self.validate_profile(profile)
        counts, weights = self._loads_excluding(profile, player)
        w = self.weight(player)
        spec = self.specs[self.position_of(player)]

        def marginal(e: Edge) -> Fraction:
            return w * e.cost / (weights.get(e.id, ZERO) + w)

        dist: dict[NodeId, Fraction] = {spec.source: ZERO}
        done: set[NodeId] = set()
        queue: list[tuple[Fraction, NodeId]] = [(ZERO, spec.source)]
        while queue:
            d, node = heapq.heappop(queue)
            if node in done:
                continue
            done.add(node)
            for e in self.network.out_edges(node):
                nd = d + marginal(e)
                if e.head not in dist or nd < dist[e.head]:
                    dist[e.head] = nd
                    heapq.heappush(queue, (nd, e.head))
        if spec.target not in dist:
            raise NetworkError(f"no path for player {player}")
        # expand every path that is tight at each hop
        paths: list[Strategy] = []

        def walk(node: NodeId, acc: tuple[ResourceId, ...], remaining: Fraction) -> None:
            if node == spec.target and remaining == 0:
                paths.append(acc)
                return
            for e in self.network.out_edges(node):
                m = marginal(e)
                if e.head in dist and dist[node] + m == dist[e.head] and m <= remaining:
                    walk(e.head, acc + (e.id,), remaining - m)

        walk(spec.source, (), dist[spec.target] - dist[spec.source])
        return tuple(sorted(paths))

    def state_vector(self, profile: Profile, player: PlayerId) -> NfgStateVector:
        """Four local fields (five when weighted); the best-response fields
        use the lexicographically smallest tied path."""
        counts, weights = self._loads_excluding(profile, player)
        br, br_cost = self._br_against(player, counts, weights)
        br_strategy = self.strategy_space(player)[min(br)]
        current = self.strategy_of(profile, player)
        return NfgStateVector(
            current_cost=self._cost_against(player, current, counts, weights),
            current_path_cost=self.path_cost(current),
            br_cost=br_cost,
            br_path_cost=self.path_cost(br_strategy),
            weight=None if self.is_unweighted else self.weight(player),
        )
