"""Optimal-sequence dynamic programs for series-of-parallel-paths networks.

An SPP instance is a chain of parallel-edge segments with interval players:
player i walks segments s_i+1 .. t_i and her strategy picks one edge per
segment.  Because a deviation fixes the edge every later mover uses in each
segment it touches, the first few migrations determine the equilibrium, and
the best reachable equilibrium decomposes over sub-chains:

* single source: one pass over network suffixes, O(n*m) values;
* proper intervals (sources and targets sorted consistently): one pass over
  sub-chains by increasing length with a four-way case split on how the
  first mover's interval meets the sub-chain.

Each DP returns its value table together with a forced deviator skeleton;
`replay` executes the skeleton through the engine (validating that every
forced move is a legal strict-improvement best response) and finishes with
cleanup moves, so the claimed optimum can be checked against the realized
equilibrium exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .core import GameError, PlayerId, Profile, ResourceId, Strategy
from .engine import ScriptMove, Trace, _apply_move, run_scripted
from .networks import Edge, Network, NetworkFormationGame, PlayerSpec


class SppError(GameError):
    pass


@dataclass(frozen=True)
class SppEdge:
    id: ResourceId
    cost: Fraction


@dataclass(frozen=True)
class SppPlayer:
    source: int
    target: int
    initial: tuple[ResourceId, ...]  # one edge per segment source+1 .. target


@dataclass(frozen=True)
class SppInstance:
    segments: tuple[tuple[SppEdge, ...], ...]
    players: tuple[SppPlayer, ...]

    def __post_init__(self) -> None:
        ids = [e.id for seg in self.segments for e in seg]
        if len(ids) != len(set(ids)):
            raise SppError("edge ids must be unique across segments")
        for p in self.players:
            if not 0 <= p.source < p.target <= self.m:
                raise SppError(f"interval ({p.source}, {p.target}] out of range")
            if len(p.initial) != p.target - p.source:
                raise SppError("initial strategy must pick one edge per segment")
            for seg, e in zip(range(p.source + 1, p.target + 1), p.initial):
                if e not in {edge.id for edge in self.segments[seg - 1]}:
                    raise SppError(f"edge {e} is not in segment {seg}")
        for seg in range(1, self.m + 1):
            if not any(p.source < seg <= p.target for p in self.players):
                raise SppError(f"segment {seg} has no potential user")

    @property
    def m(self) -> int:
        return len(self.segments)

    @property
    def n(self) -> int:
        return len(self.players)

    def covers(self, player_pos: int, segment: int) -> bool:
        p = self.players[player_pos]
        return p.source < segment <= p.target

    def segment_of(self, edge_id: ResourceId) -> int:
        for seg, edges in enumerate(self.segments, start=1):
            if any(e.id == edge_id for e in edges):
                return seg
        raise SppError(f"unknown edge {edge_id}")

    def to_game(self) -> tuple[NetworkFormationGame, Profile]:
        edges = tuple(
            Edge(e.id, seg - 1, seg, e.cost)
            for seg, block in enumerate(self.segments, start=1)
            for e in block
        )
        net = Network(edges, source=0, sink=self.m)
        game = NetworkFormationGame(
            net, [PlayerSpec(p.source, p.target) for p in self.players]
        )
        p0 = game.profile_from_strategies([p.initial for p in self.players])
        return game, p0


def from_network_game(game: NetworkFormationGame, p0: Profile) -> SppInstance:
    """Reinterpret an unweighted network formation game on an SPP network,
    with its initial profile, as an SPP instance."""
    from .networks import spp_decomposition

    if not game.is_unweighted:
        raise SppError("the optimal-sequence programs assume unit weights")
    decomposition = spp_decomposition(game.network)
    if decomposition is None:
        raise SppError("network is not a series of parallel-edge segments")
    vertices, blocks = decomposition
    position = {v: i for i, v in enumerate(vertices)}
    segments = tuple(
        tuple(SppEdge(e.id, e.cost) for e in block) for block in blocks
    )
    players = []
    for player, spec in zip(game.players, game.specs):
        if spec.source not in position or spec.target not in position:
            raise SppError(f"player {player} terminals are off the chain")
        players.append(
            SppPlayer(
                position[spec.source],
                position[spec.target],
                game.strategy_of(p0, player),
            )
        )
    return SppInstance(segments, tuple(players))


def is_proper_intervals(instance: SppInstance) -> bool:
    """Sources and targets sorted consistently: an earlier source never pairs
    with a strictly later target."""
    ps = instance.players
    return all(
        p1.target <= p2.target
        for p1 in ps
        for p2 in ps
        if p1.source < p2.source
    )


# -- per-segment best-response picks against initial loads -----------------------


def _initial_counts(instance: SppInstance) -> dict[ResourceId, int]:
    counts: dict[ResourceId, int] = {}
    for p in instance.players:
        for e in p.initial:
            counts[e] = counts.get(e, 0) + 1
    return counts


def _segment_picks(
    instance: SppInstance,
) -> tuple[
    dict[tuple[int, int], ResourceId],
    dict[tuple[int, int], Fraction],
    tuple[bool, ...],
]:
    """For every (player position, covered segment): the edge the player
    would set there, judged by marginal share against the initial loads with
    herself removed; marginal ties resolve to the cheaper edge, then the
    lower id (a mover may take any tied member, and cheaper is never worse
    for the resolved total).

    Also returns which players are movable at all: only a player with a
    strict per-segment improvement somewhere is suboptimal initially, and
    only such players can open a best-response sequence."""
    counts = _initial_counts(instance)
    pick: dict[tuple[int, int], ResourceId] = {}
    pick_cost: dict[tuple[int, int], Fraction] = {}
    movable = []
    for pos, p in enumerate(instance.players):
        mine = set(p.initial)
        strict = False
        for seg_offset, seg in enumerate(range(p.source + 1, p.target + 1)):
            best_key = None
            best_edge = None
            current_marginal = None
            for e in instance.segments[seg - 1]:
                others = counts.get(e.id, 0) - (1 if e.id in mine else 0)
                marginal = e.cost / (others + 1)
                if e.id == p.initial[seg_offset]:
                    current_marginal = marginal
                key = (marginal, e.cost, e.id)
                if best_key is None or key < best_key:
                    best_key = key
                    best_edge = e
            assert best_edge is not None and best_key is not None
            assert current_marginal is not None
            if best_key[0] < current_marginal:
                strict = True
            pick[(pos, seg)] = best_edge.id
            pick_cost[(pos, seg)] = best_edge.cost
        movable.append(strict)
    return pick, pick_cost, tuple(movable)


def _frozen_cost(instance: SppInstance, first_seg: int, last_seg: int) -> Fraction:
    """Total cost of the initially utilized edges in segments
    first_seg..last_seg: what the sub-chain costs if nobody covering it ever
    migrates."""
    counts = _initial_counts(instance)
    total = Fraction(0)
    for seg in range(first_seg, last_seg + 1):
        for e in instance.segments[seg - 1]:
            if counts.get(e.id, 0) > 0:
                total += e.cost
    return total


@dataclass
class DpTable:
    """Computed optimum values, first movers, and the deviator skeleton.

    `opt` is keyed by suffix length for the single-source program and by
    (s, t) sub-chain for the proper-interval program; `skeleton` lists the
    forced (player id, full strategy) moves realizing `optimum`.
    """

    mode: str
    optimum: Fraction
    opt: dict
    first_mover: dict
    skeleton: tuple[ScriptMove, ...]


def _strategy_for(
    instance: SppInstance,
    pos: int,
    resolved: dict[int, ResourceId],
    pick: Mapping[tuple[int, int], ResourceId],
) -> Strategy:
    p = instance.players[pos]
    return tuple(
        resolved.get(seg, pick[(pos, seg)]) for seg in range(p.source + 1, p.target + 1)
    )


def dp_single_source(instance: SppInstance) -> DpTable:
    """Best reachable equilibrium cost when all players share the source.

    opt[j] solves the game induced by the last j segments: the first mover
    there must have her target inside that suffix; her deviation sets her
    best-response edges through her target and leaves a shorter suffix.
    """
    if any(p.source != 0 for p in instance.players):
        raise SppError("single-source program needs every source at vertex 0")
    m = instance.m
    pick, pick_cost, movable = _segment_picks(instance)
    opt: dict[int, Fraction] = {0: Fraction(0)}
    first: dict[int, int | None] = {}
    for j in range(1, m + 1):
        start = m - j + 1  # first segment of the suffix
        best: tuple[Fraction, int] | None = None
        for pos, p in enumerate(instance.players):
            if p.target < start or not movable[pos]:
                continue
            prefix = sum(
                (pick_cost[(pos, seg)] for seg in range(start, p.target + 1)),
                Fraction(0),
            )
            value = prefix + opt[m - p.target]
            if best is None or (value, pos) < best:
                best = (value, pos)
        if best is None:
            # nobody covering the suffix can migrate: it keeps its initial edges
            opt[j] = _frozen_cost(instance, start, m)
            first[j] = None
        else:
            opt[j] = best[0]
            first[j] = best[1]
    resolved: dict[int, ResourceId] = {}
    skeleton: list[ScriptMove] = []
    j = m
    while j > 0:
        pos = first[j]
        if pos is None:
            break
        strategy = _strategy_for(instance, pos, resolved, pick)
        p = instance.players[pos]
        for seg in range(p.source + 1, p.target + 1):
            resolved.setdefault(seg, pick[(pos, seg)])
        skeleton.append((pos + 1, strategy))
        j = m - p.target
    return DpTable("single-source", opt[m], opt, first, tuple(skeleton))


def dp_proper_intervals(instance: SppInstance) -> DpTable:
    """Best reachable equilibrium cost for proper-interval players.

    opt[(s, t)] solves the sub-chain of segments s+1 .. t.  The first mover
    i there either covers the whole sub-chain, hangs off one end, or sits
    strictly inside; in each case her pick costs combine with optima of
    strictly shorter sub-chains, which proper intervals make independent.
    """
    if not is_proper_intervals(instance):
        raise SppError("instance does not have proper intervals")
    m = instance.m
    pick, pick_cost, movable = _segment_picks(instance)
    opt: dict[tuple[int, int], Fraction] = {(j, j): Fraction(0) for j in range(m + 1)}
    first: dict[tuple[int, int], int | None] = {}

    def c_range(pos: int, a: int, b: int) -> Fraction:
        p = instance.players[pos]
        lo = max(a, p.source) + 1
        hi = min(b, p.target)
        return sum((pick_cost[(pos, seg)] for seg in range(lo, hi + 1)), Fraction(0))

    for length in range(1, m + 1):
        for s in range(0, m - length + 1):
            t = s + length
            best: tuple[Fraction, int] | None = None
            for pos, p in enumerate(instance.players):
                if p.source >= t or p.target <= s or not movable[pos]:
                    continue
                if p.source <= s and p.target >= t:
                    value = c_range(pos, s, t)
                elif p.source <= s:
                    value = c_range(pos, s, p.target) + opt[(p.target, t)]
                elif p.target >= t:
                    value = opt[(s, p.source)] + c_range(pos, p.source, t)
                else:
                    value = (
                        opt[(s, p.source)]
                        + c_range(pos, p.source, p.target)
                        + opt[(p.target, t)]
                    )
                if best is None or (value, pos) < best:
                    best = (value, pos)
            if best is None:
                opt[(s, t)] = _frozen_cost(instance, s + 1, t)
                first[(s, t)] = None
            else:
                opt[(s, t)] = best[0]
                first[(s, t)] = best[1]

    resolved: dict[int, ResourceId] = {}
    skeleton: list[ScriptMove] = []

    def emit(s: int, t: int) -> None:
        if t <= s:
            return
        pos = first[(s, t)]
        if pos is None:
            return
        p = instance.players[pos]
        strategy = _strategy_for(instance, pos, resolved, pick)
        for seg in range(p.source + 1, p.target + 1):
            resolved.setdefault(seg, pick[(pos, seg)])
        skeleton.append((pos + 1, strategy))
        if p.source <= s and p.target >= t:
            return
        if p.source <= s:
            emit(p.target, t)
        elif p.target >= t:
            emit(s, p.source)
        else:
            emit(s, p.source)
            emit(p.target, t)

    emit(0, m)
    return DpTable("proper-intervals", opt[(0, m)], opt, first, tuple(skeleton))


def replay(instance: SppInstance, table: DpTable, max_steps: int = 10_000) -> Trace:
    """Execute the skeleton through the engine, then let every remaining
    suboptimal player flock, breaking best-response ties toward the
    resolved edge of each segment (and toward her current edge elsewhere,
    so untouched sub-chains stay put).  Callers assert the terminal's
    social cost against `table.optimum`."""
    game, p0 = instance.to_game()
    head = run_scripted(game, p0, table.skeleton, max_steps=max_steps)
    resolved: dict[int, ResourceId] = {}
    for player, strategy in table.skeleton:
        p = instance.players[player - 1]
        for seg, edge in zip(range(p.source + 1, p.target + 1), strategy):
            resolved.setdefault(seg, edge)
    profile = head.terminal
    moves = list(head.moves)
    step = len(moves)
    while step < max_steps:
        suboptimal = game.suboptimal_players(profile)
        if not suboptimal:
            break
        player = suboptimal[0]
        strategy = _flock_strategy(instance, game, profile, player, resolved)
        idx = game.strategy_space(player).index(strategy)
        profile, move = _apply_move(game, profile, player, idx, step)
        moves.append(move)
        step += 1
    else:
        raise SppError(f"cleanup did not settle within {max_steps} steps")
    return Trace(p0, tuple(moves), profile, game.is_nash(profile))


def _flock_strategy(
    instance: SppInstance,
    game,
    profile: Profile,
    player: PlayerId,
    resolved: Mapping[int, ResourceId],
) -> Strategy:
    """The player's best response at the live profile, one segment at a
    time, preferring the resolved edge among marginal ties, then her
    current edge, then the cheapest."""
    counts, weights = game._loads_excluding(profile, player)
    p = instance.players[player - 1]
    current = dict(
        zip(range(p.source + 1, p.target + 1), game.strategy_of(profile, player))
    )
    out = []
    for seg in range(p.source + 1, p.target + 1):
        best_marginal = None
        for e in instance.segments[seg - 1]:
            marginal = e.cost / (counts.get(e.id, 0) + 1)
            if best_marginal is None or marginal < best_marginal:
                best_marginal = marginal
        argmin = [
            e
            for e in instance.segments[seg - 1]
            if e.cost / (counts.get(e.id, 0) + 1) == best_marginal
        ]
        ids = {e.id for e in argmin}
        if resolved.get(seg) in ids:
            out.append(resolved[seg])
        elif current[seg] in ids:
            out.append(current[seg])
        else:
            out.append(min(argmin, key=lambda e: (e.cost, e.id)).id)
    return tuple(out)


# -- resolution bookkeeping -------------------------------------------------------


@dataclass(frozen=True)
class ResolvedSet:
    """Segments whose equilibrium edge is already determined, with the edge."""

    edges: Mapping[int, ResourceId]

    @property
    def segments(self) -> tuple[int, ...]:
        return tuple(sorted(self.edges))


def resolved_segments(
    instance: SppInstance,
    prefix: Iterable[tuple[PlayerId, Strategy]] = (),
) -> ResolvedSet:
    """Resolution state after a trace prefix of (deviator, new strategy)
    moves: segments where every potential user already agrees on the edge
    she would set, plus every segment in a deviator's interval, pinned to
    the edge she chose.

    Agreement uses the engine's deterministic selection (marginal share,
    then lowest edge id), so the initially agreed edge is exactly what the
    first mover through the segment would take."""
    counts = _initial_counts(instance)
    resolved: dict[int, ResourceId] = {}
    for seg in range(1, instance.m + 1):
        choices = set()
        for pos in range(instance.n):
            if not instance.covers(pos, seg):
                continue
            mine = set(instance.players[pos].initial)
            choices.add(
                min(
                    instance.segments[seg - 1],
                    key=lambda e: (
                        e.cost / (counts.get(e.id, 0) - (e.id in mine) + 1),
                        e.id,
                    ),
                ).id
            )
        if len(choices) == 1:
            resolved[seg] = choices.pop()
    for player, strategy in prefix:
        p = instance.players[player - 1]
        for seg, edge in zip(range(p.source + 1, p.target + 1), strategy):
            resolved[seg] = edge
    return ResolvedSet(dict(sorted(resolved.items())))
