"""Exhaustive ground truth for best-response reachability.

`reachable_ne` enumerates every Nash equilibrium reachable from an initial
profile by branching over every suboptimal player and every member of her
best-response set.  The traversal is memoized on canonical profile encodings
and quotiented by player equivalence classes (players with identical weight
and strategy space are interchangeable: permuting them maps legal
best-response sequences to legal ones and preserves social cost), which is
what makes instances with many clone players enumerable at desk scale.

Budgets are hard: exceeding the state limit raises; partial searches are
never reported as results.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator

from .core import Cost, Game, Profile
from .engine import (
    DeviatorRule,
    Move,
    StateBudgetExceeded,
    Trace,
    _apply_move,
    reachable_by_rule,
    run_brd,
)

DEFAULT_STATE_LIMIT = 5_000_000

Choices = tuple[int, ...]


class _Quotient:
    """Canonical encodings of profiles modulo interchangeable players."""

    def __init__(self, game: Game) -> None:
        self.game = game
        self.classes = game.player_classes()

    def canonical(self, choices: Choices) -> Choices:
        out = list(choices)
        for cls in self.classes:
            if len(cls.positions) == 1:
                continue
            values = sorted(choices[p] for p in cls.positions)
            for pos, value in zip(cls.positions, values):
                out[pos] = value
        return tuple(out)

    def expand(self, choices: Choices) -> Iterator[tuple[int, tuple[int, ...], Fraction]]:
        """Yield one representative move candidate per (class, strategy):
        (position, best-response indices, best cost) for suboptimal reps."""
        game = self.game
        profile = Profile(choices)
        full = game._full_loads(profile)
        for cls in self.classes:
            seen: set[int] = set()
            for pos in cls.positions:
                idx = choices[pos]
                if idx in seen:
                    continue
                seen.add(idx)
                player = pos + 1
                counts, weights = game._without(full, profile, player)
                br, best = game._br_against(player, counts, weights)
                if idx not in br:
                    yield pos, br, best


@dataclass(frozen=True)
class SearchStats:
    visited: int
    state_limit: int


@dataclass
class ReachableSet:
    """The set NE(p0): every equilibrium reachable from p0, canonically
    encoded, together with traversal parent links for witness extraction."""

    game: Game
    initial: Profile
    ne_profiles: tuple[Profile, ...]
    stats: SearchStats
    _quotient: _Quotient
    _parents: dict[Choices, tuple[Choices, int, int] | None]

    @property
    def social_costs(self) -> tuple[Cost, ...]:
        return tuple(sorted(self.game.social_cost(p) for p in self.ne_profiles))

    def best(self) -> tuple[Profile, Cost]:
        """Minimum-social-cost equilibrium, ties broken by encoding."""
        ranked = sorted(
            (self.game.social_cost(p), p.choices) for p in self.ne_profiles
        )
        cost, choices = ranked[0]
        return Profile(choices), cost

    def worst_cost(self) -> Cost:
        return max(self.game.social_cost(p) for p in self.ne_profiles)

    def contains(self, profile: Profile) -> bool:
        return self._quotient.canonical(profile.choices) in {
            p.choices for p in self.ne_profiles
        }

    def witness(self, target: Profile) -> Trace:
        """A best-response sequence from the initial profile to `target`,
        materialized from the traversal parent links."""
        game = self.game
        key = self._quotient.canonical(target.choices)
        if key not in self._parents and key != self._quotient.canonical(
            self.initial.choices
        ):
            raise KeyError("target was not visited")
        chain: list[tuple[Choices, int, int]] = []
        cursor = key
        while True:
            link = self._parents[cursor]
            if link is None:
                break
            parent, pos, idx = link
            chain.append((parent, pos, idx))
            cursor = parent
        chain.reverse()
        # replay in real player space: the canonical move (class member at
        # `pos` leaving strategy `from_idx`) is performed by the lowest-id
        # player of that class currently on `from_idx`
        pos_class = {}
        for cls in self._quotient.classes:
            for p in cls.positions:
                pos_class[p] = cls.positions
        profile = self.initial
        moves: list[Move] = []
        for step, (parent, pos, idx) in enumerate(chain):
            from_idx = parent[pos]
            candidates = [
                p for p in pos_class[pos] if profile.choices[p] == from_idx
            ]
            player = min(candidates) + 1
            profile, move = _apply_move(game, profile, player, idx, step)
            moves.append(move)
        assert self._quotient.canonical(profile.choices) == key
        return Trace(self.initial, tuple(moves), profile, game.is_nash(profile))


def reachable_ne(
    game: Game, p0: Profile, state_limit: int = DEFAULT_STATE_LIMIT
) -> ReachableSet:
    """Exact NE(p0) by memoized depth-first traversal over the quotient of
    the reachable profile space."""
    game.validate_profile(p0)
    quotient = _Quotient(game)
    root = quotient.canonical(p0.choices)
    parents: dict[Choices, tuple[Choices, int, int] | None] = {root: None}
    ne_keys: list[Choices] = []
    stack = [root]
    while stack:
        choices = stack.pop()
        is_ne = True
        for pos, br, _ in quotient.expand(choices):
            is_ne = False
            for idx in br:
                child = list(choices)
                child[pos] = idx
                ckey = quotient.canonical(tuple(child))
                if ckey in parents:
                    continue
                if len(parents) >= state_limit:
                    raise StateBudgetExceeded(
                        f"oracle exceeded the {state_limit}-state budget"
                    )
                parents[ckey] = (choices, pos, idx)
                stack.append(ckey)
        if is_ne:
            ne_keys.append(choices)
    ne_profiles = tuple(Profile(c) for c in sorted(set(ne_keys)))
    return ReachableSet(
        game=game,
        initial=p0,
        ne_profiles=ne_profiles,
        stats=SearchStats(visited=len(parents), state_limit=state_limit),
        _quotient=quotient,
        _parents=parents,
    )


def best_reachable(
    game: Game, p0: Profile, state_limit: int = DEFAULT_STATE_LIMIT
) -> tuple[Profile, Cost]:
    return reachable_ne(game, p0, state_limit).best()


def optimal_sequence(
    game: Game, p0: Profile, state_limit: int = DEFAULT_STATE_LIMIT
) -> Trace:
    """A best-response sequence ending in the best reachable equilibrium."""
    reach = reachable_ne(game, p0, state_limit)
    target, _ = reach.best()
    return reach.witness(target)


@dataclass(frozen=True)
class InefficiencyReport:
    """How badly a rule's worst reachable equilibrium compares with the best
    equilibrium reachable at all from the same initial profile."""

    game_id: str
    rule_id: str
    initial: Profile
    worst_rule_cost: Cost
    best_cost: Cost
    alpha: Fraction
    ne_costs: tuple[Cost, ...]
    rule_ne_costs: tuple[Cost, ...]
    rule_witness: Trace
    optimal_witness: Trace
    oracle_visited: int
    rule_visited: int


def rule_inefficiency(
    game: Game,
    p0: Profile,
    rule: DeviatorRule,
    game_id: str = "",
    state_limit: int = DEFAULT_STATE_LIMIT,
) -> InefficiencyReport:
    """alpha = worst SC over NE_S(p0) divided by SC of the best equilibrium
    in NE(p0); asserts the containment NE_S(p0) within NE(p0) and the
    1 <= alpha <= (worst/best over NE(p0)) envelope on every report."""
    reach = reachable_ne(game, p0, state_limit)
    best_profile, best_cost = reach.best()
    if rule.is_stateless:
        rr = reachable_by_rule(game, p0, rule, state_limit=state_limit)
        rule_terminals = rr.terminals
        rule_visited = rr.visited
        witness_of = rr.witness
    else:
        trace = run_brd(game, p0, rule)
        rule_terminals = (trace.terminal,)
        rule_visited = len(trace.moves) + 1

        def witness_of(g: Game, terminal: Profile) -> Trace:
            return trace

    for terminal in rule_terminals:
        if not reach.contains(terminal):
            raise AssertionError("rule reached an equilibrium outside NE(p0)")
    ranked = sorted(
        ((game.social_cost(t), t) for t in rule_terminals), key=lambda x: (x[0], x[1].choices)
    )
    worst_cost, worst_terminal = ranked[-1]
    alpha = worst_cost / best_cost
    envelope = reach.worst_cost() / best_cost
    if not 1 <= alpha <= envelope:
        raise AssertionError(f"inefficiency {alpha} outside [1, {envelope}]")
    return InefficiencyReport(
        game_id=game_id,
        rule_id=rule.name,
        initial=p0,
        worst_rule_cost=worst_cost,
        best_cost=best_cost,
        alpha=alpha,
        ne_costs=reach.social_costs,
        rule_ne_costs=tuple(sorted(game.social_cost(t) for t in rule_terminals)),
        rule_witness=witness_of(game, worst_terminal),
        optimal_witness=reach.witness(best_profile),
        oracle_visited=reach.stats.visited,
        rule_visited=rule_visited,
    )


def all_profiles(game: Game, cap: int = 100_000) -> Iterator[Profile]:
    """Every profile of a tiny game, guarded by a count cap."""
    total = 1
    for i in game.players:
        total *= len(game.strategy_space(i))
        if total > cap:
            raise StateBudgetExceeded(
                f"profile enumeration exceeds the {cap}-profile guard"
            )
    sizes = [len(game.strategy_space(i)) for i in game.players]
    indices = [0] * len(sizes)
    while True:
        yield Profile(tuple(indices))
        for k in range(len(sizes) - 1, -1, -1):
            indices[k] += 1
            if indices[k] < sizes[k]:
                break
            indices[k] = 0
        else:
            return


def game_inefficiency(
    game: Game,
    rule: DeviatorRule,
    profile_source: Iterable[Profile] | None = None,
    state_limit: int = DEFAULT_STATE_LIMIT,
    profile_cap: int = 100_000,
) -> Fraction:
    """Worst-case rule inefficiency over the supplied initial profiles, or
    over every profile of a tiny game when no source is given."""
    profiles = profile_source if profile_source is not None else all_profiles(game, profile_cap)
    # vector-based rules are equivariant under interchangeable-player
    # relabelings, so equivalent initial profiles yield the same alpha
    dedupe = rule.is_local
    quotient = _Quotient(game)
    seen_keys: set[Choices] = set()
    worst = Fraction(0)
    handled = False
    for p0 in profiles:
        if dedupe:
            key = quotient.canonical(p0.choices)
            if key in seen_keys:
                continue
            seen_keys.add(key)
        handled = True
        report = rule_inefficiency(game, p0, rule, state_limit=state_limit)
        worst = max(worst, report.alpha)
    if not handled:
        raise ValueError("profile source was empty")
    return worst
