"""Best-response dynamics engine.

Runs deviator rules over games, records traces, and checks the locality
condition (independence of irrelevant players) for rules expressed over
state vectors.

A deviator rule maps (game, profile, suboptimal players, their state
vectors) to a non-empty choice set of suboptimal players.  Local rules are
total preorders over state vectors, which makes the locality condition hold
by construction; arbitrary rules can be audited with `check_iip`.

Tie semantics: the engine breaks rule ties by lowest player id, and a chosen
player's tied best responses by the game's canonical pick.  Branching over
best-response ties (the "breaking ties arbitrarily" in the move, not the
rule) is what `reachable_by_rule` explores to compute the full set of
equilibria a rule can reach.
"""

from __future__ import annotations

import hashlib
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Mapping, Sequence

from .core import Cost, Game, GameError, PlayerId, Profile, Strategy
from .networks import NetworkFormationGame, NfgStateVector
from .scheduling import SchedStateVector, SchedulingGame

StateVector = NfgStateVector | SchedStateVector


class EngineError(GameError):
    pass


class StepBudgetExceeded(EngineError):
    pass


class StateBudgetExceeded(EngineError):
    pass


class CycleDetected(EngineError):
    """A best-response cycle outside the potential-guaranteed models."""


class RuleViolation(EngineError):
    """A rule chose a player outside the suboptimal set, or no player."""


class ScriptError(EngineError):
    """A forced move is not a legal strict-improvement best response."""


class RuleTie(Enum):
    LOWEST_ID = "lowest-id"
    BRANCH_ALL = "branch-all"


class BrTie(Enum):
    LEX_SMALLEST = "lex-smallest"
    BRANCH_ALL = "branch-all"


@dataclass(frozen=True)
class TiePolicy:
    rule_tie: RuleTie = RuleTie.LOWEST_ID
    br_tie: BrTie = BrTie.LEX_SMALLEST


DETERMINISTIC = TiePolicy()
NE_SET_POLICY = TiePolicy(rule_tie=RuleTie.LOWEST_ID, br_tie=BrTie.BRANCH_ALL)


def profile_digest(profile: Profile) -> str:
    data = ",".join(str(c) for c in profile.choices).encode()
    return hashlib.sha1(data).hexdigest()[:12]


@dataclass(frozen=True)
class Move:
    step: int
    player: PlayerId
    old_strategy: Strategy
    new_strategy: Strategy
    cost_before: Cost
    cost_after: Cost
    profile_digest: str


@dataclass(frozen=True)
class Trace:
    initial: Profile
    moves: tuple[Move, ...]
    terminal: Profile
    terminal_is_ne: bool

    def deviator_order(self) -> tuple[PlayerId, ...]:
        return tuple(m.player for m in self.moves)


def state_vector(game: Game, profile: Profile, player: PlayerId) -> StateVector:
    if isinstance(game, (NetworkFormationGame, SchedulingGame)):
        return game.state_vector(profile, player)
    raise EngineError(f"no state-vector definition for {type(game).__name__}")


def state_vectors(
    game: Game, profile: Profile, players: Sequence[PlayerId]
) -> dict[PlayerId, StateVector]:
    return {i: state_vector(game, profile, i) for i in players}


# -- rules ---------------------------------------------------------------------


class DeviatorRule(ABC):
    """Selects the next deviating player among the suboptimal ones."""

    name: str = "rule"
    is_local: bool = False

    def reset(self, game: Game) -> None:
        """Called once per run; stateful rules rebuild cursor/seed state."""

    def accepts(self, game: Game) -> bool:
        return True

    @abstractmethod
    def choose(
        self,
        game: Game,
        profile: Profile,
        suboptimal: tuple[PlayerId, ...],
        vectors: Mapping[PlayerId, StateVector],
    ) -> tuple[PlayerId, ...]:
        """Non-empty choice set, a subset of `suboptimal`."""

    @property
    def is_stateless(self) -> bool:
        return True


class LocalRule(DeviatorRule):
    """A total preorder over state vectors; the choice set is the owners of
    the maximal vectors.  `key_builder(game)` returns the scoring function,
    letting rules close over public game parameters (e.g. the activation
    cost); pass `game=None` to score bare vectors in locality audits.
    """

    is_local = True

    def __init__(
        self,
        name: str,
        key_builder: Callable[[Game | None], Callable[[StateVector], object]],
        accepts: Callable[[Game], bool] | None = None,
    ) -> None:
        self.name = name
        self._key_builder = key_builder
        self._accepts = accepts

    def accepts(self, game: Game) -> bool:
        return self._accepts(game) if self._accepts else True

    def choose(self, game, profile, suboptimal, vectors):
        key = self._key_builder(game)
        best = max(key(vectors[i]) for i in suboptimal)
        return tuple(i for i in suboptimal if key(vectors[i]) == best)

    def vector_chooser(
        self, game: Game | None = None
    ) -> Callable[[Sequence[StateVector]], tuple[int, ...]]:
        """Choice-set function over bare vector profiles, for IIP audits."""
        key = self._key_builder(game)

        def choose(vectors: Sequence[StateVector]) -> tuple[int, ...]:
            best = max(key(v) for v in vectors)
            return tuple(i for i, v in enumerate(vectors) if key(v) == best)

        return choose


class LowestIdRule(DeviatorRule):
    """Baseline: the whole suboptimal set, which the engine's tie-break
    collapses to the lowest id.  Useful for cleanup phases and tests."""

    name = "lowest-id"

    def choose(self, game, profile, suboptimal, vectors):
        return suboptimal


def _check_rule_output(
    choice: tuple[PlayerId, ...], suboptimal: tuple[PlayerId, ...], rule: DeviatorRule
) -> None:
    if not choice:
        raise RuleViolation(f"rule {rule.name} returned an empty choice set")
    bad = set(choice) - set(suboptimal)
    if bad:
        raise RuleViolation(
            f"rule {rule.name} chose non-suboptimal players {sorted(bad)}"
        )


# -- running dynamics -----------------------------------------------------------


def _apply_move(
    game: Game, profile: Profile, player: PlayerId, new_index: int, step: int
) -> tuple[Profile, Move]:
    cost_before = game.player_cost(profile, player)
    old_strategy = game.strategy_of(profile, player)
    after = profile.with_choice(game, player, new_index)
    cost_after = game.player_cost(after, player)
    if cost_after >= cost_before:
        raise ScriptError(
            f"move of player {player} does not strictly improve "
            f"({cost_before} -> {cost_after})"
        )
    move = Move(
        step=step,
        player=player,
        old_strategy=old_strategy,
        new_strategy=game.strategy_of(after, player),
        cost_before=cost_before,
        cost_after=cost_after,
        profile_digest=profile_digest(after),
    )
    return after, move


def run_brd(
    game: Game,
    p0: Profile,
    rule: DeviatorRule,
    policy: TiePolicy = DETERMINISTIC,
    max_steps: int = 10_000,
) -> Trace:
    """Run best-response dynamics from `p0` under `rule` until a Nash
    equilibrium; errors on step exhaustion or (for weighted games, which sit
    outside the potential guarantee) on a revisited profile."""
    if policy.rule_tie is not RuleTie.LOWEST_ID or policy.br_tie is not BrTie.LEX_SMALLEST:
        raise EngineError("run_brd needs the deterministic tie policy")
    if not rule.accepts(game):
        raise EngineError(f"rule {rule.name} does not accept this game class")
    game.validate_profile(p0)
    rule.reset(game)
    profile = p0
    moves: list[Move] = []
    seen: set[tuple[int, ...]] = {p0.choices} if not game.is_unweighted else set()
    for step in range(max_steps):
        suboptimal = game.suboptimal_players(profile)
        if not suboptimal:
            return Trace(p0, tuple(moves), profile, True)
        vectors = state_vectors(game, profile, suboptimal)
        choice = tuple(rule.choose(game, profile, suboptimal, vectors))
        _check_rule_output(choice, suboptimal, rule)
        player = min(choice)
        new_index = game.canonical_br_pick(profile, player)
        profile, move = _apply_move(game, profile, player, new_index, step)
        moves.append(move)
        if not game.is_unweighted:
            if profile.choices in seen:
                raise CycleDetected(f"profile revisited after step {step}")
            seen.add(profile.choices)
    raise StepBudgetExceeded(f"no equilibrium within {max_steps} steps")


ScriptMove = tuple[PlayerId, Strategy | None]


def run_scripted(
    game: Game,
    p0: Profile,
    script: Sequence[ScriptMove],
    continue_rule: DeviatorRule | None = None,
    max_steps: int = 10_000,
) -> Trace:
    """Replay a forced deviator order, then optionally run `continue_rule`
    to an equilibrium.

    Each scripted entry names the deviator and optionally a strategy; a
    `None` strategy means her canonical best response.  A forced strategy
    must be a member of the player's best-response set; when the player is
    not suboptimal (her current strategy already ties it) the entry is
    skipped, since an indifferent player cannot legally move.
    """
    game.validate_profile(p0)
    profile = p0
    moves: list[Move] = []
    step = 0
    for player, forced in script:
        if forced is None:
            if not game.is_suboptimal(profile, player):
                raise ScriptError(f"scripted player {player} is not suboptimal")
            idx = game.canonical_br_pick(profile, player)
        else:
            space = game.strategy_space(player)
            try:
                idx = space.index(tuple(forced))
            except ValueError:
                raise ScriptError(
                    f"scripted strategy {forced} outside player {player}'s space"
                ) from None
            if idx not in game.best_response(profile, player):
                raise ScriptError(
                    f"scripted strategy {forced} is not a best response of {player}"
                )
            if not game.is_suboptimal(profile, player):
                continue
        profile, move = _apply_move(game, profile, player, idx, step)
        moves.append(move)
        step += 1
    if continue_rule is not None:
        tail = run_brd(game, profile, continue_rule, max_steps=max_steps)
        shifted = tuple(
            Move(step + m.step, m.player, m.old_strategy, m.new_strategy,
                 m.cost_before, m.cost_after, m.profile_digest)
            for m in tail.moves
        )
        return Trace(p0, tuple(moves) + shifted, tail.terminal, tail.terminal_is_ne)
    return Trace(p0, tuple(moves), profile, game.is_nash(profile))


# -- rule-reachable equilibria ----------------------------------------------------


@dataclass
class RuleReach:
    """All equilibria a rule can reach from one initial profile."""

    terminals: tuple[Profile, ...]
    visited: int
    _parents: dict[tuple[int, ...], tuple[tuple[int, ...], PlayerId, int] | None] = field(
        repr=False, default_factory=dict
    )

    def witness(self, game: Game, terminal: Profile) -> Trace:
        chain: list[tuple[tuple[int, ...], PlayerId, int]] = []
        cursor = terminal.choices
        while True:
            link = self._parents[cursor]
            if link is None:
                break
            parent, player, idx = link
            chain.append((parent, player, idx))
            cursor = parent
        chain.reverse()
        profile = Profile(cursor)
        moves = []
        for step, (parent, player, idx) in enumerate(chain):
            profile, move = _apply_move(game, Profile(parent), player, idx, step)
            moves.append(move)
        return Trace(Profile(cursor), tuple(moves), terminal, True)


def reachable_by_rule(
    game: Game,
    p0: Profile,
    rule: DeviatorRule,
    policy: TiePolicy = NE_SET_POLICY,
    state_limit: int = 200_000,
) -> RuleReach:
    """Exact set of equilibria reachable when `rule` picks deviators and the
    stated tie policy governs branching.  Requires a stateless rule."""
    if not rule.is_stateless:
        raise EngineError(
            f"rule {rule.name} carries run state; enumerate via run_brd instead"
        )
    if not rule.accepts(game):
        raise EngineError(f"rule {rule.name} does not accept this game class")
    game.validate_profile(p0)
    rule.reset(game)
    parents: dict[tuple[int, ...], tuple[tuple[int, ...], PlayerId, int] | None] = {
        p0.choices: None
    }
    terminals: list[Profile] = []
    stack = [p0.choices]
    while stack:
        choices = stack.pop()
        profile = Profile(choices)
        suboptimal = game.suboptimal_players(profile)
        if not suboptimal:
            terminals.append(profile)
            continue
        vectors = state_vectors(game, profile, suboptimal)
        choice = tuple(rule.choose(game, profile, suboptimal, vectors))
        _check_rule_output(choice, suboptimal, rule)
        if policy.rule_tie is RuleTie.LOWEST_ID:
            chosen = (min(choice),)
        else:
            chosen = choice
        for player in chosen:
            if policy.br_tie is BrTie.BRANCH_ALL:
                targets = game.best_response(profile, player)
            else:
                targets = (game.canonical_br_pick(profile, player),)
            for idx in targets:
                child = profile.with_choice(game, player, idx).choices
                if child in parents:
                    continue
                if len(parents) >= state_limit:
                    raise StateBudgetExceeded(
                        f"rule reachability exceeded {state_limit} states"
                    )
                parents[child] = (choices, player, idx)
                stack.append(child)
    uniq = sorted({t.choices for t in terminals})
    return RuleReach(tuple(Profile(c) for c in uniq), len(parents), parents)


# -- independence of irrelevant players --------------------------------------------


@dataclass(frozen=True)
class IipViolation:
    preferred: StateVector
    rejected: StateVector
    profile_a: int
    profile_b: int


def check_iip(
    choose: Callable[[Sequence[StateVector]], Sequence[int]],
    vector_profiles: Sequence[Sequence[StateVector]],
) -> list[IipViolation]:
    """Report every pair of state vectors whose pairwise preference flips
    across the given vector profiles.

    A profile in which vector `a` is chosen while `b` is present and not
    chosen records the preference a > b; a violation is a pair recorded in
    both directions.  Preorder-based rules can never violate.
    """
    first_seen: dict[tuple[StateVector, StateVector], int] = {}
    violations: list[IipViolation] = []
    for pidx, vectors in enumerate(vector_profiles):
        chosen = set(choose(vectors))
        if not chosen:
            continue
        losers = [v for i, v in enumerate(vectors) if i not in chosen]
        for ci in chosen:
            winner = vectors[ci]
            for loser in losers:
                pair = (winner, loser)
                if pair not in first_seen:
                    first_seen[pair] = pidx
                reverse = (loser, winner)
                if reverse in first_seen:
                    violations.append(
                        IipViolation(winner, loser, first_seen[reverse], pidx)
                    )
    return violations
