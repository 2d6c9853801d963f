"""JSON formats for instances, traces, and inefficiency reports.

Rationals are encoded as "p/q" strings so no precision is lost in JSON
numbers; documents reject unknown fields and parse-serialize-parse is the
identity on values.  Strategies serialize as edge-id lists for network
games and machine indices for scheduling games.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any, Mapping

from .core import Game, InvalidProfileError, Profile, Strategy
from .engine import Move, Trace, profile_digest
from .networks import Edge, Network, NetworkFormationGame, PlayerSpec
from .oracle import InefficiencyReport
from .scheduling import SchedulingGame


class FormatError(ValueError):
    pass


def parse_rational(value: Any) -> Fraction:
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise FormatError(f"bad rational {value!r}") from exc
    raise FormatError(f"rationals must be 'p/q' strings, got {value!r}")


def fmt_rational(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def _check_fields(doc: Mapping[str, Any], allowed: set[str], where: str) -> None:
    unknown = set(doc) - allowed
    if unknown:
        raise FormatError(f"unknown fields in {where}: {sorted(unknown)}")


# -- instances --------------------------------------------------------------------


def instance_to_doc(game: Game, initial: Profile) -> dict[str, Any]:
    doc: dict[str, Any]
    if isinstance(game, NetworkFormationGame):
        model = "nfg" if game.is_unweighted else "weighted-nfg"
        doc = {
            "model": model,
            "graph": {
                "nodes": list(game.network.nodes),
                "source": game.network.source,
                "sink": game.network.sink,
                "edges": [
                    {
                        "id": e.id,
                        "tail": e.tail,
                        "head": e.head,
                        "cost": fmt_rational(e.cost),
                    }
                    for e in game.network.edges
                ],
            },
            "players": [
                {
                    "source": spec.source,
                    "target": spec.target,
                    "weight": fmt_rational(spec.weight),
                }
                for spec in game.specs
            ],
        }
    elif isinstance(game, SchedulingGame):
        doc = {
            "model": "coco" if game.is_conflicting else "sched",
            "machines": game.machine_count,
            "players": [
                {"length": fmt_rational(game.weight(i))} for i in game.players
            ],
        }
        if game.activation_cost is not None:
            doc["B"] = fmt_rational(game.activation_cost)
    else:
        raise FormatError(f"cannot serialize {type(game).__name__}")
    doc["initial"] = {
        str(i): encode_strategy(game, game.strategy_of(initial, i))
        for i in game.players
    }
    return doc


def encode_strategy(game: Game, strategy: Strategy) -> Any:
    if isinstance(game, SchedulingGame):
        return strategy[0]
    return list(strategy)


def decode_strategy(game: Game, raw: Any) -> Strategy:
    if isinstance(game, SchedulingGame):
        if not isinstance(raw, int):
            raise FormatError("scheduling strategies are machine indices")
        return (raw,)
    if not isinstance(raw, list) or not all(isinstance(x, int) for x in raw):
        raise FormatError("network strategies are edge-id lists")
    return tuple(raw)


def instance_from_doc(doc: Mapping[str, Any]) -> tuple[Game, Profile]:
    _check_fields(dict(doc), {"model", "graph", "machines", "B", "players", "initial"},
                  "instance")
    model = doc.get("model")
    if model in ("nfg", "weighted-nfg"):
        graph = doc.get("graph")
        if not isinstance(graph, Mapping):
            raise FormatError("network models need a graph")
        _check_fields(dict(graph), {"nodes", "source", "sink", "edges"}, "graph")
        edges = []
        for e in graph.get("edges", ()):
            _check_fields(dict(e), {"id", "tail", "head", "cost"}, "edge")
            edges.append(Edge(e["id"], e["tail"], e["head"], parse_rational(e["cost"])))
        net = Network(tuple(edges), source=graph.get("source"), sink=graph.get("sink"))
        specs = []
        for p in doc.get("players", ()):
            _check_fields(dict(p), {"source", "target", "weight"}, "player")
            specs.append(
                PlayerSpec(p["source"], p["target"], parse_rational(p.get("weight", 1)))
            )
        game: Game = NetworkFormationGame(net, specs)
        if model == "nfg" and not game.is_unweighted:
            raise FormatError("model 'nfg' requires unit weights")
    elif model in ("sched", "coco"):
        machines = doc.get("machines")
        if not isinstance(machines, int):
            raise FormatError("scheduling models need a machine count")
        lengths = []
        for p in doc.get("players", ()):
            _check_fields(dict(p), {"length"}, "player")
            lengths.append(parse_rational(p.get("length", 1)))
        activation = parse_rational(doc["B"]) if model == "coco" else None
        if model == "coco" and "B" not in doc:
            raise FormatError("conflicting model needs B")
        game = SchedulingGame(machines, lengths, activation_cost=activation)
    else:
        raise FormatError(f"unknown model {model!r}")
    raw_initial = doc.get("initial")
    if not isinstance(raw_initial, Mapping):
        raise FormatError("instance needs an initial profile")
    assignment = {}
    for key, raw in raw_initial.items():
        try:
            player = int(key)
        except ValueError:
            raise FormatError(f"bad player id {key!r}") from None
        assignment[player] = decode_strategy(game, raw)
    if set(assignment) != set(game.players):
        raise FormatError("initial profile must assign exactly the players 1..n")
    try:
        profile = game.profile_from_strategies(assignment)
    except InvalidProfileError as exc:
        raise FormatError(str(exc)) from exc
    return game, profile


# -- traces ------------------------------------------------------------------------


def trace_to_doc(game: Game, trace: Trace) -> dict[str, Any]:
    return {
        "initial": {
            str(i): encode_strategy(game, game.strategy_of(trace.initial, i))
            for i in game.players
        },
        "moves": [
            {
                "step": m.step,
                "player": m.player,
                "old": encode_strategy(game, m.old_strategy),
                "new": encode_strategy(game, m.new_strategy),
                "cost_before": fmt_rational(m.cost_before),
                "cost_after": fmt_rational(m.cost_after),
                "profile": m.profile_digest,
            }
            for m in trace.moves
        ],
        "terminal": {
            str(i): encode_strategy(game, game.strategy_of(trace.terminal, i))
            for i in game.players
        },
        "terminal_is_ne": trace.terminal_is_ne,
    }


def trace_from_doc(game: Game, doc: Mapping[str, Any]) -> Trace:
    _check_fields(dict(doc), {"initial", "moves", "terminal", "terminal_is_ne"}, "trace")

    def profile_of(raw: Mapping[str, Any]) -> Profile:
        assignment = {int(k): decode_strategy(game, v) for k, v in raw.items()}
        return game.profile_from_strategies(assignment)

    initial = profile_of(doc["initial"])
    moves = []
    for m in doc.get("moves", ()):
        _check_fields(
            dict(m),
            {"step", "player", "old", "new", "cost_before", "cost_after", "profile"},
            "move",
        )
        moves.append(
            Move(
                step=m["step"],
                player=m["player"],
                old_strategy=decode_strategy(game, m["old"]),
                new_strategy=decode_strategy(game, m["new"]),
                cost_before=parse_rational(m["cost_before"]),
                cost_after=parse_rational(m["cost_after"]),
                profile_digest=m["profile"],
            )
        )
    terminal = profile_of(doc["terminal"])
    return Trace(initial, tuple(moves), terminal, bool(doc.get("terminal_is_ne")))


class ReplayError(ValueError):
    pass


def verify_trace(game: Game, trace: Trace) -> None:
    """Re-verify every move: the deviator was suboptimal, moved to a member
    of her best-response set with the recorded strict cost drop, and the
    terminal matches (including its equilibrium flag)."""
    profile = trace.initial
    game.validate_profile(profile)
    for m in trace.moves:
        if not game.is_suboptimal(profile, m.player):
            raise ReplayError(f"step {m.step}: player {m.player} was not suboptimal")
        if game.strategy_of(profile, m.player) != m.old_strategy:
            raise ReplayError(f"step {m.step}: recorded old strategy mismatch")
        if game.player_cost(profile, m.player) != m.cost_before:
            raise ReplayError(f"step {m.step}: recorded pre-move cost mismatch")
        space = game.strategy_space(m.player)
        try:
            idx = space.index(m.new_strategy)
        except ValueError:
            raise ReplayError(f"step {m.step}: strategy outside the space") from None
        if idx not in game.best_response(profile, m.player):
            raise ReplayError(f"step {m.step}: move is not a best response")
        profile = profile.with_choice(game, m.player, idx)
        if game.player_cost(profile, m.player) != m.cost_after:
            raise ReplayError(f"step {m.step}: recorded post-move cost mismatch")
        if m.cost_after >= m.cost_before:
            raise ReplayError(f"step {m.step}: move does not strictly improve")
        if profile_digest(profile) != m.profile_digest:
            raise ReplayError(f"step {m.step}: profile digest mismatch")
    if profile != trace.terminal:
        raise ReplayError("terminal profile mismatch")
    if trace.terminal_is_ne != game.is_nash(profile):
        raise ReplayError("terminal equilibrium flag mismatch")


# -- reports -----------------------------------------------------------------------


def report_to_doc(game: Game, report: InefficiencyReport) -> dict[str, Any]:
    return {
        "game": report.game_id,
        "rule": report.rule_id,
        "worst_rule_cost": fmt_rational(report.worst_rule_cost),
        "best_cost": fmt_rational(report.best_cost),
        "alpha": fmt_rational(report.alpha),
        "ne_costs": [fmt_rational(c) for c in report.ne_costs],
        "rule_ne_costs": [fmt_rational(c) for c in report.rule_ne_costs],
        "oracle_visited": report.oracle_visited,
        "rule_visited": report.rule_visited,
        "rule_witness": trace_to_doc(game, report.rule_witness),
        "optimal_witness": trace_to_doc(game, report.optimal_witness),
    }


def dumps(doc: Mapping[str, Any]) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
