"""Hill-climbing structure search maximizing the BIC score.

Steepest ascent over single-edge additions, deletions, and reversals:
every sweep evaluates all legal neighbors and applies the one best
strictly-improving move, so the score increases strictly along the trace
and the search terminates. Optional seeded random restarts guard against
order-dependent local optima.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .datasets import MasteryDataset, Variable
from .errors import SchemaError
from .network import BicScorer, Dag, ScoredNetwork
from .seeds import derive_seed


class MoveKind(str, Enum):
    ADD = "add"
    DELETE = "delete"
    REVERSE = "reverse"


@dataclass(frozen=True)
class Move:
    kind: MoveKind
    parent: str
    child: str

    def sort_key(self) -> tuple[str, str, str]:
        # lexicographic: kind, then parent, then child
        return (self.kind.value, self.parent, self.child)


@dataclass(frozen=True)
class SearchConfig:
    max_in_degree: int = 4
    max_iterations: int = 1000
    seed: int = 0
    restarts: int = 1

    def __post_init__(self) -> None:
        if self.max_in_degree < 1:
            raise SchemaError(f"max_in_degree must be >= 1, got {self.max_in_degree}")
        if self.max_iterations < 1:
            raise SchemaError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if self.restarts < 1:
            raise SchemaError(f"restarts must be >= 1, got {self.restarts}")


@dataclass
class SearchTrace:
    """Accepted moves with the BIC after each, plus the final scored network."""

    iterations: list[tuple[Move, float]] = field(default_factory=list)
    final: ScoredNetwork | None = None
    truncated: bool = False
    restart_index: int = 0


def is_acyclic(dag: Dag) -> bool:
    """True iff a topological order exists."""
    return dag.is_acyclic()


def neighbors(dag: Dag, config: SearchConfig = SearchConfig()) -> list[Move]:
    """All legal single-edge moves, in deterministic lexicographic order.

    A move is legal when the resulting graph stays acyclic and no node's
    in-degree exceeds config.max_in_degree.
    """
    names = dag.names
    moves: list[Move] = []
    for parent in names:
        for child in names:
            if parent == child or dag.has_edge(parent, child):
                continue
            # adding parent->child cycles iff child already reaches parent
            if dag.has_path(child, parent):
                continue
            if dag.in_degree(child) + 1 > config.max_in_degree:
                continue
            moves.append(Move(MoveKind.ADD, parent, child))
    for parent, child in dag.edges:
        moves.append(Move(MoveKind.DELETE, parent, child))
    for parent, child in dag.edges:
        if dag.in_degree(parent) + 1 > config.max_in_degree:
            continue
        trimmed = dag.without_edge(parent, child)
        if trimmed.has_path(parent, child):
            continue  # another parent->child route exists; reversal would cycle
        moves.append(Move(MoveKind.REVERSE, parent, child))
    moves.sort(key=Move.sort_key)
    return moves


def apply_move(dag: Dag, move: Move) -> Dag:
    if move.kind is MoveKind.ADD:
        return dag.with_edge(move.parent, move.child)
    if move.kind is MoveKind.DELETE:
        return dag.without_edge(move.parent, move.child)
    return dag.with_reversed(move.parent, move.child)


def _move_delta(scorer: BicScorer, dag: Dag, move: Move) -> float:
    """BIC change from one move, via the affected family scores only."""
    child_parents = set(dag.parents(move.child))
    if move.kind is MoveKind.ADD:
        new_parents = child_parents | {move.parent}
        return scorer.family_score(move.child, new_parents) - scorer.family_score(
            move.child, child_parents
        )
    if move.kind is MoveKind.DELETE:
        new_parents = child_parents - {move.parent}
        return scorer.family_score(move.child, new_parents) - scorer.family_score(
            move.child, child_parents
        )
    parent_parents = set(dag.parents(move.parent))
    delta = scorer.family_score(move.child, child_parents - {move.parent})
    delta -= scorer.family_score(move.child, child_parents)
    delta += scorer.family_score(move.parent, parent_parents | {move.child})
    delta -= scorer.family_score(move.parent, parent_parents)
    return delta


def random_dag(
    variables: tuple[Variable, ...] | list[Variable],
    rng: np.random.Generator,
    density: float = 0.3,
    max_in_degree: int = 4,
) -> Dag:
    """Random DAG by triangular edge sampling over a random node order.

    Only `rng.random()` draws are consumed, keeping streams reproducible.
    """
    variables = tuple(variables)
    n = len(variables)
    order = np.argsort(rng.random(n), kind="stable")
    coins = rng.random(n * (n - 1) // 2)
    edges: list[tuple[str, str]] = []
    indeg = {v.name: 0 for v in variables}
    k = 0
    for i in range(n):
        for j in range(i + 1, n):
            parent = variables[order[i]].name
            child = variables[order[j]].name
            if coins[k] < density and indeg[child] < max_in_degree:
                edges.append((parent, child))
                indeg[child] += 1
            k += 1
    return Dag(variables, edges)


def hill_climb(
    data: MasteryDataset,
    initial: Dag | None = None,
    config: SearchConfig = SearchConfig(),
    scorer: BicScorer | None = None,
) -> SearchTrace:
    """Greedy BIC ascent from `initial` (default: the empty graph).

    With restarts > 1, additional seeded runs start from random DAGs and the
    best final network wins (earlier restart preferred on exact ties).
    Determinism: identical (data, initial, config) give an identical trace.
    """
    if initial is None:
        initial = Dag(data.variables, ())
    if not initial.is_acyclic():
        raise SchemaError("initial graph must be acyclic")
    scorer = scorer or BicScorer(data)

    best: SearchTrace | None = None
    for restart in range(config.restarts):
        if restart == 0:
            start = initial
        else:
            rng = np.random.default_rng(derive_seed(config.seed, f"restart-{restart}"))
            start = random_dag(
                data.variables, rng, density=0.3, max_in_degree=config.max_in_degree
            )
        trace = _climb_once(start, config, scorer)
        trace.restart_index = restart
        if best is None or trace.final.bic > best.final.bic:
            best = trace
    return best


def _climb_once(start: Dag, config: SearchConfig, scorer: BicScorer) -> SearchTrace:
    dag = start
    bic = sum(scorer.family_score(v.name, dag.parents(v.name)) for v in dag.nodes)
    trace = SearchTrace()
    for _ in range(config.max_iterations):
        best_move: Move | None = None
        best_delta = 0.0
        for move in neighbors(dag, config):
            delta = _move_delta(scorer, dag, move)
            if delta > best_delta:  # strict: equal-score moves are rejected
                best_move, best_delta = move, delta
        if best_move is None:
            trace.final = scorer.score(dag)
            return trace
        dag = apply_move(dag, best_move)
        bic += best_delta
        trace.iterations.append((best_move, bic))
    trace.final = scorer.score(dag)
    trace.truncated = len(neighbors(dag, config)) > 0 and _has_improving_move(
        scorer, dag, config
    )
    return trace


def _has_improving_move(scorer: BicScorer, dag: Dag, config: SearchConfig) -> bool:
    return any(_move_delta(scorer, dag, m) > 0.0 for m in neighbors(dag, config))


def trace_records(trace: SearchTrace) -> list[dict]:
    """Line-delimited-JSON-friendly records, one per accepted move."""
    return [
        {
            "iter": i,
            "move": {"kind": move.kind.value, "parent": move.parent, "child": move.child},
            "bic": bic,
        }
        for i, (move, bic) in enumerate(trace.iterations)
    ]
