"""Learning-path planning over an annotated causal network.

Given a student's mastery vector, the unmastered nodes induce a subgraph of
the causal network. Root problems are that subgraph's sources (no unmastered
cause upstream), surface problems its sinks (the visible symptoms). For each
surface problem we return the minimum-weight directed path from the best
root, computed with a queue-based label-correcting relaxation.
"""

from __future__ import annotations

import csv
import math
from collections import deque
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .effects import AnnotatedNetwork, TieClass
from .errors import DataError, SchemaError


class WeightPolicy(str, Enum):
    UNIFORM = "uniform"
    EFFECT_INVERSE = "effect-inverse"


MIN_WEIGHT = 1e-6  # floor for effect-inverse weights of near-perfect edges


@dataclass
class MasteryState:
    """Per-node mastery flags: 1 mastered, 0 unmastered."""

    flags: dict[str, int]

    def check_covers(self, names: list[str]) -> None:
        missing = sorted(set(names) - set(self.flags))
        extra = sorted(set(self.flags) - set(names))
        if missing or extra:
            raise SchemaError(
                f"mastery state mismatch: missing {missing}, unexpected {extra}"
            )
        bad = {k: v for k, v in self.flags.items() if v not in (0, 1)}
        if bad:
            raise SchemaError(f"mastery flags must be 0 or 1, got {bad}")


class WeightedDigraph:
    """Directed graph with non-negative finite edge weights."""

    def __init__(self, nodes: list[str], edges: dict[tuple[str, str], float]) -> None:
        self.nodes = tuple(nodes)
        node_set = set(self.nodes)
        for (u, v), w in edges.items():
            if u not in node_set or v not in node_set:
                raise SchemaError(f"edge ({u!r}, {v!r}) references unknown node")
            if not math.isfinite(w) or w < 0:
                raise SchemaError(f"weight of ({u!r}, {v!r}) must be finite >= 0: {w}")
        self.edges = dict(edges)
        self._adj: dict[str, list[tuple[str, float]]] = {u: [] for u in self.nodes}
        for (u, v), w in sorted(edges.items()):
            self._adj[u].append((v, w))

    def successors(self, u: str) -> list[tuple[str, float]]:
        return self._adj[u]

    def weight(self, u: str, v: str) -> float:
        return self.edges[(u, v)]

    def subgraph(self, keep: set[str]) -> "WeightedDigraph":
        return WeightedDigraph(
            [u for u in self.nodes if u in keep],
            {(u, v): w for (u, v), w in self.edges.items() if u in keep and v in keep},
        )


@dataclass
class LearningPath:
    root: str
    target: str
    sequence: tuple[str, ...]
    total_weight: float
    highlighted: frozenset[str]


def to_weighted(
    annotated: AnnotatedNetwork, weighting: WeightPolicy = WeightPolicy.UNIFORM
) -> WeightedDigraph:
    """Weight the network's edges: uniform 1.0, or 1 - |effect| floored at
    1e-6 so stronger causal ties cost less. Removed-tie edges are excluded."""
    dag = annotated.network.dag
    edges: dict[tuple[str, str], float] = {}
    for edge in dag.sorted_edges:
        annotation = annotated.annotation_for(edge)
        if annotation is not None and annotation.tie is TieClass.REMOVED:
            continue
        if weighting is WeightPolicy.UNIFORM:
            edges[edge] = 1.0
        else:
            effect = abs(annotation.effect) if annotation is not None else 0.0
            edges[edge] = max(1.0 - effect, MIN_WEIGHT)
    return WeightedDigraph(dag.names, edges)


def shortest_path(
    graph: WeightedDigraph, source: str, target: str
) -> tuple[float, list[str]] | None:
    """Queue-based label-correcting relaxation with predecessor tracking.

    dist starts at infinity everywhere except dist[source] = 0; a node is
    re-enqueued whenever its distance improves. Non-negative weights make
    this terminate. Returns (distance, path) or None when unreachable.
    """
    for name in (source, target):
        if name not in graph._adj:
            raise SchemaError(f"node {name!r} not in graph")
    dist = {u: math.inf for u in graph.nodes}
    prev: dict[str, str] = {}
    dist[source] = 0.0
    queue: deque[str] = deque([source])
    while queue:
        u = queue.popleft()
        for v, w in graph.successors(u):
            alt = dist[u] + w
            if alt < dist[v]:
                dist[v] = alt
                prev[v] = u
                queue.append(v)
    if math.isinf(dist[target]):
        return None
    path = [target]
    while path[-1] != source:
        path.append(prev[path[-1]])
    path.reverse()
    return dist[target], path


def unmastered_set(state: MasteryState) -> set[str]:
    return {name for name, flag in state.flags.items() if flag == 0}


def root_problems(graph: WeightedDigraph, unmastered: set[str]) -> set[str]:
    """Sources of the subgraph induced on the unmastered nodes."""
    unknown = unmastered - set(graph.nodes)
    if unknown:
        raise SchemaError(f"unmastered names not in graph: {sorted(unknown)}")
    return {
        v
        for v in unmastered
        if not any(u in unmastered and (u, v) in graph.edges for u in graph.nodes)
    }


def surface_problems(graph: WeightedDigraph, unmastered: set[str]) -> set[str]:
    """Sinks of the subgraph induced on the unmastered nodes."""
    return {
        u
        for u in unmastered
        if not any(v in unmastered and (u, v) in graph.edges for v in graph.nodes)
    }


def plan(
    annotated: AnnotatedNetwork,
    state: MasteryState,
    weighting: WeightPolicy = WeightPolicy.UNIFORM,
) -> list[LearningPath]:
    """One minimum-weight root-to-surface path per surface problem.

    Paths run entirely inside the unmastered induced subgraph. When several
    roots reach a surface node, the lightest path wins, ties broken by root
    name. Output is sorted by target name. All-mastered states plan nothing.
    """
    graph = to_weighted(annotated, weighting)
    state.check_covers(list(graph.nodes))
    unmastered = unmastered_set(state)
    if not unmastered:
        return []
    induced = graph.subgraph(unmastered)
    roots = sorted(root_problems(graph, unmastered))
    paths: list[LearningPath] = []
    for target in sorted(surface_problems(graph, unmastered)):
        best: tuple[float, list[str], str] | None = None
        for root in roots:
            found = shortest_path(induced, root, target)
            if found is None:
                continue
            weight, sequence = found
            if best is None or weight < best[0]:
                best = (weight, sequence, root)
        if best is not None:
            weight, sequence, root = best
            paths.append(
                LearningPath(
                    root=root,
                    target=target,
                    sequence=tuple(sequence),
                    total_weight=weight,
                    highlighted=frozenset(sequence),
                )
            )
    return paths


def plan_to_json(paths: list[LearningPath], unmastered: set[str]) -> dict:
    """Plan plus the full unmastered set (reported separately from the
    per-path highlights)."""
    return {
        "paths": [
            {
                "target": p.target,
                "root": p.root,
                "path": list(p.sequence),
                "total_weight": p.total_weight,
                "highlighted": sorted(p.highlighted),
            }
            for p in paths
        ],
        "unmastered": sorted(unmastered),
    }


def load_mastery_state(path: str | Path, names: list[str]) -> MasteryState:
    """Single-row CSV of 0/1 flags whose columns must match the network nodes."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        rows = [r for r in reader if r and any(c.strip() for c in r)]
    if len(rows) != 2:
        raise DataError(
            f"{path}: expected a header row plus exactly one data row, "
            f"got {max(len(rows) - 1, 0)} data rows"
        )
    header = [h.strip() for h in rows[0]]
    missing = sorted(set(names) - set(header))
    extra = sorted(set(header) - set(names))
    if missing or extra:
        raise SchemaError(
            f"{path}: mastery columns mismatch network nodes: "
            f"missing {missing}, unexpected {extra}"
        )
    flags: dict[str, int] = {}
    for col, cell in zip(header, rows[1]):
        text = cell.strip()
        if text not in ("0", "1"):
            raise DataError(f"{path}: column {col!r}: flag must be 0 or 1, got {cell!r}")
        flags[col] = int(text)
    return MasteryState(flags)


def plan_to_dot(
    annotated: AnnotatedNetwork, state: MasteryState, paths: list[LearningPath]
) -> str:
    """DOT text with unmastered nodes shaded, roots double-circled, and
    path edges drawn bold."""
    unmastered = unmastered_set(state)
    roots = {p.root for p in paths}
    on_path: set[tuple[str, str]] = set()
    for p in paths:
        on_path.update(zip(p.sequence, p.sequence[1:]))
    lines = ["digraph learning_plan {"]
    for v in annotated.network.dag.nodes:
        attrs = []
        if v.name in roots:
            attrs.append("shape=doublecircle")
        if v.name in unmastered:
            attrs.append('style=filled, fillcolor="lightcoral"')
        suffix = f" [{', '.join(attrs)}]" if attrs else ""
        lines.append(f'  "{v.name}"{suffix};')
    for parent, child in annotated.network.dag.sorted_edges:
        if (parent, child) in on_path:
            lines.append(f'  "{parent}" -> "{child}" [penwidth=2.5];')
        else:
            lines.append(f'  "{parent}" -> "{child}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
