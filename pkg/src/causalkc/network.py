"""Discrete Bayesian networks: DAGs, CPTs, likelihood, and the BIC score.

Scores are in natural-log units and decompose per family (child + parent
set), which is what lets the structure search re-score only the families a
candidate move touches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .datasets import MasteryDataset, Variable, contingency
from .errors import CapacityError, SchemaError

ROW_SUM_TOL = 1e-9
ENUMERATION_LIMIT = 20  # exact inference caps out here; see CapacityError


class Dag:
    """Directed graph over named variables, intended to be acyclic.

    Construction checks self-loops, duplicates, and endpoint existence.
    Acyclicity is queryable (`is_acyclic`) rather than enforced here, so
    candidate edge sets can be represented and rejected; every operation
    that needs a DAG proper calls `topological_order` and fails fast.
    """

    def __init__(
        self,
        nodes: list[Variable] | tuple[Variable, ...],
        edges: list[tuple[str, str]] | tuple[tuple[str, str], ...] | frozenset = (),
    ) -> None:
        self.nodes: tuple[Variable, ...] = tuple(nodes)
        self._index = {v.name: i for i, v in enumerate(self.nodes)}
        if len(self._index) != len(self.nodes):
            raise SchemaError("duplicate node names in DAG")
        edge_list = [tuple(e) for e in edges]
        seen = set()
        for parent, child in edge_list:
            if parent not in self._index or child not in self._index:
                raise SchemaError(f"edge ({parent!r}, {child!r}) references unknown node")
            if parent == child:
                raise SchemaError(f"self-loop on {parent!r}")
            if (parent, child) in seen:
                raise SchemaError(f"duplicate edge ({parent!r}, {child!r})")
            seen.add((parent, child))
        self.edges: frozenset[tuple[str, str]] = frozenset(seen)
        self._parents: dict[str, tuple[str, ...]] = {}
        self._children: dict[str, tuple[str, ...]] = {}
        for v in self.nodes:
            self._parents[v.name] = tuple(
                u.name for u in self.nodes if (u.name, v.name) in self.edges
            )
            self._children[v.name] = tuple(
                u.name for u in self.nodes if (v.name, u.name) in self.edges
            )

    @property
    def names(self) -> list[str]:
        return [v.name for v in self.nodes]

    def variable(self, name: str) -> Variable:
        try:
            return self.nodes[self._index[name]]
        except KeyError:
            raise SchemaError(f"unknown node {name!r}; DAG has {self.names}") from None

    def index_of(self, name: str) -> int:
        if name not in self._index:
            raise SchemaError(f"unknown node {name!r}; DAG has {self.names}")
        return self._index[name]

    def parents(self, name: str) -> tuple[str, ...]:
        """Parents ordered by node position (fixes the CPT row encoding)."""
        self.index_of(name)
        return self._parents[name]

    def children(self, name: str) -> tuple[str, ...]:
        self.index_of(name)
        return self._children[name]

    def in_degree(self, name: str) -> int:
        return len(self.parents(name))

    def has_edge(self, parent: str, child: str) -> bool:
        return (parent, child) in self.edges

    @property
    def sorted_edges(self) -> list[tuple[str, str]]:
        return sorted(self.edges)

    def has_path(self, source: str, target: str) -> bool:
        """True iff a directed path source -> ... -> target exists."""
        if source == target:
            return True
        stack = [source]
        seen = {source}
        while stack:
            u = stack.pop()
            for w in self._children[u]:
                if w == target:
                    return True
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return False

    def descendants(self, name: str) -> set[str]:
        """All nodes reachable from `name`, excluding `name` itself."""
        self.index_of(name)
        out: set[str] = set()
        stack = list(self._children[name])
        while stack:
            u = stack.pop()
            if u not in out:
                out.add(u)
                stack.extend(self._children[u])
        return out

    def is_acyclic(self) -> bool:
        return self.try_topological_order() is not None

    def try_topological_order(self) -> list[str] | None:
        """Kahn's algorithm; ready nodes taken in node-list order so the
        result is canonical for a given DAG. None when a cycle exists."""
        indeg = {v.name: len(self._parents[v.name]) for v in self.nodes}
        order: list[str] = []
        ready = [v.name for v in self.nodes if indeg[v.name] == 0]
        while ready:
            u = ready.pop(0)
            order.append(u)
            newly = []
            for w in self._children[u]:
                indeg[w] -= 1
                if indeg[w] == 0:
                    newly.append(w)
            if newly:
                pos = {n: i for i, n in enumerate(self.names)}
                ready = sorted(ready + newly, key=pos.__getitem__)
        return order if len(order) == len(self.nodes) else None

    def topological_order(self) -> list[str]:
        order = self.try_topological_order()
        if order is None:
            raise SchemaError("graph contains a cycle; expected a DAG")
        return order

    def with_edge(self, parent: str, child: str) -> "Dag":
        return Dag(self.nodes, list(self.edges) + [(parent, child)])

    def without_edge(self, parent: str, child: str) -> "Dag":
        if not self.has_edge(parent, child):
            raise SchemaError(f"edge ({parent!r}, {child!r}) not in DAG")
        return Dag(self.nodes, [e for e in self.edges if e != (parent, child)])

    def with_reversed(self, parent: str, child: str) -> "Dag":
        trimmed = [e for e in self.edges if e != (parent, child)]
        if len(trimmed) == len(self.edges):
            raise SchemaError(f"edge ({parent!r}, {child!r}) not in DAG")
        return Dag(self.nodes, trimmed + [(child, parent)])

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Dag)
            and self.nodes == other.nodes
            and self.edges == other.edges
        )

    def __hash__(self) -> int:
        return hash((self.nodes, self.edges))

    def __repr__(self) -> str:
        return f"Dag({len(self.nodes)} nodes, {len(self.edges)} edges)"


@dataclass
class CptSet:
    """Per-node conditional probability tables, shape (q_i, r_i) each.

    Row j is the distribution of the child given the j-th mixed-radix parent
    configuration (parents in node order, first parent most significant).
    """

    tables: dict[str, np.ndarray]

    def table(self, name: str) -> np.ndarray:
        try:
            return self.tables[name]
        except KeyError:
            raise SchemaError(f"no CPT for node {name!r}") from None

    def validate(self, dag: Dag) -> None:
        for v in dag.nodes:
            t = self.table(v.name)
            q = 1
            for p in dag.parents(v.name):
                q *= dag.variable(p).cardinality
            if t.shape != (q, v.cardinality):
                raise SchemaError(
                    f"CPT for {v.name!r} has shape {t.shape}, expected {(q, v.cardinality)}"
                )
            if t.min() < -ROW_SUM_TOL or t.max() > 1 + ROW_SUM_TOL:
                raise SchemaError(f"CPT for {v.name!r} has entries outside [0, 1]")
            if np.abs(t.sum(axis=1) - 1.0).max() > ROW_SUM_TOL:
                raise SchemaError(f"CPT rows for {v.name!r} do not sum to 1")


@dataclass
class ScoredNetwork:
    """A DAG with CPTs; bic/family_scores populated once scored on data."""

    dag: Dag
    cpts: CptSet
    bic: float | None = None
    family_scores: dict[str, float] = field(default_factory=dict)


def fit_mle(dag: Dag, data: MasteryDataset, smoothing: float = 0.0) -> CptSet:
    """Additive-smoothing maximum-likelihood CPTs.

    P(child=k | config j) = (N[j,k] + smoothing) / (N[j,.] + r * smoothing);
    an unobserved configuration with smoothing 0 falls back to uniform.
    """
    if smoothing < 0:
        raise SchemaError(f"smoothing must be >= 0, got {smoothing}")
    _check_same_variables(dag, data)
    tables: dict[str, np.ndarray] = {}
    for v in dag.nodes:
        counts = contingency(data, v.name, dag.parents(v.name)).counts
        r = v.cardinality
        num = counts + smoothing
        denom = num.sum(axis=1, keepdims=True)
        table = np.divide(
            num, denom, out=np.full_like(num, 1.0 / r, dtype=float), where=denom > 0
        )
        tables[v.name] = table
    return CptSet(tables)


def family_log_likelihood(data: MasteryDataset, child: str, parents) -> float:
    """One node's likelihood terms: sum_jk N[j,k] ln(N[j,k]/N[j,.]),
    with the 0 ln 0 = 0 convention."""
    counts = contingency(data, child, list(parents)).counts
    totals = counts.sum(axis=1, keepdims=True)
    nz = counts > 0
    return float(
        (counts[nz] * np.log(counts[nz] / np.broadcast_to(totals, counts.shape)[nz])).sum()
    )


def log_likelihood(dag: Dag, data: MasteryDataset) -> float:
    """Log-likelihood of the data under the plug-in (smoothing-0) MLE."""
    _check_same_variables(dag, data)
    return sum(
        family_log_likelihood(data, v.name, dag.parents(v.name)) for v in dag.nodes
    )


def param_count(dag: Dag) -> int:
    """Number of free parameters: sum over nodes of q_i * (r_i - 1)."""
    total = 0
    for v in dag.nodes:
        q = 1
        for p in dag.parents(v.name):
            q *= dag.variable(p).cardinality
        total += q * (v.cardinality - 1)
    return total


class BicScorer:
    """BIC evaluation over one dataset with a per-family score cache.

    Family scores are keyed by (child, sorted parent names): the score does
    not depend on parent order, so hill-climbing re-scores only families a
    move changed. Safe for concurrent reads; populate from one thread.
    """

    def __init__(self, data: MasteryDataset) -> None:
        self.data = data
        self.log_n = math.log(data.n_records)
        self._cache: dict[tuple[str, tuple[str, ...]], float] = {}

    def family_score(self, child: str, parents) -> float:
        """Likelihood terms minus the family's share of the BIC penalty."""
        key = (child, tuple(sorted(parents)))
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        q = 1
        for p in parents:
            q *= self.data.variable(p).cardinality
        r = self.data.variable(child).cardinality
        score = family_log_likelihood(self.data, child, parents)
        score -= 0.5 * q * (r - 1) * self.log_n
        self._cache[key] = score
        return score

    def score(self, dag: Dag) -> ScoredNetwork:
        _check_same_variables(dag, self.data)
        family_scores = {
            v.name: self.family_score(v.name, dag.parents(v.name)) for v in dag.nodes
        }
        return ScoredNetwork(
            dag=dag,
            cpts=fit_mle(dag, self.data, smoothing=0.0),
            bic=sum(family_scores.values()),
            family_scores=family_scores,
        )


def bic_score(dag: Dag, data: MasteryDataset) -> ScoredNetwork:
    """Score one DAG: log-likelihood minus (param_count / 2) ln N."""
    return BicScorer(data).score(dag)


def joint_table(dag: Dag, cpts: CptSet, limit: int = ENUMERATION_LIMIT) -> np.ndarray:
    """Exact joint distribution as an n-dimensional array (node order axes).

    Product of the CPT factors with broadcasting; refuses networks beyond
    `limit` nodes because the table is exponential in n.
    """
    if len(dag.nodes) > limit:
        raise CapacityError(
            f"exact enumeration limited to {limit} nodes; network has {len(dag.nodes)}"
        )
    dag.topological_order()  # raises on cycles
    cpts.validate(dag)
    shape = tuple(v.cardinality for v in dag.nodes)
    joint = np.ones(shape)
    for v in dag.nodes:
        axes = [dag.index_of(p) for p in dag.parents(v.name)] + [dag.index_of(v.name)]
        arr = cpts.table(v.name).reshape([shape[a] for a in axes])
        arr = arr.transpose(np.argsort(axes))  # axes into global order
        full = [1] * len(shape)
        for a in axes:
            full[a] = shape[a]
        joint = joint * arr.reshape(full)
    return joint


def _check_same_variables(dag: Dag, data: MasteryDataset) -> None:
    if [v.name for v in dag.nodes] != data.names or any(
        dv.cardinality != nv.cardinality
        for dv, nv in zip(data.variables, dag.nodes)
    ):
        raise SchemaError(
            f"DAG variables {dag.names} do not match dataset variables {data.names}"
        )


def network_to_json(network: ScoredNetwork) -> dict:
    """Interchange dict: nodes in insertion order, edges sorted, CPTs row-major."""
    return {
        "nodes": [
            {"name": v.name, "cardinality": v.cardinality} for v in network.dag.nodes
        ],
        "edges": [list(e) for e in network.dag.sorted_edges],
        "cpts": {
            v.name: network.cpts.table(v.name).tolist() for v in network.dag.nodes
        },
    }


def network_from_json(obj: dict) -> ScoredNetwork:
    """Parse the interchange dict; validates shapes, row sums, and acyclicity."""
    try:
        nodes = [Variable(n["name"], int(n["cardinality"])) for n in obj["nodes"]]
        edges = [(e[0], e[1]) for e in obj["edges"]]
        raw_cpts = obj["cpts"]
    except (KeyError, TypeError, IndexError) as exc:
        raise SchemaError(f"malformed network JSON: {exc}") from None
    dag = Dag(nodes, edges)
    dag.topological_order()
    cpts = CptSet({name: np.asarray(t, dtype=float) for name, t in raw_cpts.items()})
    missing = [v.name for v in nodes if v.name not in cpts.tables]
    if missing:
        raise SchemaError(f"network JSON missing CPTs for {missing}")
    cpts.validate(dag)
    return ScoredNetwork(dag=dag, cpts=cpts)
