"""Ground-truth networks, ancestral sampling, and the exact-intervention oracle.

All randomness is drawn as uniform doubles from numpy's PCG64 generator, one
vector per node in canonical topological order; that contract (recorded in
dataset meta) is what keeps sampled fixtures and golden digests stable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .datasets import MasteryDataset, Variable
from .errors import SchemaError
from .network import (
    CptSet,
    Dag,
    ENUMERATION_LIMIT,
    ScoredNetwork,
    joint_table,
    network_from_json,
    network_to_json,
)

GENERATOR_ID = "numpy-pcg64-random-doubles"


@dataclass
class GroundTruth:
    """A fully specified network (structure + CPTs) used to generate cohorts."""

    dag: Dag
    cpts: CptSet
    seed: int = 0

    def __post_init__(self) -> None:
        self.dag.topological_order()
        self.cpts.validate(self.dag)


def sample(truth: GroundTruth, n: int, seed: int | None = None) -> MasteryDataset:
    """Ancestral sampling: n rows, deterministic for a fixed (truth, n, seed)."""
    if n < 1:
        raise SchemaError(f"sample size must be >= 1, got {n}")
    effective_seed = truth.seed if seed is None else seed
    rng = np.random.default_rng(effective_seed)
    order = truth.dag.topological_order()
    columns: dict[str, np.ndarray] = {}
    for name in order:
        table = truth.cpts.table(name)
        parents = truth.dag.parents(name)
        codes = np.zeros(n, dtype=np.int64)
        for p in parents:
            codes = codes * truth.dag.variable(p).cardinality + columns[p]
        cdf = np.cumsum(table, axis=1)
        u = rng.random(n)
        states = (u[:, None] >= cdf[codes]).sum(axis=1)
        columns[name] = np.minimum(states, truth.dag.variable(name).cardinality - 1)
    rows = np.column_stack([columns[v.name] for v in truth.dag.nodes])
    return MasteryDataset(
        truth.dag.nodes,
        rows,
        meta={"generator": GENERATOR_ID, "seed": effective_seed, "n": n},
    )


def interventional_marginal(
    dag: Dag,
    cpts: CptSet,
    treatment: str,
    value: int,
    outcome: str,
    limit: int = ENUMERATION_LIMIT,
) -> np.ndarray:
    """P(outcome | do(treatment=value)) by mutilated-graph enumeration.

    Deletes the treatment's incoming edges, clamps the treatment to a point
    mass, builds the full joint, and marginalizes the outcome.
    """
    r_t = dag.variable(treatment).cardinality
    if not 0 <= value < r_t:
        raise SchemaError(f"do-value {value} outside states of {treatment!r}")
    mutilated = Dag(dag.nodes, [e for e in dag.edges if e[1] != treatment])
    point = np.zeros((1, r_t))
    point[0, value] = 1.0
    tables = dict(cpts.tables)
    tables[treatment] = point
    joint = joint_table(mutilated, CptSet(tables), limit=limit)
    axis = mutilated.index_of(outcome)
    other_axes = tuple(a for a in range(joint.ndim) if a != axis)
    return joint.sum(axis=other_axes)


def true_ate(truth: GroundTruth, edge: tuple[str, str]) -> float:
    """Exact binary ATE on the true network: P(y=1|do(1)) - P(y=1|do(0))."""
    treatment, outcome = edge
    for name in (treatment, outcome):
        if truth.dag.variable(name).cardinality != 2:
            raise SchemaError(f"ATE requires binary variables; {name!r} is not")
    p1 = interventional_marginal(truth.dag, truth.cpts, treatment, 1, outcome)
    p0 = interventional_marginal(truth.dag, truth.cpts, treatment, 0, outcome)
    return float(p1[1] - p0[1])


def random_cpts(
    dag: Dag,
    rng: np.random.Generator,
    low: float = 0.1,
    high: float = 0.9,
) -> CptSet:
    """Random CPTs with rows bounded away from 0/1 (entries drawn in [low, high],
    then normalized). Consumes only `rng.random()` draws."""
    if not 0.0 < low <= high < 1.0:
        raise SchemaError(f"need 0 < low <= high < 1, got ({low}, {high})")
    tables: dict[str, np.ndarray] = {}
    for v in dag.nodes:
        q = 1
        for p in dag.parents(v.name):
            q *= dag.variable(p).cardinality
        raw = low + (high - low) * rng.random((q, v.cardinality))
        tables[v.name] = raw / raw.sum(axis=1, keepdims=True)
    return CptSet(tables)


def ground_truth_to_json(truth: GroundTruth) -> dict:
    obj = network_to_json(ScoredNetwork(dag=truth.dag, cpts=truth.cpts))
    obj["seed"] = truth.seed
    return obj


def ground_truth_from_json(obj: dict) -> GroundTruth:
    """Fixture files are network JSON with mandatory CPTs plus optional seed."""
    network = network_from_json(obj)
    return GroundTruth(network.dag, network.cpts, seed=int(obj.get("seed", 0)))
