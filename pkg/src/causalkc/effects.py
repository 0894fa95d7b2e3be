"""Interventional effect estimation and refutation over a fitted network.

Interventional distributions come from the back-door adjustment formula
P(Y | do(T=t)) = sum_z P(Y | T=t, Z=z) P(z), evaluated by exact enumeration
of the joint the CPTs define. The adjustment set Z is either the treatment's
parents (default) or all of its non-descendants. Refutation re-estimates an
edge's effect under bootstrap resampling and a placebo (permuted treatment)
and classifies the edge as a strong tie, weak tie, or removed.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .datasets import MasteryDataset
from .errors import SchemaError
from .network import (
    CptSet,
    Dag,
    ENUMERATION_LIMIT,
    ScoredNetwork,
    fit_mle,
    joint_table,
    network_from_json,
    network_to_json,
)
from .seeds import derive_seed


class AdjustmentPolicy(str, Enum):
    PARENTS = "parents"
    NON_DESCENDANTS = "nondescendants"


class TieClass(str, Enum):
    STRONG = "strong"
    WEAK = "weak"
    REMOVED = "removed"


@dataclass(frozen=True)
class InterventionQuery:
    treatment: str
    value: int
    outcome: str
    policy: AdjustmentPolicy = AdjustmentPolicy.PARENTS

    def __post_init__(self) -> None:
        if self.treatment == self.outcome:
            raise SchemaError("treatment and outcome must differ")


@dataclass
class InterventionalDistribution:
    outcome: str
    probabilities: np.ndarray
    positivity_fallback: bool = False


@dataclass(frozen=True)
class Thresholds:
    """Tie-classification thresholds; defaults make (0.77, 0.96) a strong tie."""

    tau_effect: float = 0.2
    tau_cred: float = 0.95
    tau_removal: float = 0.5
    epsilon_effect: float = 0.05


@dataclass(frozen=True)
class CausalAnnotation:
    edge: tuple[str, str]
    effect: float
    credibility: float
    tie: TieClass


@dataclass(frozen=True)
class RefuteConfig:
    bootstrap: int = 200
    seed: int = 0
    thresholds: Thresholds = Thresholds()
    policy: AdjustmentPolicy = AdjustmentPolicy.PARENTS
    smoothing: float = 1.0

    def __post_init__(self) -> None:
        if self.bootstrap < 10:
            raise SchemaError(
                f"bootstrap count must be >= 10, got {self.bootstrap}"
            )


@dataclass
class RefutationReport:
    edge: tuple[str, str]
    original_effect: float
    placebo_effect: float
    bootstrap_effects: list[float]
    credibility: float
    verdict: TieClass
    positivity_fallback: bool = False


@dataclass
class AnnotatedNetwork:
    """A network plus per-edge causal annotations and positivity warnings."""

    network: ScoredNetwork
    annotations: tuple[CausalAnnotation, ...] = ()
    warnings: tuple[str, ...] = ()

    def annotation_for(self, edge: tuple[str, str]) -> CausalAnnotation | None:
        for a in self.annotations:
            if a.edge == edge:
                return a
        return None


def adjustment_set(
    dag: Dag, treatment: str, policy: AdjustmentPolicy = AdjustmentPolicy.PARENTS
) -> list[str]:
    """Back-door adjustment set for the treatment, in node order.

    PARENTS gives Pa(treatment); NON_DESCENDANTS gives every node that is
    neither the treatment nor one of its descendants. Both are valid
    back-door sets in a DAG without latent confounders.
    """
    dag.index_of(treatment)
    if policy is AdjustmentPolicy.PARENTS:
        return list(dag.parents(treatment))
    desc = dag.descendants(treatment)
    return [v.name for v in dag.nodes if v.name != treatment and v.name not in desc]


def do_distribution(
    network: ScoredNetwork,
    query: InterventionQuery,
    limit: int = ENUMERATION_LIMIT,
) -> InterventionalDistribution:
    """Back-door adjusted P(outcome | do(treatment=value)) by enumeration.

    Strata with P(Z=z, T=t) = 0 fall back to the z-conditioned outcome
    distribution P(outcome | z) and set the positivity flag; strata with
    P(z) = 0 carry no weight.
    """
    dag, cpts = network.dag, network.cpts
    treatment_var = dag.variable(query.treatment)
    outcome_var = dag.variable(query.outcome)
    if not 0 <= query.value < treatment_var.cardinality:
        raise SchemaError(
            f"do-value {query.value} outside states of {query.treatment!r}"
        )
    z = adjustment_set(dag, query.treatment, query.policy)
    joint = joint_table(dag, cpts, limit=limit)

    if query.outcome in z:
        # outcome is a non-descendant of the treatment: the adjustment formula
        # telescopes to the outcome's observational marginal
        axis = dag.index_of(query.outcome)
        probs = joint.sum(axis=tuple(a for a in range(joint.ndim) if a != axis))
        return InterventionalDistribution(query.outcome, probs)

    it = dag.index_of(query.treatment)
    iy = dag.index_of(query.outcome)
    iz = [dag.index_of(name) for name in z]
    sum_axes = [a for a in range(joint.ndim) if a != it and a != iy and a not in iz]
    arr = np.transpose(joint, sum_axes + iz + [it, iy])
    if sum_axes:
        arr = arr.sum(axis=tuple(range(len(sum_axes))))
    r_t = treatment_var.cardinality
    r_y = outcome_var.cardinality
    arr = arr.reshape(-1, r_t, r_y)  # (z strata, treatment, outcome)

    pz = arr.sum(axis=(1, 2))
    pzt = arr[:, query.value, :].sum(axis=1)
    pyzt = arr[:, query.value, :]
    pyz = arr.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        cond = np.where(
            pzt[:, None] > 0,
            pyzt / pzt[:, None],
            np.where(pz[:, None] > 0, pyz / pz[:, None], 0.0),
        )
    cond = np.nan_to_num(cond, nan=0.0, posinf=0.0, neginf=0.0)
    probs = (cond * pz[:, None]).sum(axis=0)
    fallback = bool(np.any((pz > 0) & (pzt == 0)))
    return InterventionalDistribution(query.outcome, probs, fallback)


def ate_with_flag(
    network: ScoredNetwork,
    edge: tuple[str, str],
    policy: AdjustmentPolicy = AdjustmentPolicy.PARENTS,
) -> tuple[float, bool]:
    """Binary average treatment effect plus the positivity-fallback flag."""
    treatment, outcome = edge
    for name in (treatment, outcome):
        if network.dag.variable(name).cardinality != 2:
            raise SchemaError(
                f"ATE requires binary variables; {name!r} has cardinality "
                f"{network.dag.variable(name).cardinality}"
            )
    d1 = do_distribution(network, InterventionQuery(treatment, 1, outcome, policy))
    d0 = do_distribution(network, InterventionQuery(treatment, 0, outcome, policy))
    return float(d1.probabilities[1] - d0.probabilities[1]), (
        d1.positivity_fallback or d0.positivity_fallback
    )


def ate(
    network: ScoredNetwork,
    edge: tuple[str, str],
    policy: AdjustmentPolicy = AdjustmentPolicy.PARENTS,
) -> float:
    """P(outcome=1 | do(treatment=1)) - P(outcome=1 | do(treatment=0))."""
    return ate_with_flag(network, edge, policy)[0]


def classify_edge(
    effect: float, credibility: float, thresholds: Thresholds = Thresholds()
) -> TieClass:
    """Strong needs a large effect with high credibility; Removed means the
    effect is negligible or the bootstrap would not reproduce it."""
    if abs(effect) >= thresholds.tau_effect and credibility >= thresholds.tau_cred:
        return TieClass.STRONG
    if abs(effect) < thresholds.epsilon_effect or credibility < thresholds.tau_removal:
        return TieClass.REMOVED
    return TieClass.WEAK


def refute_edge(
    data: MasteryDataset,
    network: ScoredNetwork,
    edge: tuple[str, str],
    config: RefuteConfig = RefuteConfig(),
) -> RefutationReport:
    """Bootstrap + placebo refutation of one edge on a fixed structure.

    Credibility is the fraction of bootstrap re-estimates that keep the
    original effect's sign with magnitude >= epsilon_effect. The placebo
    permutes the treatment column, which should drive the effect to zero.
    Bit-reproducible for a fixed config seed.
    """
    if not network.dag.has_edge(*edge):
        raise SchemaError(f"edge {edge[0]}->{edge[1]} not present in network")
    dag = network.dag
    label = f"{edge[0]}->{edge[1]}"
    n = data.n_records
    eps = config.thresholds.epsilon_effect

    fitted = ScoredNetwork(dag, fit_mle(dag, data, config.smoothing))
    original, fallback = ate_with_flag(fitted, edge, config.policy)

    rng = np.random.default_rng(derive_seed(config.seed, f"bootstrap/{label}"))
    boot_effects: list[float] = []
    for _ in range(config.bootstrap):
        idx = np.minimum((rng.random(n) * n).astype(np.int64), n - 1)
        resampled = data.subsample(idx)
        refit = ScoredNetwork(dag, fit_mle(dag, resampled, config.smoothing))
        boot_effects.append(ate(refit, edge, config.policy))

    matches = sum(
        1
        for e in boot_effects
        if np.sign(e) == np.sign(original) and abs(e) >= eps
    )
    credibility = matches / config.bootstrap

    prng = np.random.default_rng(derive_seed(config.seed, f"placebo/{label}"))
    perm = np.argsort(prng.random(n), kind="stable")
    placebo_data = data.replace_column(edge[0], data.column(edge[0])[perm])
    placebo_fit = ScoredNetwork(dag, fit_mle(dag, placebo_data, config.smoothing))
    placebo_effect = ate(placebo_fit, edge, config.policy)

    return RefutationReport(
        edge=edge,
        original_effect=original,
        placebo_effect=placebo_effect,
        bootstrap_effects=boot_effects,
        credibility=credibility,
        verdict=classify_edge(original, credibility, config.thresholds),
        positivity_fallback=fallback,
    )


class EditOp(str, Enum):
    ADD = "add"
    REMOVE = "remove"


@dataclass(frozen=True)
class GraphEdit:
    op: EditOp
    parent: str
    child: str


def counterfactual_experiment(
    network: ScoredNetwork,
    edits: list[GraphEdit],
    query: InterventionQuery,
    data: MasteryDataset,
    smoothing: float = 1.0,
) -> tuple[InterventionalDistribution, InterventionalDistribution]:
    """Hypothetical-structure comparison: apply graph edits, refit, re-query.

    Both the original and the edited structure get CPTs refitted from the
    same data with the same smoothing, so an empty edit list returns two
    identical distributions regardless of the input network's CPTs.
    """
    edited = network.dag
    for edit in edits:
        if edit.op is EditOp.ADD:
            edited = edited.with_edge(edit.parent, edit.child)
        else:
            edited = edited.without_edge(edit.parent, edit.child)
    if not edited.is_acyclic():
        raise SchemaError("graph edits create a cycle")
    original_fit = ScoredNetwork(network.dag, fit_mle(network.dag, data, smoothing))
    edited_fit = ScoredNetwork(edited, fit_mle(edited, data, smoothing))
    return do_distribution(original_fit, query), do_distribution(edited_fit, query)


def update_network(
    network: ScoredNetwork,
    annotations: list[CausalAnnotation],
    data: MasteryDataset,
    smoothing: float = 1.0,
    warnings: tuple[str, ...] = (),
) -> AnnotatedNetwork:
    """Delete Removed edges, refit CPTs on the reduced structure, and attach
    the annotations (Removed ones stay in the record of what was cut)."""
    for a in annotations:
        if not network.dag.has_edge(*a.edge):
            raise SchemaError(f"annotation references absent edge {a.edge}")
    removed = {a.edge for a in annotations if a.tie is TieClass.REMOVED}
    new_dag = Dag(
        network.dag.nodes, [e for e in network.dag.edges if e not in removed]
    )
    refit = fit_mle(new_dag, data, smoothing)
    return AnnotatedNetwork(
        network=ScoredNetwork(new_dag, refit),
        annotations=tuple(sorted(annotations, key=lambda a: a.edge)),
        warnings=warnings,
    )


def annotated_to_json(annotated: AnnotatedNetwork) -> dict:
    obj = network_to_json(annotated.network)
    obj["annotations"] = [
        {
            "edge": list(a.edge),
            "effect": a.effect,
            "credibility": a.credibility,
            "tie": a.tie.value,
        }
        for a in sorted(annotated.annotations, key=lambda a: a.edge)
    ]
    obj["warnings"] = list(annotated.warnings)
    return obj


def annotated_from_json(obj: dict) -> AnnotatedNetwork:
    network = network_from_json(obj)
    annotations = tuple(
        CausalAnnotation(
            edge=(a["edge"][0], a["edge"][1]),
            effect=float(a["effect"]),
            credibility=float(a["credibility"]),
            tie=TieClass(a["tie"]),
        )
        for a in obj.get("annotations", [])
    )
    return AnnotatedNetwork(
        network=network,
        annotations=annotations,
        warnings=tuple(obj.get("warnings", [])),
    )


def annotated_to_dot(annotated: AnnotatedNetwork) -> str:
    """DOT text: strong ties solid, weak ties dashed, removed edges omitted;
    edge labels carry effect/credibility."""
    lines = ["digraph causal_network {"]
    for v in annotated.network.dag.nodes:
        lines.append(f'  "{v.name}";')
    for parent, child in annotated.network.dag.sorted_edges:
        a = annotated.annotation_for((parent, child))
        if a is None:
            lines.append(f'  "{parent}" -> "{child}";')
        elif a.tie is TieClass.REMOVED:
            continue
        else:
            style = "solid" if a.tie is TieClass.STRONG else "dashed"
            label = f"{a.effect:.2f}/{a.credibility:.2f}"
            lines.append(
                f'  "{parent}" -> "{child}" [style={style}, label="{label}"];'
            )
    lines.append("}")
    return "\n".join(lines) + "\n"
