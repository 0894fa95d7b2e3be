"""End-to-end orchestration shared by the CLI and the HTTP service.

Stages: transform/ingest -> structure learning (repeated hill-climb sweeps
until the BIC settles) -> per-edge refutation -> effect queries and path
planning. Every file-writing run produces a RunManifest with config, input
and output digests, seed, and per-stage timings.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

from .datasets import MasteryDataset
from .effects import (
    AdjustmentPolicy,
    AnnotatedNetwork,
    CausalAnnotation,
    InterventionQuery,
    RefutationReport,
    RefuteConfig,
    ate_with_flag,
    do_distribution,
    refute_edge,
    update_network,
)
from .errors import SchemaError
from .network import BicScorer, Dag, ScoredNetwork
from .search import SearchConfig, SearchTrace, hill_climb
from .seeds import derive_seed
from .simulate import GENERATOR_ID

SWEEP_TOL = 1e-9  # sweeps repeat until the BIC moves less than this


@dataclass
class LearnResult:
    network: ScoredNetwork
    traces: list[SearchTrace]

    @property
    def sweeps(self) -> int:
        return len(self.traces)


def learn_network(data: MasteryDataset, config: SearchConfig) -> LearnResult:
    """Hill-climb from the empty graph, sweeping until the score is stable."""
    scorer = BicScorer(data)
    current: Dag | None = None
    prev_bic: float | None = None
    traces: list[SearchTrace] = []
    while True:
        trace = hill_climb(data, current, config, scorer=scorer)
        traces.append(trace)
        bic = trace.final.bic
        if prev_bic is not None and abs(bic - prev_bic) < SWEEP_TOL:
            break
        prev_bic = bic
        current = trace.final.dag
    return LearnResult(traces[-1].final, traces)


@dataclass
class RefuteResult:
    annotated: AnnotatedNetwork
    reports: list[RefutationReport]


def refute_network(
    data: MasteryDataset, network: ScoredNetwork, config: RefuteConfig
) -> RefuteResult:
    """Refute every edge in deterministic order and apply the verdicts."""
    reports: list[RefutationReport] = []
    warnings: list[str] = []
    for edge in network.dag.sorted_edges:
        report = refute_edge(data, network, edge, config)
        reports.append(report)
        if report.positivity_fallback:
            warnings.append(f"positivity fallback used for edge {edge[0]}->{edge[1]}")
    annotations = [
        CausalAnnotation(
            edge=r.edge,
            effect=r.original_effect,
            credibility=r.credibility,
            tie=r.verdict,
        )
        for r in reports
    ]
    annotated = update_network(
        network, annotations, data, config.smoothing, warnings=tuple(warnings)
    )
    return RefuteResult(annotated, reports)


def effect_query(
    network: ScoredNetwork,
    treatment: str,
    value: int,
    outcome: str,
    policy: AdjustmentPolicy = AdjustmentPolicy.PARENTS,
) -> dict:
    """Interventional distribution plus, for binary pairs, the ATE."""
    known = network.dag.names
    unknown = [n for n in (treatment, outcome) if n not in known]
    if unknown:
        raise SchemaError(f"unknown variables {unknown}; network has {known}")
    query = InterventionQuery(treatment, value, outcome, policy)
    dist = do_distribution(network, query)
    result = {
        "treatment": treatment,
        "value": value,
        "outcome": outcome,
        "policy": policy.value,
        "probabilities": [float(p) for p in dist.probabilities],
        "positivity_fallback": dist.positivity_fallback,
    }
    if (
        network.dag.variable(treatment).cardinality == 2
        and network.dag.variable(outcome).cardinality == 2
    ):
        effect, _ = ate_with_flag(network, (treatment, outcome), policy)
        result["ate"] = effect
    return result


def report_to_json(report: RefutationReport) -> dict:
    return {
        "edge": list(report.edge),
        "original_effect": report.original_effect,
        "placebo_effect": report.placebo_effect,
        "bootstrap_effects": report.bootstrap_effects,
        "credibility": report.credibility,
        "verdict": report.verdict.value,
        "positivity_fallback": report.positivity_fallback,
    }


def sha256_file(path: str | Path) -> str:
    digest = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_json(obj: dict | list, path: str | Path) -> None:
    """Diff-friendly JSON: pretty-printed, insertion-ordered keys, newline-terminated."""
    Path(path).write_text(
        json.dumps(obj, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )


def read_json(path: str | Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


@dataclass
class RunManifest:
    """Reproducibility record: identical manifests (modulo timings) imply
    byte-identical primary outputs."""

    command: str
    seed: int
    config: dict = field(default_factory=dict)
    inputs: dict[str, str] = field(default_factory=dict)
    outputs: dict[str, str] = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)
    generator: str = GENERATOR_ID

    def add_input(self, path: str | Path) -> None:
        self.inputs[str(path)] = sha256_file(path)

    def add_output(self, path: str | Path) -> None:
        self.outputs[str(path)] = sha256_file(path)

    def write(self, path: str | Path) -> None:
        write_json(
            {
                "command": self.command,
                "seed": self.seed,
                "config": self.config,
                "inputs": self.inputs,
                "outputs": self.outputs,
                "timings": self.timings,
                "generator": self.generator,
            },
            path,
        )


class StageTimer:
    """Collects per-stage wall-clock durations for the manifest."""

    def __init__(self) -> None:
        self.timings: dict[str, float] = {}

    def time(self, stage: str):
        timer = self

        class _Span:
            def __enter__(self) -> None:
                self._start = time.perf_counter()

            def __exit__(self, *exc) -> None:
                timer.timings[stage] = time.perf_counter() - self._start

        return _Span()


def stage_seed(seed: int, stage: str) -> int:
    """Fan the single top-level seed out per pipeline stage."""
    return derive_seed(seed, stage)
