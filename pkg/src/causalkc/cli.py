"""Command-line client: simulate, learn, refute, effects, path.

Each command is a thin wrapper over the pipeline functions; outputs are
files consumed by scripts or graph viewers, plus a RunManifest next to each
primary output. Exit codes: 0 success, 1 usage/schema error, 2 data error,
3 capacity error. CAUSAL_KC_SEED provides the default seed.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

from .datasets import (
    PerformanceRecord,
    load_mastery_csv,
    save_mastery_csv,
    transform_performance,
)
from .effects import (
    AdjustmentPolicy,
    RefuteConfig,
    Thresholds,
    annotated_from_json,
    annotated_to_json,
)
from .errors import CapacityError, DataError, SchemaError
from .network import network_from_json, network_to_json
from .pipeline import (
    RunManifest,
    StageTimer,
    effect_query,
    learn_network,
    read_json,
    refute_network,
    report_to_json,
    write_json,
)
from .planning import (
    WeightPolicy,
    load_mastery_state,
    plan,
    plan_to_dot,
    plan_to_json,
    unmastered_set,
)
from .search import SearchConfig, trace_records
from .simulate import ground_truth_from_json, sample

PERFORMANCE_HEADER = ["student_id", "component_name", "score"]


class _Parser(argparse.ArgumentParser):
    # usage errors must exit 1, not argparse's default 2
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _default_seed() -> int:
    return int(os.environ.get("CAUSAL_KC_SEED", "0"))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="causalkc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_sim = sub.add_parser("simulate", help="sample a synthetic cohort from a ground truth")
    p_sim.add_argument("--truth", required=True, help="ground-truth network JSON")
    p_sim.add_argument("--n", type=int, required=True, help="number of rows")
    p_sim.add_argument("--seed", type=int, default=_default_seed())
    p_sim.add_argument("--out", required=True, help="output mastery CSV")
    p_sim.set_defaults(func=cmd_simulate)

    p_learn = sub.add_parser("learn", help="learn a network structure from mastery data")
    p_learn.add_argument("--data", required=True, help="mastery CSV (or performance CSV)")
    p_learn.add_argument("--out", required=True, help="output network JSON")
    p_learn.add_argument("--seed", type=int, default=_default_seed())
    p_learn.add_argument("--threshold", type=float, default=0.6,
                         help="mastery threshold when --data is a performance CSV")
    p_learn.add_argument("--max-in-degree", type=int, default=4)
    p_learn.add_argument("--max-iterations", type=int, default=1000)
    p_learn.add_argument("--restarts", type=int, default=1)
    p_learn.add_argument("--verbose", action="store_true",
                         help="print one NDJSON record per accepted move")
    p_learn.set_defaults(func=cmd_learn)

    p_ref = sub.add_parser("refute", help="refute every edge and classify ties")
    p_ref.add_argument("--data", required=True, help="mastery CSV")
    p_ref.add_argument("--network", required=True, help="network JSON")
    p_ref.add_argument("--out", required=True, help="output annotated network JSON")
    p_ref.add_argument("--seed", type=int, default=_default_seed())
    p_ref.add_argument("--bootstrap", type=int, default=200, metavar="B")
    p_ref.add_argument("--tau-effect", type=float, default=0.2)
    p_ref.add_argument("--tau-cred", type=float, default=0.95)
    p_ref.add_argument("--tau-removal", type=float, default=0.5)
    p_ref.add_argument("--epsilon-effect", type=float, default=0.05)
    p_ref.add_argument("--smoothing", type=float, default=1.0)
    p_ref.add_argument("--policy", choices=[p.value for p in AdjustmentPolicy],
                       default=AdjustmentPolicy.PARENTS.value)
    p_ref.set_defaults(func=cmd_refute)

    p_eff = sub.add_parser("effects", help="interventional distribution for do(T=v)")
    p_eff.add_argument("--network", required=True, help="network JSON")
    p_eff.add_argument("--treatment", required=True)
    p_eff.add_argument("--value", type=int, required=True)
    p_eff.add_argument("--outcome", required=True)
    p_eff.add_argument("--policy", choices=[p.value for p in AdjustmentPolicy],
                       default=AdjustmentPolicy.PARENTS.value)
    p_eff.add_argument("--out", help="also write the distribution JSON here")
    p_eff.set_defaults(func=cmd_effects)

    p_path = sub.add_parser("path", help="plan learning paths for a mastery state")
    p_path.add_argument("--network", required=True, help="(annotated) network JSON")
    p_path.add_argument("--mastery", required=True, help="single-row mastery CSV")
    p_path.add_argument("--weighting", choices=[w.value for w in WeightPolicy],
                        default=WeightPolicy.UNIFORM.value)
    p_path.add_argument("--out", required=True, help="output plan JSON")
    p_path.add_argument("--dot", help="also write a DOT rendering here")
    p_path.set_defaults(func=cmd_path)

    return parser


def _load_dataset(path: str, threshold: float):
    """Mastery CSV, or a performance CSV auto-detected by its header."""
    with open(path, encoding="utf-8") as fh:
        header = [h.strip() for h in fh.readline().split(",")]
    if header != PERFORMANCE_HEADER:
        return load_mastery_csv(path)
    records = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            records.append(
                PerformanceRecord(
                    row["student_id"], row["component_name"], float(row["score"])
                )
            )
    result = transform_performance(records, threshold)
    if result.dropped_students:
        print(
            f"dropped {len(result.dropped_students)} incomplete students: "
            f"{result.dropped_students}",
            file=sys.stderr,
        )
    return result.dataset


def cmd_simulate(args) -> int:
    if args.n < 1:
        raise SchemaError(f"--n must be >= 1, got {args.n}")
    timer = StageTimer()
    manifest = RunManifest("simulate", args.seed, config={"n": args.n})
    manifest.add_input(args.truth)
    with timer.time("sample"):
        truth = ground_truth_from_json(read_json(args.truth))
        data = sample(truth, args.n, seed=args.seed)
    with timer.time("write"):
        save_mastery_csv(data, args.out)
    manifest.add_output(args.out)
    manifest.timings = timer.timings
    manifest.write(args.out + ".manifest.json")
    return 0


def cmd_learn(args) -> int:
    config = SearchConfig(
        max_in_degree=args.max_in_degree,
        max_iterations=args.max_iterations,
        seed=args.seed,
        restarts=args.restarts,
    )
    timer = StageTimer()
    manifest = RunManifest(
        "learn",
        args.seed,
        config={
            "threshold": args.threshold,
            "max_in_degree": args.max_in_degree,
            "max_iterations": args.max_iterations,
            "restarts": args.restarts,
        },
    )
    manifest.add_input(args.data)
    with timer.time("ingest"):
        data = _load_dataset(args.data, args.threshold)
    with timer.time("search"):
        result = learn_network(data, config)
    if args.verbose:
        for trace in result.traces:
            for record in trace_records(trace):
                print(json.dumps(record))
    with timer.time("write"):
        write_json(network_to_json(result.network), args.out)
        trace_path = args.out + ".trace.json"
        write_json(
            {
                "sweeps": result.sweeps,
                "bic": result.network.bic,
                "moves": [r for t in result.traces for r in trace_records(t)],
                "truncated": any(t.truncated for t in result.traces),
            },
            trace_path,
        )
    manifest.add_output(args.out)
    manifest.add_output(trace_path)
    manifest.timings = timer.timings
    manifest.write(args.out + ".manifest.json")
    return 0


def cmd_refute(args) -> int:
    thresholds = Thresholds(
        tau_effect=args.tau_effect,
        tau_cred=args.tau_cred,
        tau_removal=args.tau_removal,
        epsilon_effect=args.epsilon_effect,
    )
    config = RefuteConfig(
        bootstrap=args.bootstrap,
        seed=args.seed,
        thresholds=thresholds,
        policy=AdjustmentPolicy(args.policy),
        smoothing=args.smoothing,
    )
    timer = StageTimer()
    manifest = RunManifest(
        "refute",
        args.seed,
        config={
            "bootstrap": args.bootstrap,
            "tau_effect": args.tau_effect,
            "tau_cred": args.tau_cred,
            "tau_removal": args.tau_removal,
            "epsilon_effect": args.epsilon_effect,
            "policy": args.policy,
            "smoothing": args.smoothing,
        },
    )
    manifest.add_input(args.data)
    manifest.add_input(args.network)
    with timer.time("ingest"):
        data = load_mastery_csv(args.data)
        network = network_from_json(read_json(args.network))
    with timer.time("refute"):
        result = refute_network(data, network, config)
    with timer.time("write"):
        obj = annotated_to_json(result.annotated)
        obj["reports"] = [report_to_json(r) for r in result.reports]
        write_json(obj, args.out)
    manifest.add_output(args.out)
    manifest.timings = timer.timings
    manifest.write(args.out + ".manifest.json")
    return 0


def cmd_effects(args) -> int:
    network = network_from_json(read_json(args.network))
    result = effect_query(
        network,
        args.treatment,
        args.value,
        args.outcome,
        AdjustmentPolicy(args.policy),
    )
    print(json.dumps(result, indent=2))
    if args.out:
        manifest = RunManifest(
            "effects",
            _default_seed(),
            config={
                "treatment": args.treatment,
                "value": args.value,
                "outcome": args.outcome,
                "policy": args.policy,
            },
        )
        manifest.add_input(args.network)
        write_json(result, args.out)
        manifest.add_output(args.out)
        manifest.write(args.out + ".manifest.json")
    return 0


def cmd_path(args) -> int:
    timer = StageTimer()
    manifest = RunManifest(
        "path", _default_seed(), config={"weighting": args.weighting}
    )
    manifest.add_input(args.network)
    manifest.add_input(args.mastery)
    with timer.time("ingest"):
        annotated = annotated_from_json(read_json(args.network))
        state = load_mastery_state(args.mastery, annotated.network.dag.names)
    with timer.time("plan"):
        weighting = WeightPolicy(args.weighting)
        paths = plan(annotated, state, weighting)
        obj = plan_to_json(paths, unmastered_set(state))
    with timer.time("write"):
        write_json(obj, args.out)
        if args.dot:
            with open(args.dot, "w", encoding="utf-8") as fh:
                fh.write(plan_to_dot(annotated, state, paths))
    manifest.add_output(args.out)
    if args.dot:
        manifest.add_output(args.dot)
    manifest.timings = timer.timings
    manifest.write(args.out + ".manifest.json")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SchemaError as exc:
        print(f"causalkc: error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"causalkc: data error: {exc}", file=sys.stderr)
        return 2
    except CapacityError as exc:
        print(f"causalkc: capacity error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
