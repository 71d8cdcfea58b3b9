"""Command-line entry points.

    tacit run --config cfg.json --out results/ [--seed N] [--reps N]
    tacit validate-cascades --config cfg.json [--seeds N]
    tacit replay --log results/

`run` executes the full counterfactual experiment grid and writes all
result CSVs. `validate-cascades` checks the veracity ordering of cascade
shapes over seeded unmitigated runs and exits nonzero if any ordering
fails the 80 percent majority. `replay` recomputes metrics from a result
directory's CSVs and exits nonzero on any mismatch.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .experiment import ExperimentConfig, run_experiment, validate_cascade_ordering
from .replay import replay_outputs


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tacit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the counterfactual experiment grid")
    p_run.add_argument("--config", required=True, help="experiment config JSON")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--seed", type=int, default=None, help="override master_seed")
    p_run.add_argument("--reps", type=int, default=None, help="override repetitions")

    p_val = sub.add_parser("validate-cascades", help="check cascade-shape orderings by veracity")
    p_val.add_argument("--config", required=True)
    p_val.add_argument("--seeds", type=int, default=10)

    p_rep = sub.add_parser("replay", help="recompute metrics from exported CSVs")
    p_rep.add_argument("--log", required=True, help="experiment output directory")

    return parser


def cmd_run(args) -> int:
    overrides = {}
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.reps is not None:
        overrides["repetitions"] = args.reps
    cfg = ExperimentConfig.from_json(args.config, **overrides)
    result = run_experiment(cfg, args.out)
    print(f"completed repetitions: {result.completed_reps}")
    if result.failed_reps:
        print(f"FAILED repetitions: {result.failed_reps}", file=sys.stderr)
    for name in result.mitigation_names:
        mean, se = result.agg_ate[(name, "network")]
        print(f"  network ATE {name}: {mean:+.5f} +/- {se:.5f}")
    print(f"outputs written to {result.out_dir}")
    return 1 if result.failed_reps else 0


def cmd_validate(args) -> int:
    cfg = ExperimentConfig.from_json(args.config)
    outcomes = validate_cascade_ordering(cfg, seeds=args.seeds)
    condition_names = list(outcomes[0].conditions)
    print(f"{'seed':>4}  " + "  ".join(f"{c:>20}" for c in condition_names))
    for o in outcomes:
        print(f"{o.seed:>4}  " + "  ".join(f"{str(o.conditions[c]):>20}" for c in condition_names))
    failed = []
    needed = int(0.8 * len(outcomes))
    for cond in condition_names:
        held = sum(1 for o in outcomes if o.conditions[cond])
        status = "ok" if held >= needed else "FAIL"
        print(f"{cond}: {held}/{len(outcomes)} seeds [{status}]")
        if held < needed:
            failed.append(cond)
    return 1 if failed else 0


def cmd_replay(args) -> int:
    report = replay_outputs(args.log)
    for check in report.checks:
        print(f"[{'ok' if check.ok else 'FAIL'}] {check.name} {check.detail}")
    print(f"replay: {sum(c.ok for c in report.checks)}/{len(report.checks)} checks passed")
    return 0 if report.ok else 1


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(name)s %(message)s")
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return cmd_run(args)
    if args.command == "validate-cascades":
        return cmd_validate(args)
    if args.command == "replay":
        return cmd_replay(args)
    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
