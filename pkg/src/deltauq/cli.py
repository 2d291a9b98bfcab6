"""Command-line entry point.

Subcommands: ``generate`` (dataset to CSV), ``fit`` (single model),
``run`` (full scenario to CSVs), ``verify`` (certification suites;
exits nonzero on any failed check). Flags override config-file values.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import verify as verify_mod
from .exceptions import NumericalError, ValidationError
from .experiments import (
    ExperimentConfig,
    emit_csv,
    generate_dataset,
    load_config,
    run_scenario,
    write_dataset_csv,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="deltauq",
        description=(
            "Delta-method prediction uncertainty for parametric regression "
            "models, and numerical checks of how overparameterization "
            "changes it."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file (flags override it)")
        p.add_argument("--seed", type=int, help="dataset RNG seed override")
        p.add_argument("--out", help="output directory override")

    p = sub.add_parser("generate", help="write the simulation dataset to dataset.csv")
    common(p)

    p = sub.add_parser("fit", help="fit one model and print the estimate summary")
    common(p)
    p.add_argument(
        "--model",
        required=True,
        help=(
            "model tag: canonical_nonlinear, over_cat1_nonlinear, "
            "canonical_linear, over_cat2_linear(j), mlp_hidden(k)"
        ),
    )
    p.add_argument("--restarts", type=int, help="multistart restart count override")

    p = sub.add_parser("run", help="run a scenario end to end and emit CSVs")
    common(p)
    p.add_argument("--scenario", choices=("cat1_nonlinear", "cat2_linear", "cat2_mlp", "custom"))

    p = sub.add_parser("verify", help="run the certification suites")
    common(p)
    p.add_argument(
        "--full",
        action="store_true",
        help="also run the nonlinear-fit suites (slower)",
    )
    return parser


def _load(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        cfg = replace(cfg, data=replace(cfg.data, seed=args.seed))
    if args.out is not None:
        cfg = replace(cfg, output=args.out)
    if getattr(args, "scenario", None):
        cfg = replace(cfg, scenario=args.scenario)
    if getattr(args, "restarts", None):
        cfg = replace(cfg, fit=replace(cfg.fit, restarts=args.restarts))
    return cfg


def _cmd_generate(args) -> int:
    cfg = _load(args)
    dataset = generate_dataset(cfg)
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    path = write_dataset_csv(dataset, cfg, out / "dataset.csv")
    print(f"wrote {dataset.size} points to {path}")
    return 0


def _cmd_fit(args) -> int:
    cfg = _load(args)
    cfg = replace(cfg, scenario="custom", models=(args.model,))
    result = run_scenario(cfg)
    run = result.runs[0]
    fr = run.fit_result
    print(f"model {run.model_id}: {run.model.param_count} parameters")
    print(
        f"  loss {fr.loss:.6e}  residual variance {fr.residual_variance:.6e}  "
        f"converged {fr.converged}"
    )
    if fr.best_restart_seed is not None:
        print(
            f"  iterations {fr.iterations}  restarts {fr.restarts_used}  "
            f"best restart {fr.best_restart_seed}"
        )
    print(
        f"  information rank {run.report.information_rank}/{run.model.param_count}"
        f"  mean prediction variance {run.prediction.mean_variance:.6e}"
    )
    print("  theta " + " ".join(f"{v:.6g}" for v in fr.theta))
    if args.out is not None:
        paths = emit_csv(result, cfg.output)
        print("wrote " + ", ".join(str(p) for p in paths.values()))
    return 0


def _cmd_run(args) -> int:
    cfg = _load(args)
    result = run_scenario(cfg)
    paths = emit_csv(result, cfg.output)
    print(f"scenario {result.scenario} on {result.dataset.size} points")
    for run in result.runs:
        fr = run.fit_result
        print(
            f"  {run.model_id}: n_params={run.model.param_count} "
            f"lambda_N={fr.residual_variance:.5f} "
            f"rank={run.report.information_rank} "
            f"mean_var={run.prediction.mean_variance:.4e}"
        )
    if result.comparison is not None:
        c = result.comparison
        verdict = "PASS" if c.passed else "FAIL"
        print(
            f"  equivalence {verdict}: max variance difference {c.max_rel_diff:.2%} "
            f"(tolerance {c.tolerance:.0%}, worst at x={c.worst_input:.3f})"
        )
    print("wrote " + ", ".join(str(p) for p in paths.values()))
    return 0


def _cmd_verify(args) -> int:
    cfg = _load(args)
    checks = verify_mod.run_checks(cfg, full=args.full)
    failed = 0
    for check in checks:
        status = "PASS" if check.passed else "FAIL"
        print(f"{status} {check.name}: {check.detail}")
        failed += 0 if check.passed else 1
    if failed:
        print(f"{failed} of {len(checks)} checks failed")
    return 1 if failed else 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "generate": _cmd_generate,
        "fit": _cmd_fit,
        "run": _cmd_run,
        "verify": _cmd_verify,
    }
    try:
        return handlers[args.command](args)
    except (ValidationError, NumericalError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
