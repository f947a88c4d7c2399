"""Command-line runner.

Exit codes: 0 success, 2 configuration problem, 3 hypothesis failure,
4 numerical failure, 5 I/O failure.
"""

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .coefficients import check_hypotheses
from .errors import HypothesisFailure, NumericsError
from .experiments import (
    PRESETS,
    _build_field,
    compare_runs,
    load_config,
    members_for,
    preset_config,
    run_experiment,
)
from .spectral import fitness_landscape, landscape_to_csv

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_HYPOTHESIS = 3
EXIT_NUMERICS = 4
EXIT_IO = 5


def _common_config(args):
    if args.config:
        cfg = load_config(args.config)
    else:
        if not args.preset:
            raise ValueError("either --config or --preset is required")
        cfg = preset_config(args.preset, args.profile)
    overrides = {}
    if args.out:
        overrides["out_dir"] = args.out
    if args.workers:
        overrides["workers"] = args.workers
    if getattr(args, "run_id", None):
        overrides["run_id"] = args.run_id
    return replace(cfg, **overrides) if overrides else cfg


def _add_config_flags(sub):
    sub.add_argument("--config", help="config file (flat key=value sections)")
    sub.add_argument("--preset", choices=PRESETS, help="named experiment")
    sub.add_argument("--profile", choices=("desk", "full"), default="desk")
    sub.add_argument("--out", help="output directory")
    sub.add_argument("--workers", type=int, help="parallel sweep workers")
    sub.add_argument("--run-id", dest="run_id", help="output file prefix")


def cmd_run(args):
    cfg = _common_config(args)
    manifest = run_experiment(cfg)
    print(f"wrote {manifest['manifest_path']} "
          f"({len(manifest['outputs'])} files, "
          f"{manifest['wall_time_s']:.1f} s)")
    return EXIT_OK


def cmd_landscape(args):
    cfg = _common_config(args)
    field = _build_field(cfg)
    values, node = fitness_landscape(field, cfg.d1, cfg.d2)
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{cfg.run_id}_landscape.csv"
    landscape_to_csv(path, field.grid.nodes, values)
    print(f"wrote {path}; argmax at trait {field.grid.nodes[node]:.6g} "
          f"(node {node})")
    return EXIT_OK


def cmd_compare(args):
    summary = compare_runs(args.manifest_a, args.manifest_b,
                           args.member_a, args.member_b)
    for key in ("run_a", "run_b", "final_argmax_a", "final_argmax_b",
                "final_node_distance", "drift_sign_a", "drift_sign_b",
                "identical"):
        print(f"{key}: {summary[key]}")
    return EXIT_OK


def cmd_check_hypotheses(args):
    cfg = _common_config(args)
    field = _build_field(cfg)
    members = members_for(cfg)
    d_pair = (members[0].d1, members[0].d2) if members else (cfg.d1, cfg.d2)
    report = check_hypotheses(field, *d_pair)
    print(report.summary())
    if report.floor_death_rate is not None:
        print(f"analytic floors: min(1-gamma_a, 1-D) = "
              f"{report.floor_death_rate:.6g}, "
              f"min(1-delta, 1-D) = {report.floor_repair_rate:.6g}, "
              f"ceiling 2+D = {report.ceiling:.6g}")
    for hyp, node, detail in report.violations:
        print(f"  {hyp} violated at node {node}: {detail}")
    return EXIT_OK if report.all_ok else EXIT_HYPOTHESIS


def build_parser():
    parser = argparse.ArgumentParser(
        prog="adaptdyn",
        description="Two-type trait-structured population lab: solver, "
                    "spectral landscapes and experiment presets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a preset or configured experiment")
    _add_config_flags(run)
    run.set_defaults(func=cmd_run)

    land = sub.add_parser("landscape", help="evaluate the fitness landscape")
    _add_config_flags(land)
    land.set_defaults(func=cmd_landscape)

    comp = sub.add_parser("compare", help="compare two run manifests")
    comp.add_argument("manifest_a")
    comp.add_argument("manifest_b")
    comp.add_argument("--member-a", type=int, default=0)
    comp.add_argument("--member-b", type=int, default=0)
    comp.set_defaults(func=cmd_compare)

    check = sub.add_parser("check-hypotheses",
                           help="validate a coefficient field")
    _add_config_flags(check)
    check.set_defaults(func=cmd_check_hypotheses)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except HypothesisFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except NumericsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICS
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
