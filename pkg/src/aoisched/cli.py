"""Command-line entry point.

Subcommands:
  run          simulate an experiment config and write the results CSV
  verify       run the invariant suite; exit status 1 on any failure
  gen-channel  sample a channel pattern file from a channel spec
  opt          exact offline optimum for a stored pattern
"""

from __future__ import annotations

import argparse
import json
import sys

from .channels import MarkovChannelSpec, gen_adversarial, gen_markov
from .errors import CapacityError, ConfigurationError
from .harness import ExperimentConfig, run_experiment, verify_suite
from .model import CostSchedule, load_pattern, save_pattern
from .oracle import dual_lower_bound, solve_opt_dp


def _cmd_run(args) -> int:
    config = ExperimentConfig.from_json(args.config)
    rows = run_experiment(config)
    if config.csv_path:
        print(f"wrote {len(rows)} rows to {config.csv_path}")
    else:
        print(f"simulated {len(rows)} rows (no csv_path configured)")
    return 0


def _cmd_verify(args) -> int:
    with open(args.config, encoding="utf-8") as fh:
        cfg = json.load(fh)
    report = verify_suite(cfg)
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0 if report["all_passed"] else 1


def _cmd_gen_channel(args) -> int:
    with open(args.spec, encoding="utf-8") as fh:
        spec_data = json.load(fh)
    kind = spec_data.get("type", "markov")
    if kind == "markov":
        spec = MarkovChannelSpec.from_json_dict(spec_data)
        pattern = gen_markov(spec, args.n_users, args.horizon)
    elif kind == "adversarial":
        pattern = gen_adversarial(
            spec_data["family"],
            spec_data.get("params", {}),
            args.n_users,
            args.horizon,
            int(spec_data.get("seed", 0)),
        )
    else:
        raise ConfigurationError(f"unknown channel spec type {kind!r}")
    save_pattern(pattern, args.out)
    print(f"wrote {pattern.n_users}x{pattern.horizon} pattern to {args.out}")
    return 0


def _load_costs(path) -> CostSchedule:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if "costs" in data:
        return CostSchedule(tuple(float(c) for c in data["costs"]))
    if "c1" in data:
        return CostSchedule.linear(
            float(data["c1"]), float(data.get("step", 0.0)), int(data["m_levels"])
        )
    raise ConfigurationError("costs JSON needs either 'costs' or 'c1'/'step'/'m_levels'")


def _cmd_opt(args) -> int:
    pattern = load_pattern(args.pattern)
    costs = _load_costs(args.costs)
    try:
        result = solve_opt_dp(pattern, costs)
    except CapacityError as exc:
        bound = dual_lower_bound(pattern, costs)
        print(f"error: {exc}", file=sys.stderr)
        print(f"certified lower bound on the optimum: {bound!r}", file=sys.stderr)
        return 2
    print(
        json.dumps(
            {
                "opt_cost": result.opt_cost,
                "decisions": list(result.decisions),
                "states_expanded": result.states_expanded,
                "wall_time": result.wall_time,
            }
        )
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aoisched",
        description="Broadcast scheduling for timely updates: simulators and certificates.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate an experiment config")
    p_run.add_argument("--config", required=True, help="experiment config JSON")
    p_run.set_defaults(fn=_cmd_run)

    p_verify = sub.add_parser("verify", help="run the invariant suite")
    p_verify.add_argument("--config", required=True, help="verify config JSON")
    p_verify.set_defaults(fn=_cmd_verify)

    p_gen = sub.add_parser("gen-channel", help="sample a channel pattern file")
    p_gen.add_argument("--spec", required=True, help="channel spec JSON")
    p_gen.add_argument("--out", required=True, help="output pattern JSON")
    p_gen.add_argument("--n-users", type=int, required=True)
    p_gen.add_argument("--horizon", type=int, required=True)
    p_gen.set_defaults(fn=_cmd_gen_channel)

    p_opt = sub.add_parser("opt", help="exact offline optimum of a pattern")
    p_opt.add_argument("--pattern", required=True, help="pattern JSON file")
    p_opt.add_argument("--costs", required=True, help="cost schedule JSON file")
    p_opt.set_defaults(fn=_cmd_opt)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
