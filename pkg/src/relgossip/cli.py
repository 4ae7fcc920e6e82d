"""Command-line front end: ``solve``, ``simulate``, ``sweep`` and ``limit``.

Exit codes: 0 on success, 2 on usage errors (bad flags or parameter values),
1 on runtime failures such as an unwritable output file.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from typing import Any, Dict, List, Optional, Sequence

from .model import InvalidParameters, Params, Policy
from .simulator import SimConfig, run
from .solver import large_gossip_limit, solve
from .sweep import (
    CSV_COLUMNS,
    SWEEPABLE,
    SweepSpec,
    default_grid,
    evaluate_point,
    fmt,
    iter_sweep,
    parse_grid,
    round12,
    write_rows,
)

DEFAULTS: Dict[str, Any] = {
    "n": 100,
    "lambda_e": 2.0,
    "lambda_u": 5.0,
    "lambda_r": 1.0,
    "lambda": 0.1,
    "policy": "reliability",
    "horizon": 1e6,
    "warmup": None,
    "seed": 0,
    "replications": 1,
    "all_k": False,
    "compare": False,
    "param": None,
    "grid": None,
    "out": None,
}


class UsageError(Exception):
    pass


def _add_param_flags(p: argparse.ArgumentParser, policy_choices: Sequence[str]) -> None:
    p.add_argument("--config", help="JSON file of key/value pairs mirroring the flags")
    p.add_argument("--n", type=int, help="number of user nodes (default 100)")
    p.add_argument("--lambda-e", dest="lambda_e", type=float, help="event update rate (default 2)")
    p.add_argument("--lambda-u", dest="lambda_u", type=float, help="unreliable source total rate (default 5)")
    p.add_argument("--lambda-r", dest="lambda_r", type=float, help="reliable source total rate (default 1)")
    p.add_argument("--lambda", dest="lambda", type=float, help="per-node gossip rate (default 0.1)")
    p.add_argument("--policy", choices=policy_choices, help="acceptance policy (default reliability)")


def _add_sim_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--horizon", type=float, help="simulated time per replication (default 1e6)")
    p.add_argument("--warmup", type=float, help="time excluded from averages (default horizon/1000)")
    p.add_argument("--seed", type=int, help="base seed; replication r uses seed + r (default 0)")
    p.add_argument("--replications", type=int, help="independent replications (default 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relgossip",
        description="Reliable/unreliable-source gossip: exact recursions and simulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    policies = [p.value for p in Policy]

    p = sub.add_parser("solve", help="evaluate the recursions for F and x1")
    _add_param_flags(p, policies)
    p.add_argument("--all-k", dest="all_k", action="store_true", default=None,
                   help="print every chain for k = 1..n")

    p = sub.add_parser("simulate", help="Monte Carlo estimate of F and x1")
    _add_param_flags(p, policies)
    _add_sim_flags(p)
    p.add_argument("--out", help="also write the result as a one-row sweep CSV")

    p = sub.add_parser("sweep", help="sweep one parameter and write a CSV")
    _add_param_flags(p, policies + ["both"])
    _add_sim_flags(p)
    p.add_argument("--param", choices=sorted(SWEEPABLE), help="parameter to sweep")
    p.add_argument("--grid", help="comma-separated, strictly increasing values")
    p.add_argument("--compare", action="store_true", default=None,
                   help="also simulate every grid point")
    p.add_argument("--out", help="CSV output path")

    p = sub.add_parser("limit", help="unreliable fraction in the large-gossip limit")
    _add_param_flags(p, policies)
    return parser


def _load_config(path: Optional[str]) -> Dict[str, Any]:
    if not path:
        return {}
    try:
        with open(path) as handle:
            raw = json.load(handle)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise UsageError(f"config {path} must hold a JSON object")
    config = {}
    for key, value in raw.items():
        norm = key.lstrip("-").replace("-", "_")
        if norm not in DEFAULTS:
            raise UsageError(f"unknown config key {key!r}")
        config[norm] = value
    return config


def _resolve(args: argparse.Namespace) -> Dict[str, Any]:
    """Flags override the config file, which overrides the defaults."""
    settings = dict(DEFAULTS)
    settings.update(_load_config(args.config))
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    return settings


def _params(s: Dict[str, Any], policy: Optional[str] = None) -> Params:
    return Params(
        n=s["n"],
        lambda_e=round12(s["lambda_e"]),
        lambda_u=round12(s["lambda_u"]),
        lambda_r=round12(s["lambda_r"]),
        lam=round12(s["lambda"]),
        policy=Policy(policy or s["policy"]),
    )


def _sim_config(s: Dict[str, Any], params: Params) -> SimConfig:
    return SimConfig(params, s["horizon"], s["warmup"], s["seed"], s["replications"])


def _header(params: Params) -> List[str]:
    return [
        f"policy        {params.policy.value}",
        f"n             {params.n}",
        f"lambda_e      {fmt(params.lambda_e)}",
        f"lambda_u      {fmt(params.lambda_u)}",
        f"lambda_r      {fmt(params.lambda_r)}",
        f"lambda        {fmt(params.lam)}",
    ]


def cmd_solve(s: Dict[str, Any]) -> str:
    params = _params(s)
    chains = solve(params)
    lines = _header(params)
    lines.append(f"F             {fmt(chains.f_value)}")
    lines.append(f"x1            {fmt(chains.x1_value)}")
    if s["all_k"]:
        names = [c for c in "abcde" if getattr(chains, c) is not None]
        lines.append("")
        lines.append("\t".join(["k"] + names))
        for k in range(1, params.n + 1):
            lines.append("\t".join([str(k)] + [fmt(chains.at(c, k)) for c in names]))
    return "\n".join(lines)


def cmd_simulate(s: Dict[str, Any]) -> str:
    params = _params(s)
    config = _sim_config(s, params)
    est = run(config)
    lines = _header(params) + [
        f"horizon       {fmt(config.horizon)}",
        f"warmup        {fmt(config.warmup)}",
        f"seed          {config.seed}",
        f"replications  {config.replications}",
        f"events        {est.events_processed}",
        f"f_hat         {fmt(est.f_hat)}  (stderr {fmt(est.f_stderr)})",
        f"x1_hat        {fmt(est.x1_hat)}  (stderr {fmt(est.x1_stderr)})",
    ]
    try:
        row = evaluate_point(params)
    except InvalidParameters:
        row = None
    if row is not None:
        lines.append(f"f_solver      {fmt(row.f_solver)}")
        lines.append(f"x1_solver     {fmt(row.x1_solver)}")
    if s["out"]:
        if row is None:
            raise UsageError("--out needs parameters the solver accepts")
        row = replace(
            row,
            f_sim=est.f_hat, f_sim_stderr=est.f_stderr,
            x1_sim=est.x1_hat, x1_sim_stderr=est.x1_stderr,
            horizon=config.horizon, warmup=config.warmup,
            seed=config.seed, replications=config.replications,
        )
        write_rows([row], s["out"])
    return "\n".join(lines)


def cmd_sweep(s: Dict[str, Any]) -> str:
    if not s["param"]:
        raise UsageError("sweep needs --param")
    if not s["out"]:
        raise UsageError("sweep needs --out")
    swept = s["param"]
    grid = parse_grid(s["grid"], swept) if s["grid"] else default_grid(swept)
    if s["policy"] == "both":
        policies = [Policy.RELIABILITY, Policy.FRESHNESS]
    else:
        policies = [Policy(s["policy"])]
    base = _params(s, policies[0].value)
    spec = SweepSpec(
        swept=swept,
        grid=grid,
        base=base,
        policies=policies,
        compare=bool(s["compare"]),
        horizon=s["horizon"],
        warmup=s["warmup"],
        seed=s["seed"],
        replications=s["replications"],
    )

    def progress(row) -> None:
        print(f"{swept}={fmt(row.swept_value)} {row.params.policy.value}: "
              f"F={fmt(row.f_solver)} x1={fmt(row.x1_solver)}", file=sys.stderr)

    count = write_rows(iter_sweep(spec), s["out"], on_row=progress)
    return f"wrote {count} rows ({len(CSV_COLUMNS)} columns) to {s['out']}"


def cmd_limit(s: Dict[str, Any]) -> str:
    return fmt(large_gossip_limit(_params(s)))


COMMANDS = {
    "solve": cmd_solve,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "limit": cmd_limit,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        report = COMMANDS[args.command](_resolve(args))
    except (UsageError, InvalidParameters, ValueError, TypeError) as exc:
        print(f"relgossip {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, RuntimeError) as exc:
        print(f"relgossip {args.command}: failed: {exc}", file=sys.stderr)
        return 1
    print(report)
    return 0


if __name__ == "__main__":
    sys.exit(main())
