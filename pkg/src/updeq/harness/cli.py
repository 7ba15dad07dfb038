"""Command-line surface.

Subcommands: converge, anneal, sweep, match, exploit, selfcheck. Every
run needs a seed and writes one CSV ending in a metadata comment line.
Options may come from a flat key=value config file (--config); explicit
command-line flags override file entries. Exit codes: 0 success, 1
validation error, 2 node-budget error.
"""

from __future__ import annotations

import argparse
import sys

from ..games import BudgetExceededError, InvalidParamsError, UnknownGameError
from .experiments import (ConfigError, run_annealed, run_convergence,
                          run_exploitability_eval, run_match,
                          run_stepsize_sweep)


def load_config_file(path) -> dict:
    out = {}
    with open(path) as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            k, v = line.split("=", 1)
            out[k.strip()] = v.strip()
    return out


_COMMON = [
    ("--config", {"help": "flat key=value config file; flags override it"}),
    ("--seed", {"type": int, "help": "RNG seed (required)"}),
    ("--out", {"help": "output CSV path (required)"}),
    ("--game", {"help": "game name"}),
    ("--size", {"type": int, "help": "board size / game size parameter"}),
    ("--game-seed", {"type": int, "dest": "game_seed",
                     "help": "seed of the random-payoff game instance"}),
    ("--branching", {"type": int}),
    ("--deals", {"type": int}),
]


def _add(parser, extra):
    for flag, kw in _COMMON + extra:
        parser.add_argument(flag, **kw)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="updeq",
        description="Last-iterate solvers and update-equivalent search on "
                    "small imperfect-information games.")
    sub = p.add_subparsers(dest="cmd", required=True)

    c = sub.add_parser("converge", help="fixed-temperature equilibrium run")
    _add(c, [
        ("--variant", {}),
        ("--eta", {"type": float}),
        ("--alpha", {"type": float}),
        ("--iters", {"type": int}),
        ("--metric-every", {"type": int, "dest": "metric_every"}),
        ("--policy", {"help": "starting policy file (default uniform)"}),
        ("--out-policy", {"dest": "out_policy",
                          "help": "write the final policy here"}),
    ])

    a = sub.add_parser("anneal", help="annealed equilibrium run")
    _add(a, [
        ("--variant", {}),
        ("--objective", {"choices": ["plain", "minimaxent"]}),
        ("--schedule", {"help": "schedule for both eta and alpha, e.g. invsqrt:1"}),
        ("--eta-schedule", {"dest": "eta_schedule"}),
        ("--alpha-schedule", {"dest": "alpha_schedule"}),
        ("--iters", {"type": int}),
        ("--metric-every", {"type": int, "dest": "metric_every"}),
        ("--policy", {}),
        ("--out-policy", {"dest": "out_policy"}),
    ])

    s = sub.add_parser("sweep", help="stepsize sweep of self-play search")
    _add(s, [
        ("--etas", {"help": "comma-separated stepsize grid"}),
        ("--games", {"type": int}),
        ("--histories", {"type": int}),
        ("--resamples", {"type": int}),
    ])

    m = sub.add_parser("match", help="seat-alternating head-to-head match")
    _add(m, [
        ("--agent0", {}),
        ("--agent1", {}),
        ("--algo", {"help": "shorthand: agent0=<algo>, agent1=uniform"}),
        ("--games", {"type": int}),
        ("--eta", {"type": float}),
        ("--alpha", {"type": float}),
        ("--particles", {"type": int}),
        ("--histories", {"type": int}),
        ("--belief", {}),
        ("--selection", {}),
        ("--blueprint", {}),
        ("--resamples", {"type": int}),
    ])

    e = sub.add_parser("exploit", help="exact exploitability of stored "
                                       "policies or iterate logs")
    _add(e, [
        ("--input", {"help": "policy file or iterate-log CSV"}),
        ("--budget", {"type": int, "help": "node budget for tree building"}),
    ])

    k = sub.add_parser("selfcheck", help="run the oracle-equivalence suites")
    _add(k, [
        ("--instances", {"type": int, "help": "oracle instance count"}),
    ])
    return p


def resolve_config(args) -> dict:
    config = {}
    if getattr(args, "config", None):
        config.update(load_config_file(args.config))
    for k, v in vars(args).items():
        if k in ("cmd", "config") or v is None:
            continue
        config[k] = v
    if getattr(args, "cmd", None) == "anneal" and config.get("schedule"):
        config.setdefault("eta_schedule", config["schedule"])
        config.setdefault("alpha_schedule", config["schedule"])
    if config.get("algo") and not config.get("agent0"):
        config["agent0"] = config["algo"]
        config.setdefault("agent1", "uniform")
    if "seed" not in config or config["seed"] in ("", None):
        raise ConfigError("a seed is mandatory (--seed or seed= in the config)")
    return config


def run_selfcheck(config) -> list:
    from .csvio import write_csv
    from .oracles import check_updates_against_oracle
    seed = int(config["seed"])
    n = int(config.get("instances", 200))
    rows = []

    max_err, failures = check_updates_against_oracle(n=n, seed=seed)
    ok = failures == 0
    rows.append(["update_closed_form_vs_numeric_oracle",
                 "pass" if ok else "FAIL", repr(max_err), repr(1e-4)])

    from .. import backend
    if backend.compiled_available():
        from ..solver import kernels_equal
        err = kernels_equal()
        rows.append(["compiled_vs_python_kernels",
                     "pass" if err < 1e-10 else "FAIL", repr(err), repr(1e-10)])
    else:
        rows.append(["compiled_vs_python_kernels", "skipped (no extension)",
                     "", ""])

    out = config.get("out")
    if out:
        write_csv(out, "check,status,value,threshold", rows, config, seed)
    for r in rows:
        print(f"[{r[1]:>4}] {r[0]}  value={r[2]} threshold={r[3]}")
    if any(r[1] == "FAIL" for r in rows):
        raise ConfigError("selfcheck found failures")
    return rows


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = resolve_config(args)
        runner = {
            "converge": run_convergence,
            "anneal": run_annealed,
            "sweep": run_stepsize_sweep,
            "match": run_match,
            "exploit": run_exploitability_eval,
            "selfcheck": run_selfcheck,
        }[args.cmd]
        runner(config)
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, UnknownGameError, InvalidParamsError, ValueError,
            OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
