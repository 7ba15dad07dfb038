"""Experiment drivers behind the CLI subcommands.

Every driver takes a resolved config dict (seed mandatory), writes one CSV
with a trailing metadata line, and returns the rows it wrote. Identical
config + seed reproduces identical bytes.
"""

from __future__ import annotations

import numpy as np

from ..beliefs import particle_sample, AgentRecord
from ..dtp import SearchAgent, SearchConfig
from ..games import BudgetExceededError, new_game
from ..last_iterate import (CSV_HEADER, VARIANTS, run_annealed_nash, run_mmd)
from ..policy import JointPolicy, TabularPolicy, load_joint, save_joint
from ..rng import RngStream
from ..solver import best_response, exploitability
from ..updates import (UpdateParams, anneal_schedule, convergence_params,
                       parse_schedule_fn, Schedule)
from .csvio import metadata_line, write_csv
from .match import (FirstLegalAgent, PolicyAgent, UniformAgent, bootstrap_ci,
                    run_match_games)


class ConfigError(ValueError):
    pass


def _require(config, key, cast=str):
    if key not in config or config[key] in ("", None):
        raise ConfigError(f"missing required config key {key!r}")
    try:
        return cast(config[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key!r}: {exc}") from None


def _get(config, key, default, cast):
    if key not in config or config[key] in ("", None):
        return default
    try:
        return cast(config[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key!r}: {exc}") from None


def _bool(x):
    if isinstance(x, bool):
        return x
    return str(x).lower() in ("1", "true", "yes", "on")


def make_game(config):
    name = _require(config, "game")
    params = {}
    if name == "abrupt_dark_hex":
        params["size"] = _get(config, "size", 2, int)
    if name == "random_common_payoff":
        params["seed"] = _get(config, "game_seed", 0, int)
        params["size"] = _get(config, "size", 4, int)
        params["branching"] = _get(config, "branching", 3, int)
        params["deals"] = _get(config, "deals", 2, int)
    return new_game(name, **params)


def _empty_uniform_joint(game):
    return JointPolicy([TabularPolicy(p) for p in range(game.num_players)])


def _start_policy(config, game):
    path = config.get("policy")
    if path:
        return load_joint(path, game.num_players)
    from ..policy import uniform_joint
    return uniform_joint(game)


def run_convergence(config) -> list:
    """Fixed-temperature convergence run; logs the soft gap per iteration."""
    game = make_game(config)
    if not (game.is_zero_sum and game.num_players == 2):
        raise ConfigError("converge requires a two-player zero-sum game")
    seed = _require(config, "seed", int)
    variant = _get(config, "variant", "standard", str)
    if variant not in VARIANTS:
        raise ConfigError(f"unknown variant {variant!r}; known: {VARIANTS}")
    iters = _get(config, "iters", 10_000, int)
    eta_default, alpha_default = convergence_params(game.name, variant)
    alpha = _get(config, "alpha", alpha_default, float)
    eta = _get(config, "eta", eta_default, float)
    metric_every = _get(config, "metric_every", 1, int)
    joint0 = _start_policy(config, game)
    params = UpdateParams("mmd", eta=eta, alpha=alpha)
    final, log = run_mmd(game, joint0, "uniform", params, iters,
                         variant=variant, feedback="aqre_soft",
                         metric_every=metric_every)
    out = _require(config, "out")
    rows = log.csv_lines()[1:]
    write_csv(out, CSV_HEADER, rows, config, seed)
    if config.get("out_policy"):
        save_joint(final, config["out_policy"])
    return rows


def run_annealed(config) -> list:
    """Annealed equilibrium run with per-iteration exploitability."""
    game = make_game(config)
    if not (game.is_zero_sum and game.num_players == 2):
        raise ConfigError("anneal requires a two-player zero-sum game")
    seed = _require(config, "seed", int)
    variant = _get(config, "variant", "standard", str)
    if variant not in VARIANTS:
        raise ConfigError(f"unknown variant {variant!r}; known: {VARIANTS}")
    objective = _get(config, "objective", "plain", str)
    if objective not in ("plain", "minimaxent"):
        raise ConfigError(f"unknown objective {objective!r}")
    iters = _get(config, "iters", 10_000, int)
    metric_every = _get(config, "metric_every", 1, int)
    if config.get("eta_schedule") or config.get("alpha_schedule"):
        sched = Schedule(parse_schedule_fn(_require(config, "eta_schedule")),
                         parse_schedule_fn(_require(config, "alpha_schedule")))
    else:
        try:
            sched = anneal_schedule(game.name, variant, objective)
        except KeyError as exc:
            raise ConfigError(str(exc)) from None
    joint0 = _start_policy(config, game)
    final, log = run_annealed_nash(game, joint0, sched, iters,
                                   variant=variant, objective=objective,
                                   metric_every=metric_every)
    out = _require(config, "out")
    rows = log.csv_lines()[1:]
    write_csv(out, CSV_HEADER, rows, config, seed)
    if config.get("out_policy"):
        save_joint(final, config["out_policy"])
    return rows


def _agent_from_spec(spec: str, game, config, role: str):
    """Agent spec strings: uniform | first_legal | policy:<file> |
    br:<file> | mds | mmds | mcs (search agents use the blueprint/knob
    keys '<role>_*' or the shared ones)."""
    spec = spec.strip()
    if spec == "uniform":
        return UniformAgent()
    if spec == "first_legal":
        return FirstLegalAgent()
    if spec.startswith("policy:"):
        return PolicyAgent(load_joint(spec[7:], game.num_players))
    if spec.startswith("br:"):
        target = load_joint(spec[3:], game.num_players)
        brs = [best_response(game, target, p)[0] for p in range(2)]
        return PolicyAgent(JointPolicy(brs))
    if spec in ("mcs", "mds", "mmds"):
        def knob(name, default, cast):
            return _get(config, f"{role}_{name}",
                        _get(config, name, default, cast), cast)
        bp_path = config.get(f"{role}_blueprint") or config.get("blueprint")
        blueprint = (load_joint(bp_path, game.num_players) if bp_path
                     else _empty_uniform_joint(game))
        kind = {"mcs": "policy_iteration", "mds": "hedge", "mmds": "mmd"}[spec]
        params = UpdateParams(kind, eta=knob("eta", 50.0, float),
                              alpha=knob("alpha", 0.01, float))
        sc = SearchConfig(
            update=params,
            belief=knob("belief", "particles", str),
            particles=knob("particles", 10, int),
            max_attempts=knob("max_attempts", 0, int),
            num_histories=knob("histories", 1000, int),
            selection=knob("selection", None, str) or None,
        )
        return SearchAgent(game, spec, blueprint, sc)
    raise ConfigError(f"unknown agent spec {spec!r}")


MATCH_HEADER = ("agent,spec,games,mean_return,ci_lower,ci_upper,"
                "seat0_mean,seat1_mean")


def run_match(config) -> list:
    """Seat-alternating head-to-head match with bootstrap CIs."""
    game = make_game(config)
    seed = _require(config, "seed", int)
    n_games = _get(config, "games", 1000, int)
    if n_games < 1:
        raise ConfigError("games must be >= 1")
    spec_a = _require(config, "agent0")
    spec_b = _require(config, "agent1")
    agent_a = _agent_from_spec(spec_a, game, config, "agent0")
    agent_b = _agent_from_spec(spec_b, game, config, "agent1")
    ra, rb, seat_a = run_match_games(game, agent_a, agent_b, n_games, seed)
    gen = RngStream(seed, 1 << 32).generator()
    resamples = _get(config, "resamples", 10_000, int)
    rows = []
    for name, spec, rets, seats in (("agent0", spec_a, ra, seat_a),
                                    ("agent1", spec_b, rb, 1 - seat_a)):
        lo, hi = bootstrap_ci(rets, gen, resamples)
        s0 = rets[seats == 0]
        s1 = rets[seats == 1]
        rows.append([name, spec, n_games, float(rets.mean()), lo, hi,
                     float(s0.mean()) if len(s0) else None,
                     float(s1.mean()) if len(s1) else None])
    out = _require(config, "out")
    write_csv(out, MATCH_HEADER, rows, config, seed)
    return rows


SWEEP_HEADER = "eta,games,mean_return,ci_lower,ci_upper"


def run_stepsize_sweep(config) -> list:
    """Self-play mean return of two search agents across a stepsize grid
    (common-payoff games only)."""
    game = make_game(config)
    if not game.is_common_payoff:
        raise ConfigError("sweep requires a common-payoff game")
    seed = _require(config, "seed", int)
    grid_text = _require(config, "etas")
    etas = [float(x) for x in str(grid_text).split(",") if x.strip() != ""]
    if not etas:
        raise ConfigError("empty stepsize grid")
    if len(set(etas)) != len(etas):
        raise ConfigError("duplicate stepsize values in the grid")
    n_games = _get(config, "games", 200, int)
    histories = _get(config, "histories", 200, int)
    resamples = _get(config, "resamples", 10_000, int)
    rows = []
    for j, eta in enumerate(etas):
        params = UpdateParams("hedge", eta=eta)
        sc = SearchConfig(update=params, belief="exact",
                          num_histories=histories, selection="sample")
        agents = [SearchAgent(game, "mds", _empty_uniform_joint(game), sc)
                  for _ in range(2)]
        rets = np.empty(n_games)
        for g in range(n_games):
            gen = RngStream(seed, (j << 24) + g).generator()
            from .match import play_game
            rets[g] = play_game(game, agents, gen)[0]
        gen = RngStream(seed, (1 << 32) + j).generator()
        lo, hi = bootstrap_ci(rets, gen, resamples)
        rows.append([eta, n_games, float(rets.mean()), lo, hi])
    out = _require(config, "out")
    write_csv(out, SWEEP_HEADER, rows, config, seed)
    return rows


EXPLOIT_HEADER = "source,t,exploitability"


def run_exploitability_eval(config) -> list:
    """Exact exploitability of stored policies, or extraction of the
    exploitability column from an iterate log."""
    seed = _require(config, "seed", int)
    path = _require(config, "input")
    rows = []
    with open(path) as f:
        first = f.readline().strip()
    if first == CSV_HEADER:
        with open(path) as f:
            next(f)
            for line in f:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                parts = line.split(",")
                if parts[5] != "":
                    rows.append([path, int(parts[0]), float(parts[5])])
    else:
        game = make_game(config)
        joint = load_joint(path, game.num_players)
        from ..games import DEFAULT_NODE_BUDGET
        budget = _get(config, "budget", DEFAULT_NODE_BUDGET, int)
        rows.append([path, None, exploitability(game, joint, budget=budget)])
    out = _require(config, "out")
    write_csv(out, EXPLOIT_HEADER, rows, config, seed)
    return rows
