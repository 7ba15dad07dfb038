"""Decision-time planning agents: Monte Carlo search, mirror descent
search, and magnetic mirror descent search.

One search: sample histories consistent with the agent's record (exact
posterior or particle filter), roll out every legal action once per
history with everyone following the blueprint afterwards, average the
returns, and apply the local update to the blueprint's distribution at the
current key. The agent always plays the searched policy; only when the
belief source comes back empty does it fall back to the blueprint.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import backend
from .beliefs import AgentRecord, ParticleSet, particle_sample
from .games import CHANCE, Game, HistoryState, encode_key
from .policy import JointPolicy
from .rng import as_generator, draw_index
from .solver import posterior
from .updates import UpdateParams, hedge_update, mmd_update, pi_update

SEARCH_KINDS = ("mcs", "mds", "mmds")


class QEstimate:
    """Running per-action return means with compensated accumulation.

    Every sampled history contributes one rollout per action, so counts
    stay equal across actions.
    """

    def __init__(self, actions):
        self.actions = list(actions)
        k = len(self.actions)
        self.sums = np.zeros(k)
        self.comp = np.zeros(k)
        self.counts = np.zeros(k, dtype=np.int64)

    def add(self, slot: int, value: float):
        y = value - self.comp[slot]
        t = self.sums[slot] + y
        self.comp[slot] = (t - self.sums[slot]) - y
        self.sums[slot] = t
        self.counts[slot] += 1

    @property
    def means(self) -> np.ndarray:
        out = np.zeros(len(self.actions))
        nz = self.counts > 0
        out[nz] = self.sums[nz] / self.counts[nz]
        return out

    @property
    def num_histories(self) -> int:
        return int(self.counts[0]) if len(self.actions) else 0


@dataclass(frozen=True)
class SearchConfig:
    """How a search agent estimates and updates.

    belief: "exact" (full-tree posterior sampling) or "particles".
    Budget: with exact beliefs, ``num_histories`` samples (or keep sampling
    until ``time_limit`` seconds); with particles, each surviving particle
    is used exactly once. selection=None takes the per-kind default
    (argmax for MCS/MDS, sample for MMDS).
    """
    update: UpdateParams = UpdateParams("mmd", eta=1.0, alpha=0.0)
    belief: str = "exact"
    particles: int = 10
    max_attempts: int = 0          # 0 -> 1000 * particles
    num_histories: int = 1000
    time_limit: Optional[float] = None
    selection: Optional[str] = None

    def __post_init__(self):
        if self.belief not in ("exact", "particles"):
            raise ValueError(f"unknown belief source {self.belief!r}")
        if self.num_histories < 1:
            raise ValueError("budget must allow at least one history")
        if self.selection not in (None, "sample", "argmax"):
            raise ValueError(f"unknown selection {self.selection!r}")


def _is_trivially_uniform(joint: JointPolicy) -> bool:
    return all(len(p.table) == 0 for p in joint.policies)


def rollout_return(game: Game, joint: JointPolicy, h: HistoryState,
                   forced_action: int, agent: int, gen,
                   uniform_bp: Optional[bool] = None) -> float:
    """Force one action at ``h``, then everyone follows the joint policy
    to the end; returns the agent's realized return."""
    if uniform_bp is None:
        uniform_bp = _is_trivially_uniform(joint)
    sim = h._sim.clone()
    if uniform_bp:
        bufs = None
    else:
        bufs = [list(h.events(p)) for p in range(game.num_players)]
    a = forced_action
    while True:
        step = sim.apply(a)
        if bufs is not None:
            for p in range(game.num_players):
                bufs[p].extend(step[p])
        if sim.is_terminal():
            return sim.returns()[agent]
        p = sim.current_player()
        if p == CHANCE:
            outs = sim.chance_outcomes()
            a = outs[draw_index(gen, [o.probability for o in outs])].action
        else:
            legal = sim.legal_actions()
            if uniform_bp:
                a = legal[draw_index(gen, [1.0 / len(legal)] * len(legal))]
            else:
                dist = joint[p].get(encode_key(p, bufs[p]), len(legal))
                a = legal[draw_index(gen, dist)]


def _board_kernel_args(game):
    """(kind, size) when the game has a compiled simulation twin."""
    name = type(game).__name__
    if name == "AbruptDarkHex":
        return 0, game.size
    if name == "PhantomTicTacToe":
        return 1, 3
    return None


def estimate_q(game: Game, joint: JointPolicy, record: AgentRecord,
               config: SearchConfig, rng) -> QEstimate:
    """Alg.-style action-value estimation at the record's decision point.

    Exact beliefs draw ``num_histories`` posterior samples; particles use
    each accepted particle once. Returns a QEstimate with zero histories
    when no consistent history could be found (particle fallback case).
    """
    gen = as_generator(rng)
    uniform_bp = _is_trivially_uniform(joint)
    if config.belief == "particles":
        core = backend.board_kernels()
        board = _board_kernel_args(game) if core is not None else None
        if board is not None and uniform_bp:
            kind, size = board
            tags = np.array([e[0] for e in record.events], dtype=np.int32)
            vals = np.array([e[1] for e in record.events], dtype=np.int32)
            max_attempts = config.max_attempts or 1000 * config.particles
            legal, means, counts = core.board_particle_q(
                kind, size, tags, vals, record.player, config.particles,
                max_attempts, gen.bit_generator)
            est = QEstimate([int(a) for a in legal])
            est.sums = means * counts
            est.counts = counts.astype(np.int64)
            est.means_override = means
            return est
        ps = particle_sample(game, joint, record, config.particles,
                             config.max_attempts, gen)
        histories = ps.particles
        if not histories:
            return QEstimate([])
        legal = histories[0].legal_actions()
        est = QEstimate(legal)
        for h in histories:
            for slot, a in enumerate(legal):
                est.add(slot, rollout_return(game, joint, h, a, record.player,
                                             gen, uniform_bp))
        return est
    # exact posterior sampling
    post = posterior(game, joint, record.key())
    probs = [p for _, p in post.items]
    legal = post.items[0][0].legal_actions()
    est = QEstimate(legal)
    deadline = None if config.time_limit is None else \
        time.monotonic() + config.time_limit
    n = 0
    while True:
        h = post.items[draw_index(gen, probs)][0]
        for slot, a in enumerate(legal):
            est.add(slot, rollout_return(game, joint, h, a, record.player,
                                         gen, uniform_bp))
        n += 1
        if deadline is not None:
            if time.monotonic() >= deadline:
                break
        elif n >= config.num_histories:
            break
    return est


def _q_means(est: QEstimate) -> np.ndarray:
    override = getattr(est, "means_override", None)
    return est.means if override is None else override


def search_step(game: Game, joint: JointPolicy, record: AgentRecord,
                kind: str, config: SearchConfig, gen):
    """One full search at the current decision point.

    Returns (action, searched local policy or None on blueprint fallback,
    QEstimate or None)."""
    if kind not in SEARCH_KINDS:
        raise ValueError(f"unknown search kind {kind!r}; known: {SEARCH_KINDS}")
    est = estimate_q(game, joint, record, config, gen)
    if est.num_histories == 0:
        # blueprint fallback: no consistent history found
        legal = game.record_legal_actions(record.events)
        pibar = joint[record.player].get(record.key(), len(legal))
        return legal[draw_index(gen, pibar)], None, None
    pibar = joint[record.player].get(record.key(), len(est.actions))
    qbar = _q_means(est)
    u = config.update
    if kind == "mcs":
        prime = pi_update(pibar, qbar)
    elif kind == "mds":
        prime = hedge_update(pibar, qbar, u.eta)
    else:
        rho = _magnet_at(u, record, len(est.actions))
        prime = mmd_update(pibar, qbar, rho, u.eta, u.alpha)
    selection = config.selection or ("sample" if kind == "mmds" else "argmax")
    if selection == "argmax":
        action = est.actions[int(np.argmax(prime))]
    else:
        action = est.actions[draw_index(gen, prime)]
    return action, prime, est


def _magnet_at(u: UpdateParams, record: AgentRecord, k: int) -> np.ndarray:
    if isinstance(u.magnet, str):
        if u.magnet != "uniform":
            raise ValueError(f"unknown magnet spec {u.magnet!r}")
        return np.full(k, 1.0 / k)
    return u.magnet.get(record.key(), k)


def mcs_act(game, blueprint, record, config, rng) -> int:
    return search_step(game, blueprint, record, "mcs", config,
                       as_generator(rng))[0]


def mds_act(game, blueprint, record, config, rng) -> int:
    return search_step(game, blueprint, record, "mds", config,
                       as_generator(rng))[0]


def mmds_act(game, blueprint, record, config, rng) -> int:
    return search_step(game, blueprint, record, "mmds", config,
                       as_generator(rng))[0]


class SearchAgent:
    """Stateful online agent: feed it observation events, ask for actions.
    It always plays its searched policy (no validation gate)."""

    def __init__(self, game: Game, kind: str, blueprint: JointPolicy,
                 config: SearchConfig):
        if kind not in SEARCH_KINDS:
            raise ValueError(f"unknown search kind {kind!r}")
        self.game = game
        self.kind = kind
        self.blueprint = blueprint
        self.config = config
        self.record: Optional[AgentRecord] = None

    def reset(self, seat: int):
        self.record = AgentRecord(seat)

    def observe(self, event):
        if self.record is None:
            raise RuntimeError("observe() before reset()")
        self.record.observe(event)

    def act(self, rng, legal=None) -> int:
        if self.record is None:
            raise RuntimeError("act() before the game started")
        return search_step(self.game, self.blueprint, self.record, self.kind,
                           self.config, as_generator(rng))[0]


def search_agent(game, kind, blueprint, config) -> SearchAgent:
    return SearchAgent(game, kind, blueprint, config)
