"""Head-to-head match machinery: baseline agents, the game loop, and
bootstrap confidence intervals.

All agents share one protocol: reset(seat), observe(event),
act(gen, legal) -> action. The engine owns the ground truth, draws chance,
and routes each transition's per-player observation events; a single RNG
stream per game covers chance, searches, and action sampling, so a (seed,
game index) pair replays exactly.
"""

from __future__ import annotations

import numpy as np

from ..beliefs import AgentRecord
from ..dtp import SearchAgent
from ..games import CHANCE, Game
from ..policy import JointPolicy
from ..rng import RngStream, draw_index


class UniformAgent:
    def reset(self, seat):
        self.seat = seat

    def observe(self, event):
        pass

    def act(self, gen, legal):
        return legal[draw_index(gen, [1.0 / len(legal)] * len(legal))]


class FirstLegalAgent:
    def reset(self, seat):
        self.seat = seat

    def observe(self, event):
        pass

    def act(self, gen, legal):
        return legal[0]


class PolicyAgent:
    """Plays a tabular joint policy (uniform fallback at unseen keys),
    sampling each decision."""

    def __init__(self, joint: JointPolicy):
        self.joint = joint
        self.record = None

    def reset(self, seat):
        self.seat = seat
        self.record = AgentRecord(seat)

    def observe(self, event):
        self.record.observe(event)

    def act(self, gen, legal):
        dist = self.joint[self.seat].get(self.record.key(), len(legal))
        return legal[draw_index(gen, dist)]


def play_game(game: Game, agents, gen, check_records: bool = False):
    """One game; agents[i] sits in seat i. Returns terminal utilities."""
    sim = game.initial_sim()
    events_seen = [[] for _ in range(game.num_players)]
    for seat, agent in enumerate(agents):
        agent.reset(seat)
    while not sim.is_terminal():
        p = sim.current_player()
        if p == CHANCE:
            outs = sim.chance_outcomes()
            a = outs[draw_index(gen, [o.probability for o in outs])].action
        else:
            legal = sim.legal_actions()
            if check_records:
                rec = getattr(agents[p], "record", None)
                if rec is not None:
                    from ..games import encode_key
                    assert rec.key() == encode_key(p, events_seen[p]), \
                        "agent record diverged from its true info state"
            a = agents[p].act(gen, legal)
            assert a in legal, f"agent {p} played illegal action {a}"
        step = sim.apply(a)
        for q in range(game.num_players):
            events_seen[q].extend(step[q])
            for ev in step[q]:
                agents[q].observe(ev)
    return sim.returns()


def bootstrap_ci(values: np.ndarray, gen, resamples: int = 10_000,
                 lower: float = 0.025, upper: float = 0.975):
    """Percentile bootstrap CI of the mean. Degenerate data gives a
    zero-width interval."""
    values = np.asarray(values, dtype=float)
    n = len(values)
    if n == 0:
        raise ValueError("no returns to bootstrap")
    means = np.empty(resamples)
    chunk = max(1, min(resamples, 10_000_000 // max(n, 1)))
    done = 0
    while done < resamples:
        m = min(chunk, resamples - done)
        idx = gen.integers(0, n, size=(m, n))
        means[done:done + m] = values[idx].mean(axis=1)
        done += m
    return float(np.quantile(means, lower)), float(np.quantile(means, upper))


def run_match_games(game: Game, agent_a, agent_b, n_games: int, seed: int,
                    check_records: bool = False):
    """Seat-alternating match: game g seats (A, B) when g is even, (B, A)
    otherwise, so over 2N games each agent takes seat 0 exactly N times.
    Returns (returns_a, returns_b, seat_of_a) arrays indexed by game."""
    ra = np.empty(n_games)
    rb = np.empty(n_games)
    seat_a = np.empty(n_games, dtype=np.int8)
    for g in range(n_games):
        gen = RngStream(seed, g).generator()
        if g % 2 == 0:
            agents, sa = (agent_a, agent_b), 0
        else:
            agents, sa = (agent_b, agent_a), 1
        returns = play_game(game, agents, gen, check_records)
        ra[g] = returns[sa]
        rb[g] = returns[1 - sa]
        seat_a[g] = sa
    return ra, rb, seat_a
