"""Sampling histories consistent with an agent's decision point.

exact_sample draws from the full-tree Bayes posterior. particle_sample is
pure rejection: replay from the root with chance and co-players sampled
from the joint policy, the agent's own recorded actions forced, and the
attempt accepted iff the agent's generated observation stream matches its
record. An empty set is a valid outcome and signals blueprint fallback to
the caller; partially filled sets are used as-is.

Each decision point samples fresh from the root (no conditioning on
earlier particle sets), and off-policy records are fine: own actions are
forced, never weighted.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .games import ACT, CHANCE, Game, HistoryState, encode_key
from .policy import JointPolicy
from .rng import as_generator, draw_index
from .solver import posterior


@dataclass
class AgentRecord:
    """One seat's action-observation sequence so far."""
    player: int
    events: list = field(default_factory=list)

    def key(self) -> bytes:
        return encode_key(self.player, self.events)

    def observe(self, event):
        self.events.append((int(event[0]), int(event[1])))

    def copy(self) -> "AgentRecord":
        return AgentRecord(self.player, list(self.events))


@dataclass
class ParticleSet:
    particles: list
    attempts_used: int
    target_count: int


def exact_sample(game: Game, joint: JointPolicy, key: bytes, rng) -> HistoryState:
    """One draw from the exact posterior at ``key``."""
    gen = as_generator(rng)
    post = posterior(game, joint, key)
    idx = draw_index(gen, [p for _, p in post.items])
    return post.items[idx][0]


def _is_trivially_uniform(joint: JointPolicy) -> bool:
    return all(len(p.table) == 0 for p in joint.policies)


def replay_attempt(game: Game, joint: JointPolicy, record: AgentRecord, gen):
    """One rejection-sampling replay from the root; None on mismatch.

    Draw discipline (mirrored by the compiled board kernels): exactly one
    uniform per chance node and per co-player decision reached before the
    attempt resolves; none for the agent's forced moves.
    """
    agent = record.player
    events = record.events
    n = len(events)
    uniform_bp = _is_trivially_uniform(joint)
    sim = game.initial_sim()
    traj = []
    all_events = tuple([] for _ in range(game.num_players))
    ptr = 0
    while True:
        if sim.is_terminal():
            return None
        p = sim.current_player()
        if p == agent and ptr == n:
            return HistoryState(game, tuple(traj), _sim=sim,
                                _events=tuple(tuple(ev) for ev in all_events))
        if p == CHANCE:
            outs = sim.chance_outcomes()
            idx = draw_index(gen, [o.probability for o in outs])
            a = outs[idx].action
        elif p == agent:
            if events[ptr][0] != ACT:
                return None
            a = events[ptr][1]
            if a not in sim.legal_actions():
                return None
        else:
            legal = sim.legal_actions()
            if uniform_bp:
                dist = [1.0 / len(legal)] * len(legal)
            else:
                key = encode_key(p, all_events[p])
                dist = joint[p].get(key, len(legal))
            a = legal[draw_index(gen, dist)]
        step = sim.apply(a)
        traj.append(a)
        for ev in step[agent]:
            if ptr < n and events[ptr] == ev:
                ptr += 1
            else:
                return None
        for q in range(game.num_players):
            all_events[q].extend(step[q])


def particle_sample(game: Game, joint: JointPolicy, record: AgentRecord,
                    n: int, max_attempts: int = 0, rng=0) -> ParticleSet:
    """Up to ``n`` consistent histories by rejection replay.

    max_attempts defaults to 1000 * n. Every particle's key is asserted to
    equal the record's key.
    """
    if n < 1:
        raise ValueError("need at least one particle")
    if max_attempts <= 0:
        max_attempts = 1000 * n
    gen = as_generator(rng)
    want = record.key()
    particles = []
    attempts = 0
    while len(particles) < n and attempts < max_attempts:
        attempts += 1
        h = replay_attempt(game, joint, record, gen)
        if h is not None:
            assert h.info_state_key(record.player) == want, \
                "accepted particle disagrees with the record key"
            particles.append(h)
    return ParticleSet(particles, attempts, n)
