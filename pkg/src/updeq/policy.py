"""Tabular behavioural policies over information-state keys.

A TabularPolicy stores one probability vector per key, aligned with the
game's canonical legal-action order at that key. Lookups at unseen keys
fall back to the uniform distribution, so lazily-populated policies are
valid blueprints for search agents.
"""

from __future__ import annotations

from typing import Iterable, Optional

import numpy as np

from .games import CHANCE, Game, enumerate_tree

SIMPLEX_TOL = 1e-12


class PolicyValidationError(ValueError):
    pass


class TabularPolicy:
    def __init__(self, player: int, table: Optional[dict[bytes, np.ndarray]] = None):
        self.player = player
        self.table: dict[bytes, np.ndarray] = {} if table is None else table

    def get(self, key: bytes, num_actions: int) -> np.ndarray:
        """Stored vector for ``key``, or uniform over ``num_actions``."""
        dist = self.table.get(key)
        if dist is None:
            if num_actions <= 0:
                raise ValueError(f"no actions available at key {key.hex()}")
            return np.full(num_actions, 1.0 / num_actions)
        return dist

    def set(self, key: bytes, dist) -> None:
        dist = np.asarray(dist, dtype=float)
        _check_simplex(dist, key)
        self.table[key] = dist

    def copy(self) -> "TabularPolicy":
        return TabularPolicy(self.player, {k: v.copy() for k, v in self.table.items()})

    def __len__(self):
        return len(self.table)


# get/set as free functions, mirroring the rest of the engine surface.

def get_action_distribution(policy: TabularPolicy, key: bytes,
                            num_actions: int) -> np.ndarray:
    return policy.get(key, num_actions)


def set_action_distribution(policy: TabularPolicy, key: bytes, dist) -> None:
    policy.set(key, dist)


class JointPolicy:
    def __init__(self, policies: Iterable[TabularPolicy]):
        self.policies = list(policies)
        for i, p in enumerate(self.policies):
            if p.player != i:
                raise ValueError(f"policy at index {i} is for player {p.player}")

    def __getitem__(self, player: int) -> TabularPolicy:
        return self.policies[player]

    def __len__(self):
        return len(self.policies)

    def copy(self) -> "JointPolicy":
        return JointPolicy([p.copy() for p in self.policies])


def _check_simplex(dist: np.ndarray, key: bytes = b"") -> None:
    if dist.ndim != 1 or dist.size == 0:
        raise PolicyValidationError(f"key {key.hex()}: distribution must be a nonempty vector")
    if np.any(dist < 0):
        raise PolicyValidationError(
            f"key {key.hex()}: negative probability (min {dist.min():.3g})")
    err = abs(float(dist.sum()) - 1.0)
    if err > SIMPLEX_TOL:
        raise PolicyValidationError(
            f"key {key.hex()}: probabilities sum to {dist.sum()!r} "
            f"(violation {err:.3g} > {SIMPLEX_TOL})")


def validate(policy: TabularPolicy, game: Optional[Game] = None) -> dict:
    """Check every stored vector; returns diagnostics on success.

    With ``game``, also checks vector lengths against the legal-action
    count at each reachable key. Raises PolicyValidationError naming the
    first offending key.
    """
    max_violation = 0.0
    for key, dist in policy.table.items():
        _check_simplex(np.asarray(dist), key)
        max_violation = max(max_violation, abs(float(np.sum(dist)) - 1.0))
    if game is not None:
        lengths = {}
        for h in enumerate_tree(game):
            if not h.is_terminal() and h.current_player() == policy.player:
                lengths[h.info_state_key(policy.player)] = len(h.legal_actions())
        for key, dist in policy.table.items():
            want = lengths.get(key)
            if want is not None and len(dist) != want:
                raise PolicyValidationError(
                    f"key {key.hex()}: vector has {len(dist)} entries, "
                    f"game has {want} legal actions")
    return {"keys": len(policy.table), "max_sum_violation": max_violation}


def uniform_policy(game: Game, player: int, materialize: bool = True) -> TabularPolicy:
    """Uniform policy for ``player``.

    With ``materialize`` the full tree is enumerated and every reachable
    key is stored; otherwise the empty table relies on the uniform
    fallback (identical behaviour, no enumeration).
    """
    pol = TabularPolicy(player)
    if materialize:
        for h in enumerate_tree(game):
            if h.is_terminal() or h.current_player() != player:
                continue
            key = h.info_state_key(player)
            if key not in pol.table:
                n = len(h.legal_actions())
                pol.table[key] = np.full(n, 1.0 / n)
    return pol


def uniform_joint(game: Game, materialize: bool = True) -> JointPolicy:
    return JointPolicy([uniform_policy(game, p, materialize)
                        for p in range(game.num_players)])


def interior_mix(policy: TabularPolicy, eps: float) -> TabularPolicy:
    """(1 - eps) * policy + eps * uniform at every stored key."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"eps must be in [0, 1], got {eps}")
    out = TabularPolicy(policy.player)
    for key, dist in policy.table.items():
        k = len(dist)
        out.table[key] = (1.0 - eps) * dist + eps / k
    return out


def joint_interior_mix(joint: JointPolicy, eps: float) -> JointPolicy:
    return JointPolicy([interior_mix(p, eps) for p in joint.policies])


# -- serialization ----------------------------------------------------------
# One record per key: player<TAB>key_hex<TAB>p1,p2,...,pk with shortest
# round-trip decimals, sorted by (player, key). Round-trips bit-exactly.

def dump_joint(joint: JointPolicy) -> str:
    lines = []
    for pol in joint.policies:
        for key in sorted(pol.table):
            probs = ",".join(repr(float(x)) for x in pol.table[key])
            lines.append(f"{pol.player}\t{key.hex()}\t{probs}")
    return "\n".join(lines) + ("\n" if lines else "")


def save_joint(joint: JointPolicy, path) -> None:
    with open(path, "w") as f:
        f.write(dump_joint(joint))


def load_joint(path_or_text, num_players: int = 2) -> JointPolicy:
    if isinstance(path_or_text, str) and "\t" in path_or_text:
        text = path_or_text
    else:
        with open(path_or_text) as f:
            text = f.read()
    policies = [TabularPolicy(p) for p in range(num_players)]
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        player_s, key_hex, probs_s = line.split("\t")
        player = int(player_s)
        dist = np.array([float(x) for x in probs_s.split(",")])
        policies[player].table[bytes.fromhex(key_hex)] = dist
    return JointPolicy(policies)
