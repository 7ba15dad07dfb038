"""Exact full-tree evaluation: expected returns, history and infostate
values, posteriors, best responses, exploitability, and the soft-response
gaps used as equilibrium-divergence metrics.

Zero-reach convention: infostate action values and posteriors weight
member histories by chance times co-player reach only (the acting player's
own past reach is constant across members by perfect recall, so this
matches the Bayes posterior wherever that is defined, and stays defined
when the player's own policy avoids the infostate). Infostates with zero
chance-times-co-player reach have no usable feedback and are skipped.

The flat_* functions operate on (TreeIndex, flat policy vector) and are
the building blocks for the iteration loops; the public operations take
(game, JointPolicy) and convert once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import backend
from ..games import DEFAULT_NODE_BUDGET, Game, HistoryState
from ..policy import JointPolicy
from .tree import DECISION, TreeIndex, build_tree


class UnreachableInfostateError(ValueError):
    """The infostate has zero probability under chance and the co-players
    (distinct from merely having zero probability under the own policy)."""


@dataclass
class Posterior:
    key: bytes
    items: list   # list of (HistoryState, probability)


class ValueTable:
    """Per-history values for every player under one joint policy."""

    def __init__(self, tree: TreeIndex, values: np.ndarray):
        self.tree = tree
        self.values = values          # shape (n_nodes, num_players)

    def root(self) -> np.ndarray:
        return self.values[0].copy()

    def value(self, h: HistoryState, player: int) -> float:
        return float(self.values[self.tree.node_lookup(h.trajectory), player])


# -- flat-level computations --------------------------------------------------

def entropy_per_infostate(tree: TreeIndex, flat: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        plogp = np.where(flat > 0, flat * np.log(flat), 0.0)
    ent = np.add.reduceat(plogp, tree.is_offset)
    return -ent


def entropy_bonus(tree: TreeIndex, flat: np.ndarray, player: int,
                  alpha_own: float, alpha_opp: float) -> np.ndarray:
    """Per-node shaped reward: +alpha_own * H at the player's decision
    nodes, -alpha_opp * H at other players' decision nodes."""
    bonus = np.zeros(tree.n_nodes)
    if alpha_own == 0.0 and alpha_opp == 0.0:
        return bonus
    ent = entropy_per_infostate(tree, flat)
    dec = tree.kind == DECISION
    own = dec & (tree.player == player)
    opp = dec & (tree.player != player)
    bonus[own] = alpha_own * ent[tree.node_infostate[own]]
    bonus[opp] = -alpha_opp * ent[tree.node_infostate[opp]]
    return bonus


def cf_weights(tree: TreeIndex, flat: np.ndarray, player: int) -> np.ndarray:
    tp0, tp1, tpc = tree.factored_probs(flat)
    r0, r1, rc = backend.kernels().factored_reach(tree, tp0, tp1, tpc)
    return rc * (r1 if player == 0 else r0)


def flat_expected_return(tree: TreeIndex, flat: np.ndarray) -> np.ndarray:
    tp = tree.transition_probs(flat)
    K = backend.kernels()
    zeros = np.zeros(tree.n_nodes)
    return np.array([K.backward_values(tree, tp, zeros, tree.util[:, i])[0]
                     for i in range(tree.num_players)])


def flat_best_response(tree: TreeIndex, flat: np.ndarray, player: int):
    K = backend.kernels()
    tp = tree.transition_probs(flat)
    w = cf_weights(tree, flat, player)
    zeros = np.zeros(tree.n_nodes)
    value, brflat = K.response_sweep(tree, tp, zeros, tree.util[:, player],
                                     player, w, False, 0.0)
    return float(value), brflat


def flat_exploitability(tree: TreeIndex, flat: np.ndarray) -> float:
    v0, _ = flat_best_response(tree, flat, 0)
    v1, _ = flat_best_response(tree, flat, 1)
    return (v0 + v1) / 2.0


def flat_soft_gap(tree: TreeIndex, flat: np.ndarray, alpha: float,
                  minimaxent: bool) -> float:
    if alpha <= 0:
        raise ValueError(f"temperature must be positive, got {alpha}")
    if flat.min() <= 0.0:
        raise ValueError("the policy must put positive probability on every "
                         "action at every decision point")
    K = backend.kernels()
    tp = tree.transition_probs(flat)
    tp0, tp1, tpc = tree.factored_probs(flat)
    r0, r1, rc = K.factored_reach(tree, tp0, tp1, tpc)
    full_reach = r0 * r1 * rc
    ent = entropy_per_infostate(tree, flat)
    zeros = np.zeros(tree.n_nodes)
    gap = 0.0
    for i in range(2):
        w = rc * (r1 if i == 0 else r0)
        own_nodes = (tree.kind == DECISION) & (tree.player == i)
        opp_nodes = (tree.kind == DECISION) & (tree.player != i)
        own_ent = float(np.sum(full_reach[own_nodes]
                               * ent[tree.node_infostate[own_nodes]]))
        j_plain = K.backward_values(tree, tp, zeros, tree.util[:, i])[0]
        objective = j_plain + alpha * own_ent
        bonus = np.zeros(tree.n_nodes)
        if minimaxent:
            opp_ent = float(np.sum(full_reach[opp_nodes]
                                   * ent[tree.node_infostate[opp_nodes]]))
            objective -= alpha * opp_ent
            bonus[opp_nodes] = -alpha * ent[tree.node_infostate[opp_nodes]]
        soft_value, _ = K.response_sweep(tree, tp, bonus, tree.util[:, i],
                                         i, w, True, alpha)
        gap += soft_value - objective
    if gap < 0:
        if gap < -1e-9:
            raise AssertionError(f"soft-response gap came out {gap}; "
                                 f"this indicates a solver bug")
        gap = 0.0
    return float(gap)


# -- public operations ---------------------------------------------------------

def _prep(game: Game, joint: JointPolicy, budget: int):
    tree = build_tree(game, budget)
    flat = tree.policy_flat(joint)
    return tree, flat


def expected_return(game: Game, joint: JointPolicy,
                    budget: int = DEFAULT_NODE_BUDGET) -> np.ndarray:
    """Exact expected return per player."""
    tree, flat = _prep(game, joint, budget)
    return flat_expected_return(tree, flat)


def history_values(game: Game, joint: JointPolicy,
                   budget: int = DEFAULT_NODE_BUDGET) -> ValueTable:
    tree, flat = _prep(game, joint, budget)
    tp = tree.transition_probs(flat)
    K = backend.kernels()
    zeros = np.zeros(tree.n_nodes)
    vals = np.stack([K.backward_values(tree, tp, zeros, tree.util[:, i])
                     for i in range(game.num_players)], axis=1)
    return ValueTable(tree, vals)


def infostate_q(game: Game, joint: JointPolicy, player: int,
                alpha_own: float = 0.0, alpha_opp: float = 0.0,
                budget: int = DEFAULT_NODE_BUDGET) -> dict[bytes, np.ndarray]:
    """Action values per infostate key of ``player``.

    With alpha_own/alpha_opp nonzero the continuation values carry
    entropy-shaped rewards (+alpha_own * H at the player's future decision
    nodes, -alpha_opp * H at the other players'), which is the feedback
    used by the equilibrium-convergence runs. Keys with zero
    chance-times-co-player reach are omitted.
    """
    tree, flat = _prep(game, joint, budget)
    K = backend.kernels()
    tp = tree.transition_probs(flat)
    bonus = entropy_bonus(tree, flat, player, alpha_own, alpha_opp)
    v = K.backward_values(tree, tp, bonus, tree.util[:, player])
    w = cf_weights(tree, flat, player)
    q_flat, wsum = K.aggregate_q(tree, player, w, v)
    out = {}
    for iid in np.nonzero(tree.is_player == player)[0]:
        if wsum[iid] > 0:
            off, k = tree.is_offset[iid], tree.is_nact[iid]
            out[tree.is_keys[iid]] = q_flat[off:off + k].copy()
    return out


def _node_trajectory(tree: TreeIndex, nid: int) -> tuple:
    if not hasattr(tree, "_parent_edge"):
        pe = np.full(tree.n_nodes, -1, dtype=np.int64)
        pe[tree.edge_child] = np.arange(tree.n_edges)
        tree._parent_edge = pe
    acts = tree.edge_actions()
    out = []
    while nid != 0:
        e = tree._parent_edge[nid]
        out.append(int(acts[e]))
        nid = int(tree.edge_parent[e])
    return tuple(reversed(out))


def posterior(game: Game, joint: JointPolicy, key: bytes,
              budget: int = DEFAULT_NODE_BUDGET) -> Posterior:
    """Bayes posterior over the histories consistent with ``key``.

    Own-policy reach cancels by perfect recall, so the weights are chance
    times co-player reach; raises UnreachableInfostateError when those are
    zero everywhere (unknown keys raise KeyError).
    """
    tree, flat = _prep(game, joint, budget)
    iid = tree.key_to_id.get(key)
    if iid is None:
        raise KeyError(f"unknown infostate key {key.hex()}")
    player = int(tree.is_player[iid])
    w = cf_weights(tree, flat, player)
    members = tree.infostate_members()[iid]
    weights = w[members]
    total = float(weights.sum())
    if total <= 0.0:
        raise UnreachableInfostateError(
            f"infostate {key.hex()} is unreachable under chance and the "
            f"co-players' policies")
    items = [(HistoryState(game, _node_trajectory(tree, int(nid))),
              float(wt / total))
             for nid, wt in zip(members, weights) if wt > 0]
    return Posterior(key, items)


def best_response(game: Game, joint: JointPolicy, player: int,
                  budget: int = DEFAULT_NODE_BUDGET):
    """Exact best response for ``player`` with the co-players fixed.
    Returns (response policy, expected return of the response)."""
    tree, flat = _prep(game, joint, budget)
    value, brflat = flat_best_response(tree, flat, player)
    joint_br = tree.flat_policy(brflat)
    return joint_br[player], value


def exploitability(game: Game, joint: JointPolicy,
                   budget: int = DEFAULT_NODE_BUDGET) -> float:
    """Mean best-response value, zero exactly at a Nash equilibrium."""
    if not game.is_zero_sum or game.num_players != 2:
        raise ValueError("exploitability is defined for two-player zero-sum games")
    tree, flat = _prep(game, joint, budget)
    return flat_exploitability(tree, flat)


def aqre_gap(game: Game, joint: JointPolicy, alpha: float,
             budget: int = DEFAULT_NODE_BUDGET) -> float:
    """Entropy-regularized best-response gap: zero exactly when every
    infostate policy is the logit response to its (entropy-shaped)
    continuation values at temperature alpha."""
    tree, flat = _prep(game, joint, budget)
    return flat_soft_gap(tree, flat, alpha, False)


def minimaxent_gap(game: Game, joint: JointPolicy, alpha: float,
                   budget: int = DEFAULT_NODE_BUDGET) -> float:
    """Like aqre_gap but for the objective that also penalizes co-player
    entropy (own +alpha*H, opponents -alpha*H as fixed shaped rewards)."""
    tree, flat = _prep(game, joint, budget)
    return flat_soft_gap(tree, flat, alpha, True)
