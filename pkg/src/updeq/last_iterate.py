"""Exact full-game last-iterate loops.

Each iteration computes action-value feedback for every player from the
current joint policy (simultaneously: all feedback precedes any write) and
applies the local update at every infostate with positive
chance-times-co-player reach. These loops are the references that the
search agents must be update-equivalent to.

Feedback modes:
  plain      - exact continuation values of the current policy.
  aqre_soft  - continuation values shaped with +alpha*H(own future
               policies): the fixed points are the logit (soft) responses
               measured by aqre_gap, which is what the fixed-temperature
               convergence runs target.
  minimaxent - +alpha*H at own future decisions, -alpha*H at the
               co-player's, matching the entropy-in/entropy-out objective.

Variants change where the feedback comes from:
  standard              - values of the current joint policy.
  with_subgame_updates  - the updating player's own future infostates are
                          already updated (single child-before-parent
                          sweep per player).
  with_bft              - posterior weights are re-taken from the
                          provisionally updated (search) joint policy,
                          then the update is redone from the current
                          policy with those weights.
  with_opponent_update  - the co-player's infostates that immediately
                          follow the updater's are one-step updated before
                          the updater's values are computed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from . import backend
from .games import DEFAULT_NODE_BUDGET, Game
from .policy import JointPolicy
from .solver.exact import (cf_weights, entropy_bonus, flat_exploitability,
                           flat_expected_return, flat_soft_gap)
from .solver.tree import TreeIndex, build_tree
from .updates import Schedule, UpdateParams, schedule_eval

VARIANTS = ("standard", "with_subgame_updates", "with_bft",
            "with_opponent_update")
FEEDBACK_MODES = ("plain", "aqre_soft", "minimaxent")

CSV_HEADER = "t,eta,alpha,j0,j1,exploitability,gap,linf_change"


@dataclass
class IterateRecord:
    t: int
    eta: float
    alpha: float
    j0: Optional[float] = None
    j1: Optional[float] = None
    exploitability: Optional[float] = None
    gap: Optional[float] = None
    linf_change: Optional[float] = None

    def csv_row(self) -> str:
        def fmt(x):
            return "" if x is None else repr(float(x))
        return (f"{self.t},{fmt(self.eta)},{fmt(self.alpha)},{fmt(self.j0)},"
                f"{fmt(self.j1)},{fmt(self.exploitability)},{fmt(self.gap)},"
                f"{fmt(self.linf_change)}")


class IterateLog:
    def __init__(self):
        self.records: list[IterateRecord] = []

    def append(self, rec: IterateRecord):
        self.records.append(rec)

    def __len__(self):
        return len(self.records)

    def __getitem__(self, i):
        return self.records[i]

    def at_t(self, t: int) -> IterateRecord:
        for rec in self.records:
            if rec.t == t:
                return rec
        raise KeyError(f"no record at t={t}")

    def csv_lines(self) -> list[str]:
        return [CSV_HEADER] + [r.csv_row() for r in self.records]


def _batch_update_flat(tree: TreeIndex, flat, q, rho, eta, alpha, player, wsum):
    """Apply the magnetic update to every one of ``player``'s infostates
    with positive weight mass; other rows pass through unchanged."""
    with np.errstate(divide="ignore"):
        x = np.log(flat) + eta * q
        if alpha != 0.0:
            x = (x + (eta * alpha) * np.log(rho)) / (1.0 + alpha * eta)
    seg = tree.pol_seg()
    m = np.maximum.reduceat(x, tree.is_offset)
    e = np.exp(x - m[seg])
    s = np.add.reduceat(e, tree.is_offset)
    new = e / s[seg]
    write = (tree.is_player[seg] == player) & (wsum[seg] > 0)
    return np.where(write, new, flat)


def _shaping(feedback: str, alpha: float) -> tuple[float, float]:
    if feedback == "plain":
        return 0.0, 0.0
    if feedback == "aqre_soft":
        return alpha, 0.0
    if feedback == "minimaxent":
        return alpha, alpha
    raise ValueError(f"unknown feedback mode {feedback!r}; "
                     f"known: {FEEDBACK_MODES}")


def _reaches(tree, flat):
    K = backend.kernels()
    tp0, tp1, tpc = tree.factored_probs(flat)
    return K.factored_reach(tree, tp0, tp1, tpc)


def _standard_feedback(tree, flat, player, a_own, a_opp, reaches):
    K = backend.kernels()
    tp = tree.transition_probs(flat)
    bonus = entropy_bonus(tree, flat, player, a_own, a_opp)
    v = K.backward_values(tree, tp, bonus, tree.util[:, player])
    r0, r1, rc = reaches
    w = rc * (r1 if player == 0 else r0)
    return K.aggregate_q(tree, player, w, v)


def _step_standard(tree, flat, rho, eta, alpha, a_own, a_opp):
    reaches = _reaches(tree, flat)
    new = flat
    for i in range(2):
        q, wsum = _standard_feedback(tree, flat, i, a_own, a_opp, reaches)
        new = _batch_update_flat(tree, new, q, rho, eta, alpha, i, wsum)
    return new


def _step_subgame(tree, flat, rho, eta, alpha, a_own, a_opp):
    K = backend.kernels()
    tp = tree.transition_probs(flat)
    r0, r1, rc = _reaches(tree, flat)
    new = flat.copy()
    seg = tree.pol_seg()
    for i in range(2):
        bonus = entropy_bonus(tree, flat, i, 0.0, a_opp)
        w = rc * (r1 if i == 0 else r0)
        newpol, _ = K.subgame_sweep(tree, tp, bonus, tree.util[:, i], i, w,
                                    flat, rho, eta, alpha, a_own)
        own = tree.is_player[seg] == i
        new[own] = newpol[own]
    return new


def _step_bft(tree, flat, rho, eta, alpha, a_own, a_opp, passes):
    K = backend.kernels()
    tp = tree.transition_probs(flat)
    reaches = _reaches(tree, flat)
    values = []
    for i in range(2):
        bonus = entropy_bonus(tree, flat, i, a_own, a_opp)
        values.append(K.backward_values(tree, tp, bonus, tree.util[:, i]))
    # pass 0: plain weights; pass k: weights from the previous provisional
    provisional = None
    for _ in range(passes + 1):
        r0, r1, rc = reaches if provisional is None else _reaches(tree, provisional)
        new = flat
        for i in range(2):
            w = rc * (r1 if i == 0 else r0)
            q, wsum = K.aggregate_q(tree, i, w, values[i])
            new = _batch_update_flat(tree, new, q, rho, eta, alpha, i, wsum)
        provisional = new
    return provisional


def _step_opponent(tree, flat, rho, eta, alpha, a_own, a_opp):
    K = backend.kernels()
    reaches = _reaches(tree, flat)
    seg = tree.pol_seg()
    std = {}
    for j in range(2):
        q, wsum = _standard_feedback(tree, flat, j, a_own, a_opp, reaches)
        std[j] = _batch_update_flat(tree, flat, q, rho, eta, alpha, j, wsum)
    new = flat.copy()
    for i in range(2):
        j = 1 - i
        # co-player plays its one-step update at the infostates that
        # immediately follow i's decisions
        qualifies = (tree.is_player[seg] == j) & tree.follows[seg, i]
        mod = np.where(qualifies, std[j], flat)
        mod_reaches = _reaches(tree, mod)
        tp = tree.transition_probs(mod)
        bonus = entropy_bonus(tree, mod, i, a_own, a_opp)
        v = K.backward_values(tree, tp, bonus, tree.util[:, i])
        r0, r1, rc = mod_reaches
        w = rc * (r1 if i == 0 else r0)
        q, wsum = K.aggregate_q(tree, i, w, v)
        upd = _batch_update_flat(tree, flat, q, rho, eta, alpha, i, wsum)
        own = tree.is_player[seg] == i
        new[own] = upd[own]
    return new


def _apply_variant(tree, flat, rho, eta, alpha, variant, a_own, a_opp,
                   bft_passes):
    if variant == "standard":
        return _step_standard(tree, flat, rho, eta, alpha, a_own, a_opp)
    if variant == "with_subgame_updates":
        return _step_subgame(tree, flat, rho, eta, alpha, a_own, a_opp)
    if variant == "with_bft":
        return _step_bft(tree, flat, rho, eta, alpha, a_own, a_opp, bft_passes)
    if variant == "with_opponent_update":
        return _step_opponent(tree, flat, rho, eta, alpha, a_own, a_opp)
    raise ValueError(f"unknown variant {variant!r}; known: {VARIANTS}")


def _magnet_flat(tree, magnet):
    if isinstance(magnet, str):
        if magnet != "uniform":
            raise ValueError(f"unknown magnet spec {magnet!r}")
        rho = tree.uniform_flat()
    elif isinstance(magnet, JointPolicy):
        rho = tree.policy_flat(magnet)
    else:
        rho = np.asarray(magnet, dtype=float)
    if rho.min() <= 0:
        raise ValueError("magnet must be fully supported")
    return rho


def run_md(game: Game, joint0: JointPolicy, eta: float, iterations: int,
           monotone_retry: bool = False, max_halvings: int = 20,
           tolerance: float = 1e-12,
           budget: int = DEFAULT_NODE_BUDGET):
    """Simultaneous multiplicative-weights ascent on a common-payoff game.

    With ``monotone_retry`` the stepsize is halved (up to ``max_halvings``
    times, persisting thereafter) whenever a step would decrease the
    expected return by more than ``tolerance``; a step that still fails
    raises RuntimeError.
    Returns (final policy, per-iteration log).
    """
    if not game.is_common_payoff:
        raise ValueError("the improvement guarantee needs a common-payoff "
                         "game; run_md rejects anything else")
    if eta <= 0:
        raise ValueError("stepsize must be positive")
    tree = build_tree(game, budget)
    flat = tree.policy_flat(joint0)
    if flat.min() <= 0:
        raise ValueError("initial policy must be fully supported")
    K = backend.kernels()
    zeros = np.zeros(tree.n_nodes)
    log = IterateLog()
    cur_eta = eta
    for t in range(1, iterations + 1):
        tp = tree.transition_probs(flat)
        reaches = _reaches(tree, flat)
        v = K.backward_values(tree, tp, zeros, tree.util[:, 0])
        j_cur = float(v[0])
        r0, r1, rc = reaches
        feedbacks = []
        for i in range(2):
            w = rc * (r1 if i == 0 else r0)
            feedbacks.append(K.aggregate_q(tree, i, w, v))
        while True:
            new = flat
            for i in range(2):
                q, wsum = feedbacks[i]
                new = _batch_update_flat(tree, new, q, rho=None, eta=cur_eta,
                                         alpha=0.0, player=i, wsum=wsum)
            if not monotone_retry:
                break
            j_new = float(K.backward_values(
                tree, tree.transition_probs(new), zeros, tree.util[:, 0])[0])
            if j_new >= j_cur - tolerance:
                break
            if cur_eta <= eta * 0.5 ** max_halvings:
                raise RuntimeError(
                    f"improvement failed after {max_halvings} stepsize "
                    f"halvings (t={t}, J drop {j_cur - j_new:.3e})")
            cur_eta *= 0.5
        linf = float(np.max(np.abs(new - flat)))
        flat = new
        j_after = flat_expected_return(tree, flat)
        log.append(IterateRecord(t, cur_eta, None, float(j_after[0]),
                                 float(j_after[1]), None, None, linf))
    return tree.flat_policy(flat), log


def run_mmd(game: Game, joint0: JointPolicy, magnet,
            params_or_schedule: Union[UpdateParams, Schedule],
            iterations: int, variant: str = "standard",
            feedback: str = "plain", bft_passes: int = 1,
            metric_every: int = 1, gap_kind: Optional[str] = None,
            budget: int = DEFAULT_NODE_BUDGET):
    """Simultaneous magnetic-mirror-descent iteration on a 2p0s game.

    ``params_or_schedule`` is either UpdateParams (constant eta/alpha) or a
    Schedule evaluated at each t. Metrics (expected returns,
    exploitability, soft gap at the current temperature) are logged every
    ``metric_every`` iterations. ``gap_kind`` selects the logged gap
    ("aqre" or "minimaxent"; defaults to match the feedback mode).
    Returns (final policy, per-iteration log).
    """
    if not (game.is_zero_sum and game.num_players == 2):
        raise ValueError("run_mmd expects a two-player zero-sum game")
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; known: {VARIANTS}")
    if feedback not in FEEDBACK_MODES:
        raise ValueError(f"unknown feedback {feedback!r}; known: {FEEDBACK_MODES}")
    tree = build_tree(game, budget)
    flat = tree.policy_flat(joint0)
    rho = _magnet_flat(tree, magnet)
    if isinstance(params_or_schedule, UpdateParams):
        if params_or_schedule.kind not in ("hedge", "mmd"):
            raise ValueError("run_mmd takes hedge or mmd update params")
    if gap_kind is None:
        gap_kind = "minimaxent" if feedback == "minimaxent" else "aqre"
    interior = flat.min() > 0
    log = IterateLog()
    for t in range(1, iterations + 1):
        if isinstance(params_or_schedule, UpdateParams):
            p = params_or_schedule
            eta_t, alpha_t = p.eta, (p.alpha if p.kind == "mmd" else 0.0)
        else:
            eta_t, alpha_t = schedule_eval(params_or_schedule, t)
        a_own, a_opp = _shaping(feedback, alpha_t)
        new = _apply_variant(tree, flat, rho, eta_t, alpha_t, variant,
                             a_own, a_opp, bft_passes)
        if interior:
            assert new.min() > 0, "iterates must stay fully supported"
        linf = float(np.max(np.abs(new - flat)))
        flat = new
        rec = IterateRecord(t, eta_t, alpha_t, linf_change=linf)
        if metric_every > 0 and (t % metric_every == 0 or t == iterations):
            j = flat_expected_return(tree, flat)
            rec.j0, rec.j1 = float(j[0]), float(j[1])
            rec.exploitability = flat_exploitability(tree, flat)
            if alpha_t > 0 and flat.min() > 0:
                rec.gap = flat_soft_gap(tree, flat, alpha_t,
                                        gap_kind == "minimaxent")
        log.append(rec)
    return tree.flat_policy(flat), log


def run_annealed_nash(game: Game, joint0: JointPolicy, schedule: Schedule,
                      iterations: int, variant: str = "standard",
                      objective: str = "plain", magnet="uniform",
                      metric_every: int = 1,
                      budget: int = DEFAULT_NODE_BUDGET):
    """Annealed equilibrium solving: per-iteration (eta_t, alpha_t) from
    the schedule, exploitability logged along the way.

    objective="plain" uses unshaped feedback; "minimaxent" shapes it with
    +alpha_t*H (own) and -alpha_t*H (co-player) rewards.
    """
    if objective not in ("plain", "minimaxent"):
        raise ValueError(f"unknown objective {objective!r}")
    feedback = "plain" if objective == "plain" else "minimaxent"
    return run_mmd(game, joint0, magnet, schedule, iterations,
                   variant=variant, feedback=feedback,
                   metric_every=metric_every,
                   gap_kind="aqre" if objective == "plain" else "minimaxent",
                   budget=budget)
