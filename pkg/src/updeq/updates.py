"""Local update functions mapping (policy, action values) -> next policy,
plus the annealing schedules used by the equilibrium experiments.

All exponentials run in log space with max subtraction, so stepsizes up to
the 50s used in the head-to-head experiments stay finite.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt
from typing import Union

import numpy as np


def _softmax_logits(x: np.ndarray) -> np.ndarray:
    e = np.exp(x - np.max(x))
    return e / e.sum()


def _log(p: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(p)


# -- raw rows (no validation; used inside solver sweeps) ---------------------

def hedge_row(pi, q, eta):
    return _softmax_logits(_log(pi) + eta * q)


def mmd_row(pi, q, rho, eta, alpha):
    if alpha == 0.0:
        return hedge_row(pi, q, eta)
    x = (_log(pi) + eta * q + (eta * alpha) * _log(rho)) / (1.0 + alpha * eta)
    return _softmax_logits(x)


# -- public updates ----------------------------------------------------------

def pi_update(pi_bar, q_bar) -> np.ndarray:
    """Greedy (policy-iteration) update: point mass on the argmax of the
    action values, lowest index on ties."""
    q_bar = np.asarray(q_bar, dtype=float)
    if q_bar.size == 0:
        raise ValueError("empty action set")
    if not np.all(np.isfinite(q_bar)):
        raise ValueError("action values must be finite")
    out = np.zeros(q_bar.size)
    out[int(np.argmax(q_bar))] = 1.0
    return out


def hedge_update(pi_bar, q_bar, eta: float) -> np.ndarray:
    """Multiplicative-weights update: proportional to pi * exp(eta * q).
    Zero entries of pi stay zero."""
    pi_bar = np.asarray(pi_bar, dtype=float)
    q_bar = np.asarray(q_bar, dtype=float)
    if eta <= 0:
        raise ValueError(f"stepsize must be positive, got {eta}")
    if not np.all(np.isfinite(q_bar)):
        raise ValueError("action values must be finite")
    if pi_bar.shape != q_bar.shape:
        raise ValueError("policy and action values must have equal length")
    return hedge_row(pi_bar, q_bar, eta)


def mmd_update(pi_bar, q_bar, rho_bar, eta: float, alpha: float) -> np.ndarray:
    """Magnetic update: proportional to
    [pi * exp(eta q) * rho^(eta alpha)] ^ (1 / (1 + alpha eta)).
    Reduces exactly to hedge_update at alpha = 0."""
    pi_bar = np.asarray(pi_bar, dtype=float)
    q_bar = np.asarray(q_bar, dtype=float)
    rho_bar = np.asarray(rho_bar, dtype=float)
    if eta <= 0:
        raise ValueError(f"stepsize must be positive, got {eta}")
    if alpha < 0:
        raise ValueError(f"temperature must be nonnegative, got {alpha}")
    if not np.all(np.isfinite(q_bar)):
        raise ValueError("action values must be finite")
    if np.any(rho_bar <= 0):
        raise ValueError("magnet distribution must be fully supported")
    if not (pi_bar.shape == q_bar.shape == rho_bar.shape):
        raise ValueError("policy, action values and magnet must have equal length")
    return mmd_row(pi_bar, q_bar, rho_bar, eta, alpha)


@dataclass(frozen=True)
class UpdateParams:
    """Parameters of one local update family."""
    kind: str                       # policy_iteration | hedge | mmd
    eta: float = 1.0
    alpha: float = 0.0
    magnet: Union[str, object] = "uniform"   # "uniform" or a TabularPolicy

    def __post_init__(self):
        if self.kind not in ("policy_iteration", "hedge", "mmd"):
            raise ValueError(f"unknown update kind {self.kind!r}")
        if self.kind in ("hedge", "mmd") and self.eta <= 0:
            raise ValueError("hedge/mmd require a positive stepsize")
        if self.kind == "mmd" and self.alpha < 0:
            raise ValueError("mmd requires a nonnegative temperature")


# -- schedules ----------------------------------------------------------------

@dataclass(frozen=True)
class ScheduleFn:
    """Closed-form positive sequence: constant c or c / sqrt(t)."""
    kind: str     # "const" | "inv_sqrt"
    coef: float

    def __post_init__(self):
        if self.kind not in ("const", "inv_sqrt"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.coef <= 0:
            raise ValueError("schedule coefficient must be positive")

    def __call__(self, t: int) -> float:
        if self.kind == "const":
            return self.coef
        return self.coef / sqrt(t)

    def text(self) -> str:
        return f"{self.kind}:{self.coef!r}"


@dataclass(frozen=True)
class Schedule:
    eta: ScheduleFn
    alpha: ScheduleFn


def schedule_eval(s: Schedule, t: int) -> tuple[float, float]:
    if t < 1:
        raise ValueError(f"schedules are defined for t >= 1, got t={t}")
    return s.eta(t), s.alpha(t)


def constant_schedule(eta: float, alpha: float) -> Schedule:
    return Schedule(ScheduleFn("const", eta), ScheduleFn("const", alpha))


def parse_schedule_fn(text: str) -> ScheduleFn:
    """Parse 'const:0.1', 'invsqrt:2', or a bare float (constant)."""
    text = text.strip()
    if ":" in text:
        kind, coef = text.split(":", 1)
        kind = {"const": "const", "invsqrt": "inv_sqrt",
                "inv_sqrt": "inv_sqrt"}.get(kind.strip())
        if kind is None:
            raise ValueError(f"unknown schedule kind in {text!r}")
        return ScheduleFn(kind, float(coef))
    return ScheduleFn("const", float(text))


def _inv(eta_coef, alpha_coef):
    return Schedule(ScheduleFn("inv_sqrt", eta_coef), ScheduleFn("inv_sqrt", alpha_coef))


# Annealing schedules for the Nash-solving experiments, per (game, variant,
# objective). Variants: standard, with_subgame_updates, with_bft,
# with_opponent_update. Objectives: plain, minimaxent.
ANNEAL_SCHEDULES = {}
for _game in ("kuhn_poker", "abrupt_dark_hex"):
    for _variant in ("standard", "with_subgame_updates", "with_bft",
                     "with_opponent_update"):
        for _obj in ("plain", "minimaxent"):
            ANNEAL_SCHEDULES[(_game, _variant, _obj)] = _inv(1.0, 1.0)
for _obj in ("plain", "minimaxent"):
    ANNEAL_SCHEDULES[("liars_dice_4", "standard", _obj)] = _inv(2.0, 1.0)
    ANNEAL_SCHEDULES[("liars_dice_4", "with_subgame_updates", _obj)] = _inv(0.5, 1.0)
    ANNEAL_SCHEDULES[("liars_dice_4", "with_bft", _obj)] = _inv(2.0, 1.0)
    ANNEAL_SCHEDULES[("liars_dice_4", "with_opponent_update", _obj)] = _inv(1.0, 1.0)
ANNEAL_SCHEDULES[("leduc_poker", "standard", "plain")] = _inv(1.0, 5.0)
ANNEAL_SCHEDULES[("leduc_poker", "with_subgame_updates", "plain")] = _inv(0.2, 5.0)
ANNEAL_SCHEDULES[("leduc_poker", "with_bft", "plain")] = _inv(0.5, 5.0)
ANNEAL_SCHEDULES[("leduc_poker", "with_opponent_update", "plain")] = _inv(0.5, 5.0)
ANNEAL_SCHEDULES[("leduc_poker", "standard", "minimaxent")] = _inv(1.0, 5.0)
ANNEAL_SCHEDULES[("leduc_poker", "with_subgame_updates", "minimaxent")] = _inv(0.2, 5.0)
ANNEAL_SCHEDULES[("leduc_poker", "with_bft", "minimaxent")] = _inv(1.0, 5.0)
ANNEAL_SCHEDULES[("leduc_poker", "with_opponent_update", "minimaxent")] = _inv(0.5, 5.0)


def anneal_schedule(game_name: str, variant: str, objective: str) -> Schedule:
    try:
        return ANNEAL_SCHEDULES[(game_name, variant, objective)]
    except KeyError:
        raise KeyError(
            f"no annealing schedule recorded for ({game_name}, {variant}, "
            f"{objective}); pass an explicit schedule") from None


# Fixed temperatures for the equilibrium-convergence experiments: alpha=0.1
# and eta=alpha/10 everywhere, except the Leduc overrides below.
CONVERGENCE_PARAMS = {"alpha": 0.1, "eta_ratio": 10.0}
CONVERGENCE_ETA_OVERRIDES = {
    ("leduc_poker", "with_opponent_update"): 20.0,
    ("leduc_poker", "with_subgame_updates"): 50.0,
}


def convergence_params(game_name: str, variant: str) -> tuple[float, float]:
    """(eta, alpha) for the convergence-to-equilibrium runs."""
    alpha = CONVERGENCE_PARAMS["alpha"]
    ratio = CONVERGENCE_ETA_OVERRIDES.get((game_name, variant),
                                          CONVERGENCE_PARAMS["eta_ratio"])
    return alpha / ratio, alpha
