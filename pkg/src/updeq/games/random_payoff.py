"""Seeded random common-payoff games for cooperative-improvement tests.

Structure: one chance node privately deals each player a draw from
``deals`` outcomes (uniform over the deals^2 ordered pairs), then players
alternate public actions for ``size`` plies with ``branching`` actions
each. The terminal common payoff is U[0,1], generated once at construction
from a PCG64 stream, so a given (seed, size, branching, deals) names one
fixed game.
"""

from __future__ import annotations

import numpy as np

from .base import ACT, CHANCE, OBS, ChanceOutcome, Game, InvalidParamsError, SimState


class RandomPayoffSim(SimState):
    __slots__ = ("game", "deal", "acts")

    def __init__(self, game):
        self.game = game
        self.deal = None
        self.acts = []

    def clone(self):
        s = RandomPayoffSim.__new__(RandomPayoffSim)
        s.game = self.game
        s.deal = self.deal
        s.acts = list(self.acts)
        return s

    def current_player(self):
        if self.deal is None:
            return CHANCE
        return len(self.acts) % 2

    def is_terminal(self):
        return self.deal is not None and len(self.acts) == self.game.size

    def legal_actions(self):
        return list(range(self.game.branching))

    def chance_outcomes(self):
        n = self.game.deals ** 2
        return [ChanceOutcome(i, 1.0 / n) for i in range(n)]

    def apply(self, action):
        g = self.game
        if self.deal is None:
            self.deal = (action // g.deals, action % g.deals)
            return ([(OBS, self.deal[0])], [(OBS, self.deal[1])])
        actor = len(self.acts) % 2
        self.acts.append(action)
        ev = ([], [])
        ev[actor].append((ACT, action))
        ev[1 - actor].append((OBS, action))
        return ev

    def returns(self):
        g = self.game
        deal_id = self.deal[0] * g.deals + self.deal[1]
        seq = 0
        for a in self.acts:
            seq = seq * g.branching + a
        u = float(g.payoffs[deal_id, seq])
        return (u, u)


class RandomCommonPayoff(Game):
    name = "random_common_payoff"
    num_players = 2
    is_common_payoff = True

    def __init__(self, seed=0, size=4, branching=3, deals=2):
        if size < 1 or branching < 2 or deals < 1:
            raise InvalidParamsError(
                f"need size >= 1, branching >= 2, deals >= 1; "
                f"got size={size}, branching={branching}, deals={deals}")
        super().__init__({"seed": seed, "size": size,
                          "branching": branching, "deals": deals})
        self.seed = seed
        self.size = size
        self.branching = branching
        self.deals = deals
        self.max_actions = max(branching, deals ** 2)
        rng = np.random.Generator(np.random.PCG64(
            np.random.SeedSequence([0x7A11E7, seed, size, branching, deals])))
        self.payoffs = rng.random((deals ** 2, branching ** size))

    def initial_sim(self):
        return RandomPayoffSim(self)

    def record_legal_actions(self, events):
        return list(range(self.branching))
