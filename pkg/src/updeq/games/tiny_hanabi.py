"""Two-step tiny Hanabi: a cooperative signalling fixture.

Chance deals each player one of two cards (4 joint deals at 1/4). Player 0
acts first with 3 actions; player 1 observes that action (but not player
0's card) and replies with 3 actions. Both players then score the common
payoff PAYOFF[deal0][deal1][action0][action1].

The payoff tensor below is the standard two-player, two-card, three-action
instance used as a benchmark fixture; its optimum (expected payoff 10.0,
verified by exhaustive search over pure joint policies in the test suite)
requires player 0 to signal its card.
"""

from __future__ import annotations

from .base import ACT, CHANCE, OBS, ChanceOutcome, Game, SimState

PAYOFF = (
    ((10, 0, 0), (4, 8, 4), (10, 0, 0)),   # deal (0, 0)
    ((0, 0, 10), (4, 8, 4), (0, 0, 10)),   # deal (0, 1)
    ((0, 0, 10), (4, 8, 4), (0, 0, 0)),    # deal (1, 0)
    ((10, 0, 0), (4, 8, 4), (10, 0, 0)),   # deal (1, 1)
)

NUM_ACTIONS = 3


class TinyHanabiSim(SimState):
    __slots__ = ("deal", "acts")

    def __init__(self):
        self.deal = None
        self.acts = []

    def clone(self):
        s = TinyHanabiSim.__new__(TinyHanabiSim)
        s.deal = self.deal
        s.acts = list(self.acts)
        return s

    def current_player(self):
        if self.deal is None:
            return CHANCE
        return len(self.acts)

    def is_terminal(self):
        return len(self.acts) == 2

    def legal_actions(self):
        return list(range(NUM_ACTIONS))

    def chance_outcomes(self):
        return [ChanceOutcome(i, 0.25) for i in range(4)]

    def apply(self, action):
        if self.deal is None:
            self.deal = (action // 2, action % 2)
            return ([(OBS, self.deal[0])], [(OBS, self.deal[1])])
        actor = len(self.acts)
        self.acts.append(action)
        ev = ([], [])
        ev[actor].append((ACT, action))
        ev[1 - actor].append((OBS, action))
        return ev

    def returns(self):
        d0, d1 = self.deal
        u = float(PAYOFF[d0 * 2 + d1][self.acts[0]][self.acts[1]])
        return (u, u)


class TinyHanabi(Game):
    name = "tiny_hanabi"
    num_players = 2
    max_actions = 4  # the deal node; decisions have 3
    is_common_payoff = True

    def initial_sim(self):
        return TinyHanabiSim()

    def record_legal_actions(self, events):
        return list(range(NUM_ACTIONS))
