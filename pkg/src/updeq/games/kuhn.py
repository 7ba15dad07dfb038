"""Kuhn poker: 3 cards, one ante, one bet size.

Canonical action ids (always both legal):
  0 = pass  (check when no bet outstanding, fold when facing a bet)
  1 = bet   (bet when no bet outstanding, call when facing a bet)

Deal is a single chance node with the 6 ordered card pairs at 1/6 each.
Utilities are net chips: showdown after check-check pays +-1, after a
called bet +-2, an uncontested bet wins +1.
"""

from __future__ import annotations

from .base import ACT, CHANCE, OBS, ChanceOutcome, Game, SimState

DEALS = [(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)]

PASS, BET = 0, 1


class KuhnSim(SimState):
    __slots__ = ("cards", "bets")

    def __init__(self):
        self.cards = None          # (card0, card1) after the deal
        self.bets = []             # action history after the deal

    def clone(self):
        s = KuhnSim.__new__(KuhnSim)
        s.cards = self.cards
        s.bets = list(self.bets)
        return s

    def current_player(self):
        if self.cards is None:
            return CHANCE
        return len(self.bets) % 2

    def is_terminal(self):
        b = self.bets
        if len(b) == 2:
            return b != [PASS, BET]
        return len(b) == 3

    def legal_actions(self):
        return [PASS, BET]

    def chance_outcomes(self):
        return [ChanceOutcome(i, 1.0 / 6.0) for i in range(6)]

    def apply(self, action):
        if self.cards is None:
            self.cards = DEALS[action]
            return ([(OBS, self.cards[0])], [(OBS, self.cards[1])])
        actor = len(self.bets) % 2
        self.bets.append(action)
        ev = ([], [])
        ev[actor].append((ACT, action))
        ev[1 - actor].append((OBS, action))
        return ev

    def returns(self):
        b = self.bets
        if b == [BET, PASS]:
            return (1.0, -1.0)
        if b == [PASS, BET, PASS]:
            return (-1.0, 1.0)
        stake = 2.0 if BET in b else 1.0
        win = self.cards[0] > self.cards[1]
        return (stake, -stake) if win else (-stake, stake)


class KuhnPoker(Game):
    name = "kuhn_poker"
    num_players = 2
    max_actions = 6  # the deal node has 6 outcomes; decisions have 2
    is_zero_sum = True

    def initial_sim(self):
        return KuhnSim()

    def record_legal_actions(self, events):
        return [PASS, BET]
