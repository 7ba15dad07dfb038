"""One-shot matrix games as two-ply dark-move games, for solver fixtures.

Player 0 moves first but its action stays hidden, so player 1's single
information state makes the game equivalent to a simultaneous-move matrix
game. Not part of the named registry; used to pin solver behaviour on
games with closed-form equilibria.
"""

from __future__ import annotations

import numpy as np

from .base import ACT, Game, SimState


class MatrixSim(SimState):
    __slots__ = ("game", "acts")

    def __init__(self, game):
        self.game = game
        self.acts = []

    def clone(self):
        s = MatrixSim.__new__(MatrixSim)
        s.game = self.game
        s.acts = list(self.acts)
        return s

    def current_player(self):
        return len(self.acts)

    def is_terminal(self):
        return len(self.acts) == 2

    def legal_actions(self):
        return list(range(self.game.payoffs.shape[len(self.acts)]))

    def chance_outcomes(self):
        raise ValueError("matrix games have no chance nodes")

    def apply(self, action):
        actor = len(self.acts)
        self.acts.append(action)
        ev = ([], [])
        ev[actor].append((ACT, action))
        # the other player observes nothing: simultaneous-move semantics
        return ev

    def returns(self):
        u0 = float(self.game.payoffs[self.acts[0], self.acts[1]])
        if self.game.is_common_payoff:
            return (u0, u0)
        return (u0, -u0)


class MatrixGame(Game):
    """payoffs[i, j] is player 0's payoff for (row i, col j); player 1 gets
    -payoffs (zero_sum=True, default) or the same value (zero_sum=False)."""

    name = "matrix_game"
    num_players = 2

    def __init__(self, payoffs, zero_sum=True):
        payoffs = np.asarray(payoffs, dtype=float)
        if payoffs.ndim != 2:
            raise ValueError("payoff matrix must be 2-D")
        super().__init__({"shape": payoffs.shape, "zero_sum": zero_sum})
        self.payoffs = payoffs
        self.is_zero_sum = zero_sum
        self.is_common_payoff = not zero_sum
        self.max_actions = max(payoffs.shape)

    def initial_sim(self):
        return MatrixSim(self)

    def record_legal_actions(self, events):
        player = 1 if any(tag == ACT for tag, _ in events) else 0
        if not events:
            # could be either seat's first (only) decision; both see nothing
            return list(range(self.payoffs.shape[0]))
        return list(range(self.payoffs.shape[player]))


def matching_pennies():
    return MatrixGame([[1.0, -1.0], [-1.0, 1.0]])
