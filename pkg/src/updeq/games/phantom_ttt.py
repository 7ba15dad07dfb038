"""Phantom tic-tac-toe (classical variant) on the 3x3 board.

Players cannot see each other's marks. A move names a cell; if the cell is
occupied by the opponent, the mover observes that (token 1), the cell is
revealed to it, and the mover MOVES AGAIN (classical rule: the turn is kept
until a placement succeeds). The opponent observes nothing either way, so a
player cannot count the other's failed probes.

Win: completing a row/column/diagonal on one's own placement, +1/-1.
Draw: the ninth cell is placed with no line, 0 for both.
Legal moves: cells not known to the mover, ascending order.
"""

from __future__ import annotations

from .base import ACT, OBS, Game, SimState

PLACED, OCCUPIED = 0, 1

LINES = ((0, 1, 2), (3, 4, 5), (6, 7, 8),
         (0, 3, 6), (1, 4, 7), (2, 5, 8),
         (0, 4, 8), (2, 4, 6))


class PhantomTTTSim(SimState):
    __slots__ = ("board", "known", "to_act", "stones", "winner", "full")

    def __init__(self):
        self.board = [-1] * 9
        self.known = [set(), set()]
        self.to_act = 0
        self.stones = 0
        self.winner = -1
        self.full = False

    def clone(self):
        s = PhantomTTTSim.__new__(PhantomTTTSim)
        s.board = list(self.board)
        s.known = [set(self.known[0]), set(self.known[1])]
        s.to_act = self.to_act
        s.stones = self.stones
        s.winner = self.winner
        s.full = self.full
        return s

    def current_player(self):
        return self.to_act

    def is_terminal(self):
        return self.winner >= 0 or self.full

    def legal_actions(self):
        p = self.to_act
        return [c for c in range(9)
                if self.board[c] != p and c not in self.known[p]]

    def chance_outcomes(self):
        raise ValueError("phantom tic-tac-toe has no chance nodes")

    def _wins(self, p):
        b = self.board
        return any(b[i] == p and b[j] == p and b[k] == p for i, j, k in LINES)

    def apply(self, action):
        p = self.to_act
        ev = ([], [])
        ev[p].append((ACT, action))
        if self.board[action] == 1 - p:
            self.known[p].add(action)
            ev[p].append((OBS, OCCUPIED))
            # mover keeps the turn
            return ev
        self.board[action] = p
        self.stones += 1
        ev[p].append((OBS, PLACED))
        if self._wins(p):
            self.winner = p
        elif self.stones == 9:
            self.full = True
        else:
            self.to_act = 1 - p
        return ev

    def returns(self):
        if self.winner < 0:
            return (0.0, 0.0)
        return (1.0, -1.0) if self.winner == 0 else (-1.0, 1.0)


class PhantomTicTacToe(Game):
    name = "phantom_ttt"
    num_players = 2
    max_actions = 9
    is_zero_sum = True

    def initial_sim(self):
        return PhantomTTTSim()

    def record_legal_actions(self, events):
        from .dark_hex import _own_view_legal
        return _own_view_legal(events, 9)
