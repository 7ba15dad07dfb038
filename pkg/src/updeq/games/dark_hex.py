"""Abrupt dark hex on an n x n rhombus.

Players cannot see each other's stones. A move names a cell; if the cell
holds an opponent stone the move is "abrupt": the turn is lost, nothing is
placed, and the cell is revealed to the mover. Only the mover observes the
outcome of its move (0 = placed, 1 = collision); the opponent learns
nothing, so turn order alone carries no information.

Player 0 connects the top row to the bottom row, player 1 the left column
to the right column. Cells are indexed row-major; cell (r, c) neighbours
(r-1, c), (r-1, c+1), (r, c-1), (r, c+1), (r+1, c-1), (r+1, c). Hex admits
no draws: the winner is the player whose placement completes a connection,
worth +1/-1.

Legal moves are the cells not known to the mover (not own stones, not
revealed opponent stones), in ascending cell order.
"""

from __future__ import annotations

from .base import ACT, OBS, Game, InvalidParamsError, SimState

PLACED, COLLISION = 0, 1


def _own_view_legal(events, num_cells):
    """Cells not known to the mover, from its (move, result) event pairs."""
    mine, revealed = set(), set()
    last = None
    for tag, val in events:
        if tag == ACT:
            last = val
        elif last is not None:
            (mine if val == PLACED else revealed).add(last)
            last = None
    return [c for c in range(num_cells) if c not in mine and c not in revealed]


def _neighbors(n):
    out = []
    for r in range(n):
        for c in range(n):
            cells = []
            for dr, dc in ((-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0)):
                rr, cc = r + dr, c + dc
                if 0 <= rr < n and 0 <= cc < n:
                    cells.append(rr * n + cc)
            out.append(tuple(cells))
    return tuple(out)


class DarkHexSim(SimState):
    __slots__ = ("n", "board", "known", "to_act", "winner", "neigh")

    def __init__(self, n, neigh):
        self.n = n
        self.board = [-1] * (n * n)   # -1 empty, else owning player
        self.known = [set(), set()]   # opponent cells revealed to each player
        self.to_act = 0
        self.winner = -1
        self.neigh = neigh

    def clone(self):
        s = DarkHexSim.__new__(DarkHexSim)
        s.n = self.n
        s.board = list(self.board)
        s.known = [set(self.known[0]), set(self.known[1])]
        s.to_act = self.to_act
        s.winner = self.winner
        s.neigh = self.neigh
        return s

    def current_player(self):
        return self.to_act

    def is_terminal(self):
        return self.winner >= 0

    def legal_actions(self):
        p = self.to_act
        return [c for c in range(self.n * self.n)
                if self.board[c] != p and c not in self.known[p]]

    def chance_outcomes(self):
        raise ValueError("dark hex has no chance nodes")

    def _connected(self, player):
        n = self.n
        if player == 0:
            frontier = [c for c in range(n) if self.board[c] == 0]
            goal = lambda c: c >= n * (n - 1)
        else:
            frontier = [r * n for r in range(n) if self.board[r * n] == 1]
            goal = lambda c: c % n == n - 1
        seen = set(frontier)
        while frontier:
            c = frontier.pop()
            if goal(c):
                return True
            for d in self.neigh[c]:
                if self.board[d] == player and d not in seen:
                    seen.add(d)
                    frontier.append(d)
        return False

    def apply(self, action):
        p = self.to_act
        ev = ([], [])
        ev[p].append((ACT, action))
        if self.board[action] == 1 - p:
            self.known[p].add(action)
            ev[p].append((OBS, COLLISION))
        else:
            self.board[action] = p
            ev[p].append((OBS, PLACED))
            if self._connected(p):
                self.winner = p
        self.to_act = 1 - p
        return ev

    def returns(self):
        return (1.0, -1.0) if self.winner == 0 else (-1.0, 1.0)


class AbruptDarkHex(Game):
    name = "abrupt_dark_hex"
    num_players = 2
    is_zero_sum = True

    def __init__(self, size=2):
        if not isinstance(size, int) or size < 1:
            raise InvalidParamsError(f"board size must be a positive int, got {size!r}")
        super().__init__({"size": size})
        self.size = size
        self.max_actions = size * size
        self._neigh = _neighbors(size)

    def initial_sim(self):
        return DarkHexSim(self.size, self._neigh)

    def record_legal_actions(self, events):
        return _own_view_legal(events, self.size * self.size)
