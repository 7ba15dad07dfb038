"""Core interfaces for finite-horizon, turn-based imperfect-information games.

Games are defined by a mutable simulator (``SimState``) driving an immutable
history wrapper (``HistoryState``).  Every transition emits per-player
observation events; a player's information state is the byte encoding of its
own action-observation event sequence, which makes keys collision-free and
prefix-consistent by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

CHANCE = -1

# Event tags. An event is a (tag, value) pair with value in [0, 256).
OBS = 0
ACT = 1

DEFAULT_NODE_BUDGET = 10_000_000


class UnknownGameError(ValueError):
    """Raised when the registry does not know a game name."""


class InvalidParamsError(ValueError):
    """Raised for malformed game parameters (e.g. board size 0)."""


class BudgetExceededError(RuntimeError):
    """Raised when a traversal exceeds its node budget."""


@dataclass(frozen=True)
class ChanceOutcome:
    action: int
    probability: float


class SimState:
    """Mutable per-game simulator state.

    ``apply`` mutates in place and returns the events each player observed
    for that transition, as a tuple with one list of (tag, value) pairs per
    player. The acting player's own action is reported as an (ACT, action)
    event; everything else is (OBS, token).
    """

    def current_player(self) -> int:
        raise NotImplementedError

    def is_terminal(self) -> bool:
        raise NotImplementedError

    def legal_actions(self) -> list[int]:
        raise NotImplementedError

    def chance_outcomes(self) -> list[ChanceOutcome]:
        raise NotImplementedError

    def apply(self, action: int) -> tuple[list[tuple[int, int]], ...]:
        raise NotImplementedError

    def returns(self) -> tuple[float, ...]:
        raise NotImplementedError

    def clone(self) -> "SimState":
        raise NotImplementedError


class Game:
    """Immutable rules object. Subclasses set the class-level metadata and
    implement ``initial_sim``."""

    name: str = ""
    num_players: int = 2
    max_actions: int = 0
    is_zero_sum: bool = False
    is_common_payoff: bool = False

    def __init__(self, parameters: Optional[dict] = None):
        self.parameters = dict(parameters or {})
        self._tree_cache = None

    def initial_sim(self) -> SimState:
        raise NotImplementedError

    def record_legal_actions(self, events) -> list[int]:
        """Legal actions at a decision point, recovered from the acting
        player's own action-observation events. Well-defined because every
        shipped game's legal set depends only on the mover's own view."""
        raise NotImplementedError

    def root(self) -> "HistoryState":
        return HistoryState(self)

    def __repr__(self):
        return f"{type(self).__name__}({self.parameters!r})"


class HistoryState:
    """One node of play: the full ground-truth history.

    Immutable: ``child`` clones the simulator, so states can be shared
    freely. Reconstructible from (game, trajectory) alone.
    """

    __slots__ = ("game", "trajectory", "_sim", "_events")

    def __init__(self, game: Game, trajectory: Sequence[int] = (),
                 _sim: Optional[SimState] = None,
                 _events: Optional[tuple] = None):
        self.game = game
        self.trajectory = tuple(trajectory)
        if _sim is None:
            sim = game.initial_sim()
            events = tuple([] for _ in range(game.num_players))
            for a in self.trajectory:
                step = sim.apply(a)
                for p in range(game.num_players):
                    events[p].extend(step[p])
            self._sim = sim
            self._events = tuple(tuple(ev) for ev in events)
        else:
            self._sim = _sim
            self._events = _events

    # -- queries ----------------------------------------------------------

    def current_player(self) -> int:
        return self._sim.current_player()

    def is_terminal(self) -> bool:
        return self._sim.is_terminal()

    def is_chance(self) -> bool:
        return (not self.is_terminal()) and self.current_player() == CHANCE

    def legal_actions(self) -> list[int]:
        if self.is_terminal():
            raise ValueError("legal_actions() called on a terminal state")
        return self._sim.legal_actions()

    def chance_outcomes(self) -> list[ChanceOutcome]:
        if self.is_terminal() or self.current_player() != CHANCE:
            raise ValueError("chance_outcomes() requires a chance node")
        return self._sim.chance_outcomes()

    def returns(self) -> tuple[float, ...]:
        if not self.is_terminal():
            raise ValueError("returns() called on a non-terminal state")
        return self._sim.returns()

    def utility(self, player: int) -> float:
        return self.returns()[player]

    def events(self, player: int) -> tuple[tuple[int, int], ...]:
        """The player's action-observation event sequence from the root."""
        return self._events[player]

    def info_state_key(self, player: int) -> bytes:
        return encode_key(player, self._events[player])

    # -- transitions -------------------------------------------------------

    def child(self, action: int) -> "HistoryState":
        if self.is_terminal():
            raise ValueError("cannot apply an action to a terminal state")
        if self.current_player() == CHANCE:
            legal = [o.action for o in self._sim.chance_outcomes()]
        else:
            legal = self._sim.legal_actions()
        if action not in legal:
            raise ValueError(f"illegal action {action} at {self.trajectory}")
        sim = self._sim.clone()
        step = sim.apply(action)
        events = tuple(self._events[p] + tuple(step[p])
                       for p in range(self.game.num_players))
        return HistoryState(self.game, self.trajectory + (action,),
                            _sim=sim, _events=events)

    def __repr__(self):
        return f"HistoryState({self.game.name}, {self.trajectory})"


def encode_key(player: int, events: Sequence[tuple[int, int]]) -> bytes:
    """Canonical byte encoding of a player's event sequence.

    Layout: one player byte, then (tag, value) byte pairs. Values are
    guaranteed < 256 by all shipped games, so the encoding is injective.
    """
    out = bytearray([player])
    for tag, val in events:
        out.append(tag)
        out.append(val)
    return bytes(out)


# Functional aliases mirroring the engine surface.

def legal_actions(h: HistoryState) -> list[int]:
    return h.legal_actions()


def apply_action(h: HistoryState, action: int) -> HistoryState:
    return h.child(action)


def is_terminal(h: HistoryState) -> bool:
    return h.is_terminal()


def utility(h: HistoryState, player: int) -> float:
    return h.utility(player)


def info_state_key(h: HistoryState, player: int) -> bytes:
    return h.info_state_key(player)


def chance_outcomes(h: HistoryState) -> list[ChanceOutcome]:
    return h.chance_outcomes()


def enumerate_tree(game: Game,
                   budget: int = DEFAULT_NODE_BUDGET) -> Iterator[HistoryState]:
    """Depth-first preorder over every history of the game.

    Children are expanded in canonical action order, so the sequence is
    deterministic. Raises BudgetExceededError past ``budget`` nodes.
    """
    stack = [game.root()]
    seen = 0
    while stack:
        h = stack.pop()
        seen += 1
        if seen > budget:
            raise BudgetExceededError(
                f"{game.name}: tree enumeration exceeded budget of {budget} nodes")
        yield h
        if h.is_terminal():
            continue
        if h.current_player() == CHANCE:
            actions = [o.action for o in h.chance_outcomes()]
        else:
            actions = h.legal_actions()
        for a in reversed(actions):
            stack.append(h.child(a))
