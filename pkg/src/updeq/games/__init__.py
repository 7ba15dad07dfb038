"""Game registry and engine surface."""

from __future__ import annotations

from .base import (ACT, CHANCE, DEFAULT_NODE_BUDGET, OBS, BudgetExceededError,
                   ChanceOutcome, Game, HistoryState, InvalidParamsError,
                   SimState, UnknownGameError, apply_action, chance_outcomes,
                   encode_key, enumerate_tree, info_state_key, is_terminal,
                   legal_actions, utility)
from .dark_hex import AbruptDarkHex
from .kuhn import KuhnPoker
from .leduc import LeducPoker
from .liars_dice import LiarsDice4
from .matrix import MatrixGame, matching_pennies
from .phantom_ttt import PhantomTicTacToe
from .random_payoff import RandomCommonPayoff
from .tiny_hanabi import TinyHanabi

_REGISTRY = {
    "kuhn_poker": KuhnPoker,
    "leduc_poker": LeducPoker,
    "abrupt_dark_hex": AbruptDarkHex,
    "phantom_ttt": PhantomTicTacToe,
    "liars_dice_4": LiarsDice4,
    "tiny_hanabi": TinyHanabi,
    "random_common_payoff": RandomCommonPayoff,
}


def game_names():
    return sorted(_REGISTRY)


def new_game(name: str, **params) -> Game:
    """Construct a registered game by name.

    Parameters are game specific: ``abrupt_dark_hex`` takes ``size``;
    ``random_common_payoff`` takes ``seed``, ``size``, ``branching``,
    ``deals``. Unknown names raise UnknownGameError; bad parameters raise
    InvalidParamsError.
    """
    try:
        cls = _REGISTRY[name]
    except KeyError:
        raise UnknownGameError(
            f"unknown game {name!r}; known: {', '.join(game_names())}") from None
    try:
        return cls(**params)
    except TypeError as exc:
        raise InvalidParamsError(f"{name}: {exc}") from None


__all__ = [
    "ACT", "CHANCE", "OBS", "DEFAULT_NODE_BUDGET",
    "BudgetExceededError", "ChanceOutcome", "Game", "HistoryState",
    "InvalidParamsError", "SimState", "UnknownGameError",
    "AbruptDarkHex", "KuhnPoker", "LeducPoker", "LiarsDice4", "MatrixGame",
    "PhantomTicTacToe", "RandomCommonPayoff", "TinyHanabi",
    "apply_action", "chance_outcomes", "encode_key", "enumerate_tree",
    "game_names", "info_state_key", "is_terminal", "legal_actions",
    "matching_pennies", "new_game", "utility",
]
