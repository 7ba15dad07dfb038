import numpy as np
import pytest

from updeq.games import CHANCE, new_game
from updeq.policy import JointPolicy, TabularPolicy, uniform_joint


@pytest.fixture(scope="session")
def kuhn():
    return new_game("kuhn_poker")


@pytest.fixture(scope="session")
def leduc():
    return new_game("leduc_poker")


@pytest.fixture(scope="session")
def dark_hex2():
    return new_game("abrupt_dark_hex", size=2)


@pytest.fixture(scope="session")
def liars():
    return new_game("liars_dice_4")


@pytest.fixture(scope="session")
def tiny():
    return new_game("tiny_hanabi")


@pytest.fixture(scope="session")
def kuhn_uniform(kuhn):
    return uniform_joint(kuhn)


def empty_uniform(num_players=2):
    """Blueprint that is uniform everywhere via the unseen-key fallback."""
    return JointPolicy([TabularPolicy(p) for p in range(num_players)])


def path_expected_return(game, joint):
    """Independent oracle: enumerate every (chance, action) path, summing
    probability * utility. No solver machinery involved."""
    totals = np.zeros(game.num_players)

    def walk(h, prob):
        if h.is_terminal():
            totals[:] += prob * np.asarray(h.returns())
            return
        if h.current_player() == CHANCE:
            for oc in h.chance_outcomes():
                walk(h.child(oc.action), prob * oc.probability)
            return
        p = h.current_player()
        legal = h.legal_actions()
        dist = joint[p].get(h.info_state_key(p), len(legal))
        for slot, a in enumerate(legal):
            if dist[slot] > 0:
                walk(h.child(a), prob * dist[slot])

    walk(game.root(), 1.0)
    return totals


def path_reach_table(game, joint):
    """(history -> (chance_reach, reach_p0, reach_p1)) by direct walk."""
    out = {}

    def walk(h, rc, r0, r1):
        out[h.trajectory] = (rc, r0, r1, h)
        if h.is_terminal():
            return
        if h.current_player() == CHANCE:
            for oc in h.chance_outcomes():
                walk(h.child(oc.action), rc * oc.probability, r0, r1)
            return
        p = h.current_player()
        legal = h.legal_actions()
        dist = joint[p].get(h.info_state_key(p), len(legal))
        for slot, a in enumerate(legal):
            walk(h.child(a), rc,
                 r0 * (dist[slot] if p == 0 else 1.0),
                 r1 * (dist[slot] if p == 1 else 1.0))

    walk(game.root(), 1.0, 1.0, 1.0)
    return out


def path_history_value(game, joint, h, player):
    """Expected remaining return from h for player under joint."""
    if h.is_terminal():
        return h.utility(player)
    if h.current_player() == CHANCE:
        return sum(oc.probability * path_history_value(game, joint,
                                                       h.child(oc.action), player)
                   for oc in h.chance_outcomes())
    p = h.current_player()
    legal = h.legal_actions()
    dist = joint[p].get(h.info_state_key(p), len(legal))
    return sum(dist[s] * path_history_value(game, joint, h.child(a), player)
               for s, a in enumerate(legal))


def random_joint(game, gen, interior=0.0):
    """Random tabular joint policy (Dirichlet rows)."""
    from updeq.solver import build_tree
    tree = build_tree(game)
    pols = [TabularPolicy(p) for p in range(game.num_players)]
    for iid in range(tree.n_infostates):
        k = int(tree.is_nact[iid])
        row = gen.dirichlet(np.ones(k))
        if interior > 0:
            row = (1 - interior) * row + interior / k
        pols[int(tree.is_player[iid])].table[tree.is_keys[iid]] = row
    return JointPolicy(pols)
