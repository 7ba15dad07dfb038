"""Compiled-vs-pure backend agreement probe (used by `updeq selfcheck`
and the test suite)."""

from __future__ import annotations

import numpy as np

from .. import backend
from ..games import new_game
from ..rng import RngStream
from . import kernels_py
from .tree import build_tree


def kernels_equal(game_name: str = "liars_dice_4", seed: int = 5) -> float:
    """Max absolute disagreement between the compiled kernels and the
    numpy fallback over one randomized workload. Requires the extension."""
    if not backend.compiled_available():
        raise RuntimeError("compiled backend not built")
    from .. import _core

    game = new_game(game_name)
    tree = build_tree(game)
    gen = RngStream(seed, 90).generator()
    flat = np.exp(gen.normal(size=tree.pol_size))
    seg = tree.pol_seg()
    flat /= np.add.reduceat(flat, tree.is_offset)[seg]
    tp = tree.transition_probs(flat)
    tp0, tp1, tpc = tree.factored_probs(flat)
    bonus = 0.1 * gen.normal(size=tree.n_nodes)
    rho = tree.uniform_flat()

    err = 0.0
    ra = kernels_py.factored_reach(tree, tp0, tp1, tpc)
    rb = _core.factored_reach(tree, tp0, tp1, tpc)
    for x, y in zip(ra, rb):
        err = max(err, float(np.max(np.abs(x - y))))
    for player in range(2):
        u = tree.util[:, player]
        w = ra[2] * (ra[1] if player == 0 else ra[0])
        va = kernels_py.backward_values(tree, tp, bonus, u)
        vb = _core.backward_values(tree, tp, bonus, u)
        err = max(err, float(np.max(np.abs(va - vb))))
        qa, wa = kernels_py.aggregate_q(tree, player, w, va)
        qb, wb = _core.aggregate_q(tree, player, w, va)
        err = max(err, float(np.max(np.abs(qa - qb))),
                  float(np.max(np.abs(wa - wb))))
        for soft, alpha in ((False, 0.0), (True, 0.31)):
            sa = kernels_py.response_sweep(tree, tp, bonus, u, player, w,
                                           soft, alpha)
            sb = _core.response_sweep(tree, tp, bonus, u, player, w,
                                      soft, alpha)
            err = max(err, abs(sa[0] - sb[0]),
                      float(np.max(np.abs(sa[1] - sb[1]))))
        ga = kernels_py.subgame_sweep(tree, tp, bonus, u, player, w, flat,
                                      rho, 0.3, 0.2, 0.15)
        gb = _core.subgame_sweep(tree, tp, bonus, u, player, w, flat,
                                 rho, 0.3, 0.2, 0.15)
        err = max(err, float(np.max(np.abs(ga[0] - gb[0]))),
                  float(np.max(np.abs(ga[1] - gb[1]))))
    return err
