"""Pure numpy tree-sweep kernels (fallback twin of updeq._core).

All kernels operate on a TreeIndex plus per-edge transition coefficients
and per-node additive bonuses; they batch work level by level so the hot
loops stay inside numpy. The compiled backend implements the same
contracts with flat C loops; tests pin the two against each other.
"""

from __future__ import annotations

import numpy as np

from .tree import DECISION, TERMINAL, TreeIndex


def _ranges(counts):
    """[0..c0), [0..c1), ... concatenated."""
    total = int(counts.sum())
    out = np.arange(total, dtype=np.int64)
    starts = np.repeat(np.cumsum(counts) - counts, counts)
    return out - starts


def _resp_struct(tree: TreeIndex, level: int, player: int):
    """Per-(level, player) gather indices for infostate-synchronized sweeps."""
    tree._ensure_levels()
    cache = getattr(tree, "_resp_cache", None)
    if cache is None:
        cache = tree._resp_cache = {}
    key = (level, player)
    if key in cache:
        return cache[key]
    nodes = tree.level_nodes[level]
    nodes = nodes[(tree.kind[nodes] == DECISION) & (tree.player[nodes] == player)]
    if len(nodes) == 0:
        cache[key] = None
        return None
    iids = tree.node_infostate[nodes]
    uniq, rows = np.unique(iids, return_inverse=True)
    counts = (tree.first_edge[nodes + 1] - tree.first_edge[nodes]).astype(np.int64)
    edges = np.repeat(tree.first_edge[nodes], counts) + _ranges(counts)
    erow = np.repeat(rows, counts)
    eslot = (tree.edge_polidx[edges]
             - tree.is_offset[np.repeat(iids, counts)]).astype(np.int64)
    nact = tree.is_nact[uniq].astype(np.int64)
    width = int(nact.max())
    valid = np.arange(width)[None, :] < nact[:, None]
    gather = tree.is_offset[uniq][:, None] + np.arange(width)[None, :]
    gather = np.where(valid, gather, tree.is_offset[uniq][:, None])
    struct = {
        "nodes": nodes, "rows": rows, "uniq": uniq,
        "edges": edges, "erow": erow, "eslot": eslot,
        "nact": nact, "width": width, "valid": valid,
        "gather": gather,
    }
    cache[key] = struct
    return struct


def factored_reach(tree: TreeIndex, tp0, tp1, tpc):
    """Per-node reach probability factors (player 0, player 1, chance)."""
    tree._ensure_levels()
    n = tree.n_nodes
    r0 = np.ones(n)
    r1 = np.ones(n)
    rc = np.ones(n)
    child = tree.edge_child
    parent = tree.edge_parent
    for d in range(tree.max_depth):
        e = tree.level_edges[d]
        if len(e) == 0:
            continue
        c = child[e]
        p = parent[e]
        r0[c] = r0[p] * tp0[e]
        r1[c] = r1[p] * tp1[e]
        rc[c] = rc[p] * tpc[e]
    return r0, r1, rc


def backward_values(tree: TreeIndex, tp, bonus, util_col):
    """One player's history values: v = util at terminals, else
    bonus + sum of tp-weighted child values."""
    tree._ensure_levels()
    v = np.zeros(tree.n_nodes)
    term = tree.kind == TERMINAL
    v[term] = util_col[term]
    parent = tree.edge_parent
    child = tree.edge_child
    for d in range(tree.max_depth - 1, -1, -1):
        e = tree.level_edges[d]
        if len(e):
            np.add.at(v, parent[e], tp[e] * v[child[e]])
        nodes = tree.level_nodes[d]
        nt = nodes[tree.kind[nodes] != TERMINAL]
        v[nt] += bonus[nt]
    return v


def aggregate_q(tree: TreeIndex, player: int, w, v):
    """Weighted per-infostate action values.

    q[offset+slot] = sum over member histories of w(h) * v(child(h, a)),
    normalized by wsum per infostate (rows with wsum == 0 stay 0).
    Returns (q_flat, wsum per infostate).
    """
    tree._ensure_agg()
    edges = tree.dec_edges[player]
    nodes = tree.dec_nodes[player]
    q = np.zeros(tree.pol_size)
    np.add.at(q, tree.edge_polidx[edges],
              w[tree.edge_parent[edges]] * v[tree.edge_child[edges]])
    wsum = np.zeros(tree.n_infostates)
    np.add.at(wsum, tree.node_infostate[nodes], w[nodes])
    denom = wsum[tree.pol_seg()]
    q = np.divide(q, denom, out=np.zeros_like(q), where=denom > 0)
    return q, wsum


def _softmax_rows(z, valid):
    z = np.where(valid, z, -np.inf)
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    e[~valid] = 0.0
    return e / e.sum(axis=1, keepdims=True)


def _entropy_rows(dist, valid):
    with np.errstate(divide="ignore", invalid="ignore"):
        plogp = np.where((dist > 0) & valid, dist * np.log(dist), 0.0)
    return -plogp.sum(axis=1)


def _aggregate_level(tree, st, w, v):
    """(Qn, W): normalized action-value rows and weight mass per infostate
    at one level."""
    edges = st["edges"]
    contrib = w[tree.edge_parent[edges]] * v[tree.edge_child[edges]]
    Q = np.zeros((len(st["uniq"]), st["width"]))
    np.add.at(Q, (st["erow"], st["eslot"]), contrib)
    W = np.zeros(len(st["uniq"]))
    np.add.at(W, st["rows"], w[st["nodes"]])
    Qn = np.divide(Q, W[:, None], out=np.zeros_like(Q), where=W[:, None] > 0)
    return Qn, W


def _scatter_rows(flat_out, st, rows_matrix):
    flat_out[st["gather"][st["valid"]]] = rows_matrix[st["valid"]]


def response_sweep(tree: TreeIndex, tp, bonus, util_col, player, w,
                   soft: bool, alpha: float):
    """Best response (soft=False) or entropy-regularized response
    (soft=True) for ``player`` against the tp-encoded co-players.

    At the responder's infostates the local policy comes from the
    w-weighted action values: argmax with lowest-index ties, or
    softmax(q/alpha) plus an alpha*entropy value bonus. Other nodes follow
    tp and collect ``bonus``. Returns (root value, response policy flat).
    """
    tree._ensure_levels()
    v = np.zeros(tree.n_nodes)
    term = tree.kind == TERMINAL
    v[term] = util_col[term]
    parent = tree.edge_parent
    child = tree.edge_child
    pol = np.zeros(tree.pol_size)
    for d in range(tree.max_depth - 1, -1, -1):
        st = _resp_struct(tree, d, player)
        e = tree.level_edges[d]
        if len(e):
            keep = ~((tree.kind[parent[e]] == DECISION)
                     & (tree.player[parent[e]] == player))
            eo = e[keep]
            if len(eo):
                np.add.at(v, parent[eo], tp[eo] * v[child[eo]])
        nodes = tree.level_nodes[d]
        other = nodes[(tree.kind[nodes] != TERMINAL)
                      & ~((tree.kind[nodes] == DECISION)
                          & (tree.player[nodes] == player))]
        v[other] += bonus[other]
        if st is None:
            continue
        Qn, _ = _aggregate_level(tree, st, w, v)
        if soft:
            dist = _softmax_rows(Qn / alpha, st["valid"])
            ent = _entropy_rows(dist, st["valid"])
        else:
            masked = np.where(st["valid"], Qn, -np.inf)
            best = np.argmax(masked, axis=1)
            dist = np.zeros_like(Qn)
            dist[np.arange(len(best)), best] = 1.0
        _scatter_rows(pol, st, dist)
        edges = st["edges"]
        np.add.at(v, parent[edges], dist[st["erow"], st["eslot"]] * v[child[edges]])
        if soft:
            v[st["nodes"]] += alpha * ent[st["rows"]]
    return float(v[0]), pol


def batch_mmd_rows(pol_rows, q_rows, rho_rows, eta, alpha, valid):
    """Row-wise magnetic update on padded matrices (alpha=0 gives hedge)."""
    with np.errstate(divide="ignore"):
        x = np.log(pol_rows) + eta * q_rows
        if alpha != 0.0:
            x = (x + (eta * alpha) * np.log(rho_rows)) / (1.0 + alpha * eta)
    return _softmax_rows(x, valid)


def subgame_sweep(tree: TreeIndex, tp, bonus, util_col, player, w, pol_flat,
                  rho_flat, eta, alpha, own_entropy_alpha):
    """Child-before-parent sweep that MMD-updates the player's own
    infostates as it backs up, so each update's feedback already reflects
    the updated descendants. Returns (new policy flat, feedback q flat);
    only the player's rows differ from the inputs / zero.
    """
    tree._ensure_levels()
    v = np.zeros(tree.n_nodes)
    term = tree.kind == TERMINAL
    v[term] = util_col[term]
    parent = tree.edge_parent
    child = tree.edge_child
    newpol = pol_flat.copy()
    qout = np.zeros(tree.pol_size)
    for d in range(tree.max_depth - 1, -1, -1):
        st = _resp_struct(tree, d, player)
        e = tree.level_edges[d]
        if len(e):
            keep = ~((tree.kind[parent[e]] == DECISION)
                     & (tree.player[parent[e]] == player))
            eo = e[keep]
            if len(eo):
                np.add.at(v, parent[eo], tp[eo] * v[child[eo]])
        nodes = tree.level_nodes[d]
        other = nodes[(tree.kind[nodes] != TERMINAL)
                      & ~((tree.kind[nodes] == DECISION)
                          & (tree.player[nodes] == player))]
        v[other] += bonus[other]
        if st is None:
            continue
        Qn, W = _aggregate_level(tree, st, w, v)
        pol_rows = pol_flat[st["gather"]]
        rho_rows = rho_flat[st["gather"]]
        dist = batch_mmd_rows(pol_rows, Qn, rho_rows, eta, alpha, st["valid"])
        skip = W <= 0
        if np.any(skip):
            dist[skip] = pol_rows[skip]
            Qn = Qn.copy()
            Qn[skip] = 0.0
        _scatter_rows(newpol, st, dist)
        _scatter_rows(qout, st, Qn)
        edges = st["edges"]
        np.add.at(v, parent[edges], dist[st["erow"], st["eslot"]] * v[child[edges]])
        if own_entropy_alpha > 0.0:
            ent = _entropy_rows(dist, st["valid"])
            v[st["nodes"]] += own_entropy_alpha * ent[st["rows"]]
    return newpol, qout
