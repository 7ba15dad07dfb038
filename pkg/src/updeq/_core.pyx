# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the tree-sweep kernels and the board-game search
loop. Contracts, draw discipline and summation order match the pure
Python implementations (updeq.solver.kernels_py, updeq.beliefs,
updeq.dtp) so results agree bit-for-bit given the same PCG64 stream."""

from libc.math cimport exp, log, INFINITY
from libc.stdlib cimport free, malloc
from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid

import numpy as np
cimport numpy as cnp
from numpy.random cimport bitgen_t

cnp.import_array()

DECISION = 0
CHANCE_NODE = 1
TERMINAL = 2


cdef bitgen_t* _bitgen(object bit_generator) except NULL:
    capsule = bit_generator.capsule
    cdef const char* name = "BitGenerator"
    if not PyCapsule_IsValid(capsule, name):
        raise ValueError("expected a numpy BitGenerator")
    return <bitgen_t*> PyCapsule_GetPointer(capsule, name)


cdef inline double _next_double(bitgen_t* rng) noexcept nogil:
    return rng.next_double(rng.state)


# ---------------------------------------------------------------------------
# tree sweeps
# ---------------------------------------------------------------------------

def factored_reach(tree, tp0, tp1, tpc):
    cdef cnp.int64_t[::1] first_edge = tree.first_edge
    cdef cnp.int32_t[::1] child = tree.edge_child
    cdef double[::1] t0 = np.ascontiguousarray(tp0)
    cdef double[::1] t1 = np.ascontiguousarray(tp1)
    cdef double[::1] tc = np.ascontiguousarray(tpc)
    cdef Py_ssize_t n = tree.n_nodes
    r0_arr = np.ones(n)
    r1_arr = np.ones(n)
    rc_arr = np.ones(n)
    cdef double[::1] r0 = r0_arr
    cdef double[::1] r1 = r1_arr
    cdef double[::1] rc = rc_arr
    cdef Py_ssize_t i, e, c
    with nogil:
        for i in range(n):
            for e in range(first_edge[i], first_edge[i + 1]):
                c = child[e]
                r0[c] = r0[i] * t0[e]
                r1[c] = r1[i] * t1[e]
                rc[c] = rc[i] * tc[e]
    return r0_arr, r1_arr, rc_arr


def backward_values(tree, tp, bonus, util_col):
    cdef cnp.int64_t[::1] first_edge = tree.first_edge
    cdef cnp.int32_t[::1] child = tree.edge_child
    cdef cnp.int8_t[::1] kind = tree.kind
    cdef double[::1] t = np.ascontiguousarray(tp)
    cdef double[::1] b = np.ascontiguousarray(bonus)
    cdef double[::1] u = np.ascontiguousarray(util_col)
    cdef Py_ssize_t n = tree.n_nodes
    v_arr = np.zeros(n)
    cdef double[::1] v = v_arr
    cdef Py_ssize_t i, e
    cdef double acc
    with nogil:
        for i in range(n - 1, -1, -1):
            if kind[i] == 2:
                v[i] = u[i]
            else:
                acc = 0.0
                for e in range(first_edge[i], first_edge[i + 1]):
                    acc += t[e] * v[child[e]]
                v[i] = acc + b[i]
    return v_arr


def aggregate_q(tree, int player, w, v):
    cdef cnp.int64_t[::1] first_edge = tree.first_edge
    cdef cnp.int32_t[::1] child = tree.edge_child
    cdef cnp.int8_t[::1] kind = tree.kind
    cdef cnp.int8_t[::1] nplayer = tree.player
    cdef cnp.int32_t[::1] infostate = tree.node_infostate
    cdef cnp.int64_t[::1] polidx = tree.edge_polidx
    cdef double[::1] wv = np.ascontiguousarray(w)
    cdef double[::1] vv = np.ascontiguousarray(v)
    cdef Py_ssize_t n = tree.n_nodes
    cdef Py_ssize_t P = tree.pol_size
    cdef Py_ssize_t I = tree.n_infostates
    q_arr = np.zeros(P)
    wsum_arr = np.zeros(I)
    cdef double[::1] q = q_arr
    cdef double[::1] wsum = wsum_arr
    cdef cnp.int32_t[::1] seg = tree.pol_seg()
    cdef Py_ssize_t i, e, j
    with nogil:
        for i in range(n):
            if kind[i] == 0 and nplayer[i] == player:
                wsum[infostate[i]] += wv[i]
                for e in range(first_edge[i], first_edge[i + 1]):
                    q[polidx[e]] += wv[i] * vv[child[e]]
        for j in range(P):
            if wsum[seg[j]] > 0:
                q[j] = q[j] / wsum[seg[j]]
            else:
                q[j] = 0.0
    return q_arr, wsum_arr


cdef void _row_softmax(double* x, double* out, Py_ssize_t k) noexcept nogil:
    cdef double m = -INFINITY
    cdef double s = 0.0
    cdef Py_ssize_t j
    for j in range(k):
        if x[j] > m:
            m = x[j]
    for j in range(k):
        out[j] = exp(x[j] - m)
        s += out[j]
    for j in range(k):
        out[j] = out[j] / s


cdef double _row_entropy(double* p, Py_ssize_t k) noexcept nogil:
    cdef double h = 0.0
    cdef Py_ssize_t j
    for j in range(k):
        if p[j] > 0:
            h -= p[j] * log(p[j])
    return h


def response_sweep(tree, tp, bonus, util_col, int player, w,
                   bint soft, double alpha):
    tree._ensure_levels()
    if int(tree.is_nact.max(initial=0)) > 64:
        raise ValueError("infostates wider than 64 actions are unsupported")
    cdef cnp.int64_t[::1] first_edge = tree.first_edge
    cdef cnp.int32_t[::1] child = tree.edge_child
    cdef cnp.int8_t[::1] kind = tree.kind
    cdef cnp.int8_t[::1] nplayer = tree.player
    cdef cnp.int32_t[::1] infostate = tree.node_infostate
    cdef cnp.int64_t[::1] polidx = tree.edge_polidx
    cdef cnp.int64_t[::1] is_offset = tree.is_offset
    cdef cnp.int32_t[::1] is_nact = tree.is_nact
    cdef cnp.int32_t[::1] order = tree.desc_order
    cdef cnp.int64_t[::1] starts = tree.desc_starts
    cdef double[::1] t = np.ascontiguousarray(tp)
    cdef double[::1] b = np.ascontiguousarray(bonus)
    cdef double[::1] u = np.ascontiguousarray(util_col)
    cdef double[::1] wv = np.ascontiguousarray(w)
    cdef Py_ssize_t n = tree.n_nodes
    cdef Py_ssize_t P = tree.pol_size
    cdef Py_ssize_t I = tree.n_infostates
    v_arr = np.zeros(n)
    pol_arr = np.zeros(P)
    cdef double[::1] v = v_arr
    cdef double[::1] pol = pol_arr
    qacc_arr = np.zeros(P)
    wacc_arr = np.zeros(I)
    ent_arr = np.zeros(I)
    touched_arr = np.zeros(I, dtype=np.int32)
    cdef double[::1] qacc = qacc_arr
    cdef double[::1] wacc = wacc_arr
    cdef double[::1] entv = ent_arr
    cdef cnp.int32_t[::1] touched = touched_arr
    cdef Py_ssize_t n_levels = starts.shape[0] - 1
    cdef Py_ssize_t lev, p0, p1, idx, i, e, j, k, iid, off, ntouched, best
    cdef double acc, bestq, qj
    cdef double xbuf[64]
    cdef double dbuf[64]
    with nogil:
        for lev in range(n_levels):
            p0 = starts[lev]
            p1 = starts[lev + 1]
            ntouched = 0
            # accumulate responder feedback; value everything else
            for idx in range(p0, p1):
                i = order[idx]
                if kind[i] == 2:
                    v[i] = u[i]
                elif kind[i] == 0 and nplayer[i] == player:
                    iid = infostate[i]
                    if wacc[iid] == 0.0:
                        touched[ntouched] = iid
                        ntouched += 1
                    wacc[iid] += wv[i]
                    for e in range(first_edge[i], first_edge[i + 1]):
                        qacc[polidx[e]] += wv[i] * v[child[e]]
                else:
                    acc = 0.0
                    for e in range(first_edge[i], first_edge[i + 1]):
                        acc += t[e] * v[child[e]]
                    v[i] = acc + b[i]
            # decide the responder's local policies at this level
            for j in range(ntouched):
                iid = touched[j]
                off = is_offset[iid]
                k = is_nact[iid]
                if wacc[iid] > 0:
                    for e in range(k):
                        xbuf[e] = qacc[off + e] / wacc[iid]
                else:
                    for e in range(k):
                        xbuf[e] = 0.0
                if soft:
                    for e in range(k):
                        xbuf[e] = xbuf[e] / alpha
                    _row_softmax(xbuf, dbuf, k)
                    entv[iid] = _row_entropy(dbuf, k)
                    for e in range(k):
                        pol[off + e] = dbuf[e]
                else:
                    best = 0
                    bestq = xbuf[0]
                    for e in range(1, k):
                        if xbuf[e] > bestq:
                            bestq = xbuf[e]
                            best = e
                    for e in range(k):
                        pol[off + e] = 0.0
                    pol[off + best] = 1.0
            # responder member values under the decided policies
            for idx in range(p0, p1):
                i = order[idx]
                if kind[i] == 0 and nplayer[i] == player:
                    iid = infostate[i]
                    acc = 0.0
                    for e in range(first_edge[i], first_edge[i + 1]):
                        acc += pol[polidx[e]] * v[child[e]]
                    if soft:
                        acc += alpha * entv[iid]
                    v[i] = acc
            # reset scratch
            for j in range(ntouched):
                iid = touched[j]
                off = is_offset[iid]
                for e in range(is_nact[iid]):
                    qacc[off + e] = 0.0
                wacc[iid] = 0.0
    return float(v_arr[0]), pol_arr


def subgame_sweep(tree, tp, bonus, util_col, int player, w, pol_flat,
                  rho_flat, double eta, double alpha,
                  double own_entropy_alpha):
    tree._ensure_levels()
    if int(tree.is_nact.max(initial=0)) > 64:
        raise ValueError("infostates wider than 64 actions are unsupported")
    cdef cnp.int64_t[::1] first_edge = tree.first_edge
    cdef cnp.int32_t[::1] child = tree.edge_child
    cdef cnp.int8_t[::1] kind = tree.kind
    cdef cnp.int8_t[::1] nplayer = tree.player
    cdef cnp.int32_t[::1] infostate = tree.node_infostate
    cdef cnp.int64_t[::1] polidx = tree.edge_polidx
    cdef cnp.int64_t[::1] is_offset = tree.is_offset
    cdef cnp.int32_t[::1] is_nact = tree.is_nact
    cdef cnp.int32_t[::1] order = tree.desc_order
    cdef cnp.int64_t[::1] starts = tree.desc_starts
    cdef double[::1] t = np.ascontiguousarray(tp)
    cdef double[::1] b = np.ascontiguousarray(bonus)
    cdef double[::1] u = np.ascontiguousarray(util_col)
    cdef double[::1] wv = np.ascontiguousarray(w)
    cdef double[::1] pold = np.ascontiguousarray(pol_flat)
    cdef double[::1] rho = np.ascontiguousarray(rho_flat)
    cdef Py_ssize_t n = tree.n_nodes
    cdef Py_ssize_t P = tree.pol_size
    cdef Py_ssize_t I = tree.n_infostates
    v_arr = np.zeros(n)
    newpol_arr = np.asarray(pol_flat, dtype=float).copy()
    qout_arr = np.zeros(P)
    cdef double[::1] v = v_arr
    cdef double[::1] newpol = newpol_arr
    cdef double[::1] qout = qout_arr
    qacc_arr = np.zeros(P)
    wacc_arr = np.zeros(I)
    ent_arr = np.zeros(I)
    touched_arr = np.zeros(I, dtype=np.int32)
    cdef double[::1] qacc = qacc_arr
    cdef double[::1] wacc = wacc_arr
    cdef double[::1] entv = ent_arr
    cdef cnp.int32_t[::1] touched = touched_arr
    cdef Py_ssize_t n_levels = starts.shape[0] - 1
    cdef Py_ssize_t lev, p0, p1, idx, i, e, j, k, iid, off, ntouched
    cdef double acc, denom
    cdef double xbuf[64]
    cdef double dbuf[64]
    denom = 1.0 + alpha * eta
    with nogil:
        for lev in range(n_levels):
            p0 = starts[lev]
            p1 = starts[lev + 1]
            ntouched = 0
            for idx in range(p0, p1):
                i = order[idx]
                if kind[i] == 2:
                    v[i] = u[i]
                elif kind[i] == 0 and nplayer[i] == player:
                    iid = infostate[i]
                    if wacc[iid] == 0.0:
                        touched[ntouched] = iid
                        ntouched += 1
                    wacc[iid] += wv[i]
                    for e in range(first_edge[i], first_edge[i + 1]):
                        qacc[polidx[e]] += wv[i] * v[child[e]]
                else:
                    acc = 0.0
                    for e in range(first_edge[i], first_edge[i + 1]):
                        acc += t[e] * v[child[e]]
                    v[i] = acc + b[i]
            for j in range(ntouched):
                iid = touched[j]
                off = is_offset[iid]
                k = is_nact[iid]
                if wacc[iid] > 0:
                    for e in range(k):
                        qout[off + e] = qacc[off + e] / wacc[iid]
                    # magnetic update in log space, matching updates.mmd_row
                    for e in range(k):
                        xbuf[e] = log(pold[off + e]) + eta * qout[off + e]
                    if alpha != 0.0:
                        for e in range(k):
                            xbuf[e] = (xbuf[e]
                                       + (eta * alpha) * log(rho[off + e])) / denom
                    _row_softmax(xbuf, dbuf, k)
                    for e in range(k):
                        newpol[off + e] = dbuf[e]
                else:
                    for e in range(k):
                        dbuf[e] = pold[off + e]
                if own_entropy_alpha > 0.0:
                    for e in range(k):
                        dbuf[e] = newpol[off + e]
                    entv[iid] = _row_entropy(dbuf, k)
            for idx in range(p0, p1):
                i = order[idx]
                if kind[i] == 0 and nplayer[i] == player:
                    iid = infostate[i]
                    acc = 0.0
                    for e in range(first_edge[i], first_edge[i + 1]):
                        acc += newpol[polidx[e]] * v[child[e]]
                    if own_entropy_alpha > 0.0:
                        acc += own_entropy_alpha * entv[iid]
                    v[i] = acc
            for j in range(ntouched):
                iid = touched[j]
                off = is_offset[iid]
                for e in range(is_nact[iid]):
                    qacc[off + e] = 0.0
                wacc[iid] = 0.0
    return newpol_arr, qout_arr


# ---------------------------------------------------------------------------
# dark-board simulation: abrupt dark hex (kind 0) / phantom ttt (kind 1)
# ---------------------------------------------------------------------------

DEF MAX_CELLS = 25

cdef struct BoardState:
    cnp.int8_t board[MAX_CELLS]      # -1 empty, else owner
    cnp.int8_t known0[MAX_CELLS]     # revealed opponent stones per player
    cnp.int8_t known1[MAX_CELLS]
    int to_act
    int winner                       # -1 running, 0/1 win, 2 draw
    int stones


cdef void _board_init(BoardState* s, int cells) noexcept nogil:
    cdef int c
    for c in range(cells):
        s.board[c] = -1
        s.known0[c] = 0
        s.known1[c] = 0
    s.to_act = 0
    s.winner = -1
    s.stones = 0


cdef bint _hex_connected(BoardState* s, int n, int p) noexcept nogil:
    cdef int stack[MAX_CELLS]
    cdef cnp.int8_t seen[MAX_CELLS]
    cdef int top = 0
    cdef int c, r, cc, rr, col, k, d
    cdef int drs[6]
    cdef int dcs[6]
    drs[0] = -1; dcs[0] = 0
    drs[1] = -1; dcs[1] = 1
    drs[2] = 0;  dcs[2] = -1
    drs[3] = 0;  dcs[3] = 1
    drs[4] = 1;  dcs[4] = -1
    drs[5] = 1;  dcs[5] = 0
    for c in range(n * n):
        seen[c] = 0
    if p == 0:
        for c in range(n):
            if s.board[c] == 0:
                stack[top] = c
                top += 1
                seen[c] = 1
    else:
        for r in range(n):
            if s.board[r * n] == 1:
                stack[top] = r * n
                top += 1
                seen[r * n] = 1
    while top > 0:
        top -= 1
        c = stack[top]
        if p == 0 and c >= n * (n - 1):
            return True
        if p == 1 and c % n == n - 1:
            return True
        r = c / n
        col = c % n
        for d in range(6):
            rr = r + drs[d]
            cc = col + dcs[d]
            if 0 <= rr < n and 0 <= cc < n:
                k = rr * n + cc
                if s.board[k] == p and not seen[k]:
                    seen[k] = 1
                    stack[top] = k
                    top += 1
    return False


cdef bint _ttt_wins(BoardState* s, int p) noexcept nogil:
    cdef int lines[8][3]
    lines[0][0] = 0; lines[0][1] = 1; lines[0][2] = 2
    lines[1][0] = 3; lines[1][1] = 4; lines[1][2] = 5
    lines[2][0] = 6; lines[2][1] = 7; lines[2][2] = 8
    lines[3][0] = 0; lines[3][1] = 3; lines[3][2] = 6
    lines[4][0] = 1; lines[4][1] = 4; lines[4][2] = 7
    lines[5][0] = 2; lines[5][1] = 5; lines[5][2] = 8
    lines[6][0] = 0; lines[6][1] = 4; lines[6][2] = 8
    lines[7][0] = 2; lines[7][1] = 4; lines[7][2] = 6
    cdef int i
    for i in range(8):
        if (s.board[lines[i][0]] == p and s.board[lines[i][1]] == p
                and s.board[lines[i][2]] == p):
            return True
    return False


cdef int _board_step(BoardState* s, int kind, int n, int cell) noexcept nogil:
    """Apply a move for s.to_act; returns the mover's observation
    (0 placed, 1 collision)."""
    cdef int p = s.to_act
    cdef cnp.int8_t* known
    if p == 0:
        known = &s.known0[0]
    else:
        known = &s.known1[0]
    if s.board[cell] == 1 - p:
        known[cell] = 1
        if kind == 0:
            s.to_act = 1 - p        # abrupt: turn lost
        # phantom ttt: mover keeps the turn
        return 1
    s.board[cell] = p
    s.stones += 1
    if kind == 0:
        if _hex_connected(s, n, p):
            s.winner = p
        s.to_act = 1 - p
    else:
        if _ttt_wins(s, p):
            s.winner = p
        elif s.stones == n * n:
            s.winner = 2
        else:
            s.to_act = 1 - p
    return 0


cdef int _board_legal(BoardState* s, int cells, int p, int* out) noexcept nogil:
    cdef cnp.int8_t* known
    cdef int c, k = 0
    if p == 0:
        known = &s.known0[0]
    else:
        known = &s.known1[0]
    for c in range(cells):
        if s.board[c] != p and not known[c]:
            out[k] = c
            k += 1
    return k


cdef int _draw_uniform(bitgen_t* rng, int k) noexcept nogil:
    cdef double u = _next_double(rng)
    cdef double c = 0.0
    cdef double p = 1.0 / k
    cdef int i
    for i in range(k):
        c += p
        if u < c:
            return i
    return k - 1


cdef bint _board_replay(BoardState* s, int kind, int n, int cells,
                        cnp.int32_t[::1] tags, cnp.int32_t[::1] vals,
                        int agent, bitgen_t* rng) noexcept nogil:
    """One rejection attempt; True leaves s at the decision point."""
    cdef int n_ev = tags.shape[0]
    cdef int ptr = 0
    cdef int p, a, obs, k
    cdef int legal[MAX_CELLS]
    _board_init(s, cells)
    while True:
        if s.winner >= 0:
            return False
        p = s.to_act
        if p == agent and ptr == n_ev:
            return True
        if p == agent:
            if tags[ptr] != 1:          # must be the agent's own action
                return False
            a = vals[ptr]
            if s.board[a] == agent:
                return False
            if agent == 0:
                if s.known0[a]:
                    return False
            else:
                if s.known1[a]:
                    return False
            obs = _board_step(s, kind, n, a)
            # the following record event is the move's observed result
            if ptr + 1 >= n_ev or tags[ptr + 1] != 0 or vals[ptr + 1] != obs:
                return False
            ptr += 2
        else:
            k = _board_legal(s, cells, p, legal)
            a = legal[_draw_uniform(rng, k)]
            _board_step(s, kind, n, a)


cdef double _board_rollout(BoardState* s, int kind, int n, int cells,
                           int agent, int first_cell,
                           bitgen_t* rng) noexcept nogil:
    """Force first_cell, then uniform play to the end; agent's return."""
    cdef BoardState t = s[0]
    cdef int legal[MAX_CELLS]
    cdef int k, a
    _board_step(&t, kind, n, first_cell)
    while t.winner < 0:
        k = _board_legal(&t, cells, t.to_act, legal)
        a = legal[_draw_uniform(rng, k)]
        _board_step(&t, kind, n, a)
    if t.winner == 2:
        return 0.0
    return 1.0 if t.winner == agent else -1.0


def board_particle_q(int kind, int n, tags, vals, int agent,
                     int n_particles, int max_attempts, bit_generator):
    """Particle filter + per-(particle, action) rollouts for the dark
    board games with a uniform blueprint. Returns (legal actions, running
    means, counts); counts are zero when no particle survived."""
    cdef cnp.int32_t[::1] tg = np.ascontiguousarray(tags, dtype=np.int32)
    cdef cnp.int32_t[::1] vl = np.ascontiguousarray(vals, dtype=np.int32)
    cdef bitgen_t* rng = _bitgen(bit_generator)
    cdef int cells = n * n if kind == 0 else 9
    if kind == 1:
        n = 3
    if cells > MAX_CELLS or n_particles > 4096:
        raise ValueError("board too large or too many particles")

    # the agent's own view fixes its legal actions
    cdef int mine[MAX_CELLS]
    cdef int known[MAX_CELLS]
    cdef int c
    for c in range(cells):
        mine[c] = 0
        known[c] = 0
    cdef int i, last = -1
    for i in range(tg.shape[0]):
        if tg[i] == 1:
            last = vl[i]
        elif last >= 0:
            if vl[i] == 0:
                mine[last] = 1
            else:
                known[last] = 1
            last = -1
    legal_arr = np.array([c for c in range(cells)
                          if not mine[c] and not known[c]], dtype=np.int32)
    cdef cnp.int32_t[::1] legal = legal_arr
    cdef int n_legal = legal.shape[0]

    cdef BoardState state
    cdef BoardState* found = <BoardState*> malloc(n_particles * sizeof(BoardState))
    if found == NULL:
        raise MemoryError()
    cdef int n_found = 0
    cdef int attempts = 0
    with nogil:
        while n_found < n_particles and attempts < max_attempts:
            attempts += 1
            if _board_replay(&state, kind, n, cells, tg, vl, agent, rng):
                found[n_found] = state
                n_found += 1

    means_arr = np.zeros(n_legal)
    counts_arr = np.zeros(n_legal, dtype=np.int64)
    cdef double[::1] means = means_arr
    cdef cnp.int64_t[::1] counts = counts_arr
    cdef double[::1] sums = np.zeros(n_legal)
    cdef double[::1] comp = np.zeros(n_legal)
    cdef double g, y, tsum
    cdef int h, slot
    with nogil:
        for h in range(n_found):
            for slot in range(n_legal):
                g = _board_rollout(&found[h], kind, n, cells, agent,
                                   legal[slot], rng)
                y = g - comp[slot]
                tsum = sums[slot] + y
                comp[slot] = (tsum - sums[slot]) - y
                sums[slot] = tsum
                counts[slot] += 1
        for slot in range(n_legal):
            if counts[slot] > 0:
                means[slot] = sums[slot] / counts[slot]
    free(found)
    return legal_arr, means_arr, counts_arr


def board_playout(int kind, int n, bit_generator):
    """Uniform-random playout from the empty board; returns player-0
    utility. Exists for the backend-twin tests and benchmarks."""
    cdef bitgen_t* rng = _bitgen(bit_generator)
    cdef int cells = n * n if kind == 0 else 9
    if kind == 1:
        n = 3
    cdef BoardState s
    cdef int legal[MAX_CELLS]
    cdef int k, a
    with nogil:
        _board_init(&s, cells)
        while s.winner < 0:
            k = _board_legal(&s, cells, s.to_act, legal)
            a = legal[_draw_uniform(rng, k)]
            _board_step(&s, kind, n, a)
    if s.winner == 2:
        return 0.0
    return 1.0 if s.winner == 0 else -1.0
