"""Flat array representation of a full game tree.

Built once per game and cached; all exact computations are array sweeps
over this structure (see kernels_py / the compiled twin in updeq._core).
Nodes are in depth-first preorder, so parents precede children; every edge
increases depth by exactly one, so grouping nodes by depth gives a level
schedule for synchronized backward passes.

Information states must be depth-constant (all member histories at one
trajectory length). That holds for every enumerable game shipped here;
games violating it (none in the registry at solvable sizes) are rejected.
"""

from __future__ import annotations

import numpy as np

from ..games import CHANCE, DEFAULT_NODE_BUDGET, BudgetExceededError, Game
from ..policy import JointPolicy, TabularPolicy

DECISION, CHANCE_NODE, TERMINAL = 0, 1, 2


class TreeIndex:
    def __init__(self, game: Game, budget: int = DEFAULT_NODE_BUDGET):
        self.game = game
        self._build(game, budget)
        self._levels_built = False
        self._agg_built = False

    # -- construction -------------------------------------------------------

    def _build(self, game, budget):
        num_players = game.num_players
        kind, player, depth, infostate = [], [], [], []
        util = []
        edge_lists = []   # per node: list of (child, chance_prob, polidx)
        is_keys, is_player, is_nact, is_depth, is_offset = [], [], [], [], []
        key_to_id = {}
        follows = []      # per infostate, per player: any member's nearest
                          # decision ancestor is that player
        evbuf = [bytearray() for _ in range(num_players)]
        pol_size = 0
        count = 0

        def visit(sim, d, last_dec):
            nonlocal pol_size, count
            nid = count
            count += 1
            if count > budget:
                raise BudgetExceededError(
                    f"{game.name}: tree exceeds node budget {budget}")
            kind.append(0)
            player.append(-1)
            depth.append(d)
            infostate.append(-1)
            util.append(None)
            edge_lists.append(None)
            if sim.is_terminal():
                kind[nid] = TERMINAL
                util[nid] = sim.returns()
                return nid
            cur = sim.current_player()
            edges = []
            if cur == CHANCE:
                kind[nid] = CHANCE_NODE
                total = 0.0
                for oc in sim.chance_outcomes():
                    total += oc.probability
                    child_sim = sim.clone()
                    ev = child_sim.apply(oc.action)
                    for p in range(num_players):
                        for tag, val in ev[p]:
                            evbuf[p].append(tag)
                            evbuf[p].append(val)
                    cid = visit(child_sim, d + 1, last_dec)
                    for p in range(num_players):
                        del evbuf[p][len(evbuf[p]) - 2 * len(ev[p]):]
                    edges.append((cid, oc.probability, -1))
                if abs(total - 1.0) > 1e-12:
                    raise ValueError(
                        f"{game.name}: chance outcomes sum to {total!r}")
            else:
                kind[nid] = DECISION
                player[nid] = cur
                key = bytes([cur]) + bytes(evbuf[cur])
                legal = sim.legal_actions()
                iid = key_to_id.get(key)
                if iid is None:
                    iid = len(is_keys)
                    key_to_id[key] = iid
                    is_keys.append(key)
                    is_player.append(cur)
                    is_nact.append(len(legal))
                    is_depth.append(d)
                    is_offset.append(pol_size)
                    follows.append([False] * num_players)
                    pol_size += len(legal)
                else:
                    if is_nact[iid] != len(legal):
                        raise ValueError(f"{game.name}: inconsistent action count "
                                         f"at infostate {key.hex()}")
                    if is_depth[iid] != d:
                        raise ValueError(
                            f"{game.name}: infostate {key.hex()} spans depths "
                            f"{is_depth[iid]} and {d}; exact solving requires "
                            f"depth-constant infostates")
                if last_dec >= 0:
                    follows[iid][last_dec] = True
                infostate[nid] = iid
                for slot, a in enumerate(legal):
                    child_sim = sim.clone()
                    ev = child_sim.apply(a)
                    for p in range(num_players):
                        for tag, val in ev[p]:
                            evbuf[p].append(tag)
                            evbuf[p].append(val)
                    cid = visit(child_sim, d + 1, cur)
                    for p in range(num_players):
                        del evbuf[p][len(evbuf[p]) - 2 * len(ev[p]):]
                    edges.append((cid, 0.0, is_offset[iid] + slot))
            edge_lists[nid] = edges
            return nid

        import sys
        old_limit = sys.getrecursionlimit()
        sys.setrecursionlimit(max(old_limit, 10000))
        try:
            visit(game.initial_sim(), 0, -1)
        finally:
            sys.setrecursionlimit(old_limit)

        n = count
        self.num_players = num_players
        self.n_nodes = n
        self.kind = np.array(kind, dtype=np.int8)
        self.player = np.array(player, dtype=np.int8)
        self.depth = np.array(depth, dtype=np.int32)
        self.node_infostate = np.array(infostate, dtype=np.int32)
        self.util = np.zeros((n, num_players))
        for i, u in enumerate(util):
            if u is not None:
                self.util[i] = u

        first_edge = np.zeros(n + 1, dtype=np.int64)
        child, cprob, polidx, eparent = [], [], [], []
        for i, edges in enumerate(edge_lists):
            first_edge[i + 1] = first_edge[i] + (len(edges) if edges else 0)
            if edges:
                for c, pr, pi in edges:
                    child.append(c)
                    cprob.append(pr)
                    polidx.append(pi)
                    eparent.append(i)
        self.first_edge = first_edge
        self.n_edges = len(child)
        self.edge_child = np.array(child, dtype=np.int32)
        self.edge_chance_prob = np.array(cprob)
        self.edge_polidx = np.array(polidx, dtype=np.int64)
        self.edge_parent = np.array(eparent, dtype=np.int32)

        self.n_infostates = len(is_keys)
        self.is_keys = is_keys
        self.key_to_id = key_to_id
        self.is_player = np.array(is_player, dtype=np.int8)
        self.is_nact = np.array(is_nact, dtype=np.int32)
        self.is_depth = np.array(is_depth, dtype=np.int32)
        self.is_offset = np.array(is_offset, dtype=np.int64)
        self.pol_size = pol_size
        self.follows = np.array(follows, dtype=bool).reshape(
            self.n_infostates, num_players)
        self.max_depth = int(self.depth.max()) if n else 0

    # -- derived structures (lazy) ------------------------------------------

    def _ensure_levels(self):
        if self._levels_built:
            return
        order = np.argsort(self.depth, kind="stable").astype(np.int32)
        bounds = np.searchsorted(self.depth[order], np.arange(self.max_depth + 2))
        self.level_nodes = [order[bounds[d]:bounds[d + 1]]
                            for d in range(self.max_depth + 1)]
        pd = self.depth[self.edge_parent]
        eorder = np.argsort(pd, kind="stable").astype(np.int64)
        ebounds = np.searchsorted(pd[eorder], np.arange(self.max_depth + 2))
        self.level_edges = [eorder[ebounds[d]:ebounds[d + 1]]
                            for d in range(self.max_depth + 1)]
        # Node order by depth descending then id: the schedule used by the
        # compiled kernels for backward sweeps with infostate aggregation.
        self.desc_order = np.concatenate(
            [self.level_nodes[d] for d in range(self.max_depth, -1, -1)]
        ).astype(np.int32) if self.n_nodes else np.zeros(0, np.int32)
        lens = [len(self.level_nodes[d]) for d in range(self.max_depth, -1, -1)]
        self.desc_starts = np.concatenate(
            [[0], np.cumsum(lens)]).astype(np.int64)
        self._levels_built = True

    def _ensure_agg(self):
        """Per-player decision node / edge id arrays for q aggregation."""
        if self._agg_built:
            return
        self.dec_nodes = []
        self.dec_edges = []
        parent_player = self.player[self.edge_parent]
        for p in range(self.num_players):
            self.dec_nodes.append(
                np.nonzero((self.kind == DECISION) & (self.player == p))[0]
                .astype(np.int32))
            self.dec_edges.append(np.nonzero(parent_player == p)[0])
        self._agg_built = True

    def pol_seg(self) -> np.ndarray:
        """Infostate id owning each flat policy slot."""
        cached = getattr(self, "_pol_to_is", None)
        if cached is None:
            cached = self._pol_to_is = np.repeat(
                np.arange(self.n_infostates, dtype=np.int32), self.is_nact)
        return cached

    def infostate_members(self):
        """List of member-node arrays per infostate (built on demand)."""
        if not hasattr(self, "_members"):
            dec = np.nonzero(self.kind == DECISION)[0]
            order = dec[np.argsort(self.node_infostate[dec], kind="stable")]
            bounds = np.searchsorted(self.node_infostate[order],
                                     np.arange(self.n_infostates + 1))
            self._members = [order[bounds[i]:bounds[i + 1]].astype(np.int32)
                             for i in range(self.n_infostates)]
        return self._members

    # -- policy conversion ----------------------------------------------------

    def policy_flat(self, joint: JointPolicy) -> np.ndarray:
        flat = np.empty(self.pol_size)
        for iid in range(self.n_infostates):
            off, k = self.is_offset[iid], self.is_nact[iid]
            dist = joint[int(self.is_player[iid])].get(self.is_keys[iid], int(k))
            if len(dist) != k:
                raise ValueError(
                    f"policy at key {self.is_keys[iid].hex()} has {len(dist)} "
                    f"entries, expected {k}")
            flat[off:off + k] = dist
        return flat

    def flat_policy(self, flat: np.ndarray) -> JointPolicy:
        pols = [TabularPolicy(p) for p in range(self.num_players)]
        for iid in range(self.n_infostates):
            off, k = self.is_offset[iid], self.is_nact[iid]
            pols[int(self.is_player[iid])].table[self.is_keys[iid]] = \
                flat[off:off + k].copy()
        return JointPolicy(pols)

    def uniform_flat(self) -> np.ndarray:
        flat = np.empty(self.pol_size)
        for iid in range(self.n_infostates):
            off, k = self.is_offset[iid], self.is_nact[iid]
            flat[off:off + k] = 1.0 / k
        return flat

    # -- transition coefficient vectors --------------------------------------

    def transition_probs(self, flat: np.ndarray) -> np.ndarray:
        """Per-edge transition probability under the flat policy."""
        dec = self.edge_polidx >= 0
        return np.where(dec, flat[np.maximum(self.edge_polidx, 0)],
                        self.edge_chance_prob)

    def factored_probs(self, flat: np.ndarray):
        """(tp_player0, tp_player1, tp_chance) with 1.0 off the own edges."""
        parent_player = self.player[self.edge_parent]
        parent_kind = self.kind[self.edge_parent]
        tp = self.transition_probs(flat)
        out = []
        for p in range(self.num_players):
            out.append(np.where(parent_player == p, tp, 1.0))
        out.append(np.where(parent_kind == CHANCE_NODE, tp, 1.0))
        return out

    def node_lookup(self, trajectory) -> int:
        """Node id of the history with the given trajectory."""
        if not hasattr(self, "_edge_actions"):
            self._build_edge_actions()
        nid = 0
        for a in trajectory:
            lo, hi = self.first_edge[nid], self.first_edge[nid + 1]
            found = -1
            for e in range(lo, hi):
                if self._edge_actions[e] == a:
                    found = self.edge_child[e]
                    break
            if found < 0:
                raise KeyError(f"no child for action {a} at node {nid}")
            nid = found
        return int(nid)

    def edge_actions(self) -> np.ndarray:
        """Game action id carried by each edge."""
        if not hasattr(self, "_edge_actions"):
            self._build_edge_actions()
        return self._edge_actions

    def _build_edge_actions(self):
        acts = np.zeros(self.n_edges, dtype=np.int32)
        stack = [(self.game.initial_sim(), 0)]
        while stack:
            sim, nid = stack.pop()
            if self.kind[nid] == TERMINAL:
                continue
            if self.kind[nid] == CHANCE_NODE:
                actions = [oc.action for oc in sim.chance_outcomes()]
            else:
                actions = sim.legal_actions()
            lo = self.first_edge[nid]
            for slot, a in enumerate(actions):
                acts[lo + slot] = a
                child = sim.clone()
                child.apply(a)
                stack.append((child, self.edge_child[lo + slot]))
        self._edge_actions = acts


def build_tree(game: Game, budget: int = DEFAULT_NODE_BUDGET) -> TreeIndex:
    cache = getattr(game, "_tree_cache", None)
    if cache is None:
        cache = game._tree_cache = TreeIndex(game, budget)
    return cache
