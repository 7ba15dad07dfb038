"""Four-sided liar's dice, one die per player.

A single chance node deals both dice (16 ordered outcomes at 1/16). Bids
name (quantity, face) over both dice and must strictly increase in the
order 1x1, 1x2, 1x3, 1x4, 2x1, 2x2, 2x3, 2x4 (action ids 0..7). Action 8
challenges the last bid ("liar") and is legal once any bid exists. All
bidding is public.

A challenged bid stands if at least `quantity` dice show `face` exactly
(no wild faces); the bid's owner then wins +1, otherwise the challenger
wins +1.
"""

from __future__ import annotations

from .base import ACT, CHANCE, OBS, ChanceOutcome, Game, SimState

NUM_FACES = 4
NUM_BIDS = 2 * NUM_FACES  # quantities 1..2
LIAR = NUM_BIDS


class LiarsDiceSim(SimState):
    __slots__ = ("dice", "bids", "challenged")

    def __init__(self):
        self.dice = None
        self.bids = []
        self.challenged = False

    def clone(self):
        s = LiarsDiceSim.__new__(LiarsDiceSim)
        s.dice = self.dice
        s.bids = list(self.bids)
        s.challenged = self.challenged
        return s

    def current_player(self):
        if self.dice is None:
            return CHANCE
        return len(self.bids) % 2

    def is_terminal(self):
        return self.challenged

    def legal_actions(self):
        lo = self.bids[-1] + 1 if self.bids else 0
        acts = list(range(lo, NUM_BIDS))
        if self.bids:
            acts.append(LIAR)
        return acts

    def chance_outcomes(self):
        return [ChanceOutcome(i, 1.0 / 16.0) for i in range(16)]

    def apply(self, action):
        if self.dice is None:
            self.dice = (action // NUM_FACES, action % NUM_FACES)
            return ([(OBS, self.dice[0])], [(OBS, self.dice[1])])
        actor = len(self.bids) % 2
        ev = ([], [])
        ev[actor].append((ACT, action))
        ev[1 - actor].append((OBS, action))
        if action == LIAR:
            self.challenged = True
        else:
            self.bids.append(action)
        return ev

    def returns(self):
        last = self.bids[-1]
        quantity, face = last // NUM_FACES + 1, last % NUM_FACES
        count = (self.dice[0] == face) + (self.dice[1] == face)
        bidder = (len(self.bids) - 1) % 2
        winner = bidder if count >= quantity else 1 - bidder
        return (1.0, -1.0) if winner == 0 else (-1.0, 1.0)


class LiarsDice4(Game):
    name = "liars_dice_4"
    num_players = 2
    max_actions = 16  # the deal node; decisions have at most 9
    is_zero_sum = True

    def initial_sim(self):
        return LiarsDiceSim()

    def record_legal_actions(self, events):
        # events: own die first, then the public bid stream
        bids = [v for tag, v in events[1:] if v < NUM_BIDS]
        lo = bids[-1] + 1 if bids else 0
        acts = list(range(lo, NUM_BIDS))
        if bids:
            acts.append(LIAR)
        return acts
