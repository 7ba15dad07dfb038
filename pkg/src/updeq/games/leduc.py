"""Leduc poker: 6-card deck (J/Q/K in two suits), two betting rounds.

Card ids 0..5 encode rank * 2 + suit (rank 0=J, 1=Q, 2=K). Each player
antes 1 and receives one private card (single chance node over the 30
ordered pairs); after round-1 betting a public board card is dealt (chance
over the 4 remaining cards). Fixed bet sizes: 2 in round 1, 4 in round 2,
at most two raises per round. Player 0 opens both rounds.

Canonical action ids:
  0 = fold   (legal only when facing an outstanding raise)
  1 = call   (check when nothing is outstanding)
  2 = raise  (legal while the round has fewer than 2 raises)

Showdown: pairing the board wins; otherwise higher rank wins; equal ranks
split (net 0). Utilities are net chips contributed by the loser.
"""

from __future__ import annotations

from .base import ACT, CHANCE, OBS, ChanceOutcome, Game, SimState

FOLD, CALL, RAISE = 0, 1, 2

DEALS = [(a, b) for a in range(6) for b in range(6) if a != b]  # 30 ordered pairs
RAISE_SIZE = (2, 4)


class LeducSim(SimState):
    __slots__ = ("cards", "board", "round", "to_act", "num_raises",
                 "outstanding", "pot", "folded", "done")

    def __init__(self):
        self.cards = None
        self.board = -1
        self.round = 0            # 0, 1, or 2 once betting is over
        self.to_act = 0
        self.num_raises = 0
        self.outstanding = 0      # chips needed to call
        self.pot = [1, 1]         # antes
        self.folded = -1
        self.done = False

    def clone(self):
        s = LeducSim.__new__(LeducSim)
        s.cards = self.cards
        s.board = self.board
        s.round = self.round
        s.to_act = self.to_act
        s.num_raises = self.num_raises
        s.outstanding = self.outstanding
        s.pot = list(self.pot)
        s.folded = self.folded
        s.done = self.done
        return s

    def current_player(self):
        if self.cards is None:
            return CHANCE
        if self.round == 1 and self.board < 0:
            return CHANCE
        return self.to_act

    def is_terminal(self):
        return self.done

    def legal_actions(self):
        acts = []
        if self.outstanding > 0:
            acts.append(FOLD)
        acts.append(CALL)
        if self.num_raises < 2:
            acts.append(RAISE)
        return acts

    def chance_outcomes(self):
        if self.cards is None:
            return [ChanceOutcome(i, 1.0 / 30.0) for i in range(30)]
        left = [c for c in range(6) if c not in self.cards]
        return [ChanceOutcome(c, 1.0 / len(left)) for c in left]

    def _end_round(self):
        self.num_raises = 0
        self.outstanding = 0
        self.to_act = 0
        self.round += 1
        if self.round == 2:
            self.done = True

    def apply(self, action):
        if self.cards is None:
            self.cards = DEALS[action]
            return ([(OBS, self.cards[0])], [(OBS, self.cards[1])])
        if self.round == 1 and self.board < 0:
            self.board = action
            return ([(OBS, action)], [(OBS, action)])
        actor = self.to_act
        ev = ([], [])
        ev[actor].append((ACT, action))
        ev[1 - actor].append((OBS, action))
        if action == FOLD:
            self.folded = actor
            self.done = True
            return ev
        if action == CALL:
            self.pot[actor] += self.outstanding
            if self.outstanding > 0 or actor == 1:
                # A call closes the round; an opening check passes the turn.
                self._end_round()
            else:
                self.to_act = 1 - actor
            return ev
        # raise
        size = RAISE_SIZE[self.round]
        self.pot[actor] += self.outstanding + size
        self.outstanding = size
        self.num_raises += 1
        self.to_act = 1 - actor
        return ev

    def _winner(self):
        r0, r1 = self.cards[0] // 2, self.cards[1] // 2
        rb = self.board // 2
        if r0 == rb:
            return 0
        if r1 == rb:
            return 1
        if r0 == r1:
            return -1
        return 0 if r0 > r1 else 1

    def returns(self):
        if self.folded >= 0:
            w = 1 - self.folded
        else:
            w = self._winner()
            if w < 0:
                return (0.0, 0.0)
        lose = float(self.pot[1 - w])
        return (lose, -lose) if w == 0 else (-lose, lose)


class LeducPoker(Game):
    name = "leduc_poker"
    num_players = 2
    max_actions = 30  # deal node outcomes; decisions have at most 3
    is_zero_sum = True

    def initial_sim(self):
        return LeducSim()

    def record_legal_actions(self, events):
        # events: own card first, then the public stream of betting
        # actions with the board card spliced in where round 1 ends
        rnd, checks, raises, outstanding = 0, 0, 0, False
        board_due = False
        for tag, v in events[1:]:
            if board_due:
                board_due = False       # board card observation
                continue
            if v == CALL:
                if outstanding or checks:
                    rnd, checks, raises, outstanding = rnd + 1, 0, 0, False
                    board_due = rnd == 1
                else:
                    checks = 1
            elif v == RAISE:
                raises += 1
                outstanding = True
                checks = 0
        acts = []
        if outstanding:
            acts.append(FOLD)
        acts.append(CALL)
        if raises < 2:
            acts.append(RAISE)
        return acts
