"""Two-player Kuhn poker.

Each player antes one chip and receives one private card from a totally
ordered deck (J, Q, K for the default 3-card deck). One betting round with
actions pass (0) and bet (1); folding loses the ante, a called bet doubles
the stake, showdown awards the pot to the higher card.
"""

import numpy as np

from .base import CHANCE, Game, GameState, InfoView, make_info_key

PASS, BET = 0, 1

# move sequences after the deal that end the hand: (sequence, showdown, stake)
_TERMINAL_MOVES = {
    (PASS, PASS): (True, 1),
    (PASS, BET, PASS): (False, 1),   # player 0 folds
    (PASS, BET, BET): (True, 2),
    (BET, PASS): (False, 1),         # player 1 folds
    (BET, BET): (True, 2),
}


class KuhnGame(Game):
    num_players = 2

    def __init__(self, deck_size=3):
        if deck_size < 3:
            raise ValueError("Kuhn deck needs at least 3 cards")
        self.deck_size = deck_size

    def new_initial_state(self):
        return KuhnState(self, ())


class KuhnState(GameState):
    __slots__ = ("game", "history")

    def __init__(self, game, history):
        self.game = game
        self.history = history

    @property
    def cards(self):
        return self.history[:2]

    @property
    def moves(self):
        return self.history[2:]

    @property
    def current_player(self):
        if len(self.history) < 2:
            return CHANCE
        return (len(self.history) - 2) % 2

    @property
    def is_terminal(self):
        return self.moves in _TERMINAL_MOVES

    def legal_actions(self):
        if self.is_terminal:
            return ()
        if len(self.history) == 0:
            return tuple(range(self.game.deck_size))
        if len(self.history) == 1:
            return tuple(c for c in range(self.game.deck_size) if c != self.history[0])
        return (PASS, BET)

    def chance_outcomes(self):
        legal = self.legal_actions()
        p = 1.0 / len(legal)
        return [(a, p) for a in legal]

    def apply(self, action):
        self._check_action(action)
        return KuhnState(self.game, self.history + (action,))

    def returns(self):
        showdown, stake = _TERMINAL_MOVES[self.moves]
        if showdown:
            winner = 0 if self.cards[0] > self.cards[1] else 1
        else:
            # the player who declined to call folded; the bettor wins
            winner = 1 if self.moves[0] == PASS else 0
        out = np.full(2, -float(stake))
        out[winner] = float(stake)
        return out

    def info_view(self, player):
        private = (self.cards[player],) if len(self.history) > player else ()
        public = self.moves
        return InfoView(
            player=player,
            private=private,
            public=public,
            legal=self.legal_actions() if self.current_player == player else (),
            key=make_info_key(player, private, public),
        )

    def __repr__(self):
        return f"KuhnState{self.history}"
