"""Normal-form games wrapped as one-shot extensive-form games.

Players pick rows sequentially but blindly (no public actions), so the
simultaneous-move structure is preserved through the information states.
"""

import numpy as np

from .base import CHANCE, Game, GameState, InfoView, make_info_key


class MatrixGame(Game):
    def __init__(self, payoffs):
        payoffs = np.asarray(payoffs, dtype=np.float64)
        if payoffs.ndim < 2:
            raise ValueError("payoff tensor needs at least one strategy axis per player")
        if not np.all(np.isfinite(payoffs)):
            raise ValueError("payoff tensor must be finite")
        if payoffs.shape[-1] != payoffs.ndim - 1:
            raise ValueError(
                f"last axis must index the {payoffs.ndim - 1} players, got shape {payoffs.shape}"
            )
        self.payoffs = payoffs
        self.num_players = payoffs.ndim - 1

    def new_initial_state(self):
        return MatrixState(self, ())


class MatrixState(GameState):
    __slots__ = ("game", "history")

    def __init__(self, game, history):
        self.game = game
        self.history = history

    @property
    def current_player(self):
        return len(self.history)

    @property
    def is_terminal(self):
        return len(self.history) == self.game.num_players

    def legal_actions(self):
        if self.is_terminal:
            return ()
        return tuple(range(self.game.payoffs.shape[len(self.history)]))

    def chance_outcomes(self):
        raise ValueError("matrix games have no chance nodes")

    def apply(self, action):
        self._check_action(action)
        return MatrixState(self.game, self.history + (action,))

    def returns(self):
        return np.array(self.game.payoffs[self.history], dtype=np.float64)

    def info_view(self, player):
        # players act blind: only one's own (single) move is ever observed
        private = (self.history[player],) if len(self.history) > player else ()
        return InfoView(
            player=player,
            private=private,
            public=(),
            legal=self.legal_actions() if self.current_player == player else (),
            key=make_info_key(player, private, ()),
        )

    def __repr__(self):
        return f"MatrixState{self.history}"
