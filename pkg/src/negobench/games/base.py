"""Extensive-form game interfaces shared by all built-in games.

States are immutable values: ``apply`` returns a fresh successor and never
mutates the receiver, so states can be shared freely across workers.
"""

from dataclasses import dataclass

import numpy as np

CHANCE = -1


class IllegalActionError(ValueError):
    """Raised when an action outside the legal set is applied."""


class TerminalStateError(ValueError):
    """Raised when a decision operation is attempted at a terminal state."""


def make_info_key(player, private, public):
    """Canonical, process-stable information-state key.

    Length-prefixed concatenation of (player, private observation, public
    action list) so that distinct observation tuples can never collide.
    """
    priv = ",".join(str(v) for v in private)
    pub = ",".join(str(v) for v in public)
    return f"{player}|{len(private)}:{priv}|{len(public)}:{pub}"


@dataclass(frozen=True)
class InfoView:
    """One player's view of a state: private observation + public actions."""

    player: int
    private: tuple
    public: tuple
    legal: tuple
    key: str


class GameState:
    """Base class for immutable game states."""

    __slots__ = ()

    @property
    def current_player(self):
        raise NotImplementedError

    @property
    def is_terminal(self):
        raise NotImplementedError

    def legal_actions(self):
        """Legal action ids; non-empty iff the state is non-terminal."""
        raise NotImplementedError

    def chance_outcomes(self):
        """At chance nodes: list of (action, probability) pairs."""
        raise NotImplementedError

    def apply(self, action):
        raise NotImplementedError

    def returns(self):
        """Per-player terminal utilities."""
        raise NotImplementedError

    def info_view(self, player):
        raise NotImplementedError

    def info_state_key(self, player):
        return self.info_view(player).key

    def _check_action(self, action):
        if self.is_terminal:
            raise TerminalStateError("cannot apply an action at a terminal state")
        legal = self.legal_actions()
        if action not in legal:
            raise IllegalActionError(f"action {action} not legal; legal set is {list(legal)}")


class Game:
    """A game factory: knows the player count and produces initial states."""

    num_players = 2

    def new_initial_state(self):
        raise NotImplementedError


def rollout(state, rng, policies=None):
    """Play one episode to the end; returns the terminal state.

    ``policies`` maps player index -> policy; players without an entry act
    uniformly at random.
    """
    while not state.is_terminal:
        player = state.current_player
        if player == CHANCE:
            actions, probs = zip(*state.chance_outcomes())
            action = actions[rng.choice(len(actions), p=np.asarray(probs))]
        else:
            legal = state.legal_actions()
            if policies is not None and player in policies and policies[player] is not None:
                probs = policies[player].action_probs(state)
                action = legal[rng.choice(len(legal), p=probs)]
            else:
                action = legal[rng.integers(len(legal))]
        state = state.apply(action)
    return state


def all_states(game, include_terminal=True):
    """Depth-first enumeration of every history of an enumerable game."""
    stack = [game.new_initial_state()]
    while stack:
        state = stack.pop()
        if state.is_terminal:
            if include_terminal:
                yield state
            continue
        yield state
        if state.current_player == CHANCE:
            for action, _ in state.chance_outcomes():
                stack.append(state.apply(action))
        else:
            for action in state.legal_actions():
                stack.append(state.apply(action))


def exact_expected_returns(game, policies):
    """Exact expected returns of a pure joint policy profile by tree walk."""

    def visit(state):
        if state.is_terminal:
            return state.returns()
        total = np.zeros(game.num_players)
        if state.current_player == CHANCE:
            for action, prob in state.chance_outcomes():
                if prob > 0.0:
                    total += prob * visit(state.apply(action))
            return total
        probs = policies[state.current_player].action_probs(state)
        for action, prob in zip(state.legal_actions(), probs):
            if prob > 0.0:
                total += prob * visit(state.apply(action))
        return total

    return visit(game.new_initial_state())


def enumerate_info_states(game):
    """Distinct information-state keys per player at that player's decisions."""
    keys = [set() for _ in range(game.num_players)]
    for state in all_states(game, include_terminal=False):
        player = state.current_player
        if player != CHANCE:
            keys[player].add(state.info_state_key(player))
    return keys
