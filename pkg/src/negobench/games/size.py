"""Game-size estimation from uniform-random rollouts.

Two estimates are produced per player:

* ``state_estimates``: survival-weighted count. The number of reachable public
  action sequences of depth d is approximately f_d * b^d, where b is the mean
  branching factor and f_d the fraction of rollouts alive at depth d with the
  player to move; multiplying by the number of private contexts and summing
  over depths estimates the information-state count.
* ``formula_value``: the closed-form geometric series V * (1 + sum b^d) over
  the player's interior decision depths, the method used for reported sizes.
"""

from dataclasses import dataclass

import numpy as np

from .base import CHANCE
from .dond import DondGame
from .kuhn import KuhnGame
from .matrix import MatrixGame


def decision_depths(game, player):
    """Public-action depths at which the player can act."""
    if isinstance(game, DondGame):
        return tuple(range(player, game.params.max_turns, 2))
    if isinstance(game, KuhnGame):
        return (0, 2) if player == 0 else (1,)
    if isinstance(game, MatrixGame):
        return (0,)
    raise ValueError(f"no depth schedule for {type(game).__name__}")


def private_context_count(game, player):
    """Number of distinct private observations (value vectors, cards, ...)."""
    if isinstance(game, DondGame):
        return len({inst.values[player] for inst in game.instances})
    if isinstance(game, KuhnGame):
        return game.deck_size
    if isinstance(game, MatrixGame):
        return 1
    raise ValueError(f"no private context count for {type(game).__name__}")


def geometric_formula(game, player, branching, value_count):
    """Closed-form state-count estimate: V * (1 + sum of b^d over interior depths)."""
    depths = decision_depths(game, player)
    last = max(d for p in range(game.num_players) for d in decision_depths(game, p))
    total = 1.0
    for d in depths:
        if 0 < d < last:
            total += branching ** d
    return value_count * total


@dataclass
class SizeEstimate:
    game: object
    mean_branching: float
    state_estimates: np.ndarray
    value_counts: tuple
    num_rollouts: int

    def formula_value(self, player, branching=None, value_count=None):
        b = self.mean_branching if branching is None else branching
        v = self.value_counts[player] if value_count is None else value_count
        return geometric_formula(self.game, player, b, v)


def estimate_game_size(game, num_rollouts, rng, value_counts=None):
    if num_rollouts < 1:
        raise ValueError("need at least one rollout")
    if value_counts is None:
        value_counts = tuple(private_context_count(game, p) for p in range(game.num_players))
    branch_total = 0
    branch_nodes = 0
    alive = [{} for _ in range(game.num_players)]  # player -> depth -> rollouts seen
    for _ in range(num_rollouts):
        state = game.new_initial_state()
        depth = 0
        while not state.is_terminal:
            player = state.current_player
            if player == CHANCE:
                outcomes = state.chance_outcomes()
                probs = np.array([p for _, p in outcomes])
                action = outcomes[rng.choice(len(outcomes), p=probs)][0]
            else:
                legal = state.legal_actions()
                branch_total += len(legal)
                branch_nodes += 1
                alive[player][depth] = alive[player].get(depth, 0) + 1
                action = legal[rng.integers(len(legal))]
                depth += 1
            state = state.apply(action)
    b = branch_total / max(branch_nodes, 1)
    estimates = np.zeros(game.num_players)
    for player in range(game.num_players):
        total = 0.0
        for depth, count in alive[player].items():
            total += (count / num_rollouts) * b ** depth
        estimates[player] = value_counts[player] * total
    return SizeEstimate(
        game=game,
        mean_branching=b,
        state_estimates=estimates,
        value_counts=value_counts,
        num_rollouts=num_rollouts,
    )
