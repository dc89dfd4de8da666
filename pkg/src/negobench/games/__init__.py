"""Built-in games: Kuhn poker, matrix games, and Deal or No Deal."""

from dataclasses import dataclass, field

import numpy as np

from .base import (
    CHANCE,
    Game,
    GameState,
    IllegalActionError,
    InfoView,
    TerminalStateError,
    all_states,
    enumerate_info_states,
    exact_expected_returns,
    make_info_key,
    rollout,
)
from .dond import (
    DondGame,
    DondInstance,
    DondParams,
    enumerate_instances,
    read_instances,
    sample_instance,
    write_instances,
)
from .kuhn import KuhnGame
from .matrix import MatrixGame
from .size import SizeEstimate, estimate_game_size

CHICKEN = [[[-5, -5], [1, -1]], [[-1, 1], [-1, -1]]]
BACH_OR_STRAVINSKY = [[[3, 2], [0, 0]], [[0, 0], [2, 3]]]
MATCHING_PENNIES = [[[1, -1], [-1, 1]], [[-1, 1], [1, -1]]]


@dataclass(frozen=True)
class GameSpec:
    """Identifies a game plus its parameters; ``build`` produces the engine."""

    game: str
    players: int = 2
    deck_size: int = 3
    payoffs: tuple = None
    dond: DondParams = None
    instance_file: str = None

    def __post_init__(self):
        if self.players < 2:
            raise ValueError("games need at least 2 players")
        if self.game == "matrix" and self.payoffs is None:
            raise ValueError("matrix games need a payoff tensor")

    @classmethod
    def kuhn(cls, deck_size=3):
        return cls(game="kuhn", deck_size=deck_size)

    @classmethod
    def matrix(cls, payoffs):
        arr = np.asarray(payoffs, dtype=np.float64)
        return cls(game="matrix", players=arr.shape[-1], payoffs=_freeze(arr))

    @classmethod
    def chicken(cls):
        return cls.matrix(CHICKEN)

    @classmethod
    def bach_or_stravinsky(cls):
        return cls.matrix(BACH_OR_STRAVINSKY)

    @classmethod
    def matching_pennies(cls):
        return cls.matrix(MATCHING_PENNIES)

    @classmethod
    def dond_standard(cls, **kwargs):
        return cls(game="dond", dond=DondParams(**kwargs))

    @classmethod
    def dond_mini(cls, item_types=2, pool_min=3, pool_max=3, total_value=5, max_turns=4):
        """Small parameterization where exact posteriors and responses are cheap."""
        return cls(
            game="dond",
            dond=DondParams(
                item_types=item_types,
                pool_min=pool_min,
                pool_max=pool_max,
                total_value=total_value,
                max_turns=max_turns,
            ),
        )

    def build(self, instances=None):
        if self.game == "kuhn":
            return KuhnGame(deck_size=self.deck_size)
        if self.game == "matrix":
            return MatrixGame(np.asarray(self.payoffs, dtype=np.float64))
        if self.game == "dond":
            if instances is None and self.instance_file:
                instances = read_instances(self.instance_file)
            return DondGame(params=self.dond or DondParams(), instances=instances)
        raise ValueError(f"unknown game id {self.game!r}")


def _freeze(arr):
    if arr.ndim == 1:
        return tuple(float(v) for v in arr)
    return tuple(_freeze(sub) for sub in arr)
