"""Deal or No Deal: alternating-offer bargaining with private values.

Chance opens the episode by drawing an instance (public pool, both players'
private value vectors) uniformly from a database. Players then alternate
proposals for how to split the pool; a proposal is the vector of item counts
the proposer keeps. From the second turn on, the mover may instead accept the
standing proposal, which ends the episode with that split. If no proposal is
accepted within ``max_turns`` turns, both players score zero.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from .base import CHANCE, Game, GameState, InfoView, make_info_key


@dataclass(frozen=True)
class DondInstance:
    pool: tuple
    values: tuple  # (player-0 vector, player-1 vector)

    def value_of(self, player, kept_counts):
        return int(sum(v * c for v, c in zip(self.values[player], kept_counts)))


@dataclass(frozen=True)
class DondParams:
    item_types: int = 3
    pool_min: int = 5
    pool_max: int = 7
    total_value: int = 10
    max_turns: int = 10

    def __post_init__(self):
        if self.max_turns % 2 != 0:
            raise ValueError("max_turns must be even (equal turns per player)")
        if self.item_types < 1 or self.pool_min < self.item_types or self.pool_max < self.pool_min:
            raise ValueError("pool size range must fit at least one of each item type")
        if self.total_value < 1:
            raise ValueError("total_value must be positive")


def _compositions(total, parts, minimum):
    """All integer vectors of length ``parts`` with entries >= minimum summing to total."""
    if parts == 1:
        if total >= minimum:
            yield (total,)
        return
    for first in range(minimum, total - minimum * (parts - 1) + 1):
        for rest in _compositions(total - first, parts - 1, minimum):
            yield (first,) + rest


def _value_vectors(pool, total):
    """All nonnegative integer v with v . pool == total, lexicographic order."""

    def rec(idx, remaining):
        if idx == len(pool) - 1:
            q, r = divmod(remaining, pool[idx])
            if r == 0:
                yield (q,)
            return
        for v in range(remaining // pool[idx] + 1):
            for rest in rec(idx + 1, remaining - v * pool[idx]):
                yield (v,) + rest

    return list(rec(0, total))


def enumerate_instances(params):
    """All instances satisfying the three constraints, deterministic order.

    (i) both value vectors price the full pool at ``total_value``,
    (ii) every item is worth something to somebody,
    (iii) at least one item is worth something to both players.
    """
    out = []
    for size in range(params.pool_min, params.pool_max + 1):
        for pool in _compositions(size, params.item_types, 1):
            vectors = _value_vectors(pool, params.total_value)
            for v0, v1 in itertools.product(vectors, vectors):
                if any(a + b == 0 for a, b in zip(v0, v1)):
                    continue
                if all(a * b == 0 for a, b in zip(v0, v1)):
                    continue
                out.append(DondInstance(pool=pool, values=(v0, v1)))
    return out


def sample_instance(rng, instances):
    """Uniform draw from a non-empty instance database."""
    if not instances:
        raise ValueError("instance database is empty")
    return instances[int(rng.integers(len(instances)))]


def write_instances(path, instances, params):
    """One instance per line: pool counts, player-0 values, player-1 values."""
    with open(path, "w") as fh:
        fh.write(f"# dond-instances v1 items={params.item_types} total={params.total_value}\n")
        for inst in instances:
            row = list(inst.pool) + list(inst.values[0]) + list(inst.values[1])
            fh.write(" ".join(str(x) for x in row) + "\n")


def read_instances(path):
    instances = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            row = [int(x) for x in line.split()]
            if len(row) % 3 != 0:
                raise ValueError(f"malformed instance line: {line!r}")
            m = len(row) // 3
            instances.append(
                DondInstance(pool=tuple(row[:m]), values=(tuple(row[m:2 * m]), tuple(row[2 * m:])))
            )
    return instances


class _PoolActions:
    """Per-pool action table: split ids are mixed-radix over kept counts."""

    __slots__ = ("splits", "accept", "all_ids", "proposal_ids")

    def __init__(self, pool):
        self.splits = list(itertools.product(*[range(c + 1) for c in pool]))
        self.accept = len(self.splits)
        self.proposal_ids = tuple(range(len(self.splits)))
        self.all_ids = tuple(range(len(self.splits) + 1))


class DondGame(Game):
    num_players = 2

    def __init__(self, params=None, instances=None):
        self.params = params or DondParams()
        self.instances = instances if instances is not None else enumerate_instances(self.params)
        self._actions_cache = {}
        self._chance = [
            (i, 1.0 / len(self.instances)) for i in range(len(self.instances))
        ] if self.instances else []

    def pool_actions(self, pool):
        table = self._actions_cache.get(pool)
        if table is None:
            table = _PoolActions(pool)
            self._actions_cache[pool] = table
        return table

    def new_initial_state(self):
        return DondState(self, None, (), None)


class DondState(GameState):
    __slots__ = ("game", "instance", "moves", "_accepted")

    def __init__(self, game, instance, moves, accepted):
        self.game = game
        self.instance = instance
        self.moves = moves
        self._accepted = accepted  # split kept by the proposer, or None

    @property
    def current_player(self):
        if self.instance is None:
            return CHANCE
        return len(self.moves) % 2

    @property
    def is_terminal(self):
        if self.instance is None:
            return False
        return self._accepted is not None or len(self.moves) >= self.game.params.max_turns

    def legal_actions(self):
        if self.is_terminal:
            return ()
        if self.instance is None:
            return tuple(i for i, _ in self.game._chance)
        table = self.game.pool_actions(self.instance.pool)
        if len(self.moves) == 0:
            return table.proposal_ids
        return table.all_ids

    def chance_outcomes(self):
        return self.game._chance

    def apply(self, action):
        self._check_action(action)
        if self.instance is None:
            return DondState(self.game, self.game.instances[action], (), None)
        table = self.game.pool_actions(self.instance.pool)
        accepted = None
        if action == table.accept:
            accepted = table.splits[self.moves[-1]]
        return DondState(self.game, self.instance, self.moves + (action,), accepted)

    def returns(self):
        if self._accepted is None:
            return np.zeros(2)
        accepter = (len(self.moves) - 1) % 2
        proposer = 1 - accepter
        pool = self.instance.pool
        kept = self._accepted
        out = np.zeros(2)
        out[proposer] = self.instance.value_of(proposer, kept)
        out[accepter] = self.instance.value_of(
            accepter, tuple(p - k for p, k in zip(pool, kept))
        )
        return out

    @property
    def standing_proposal(self):
        """Split (counts kept by its proposer) currently on the table, if any."""
        if self.instance is None or not self.moves:
            return None
        table = self.game.pool_actions(self.instance.pool)
        last = self.moves[-1]
        if last == table.accept:
            last = self.moves[-2]
        return table.splits[last]

    def info_view(self, player):
        if self.instance is None:
            private, public = (), ()
        else:
            private = self.instance.values[player]
            public = self.instance.pool + self.moves
        return InfoView(
            player=player,
            private=private,
            public=public,
            legal=self.legal_actions() if self.current_player == player else (),
            key=make_info_key(player, private, public),
        )

    def __repr__(self):
        return f"DondState(inst={self.instance}, moves={self.moves})"


def greedy_threshold_policy(game, accept_threshold=None):
    """Scripted baseline: accept any offer worth at least the threshold,
    otherwise propose keeping every item of positive own value.

    Its proposals reveal its values, so belief quality against it matters.
    """
    from ..policies import FunctionPolicy

    if accept_threshold is None:
        accept_threshold = (game.params.total_value + 1) // 2 + 1

    def probs(state):
        legal = state.legal_actions()
        table = game.pool_actions(state.instance.pool)
        values = state.instance.values[state.current_player]
        out = np.zeros(len(legal))
        if table.accept in legal:
            offered = tuple(
                p - k for p, k in zip(state.instance.pool, state.standing_proposal)
            )
            gain = sum(a * b for a, b in zip(values, offered))
            if gain >= accept_threshold:
                out[legal.index(table.accept)] = 1.0
                return out
        want = tuple(c if v > 0 else 0 for c, v in zip(state.instance.pool, values))
        out[legal.index(table.splits.index(want))] = 1.0
        return out

    return FunctionPolicy(probs)
