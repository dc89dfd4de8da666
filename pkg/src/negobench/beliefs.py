"""World-state belief models for imperfect-information search.

A belief model samples world states consistent with an information state:
exactly (posterior under the opponent mixture), uniformly, by cheating
(reading the hidden state), by a fixed database index, or from a learned
per-head categorical model with feasibility projection.
"""

import itertools
from collections import deque
from dataclasses import dataclass

import numpy as np

from .games.base import CHANCE
from .games.dond import DondGame, DondState
from .games.kuhn import KuhnGame, KuhnState


class BeliefError(ValueError):
    """No consistent world state is representable for the query."""


# ------------------------------------------------------------- consistency


def consistent_states(game, view, limit=200_000):
    """All world states matching the view's key, with their chance reach.

    Uses direct reconstruction for the built-in games; falls back to a
    bounded tree scan otherwise.
    """
    if isinstance(game, DondGame):
        return _dond_consistent(game, view)
    if isinstance(game, KuhnGame):
        return _kuhn_consistent(game, view)
    return _scan_consistent(game, view, limit)


def _dond_consistent(game, view):
    if not view.public:
        raise BeliefError("belief queries need the pool to be public")
    m = game.params.item_types
    pool = tuple(view.public[:m])
    moves = tuple(view.public[m:])
    own = tuple(view.private)
    out = []
    p = 1.0 / len(game.instances)
    for inst in game.instances:
        if inst.pool != pool or inst.values[view.player] != own:
            continue
        state = DondState(game, inst, (), None)
        ok = True
        for a in moves:
            if a not in state.legal_actions():
                ok = False
                break
            state = state.apply(a)
        if ok:
            out.append((state, p))
    if not out:
        raise BeliefError(f"no world state consistent with {view.key}")
    return out


def _kuhn_consistent(game, view):
    own = view.private[0]
    moves = tuple(view.public)
    out = []
    p = 1.0 / (game.deck_size * (game.deck_size - 1))
    for other in range(game.deck_size):
        if other == own:
            continue
        cards = (own, other) if view.player == 0 else (other, own)
        state = KuhnState(game, cards + moves)
        out.append((state, p))
    if not out:
        raise BeliefError(f"no world state consistent with {view.key}")
    return out


def _scan_consistent(game, view, limit):
    out = []
    seen = 0
    stack = [(game.new_initial_state(), 1.0)]
    while stack:
        state, reach = stack.pop()
        seen += 1
        if seen > limit:
            raise BeliefError("enumeration budget exceeded; use a sampling model")
        if state.info_view(view.player).key == view.key:
            out.append((state, reach))
            continue
        if state.is_terminal:
            continue
        if state.current_player == CHANCE:
            for a, p in state.chance_outcomes():
                if p > 0:
                    stack.append((state.apply(a), reach * p))
        else:
            for a in state.legal_actions():
                stack.append((state.apply(a), reach))
    if not out:
        raise BeliefError(f"no world state consistent with {view.key}")
    return out


# -------------------------------------------------------- opponent mixtures


@dataclass
class OpponentMixture:
    """Distribution over opponents' pure policy profiles.

    profiles: list of dicts player -> policy; probs aligned, normalized.
    """

    profiles: list
    probs: np.ndarray

    @classmethod
    def from_independent(cls, mixtures, searcher):
        """Product of per-player (policy, prob) catalogs, searcher excluded."""
        opponents = sorted(j for j in mixtures if j != searcher)
        supports = []
        for j in opponents:
            entries = [(pol, pr) for pol, pr in mixtures[j] if pr > 0.0]
            supports.append([(j, pol, pr) for pol, pr in entries])
        profiles = []
        probs = []
        for combo in itertools.product(*supports):
            profiles.append({j: pol for j, pol, _ in combo})
            probs.append(float(np.prod([pr for _, _, pr in combo])))
        return cls(profiles=profiles, probs=np.asarray(probs) / np.sum(probs))

    @classmethod
    def single(cls, policies_by_player):
        return cls(profiles=[dict(policies_by_player)], probs=np.ones(1))

    def sample(self, rng):
        return self.profiles[int(rng.choice(len(self.profiles), p=self.probs))]


def _profile_reach(state_seq, profile):
    """Product of the profile's action probabilities along a history."""
    reach = 1.0
    for state, action in state_seq:
        player = state.current_player
        if player in profile:
            legal = state.legal_actions()
            probs = profile[player].action_probs(state)
            reach *= float(probs[legal.index(action)])
            if reach == 0.0:
                return 0.0
    return reach


def replay_decisions(game, final_state):
    """(state, action) pairs along a history, rebuilt from the initial state."""
    seq = []
    state = game.new_initial_state()
    for action in _history_actions(final_state):
        seq.append((state, action))
        state = state.apply(action)
    return seq


def _history_actions(state):
    if isinstance(state, DondState):
        idx = state.game.instances.index(state.instance) if state.instance is not None else None
        return (() if idx is None else (idx,)) + state.moves
    return tuple(state.history)


@dataclass
class TypePosterior:
    """Per-opponent-profile posterior given an observed history."""

    mixture: OpponentMixture
    probs: np.ndarray

    def sample(self, rng):
        return self.mixture.profiles[int(rng.choice(len(self.probs), p=self.probs))]

    def as_dict(self):
        return list(zip(self.mixture.profiles, self.probs))


def opponent_type_posterior(game, state, mixture, searcher=None):
    """Pr(profile | h) from prior and each profile's reach of h (Bayes)."""
    seq = replay_decisions(game, state)
    weights = np.array([
        prior * _profile_reach(seq, profile)
        for profile, prior in zip(mixture.profiles, mixture.probs)
    ])
    total = weights.sum()
    if total <= 0.0:
        raise BeliefError("observed history is inconsistent with every opponent type")
    return TypePosterior(mixture=mixture, probs=weights / total)


def exact_posterior(game, view, mixture):
    """Pr(h | s) over consistent world states: chance reach times the mixture-
    averaged opponent reach, normalized."""
    states = consistent_states(game, view)
    weights = np.zeros(len(states))
    for idx, (state, chance_reach) in enumerate(states):
        seq = replay_decisions(game, state)
        opp = sum(
            prior * _profile_reach(seq, profile)
            for profile, prior in zip(mixture.profiles, mixture.probs)
        )
        weights[idx] = chance_reach * opp
    total = weights.sum()
    if total <= 0.0:
        raise BeliefError("information state unreachable under the opponent mixture")
    return [s for s, _ in states], weights / total


# --------------------------------------------------------------- the models


class BeliefModel:
    variant = "abstract"
    reads_hidden_state = False

    def sample(self, view, rng):
        raise NotImplementedError


class ExactBelief(BeliefModel):
    variant = "exact"

    def __init__(self, game, mixture):
        self.game = game
        self.mixture = mixture
        self._cache = {}

    def posterior(self, view):
        hit = self._cache.get(view.key)
        if hit is None:
            hit = exact_posterior(self.game, view, self.mixture)
            self._cache[view.key] = hit
        return hit

    def sample(self, view, rng):
        states, probs = self.posterior(view)
        return states[int(rng.choice(len(states), p=probs))]


class UniformBelief(BeliefModel):
    variant = "uniform"

    def __init__(self, game):
        self.game = game
        self._cache = {}

    def posterior(self, view):
        hit = self._cache.get(view.key)
        if hit is None:
            states = [s for s, _ in consistent_states(self.game, view)]
            hit = (states, np.full(len(states), 1.0 / len(states)))
            self._cache[view.key] = hit
        return hit

    def sample(self, view, rng):
        states, probs = self.posterior(view)
        return states[int(rng.integers(len(states)))]


class CheatBelief(BeliefModel):
    """Returns the actual hidden state; comparison harness only, since it
    reads information the searcher cannot have."""

    variant = "cheat"
    reads_hidden_state = True

    def __init__(self):
        self._state = None

    def bind(self, state):
        self._state = state

    def sample(self, view, rng):
        if self._state is None:
            raise BeliefError("cheat model queried before binding the true state")
        if self._state.info_view(view.player).key != view.key:
            raise BeliefError("cheat model bound to a state inconsistent with the query")
        return self._state


class FixedIndexBelief(BeliefModel):
    """Always the first (or last) consistent instance in database order."""

    def __init__(self, game, which="first"):
        if which not in ("first", "last"):
            raise ValueError("which must be 'first' or 'last'")
        self.game = game
        self.which = which
        self.variant = f"fixed-{which}"
        self._cache = {}

    def sample(self, view, rng):
        state = self._cache.get(view.key)
        if state is None:
            states = consistent_states(self.game, view)
            state = states[0][0] if self.which == "first" else states[-1][0]
            self._cache[view.key] = state
        return state


# ------------------------------------------------------------ learned model


class GenBuffer:
    """FIFO buffer of (information view, true world state) pairs."""

    def __init__(self, capacity=2**16):
        self.capacity = capacity
        self.items = deque(maxlen=capacity)

    def add(self, view, state):
        self.items.append((view, state))

    def __len__(self):
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def sample(self, batch, rng):
        idx = rng.integers(len(self.items), size=batch)
        return [self.items[int(i)] for i in idx]


def feasible_value_vectors(pool, total):
    """All nonnegative integer vectors pricing the pool at the given total."""
    from .games.dond import _value_vectors

    vectors = _value_vectors(tuple(pool), total)
    if not vectors:
        raise BeliefError(f"no feasible value vector for pool {pool} and total {total}")
    return vectors


def project_feasible_values(raw, feasible):
    """l2-nearest feasible vector; ties broken toward the lexicographic low."""
    if not feasible:
        raise BeliefError("empty feasible set")
    raw = np.asarray(raw, dtype=np.float64)
    ordered = sorted(feasible)
    dists = [float(np.sum((np.asarray(v, dtype=np.float64) - raw) ** 2)) for v in ordered]
    return ordered[int(np.argmin(dists))]


class LearnedBelief(BeliefModel):
    """Per-head categorical model of the opponent's item values.

    One head per item type with value classes 0..total, parameterized by
    Laplace-smoothed counts per observable context (pool, own values, last
    standing proposal), with backoff to coarser contexts for unseen queries.
    Raw head samples are projected onto the database-consistent set so every
    sampled state is reachable.
    """

    variant = "learned"

    def __init__(self, game):
        if not isinstance(game, DondGame):
            raise ValueError("the learned belief model targets Deal or No Deal")
        self.game = game
        self.counts = {}
        self.backoff = {}
        self.version = 0
        self._cache = {}

    def _context(self, view):
        m = self.game.params.item_types
        pool = tuple(view.public[:m])
        moves = tuple(view.public[m:])
        table = self.game.pool_actions(pool)
        last_split = None
        for a in reversed(moves):
            if a != table.accept:
                last_split = table.splits[a]
                break
        return (pool, tuple(view.private), last_split)

    def observe(self, view, state):
        """Fold one (view, true state) pair into the head counts."""
        ctx = self._context(view)
        opp = state.instance.values[1 - view.player]
        total = self.game.params.total_value
        m = self.game.params.item_types
        for key in (ctx, (ctx[0], ctx[1])):
            store = self.counts if key == ctx else self.backoff
            heads = store.get(key)
            if heads is None:
                heads = np.zeros((m, total + 1))
                store[key] = heads
            for item, value in enumerate(opp):
                heads[item, min(value, total)] += 1.0
        self.version += 1

    def fit(self, buffer, rng=None):
        """Cross-entropy fit = absorbing the buffer into the head counts."""
        for view, state in buffer:
            self.observe(view, state)
        return self

    def head_probs(self, view):
        """Laplace-smoothed per-head categoricals for the query context."""
        ctx = self._context(view)
        total = self.game.params.total_value
        m = self.game.params.item_types
        heads = self.counts.get(ctx)
        if heads is None:
            heads = self.backoff.get((ctx[0], ctx[1]))
        if heads is None:
            heads = np.zeros((m, total + 1))
        smoothed = heads + 1.0
        return smoothed / smoothed.sum(axis=1, keepdims=True)

    def loss(self, buffer):
        """Mean cross-entropy of the true opponent values under the heads."""
        total_loss = 0.0
        for view, state in buffer:
            probs = self.head_probs(view)
            opp = state.instance.values[1 - view.player]
            for item, value in enumerate(opp):
                total_loss -= np.log(probs[item, value])
        return total_loss / max(len(buffer), 1)

    def _candidates(self, view):
        """Database-consistent states keyed by opponent value vector."""
        states = consistent_states(self.game, view)
        return {s.instance.values[1 - view.player]: s for s, _ in states}

    def posterior(self, view):
        """Exact induced distribution: head products pushed through projection."""
        if self._cache.get("version") != self.version:
            self._cache = {"version": self.version}
        hit = self._cache.get(view.key)
        if hit is not None:
            return hit
        probs = self.head_probs(view)
        candidates = self._candidates(view)
        feasible = sorted(candidates)
        mass = {v: 0.0 for v in feasible}
        m = self.game.params.item_types
        total = self.game.params.total_value
        for raw in itertools.product(range(total + 1), repeat=m):
            p = float(np.prod([probs[i, raw[i]] for i in range(m)]))
            mass[project_feasible_values(raw, feasible)] += p
        states = [candidates[v] for v in feasible]
        weights = np.array([mass[v] for v in feasible])
        hit = (states, weights / weights.sum())
        self._cache[view.key] = hit
        return hit

    def sample(self, view, rng):
        """Sample each head independently, then project onto the feasible set."""
        probs = self.head_probs(view)
        raw = [int(rng.choice(probs.shape[1], p=probs[i])) for i in range(probs.shape[0])]
        candidates = self._candidates(view)
        chosen = project_feasible_values(raw, list(candidates))
        return candidates[chosen]


def make_belief_model(variant, game, mixture=None):
    """Factory over the model variants compared in the evaluation harness."""
    if variant == "exact":
        if mixture is None:
            raise ValueError("the exact model needs the opponent mixture")
        return ExactBelief(game, mixture)
    if variant == "uniform":
        return UniformBelief(game)
    if variant == "cheat":
        return CheatBelief()
    if variant in ("fixed-first", "fixed-last"):
        return FixedIndexBelief(game, which=variant.split("-")[1])
    if variant == "learned":
        return LearnedBelief(game)
    raise ValueError(f"unknown belief variant {variant!r}")
