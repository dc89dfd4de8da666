"""Policy interface: a policy maps a decision state to action probabilities.

Probabilities are aligned with ``state.legal_actions()`` order. Tabular
policies are keyed by information-state key, so one table can only ever see
one player's perspective.
"""

import numpy as np


class Policy:
    def action_probs(self, state):
        raise NotImplementedError

    def sample(self, state, rng):
        legal = state.legal_actions()
        probs = self.action_probs(state)
        return legal[int(rng.choice(len(legal), p=probs))]


class UniformPolicy(Policy):
    def action_probs(self, state):
        legal = state.legal_actions()
        return np.full(len(legal), 1.0 / len(legal))


class TabularPolicy(Policy):
    """Dict-backed policy; unseen information states act uniformly."""

    def __init__(self, table=None):
        self.table = dict(table) if table else {}

    def action_probs(self, state):
        key = state.info_state_key(state.current_player)
        probs = self.table.get(key)
        legal = state.legal_actions()
        if probs is None:
            return np.full(len(legal), 1.0 / len(legal))
        probs = np.asarray(probs, dtype=np.float64)
        if probs.size != len(legal):
            raise ValueError(f"table entry for {key} has {probs.size} probs, expected {len(legal)}")
        return probs

    def set(self, key, probs):
        self.table[key] = np.asarray(probs, dtype=np.float64)


class FunctionPolicy(Policy):
    """Wraps a plain function state -> probability vector."""

    def __init__(self, fn):
        self.fn = fn

    def action_probs(self, state):
        return np.asarray(self.fn(state), dtype=np.float64)


def greedy_probs(values, legal_count=None):
    """Point mass on the argmax, lowest index on ties."""
    values = np.asarray(values, dtype=np.float64)
    probs = np.zeros(values.size if legal_count is None else legal_count)
    probs[int(np.argmax(values))] = 1.0
    return probs
