"""Information-set MCTS with generative root sampling and Bayes-rule
opponent determinization.

Each simulation samples a world state from the belief model, samples an
opponent pure profile from the type posterior at that state (replacing
opponent decisions with chance under that profile), descends the searcher's
information-state tree by MaxPUCT, expands one leaf evaluated by the value
estimator, and back-propagates the configured value type along the visited
(state, action) pairs.
"""

from dataclasses import dataclass

import numpy as np

from .beliefs import opponent_type_posterior
from .games.base import CHANCE

BACKPROP_TYPES = ("IR", "IE", "SW", "NBS")
DEFAULT_C_UCT = {"IR": 20.0, "IE": 20.0, "SW": 40.0, "NBS": 100.0}


@dataclass
class SearchConfig:
    simulations: int = 300
    backprop: str = "IR"
    c_uct: float = None  # default depends on the back-prop value type

    def __post_init__(self):
        if self.backprop not in BACKPROP_TYPES:
            raise ValueError(f"unknown back-prop type {self.backprop!r}")
        if self.simulations < 1:
            raise ValueError("need at least one simulation")
        if self.c_uct is None:
            self.c_uct = DEFAULT_C_UCT[self.backprop]
        if self.c_uct < 0:
            raise ValueError("c_uct must be nonnegative")


def backprop_value(returns, searcher, kind):
    """Scalar propagated up the tree for the searching player."""
    returns = np.asarray(returns, dtype=np.float64)
    if kind == "IR":
        return float(returns[searcher])
    if returns.size != 2:
        raise ValueError(f"back-prop type {kind} is defined for two-player returns")
    mine = float(returns[searcher])
    other = float(returns[1 - searcher])
    if kind == "IE":
        return mine - 0.5 * max(other - mine, 0.0)
    if kind == "SW":
        return mine + other
    if kind == "NBS":
        return mine * other
    raise ValueError(f"unknown back-prop type {kind!r}")


class SearchNode:
    __slots__ = ("legal", "visits", "values", "priors", "total_visits")

    def __init__(self, legal, priors):
        self.legal = legal
        self.visits = np.zeros(len(legal))
        self.values = np.zeros(len(legal))
        self.priors = np.asarray(priors, dtype=np.float64)
        self.total_visits = 0.0


def max_puct(node, c_uct):
    """Index of the PUCT-maximizing child; ties go to the lowest action id."""
    q = np.where(node.visits > 0, node.values / np.maximum(node.visits, 1.0), 0.0)
    bonus = node.priors * np.sqrt(node.total_visits) / (node.visits + 1.0)
    return int(np.argmax(q + c_uct * bonus))


def puct_scores(node, c_uct):
    q = np.where(node.visits > 0, node.values / np.maximum(node.visits, 1.0), 0.0)
    return q + c_uct * node.priors * np.sqrt(node.total_visits) / (node.visits + 1.0)


class SearchResult:
    def __init__(self, action, policy, root, tree):
        self.action = action
        self.policy = policy
        self.root = root
        self.tree = tree

    @property
    def root_value(self):
        total = self.root.visits.sum()
        return float(self.root.values.sum() / total) if total > 0 else 0.0


def ismcts_search(game, view, belief, mixture, learners, cfg, rng):
    """Search from the information state ``view``; returns a SearchResult.

    ``learners`` provides value(view) and policy_priors(view) callables
    (usually the delayed copies of the trained estimators).
    """
    searcher = view.player
    tree = {}
    root = SearchNode(view.legal, learners.policy_priors(view))
    tree[view.key] = root
    single_type = len(mixture.profiles) == 1
    for _ in range(cfg.simulations):
        state = belief.sample(view, rng)
        if single_type:
            profile = mixture.profiles[0]
        else:
            profile = opponent_type_posterior(game, state, mixture).sample(rng)
        path = []
        while True:
            if state.is_terminal:
                reward = backprop_value(state.returns(), searcher, cfg.backprop)
                break
            player = state.current_player
            if player == CHANCE:
                outcomes = state.chance_outcomes()
                probs = np.array([p for _, p in outcomes])
                action = outcomes[int(rng.choice(len(outcomes), p=probs))][0]
            elif player != searcher:
                action = profile[player].sample(state, rng)
            else:
                node_view = state.info_view(searcher)
                node = tree.get(node_view.key)
                if node is None:
                    tree[node_view.key] = SearchNode(
                        node_view.legal, learners.policy_priors(node_view)
                    )
                    reward = learners.value(node_view)
                    break
                idx = max_puct(node, cfg.c_uct)
                path.append((node, idx))
                action = node.legal[idx]
            state = state.apply(action)
        for node, idx in path:
            node.visits[idx] += 1.0
            node.values[idx] += reward
            node.total_visits += 1.0
    best = int(np.argmax(root.visits))
    total = root.visits.sum()
    policy = root.visits / total if total > 0 else np.full(len(view.legal), 1.0 / len(view.legal))
    return SearchResult(action=view.legal[best], policy=policy, root=root, tree=tree)
