"""Best-response oracles: exact tree-walk best response, tabular Q-learning,
and the search-based response trainer that co-trains value, policy, and
generative estimators from search-generated episodes.

All oracles share one interface: (game, player, opponent mixture) -> policy,
so the PSRO driver runs unchanged with any of them.
"""

import copy
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .beliefs import GenBuffer, LearnedBelief, OpponentMixture
from .games.base import CHANCE
from .policies import Policy, TabularPolicy, UniformPolicy
from .search import SearchConfig, backprop_value, ismcts_search

# ------------------------------------------------------------------ exact BR


def exact_best_response(game, player, mixture, perfect_information=False, tie_rng=None):
    """Value-maximizing policy by backward induction over information states.

    Opponent reach under each supported pure profile weights the histories in
    an information state. With perfect_information the "information states"
    are full histories (a clairvoyant response, useful as a search oracle).
    Ties are broken toward the lowest action id, or uniformly at random when
    tie_rng is given.
    """
    profiles = mixture.profiles
    priors = np.asarray(mixture.probs, dtype=np.float64)
    histories = []  # (state, depth, weights per profile)
    by_parent = {}

    def walk(state, depth, weights):
        idx = len(histories)
        histories.append((state, depth, weights))
        if state.is_terminal:
            return idx
        children = []
        if state.current_player == CHANCE:
            for action, p in state.chance_outcomes():
                if p > 0:
                    children.append((action, walk(state.apply(action), depth + 1, weights * p)))
        elif state.current_player != player:
            probs = np.array([
                profile[state.current_player].action_probs(state) for profile in profiles
            ])
            for ai, action in enumerate(state.legal_actions()):
                w = weights * probs[:, ai]
                if np.any(w > 0):
                    children.append((action, walk(state.apply(action), depth + 1, w)))
        else:
            for action in state.legal_actions():
                children.append((action, walk(state.apply(action), depth + 1, weights)))
        by_parent[idx] = children
        return idx

    walk(game.new_initial_state(), 0, priors.copy())

    values = [None] * len(histories)  # per-profile expected value for `player`
    table = {}
    by_depth = {}
    for idx, (state, depth, _) in enumerate(histories):
        by_depth.setdefault(depth, []).append(idx)

    for depth in sorted(by_depth, reverse=True):
        grouped = {}
        for idx in by_depth[depth]:
            state, _, weights = histories[idx]
            if state.is_terminal:
                values[idx] = np.full(len(profiles), float(state.returns()[player]))
            elif state.current_player == CHANCE:
                total = np.zeros(len(profiles))
                chance = dict(state.chance_outcomes())
                for action, child in by_parent[idx]:
                    total += chance[action] * values[child]
                values[idx] = total
            elif state.current_player != player:
                total = np.zeros(len(profiles))
                base = weights
                for action, child in by_parent[idx]:
                    ratio = np.divide(
                        histories[child][2], base, out=np.zeros_like(base), where=base > 0
                    )
                    total += ratio * values[child]
                values[idx] = total
            else:
                key = f"h{idx}" if perfect_information else state.info_state_key(player)
                grouped.setdefault(key, []).append(idx)
        # one decision per information state, maximizing the weighted value
        for key, members in grouped.items():
            legal = histories[members[0]][0].legal_actions()
            scores = np.zeros(len(legal))
            for idx in members:
                weights = histories[idx][2]
                for ai, (action, child) in enumerate(by_parent[idx]):
                    scores[ai] += float(weights @ values[child])
            best = _argmax_tiebreak(scores, tie_rng)
            probs = np.zeros(len(legal))
            probs[best] = 1.0
            table[key] = probs
            for idx in members:
                values[idx] = values[by_parent[idx][best][1]]

    br_value = float(priors @ values[0])
    return TabularPolicy(table), br_value


def _argmax_tiebreak(scores, tie_rng, tol=1e-12):
    best = float(np.max(scores))
    ties = np.nonzero(scores >= best - tol)[0]
    if tie_rng is None or ties.size == 1:
        return int(ties[0])
    return int(ties[int(tie_rng.integers(ties.size))])


def clairvoyant_best_response(game, player, mixture):
    """Expected best-response value when the world state is fully observed.

    Histories are their own information states, so this upper-bounds the
    imperfect-information best response; it is the limit a search with the
    cheating belief model approaches.
    """

    def visit(state):
        if state.is_terminal:
            return np.full(len(mixture.profiles), float(state.returns()[player]))
        if state.current_player == CHANCE:
            total = np.zeros(len(mixture.profiles))
            for action, p in state.chance_outcomes():
                if p > 0:
                    total += p * visit(state.apply(action))
            return total
        if state.current_player != player:
            total = np.zeros(len(mixture.profiles))
            probs = np.array([
                profile[state.current_player].action_probs(state)
                for profile in mixture.profiles
            ])
            for ai, action in enumerate(state.legal_actions()):
                if np.any(probs[:, ai] > 0):
                    total += probs[:, ai] * visit(state.apply(action))
            return total
        best = np.full(len(mixture.profiles), -np.inf)
        for action in state.legal_actions():
            best = np.maximum(best, visit(state.apply(action)))
        return best

    return float(np.asarray(mixture.probs) @ visit(game.new_initial_state()))


# ------------------------------------------------------------- tabular Q


@dataclass
class QConfig:
    episodes: int = 20_000
    learning_rate: float = 0.1
    epsilon_start: float = 0.9
    epsilon_end: float = 0.05
    seed: int = 0


def policy_value_vs_mixture(game, player, policy, mixture):
    """Exact expected value of a policy against an opponent mixture."""
    from .games.base import exact_expected_returns

    total = 0.0
    for profile, prob in zip(mixture.profiles, mixture.probs):
        if prob <= 0:
            continue
        joint = dict(profile)
        joint[player] = policy
        total += prob * float(exact_expected_returns(game, joint)[player])
    return total


def tabular_q_response(game, player, mixture, cfg=None, initial_q=None):
    """Epsilon-greedy Q-learning against opponents resampled per episode."""
    cfg = cfg or QConfig()
    rng = np.random.default_rng(cfg.seed)
    q = {k: v.copy() for k, v in initial_q.items()} if initial_q else {}

    def q_row(state):
        key = state.info_state_key(player)
        row = q.get(key)
        if row is None:
            row = np.zeros(len(state.legal_actions()))
            q[key] = row
        return row

    for episode in range(cfg.episodes):
        frac = episode / max(cfg.episodes - 1, 1)
        eps = cfg.epsilon_start + (cfg.epsilon_end - cfg.epsilon_start) * frac
        profile = mixture.sample(rng)
        state = game.new_initial_state()
        visited = []
        while not state.is_terminal:
            current = state.current_player
            if current == CHANCE:
                outcomes = state.chance_outcomes()
                probs = np.array([p for _, p in outcomes])
                action = outcomes[int(rng.choice(len(outcomes), p=probs))][0]
            elif current != player:
                action = profile[current].sample(state, rng)
            else:
                row = q_row(state)
                if rng.random() < eps:
                    idx = int(rng.integers(len(row)))
                else:
                    idx = int(np.argmax(row))
                visited.append((state.info_state_key(player), idx))
                action = state.legal_actions()[idx]
            state = state.apply(action)
        target = float(state.returns()[player])
        for key, idx in reversed(visited):
            row = q[key]
            row[idx] += cfg.learning_rate * (target - row[idx])
            target = float(np.max(row))

    table = {}
    for key, row in q.items():
        probs = np.zeros(row.size)
        probs[int(np.argmax(row))] = 1.0
        table[key] = probs
    policy = TabularPolicy(table)
    policy.q_values = q
    return policy


# ----------------------------------------------------------- learner bundle


class LearnerBundle:
    """Tabular value, policy, and generative estimators plus delayed copies."""

    def __init__(self, game, player, l2=1e-3):
        self.game = game
        self.player = player
        self.l2 = l2
        self.value_table = {}
        self.policy_logits = {}
        self.generative = LearnedBelief(game) if hasattr(game, "instances") else None
        self.refresh_delayed()

    def value(self, view):
        return self.value_table.get(view.key, 0.0)

    def policy_priors(self, view):
        logits = self.policy_logits.get(view.key)
        if logits is None:
            return np.full(len(view.legal), 1.0 / len(view.legal))
        z = logits - logits.max()
        e = np.exp(z)
        return e / e.sum()

    def refresh_delayed(self):
        self.delayed = DelayedLearners(
            value_table=dict(self.value_table),
            policy_logits={k: v.copy() for k, v in self.policy_logits.items()},
            generative=copy.deepcopy(self.generative),
        )

    def checksum(self):
        total = sum(self.delayed.value_table.values())
        return (len(self.delayed.value_table), round(float(total), 12))


@dataclass
class DelayedLearners:
    value_table: dict
    policy_logits: dict
    generative: object

    def value(self, view):
        return self.value_table.get(view.key, 0.0)

    def policy_priors(self, view):
        logits = self.policy_logits.get(view.key)
        if logits is None:
            return np.full(len(view.legal), 1.0 / len(view.legal))
        z = logits - logits.max()
        e = np.exp(z)
        return e / e.sum()


@dataclass
class TrainBuffers:
    capacity: int = 2**16
    batch_size: int = 64
    values: deque = None
    policies: deque = None
    generative: GenBuffer = None

    def __post_init__(self):
        self.values = deque(maxlen=self.capacity)
        self.policies = deque(maxlen=self.capacity)
        self.generative = GenBuffer(capacity=self.capacity)


@dataclass
class TrainConfig:
    episodes: int = 10_000
    learning_rate: float = 2e-3
    l2: float = 1e-3
    target_delay: int = 200
    returned_policy: str = "greedy-value"  # search | policy-estimator | greedy-value
    search: SearchConfig = field(default_factory=SearchConfig)
    seed: int = 0

    def __post_init__(self):
        if self.episodes < 1:
            raise ValueError("episode budget must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if self.returned_policy not in ("search", "policy-estimator", "greedy-value"):
            raise ValueError(f"unknown returned policy mode {self.returned_policy!r}")


def update_learners(bundle, buffers, cfg, rng):
    """One stochastic step per estimator on freshly sampled batches.

    Tabular stand-ins for the squared-error / cross-entropy losses: values
    move toward their targets, policy logits toward the search targets, both
    with L2 decay; the generative model absorbs its batch into its counts.
    """
    lr = cfg.learning_rate
    batch = buffers.batch_size
    if buffers.values:
        idx = rng.integers(len(buffers.values), size=min(batch, len(buffers.values)))
        for i in idx:
            key, target = buffers.values[int(i)]
            v = bundle.value_table.get(key, 0.0)
            bundle.value_table[key] = v + lr * ((target - v) - bundle.l2 * v)
    if buffers.policies:
        idx = rng.integers(len(buffers.policies), size=min(batch, len(buffers.policies)))
        for i in idx:
            key, target = buffers.policies[int(i)]
            logits = bundle.policy_logits.get(key)
            if logits is None:
                logits = np.zeros(target.size)
            z = logits - logits.max()
            e = np.exp(z)
            probs = e / e.sum()
            bundle.policy_logits[key] = logits + lr * (target - probs) - lr * bundle.l2 * logits
    if bundle.generative is not None and len(buffers.generative):
        for view, state in buffers.generative.sample(
            min(batch, len(buffers.generative)), rng
        ):
            bundle.generative.observe(view, state)
    return bundle


def abr_train(game, player, mixture, cfg=None, rng=None, belief=None):
    """Search-based response training; returns (bundle, final policy).

    Per episode: fix an opponent profile sampled from the mixture; at each of
    the trainee's decisions run the search with the delayed learners; store
    policy targets and (state, world-state) pairs; at the end store the
    back-propagated outcome for every visited information state; then take
    one update step and refresh the delayed copies on schedule.
    """
    from .beliefs import UniformBelief

    cfg = cfg or TrainConfig()
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    bundle = LearnerBundle(game, player, l2=cfg.l2)
    buffers = TrainBuffers()
    own_generative = belief is None and bundle.generative is not None
    search_belief = belief if belief is not None else (
        bundle.generative if own_generative else UniformBelief(game)
    )

    for episode in range(cfg.episodes):
        profile = mixture.sample(rng)
        single = OpponentMixture.single(profile)
        state = game.new_initial_state()
        visited = [] if state.is_terminal else [state.info_view(player)]
        while not state.is_terminal:
            current = state.current_player
            if current == CHANCE:
                outcomes = state.chance_outcomes()
                probs = np.array([p for _, p in outcomes])
                action = outcomes[int(rng.choice(len(outcomes), p=probs))][0]
            elif current != player:
                action = profile[current].sample(state, rng)
            else:
                view = state.info_view(player)
                model = bundle.delayed.generative if own_generative else search_belief
                if getattr(model, "reads_hidden_state", False):
                    model.bind(state)
                result = ismcts_search(
                    game, view, model, single, bundle.delayed, cfg.search, rng
                )
                buffers.policies.append((view.key, result.policy))
                buffers.generative.add(view, state)
                action = result.action
            state = state.apply(action)
            visited.append(state.info_view(player))
        outcome = backprop_value(state.returns(), player, cfg.search.backprop)
        for view in visited:
            buffers.values.append((view.key, outcome))
        update_learners(bundle, buffers, cfg, rng)
        if (episode + 1) % cfg.target_delay == 0:
            bundle.refresh_delayed()
    bundle.refresh_delayed()
    return bundle, final_policy(game, player, bundle, mixture, cfg)


def final_policy(game, player, bundle, mixture, cfg):
    if cfg.returned_policy == "policy-estimator":
        return EstimatorPolicy(bundle, player)
    if cfg.returned_policy == "search":
        return SearchPolicy(game, player, bundle, mixture, cfg.search, seed=cfg.seed)
    return GreedyValuePolicy(game, player, bundle, cfg.search.backprop)


class EstimatorPolicy(Policy):
    """Plays the policy estimator's distribution directly."""

    def __init__(self, bundle, player):
        self.bundle = bundle
        self.player = player

    def action_probs(self, state):
        return self.bundle.policy_priors(state.info_view(self.player))


class GreedyValuePolicy(Policy):
    """One-ply search: greedy toward the value estimator under the belief model."""

    def __init__(self, game, player, bundle, backprop="IR", belief=None):
        from .beliefs import UniformBelief

        self.game = game
        self.player = player
        self.bundle = bundle
        self.backprop = backprop
        self.belief = belief or bundle.generative or UniformBelief(game)

    def action_probs(self, state):
        view = state.info_view(self.player)
        states, probs = self.belief.posterior(view)
        legal = view.legal
        scores = np.zeros(len(legal))
        for h, p in zip(states, probs):
            for ai, action in enumerate(legal):
                nxt = h.apply(action)
                if nxt.is_terminal:
                    scores[ai] += p * backprop_value(nxt.returns(), self.player, self.backprop)
                else:
                    scores[ai] += p * self.bundle.value(nxt.info_view(self.player))
        out = np.zeros(len(legal))
        out[int(np.argmax(scores))] = 1.0
        return out


class SearchPolicy(Policy):
    """Runs a fresh search at every decision (deterministic per seed)."""

    def __init__(self, game, player, bundle, mixture, search_cfg, seed=0):
        self.game = game
        self.player = player
        self.bundle = bundle
        self.mixture = mixture
        self.search_cfg = search_cfg
        self.rng = np.random.default_rng(seed)

    def action_probs(self, state):
        view = state.info_view(self.player)
        model = self.bundle.generative
        result = ismcts_search(
            self.game, view, model, self.mixture, self.bundle.delayed,
            self.search_cfg, self.rng,
        )
        out = np.zeros(len(view.legal))
        out[view.legal.index(result.action)] = 1.0
        return out
