import numpy as np
import pytest

from negobench.beliefs import (
    BeliefError,
    CheatBelief,
    ExactBelief,
    FixedIndexBelief,
    GenBuffer,
    LearnedBelief,
    OpponentMixture,
    UniformBelief,
    _scan_consistent,
    consistent_states,
    exact_posterior,
    feasible_value_vectors,
    make_belief_model,
    opponent_type_posterior,
    project_feasible_values,
)
from negobench.games import CHANCE, GameSpec
from negobench.games.base import rollout
from negobench.games.dond import greedy_threshold_policy
from negobench.policies import FunctionPolicy, TabularPolicy, UniformPolicy


@pytest.fixture(scope="module")
def game():
    return GameSpec.dond_mini().build()


def uniform_mixture():
    return OpponentMixture.single({1: UniformPolicy()})


def root_view(game, inst_idx=0, player=0):
    return game.new_initial_state().apply(inst_idx).info_view(player)


def test_consistent_fast_path_matches_tree_scan(game):
    rng = np.random.default_rng(0)
    for _ in range(20):
        state = game.new_initial_state()
        while state.current_player == CHANCE or (not state.is_terminal and rng.random() < 0.5):
            if state.is_terminal:
                break
            legal = state.legal_actions()
            state = state.apply(legal[rng.integers(len(legal))])
        if state.is_terminal:
            continue
        player = state.current_player
        view = state.info_view(player)
        fast = consistent_states(game, view)
        scan = _scan_consistent(game, view, 500_000)
        fk = sorted((s.instance.values, round(p, 12)) for s, p in fast)
        sk = sorted((s.instance.values, round(p, 12)) for s, p in scan)
        assert fk == sk
    kuhn = GameSpec.kuhn().build()
    state = kuhn.new_initial_state().apply(1).apply(2).apply(0)
    view = state.info_view(1)
    fast = consistent_states(kuhn, view)
    scan = _scan_consistent(kuhn, view, 10_000)
    assert sorted(s.history for s, _ in fast) == sorted(s.history for s, _ in scan)


def test_exact_posterior_uniform_at_root(game):
    states, probs = exact_posterior(game, root_view(game), uniform_mixture())
    assert len(states) > 1
    assert np.allclose(probs, 1.0 / len(states))


def test_exact_posterior_eliminates_incompatible_types(game):
    # opponent type that always proposes keeping everything
    def keep_all(state):
        legal = state.legal_actions()
        table = state.game.pool_actions(state.instance.pool)
        out = np.zeros(len(legal))
        out[legal.index(table.splits.index(state.instance.pool))] = 1.0
        return out

    start = game.new_initial_state().apply(0)
    table = game.pool_actions(start.instance.pool)
    observed = start.apply(0).apply(table.splits.index((0, 0)))  # opponent kept nothing
    view = observed.info_view(0)
    mixture = OpponentMixture.single({1: FunctionPolicy(keep_all)})
    with pytest.raises(BeliefError):
        exact_posterior(game, view, mixture)


def test_two_type_posterior_bayes_arithmetic(game):
    start = game.new_initial_state().apply(0)
    table = game.pool_actions(start.instance.pool)
    split_a = table.splits.index((1, 0))
    split_b = table.splits.index((0, 1))

    def typed(p_a):
        def probs(state):
            legal = state.legal_actions()
            out = np.zeros(len(legal))
            out[legal.index(split_a)] = p_a
            out[legal.index(split_b)] = 1.0 - p_a
            return out

        return FunctionPolicy(probs)

    mixture = OpponentMixture(
        profiles=[{1: typed(0.8)}, {1: typed(0.2)}], probs=np.array([0.5, 0.5])
    )
    observed = start.apply(0).apply(split_a)  # searcher acted, then opponent chose A
    post = opponent_type_posterior(game, observed, mixture)
    assert np.allclose(post.probs, [0.8, 0.2])
    # before any opponent action the posterior is the prior
    prior = opponent_type_posterior(game, start.apply(0), mixture)
    assert np.allclose(prior.probs, [0.5, 0.5])


def test_type_with_zero_reach_eliminated(game):
    start = game.new_initial_state().apply(0)
    table = game.pool_actions(start.instance.pool)
    split_a = table.splits.index((1, 0))
    split_b = table.splits.index((0, 1))

    def pure(split):
        def probs(state):
            legal = state.legal_actions()
            out = np.zeros(len(legal))
            out[legal.index(split)] = 1.0
            return out

        return FunctionPolicy(probs)

    mixture = OpponentMixture(
        profiles=[{1: pure(split_a)}, {1: pure(split_b)}], probs=np.array([0.5, 0.5])
    )
    observed = start.apply(0).apply(split_b)
    post = opponent_type_posterior(game, observed, mixture)
    assert np.allclose(post.probs, [0.0, 1.0])


def test_type_posterior_is_a_martingale(game):
    opp = greedy_threshold_policy(game)
    mixture = OpponentMixture(
        profiles=[{1: opp}, {1: UniformPolicy()}], probs=np.array([0.6, 0.4])
    )
    rng = np.random.default_rng(3)
    post_sum = np.zeros(2)
    n = 1500
    for _ in range(n):
        # play under the true mixture to a fixed depth of two moves
        profile = mixture.sample(rng)
        state = game.new_initial_state()
        moves = 0
        while not state.is_terminal and moves < 2:
            player = state.current_player
            if player == CHANCE:
                outs = state.chance_outcomes()
                a = outs[int(rng.choice(len(outs), p=[p for _, p in outs]))][0]
            else:
                pol = profile.get(player, UniformPolicy())
                a = pol.sample(state, rng)
                moves += 1
            state = state.apply(a)
        post_sum += opponent_type_posterior(game, state, mixture).probs
    avg = post_sum / n
    sigma = np.sqrt(0.6 * 0.4 / n)
    assert abs(avg[0] - 0.6) <= 4 * sigma


def test_all_variants_sample_consistently(game):
    mixture = uniform_mixture()
    rng = np.random.default_rng(4)
    models = {
        "exact": ExactBelief(game, mixture),
        "uniform": UniformBelief(game),
        "fixed-first": FixedIndexBelief(game, "first"),
        "fixed-last": FixedIndexBelief(game, "last"),
        "learned": LearnedBelief(game),
    }
    for _ in range(60):
        state = rollout(game.new_initial_state(), rng)
        # walk a random prefix instead of the terminal itself
        prefix = game.new_initial_state().apply(
            game.instances.index(state.instance)
        )
        for a in state.moves[: int(rng.integers(0, max(len(state.moves), 1)))]:
            prefix = prefix.apply(a)
        if prefix.is_terminal:
            continue
        player = prefix.current_player
        view = prefix.info_view(player)
        for name, model in models.items():
            sampled = model.sample(view, rng)
            assert sampled.info_view(player).key == view.key, name
        cheat = CheatBelief()
        cheat.bind(prefix)
        assert cheat.sample(view, rng) is prefix


def test_exact_sampling_matches_posterior_frequencies(game):
    mixture = OpponentMixture.single({1: greedy_threshold_policy(game)})
    start = game.new_initial_state().apply(2)
    table = game.pool_actions(start.instance.pool)
    opp_view_state = start.apply(0)
    opponent_action = greedy_threshold_policy(game).sample(opp_view_state, np.random.default_rng(0))
    observed = opp_view_state.apply(opponent_action)
    view = observed.info_view(0)
    model = ExactBelief(game, mixture)
    states, probs = model.posterior(view)
    n = 20_000
    rng = np.random.default_rng(5)
    counts = np.zeros(len(states))
    keyed = {id(s): i for i, s in enumerate(states)}
    for _ in range(n):
        counts[keyed[id(model.sample(view, rng))]] += 1
    for i, p in enumerate(probs):
        sigma = np.sqrt(n * p * (1 - p)) if 0 < p < 1 else 0.0
        assert abs(counts[i] - n * p) <= 4 * sigma + 1e-9


def test_fixed_models_are_constant(game):
    view = root_view(game)
    rng = np.random.default_rng(6)
    first = FixedIndexBelief(game, "first")
    last = FixedIndexBelief(game, "last")
    a = first.sample(view, rng)
    assert all(first.sample(view, rng) is a for _ in range(5))
    assert last.sample(view, rng) is not a
    with pytest.raises(ValueError):
        FixedIndexBelief(game, "middle")


def test_cheat_model_guards(game):
    model = CheatBelief()
    with pytest.raises(BeliefError):
        model.sample(root_view(game), np.random.default_rng(0))
    assert model.reads_hidden_state


# ----------------------------------------------------------------- learned


def test_constant_opponent_vector_concentrates(game):
    target = game.instances[0]
    buffer = GenBuffer()
    state = game.new_initial_state().apply(0)
    view = state.info_view(0)
    for _ in range(2000):
        buffer.add(view, state)
    model = LearnedBelief(game).fit(buffer)
    rng = np.random.default_rng(7)
    hits = sum(
        model.sample(view, rng).instance.values[1] == target.values[1] for _ in range(1000)
    )
    assert hits >= 990


def test_head_marginals_match_buffer_frequencies(game):
    rng = np.random.default_rng(8)
    buffer = GenBuffer()
    view = None
    counts = {}
    start_states = [game.new_initial_state().apply(i) for i in range(len(game.instances))]
    first_pool = start_states[0].instance.pool
    own = start_states[0].instance.values[0]
    compatible = [
        s for s in start_states
        if s.instance.pool == first_pool and s.instance.values[0] == own
    ]
    for _ in range(4000):
        state = compatible[int(rng.integers(len(compatible)))]
        view = state.info_view(0)
        buffer.add(view, state)
        opp = state.instance.values[1]
        counts[opp] = counts.get(opp, 0) + 1
    model = LearnedBelief(game).fit(buffer)
    probs = model.head_probs(view)
    total = sum(counts.values())
    m = game.params.item_types
    for item in range(m):
        empirical = np.zeros(game.params.total_value + 1)
        for opp, c in counts.items():
            empirical[opp[item]] += c / total
        assert np.all(np.abs(probs[item] - empirical) <= 0.05)


def test_fit_loss_non_increasing(game):
    rng = np.random.default_rng(9)
    buffer = GenBuffer()
    for _ in range(50):
        state = game.new_initial_state().apply(int(rng.integers(len(game.instances))))
        buffer.add(state.info_view(0), state)
    model = LearnedBelief(game)
    losses = [model.loss(buffer)]
    for _ in range(10):
        model.fit(buffer)
        losses.append(model.loss(buffer))
    assert all(b <= a + 1e-12 for a, b in zip(losses, losses[1:]))


def test_empty_buffer_fit_is_noop(game):
    model = LearnedBelief(game)
    before = dict(model.counts)
    model.fit(GenBuffer())
    assert model.counts == before


def test_learned_kl_to_exact_decreases(game):
    opp = greedy_threshold_policy(game)
    mixture = OpponentMixture.single({1: opp})
    exact = ExactBelief(game, mixture)
    model = LearnedBelief(game)
    rng = np.random.default_rng(10)

    probe_states = []
    for idx in range(len(game.instances)):
        s = game.new_initial_state().apply(idx)
        probe_states.append(s.apply(0).apply(opp.sample(s.apply(0), rng)))

    def kl_now():
        total = 0.0
        for state in probe_states:
            view = state.info_view(0)
            es, ep = exact.posterior(view)
            ls, lp = model.posterior(view)
            lmap = {s.instance.values[1]: p for s, p in zip(ls, lp)}
            for s, p in zip(es, ep):
                if p > 0:
                    total += p * np.log(p / max(lmap[s.instance.values[1]], 1e-12))
        return total / len(probe_states)

    checkpoints = [kl_now()]
    for _ in range(3):
        buffer = GenBuffer()
        for _ in range(1500):
            state = game.new_initial_state()
            while not state.is_terminal:
                player = state.current_player
                if player == CHANCE:
                    outs = state.chance_outcomes()
                    a = outs[int(rng.choice(len(outs), p=[p for _, p in outs]))][0]
                elif player == 1:
                    a = opp.sample(state, rng)
                else:
                    buffer.add(state.info_view(0), state)
                    legal = state.legal_actions()
                    a = legal[rng.integers(len(legal))]
                state = state.apply(a)
        model.fit(buffer)
        checkpoints.append(kl_now())
    assert checkpoints[-1] < checkpoints[0]
    assert checkpoints[-1] < 0.1


# -------------------------------------------------------------- projection


def test_project_feasible_identity_and_constraint():
    feasible = feasible_value_vectors((1, 2, 2), 10)
    for v in feasible[:10]:
        assert project_feasible_values(v, feasible) == v
    projected = project_feasible_values((11, 0, 0), feasible)
    # brute-force nearest by exhaustive scan
    raw = np.array([11.0, 0.0, 0.0])
    best = min(
        sorted(feasible),
        key=lambda v: (float(np.sum((np.array(v, dtype=float) - raw) ** 2)), v),
    )
    assert projected == best
    assert np.dot(projected, (1, 2, 2)) == 10


def test_project_feasible_tie_breaks_lexicographically():
    feasible = [(0, 2), (2, 0)]
    assert project_feasible_values((1.0, 1.0), feasible) == (0, 2)
    with pytest.raises(BeliefError):
        project_feasible_values((1.0, 1.0), [])


def test_factory_round_trip(game):
    mixture = uniform_mixture()
    for variant in ("exact", "uniform", "cheat", "fixed-first", "fixed-last", "learned"):
        model = make_belief_model(variant, game, mixture)
        assert model.variant == variant
    with pytest.raises(ValueError):
        make_belief_model("nope", game)
