import numpy as np
import pytest

from negobench.empirical import (
    EmpiricalGame,
    cce_deviation_gains,
    ce_deviation_gains,
    estimate_entry,
    expected_value,
    fill_missing_entries,
    max_deviation_gain,
    nfg_nashconv,
    pure_response_values,
    simulate_entry,
    tensor_from_text,
    tensor_to_text,
)
from negobench.games import CHICKEN, MATCHING_PENNIES, GameSpec
from negobench.games.base import exact_expected_returns
from negobench.policies import TabularPolicy, UniformPolicy

CHK = np.array(CHICKEN, dtype=float)
MP = np.array(MATCHING_PENNIES, dtype=float)

# chicken cells row-major: CC, CS, SC, SS
MU_STAR = np.array([0.0, 0.5, 0.5, 0.0])


def test_expected_value_pure_profile_is_cell():
    value = expected_value(CHK, [np.array([1.0, 0.0]), np.array([0.0, 1.0])])
    assert list(value) == [1.0, -1.0]


def test_expected_value_uniform_matching_pennies():
    u = expected_value(MP, [np.full(2, 0.5), np.full(2, 0.5)])
    assert np.allclose(u, 0.0)


def test_expected_value_chicken_device():
    assert np.allclose(expected_value(CHK, MU_STAR), [0.0, 0.0])


def test_expected_value_linear_in_device():
    rng = np.random.default_rng(0)
    t = rng.normal(size=(3, 2, 2))
    for _ in range(20):
        m1 = rng.dirichlet(np.ones(6))
        m2 = rng.dirichlet(np.ones(6))
        a = rng.uniform()
        lhs = expected_value(t, a * m1 + (1 - a) * m2)
        rhs = a * expected_value(t, m1) + (1 - a) * expected_value(t, m2)
        assert np.allclose(lhs, rhs, atol=1e-12)


def test_shape_mismatch_rejected():
    with pytest.raises(ValueError):
        expected_value(CHK, [np.array([1.0, 0.0])])
    with pytest.raises(ValueError):
        expected_value(CHK, np.array([0.5, 0.5]))


def test_cce_gains_chicken_device():
    gains = cce_deviation_gains(CHK, MU_STAR)
    assert np.allclose(gains[0], [-2.0, -1.0])
    assert np.allclose(gains[1], [-2.0, -1.0])  # symmetric game


def test_cce_gains_pure_nash_nonpositive():
    point = np.array([0.0, 1.0, 0.0, 0.0])  # CS is a pure Nash of chicken
    for g in cce_deviation_gains(CHK, point):
        assert np.all(g <= 1e-12)


def test_cce_gains_uniform_device_brute_force():
    rng = np.random.default_rng(1)
    t = rng.normal(size=(2, 3, 2))
    mu = np.full(6, 1.0 / 6)
    gains = cce_deviation_gains(t, mu)
    base = expected_value(t, mu)
    for i in range(2):
        for a in range(t.shape[i]):
            total = 0.0
            for r in range(t.shape[0]):
                for c in range(t.shape[1]):
                    joint = (a, c) if i == 0 else (r, a)
                    total += (1.0 / 6) * t[joint][i]
            assert gains[i][a] == pytest.approx(total - base[i], abs=1e-12)


def test_ce_gains_chicken_conditional():
    gains, zero = ce_deviation_gains(CHK, MU_STAR)
    # recommended S (row 1), deviate to C: opponent conditionally plays C
    assert gains[0][1, 0] == pytest.approx(-4.0)
    assert not zero[0][1]
    for g in gains:
        assert np.all(g <= 1e-12)


def test_ce_gains_product_device_are_best_response_gains():
    rng = np.random.default_rng(2)
    t = rng.normal(size=(2, 2, 2))
    s1 = rng.dirichlet(np.ones(2))
    s2 = rng.dirichlet(np.ones(2))
    mu = np.outer(s1, s2).reshape(-1)
    gains, _ = ce_deviation_gains(t, mu)
    for i, opp in ((0, s2), (1, s1)):
        vals = pure_response_values(t, [s1, s2], i)
        for r in range(2):
            for a in range(2):
                assert gains[i][r, a] == pytest.approx(vals[a] - vals[r], abs=1e-12)


def test_ce_zero_probability_recommendation_flagged():
    point = np.array([0.0, 1.0, 0.0, 0.0])
    gains, zero = ce_deviation_gains(CHK, point)
    assert zero[0][1]  # player 0 never recommended S
    assert np.all(gains[0][1] == 0.0)


def test_cce_gain_is_marginal_mix_of_ce_gains():
    rng = np.random.default_rng(3)
    for shape in ((2, 2), (2, 2, 2)):
        t = rng.normal(size=shape + (len(shape),))
        mu = rng.dirichlet(np.ones(int(np.prod(shape))))
        cce = cce_deviation_gains(t, mu)
        ce, _ = ce_deviation_gains(t, mu)
        shaped = mu.reshape(shape)
        margs = []
        for i in range(len(shape)):
            axes = tuple(j for j in range(len(shape)) if j != i)
            marg = shaped.sum(axis=axes)
            margs.append(marg)
            for a in range(shape[i]):
                composed = float((marg * ce[i][:, a]).sum())
                assert cce[i][a] == pytest.approx(composed, abs=1e-10)
        # hence the best CCE deviation never beats the best composed CE deviation
        best_ce = max(
            float((margs[i] * ce[i].max(axis=1)).sum()) for i in range(len(shape))
        )
        assert max(float(g.max()) for g in cce) <= best_ce + 1e-10


def test_nashconv_values():
    assert nfg_nashconv(MP, [np.full(2, 0.5), np.full(2, 0.5)]) == pytest.approx(0.0)
    assert nfg_nashconv(CHK, [np.array([1.0, 0.0]), np.array([1.0, 0.0])]) == pytest.approx(8.0)
    rng = np.random.default_rng(4)
    for _ in range(20):
        t = rng.normal(size=(3, 3, 2))
        sigma = [rng.dirichlet(np.ones(3)), rng.dirichlet(np.ones(3))]
        assert nfg_nashconv(t, sigma) >= -1e-12


def test_estimate_entry_exact_for_deterministic_play():
    game = GameSpec.matrix(CHK).build()
    p0 = TabularPolicy({game.new_initial_state().info_state_key(0): [0.0, 1.0]})
    p1 = TabularPolicy({game.new_initial_state().apply(0).info_state_key(1): [1.0, 0.0]})
    vals = simulate_entry(game, [p0, p1], 1, np.random.default_rng(0))
    assert list(vals) == [-1.0, 1.0]


def test_estimate_entry_matches_exact_expectation_and_seeds():
    game = GameSpec.dond_mini().build()
    policies = [UniformPolicy(), UniformPolicy()]
    exact = exact_expected_returns(game, policies)
    n = 4000
    est1 = simulate_entry(game, policies, n, np.random.default_rng(7))
    est2 = simulate_entry(game, policies, n, np.random.default_rng(7))
    assert np.array_equal(est1, est2)
    spread = game.params.total_value
    assert np.all(np.abs(est1 - exact) <= 3.0 * spread / np.sqrt(n))


def test_fill_missing_entries_only_touches_missing():
    game = GameSpec.matching_pennies().build()
    emp = EmpiricalGame(game=game, catalogs=[[UniformPolicy()], [UniformPolicy()]])
    emp.grow()
    fill_missing_entries(emp, 16, np.random.default_rng(0))
    before = emp.tensor.copy()
    emp.catalogs[0].append(UniformPolicy())
    emp.catalogs[1].append(UniformPolicy())
    emp.grow()
    assert np.isnan(emp.tensor[1, 1, 0]) and not np.isnan(emp.tensor[0, 0, 0])
    fill_missing_entries(emp, 16, np.random.default_rng(1))
    assert np.array_equal(emp.tensor[0, 0], before[0, 0])
    assert not np.any(np.isnan(emp.tensor))


def test_tensor_text_round_trip():
    rng = np.random.default_rng(5)
    t = rng.normal(size=(2, 3, 2))
    text = tensor_to_text(t)
    back = tensor_from_text(text)
    assert np.array_equal(back, t)
    with pytest.raises(ValueError):
        tensor_from_text("players 2\nbad header\n")
