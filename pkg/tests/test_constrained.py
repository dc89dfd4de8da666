import numpy as np
import pytest

import negobench.solvers.constrained as constrained
from negobench.empirical import (
    cce_deviation_gains,
    ce_deviation_gains,
    expected_value,
    max_deviation_gain,
)
from negobench.games import BACH_OR_STRAVINSKY, CHICKEN, MATCHING_PENNIES
from negobench.solvers import ConstrainedProgram, SolverInfeasible, solve_concave_over_polytope

CHK = np.array(CHICKEN, dtype=float)
BOS = np.array(BACH_OR_STRAVINSKY, dtype=float)
MP = np.array(MATCHING_PENNIES, dtype=float)


def test_max_nbs_cce_chicken_selects_the_fair_mix():
    sol = solve_concave_over_polytope(CHK, ConstrainedProgram("log-nash-product", "cce"))
    device = sol.device  # cells CC, CS, SC, SS
    assert device[1] == pytest.approx(0.5, abs=1e-3)
    assert device[2] == pytest.approx(0.5, abs=1e-3)
    assert device[0] <= 1e-3 and device[3] <= 1e-3
    for g in cce_deviation_gains(CHK, device):
        assert g.max() <= 1e-6


def test_max_nbs_cce_bach_or_stravinsky():
    sol = solve_concave_over_polytope(BOS, ConstrainedProgram("log-nash-product", "cce"))
    device = sol.device  # cells BB, BS, SB, SS
    assert device[0] == pytest.approx(0.5, abs=1e-3)
    assert device[3] == pytest.approx(0.5, abs=1e-3)
    assert np.allclose(expected_value(BOS, device), [2.5, 2.5], atol=1e-3)


def test_gini_unconstrained_and_matching_pennies_give_uniform():
    flat = np.zeros((2, 2, 2))
    flat[..., 0] = 2.0
    flat[..., 1] = 2.0
    sol = solve_concave_over_polytope(flat, ConstrainedProgram("gini", "cce"))
    assert np.allclose(sol.device, 0.25, atol=1e-9)
    sol = solve_concave_over_polytope(MP, ConstrainedProgram("gini", "cce"))
    assert np.allclose(sol.device, 0.25, atol=1e-6)


def test_devices_feasible_on_random_tensors():
    rng = np.random.default_rng(19)
    for k in range(8):
        t = rng.uniform(-1, 2, size=(2, 2, 2)) if k % 2 else rng.uniform(-1, 2, size=(2, 2, 2, 3))
        for objective in ("gini", "log-nash-product", "welfare", "entropy"):
            for family in ("cce", "ce"):
                sol = solve_concave_over_polytope(
                    t, ConstrainedProgram(objective, family)
                )
                assert sol.flags["max_deviation_gain"] <= 1e-6
                assert max_deviation_gain(t, sol.device, family) <= 1e-6
                gains = cce_deviation_gains(t, sol.device)
                assert max(g.max() for g in gains) <= 1e-6
                if family == "ce":
                    ce, _ = ce_deviation_gains(t, sol.device)
                    assert max(g.max() for g in ce) <= 1e-6


def test_objective_agrees_with_long_run_reference():
    rng = np.random.default_rng(23)
    for _ in range(3):
        t = rng.uniform(-1, 2, size=(2, 2, 2))
        for objective in ("gini", "log-nash-product"):
            prog = ConstrainedProgram(objective, "cce")
            a = solve_concave_over_polytope(t, prog)
            b = solve_concave_over_polytope(t, prog.reference())
            assert abs(a.objective - b.objective) <= 1e-6


def test_infeasible_never_returned_silently(monkeypatch):
    monkeypatch.setattr(constrained, "_dykstra_polish",
                        lambda mu, rows, target, support=None, max_sweeps=0: mu)
    rng = np.random.default_rng(5)
    t = rng.uniform(-1, 2, size=(2, 2, 2))
    prog = ConstrainedProgram("gini", "cce", outer_rounds=1, inner_iters=2, tolerance=1e-12)
    with pytest.raises(SolverInfeasible) as err:
        solve_concave_over_polytope(t, prog)
    assert err.value.infeasibility > 1e-12


def test_bad_program_rejected():
    with pytest.raises(ValueError):
        ConstrainedProgram(objective="nope")
    with pytest.raises(ValueError):
        ConstrainedProgram(family="nope")
    with pytest.raises(ValueError):
        ConstrainedProgram(tolerance=0.0)
