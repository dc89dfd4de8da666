import itertools

import numpy as np
import pytest

from negobench.solvers import project_simplex, project_truncated_simplex


def grid_nearest(y, floor=0.0, steps=400):
    """Brute-force l2-nearest point of the (truncated) 2-simplex."""
    best, best_d = None, np.inf
    for k in range(steps + 1):
        x0 = floor + (1 - 2 * floor) * k / steps
        x = np.array([x0, 1.0 - x0])
        d = np.sum((x - y) ** 2)
        if d < best_d:
            best, best_d = x, d
    return best


def test_interior_point_unchanged():
    x = np.full(3, 1.0 / 3)
    assert np.allclose(project_simplex(x), x)


def test_tabulated_examples():
    assert np.allclose(project_simplex([0.5, 0.7]), [0.4, 0.6])
    assert np.allclose(project_simplex([1.5, -0.2]), [1.0, 0.0])
    assert np.allclose(project_truncated_simplex([1.0, 0.0], 0.1), [0.9, 0.1])


def test_matches_grid_oracle_2d():
    rng = np.random.default_rng(0)
    for _ in range(50):
        y = rng.normal(scale=2.0, size=2)
        assert np.allclose(project_simplex(y), grid_nearest(y), atol=3e-3)
        assert np.allclose(
            project_truncated_simplex(y, 0.2), grid_nearest(y, floor=0.2), atol=3e-3
        )


def test_projection_properties():
    rng = np.random.default_rng(1)
    for dim in (2, 3, 7):
        for _ in range(40):
            y = rng.normal(scale=3.0, size=dim)
            x = project_simplex(y)
            assert np.all(x >= 0)
            assert x.sum() == pytest.approx(1.0, abs=1e-12)
            # projection onto a convex set: <y - x, z - x> <= 0 at vertices
            for j in range(dim):
                z = np.zeros(dim)
                z[j] = 1.0
                assert (y - x) @ (z - x) <= 1e-9


def test_truncated_interior_point_above_floor_unchanged():
    x = np.array([0.3, 0.3, 0.4])
    assert np.allclose(project_truncated_simplex(x, 0.1), x)


def test_floor_zero_reduces_to_simplex():
    rng = np.random.default_rng(2)
    for _ in range(20):
        y = rng.normal(size=4)
        assert np.allclose(project_truncated_simplex(y, 0.0), project_simplex(y))


def test_infeasible_floor_rejected():
    with pytest.raises(ValueError):
        project_truncated_simplex([0.5, 0.5, 0.0], 0.5)
    with pytest.raises(ValueError):
        project_simplex([np.nan, 0.0])
