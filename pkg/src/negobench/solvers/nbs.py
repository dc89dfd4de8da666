"""Bargaining-solution meta-strategy solvers.

Maximizes the log Nash product g(x) = sum_i log(u_i . x - d_i) over the
simplex of joint devices by projected gradient ascent (or its exponentiated
mirror variant). The log transform keeps the objective concave while leaving
the maximizers unchanged.
"""

from dataclasses import dataclass

import numpy as np

from .._kernels import log_nash_gradient, log_nash_product, nbs_ascent
from .projections import project_simplex
from .types import MetaSolution


class MarginError(ValueError):
    """A disagreement point leaves some player without the required margin."""


def flatten_payoffs(tensor):
    """(n_players, n_cells) view with cells in row-major joint order."""
    tensor = np.asarray(tensor, dtype=np.float64)
    n = tensor.shape[-1]
    return np.stack([tensor[..., i].reshape(-1) for i in range(n)], axis=0)


def default_disagreements(tensor):
    """One below each player's minimum payoff, so every deal beats no deal."""
    flat = flatten_payoffs(tensor)
    return flat.min(axis=1) - 1.0


@dataclass
class NbsConfig:
    disagreements: np.ndarray = None  # default: per-player tensor min - 1
    kappa: float = None               # default: resulting minimum margin
    iterations: int = 10_000
    step_scale: float = None          # default: the convergence-theorem schedule
    variant: str = "projected-gradient"  # or "exponentiated"

    def resolve(self, payoffs):
        """Fill defaults against a concrete (n, cells) payoff matrix."""
        n, cells = payoffs.shape
        d = self.disagreements
        d = default_disagreements_flat(payoffs) if d is None else np.asarray(d, dtype=np.float64)
        margins = payoffs.min(axis=1) - d
        if self.kappa is not None:
            # an explicit kappa is a promise about the whole simplex: check it
            kappa = self.kappa
            if kappa <= 0:
                raise MarginError(f"margin must be positive, got kappa={kappa}")
            bad = np.nonzero(margins < kappa - 1e-12)[0]
            if bad.size:
                raise MarginError(
                    f"player {int(bad[0])} margin {margins[bad[0]]:.6g} below kappa={kappa:.6g}"
                )
        else:
            kappa = float(margins.min())
            if kappa <= 0:
                # margins may still be positive away from the worst corner;
                # fall back to the uniform starting point's margin
                start = payoffs @ np.full(cells, 1.0 / cells) - d
                kappa = float(start.min())
            if kappa <= 0:
                worst = int(np.argmin(margins))
                raise MarginError(
                    f"player {worst} has no positive margin anywhere "
                    f"(disagreement {d[worst]:.6g} too high)"
                )
        u_max = float(np.abs(payoffs).max())
        if self.step_scale is not None:
            step0 = self.step_scale
        elif self.variant == "exponentiated":
            step0 = np.sqrt(2.0 * np.log(cells)) * kappa / (u_max * n)
        else:
            step0 = kappa * np.sqrt((cells - 1.0) / cells) / (u_max * n)
        if self.iterations < 1:
            raise ValueError("iteration budget must be >= 1")
        return d, kappa, u_max, step0


def default_disagreements_flat(payoffs):
    return payoffs.min(axis=1) - 1.0


def nbs_bound(t, kappa, u_max, n, card):
    """Optimality-gap guarantee after t steps of the default schedule."""
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    return u_max * n * np.sqrt(card) / (kappa * np.sqrt(t + 1.0))


def _run(tensor, cfg, exponentiated, record_trace):
    payoffs = flatten_payoffs(tensor)
    d, kappa, u_max, step0 = cfg.resolve(payoffs)
    cells = payoffs.shape[1]
    x0 = np.full(cells, 1.0 / cells)
    best_x, best_g, trace, bad_step, bad_player = nbs_ascent(
        payoffs, d, x0, cfg.iterations, step0, exponentiated, record_trace
    )
    if bad_step >= 0:
        raise MarginError(
            f"player {bad_player} margin violated at iterate {bad_step}"
        )
    sol = MetaSolution(kind="joint", device=np.asarray(best_x), objective=float(best_g))
    sol.flags["variant"] = "exponentiated" if exponentiated else "projected-gradient"
    sol.flags["kappa"] = kappa
    sol.flags["u_max"] = u_max
    if record_trace:
        sol.flags["trace"] = np.asarray(trace)
    return sol


def nbs_pga(tensor, cfg=None, record_trace=False):
    """Joint-device NBS by projected gradient ascent; returns the best iterate."""
    cfg = cfg or NbsConfig()
    return _run(tensor, cfg, cfg.variant == "exponentiated", record_trace)


def nbs_emda(tensor, cfg=None, record_trace=False):
    """Entropic-mirror (exponentiated) variant of nbs_pga."""
    cfg = cfg or NbsConfig(variant="exponentiated")
    return _run(tensor, cfg, True, record_trace)


def nbs_independent(tensor, cfg=None):
    """Per-player-mixture NBS variant; flagged best-effort (nonconcave)."""
    from ..empirical import expected_value

    cfg = cfg or NbsConfig()
    tensor = np.asarray(tensor, dtype=np.float64)
    shape = tensor.shape[:-1]
    n = tensor.shape[-1]
    payoffs = flatten_payoffs(tensor)
    d, kappa, u_max, step0 = cfg.resolve(payoffs)
    sigma = [np.full(m, 1.0 / m) for m in shape]

    def objective(profile):
        margins = expected_value(tensor, profile) - d
        if np.any(margins <= 0):
            return -np.inf
        return float(np.log(margins).sum())

    best = [s.copy() for s in sigma]
    best_g = objective(sigma)
    for t in range(cfg.iterations):
        margins = expected_value(tensor, sigma) - d
        # d g / d sigma_j(k) = sum_i u_i(k, sigma_{-j}) / margin_i
        grads = []
        for j in range(n):
            g = np.zeros(shape[j])
            for i in range(n):
                ui = tensor[..., i]
                vals = np.moveaxis(ui, j, 0)
                rest = [sigma[l] for l in range(n) if l != j]
                for s in reversed(rest):
                    vals = vals @ s
                g += vals / margins[i]
            grads.append(g)
        alpha = step0 / np.sqrt(t + 1.0)
        sigma = [project_simplex(s + alpha * g) for s, g in zip(sigma, grads)]
        g_val = objective(sigma)
        if g_val > best_g:
            best_g = g_val
            best = [s.copy() for s in sigma]
    sol = MetaSolution(kind="independent", mixtures=best, objective=best_g)
    sol.flags["nonconcave_best_effort"] = True
    return sol
