"""Concave-objective equilibrium selection over the (C)CE polytope.

The deviation-gain constraints are linear in the correlation device, so any
valid device lies in a polytope inside the joint simplex. A strictly concave
objective (Gini impurity, entropy, log Nash product with an entropy
tie-break) then selects a unique equilibrium.

Mechanism: augmented-Lagrangian projected gradient ascent with geometric
penalty growth, a Dykstra feasibility polish, and a final exact deviation
audit. Infeasible devices are never returned silently.
"""

from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import linprog

from ..empirical import max_deviation_gain
from .nbs import default_disagreements_flat, flatten_payoffs
from .projections import project_simplex
from .types import MetaSolution

OBJECTIVES = ("gini", "log-nash-product", "welfare", "entropy")


class SolverInfeasible(RuntimeError):
    """Raised when the solver cannot meet the feasibility tolerance."""

    def __init__(self, message, infeasibility):
        super().__init__(message)
        self.infeasibility = infeasibility


@dataclass
class ConstrainedProgram:
    objective: str = "gini"
    family: str = "cce"               # "cce" or "ce"
    entropy_weight: float = None      # default: 1e-3 for log-nash-product, else 0
    tolerance: float = 1e-6
    outer_rounds: int = 60
    inner_iters: int = 600
    rho0: float = 10.0
    rho_growth: float = 3.0
    step_shrink: float = 1.0
    disagreements: np.ndarray = None  # log-nash-product only

    def __post_init__(self):
        if self.objective not in OBJECTIVES:
            raise ValueError(f"unknown objective {self.objective!r}")
        if self.family not in ("cce", "ce"):
            raise ValueError(f"unknown family {self.family!r}")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.entropy_weight is not None and self.entropy_weight < 0:
            raise ValueError("entropy weight must be nonnegative")

    def resolved_entropy_weight(self):
        if self.entropy_weight is not None:
            return self.entropy_weight
        return 1e-3 if self.objective == "log-nash-product" else 0.0

    def reference(self):
        """Long-run schedule used as the objective cross-check."""
        return replace(
            self,
            outer_rounds=self.outer_rounds * 2,
            inner_iters=self.inner_iters * 2,
            step_shrink=self.step_shrink * 0.5,
        )


def deviation_matrix(tensor, family):
    """Rows r with r . mu = one deviation gain; feasibility is A mu <= 0."""
    tensor = np.asarray(tensor, dtype=np.float64)
    shape = tensor.shape[:-1]
    n = tensor.shape[-1]
    rows = []
    labels = []
    for i in range(n):
        ui = tensor[..., i]
        for a in range(shape[i]):
            dev = np.broadcast_to(np.expand_dims(np.take(ui, a, axis=i), axis=i), ui.shape)
            gain = dev - ui
            if family == "cce":
                rows.append(gain.reshape(-1))
                labels.append((i, None, a))
            else:
                for r in range(shape[i]):
                    if r == a:
                        continue
                    mask = np.zeros(shape)
                    idx = [slice(None)] * n
                    idx[i] = r
                    mask[tuple(idx)] = 1.0
                    rows.append((gain * mask).reshape(-1))
                    labels.append((i, r, a))
    return np.array(rows), labels


def _entropy(mu, eps=1e-12):
    safe = np.maximum(mu, eps)
    return float(-(mu * np.log(safe)).sum())


def _entropy_grad(mu, eps=1e-12):
    return -np.log(np.maximum(mu, eps)) - 1.0


def _make_objective(prog, tensor, alive=None):
    payoffs = flatten_payoffs(tensor)
    if alive is not None:
        payoffs = payoffs[:, alive]
    w_h = prog.resolved_entropy_weight()
    if prog.objective == "gini":
        def f(mu):
            return 1.0 - float(mu @ mu) + w_h * _entropy(mu)

        def grad(mu):
            return -2.0 * mu + w_h * _entropy_grad(mu)

        return f, grad, 2.0
    if prog.objective == "welfare":
        w = payoffs.sum(axis=0)

        def f(mu):
            return float(w @ mu) + w_h * _entropy(mu)

        def grad(mu):
            return w + w_h * _entropy_grad(mu)

        return f, grad, 0.0
    if prog.objective == "entropy":
        def f(mu):
            return _entropy(mu)

        def grad(mu):
            return _entropy_grad(mu)

        return f, grad, 0.0
    # log Nash product
    d = prog.disagreements
    d = default_disagreements_flat(payoffs) if d is None else np.asarray(d, dtype=np.float64)
    margins0 = payoffs.min(axis=1) - d
    if np.any(margins0 <= 0):
        raise ValueError("disagreement points must lie below the minimum payoffs")

    def f(mu):
        margins = payoffs @ mu - d
        if np.any(margins <= 0):
            return -np.inf
        return float(np.log(margins).sum()) + w_h * _entropy(mu)

    def grad(mu):
        margins = payoffs @ mu - d
        return payoffs.T @ (1.0 / margins) + w_h * _entropy_grad(mu)

    lips = float((np.linalg.norm(payoffs, axis=1) ** 2 / margins0 ** 2).sum())
    return f, grad, lips


def _dykstra_polish(mu, rows, target, support=None, max_sweeps=3000):
    """Project approximately onto {A mu <= 0} intersect simplex (Dykstra).

    When a support mask is given, cells outside it stay exactly zero and the
    projection runs in the support subspace, which keeps clipped
    recommendation marginals clean.
    """
    if support is None:
        support = np.ones(mu.size, dtype=bool)
    x = mu[support].copy()
    sub = rows[:, support]
    norms2 = np.einsum("ij,ij->i", sub, sub)
    live = np.nonzero(norms2 > 1e-20)[0]
    target = max(target, 1e-13)
    corrections = {}
    simplex_corr = np.zeros_like(x)
    for _ in range(max_sweeps):
        for j in live:
            p = corrections.get(j)
            y = x if p is None else x + p
            v = float(sub[j] @ y)
            if v > 0.0:
                x = y - (v / norms2[j]) * sub[j]
                corrections[j] = y - x
            elif p is not None:
                x = y
                corrections[j] = y - x
        y = x + simplex_corr
        x = project_simplex(y)
        simplex_corr = y - x
        if float((sub @ x).max(initial=0.0)) <= target:
            break
    out = np.zeros(mu.size)
    out[support] = np.maximum(x, 0.0)
    total = out.sum()
    if total > 0:
        out /= total
    return out


def _inner_maximize(f, grad_f, rows, mu, lam, rho, step, budget):
    """Monotone accelerated projected ascent on the augmented Lagrangian."""
    value = _al_value(f, rows, mu, lam, rho)
    prev = mu
    momentum = 0.0
    for k in range(budget):
        probe = mu + momentum * (mu - prev)
        g = rows @ probe if rows.shape[0] else np.zeros(0)
        mult = np.maximum(0.0, lam + rho * g)
        direction = grad_f(probe) - (rows.T @ mult if rows.shape[0] else 0.0)
        accepted = None
        for _ in range(60):
            cand = project_simplex(probe + step * direction)
            cand_value = _al_value(f, rows, cand, lam, rho)
            if cand_value >= value - 1e-14:
                accepted = (cand, cand_value)
                break
            step *= 0.5
            if step < 1e-18:
                break
        if accepted is None:
            if momentum == 0.0:
                break
            momentum = 0.0  # restart acceleration from the current iterate
            prev = mu
            continue
        cand, cand_value = accepted
        moved = np.max(np.abs(cand - mu)) >= 1e-15
        if not moved and momentum == 0.0:
            mu = cand
            break
        prev = mu
        mu = cand
        value = cand_value
        momentum = k / (k + 3.0)
        if k % 8 == 7 and moved:
            step = min(step * 2.0, 1e3)
    return mu, step


def _clip_support(mu, threshold=1e-9):
    """Zero out numerically-dead cells so recommendation marginals are clean."""
    clipped = np.where(mu < threshold, 0.0, mu)
    total = clipped.sum()
    if total <= 0.0:
        return mu
    return clipped / total


def _dead_recommendation_cells(tensor, raw_rows, family):
    """Cells whose recommendation can carry no mass in any equilibrium.

    Conditional CE gains are only well defined where the recommendation has
    positive probability, and a recommendation that is infeasible at any
    positive mass (e.g. a strictly dominated strategy) is only reached
    asymptotically by penalty methods. A small LP per recommendation finds the
    maximum attainable slice mass; structurally-dead slices are excluded
    up front.
    """
    shape = tensor.shape[:-1]
    n = tensor.shape[-1]
    cells = int(np.prod(shape))
    if family != "ce":
        return np.zeros(cells, dtype=bool)
    dead = np.zeros(cells, dtype=bool)
    ones = np.ones((1, cells))
    for i in range(n):
        for r in range(shape[i]):
            idx = [slice(None)] * n
            idx[i] = r
            slice_mask = np.zeros(shape)
            slice_mask[tuple(idx)] = 1.0
            slice_mask = slice_mask.reshape(-1)
            res = linprog(
                -slice_mask,
                A_ub=raw_rows,
                b_ub=np.zeros(raw_rows.shape[0]),
                A_eq=ones,
                b_eq=np.ones(1),
                bounds=(0.0, 1.0),
                method="highs",
            )
            if res.status == 0 and -res.fun < 1e-9:
                dead |= slice_mask > 0.0
    return dead


def solve_concave_over_polytope(tensor, prog=None):
    """Maximize the selected concave objective over the (C)CE polytope."""
    prog = prog or ConstrainedProgram()
    tensor = np.asarray(tensor, dtype=np.float64)
    if np.any(np.isnan(tensor)):
        raise ValueError("payoff tensor has missing entries")
    cells = int(np.prod(tensor.shape[:-1]))
    raw_rows, _ = deviation_matrix(tensor, prog.family)
    dead = _dead_recommendation_cells(tensor, raw_rows, prog.family)
    alive = ~dead
    sub_rows = raw_rows[:, alive]
    norms = np.linalg.norm(sub_rows, axis=1)
    keep = norms > 1e-12
    rows = sub_rows[keep] / norms[keep, None] if keep.any() else np.zeros((0, int(alive.sum())))
    # feasibility targets in the unit-row scale
    scaled_tol = prog.tolerance / float(norms[keep].max()) if rows.shape[0] else np.inf
    f, grad_f, lips_f = _make_objective(prog, tensor, alive)

    dim = int(alive.sum())
    mu = np.full(dim, 1.0 / dim)
    lam = np.zeros(rows.shape[0])
    rho = prog.rho0
    smax2 = float(np.linalg.svd(rows, compute_uv=False)[0] ** 2) if rows.shape[0] else 0.0
    viol_prev = np.inf
    f_prev = -np.inf
    stale = 0
    for _ in range(prog.outer_rounds):
        step = prog.step_shrink / (lips_f + rho * smax2 + 1.0)
        mu, _ = _inner_maximize(f, grad_f, rows, mu, lam, rho, step, prog.inner_iters)
        g = rows @ mu if rows.shape[0] else np.zeros(0)
        viol = float(np.max(g, initial=0.0))
        lam = np.maximum(0.0, lam + rho * g)
        if viol > 0.3 * viol_prev and rho < 1e8:
            rho *= prog.rho_growth
        viol_prev = viol
        f_now = f(mu)
        stale = stale + 1 if abs(f_now - f_prev) <= 1e-10 * (1.0 + abs(f_now)) else 0
        f_prev = f_now
        # stop only once both feasibility and the objective have settled
        if viol <= 0.02 * scaled_tol and stale >= 2:
            break

    device = np.zeros(cells)
    if rows.shape[0]:
        device, audit = _finalize(tensor, prog, mu, rows, alive, scaled_tol)
    else:
        device[alive] = mu
        audit = 0.0
    if audit > prog.tolerance:
        raise SolverInfeasible(
            f"constrained solver left max deviation gain {audit:.3e} "
            f"above tolerance {prog.tolerance:.1e}",
            infeasibility=audit,
        )
    sol = MetaSolution(kind="joint", device=device, objective=f(device[alive]))
    sol.flags["family"] = prog.family
    sol.flags["objective_id"] = prog.objective
    sol.flags["max_deviation_gain"] = audit
    return sol


def _finalize(tensor, prog, mu, rows, alive, scaled_tol):
    """Polish to strict feasibility: clipped-support Dykstra first, then the
    full space, then with dust slices (tiny marginals that fail the
    conditional audit) removed."""
    shape = tensor.shape[:-1]
    n = tensor.shape[-1]
    cells = int(np.prod(shape))
    target = 0.01 * scaled_tol
    best_device = None
    best_audit = np.inf
    current = _clip_support(mu)
    for attempt in range(4):
        for support in ((current > 0.0), None):
            polished = _dykstra_polish(
                current, rows, target=target, support=support,
                max_sweeps=3000 * (attempt + 1),
            )
            polished = _clip_support(polished)
            device = np.zeros(cells)
            device[alive] = polished
            audit = max_deviation_gain(tensor, device, prog.family)
            if audit < best_audit:
                best_device, best_audit = device, audit
            if audit <= prog.tolerance:
                return device, audit
        if prog.family != "ce":
            continue
        # kill recommendation slices whose marginal is dust yet still audited
        killed = _kill_dust_slices(tensor, best_device, prog)
        if killed is None:
            continue
        current = killed[alive]
        total = current.sum()
        if total <= 0.0:
            break
        current = current / total
    return best_device, best_audit


def _kill_dust_slices(tensor, device, prog, marginal_cap=1e-4):
    from ..empirical import ce_deviation_gains

    shape = tensor.shape[:-1]
    n = tensor.shape[-1]
    mu_shaped = device.reshape(shape)
    gains, _ = ce_deviation_gains(tensor, device)
    doomed = np.zeros(shape, dtype=bool)
    found = False
    for i in range(n):
        axes = tuple(j for j in range(n) if j != i)
        marginal = mu_shaped.sum(axis=axes)
        for r in range(shape[i]):
            if 0.0 < marginal[r] < marginal_cap and gains[i][r].max() > prog.tolerance:
                idx = [slice(None)] * n
                idx[i] = r
                doomed[tuple(idx)] = True
                found = True
    if not found:
        return None
    out = np.where(doomed.reshape(-1), 0.0, device)
    return out


def _al_value(f, rows, mu, lam, rho):
    if rows.shape[0] == 0:
        return f(mu)
    g = rows @ mu
    mult = np.maximum(0.0, lam + rho * g)
    return f(mu) - float((mult ** 2 - lam ** 2).sum()) / (2.0 * rho)
