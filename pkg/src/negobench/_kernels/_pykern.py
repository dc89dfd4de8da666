"""Pure-numpy implementations of the iteration-heavy numeric kernels.

Mirrors the compiled backend in ``_cykern.pyx``; see ``negobench._kernels``
for how the backend is selected at import time.
"""

import numpy as np


def project_simplex(y, total=1.0):
    """L2 projection of y onto the simplex {x >= 0, sum x = total}."""
    # inputs beyond ~1e12 lose the precision the pivot search needs
    y = np.clip(np.asarray(y, dtype=np.float64), -1e12, 1e12)
    n = y.size
    u = np.sort(y)[::-1]
    css = np.cumsum(u) - total
    ks = np.arange(1, n + 1)
    cond = u - css / ks > 0.0
    rho = np.nonzero(cond)[0][-1]
    tau = css[rho] / (rho + 1.0)
    return np.maximum(y - tau, 0.0)


def project_simplex_floor(y, floor, total=1.0):
    """L2 projection onto {x >= floor elementwise, sum x = total}."""
    y = np.asarray(y, dtype=np.float64)
    residual = total - floor * y.size
    return floor + project_simplex(y - floor, residual)


def log_nash_product(payoffs, disagreements, x):
    margins = payoffs @ x - disagreements
    if np.any(margins <= 0.0):
        return -np.inf
    return float(np.sum(np.log(margins)))


def log_nash_gradient(payoffs, disagreements, x):
    margins = payoffs @ x - disagreements
    return payoffs.T @ (1.0 / margins)


def nbs_ascent(payoffs, disagreements, x0, num_steps, step0, exponentiated, record_trace):
    """Gradient ascent on the log Nash product over the simplex.

    payoffs: (n_players, n_cells) flattened utility vectors.
    Step size at iteration t is step0 / sqrt(t + 1).
    Returns (best_x, best_g, trace, bad_step, bad_player); the last two are -1
    unless some iterate violated a player's margin, in which case the run
    stops there. trace[t] = g(x^t); empty array when record_trace is false.
    """
    payoffs = np.ascontiguousarray(payoffs, dtype=np.float64)
    d = np.asarray(disagreements, dtype=np.float64)
    x = np.array(x0, dtype=np.float64)
    margins = payoffs @ x - d
    if np.any(margins <= 0.0):
        return x, -np.inf, np.empty(0), 0, int(np.argmin(margins))
    g = float(np.log(margins).sum())
    best_x = x.copy()
    best_g = g
    trace = np.empty(num_steps + 1) if record_trace else np.empty(0)
    if record_trace:
        trace[0] = g
    for t in range(num_steps):
        grad = payoffs.T @ (1.0 / margins)
        alpha = step0 / np.sqrt(t + 1.0)
        if exponentiated:
            z = np.log(np.maximum(x, 1e-300)) + alpha * grad
            z -= z.max()
            x = np.exp(z)
            x /= x.sum()
        else:
            x = project_simplex(x + alpha * grad)
        margins = payoffs @ x - d
        if np.any(margins <= 0.0):
            return best_x, best_g, trace[: t + 1], t + 1, int(np.argmin(margins))
        g = float(np.log(margins).sum())
        if record_trace:
            trace[t + 1] = g
        if g > best_g:
            best_g = g
            best_x = x.copy()
    return best_x, best_g, trace, -1, -1


def prd_2p(u1, u2, x1, x2, step, iters, floor1, floor2):
    """Projected replicator dynamics for a 2-player bimatrix game.

    u1, u2: (m1, m2) payoff matrices. Returns the final iterates.
    """
    u1 = np.ascontiguousarray(u1, dtype=np.float64)
    u2 = np.ascontiguousarray(u2, dtype=np.float64)
    x1 = np.array(x1, dtype=np.float64)
    x2 = np.array(x2, dtype=np.float64)
    for _ in range(iters):
        f1 = u1 @ x2
        f2 = u2.T @ x1
        a1 = x1 @ f1
        a2 = x2 @ f2
        y1 = x1 + step * x1 * (f1 - a1)
        y2 = x2 + step * x2 * (f2 - a2)
        x1 = project_simplex_floor(y1, floor1)
        x2 = project_simplex_floor(y2, floor2)
    return x1, x2


def rm_2p(u1, u2, iters, gamma):
    """Exploratory regret matching on a bimatrix game; returns average strategies."""
    u1 = np.ascontiguousarray(u1, dtype=np.float64)
    u2 = np.ascontiguousarray(u2, dtype=np.float64)
    m1, m2 = u1.shape
    cum1 = np.zeros(m1)
    cum2 = np.zeros(m2)
    avg1 = np.zeros(m1)
    avg2 = np.zeros(m2)
    unif1 = np.full(m1, 1.0 / m1)
    unif2 = np.full(m2, 1.0 / m2)
    for _ in range(iters):
        pos1 = np.maximum(cum1, 0.0)
        s1 = pos1.sum()
        sigma1 = pos1 / s1 if s1 > 0.0 else unif1
        pos2 = np.maximum(cum2, 0.0)
        s2 = pos2.sum()
        sigma2 = pos2 / s2 if s2 > 0.0 else unif2
        if gamma > 0.0:
            sigma1 = gamma * unif1 + (1.0 - gamma) * sigma1
            sigma2 = gamma * unif2 + (1.0 - gamma) * sigma2
        f1 = u1 @ sigma2
        f2 = u2.T @ sigma1
        cum1 += f1 - sigma1 @ f1
        cum2 += f2 - sigma2 @ f2
        avg1 += sigma1
        avg2 += sigma2
    return avg1 / iters, avg2 / iters
