"""Classic meta-strategy solvers: uniform, projected replicator dynamics,
exploratory regret matching, and the max-welfare point mass."""

from dataclasses import dataclass

import numpy as np

from .._kernels import prd_2p, rm_2p
from ..empirical import pure_response_values
from .projections import project_truncated_simplex
from .types import MetaSolution


@dataclass
class SolverConfig:
    gamma: float = 0.005        # exploration floor; per-strategy bound is gamma/|Pi_i|
    prd_step: float = 1e-3
    prd_iters: int = 100_000
    rm_iters: int = 10_000
    seed: int = None

    def __post_init__(self):
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must lie in [0, 1)")


def _check_complete(tensor):
    tensor = np.asarray(tensor, dtype=np.float64)
    if np.any(np.isnan(tensor)):
        raise ValueError("payoff tensor has missing entries")
    return tensor


def mss_uniform(tensor, cfg=None):
    tensor = _check_complete(tensor)
    shape = tensor.shape[:-1]
    return MetaSolution(kind="independent", mixtures=[np.full(m, 1.0 / m) for m in shape])


def mss_prd(tensor, cfg=None):
    """Discrete-step replicator dynamics projected to the exploratory simplex."""
    cfg = cfg or SolverConfig()
    tensor = _check_complete(tensor)
    shape = tensor.shape[:-1]
    n = tensor.shape[-1]
    if n == 2:
        floor1 = cfg.gamma / shape[0]
        floor2 = cfg.gamma / shape[1]
        x1, x2 = prd_2p(
            tensor[..., 0], tensor[..., 1],
            np.full(shape[0], 1.0 / shape[0]), np.full(shape[1], 1.0 / shape[1]),
            cfg.prd_step, cfg.prd_iters, floor1, floor2,
        )
        return MetaSolution(kind="independent", mixtures=[x1, x2])
    sigma = [np.full(m, 1.0 / m) for m in shape]
    floors = [cfg.gamma / m for m in shape]
    for _ in range(cfg.prd_iters):
        fitness = [pure_response_values(tensor, sigma, i) for i in range(n)]
        nxt = []
        for i in range(n):
            avg = float(sigma[i] @ fitness[i])
            y = sigma[i] + cfg.prd_step * sigma[i] * (fitness[i] - avg)
            nxt.append(project_truncated_simplex(y, floors[i]))
        sigma = nxt
    return MetaSolution(kind="independent", mixtures=sigma)


def mss_regret_matching(tensor, cfg=None):
    """Cumulative-regret matching with exploration; returns the average strategy."""
    cfg = cfg or SolverConfig()
    tensor = _check_complete(tensor)
    shape = tensor.shape[:-1]
    n = tensor.shape[-1]
    if n == 2:
        a1, a2 = rm_2p(tensor[..., 0], tensor[..., 1], cfg.rm_iters, cfg.gamma)
        return MetaSolution(kind="independent", mixtures=[a1, a2])
    cum = [np.zeros(m) for m in shape]
    avg = [np.zeros(m) for m in shape]
    for _ in range(cfg.rm_iters):
        sigma = []
        for i in range(n):
            pos = np.maximum(cum[i], 0.0)
            total = pos.sum()
            s = pos / total if total > 0 else np.full(shape[i], 1.0 / shape[i])
            if cfg.gamma > 0:
                s = cfg.gamma / shape[i] + (1.0 - cfg.gamma) * s
            sigma.append(s)
        for i in range(n):
            f = pure_response_values(tensor, sigma, i)
            cum[i] += f - float(sigma[i] @ f)
            avg[i] += sigma[i]
    return MetaSolution(kind="independent", mixtures=[a / cfg.rm_iters for a in avg])


def mss_max_welfare(tensor, cfg=None):
    """Point mass on the welfare-maximizing cell; lowest joint index on ties."""
    tensor = _check_complete(tensor)
    shape = tensor.shape[:-1]
    welfare = tensor.sum(axis=-1).reshape(-1)
    idx = int(np.argmax(welfare))
    device = np.zeros(welfare.size)
    device[idx] = 1.0
    return MetaSolution(kind="joint", device=device, objective=float(welfare[idx]))
