"""Normal-form layer over oracle catalogs: payoff tensors, expected values,
(coarse) correlated-equilibrium deviation gains, and entry estimation.

The payoff tensor U has shape (|Pi_1|, ..., |Pi_n|, n): one utility per player
per pure joint strategy. A MixedProfile is a list of per-player probability
vectors; a JointDevice is a (normalized) array over the joint cells.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np

from .games.base import CHANCE, exact_expected_returns

PROB_TOL = 1e-9


def check_profile(sigma, shape):
    if len(sigma) != len(shape):
        raise ValueError(f"profile has {len(sigma)} players, tensor has {len(shape)}")
    for i, (s, m) in enumerate(zip(sigma, shape)):
        s = np.asarray(s, dtype=np.float64)
        if s.size != m:
            raise ValueError(f"player {i} mixture has size {s.size}, catalog has {m}")
        if np.any(s < -PROB_TOL) or abs(s.sum() - 1.0) > PROB_TOL:
            raise ValueError(f"player {i} mixture is not a probability vector: {s}")


def check_device(mu, shape):
    mu = np.asarray(mu, dtype=np.float64)
    cells = int(np.prod(shape))
    if mu.size != cells:
        raise ValueError(f"device has {mu.size} cells, tensor has {cells}")
    if np.any(mu < -PROB_TOL) or abs(mu.sum() - 1.0) > PROB_TOL:
        raise ValueError("device is not a probability vector")
    return mu.reshape(shape)


def expected_value(tensor, dist):
    """Per-player expected utilities under a mixed profile or joint device.

    A list/tuple of per-player vectors is treated as an independent profile;
    an array is treated as a joint device over the cells.
    """
    tensor = np.asarray(tensor, dtype=np.float64)
    shape = tensor.shape[:-1]
    n = tensor.shape[-1]
    if isinstance(dist, (list, tuple)):
        check_profile(dist, shape)
        out = tensor
        for s in dist:
            out = np.tensordot(np.asarray(s, dtype=np.float64), out, axes=(0, 0))
        return out
    mu = check_device(dist, shape)
    axes = list(range(n))
    return np.tensordot(mu, tensor, axes=(axes, axes))


def _player_tensor(tensor, i):
    return np.asarray(tensor, dtype=np.float64)[..., i]


def _deviation_value(ui, mu, i, action):
    """u_i when player i deviates to ``action`` and the others follow mu."""
    opp_marginal = mu.sum(axis=i)
    ui_fixed = np.take(ui, action, axis=i)
    return float((ui_fixed * opp_marginal).sum())


def cce_deviation_gains(tensor, mu):
    """gain[i][a] = u_i(a, mu_{-i}) - u_i(mu): deviating before the recommendation."""
    tensor = np.asarray(tensor, dtype=np.float64)
    shape = tensor.shape[:-1]
    mu = check_device(mu, shape)
    strategy_axes = list(range(len(shape)))
    base = np.tensordot(mu, tensor, axes=(strategy_axes, strategy_axes))
    gains = []
    for i in range(tensor.shape[-1]):
        ui = _player_tensor(tensor, i)
        g = np.array([_deviation_value(ui, mu, i, a) - base[i] for a in range(shape[i])])
        gains.append(g)
    return gains


def ce_deviation_gains(tensor, mu, zero_tol=1e-9):
    """gain[i][r, a]: deviating to a after being recommended r.

    Gains are conditional on the recommendation; recommendations whose
    marginal probability is below ``zero_tol`` (i.e. numerically never
    recommended) get gain 0 and are reported in the returned mask.
    """
    tensor = np.asarray(tensor, dtype=np.float64)
    shape = tensor.shape[:-1]
    n = tensor.shape[-1]
    mu = check_device(mu, shape)
    gains = []
    zero_masks = []
    for i in range(n):
        ui = _player_tensor(tensor, i)
        axes = tuple(j for j in range(n) if j != i)
        marginal = mu.sum(axis=axes)
        g = np.zeros((shape[i], shape[i]))
        zero = np.zeros(shape[i], dtype=bool)
        for r in range(shape[i]):
            if marginal[r] <= zero_tol:
                zero[r] = True
                continue
            slice_mu = np.take(mu, r, axis=i) / marginal[r]
            base = float((np.take(ui, r, axis=i) * slice_mu).sum())
            for a in range(shape[i]):
                dev = float((np.take(ui, a, axis=i) * slice_mu).sum())
                g[r, a] = dev - base
        gains.append(g)
        zero_masks.append(zero)
    return gains, zero_masks


def max_deviation_gain(tensor, mu, family="cce"):
    if family == "cce":
        return max(float(g.max()) for g in cce_deviation_gains(tensor, mu))
    if family == "ce":
        gains, _ = ce_deviation_gains(tensor, mu)
        return max(float(g.max()) for g in gains)
    raise ValueError(f"unknown equilibrium family {family!r}")


def pure_response_values(tensor, sigma, i):
    """u_i(a, sigma_{-i}) for every pure strategy a of player i."""
    tensor = np.asarray(tensor, dtype=np.float64)
    ui = np.moveaxis(_player_tensor(tensor, i), i, 0)
    rest = [np.asarray(sigma[j], dtype=np.float64) for j in range(tensor.shape[-1]) if j != i]
    for s in reversed(rest):
        ui = ui @ s
    return ui


def nfg_nashconv(tensor, sigma):
    """Sum over players of the best-response gain against sigma_{-i}."""
    tensor = np.asarray(tensor, dtype=np.float64)
    shape = tensor.shape[:-1]
    check_profile(sigma, shape)
    base = expected_value(tensor, sigma)
    total = 0.0
    for i in range(tensor.shape[-1]):
        total += float(pure_response_values(tensor, sigma, i).max() - base[i])
    return total


@dataclass
class EmpiricalGame:
    """Oracle catalogs plus the estimated payoff tensor and sample counts."""

    game: object
    catalogs: list = field(default_factory=list)  # per player: list of policies
    tensor: np.ndarray = None
    counts: np.ndarray = None

    @property
    def shape(self):
        return tuple(len(c) for c in self.catalogs)

    def grow(self):
        """Extend the tensor with NaN slots for newly added catalog entries."""
        n = len(self.catalogs)
        new_shape = self.shape + (n,)
        fresh = np.full(new_shape, np.nan)
        fresh_counts = np.zeros(new_shape[:-1], dtype=np.int64)
        if self.tensor is not None:
            old = tuple(slice(0, s) for s in self.tensor.shape[:-1])
            fresh[old] = self.tensor
            fresh_counts[old] = self.counts
        self.tensor = fresh
        self.counts = fresh_counts

    def missing_entries(self):
        return [tuple(idx) for idx in np.argwhere(np.isnan(self.tensor[..., 0]))]

    def fill_entry(self, joint, values, count):
        self.tensor[tuple(joint)] = values
        self.counts[tuple(joint)] = count


def simulate_entry(game, policies, num_sims, rng):
    """Mean per-player returns of a pure joint strategy over num_sims episodes."""
    total = np.zeros(game.num_players)
    for _ in range(num_sims):
        state = game.new_initial_state()
        while not state.is_terminal:
            player = state.current_player
            if player == CHANCE:
                outcomes = state.chance_outcomes()
                probs = np.array([p for _, p in outcomes])
                action = outcomes[int(rng.choice(len(outcomes), p=probs))][0]
            else:
                action = policies[player].sample(state, rng)
            state = state.apply(action)
        total += state.returns()
    return total / num_sims


def estimate_entry(empirical, joint, num_sims, rng, exact=False):
    """Fill one tensor entry by simulation (or exact tree enumeration)."""
    policies = [empirical.catalogs[i][j] for i, j in enumerate(joint)]
    if exact:
        values = exact_expected_returns(empirical.game, policies)
        count = 1
    else:
        values = simulate_entry(empirical.game, policies, num_sims, rng)
        count = num_sims
    empirical.fill_entry(joint, values, count)
    return values


def fill_missing_entries(empirical, num_sims, rng, exact=False):
    """Estimate every missing tensor entry, in deterministic entry order."""
    for joint in sorted(empirical.missing_entries()):
        estimate_entry(empirical, joint, num_sims, rng, exact=exact)


def tensor_to_text(tensor):
    """Tensor wire format: a shape header then one row-major line per player."""
    tensor = np.asarray(tensor, dtype=np.float64)
    shape = tensor.shape[:-1]
    n = tensor.shape[-1]
    lines = [f"players {n}", "shape " + " ".join(str(s) for s in shape)]
    for i in range(n):
        flat = tensor[..., i].reshape(-1)
        lines.append(" ".join(repr(float(v)) for v in flat))
    return "\n".join(lines) + "\n"


def tensor_from_text(text):
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if len(lines) < 2 or not lines[0].startswith("players") or not lines[1].startswith("shape"):
        raise ValueError("tensor file needs 'players N' and 'shape ...' header lines")
    n = int(lines[0].split()[1])
    shape = tuple(int(x) for x in lines[1].split()[1:])
    if len(lines) != 2 + n:
        raise ValueError(f"expected {n} payoff lines, found {len(lines) - 2}")
    cells = int(np.prod(shape))
    tensor = np.zeros(shape + (n,))
    for i in range(n):
        vals = np.array([float(x) for x in lines[2 + i].split()])
        if vals.size != cells:
            raise ValueError(f"player {i} payoff line has {vals.size} values, expected {cells}")
        tensor[..., i] = vals.reshape(shape)
    if not np.all(np.isfinite(tensor)):
        raise ValueError("payoff tensor must be finite")
    return tensor
