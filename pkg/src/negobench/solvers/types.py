"""Shared solver output type."""

from dataclasses import dataclass, field

import numpy as np


@dataclass
class MetaSolution:
    """Either independent per-player mixtures or a joint correlation device."""

    kind: str  # "independent" | "joint"
    mixtures: list = None
    device: np.ndarray = None  # flat, over pure joint strategies
    objective: float = None
    flags: dict = field(default_factory=dict)

    def device_shaped(self, shape):
        return np.asarray(self.device).reshape(shape)

    def joint_as_device(self, shape):
        """Flat joint distribution; independent profiles become product devices."""
        if self.kind == "joint":
            return np.asarray(self.device, dtype=np.float64)
        out = np.ones(1)
        for s in self.mixtures:
            out = np.outer(out, np.asarray(s)).reshape(-1)
        return out

    def marginals(self, shape):
        """Per-player marginal mixtures."""
        if self.kind == "independent":
            return [np.asarray(s, dtype=np.float64) for s in self.mixtures]
        mu = self.device_shaped(shape)
        out = []
        for i in range(len(shape)):
            axes = tuple(j for j in range(len(shape)) if j != i)
            out.append(mu.sum(axis=axes))
        return out
