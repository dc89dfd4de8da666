"""Game-theoretic RL workbench: PSRO with search-based best responses,
generative belief models, bargaining meta-strategy solvers, and a live
negotiation play service."""

__version__ = "0.1.0"

from ._kernels import BACKEND as KERNEL_BACKEND
