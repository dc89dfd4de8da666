"""Meta-strategy solvers over empirical-game payoff tensors."""

from .constrained import (
    ConstrainedProgram,
    SolverInfeasible,
    deviation_matrix,
    solve_concave_over_polytope,
)
from .dynamics import (
    SolverConfig,
    mss_max_welfare,
    mss_prd,
    mss_regret_matching,
    mss_uniform,
)
from .nbs import (
    MarginError,
    NbsConfig,
    default_disagreements,
    flatten_payoffs,
    nbs_bound,
    nbs_emda,
    nbs_independent,
    nbs_pga,
)
from .projections import project_simplex, project_truncated_simplex
from .types import MetaSolution


def solve(name, tensor, **kwargs):
    """Run a meta-strategy solver by name."""
    fn = SOLVERS.get(name)
    if fn is None:
        raise ValueError(f"unknown solver {name!r}; known: {sorted(SOLVERS)}")
    return fn(tensor, **kwargs)


def _concave(objective, family):
    def run(tensor, prog=None, **kwargs):
        prog = prog or ConstrainedProgram(objective=objective, family=family, **kwargs)
        return solve_concave_over_polytope(tensor, prog)

    return run


SOLVERS = {
    "uniform": lambda tensor, cfg=None: mss_uniform(tensor, cfg),
    "prd": lambda tensor, cfg=None: mss_prd(tensor, cfg),
    "rm": lambda tensor, cfg=None: mss_regret_matching(tensor, cfg),
    "nbs": lambda tensor, cfg=None: nbs_pga(tensor, cfg),
    "nbs-emda": lambda tensor, cfg=None: nbs_emda(tensor, cfg),
    "nbs-independent": lambda tensor, cfg=None: nbs_independent(tensor, cfg),
    "max-welfare": lambda tensor, cfg=None: mss_max_welfare(tensor, cfg),
    "max-nbs-cce": _concave("log-nash-product", "cce"),
    "max-nbs-ce": _concave("log-nash-product", "ce"),
    "max-gini-cce": _concave("gini", "cce"),
    "max-gini-ce": _concave("gini", "ce"),
    "max-welfare-cce": _concave("welfare", "cce"),
    "max-welfare-ce": _concave("welfare", "ce"),
    "max-entropy-cce": _concave("entropy", "cce"),
    "max-entropy-ce": _concave("entropy", "ce"),
}
