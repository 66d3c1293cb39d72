"""Stochastic Bass model on weighted directed networks.

Exact and Monte Carlo adoption curves, and checks against the universal
lower (two-node) and upper (compartmental Bass) bounds.
"""

__version__ = "0.1.0"

from .analytic import (  # noqa: E402
    BassParams,
    f_bass,
    f_one_d,
    f_two_node,
    half_life,
    half_life_ratio_asymptotic,
    trivial_bounds,
)
from .bounds import (  # noqa: E402
    conjecture_experiment,
    gap_metrics,
    strictness_margin,
    verify_bounds,
    verify_bounds_inhomogeneous,
)
from .exact import pair_sandwich_check, solve_complete, solve_master  # noqa: E402
from .montecarlo import estimate_ensemble, simulate_trajectory  # noqa: E402
from .network import NetworkSpec, check_homogeneity, generate, homogenize, in_weight, validate  # noqa: E402
