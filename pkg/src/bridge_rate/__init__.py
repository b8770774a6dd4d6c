"""Numerical laboratory for conditioned lattice walks and the Brownian bridge.

Exact pmf machinery, local-limit error functionals, exact bridge samplers,
de-conditioning identities, and bounded-Lipschitz / Wasserstein-1 distances
between empirical path measures, with experiment drivers that extract decay
rates.
"""

__version__ = "0.1.0"

from .errors import (KappaNotFound, QuadratureFailure, SizeCap, SolverFailure,
                     TooLarge, UnknownLaw, ValidationError)
from .lattice_law import (LatticeLaw, LatticeSupport, char_fn, char_values,
                          from_atoms, kappa, load_law, make_poisson_minus_one,
                          make_rademacher, require_standardized, support_set)
from .walk_pmf import WalkPmf, exact_pmf, gaussian_density, pmf_at_zero_closed
from .local_limit import (DEFAULT_QUAD, QuadratureSpec, bridge_weight,
                          local_limit_error, rho, tau, tau_sup,
                          walk_bridge_weight)
from .path_sim import (ConditionedWalkSampler, PathSample, RngStream,
                       restrict, sample_brownian_bridge,
                       sample_conditioned_path, sample_empirical_process,
                       sample_walk_path)
from .rn_weighting import (TestFunctional, bridge_weighted_expectation,
                           conditioned_expectation_enum, deconditioning_residual,
                           deconditioning_sides, functional_battery,
                           weighted_expectation)
from .fm_distance import (DistanceEstimate, EmpiricalMeasure, fm_bootstrap,
                          fm_empirical, path_supnorm, w1_empirical)
from .rate_lab import (RateTableRow, convergence_table, gc_baseline,
                       gc_equivalence_check, gc_exact_tv, inequality_enum,
                       inequality_spotchecks, loglog_slope)
