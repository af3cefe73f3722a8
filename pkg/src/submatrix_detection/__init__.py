"""Minimax detection of a sparse active submatrix in heterogeneous Gaussian sequence data."""

from .config import ProblemConfig, TestConfig
from .extremal import (WeightSolution, a_of_r, r_of_a, solve_extremal_asymptotic,
                       solve_extremal_exact)
from .model import (ObservationTensor, SigmaSchedule, SignalBank, SupportMask,
                    generate_observations, sample_support, sigma_at, validate_signal_class,
                    worst_case_signal)
from .stats import (TestReport, chi2_statistic, run_chi2_test, run_combined_test, run_scan_test,
                    scan_statistic_exhaustive, scan_statistic_heuristic, t_matrix, t_stat,
                    threshold_H, threshold_K)
from .boundary import BoundaryReport, boundary_radii, check_lower_conditions, check_upper_conditions
from .probe import (MixtureSpec, bayes_risk_mc, empirical_mgf, hypergeom_binomial_dominance,
                    mixture_log_likelihood)
from .risk import RiskEstimate

__version__ = "0.1.0"
