"""Lower-bound probes: the mixture likelihood ratio and the auxiliary tail and MGF checks.

The prior puts a uniform m x n support on the grid and, on each active cell,
independent signs on the least-favorable coefficients +/- theta*_k.  Its
likelihood ratio against the null is averaged over all supports, so the exact
Bayes test is only computable on tiny grids.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.special import logsumexp

from .config import ProblemConfig
from .extremal import WeightSolution, solve_extremal_exact
from .model import generate_observations, sample_support, worst_case_signal
from .risk import RiskEstimate
from .rng import stream
from .stats import BudgetExceeded


class MGFDiverges(ValueError):
    pass


def log_cosh(x: np.ndarray) -> np.ndarray:
    ax = np.abs(x)
    return ax + np.log1p(np.exp(-2.0 * ax)) - math.log(2.0)


def _subset_indicators(size: int, k: int) -> np.ndarray:
    combos = list(itertools.combinations(range(size), k))
    ind = np.zeros((len(combos), size))
    for row, c in enumerate(combos):
        ind[row, list(c)] = 1.0
    return ind


@dataclass
class MixtureSpec:
    """Standardised amplitudes u_k (k >= 0) and the support enumeration."""

    u: np.ndarray
    M: int
    N: int
    m: int
    n: int
    budget: int = 10**5
    a: float | None = None
    row_sets: np.ndarray = field(init=False, repr=False)
    col_sets: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=float)
        count = math.comb(self.M, self.m) * math.comb(self.N, self.n)
        if count > self.budget:
            raise BudgetExceeded(f"{count} supports exceed the mixture budget {self.budget}")
        if self.a is not None:
            s4 = self.u[0] ** 4 + 2 * np.sum(self.u[1:] ** 4)
            if not math.isclose(s4, 2 * self.a ** 2, rel_tol=1e-10, abs_tol=1e-300):
                raise ValueError(f"sum u^4 = {s4} but 2 a^2 = {2 * self.a ** 2}")
        self.row_sets = _subset_indicators(self.M, self.m)
        self.col_sets = _subset_indicators(self.N, self.n)

    @classmethod
    def from_weights(cls, weights: WeightSolution, M: int, N: int, m: int, n: int,
                     budget: int = 10**5) -> "MixtureSpec":
        return cls(weights.u_half(), M, N, m, n, budget, a=weights.a)

    @property
    def n_supports(self) -> int:
        return self.row_sets.shape[0] * self.col_sets.shape[0]

    def u_full(self, band: int) -> np.ndarray:
        half = np.zeros(band + 1)
        top = min(band + 1, self.u.size)
        if np.any(self.u[top:] != 0):
            raise ValueError(f"band {band} cuts off nonzero amplitudes")
        half[:top] = self.u[:top]
        return np.concatenate([half[:0:-1], half])


def cell_log_factors(tensor, spec: MixtureSpec) -> np.ndarray:
    """M x N matrix of sum_k [log cosh(u_k z_{ij,k}) - u_k^2 / 2]."""
    u = spec.u_full(tensor.band)
    z = tensor.standardized()
    return log_cosh(z * u).sum(axis=2) - 0.5 * float(np.sum(u * u))


def support_log_ratios(factors: np.ndarray, spec: MixtureSpec) -> np.ndarray:
    """log dP_xi/dP_0 for every support, shape (C(M,m), C(N,n))."""
    return spec.row_sets @ factors @ spec.col_sets.T


def mixture_log_likelihood(tensor, spec: MixtureSpec) -> float:
    """log of the prior-averaged likelihood ratio L."""
    vals = support_log_ratios(cell_log_factors(tensor, spec), spec)
    return float(logsumexp(vals) - math.log(vals.size))


def bayes_risk_mc(config: ProblemConfig, trials: int, seed: int | None = None,
                  weights: WeightSolution | None = None, budget: int = 10**5,
                  scenario: str = "") -> RiskEstimate:
    """Risk of the likelihood-ratio test 1{log L > 0} under the null and the prior.

    Trial t of the null uses stream (seed, 0, t) and of the prior (seed, 1, t).
    """
    seed = config.seed if seed is None else seed
    if weights is None:
        weights = solve_extremal_exact(config.tau, config.s, config.epsilon, config.r)
    cfg = config.with_(band=max(config.band, weights.band))
    spec = MixtureSpec.from_weights(weights, cfg.M, cfg.N, cfg.m, cfg.n, budget)
    false_alarms = misses = 0
    for t in range(trials):
        rng = stream(seed, 0, t)
        false_alarms += mixture_log_likelihood(generate_observations(cfg, rng), spec) > 0
        rng = stream(seed, 1, t)
        support = sample_support(cfg, rng)
        bank = worst_case_signal(weights, cfg, support, "rademacher", rng)
        misses += not mixture_log_likelihood(generate_observations(cfg, rng, bank), spec) > 0
    return RiskEstimate.from_counts(false_alarms, misses, trials, scenario)


def null_likelihood_mean(config: ProblemConfig, trials: int, seed: int | None = None,
                         weights: WeightSolution | None = None) -> tuple[float, float]:
    """(mean, standard error) of L over null draws; L is a likelihood ratio so E_0 L = 1."""
    seed = config.seed if seed is None else seed
    if weights is None:
        weights = solve_extremal_exact(config.tau, config.s, config.epsilon, config.r)
    cfg = config.with_(band=max(config.band, weights.band))
    spec = MixtureSpec.from_weights(weights, cfg.M, cfg.N, cfg.m, cfg.n)
    vals = np.array([math.exp(mixture_log_likelihood(generate_observations(cfg, stream(seed, 2, t)), spec))
                     for t in range(trials)])
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(trials))


# ---------------------------------------------------------------------------
# moment generating function of t under the null


@dataclass
class MGFResult:
    lam: float
    empirical: float
    stderr: float
    exact: float
    max_w: float

    @property
    def log_gap(self) -> float:
        """|log(exact) - lambda^2 / 2|."""
        return abs(math.log(self.exact) - 0.5 * self.lam ** 2)


def exact_mgf(weights: WeightSolution, lam: float) -> float:
    """E_0 exp(lam t) = prod_k exp(-lam w_k - log(1 - 2 lam w_k) / 2)."""
    w = weights.w[weights.w > 0]
    if np.any(2 * lam * w >= 1):
        raise MGFDiverges(f"lambda * max w = {lam * w.max():.3g} >= 1/2")
    mult = np.where(np.arange(weights.w.size)[weights.w > 0] == 0, 1.0, 2.0)
    return math.exp(float(np.sum(mult * (-lam * w - 0.5 * np.log1p(-2 * lam * w)))))


def empirical_mgf(weights: WeightSolution, lam: float, draws: int,
                  rng: np.random.Generator, chunk: int = 20000) -> MGFResult:
    """Monte Carlo mean of exp(lam t) under the null, next to the exact product.

    The pair (k, -k) shares a weight, so eta_k^2 + eta_{-k}^2 is drawn as one
    chi^2_2 = 2 Exp(1) variable.
    """
    exact = exact_mgf(weights, lam)
    w = weights.w
    w_pos = w[1:][w[1:] > 0]
    total = total_sq = 0.0
    done = 0
    while done < draws:
        size = min(chunk, draws - done)
        t = w[0] * (rng.standard_normal(size) ** 2 - 1.0)
        if w_pos.size:
            t += (2.0 * rng.standard_exponential((size, w_pos.size)) - 2.0) @ w_pos
        e = np.exp(lam * t)
        total += float(e.sum())
        total_sq += float((e * e).sum())
        done += size
    mean = total / draws
    var = max(total_sq / draws - mean * mean, 0.0) * draws / max(draws - 1, 1)
    return MGFResult(lam, mean, math.sqrt(var / draws), exact, float(w.max()))


# ---------------------------------------------------------------------------
# hypergeometric vs binomial tails


@dataclass
class DominanceReport:
    N: int
    n: int
    q_tilde: Fraction
    hg_tail: list  # P(X >= k), k = 0..n, exact
    bin_tail: list
    ratio_lhs: Fraction  # C(N-n, n) / C(N, n)
    ratio_rhs: Fraction  # (1 - q_tilde)^n

    @property
    def tail_margins(self) -> list:
        return [b - h for h, b in zip(self.hg_tail, self.bin_tail)]

    @property
    def worst_margin(self) -> Fraction:
        return min(self.tail_margins)

    @property
    def dominates(self) -> bool:
        return self.worst_margin >= 0

    @property
    def ratio_holds(self) -> bool:
        return self.ratio_lhs >= self.ratio_rhs

    def rows(self):
        for k, (h, b) in enumerate(zip(self.hg_tail, self.bin_tail)):
            yield k, h, b


def hypergeom_binomial_dominance(N: int, n: int) -> DominanceReport:
    """Exact tails of HG(N, n, n) and Bin(n, 2n/(N-n)) in rational arithmetic."""
    if not (1 <= n and 3 * n <= N):
        raise ValueError(f"need 1 <= n and N >= 3n so that 2n/(N-n) <= 1, got N={N}, n={n}")
    q = Fraction(2 * n, N - n)
    total = math.comb(N, n)
    hg_pmf = [Fraction(math.comb(n, j) * math.comb(N - n, n - j), total) for j in range(n + 1)]
    bin_pmf = [math.comb(n, j) * q ** j * (1 - q) ** (n - j) for j in range(n + 1)]
    hg_tail = [sum(hg_pmf[k:], Fraction(0)) for k in range(n + 1)]
    bin_tail = [sum(bin_pmf[k:], Fraction(0)) for k in range(n + 1)]
    return DominanceReport(N, n, q, hg_tail, bin_tail,
                           Fraction(math.comb(N - n, n), total), (1 - q) ** n)
