"""Detection boundaries and finite-scale surrogates for the rate conditions.

The limit conditions of the upper and lower bounds are replaced by explicit
numeric cut-offs (``UpperCutoffs`` / ``LowerCutoffs``).  Every flag keeps its
raw value so callers can apply stricter cut-offs themselves.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .extremal import WeightSolution, r_of_a, solve_extremal_exact
from .stats import threshold_K


@dataclass(frozen=True)
class Flag:
    value: float
    passed: bool

    def to_dict(self):
        return {"value": _finite_or_str(self.value), "pass": self.passed}


def _finite_or_str(x):
    return x if math.isfinite(x) else repr(x)


@dataclass(frozen=True)
class UpperCutoffs:
    chi_min: float = 25.0  # a^2 mnpq
    delta: float = 0.05  # scan ratio must reach 1 + delta
    side_max: float = 0.1  # K^2 max_w / sqrt(mn)


@dataclass(frozen=True)
class LowerCutoffs:
    lb1_max: float = 0.2
    lb2_window: tuple = (1 / 3, 3.0)
    cond_amn_max: float = 0.1
    lobo1_max: float = 0.04
    lobo2_max: float = 0.9


@dataclass
class BoundaryReport:
    r_chi: float
    r_scan: float | None  # None when the log terms vanish (p = q = 1)
    r_boundary: float
    regime: str
    a_chi: float
    a_scan: float
    flags: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "r_chi": self.r_chi,
            "r_scan": self.r_scan,
            "r_boundary": self.r_boundary,
            "regime": self.regime,
            "a_chi": self.a_chi,
            "a_scan": self.a_scan,
            "flags": {k: f.to_dict() for k, f in self.flags.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def log_budget(M: int, N: int, m: int, n: int) -> float:
    """m log(1/p) + n log(1/q)."""
    return m * math.log(M / m) + n * math.log(N / n)


def a_levels(M: int, N: int, m: int, n: int) -> tuple[float, float]:
    """(1/sqrt(mnpq), sqrt(2 (m log 1/p + n log 1/q) / (mn)))."""
    p, q = m / M, n / N
    return 1.0 / math.sqrt(m * n * p * q), math.sqrt(2 * log_budget(M, N, m, n) / (m * n))


def boundary_radii(tau: float, s: float, epsilon: float, M: int, N: int, m: int, n: int,
                   r: float | None = None, weights: WeightSolution | None = None,
                   upper: UpperCutoffs = UpperCutoffs(),
                   lower: LowerCutoffs = LowerCutoffs()) -> BoundaryReport:
    """Radii at which each test reaches its detection level.

    Condition flags are evaluated at ``r`` when given, else at the boundary.
    """
    a_chi, a_scan = a_levels(M, N, m, n)
    r_chi = r_of_a(tau, s, epsilon, a_chi)
    if a_scan > 0:
        r_scan = r_of_a(tau, s, epsilon, a_scan)
        regime = "sparse-dominated" if r_scan < r_chi else "dense-dominated"
        r_boundary = min(r_chi, r_scan)
    else:
        r_scan, regime, r_boundary = None, "dense-dominated", r_chi

    r_eval = r_boundary if r is None else r
    if weights is None or weights.r != r_eval:
        weights = solve_extremal_exact(tau, s, epsilon, r_eval)
    flags = {}
    flags.update(check_upper_conditions(weights.a, M, N, m, n, weights, upper))
    flags.update(check_lower_conditions(M, N, m, n, weights.a, epsilon, tau, s, lower))
    return BoundaryReport(r_chi, r_scan, r_boundary, regime, a_chi, a_scan, flags)


def check_upper_conditions(a: float, M: int, N: int, m: int, n: int, weights: WeightSolution,
                           cutoffs: UpperCutoffs = UpperCutoffs()) -> dict:
    p, q = m / M, n / N
    L = log_budget(M, N, m, n)
    chi = a * a * m * n * p * q
    scan = a * a * m * n / (2 * L) if L > 0 else math.inf
    if p < 1 and q < 1:
        K = threshold_K(m, n, p, q, cutoffs.delta)
        side = K * K * weights.max_w / math.sqrt(m * n)
    else:
        side = math.nan
    return {
        "cond_chi": Flag(chi, chi >= cutoffs.chi_min),
        "cond_scan": Flag(scan, scan >= 1 + cutoffs.delta and L > 0),
        "cond_scan_side": Flag(side, side <= cutoffs.side_max),
    }


def _safe_ratio(num: float, den: float) -> float:
    if den == 0:
        return math.inf if num != 0 else math.nan
    return num / den


def check_lower_conditions(M: int, N: int, m: int, n: int, a: float, epsilon: float,
                           tau: float, s: float, cutoffs: LowerCutoffs = LowerCutoffs()) -> dict:
    lp, lq = math.log(M / m), math.log(N / n)
    llp = math.log(lp) if lp > 0 else -math.inf
    llq = math.log(lq) if lq > 0 else -math.inf
    lb1 = max(_safe_ratio(llp, lq), _safe_ratio(llq, lp))
    lb2 = _safe_ratio(m * lp, n * lq)
    L = m * lp + n * lq
    amn = (L / (m * n)) / epsilon ** (-2 / (2 * tau + 2 * s + 1))
    lobo1 = a * a * m * n * (m / M) * (n / N)
    lobo2 = _safe_ratio(a * a * m * n, 2 * L)
    lo, hi = cutoffs.lb2_window
    return {
        "lb1": Flag(lb1, lb1 <= cutoffs.lb1_max),
        "lb2": Flag(lb2, lo <= lb2 <= hi),
        "cond_a_m_n": Flag(amn, amn <= cutoffs.cond_amn_max),
        "lobo1": Flag(lobo1, lobo1 <= cutoffs.lobo1_max),
        "lobo2": Flag(lobo2, lobo2 <= cutoffs.lobo2_max),
    }

