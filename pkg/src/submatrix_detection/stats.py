"""Weighted chi^2 statistics, the linear and scan tests, and their thresholds."""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .config import TestConfig
from .extremal import WeightSolution
from .model import ObservationTensor, ShapeMismatch, SigmaSchedule, SupportMask


class BudgetExceeded(ValueError):
    pass


@dataclass
class TestReport:
    test: str
    statistic: float
    threshold: float
    reject: bool
    support: SupportMask | None = None
    millis: float = 0.0

    __test__ = False

    @property
    def decision(self) -> str:
        return "reject" if self.reject else "accept"

    CSV_HEADER = "test,statistic,threshold,decision,support_rows,support_cols,millis"

    def csv_row(self) -> str:
        rows = " ".join(map(str, self.support.rows)) if self.support else ""
        cols = " ".join(map(str, self.support.cols)) if self.support else ""
        return (f"{self.test},{self.statistic!r},{self.threshold!r},{self.decision},"
                f"{rows},{cols},{self.millis:.3f}")


# ---------------------------------------------------------------------------
# per-cell statistics


def t_stat(series: np.ndarray, weights: WeightSolution, epsilon: float,
           sigma: SigmaSchedule) -> float:
    """t_w = sum_k w_k ((x_k / (eps sigma_k))^2 - 1) for one cell.

    ``series`` runs over k = -band..band.
    """
    series = np.asarray(series, dtype=float)
    band = (series.size - 1) // 2
    if series.size != 2 * band + 1:
        raise ShapeMismatch("series length must be odd (k = -band..band)")
    if band < weights.band:
        raise ShapeMismatch(f"series band {band} < weight band {weights.band}")
    z = series / (epsilon * sigma.over_band(band))
    return float((z * z - 1.0) @ weights.w_full(band))


def t_matrix(tensor: ObservationTensor, weights: WeightSolution) -> np.ndarray:
    """All M x N per-cell statistics in one pass."""
    band = tensor.band
    if band < weights.band:
        raise ShapeMismatch(f"tensor band {band} < weight band {weights.band}")
    w = weights.w_full(band)
    keep = w > 0
    z = tensor.x[:, :, keep] / (tensor.epsilon * tensor.sigma.over_band(band)[keep])
    return (z * z - 1.0) @ w[keep]


def chi2_from_t(t: np.ndarray) -> float:
    return float(t.sum() / math.sqrt(t.size))


def chi2_statistic(tensor: ObservationTensor, weights: WeightSolution) -> float:
    return chi2_from_t(t_matrix(tensor, weights))


# ---------------------------------------------------------------------------
# thresholds


def threshold_H(a: float, m: int, n: int, p: float, q: float,
                test_config: TestConfig = TestConfig()) -> float:
    """Level for the linear test: a normal-quantile floor or c * a * sqrt(mnpq)."""
    floor = float(norm.ppf(1.0 - test_config.alpha_floor))
    return max(floor, test_config.c_chi * a * math.sqrt(m * n * p * q))


def threshold_K(m: int, n: int, p: float, q: float, delta: float = 0.05) -> float:
    if not (0 < p < 1 and 0 < q < 1):
        raise ValueError(f"scan threshold needs 0 < p, q < 1, got p={p}, q={q}")
    return math.sqrt(2 * (1 + delta) * (m * math.log(1 / p) + n * math.log(1 / q)))


# ---------------------------------------------------------------------------
# scan statistic


def _top(values: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k largest values, ties to the smaller index, sorted ascending."""
    return np.sort(np.argsort(-values, kind="stable")[:k])


def scan_statistic_exhaustive(t: np.ndarray, m: int, n: int,
                              budget: int = 10**6) -> tuple[float, SupportMask]:
    """Exact max over all m x n supports of sum(t[A x B]) / sqrt(mn).

    Row sets are enumerated in lexicographic order; for a fixed row set the
    best column set is the top-n column sums, so each support is covered
    implicitly.  Ties resolve to the lexicographically smallest (A, B).
    """
    M, N = t.shape
    if not (1 <= m <= M and 1 <= n <= N):
        raise ValueError(f"invalid support sizes for a {M}x{N} matrix: m={m}, n={n}")
    count = math.comb(M, m) * math.comb(N, n)
    if count > budget:
        raise BudgetExceeded(f"{count} supports exceed the exhaustive budget {budget}")

    best_val, best_rows, best_cols = -math.inf, None, None
    combos = itertools.combinations(range(M), m)
    while True:
        chunk = np.array(list(itertools.islice(combos, 32768)), dtype=np.intp)
        if chunk.size == 0:
            break
        colsums = t[chunk].sum(axis=1)  # (chunk, N)
        order = np.argsort(-colsums, axis=1, kind="stable")[:, :n]
        vals = np.take_along_axis(colsums, order, axis=1).sum(axis=1)
        i = int(np.argmax(vals))
        if vals[i] > best_val:
            best_val, best_rows, best_cols = float(vals[i]), chunk[i], np.sort(order[i])
    support = SupportMask(tuple(best_rows + 1), tuple(best_cols + 1))
    return best_val / math.sqrt(m * n), support


def scan_statistic_heuristic(t: np.ndarray, m: int, n: int,
                             test_config: TestConfig = TestConfig(),
                             rng: np.random.Generator | None = None) -> tuple[float, SupportMask]:
    """Alternating row/column maximisation with random restarts.

    Each restart starts from a uniform n-subset of columns, takes the top-m
    rows over it, then the top-n columns over those rows, until the support
    repeats or ``max_iters`` is hit.
    """
    M, N = t.shape
    if not (1 <= m <= M and 1 <= n <= N):
        raise ValueError(f"invalid support sizes for a {M}x{N} matrix: m={m}, n={n}")
    rng = np.random.default_rng(0) if rng is None else rng
    best_val, best = -math.inf, None
    for _ in range(test_config.restarts):
        cols = np.sort(rng.choice(N, size=n, replace=False))
        rows = None
        for _ in range(test_config.max_iters):
            new_rows = _top(t[:, cols].sum(axis=1), m)
            new_cols = _top(t[new_rows].sum(axis=0), n)
            done = rows is not None and np.array_equal(new_rows, rows) and np.array_equal(new_cols, cols)
            rows, cols = new_rows, new_cols
            if done:
                break
        val = float(t[np.ix_(rows, cols)].sum())
        if val > best_val:
            best_val, best = val, (rows, cols)
    support = SupportMask(tuple(best[0] + 1), tuple(best[1] + 1))
    return best_val / math.sqrt(m * n), support


def scan_statistic(t: np.ndarray, m: int, n: int, test_config: TestConfig = TestConfig(),
                   rng: np.random.Generator | None = None) -> tuple[float, SupportMask]:
    """Exhaustive when the support count fits the budget, heuristic otherwise."""
    M, N = t.shape
    if math.comb(M, m) * math.comb(N, n) <= test_config.exhaustive_budget:
        return scan_statistic_exhaustive(t, m, n, test_config.exhaustive_budget)
    return scan_statistic_heuristic(t, m, n, test_config, rng)


# ---------------------------------------------------------------------------
# tests


def _check_tensor(tensor: ObservationTensor, config) -> None:
    if tensor.x.shape[:2] != (config.M, config.N):
        raise ShapeMismatch(f"tensor grid {tensor.x.shape[:2]} != config {(config.M, config.N)}")


def _chi2_report(t, weights, config, test_config, started) -> TestReport:
    stat = chi2_from_t(t)
    H = threshold_H(weights.a, config.m, config.n, config.p, config.q, test_config)
    return TestReport("chi2", stat, H, stat > H, None, (time.perf_counter() - started) * 1e3)


def _scan_report(t, config, test_config, rng, started) -> TestReport:
    K = threshold_K(config.m, config.n, config.p, config.q, test_config.delta)
    stat, support = scan_statistic(t, config.m, config.n, test_config, rng)
    return TestReport("scan", stat, K, stat > K, support, (time.perf_counter() - started) * 1e3)


def _combined_report(chi, scan, started) -> TestReport:
    # Both thresholds are positive, so stat/threshold > 1 iff that test rejects.
    stat = max(chi.statistic / chi.threshold, scan.statistic / scan.threshold)
    return TestReport("combined", stat, 1.0, chi.reject or scan.reject, scan.support,
                      (time.perf_counter() - started) * 1e3)


def run_chi2_test(tensor, weights, config, test_config=TestConfig()) -> TestReport:
    started = time.perf_counter()
    _check_tensor(tensor, config)
    return _chi2_report(t_matrix(tensor, weights), weights, config, test_config, started)


def run_scan_test(tensor, weights, config, test_config=TestConfig(), rng=None) -> TestReport:
    started = time.perf_counter()
    _check_tensor(tensor, config)
    return _scan_report(t_matrix(tensor, weights), config, test_config, rng, started)


def run_combined_test(tensor, weights, config, test_config=TestConfig(), rng=None) -> TestReport:
    return run_all_tests(tensor, weights, config, test_config, rng)["combined"]


def run_all_tests(tensor, weights, config, test_config=TestConfig(), rng=None) -> dict:
    """chi2, scan and combined reports sharing one t-matrix."""
    started = time.perf_counter()
    _check_tensor(tensor, config)
    t = t_matrix(tensor, weights)
    chi = _chi2_report(t, weights, config, test_config, started)
    scan = _scan_report(t, config, test_config, rng, started)
    return {"chi2": chi, "scan": scan, "combined": _combined_report(chi, scan, started)}
