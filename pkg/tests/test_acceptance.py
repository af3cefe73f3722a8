"""Acceptance gate: one check per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py`` (lines appear in the terminal
summary) or directly with ``python tests/test_acceptance.py``.
"""

import math
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

from submatrix_detection.boundary import boundary_radii, log_budget
from submatrix_detection.config import ProblemConfig, TestConfig
from submatrix_detection.extremal import (a_of_r, asymptotic_T, r_of_a, solve_extremal_asymptotic,
                                          solve_extremal_exact)
from submatrix_detection.harness import ExperimentSpec, run_experiment
from submatrix_detection.model import generate_observations, sample_support, worst_case_signal
from submatrix_detection.probe import bayes_risk_mc, empirical_mgf, hypergeom_binomial_dominance, null_likelihood_mean
from submatrix_detection.rng import stream
from submatrix_detection.stats import (chi2_from_t, run_all_tests, run_chi2_test, scan_statistic_exhaustive,
                                       scan_statistic_heuristic, t_matrix)

_LINES: list[str] = []


@pytest.fixture(autouse=True)
def _collect(acceptance_log):
    yield
    acceptance_log.extend(_LINES)
    _LINES.clear()


def verdict(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(line)
    _LINES.append(line)
    assert ok, line


def sym(half):
    return float(half[0] + 2 * np.sum(half[1:]))


def test_criterion_01_weight_identities():
    combos = [(tau, s, r) for tau in (0.5, 1.0, 2.0) for s in (0.0, 0.5, 1.0)
              for r in (1e-1, 1e-2, 1e-3, 1e-4) if asymptotic_T(tau, s, r) < 1e7]
    started = time.perf_counter()
    worst = dict(w2=0.0, a2=0.0, energy=0.0, ellipsoid=0.0)
    for tau, s, r in combos:
        sol = solve_extremal_exact(tau, s, 0.01, r)
        u = sol.u_half()
        worst["w2"] = max(worst["w2"], abs(sol.sum_w2() - 0.5))
        worst["a2"] = max(worst["a2"], abs(0.5 * sym(u ** 4) / sol.a ** 2 - 1))
        worst["energy"] = max(worst["energy"], abs(sol.energy() / r ** 2 - 1))
        worst["ellipsoid"] = max(worst["ellipsoid"], abs(sol.ellipsoid() - 1))
    elapsed = time.perf_counter() - started
    ok = (len(combos) >= 20 and worst["w2"] <= 1e-12 and worst["a2"] <= 1e-10
          and worst["energy"] <= 1e-8 and worst["ellipsoid"] <= 1e-8 and elapsed < 1.0)
    verdict(1, ok, f"{len(combos)} combos, worst |sum w^2-1/2|={worst['w2']:.1e}, a^2 rel={worst['a2']:.1e}, "
                   f"energy rel={worst['energy']:.1e}, ellipsoid rel={worst['ellipsoid']:.1e}, {elapsed:.2f}s")


def test_criterion_02_exact_vs_asymptotic():
    started = time.perf_counter()
    gaps = [abs(solve_extremal_exact(1, 0, 1.0, r).a / solve_extremal_asymptotic(1, 0, 1.0, r).a - 1)
            for r in (1e-1, 1e-2, 1e-3, 1e-4)]
    elapsed = time.perf_counter() - started
    ok = gaps[2] <= 0.02 and all(x > y for x, y in zip(gaps, gaps[1:])) and elapsed < 1.0
    verdict(2, ok, "relative gaps " + ", ".join(f"{g:.2e}" for g in gaps) + f", {elapsed:.2f}s")


def test_criterion_03_one_dimensional_rate():
    started = time.perf_counter()
    eps = np.array([1e-2, 1e-3, 1e-4])
    parts, ok = [], True
    for tau, s in ((1.0, 0.0), (1.0, 1.0), (2.0, 0.0)):
        target = 4 * tau / (4 * tau + 4 * s + 1)
        slope = np.polyfit(np.log(eps), np.log([r_of_a(tau, s, e, 1.0) for e in eps]), 1)[0]
        ok &= abs(slope / target - 1) <= 0.02
        parts.append(f"({tau:g},{s:g}) {slope:.4f} vs {target:.4f}")
    elapsed = time.perf_counter() - started
    ok &= elapsed < 1.0
    verdict(3, ok, "; ".join(parts) + f", {elapsed:.2f}s")


def test_criterion_04_null_calibration():
    eps, r = 0.05, 0.02
    sol = solve_extremal_exact(1.0, 0.0, eps, r)
    config = ProblemConfig(M=64, N=64, m=8, n=8, epsilon=eps, s=0.0, tau=1.0, r=r, band=sol.band, seed=2024)
    started = time.perf_counter()
    exceed, pooled = 0, []
    for t in range(1000):
        tm = t_matrix(generate_observations(config, stream(config.seed, t)), sol)
        exceed += chi2_from_t(tm) > 1.645
        if t < 25:
            pooled.append(tm.ravel())
    elapsed = time.perf_counter() - started
    cells = np.concatenate(pooled)
    rate, mean, var = exceed / 1000, float(cells.mean()), float(cells.var())
    ok = 0.03 <= rate <= 0.07 and abs(mean) <= 0.01 and abs(var - 1) <= 0.02 and elapsed < 30
    verdict(4, ok, f"P0(t>1.645)={rate:.3f}, cell mean={mean:+.4f}, var={var:.4f} over {cells.size} cells, "
                   f"{elapsed:.1f}s")


def _error_rates(config, sol, trials, tests, seed):
    fa = miss = 0
    for t in range(trials):
        rng = stream(seed, 0, t)
        fa += tests(generate_observations(config, rng), rng)
        rng = stream(seed, 1, t)
        bank = worst_case_signal(sol, config, sample_support(config, rng), "plus")
        miss += not tests(generate_observations(config, rng, bank), rng)
    return fa / trials, miss / trials


def test_criterion_05_upper_bound_power():
    started = time.perf_counter()
    eps, tc = 0.05, TestConfig()
    # sparse scenario: scan ratio a^2 mn / (2 (m log 1/p + n log 1/q)) = 2
    M = N = 30
    m = n = 5
    a_sparse = math.sqrt(2 * 2 * log_budget(M, N, m, n) / (m * n))
    r = r_of_a(1.0, 0.0, eps, a_sparse)
    sol = solve_extremal_exact(1.0, 0.0, eps, r)
    config = ProblemConfig(M=M, N=N, m=m, n=n, epsilon=eps, s=0.0, tau=1.0, r=r, band=sol.band, seed=5)
    t1s, t2s = _error_rates(config, sol, 200,
                            lambda x, rng: run_all_tests(x, sol, config, tc, rng)["combined"].reject, 5)
    # dense scenario: a^2 mnpq = 25
    m = n = 15
    a_dense = 5 / math.sqrt(m * n * (m / M) * (n / N))
    r = r_of_a(1.0, 0.0, eps, a_dense)
    sol = solve_extremal_exact(1.0, 0.0, eps, r)
    config = ProblemConfig(M=M, N=N, m=m, n=n, epsilon=eps, s=0.0, tau=1.0, r=r, band=sol.band, seed=6)
    t1d, t2d = _error_rates(config, sol, 200, lambda x, rng: run_chi2_test(x, sol, config, tc).reject, 6)
    elapsed = time.perf_counter() - started
    ok = t1s + t2s < 0.1 and t1d + t2d < 0.1 and elapsed < 300
    verdict(5, ok, f"sparse combined total={t1s + t2s:.3f} (I={t1s:.3f}, II={t2s:.3f}); "
                   f"dense chi2 total={t1d + t2d:.3f} (I={t1d:.3f}, II={t2d:.3f}); {elapsed:.0f}s")


def test_criterion_06_scan_oracle():
    started = time.perf_counter()
    rng = stream(606)
    equal, exceed = 0, 0
    for t in range(100):
        tm = rng.standard_normal((10, 10))
        ev, _ = scan_statistic_exhaustive(tm, 3, 3)
        hv, _ = scan_statistic_heuristic(tm, 3, 3, TestConfig(restarts=50), stream(606, t))
        equal += math.isclose(hv, ev, rel_tol=1e-12, abs_tol=1e-12)
        exceed += hv > ev + 1e-12
    elapsed = time.perf_counter() - started
    verdict(6, equal >= 90 and exceed == 0 and elapsed < 60,
            f"heuristic = exhaustive in {equal}/100, exceeds in {exceed}, {elapsed:.1f}s")


def test_criterion_07_mgf():
    lam = 0.5
    sol = solve_extremal_exact(2.0, 0.0, 1.0, 3e-6)
    started = time.perf_counter()
    res = empirical_mgf(sol, lam, 10**6, stream(707))
    elapsed = time.perf_counter() - started
    z = abs(res.empirical - res.exact) / res.stderr
    bound = 3 * lam ** 3 * res.max_w
    ok = res.max_w <= 0.05 and z <= 3 and res.log_gap <= bound and elapsed < 30
    verdict(7, ok, f"max w={res.max_w:.4f}, exact={res.exact:.6f}, empirical={res.empirical:.6f} "
                   f"({z:.2f} se), |log exact - lam^2/2|={res.log_gap:.2e} <= {bound:.2e}, {elapsed:.1f}s")


def test_criterion_08_dominance():
    started = time.perf_counter()
    tail_bad = ratio_bad = cases = 0
    for N in range(20, 61):
        for n in range(2, 6):
            rep = hypergeom_binomial_dominance(N, n)
            tail_bad += sum(mg < 0 for mg in rep.tail_margins)
            ratio_bad += not rep.ratio_holds
            cases += len(rep.tail_margins)
    elapsed = time.perf_counter() - started
    verdict(8, tail_bad == 0 and ratio_bad == 0 and elapsed < 5,
            f"{cases} (N,n,k) cases, tail violations={tail_bad}, ratio violations={ratio_bad}, {elapsed:.2f}s")


def test_criterion_09_lower_bound_probe():
    started = time.perf_counter()
    eps = 0.05
    rb = boundary_radii(1.0, 0.0, eps, 6, 6, 2, 2).r_boundary
    base = ProblemConfig(M=6, N=6, m=2, n=2, epsilon=eps, s=0.0, tau=1.0, r=rb, band=1, seed=909)
    totals = []
    for i, mult in enumerate((0.3, 1.0, 3.0)):
        risk = bayes_risk_mc(base.with_(r=mult * rb), 500, seed=909 + i)
        totals.append(risk.total)
    mean, se = null_likelihood_mean(base.with_(r=0.3 * rb), 2000, seed=990)
    elapsed = time.perf_counter() - started
    ok = (totals[0] >= 0.6 and totals[0] >= totals[1] >= totals[2] and abs(mean - 1) <= 3 * se
          and elapsed < 120)
    verdict(9, ok, "total error " + ", ".join(f"{t:.3f}" for t in totals)
            + f" at (0.3, 1, 3) r_b; E0[L]={mean:.4f} +/- {se:.4f}; {elapsed:.1f}s")


def test_criterion_10_determinism():
    config = ProblemConfig(M=20, N=20, m=4, n=4, epsilon=0.05, s=0.5, tau=1.0, r=0.1, band=1, seed=1010)
    tiny = config.with_(M=5, N=5, m=2, n=2)
    jobs = [("power", config, dict(trials=20, r_grid=(0.5, 1.0, 2.0))),
            ("simulate", config, dict(trials=10)),
            ("probe", tiny, dict(trials=20, r_grid=(0.3, 1.0))),
            ("mgf", config, dict(draws=20000))]
    mismatched = []
    with tempfile.TemporaryDirectory() as tmp:
        for kind, problem, extra in jobs:
            blobs = []
            for run, threads in enumerate((1, 1, 4)):
                out = Path(tmp) / f"{kind}{run}.csv"
                run_experiment(ExperimentSpec(kind, problem, TestConfig(restarts=10), out=str(out),
                                              threads=threads, **extra))
                blobs.append([p.read_bytes() for p in sorted(Path(tmp).glob(f"{kind}{run}.csv*"))])
            if not blobs[0] == blobs[1] == blobs[2]:
                mismatched.append(kind)
    verdict(10, not mismatched, f"{len(jobs)} experiment kinds, byte-identical across reruns and 1/4 threads"
            if not mismatched else f"outputs differ for {mismatched}")


if __name__ == "__main__":
    import sys

    failures = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failures += 1
    sys.exit(1 if failures else 0)
