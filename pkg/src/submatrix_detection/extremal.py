"""Optimal weights and least-favorable coefficients for the weighted chi^2 test.

The max-min weight program reduces, after the change of variables
v_k = theta_k^2 / (sqrt(2) sigma_k^2), to minimising sum v_k^2 over the
(transformed) Sobolev ellipsoid.  Its solution has the shape

    v_k = v * sigma_k^2 * (1 - (|k|/T)^{2 tau})_+

with the ellipsoid and energy constraints both active.  ``solve_extremal_exact``
finds (T, v) on the integer lattice; ``solve_extremal_asymptotic`` evaluates
the small-radius closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .model import SigmaSchedule

SQRT2 = math.sqrt(2.0)

# Largest materialised half band; beyond it the weight arrays stop fitting in memory.
MAX_BAND = 10_000_000


class RadiusExceedsClass(ValueError):
    pass


class SolverDidNotConverge(RuntimeError):
    pass


class BandTooLarge(ValueError):
    pass


def kappas(tau: float, s: float) -> tuple[float, float, float]:
    a, b, c = 4 * s + 1, 4 * s + 2 * tau + 1, 4 * s + 4 * tau + 1
    k1 = 4 * SQRT2 * tau / (a * b)
    k2 = 4 * SQRT2 * tau * (2 * math.pi) ** (2 * tau) / (b * c)
    k3 = 1 / a - 2 / b + 1 / c
    return k1, k2, k3


def c_const(tau: float, s: float) -> float:
    """c(tau, s) in V_eps ~ c * r^{2 + (4s+1)/(2 tau)}."""
    k1, k2, k3 = kappas(tau, s)
    return math.sqrt(2 * (k1 / k2) ** (-(4 * s + 1) / (2 * tau)) * k3 / k1 ** 2)


@dataclass
class WeightSolution:
    """Weights w*_k and coefficients (theta*_k)^2 for k = 0..len-1.

    Negative frequencies follow by symmetry.  ``T`` is the band edge: entries
    with |k| >= T vanish.
    """

    tau: float
    s: float
    epsilon: float
    r: float
    w: np.ndarray
    theta2: np.ndarray
    T: float
    v: float
    V_eps: float
    a: float
    kappa1: float
    kappa2: float
    kappa3: float
    method: str

    @property
    def band(self) -> int:
        """Smallest half band holding every nonzero coefficient."""
        nz = np.flatnonzero(self.theta2 > 0)
        return max(1, int(nz[-1]) if nz.size else 0)

    @property
    def max_w(self) -> float:
        return float(self.w.max())

    def _full(self, half: np.ndarray, band: int) -> np.ndarray:
        if band < self.band:
            raise ValueError(f"band {band} cuts off nonzero coefficients (need {self.band})")
        padded = np.zeros(band + 1)
        n = min(band + 1, half.size)
        padded[:n] = half[:n]
        return np.concatenate([padded[:0:-1], padded])

    def w_full(self, band: int) -> np.ndarray:
        """Weights on k = -band..band."""
        return self._full(self.w, band)

    def theta2_full(self, band: int) -> np.ndarray:
        return self._full(self.theta2, band)

    def sigma_half(self) -> np.ndarray:
        return SigmaSchedule(self.s).at(np.arange(self.w.size))

    def u_half(self) -> np.ndarray:
        """Standardised amplitudes u_k = theta*_k / (epsilon sigma_k)."""
        return np.sqrt(self.theta2) / (self.epsilon * self.sigma_half())

    # Whole-lattice sums, counting k and -k.
    def sum_w2(self) -> float:
        return _sym_sum(self.w ** 2)

    def energy(self) -> float:
        return _sym_sum(self.theta2)

    def ellipsoid(self) -> float:
        k = np.arange(self.theta2.size, dtype=float)
        return (2 * np.pi) ** (2 * self.tau) * _sym_sum(k ** (2 * self.tau) * self.theta2)

    def bias(self) -> float:
        """sum_k w_k (theta_k / (epsilon sigma_k))^2, the mean shift of t under theta*."""
        return _sym_sum(self.w * self.u_half() ** 2)

    def to_text(self) -> str:
        f = lambda x: repr(float(x))  # noqa: E731
        head = (f"# tau={f(self.tau)} s={f(self.s)} epsilon={f(self.epsilon)} r={f(self.r)} "
                f"T={f(self.T)} v={f(self.v)} V_eps={f(self.V_eps)} a={f(self.a)} method={self.method}\n"
                "# k w_k theta2_k\n")
        top = min(math.ceil(self.T), self.w.size - 1)
        rows = "".join(f"{k} {f(self.w[k])} {f(self.theta2[k])}\n" for k in range(top + 1))
        return head + rows

    @classmethod
    def from_text(cls, text: str) -> "WeightSolution":
        lines = text.splitlines()
        meta = dict(item.split("=", 1) for item in lines[0].lstrip("# ").split())
        table = np.array([[float(x) for x in ln.split()] for ln in lines[2:] if ln.strip()])
        tau, s = float(meta["tau"]), float(meta["s"])
        k1, k2, k3 = kappas(tau, s)
        return cls(tau=tau, s=s, epsilon=float(meta["epsilon"]), r=float(meta["r"]),
                   w=table[:, 1].copy(), theta2=table[:, 2].copy(), T=float(meta["T"]),
                   v=float(meta["v"]), V_eps=float(meta["V_eps"]), a=float(meta["a"]),
                   kappa1=k1, kappa2=k2, kappa3=k3, method=meta["method"])


def _sym_sum(half: np.ndarray) -> float:
    return float(half[0] + 2.0 * np.sum(half[1:]))


# ---------------------------------------------------------------------------
# Lattice power sums  P_alpha(K) = sum_{k=1}^K k^alpha


_HEAD = 4096
_BERNOULLI = ((2, 1 / 6), (4, -1 / 30), (6, 1 / 42), (8, -1 / 30))


@lru_cache(maxsize=64)
def _head_cumsum(alpha: float) -> np.ndarray:
    k = np.arange(1, _HEAD + 1, dtype=float)
    return np.concatenate([[0.0], np.cumsum(k ** alpha)])


def _falling(alpha: float, j: int) -> float:
    out = 1.0
    for i in range(j):
        out *= alpha - i
    return out


def power_sum(alpha: float, K: int) -> float:
    """sum_{k=1}^K k**alpha, exact summation up to 4096 then Euler-Maclaurin.

    The Euler-Maclaurin tail starts at k=4097 and keeps terms through B_8, so
    the truncation error sits far below double precision for alpha < 40.
    """
    if K <= 0:
        return 0.0
    head = _head_cumsum(alpha)
    if K <= _HEAD:
        return float(head[K])
    a = float(_HEAD + 1)
    b = float(K)
    total = (b ** (alpha + 1) - a ** (alpha + 1)) / (alpha + 1)
    total += 0.5 * (a ** alpha + b ** alpha)
    for order, bern in _BERNOULLI:
        d = _falling(alpha, order - 1)
        if d == 0.0:
            break
        total += bern / math.factorial(order) * d * (b ** (alpha - order + 1) - a ** (alpha - order + 1))
    return float(head[_HEAD]) + total


def _lattice_sums(T: float, tau: float, s: float):
    """(K, S_energy, S_ellipsoid) for band edge T.

    S_energy = sum_k sigma_k^4 g_k, S_ellipsoid = sum_k |k|^{2tau} sigma_k^4 g_k with
    g_k = (1 - (|k|/T)^{2tau})_+, summing over all integers k.
    """
    K = max(0, math.ceil(T) - 1)
    t = T ** (-2 * tau)
    p0 = power_sum(4 * s, K)
    p1 = power_sum(4 * s + 2 * tau, K)
    p2 = power_sum(4 * s + 4 * tau, K)
    return K, 1.0 + 2.0 * (p0 - t * p1), 2.0 * (p1 - t * p2)


def _constraint_ratio(T: float, tau: float, r: float, s: float) -> float:
    """r^2 (2pi)^{2tau} S_ellipsoid / S_energy; equals 1 at the optimum."""
    _, s_en, s_el = _lattice_sums(T, tau, s)
    return r * r * (2 * math.pi) ** (2 * tau) * s_el / s_en


def _refine_on_cell(T: float, tau: float, s: float, r: float) -> float:
    """Solve the ratio equation exactly with the active set {|k| <= K} held fixed.

    On (K, K+1] both sums are affine in t = T^{-2tau}, so the equation is linear in t.
    """
    K = max(1, math.ceil(T) - 1)
    c = r * r * (2 * math.pi) ** (2 * tau)
    p0 = power_sum(4 * s, K)
    p1 = power_sum(4 * s + 2 * tau, K)
    p2 = power_sum(4 * s + 4 * tau, K)
    den = 2 * c * p2 - 2 * p1
    if den == 0.0:
        return T
    t = (2 * c * p1 - 1.0 - 2 * p0) / den
    if not t > 0:
        return T
    T_cell = t ** (-1.0 / (2 * tau))
    return T_cell if K < T_cell <= K + 1 else T


def _check_inputs(tau, s, epsilon, r):
    for name, val in (("tau", tau), ("epsilon", epsilon), ("r", r)):
        if not (val > 0 and math.isfinite(val)):
            raise ValueError(f"{name} must be positive and finite, got {val}")
    if not s >= 0:
        raise ValueError(f"s must be >= 0, got {s}")


def asymptotic_T(tau: float, s: float, r: float) -> float:
    k1, k2, _ = kappas(tau, s)
    return (k1 / k2) ** (1 / (2 * tau)) * r ** (-1 / tau)


def solve_extremal_exact(tau: float, s: float, epsilon: float, r: float,
                         sigma: SigmaSchedule | None = None, max_steps: int = 200) -> WeightSolution:
    """Lattice solution of the max-min weight program with both constraints active."""
    _check_inputs(tau, s, epsilon, r)
    if sigma is not None and sigma.s != s:
        raise ValueError(f"sigma schedule degree {sigma.s} does not match s={s}")

    lo = 1.0
    hi = max(2.0, 10.0 * asymptotic_T(tau, s, r))
    while _constraint_ratio(hi, tau, r, s) < 1.0:
        hi *= 2.0
        if hi > 4 * MAX_BAND:
            raise BandTooLarge(f"band edge exceeds {MAX_BAND} for r={r}, tau={tau}")
    for _ in range(max_steps):
        if hi - lo <= 1e-12 * hi:
            break
        mid = 0.5 * (lo + hi)
        if _constraint_ratio(mid, tau, r, s) < 1.0:
            lo = mid
        else:
            hi = mid
    else:
        raise SolverDidNotConverge(f"bisection on T stalled at [{lo}, {hi}] after {max_steps} steps")
    T = _refine_on_cell(hi, tau, s, r)

    if T <= 1.0:
        # Only k = 0 survives; the ellipsoid constraint is slack there.
        v_half = np.array([r * r / SQRT2])
        T = 1.0
    else:
        K = math.ceil(T) - 1
        if K > MAX_BAND:
            raise BandTooLarge(f"band edge {T:.3g} exceeds {MAX_BAND}")
        k = np.arange(K + 2, dtype=float)
        sig2 = SigmaSchedule(s).at(k) ** 2
        g = np.clip(1.0 - (k / T) ** (2 * tau), 0.0, None)
        shape = sig2 * g
        v = r * r / (SQRT2 * _sym_sum(sig2 * shape))
        v_half = v * shape
    sig2 = SigmaSchedule(s).at(np.arange(v_half.size)) ** 2
    v = float(v_half[0])  # sigma_0 = 1 and g_0 = 1
    V = math.sqrt(_sym_sum(v_half ** 2))
    k1, k2, k3 = kappas(tau, s)
    return WeightSolution(
        tau=tau, s=s, epsilon=epsilon, r=r,
        w=v_half / (SQRT2 * V),
        theta2=SQRT2 * sig2 * v_half,
        T=T, v=v, V_eps=V, a=V / epsilon ** 2,
        kappa1=k1, kappa2=k2, kappa3=k3, method="exact",
    )


def solve_extremal_asymptotic(tau: float, s: float, epsilon: float, r: float) -> WeightSolution:
    """Closed-form small-radius solution (leading order in r)."""
    _check_inputs(tau, s, epsilon, r)
    k1, k2, k3 = kappas(tau, s)
    T = asymptotic_T(tau, s, r)
    v = (1 / k1) * (k2 / k1) ** ((4 * s + 1) / (2 * tau)) * r ** (2 + (4 * s + 1) / tau)
    V = c_const(tau, s) * r ** (2 + (4 * s + 1) / (2 * tau))
    K = math.ceil(T)
    if K > MAX_BAND:
        raise BandTooLarge(f"band edge {T:.3g} exceeds {MAX_BAND}")
    k = np.arange(K + 1, dtype=float)
    sig2 = SigmaSchedule(s).at(k) ** 2
    theta2 = v * sig2 ** 2 * SQRT2 * np.clip(1.0 - (k / T) ** (2 * tau), 0.0, None)
    return WeightSolution(
        tau=tau, s=s, epsilon=epsilon, r=r,
        w=theta2 / (2 * sig2 * V), theta2=theta2,
        T=T, v=v, V_eps=V, a=V / epsilon ** 2,
        kappa1=k1, kappa2=k2, kappa3=k3, method="asymptotic",
    )


def a_of_r(tau: float, s: float, epsilon: float, r: float) -> float:
    return solve_extremal_exact(tau, s, epsilon, r).a


def r_of_a(tau: float, s: float, epsilon: float, a_target: float, rtol: float = 1e-10,
           r_max: float = 1e6) -> float:
    """Radius whose exact detection value equals ``a_target``.

    Bisection in log r; a_of_r is strictly increasing so the root is unique.
    """
    if not (a_target > 0 and math.isfinite(a_target)):
        raise ValueError(f"a_target must be positive and finite, got {a_target}")
    # a ~ r^2/(sqrt2 eps^2) for large r and ~ c eps^-2 r^{2+(4s+1)/(2tau)} for small r
    guess = (a_target * epsilon ** 2 / c_const(tau, s)) ** (1 / (2 + (4 * s + 1) / (2 * tau)))
    lo, hi = guess / 2, guess * 2
    while a_of_r(tau, s, epsilon, lo) > a_target:
        lo /= 4
    while a_of_r(tau, s, epsilon, hi) < a_target:
        hi *= 4
        if hi > r_max:
            raise RadiusExceedsClass(f"a={a_target} needs a radius beyond r_max={r_max}")
    for _ in range(200):
        if hi - lo <= rtol * hi:
            break
        mid = math.sqrt(lo * hi)
        if a_of_r(tau, s, epsilon, mid) < a_target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
