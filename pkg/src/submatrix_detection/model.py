"""Observation model: heterogeneous Gaussian sequences on an M x N grid.

Each cell (i, j) carries a sequence x_{ij,k}, k = -band..band, with

    x_{ij,k} = xi_{ij} theta_{ij,k} + epsilon * sigma_k * eta_{ij,k}

where xi is the indicator of an m x n submatrix and eta is standard normal.
Row and column indices are 1-based in every public structure.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from .config import ProblemConfig

if TYPE_CHECKING:
    from .extremal import WeightSolution


class ShapeMismatch(ValueError):
    pass


class BandTooSmall(ValueError):
    pass


@dataclass(frozen=True)
class SigmaSchedule:
    """Noise scale sigma_k = |k|**s for |k| >= 1, with sigma_0 = 1."""

    s: float = 0.0

    def __post_init__(self):
        if not self.s >= 0:
            raise ValueError(f"ill-posedness degree must be >= 0, got {self.s}")

    def at(self, k):
        return sigma_at(self, k)

    def over_band(self, band: int) -> np.ndarray:
        """sigma_k for k = -band..band."""
        return sigma_at(self, np.arange(-band, band + 1))


def sigma_at(schedule: SigmaSchedule, k):
    ak = np.abs(np.asarray(k, dtype=float))
    out = np.where(ak >= 1, np.power(np.maximum(ak, 1.0), schedule.s), 1.0)
    if out.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class SupportMask:
    rows: tuple  # sorted 1-based row indices (the set A)
    cols: tuple  # sorted 1-based column indices (the set B)

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(sorted(int(i) for i in self.rows)))
        object.__setattr__(self, "cols", tuple(sorted(int(j) for j in self.cols)))
        if len(set(self.rows)) != len(self.rows) or len(set(self.cols)) != len(self.cols):
            raise ValueError("support indices must be distinct")

    @property
    def m(self) -> int:
        return len(self.rows)

    @property
    def n(self) -> int:
        return len(self.cols)

    def indicator(self, M: int, N: int) -> np.ndarray:
        if self.rows and (self.rows[0] < 1 or self.rows[-1] > M):
            raise ShapeMismatch(f"row index outside 1..{M}")
        if self.cols and (self.cols[0] < 1 or self.cols[-1] > N):
            raise ShapeMismatch(f"column index outside 1..{N}")
        xi = np.zeros((M, N), dtype=bool)
        xi[np.ix_(np.array(self.rows, dtype=int) - 1, np.array(self.cols, dtype=int) - 1)] = True
        return xi


@dataclass
class SignalBank:
    """Coefficients theta_{ij,k} for the active cells of a support.

    ``theta`` has shape (m, n, 2*band + 1); entry [a, b] belongs to the cell
    (support.rows[a], support.cols[b]).
    """

    support: SupportMask
    theta: np.ndarray
    band: int

    def __post_init__(self):
        expected = (self.support.m, self.support.n, 2 * self.band + 1)
        if self.theta.shape != expected:
            raise ShapeMismatch(f"theta shape {self.theta.shape} != {expected}")


@dataclass
class ClassReport:
    ok: bool
    worst_ellipsoid: float  # max over cells of (2 pi)^{2 tau} sum |k|^{2 tau} theta^2 - 1
    worst_energy: float  # max over cells of r^2 - sum theta^2
    violations: list = field(default_factory=list)


@dataclass
class ObservationTensor:
    x: np.ndarray  # (M, N, 2*band+1), frequency axis ordered k = -band..band
    epsilon: float
    sigma: SigmaSchedule
    seed: int = 0
    flags: int = 0  # bit 0 set when generated under an alternative

    @property
    def band(self) -> int:
        return (self.x.shape[2] - 1) // 2

    @property
    def shape(self):
        return self.x.shape

    def standardized(self) -> np.ndarray:
        return self.x / (self.epsilon * self.sigma.over_band(self.band))

    def dump(self, path) -> None:
        M, N, _ = self.x.shape
        with open(path, "wb") as fh:
            fh.write(struct.pack("<5q", M, N, self.band, self.flags, _as_signed64(self.seed)))
            fh.write(np.ascontiguousarray(self.x, dtype="<f8").tobytes())

    @classmethod
    def load(cls, path, epsilon: float, sigma: SigmaSchedule) -> "ObservationTensor":
        with open(path, "rb") as fh:
            M, N, band, flags, seed = struct.unpack("<5q", fh.read(40))
            x = np.frombuffer(fh.read(), dtype="<f8").reshape(M, N, 2 * band + 1)
        return cls(x=x.astype(float), epsilon=epsilon, sigma=sigma, seed=seed & (2**64 - 1), flags=flags)


def _as_signed64(seed: int) -> int:
    seed = int(seed) & (2**64 - 1)
    return seed - 2**64 if seed >= 2**63 else seed


def sample_support(config: ProblemConfig, rng: np.random.Generator) -> SupportMask:
    M, N, m, n = config.M, config.N, config.m, config.n
    if not (1 <= m <= M and 1 <= n <= N):
        raise ValueError(f"invalid support sizes m={m}, M={M}, n={n}, N={N}")
    rows = rng.choice(M, size=m, replace=False) + 1
    cols = rng.choice(N, size=n, replace=False) + 1
    return SupportMask(tuple(rows), tuple(cols))


def worst_case_signal(solution: "WeightSolution", config: ProblemConfig, support: SupportMask,
                      sign_rule: str = "plus", rng: np.random.Generator | None = None) -> SignalBank:
    """Put +/- theta*_k on every active cell.

    ``sign_rule="rademacher"`` draws an independent sign per (i, j, k) from
    ``rng``; ``"plus"`` uses theta*_k everywhere.
    """
    band = config.band
    if solution.band > band:
        raise BandTooSmall(f"solution needs band >= {solution.band}, config has {band}")
    theta_full = np.sqrt(solution.theta2_full(band))
    shape = (support.m, support.n, 2 * band + 1)
    if sign_rule == "plus":
        theta = np.broadcast_to(theta_full, shape).copy()
    elif sign_rule == "rademacher":
        if rng is None:
            raise ValueError("rademacher sign rule needs an rng")
        signs = rng.integers(0, 2, size=shape, dtype=np.int8) * 2 - 1
        theta = signs * theta_full
    else:
        raise ValueError(f"unknown sign rule {sign_rule!r}")
    return SignalBank(support=support, theta=theta, band=band)


def validate_signal_class(bank: SignalBank, tau: float, r: float, rtol: float = 1e-8) -> ClassReport:
    k = np.abs(np.arange(-bank.band, bank.band + 1, dtype=float))
    ell_weight = (2 * np.pi) ** (2 * tau) * k ** (2 * tau)
    th2 = bank.theta ** 2
    ellipsoid = th2 @ ell_weight
    energy = th2.sum(axis=2)
    ell_excess = ellipsoid - 1.0
    energy_short = r ** 2 - energy
    violations = []
    for a, i in enumerate(bank.support.rows):
        for b, j in enumerate(bank.support.cols):
            if ell_excess[a, b] > rtol:
                violations.append(((i, j), "ellipsoid", float(ellipsoid[a, b])))
            if energy_short[a, b] > rtol * r ** 2:
                violations.append(((i, j), "energy", float(energy[a, b])))
    return ClassReport(
        ok=not violations,
        worst_ellipsoid=float(ell_excess.max()) if ell_excess.size else -1.0,
        worst_energy=float(energy_short.max()) if energy_short.size else -r ** 2,
        violations=violations,
    )


def generate_observations(config: ProblemConfig, rng: np.random.Generator,
                          bank: SignalBank | None = None) -> ObservationTensor:
    """Draw one tensor; null when ``bank`` is None, else the alternative it encodes."""
    M, N, band = config.M, config.N, config.band
    sigma = SigmaSchedule(config.s)
    scale = config.epsilon * sigma.over_band(band)
    x = rng.standard_normal((M, N, 2 * band + 1)) * scale
    flags = 0
    if bank is not None:
        if bank.band != band:
            raise ShapeMismatch(f"bank band {bank.band} != config band {band}")
        rows = np.array(bank.support.rows) - 1
        cols = np.array(bank.support.cols) - 1
        if rows.max() >= M or cols.max() >= N:
            raise ShapeMismatch("support outside the M x N grid")
        x[np.ix_(rows, cols)] += bank.theta
        flags = 1
    return ObservationTensor(x=x, epsilon=config.epsilon, sigma=sigma, seed=config.seed, flags=flags)
