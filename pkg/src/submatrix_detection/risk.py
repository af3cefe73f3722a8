from __future__ import annotations

import math
from dataclasses import dataclass

Z975 = 1.959963984540054


@dataclass
class RiskEstimate:
    """Monte Carlo type I / type II / total error with 95% binomial radii.

    Type II is measured at a single alternative (the least-favorable signal or a
    prior draw), not a supremum over the class.
    """

    type1: float
    type2: float
    trials: int
    scenario: str = ""

    @property
    def total(self) -> float:
        return self.type1 + self.type2

    @property
    def ci_type1(self) -> float:
        return binomial_radius(self.type1, self.trials)

    @property
    def ci_type2(self) -> float:
        return binomial_radius(self.type2, self.trials)

    @property
    def ci(self) -> float:
        # independent null and alternative samples: variances add
        return Z975 * math.sqrt(_var(self.type1, self.trials) + _var(self.type2, self.trials))

    @classmethod
    def from_counts(cls, false_alarms: int, misses: int, trials: int, scenario: str = "") -> "RiskEstimate":
        if trials < 1:
            raise ValueError("need at least one trial")
        return cls(false_alarms / trials, misses / trials, trials, scenario)

    CSV_HEADER = "scenario-id,type1,type2,total,ci_radius,trials"

    def csv_row(self) -> str:
        return f"{self.scenario},{self.type1:.6f},{self.type2:.6f},{self.total:.6f},{self.ci:.6f},{self.trials}"


def _var(p: float, n: int) -> float:
    return p * (1 - p) / n


def binomial_radius(p: float, n: int) -> float:
    return Z975 * math.sqrt(_var(p, n))
