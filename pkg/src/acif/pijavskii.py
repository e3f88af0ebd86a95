"""Saw-tooth (Pijavskii) minimization and the penalty baseline built on it.

The penalty baseline turns a constrained problem into an unconstrained one::

    P*(x) = f(x) + P * max(g_1(x), ..., g_m(x), 0)

and minimizes it with the saw-tooth method.  Every penalty evaluation calls
all ``m + 1`` functions, so ``evaluations = (m + 1) * iterations``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

from .problem import ConstrainedProblem, NumericError, TrialRecord


@dataclass(frozen=True)
class SawtoothResult:
    x_min: float
    f_min: float
    trials: list[tuple[float, float]]
    selected: list[tuple[float, float, float]] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return len(self.trials)

    def __iter__(self):
        # unpacks as (x_min, f_min, trials)
        return iter((self.x_min, self.f_min, self.trials))


def pijavskii_minimize(objective: Callable[[float], float], interval: tuple[float, float],
                       K: float, epsilon: float, max_iterations: int = 10**6) -> SawtoothResult:
    """Global minimum of a ``K``-Lipschitz function on ``interval``.

    Starts from trials at both ends and keeps splitting the interval whose
    minorant minimum ``0.5 (f_l + f_r - K (r - l))`` is smallest (leftmost on
    ties) at the minorant's minimizer.  Stops once the selected interval is no
    longer than ``epsilon``.  ``selected`` records ``(l, r, R)`` per iteration.
    """
    if not (K > 0 and epsilon > 0):
        raise ValueError("K and epsilon must be positive")
    a, b = map(float, interval)
    if not a < b:
        raise ValueError(f"need a < b, got [{a}, {b}]")

    def evaluate(x):
        v = float(objective(x))
        if not math.isfinite(v):
            raise NumericError(x, 0, v)
        trials.append((x, v))
        return v

    trials: list[tuple[float, float]] = []
    xs = [a, b]
    fs = [evaluate(a), evaluate(b)]
    selected = []
    while True:
        best_i, best_R = 0, math.inf
        for i in range(len(xs) - 1):
            R = 0.5 * (fs[i] + fs[i + 1] - K * (xs[i + 1] - xs[i]))
            if R < best_R:
                best_i, best_R = i, R
        l, r = xs[best_i], xs[best_i + 1]
        selected.append((l, r, best_R))
        if r - l <= epsilon or len(trials) >= max_iterations:
            break
        x = 0.5 * (l + r) - (fs[best_i + 1] - fs[best_i]) / (2 * K)
        x = min(max(x, l), r)
        if not l < x < r:
            break  # interval below floating point resolution
        xs.insert(best_i + 1, x)
        fs.insert(best_i + 1, evaluate(x))
    x_min, f_min = min(trials, key=lambda p: p[1])
    return SawtoothResult(x_min, f_min, trials, selected)


@dataclass(frozen=True)
class PenaltyProblem:
    """``P*(x)`` for ``base`` with penalty coefficient ``P``."""

    base: ConstrainedProblem
    P: float
    K_pen: Optional[float] = None

    def __post_init__(self):
        if not self.P > 0:
            raise ValueError(f"penalty coefficient must be positive, got {self.P}")
        if self.K_pen is None:
            object.__setattr__(self, "K_pen", default_penalty_lipschitz(self.base, self.P))
        elif not self.K_pen > 0:
            raise ValueError(f"K_pen must be positive, got {self.K_pen}")

    @property
    def evaluations_per_point(self) -> int:
        return self.base.m + 1


def default_penalty_lipschitz(problem: ConstrainedProblem, P: float) -> float:
    """``K_f + P * max_j K_j``, a valid constant for ``P*``."""
    ks = problem.lipschitz
    return ks[-1] + P * max(ks[:-1], default=0.0)


def penalty_value(pp: PenaltyProblem, x: float) -> float:
    """``f(x) + P * max(g_1(x), ..., g_m(x), 0)``; evaluates every function."""
    base = pp.base
    worst = 0.0
    for j, g in enumerate(base.constraints, start=1):
        v = float(g(x))
        if not math.isfinite(v):
            raise NumericError(x, j, v)
        worst = max(worst, v)
    f = float(base.objective(x))
    if not math.isfinite(f):
        raise NumericError(x, base.m + 1, f)
    return f + pp.P * worst


@dataclass
class PenaltyOutcome:
    problem: PenaltyProblem
    minimizer: float
    value: float
    result: SawtoothResult

    @property
    def iterations(self) -> int:
        return self.result.iterations

    @property
    def evaluations(self) -> int:
        return self.problem.evaluations_per_point * self.iterations

    @property
    def trace(self) -> list[TrialRecord]:
        nu = self.problem.evaluations_per_point
        return [TrialRecord(x, nu, v) for x, v in self.result.trials]


def run_pen(problem: ConstrainedProblem, P: float, epsilon: float,
            K_pen: Optional[float] = None, max_iterations: int = 10**6) -> PenaltyOutcome:
    """Minimize the penalty transform of ``problem`` with the saw-tooth method."""
    pp = PenaltyProblem(problem, P, K_pen)
    res = pijavskii_minimize(lambda x: penalty_value(pp, x), problem.interval,
                             pp.K_pen, epsilon, max_iterations)
    return PenaltyOutcome(pp, res.x_min, res.f_min, res)
