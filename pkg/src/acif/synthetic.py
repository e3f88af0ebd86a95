"""Random piecewise-linear test problems with exactly known Lipschitz constants."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .problem import ConstrainedProblem


@dataclass(frozen=True)
class PiecewiseLinear:
    """Linear interpolation through ``(knots, values)``; accepts floats or arrays."""

    knots: tuple[float, ...]
    values: tuple[float, ...]

    @property
    def lipschitz(self) -> float:
        return float(np.max(np.abs(np.diff(self.values) / np.diff(self.knots))))

    def __call__(self, x):
        if isinstance(x, np.ndarray):
            return np.interp(x, self.knots, self.values)
        return float(np.interp(float(x), self.knots, self.values))


def random_piecewise_linear(rng: np.random.Generator, interval: tuple[float, float],
                            n_knots: int, low: float, high: float) -> PiecewiseLinear:
    a, b = interval
    inner = np.sort(rng.uniform(a, b, n_knots - 2))
    knots = np.concatenate([[a], inner, [b]])
    # drop near-duplicate knots so slopes stay moderate
    keep = np.concatenate([[True], np.diff(knots) > 1e-3 * (b - a)])
    keep[-1] = True
    knots = knots[keep]
    if knots[-2] >= b:
        knots = knots[:-1]
    values = rng.uniform(low, high, knots.size)
    return PiecewiseLinear(tuple(map(float, knots)), tuple(map(float, values)))


def random_problem(seed: Optional[int] = None, max_constraints: int = 3,
                   interval: tuple[float, float] = (0.0, 1.0), safety: float = 1.1,
                   delta: Optional[float] = None) -> ConstrainedProblem:
    """A problem with 0..``max_constraints`` piecewise-linear constraints.

    Constraints lean negative so that feasible regions are common but not
    guaranteed.  ``K_j = safety * L_j`` with ``L_j`` the exact largest slope.
    """
    rng = np.random.default_rng(seed)
    m = int(rng.integers(0, max_constraints + 1))
    funcs = [random_piecewise_linear(rng, interval, int(rng.integers(4, 16)), -1.0, 0.6)
             for _ in range(m)]
    funcs.append(random_piecewise_linear(rng, interval, int(rng.integers(4, 21)), -1.0, 1.0))
    if delta is None:
        delta = float(rng.choice([1e-3, 1e-2, 5e-2])) * (interval[1] - interval[0])
    return ConstrainedProblem(tuple(funcs), tuple(safety * f.lipschitz for f in funcs),
                              interval, delta, name=f"random-{seed}")
