"""Brute-force ground truth on a uniform grid.

Everything here evaluates the problem directly (all constraints at every
node) and never looks at solver internals except the state being checked.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import kernels
from .problem import ConstrainedProblem, NumericError

DEFAULT_RESOLUTION = 10**6


def evaluate_on_grid(fn: Callable, xs: np.ndarray) -> np.ndarray:
    """Evaluate ``fn`` on all of ``xs``, vectorized when ``fn`` accepts arrays."""
    try:
        with np.errstate(all="ignore"):
            out = np.asarray(fn(xs), dtype=np.float64)
        if out.shape == xs.shape:
            return out
    except (TypeError, ValueError, ArithmeticError):
        pass
    return np.fromiter((fn(float(x)) for x in xs), dtype=np.float64, count=xs.size)


@dataclass
class GridReport:
    resolution: int
    feasible_intervals: list[tuple[float, float]]
    q_delta_intervals: list[tuple[float, float]]
    global_min: Optional[float]
    global_argmin: Optional[float]
    isolated_points: list[float] = field(default_factory=list)
    spacing: float = math.nan

    def in_q_delta(self, x: float, slack: float = 0.0) -> bool:
        return any(lo - slack <= x <= hi + slack for lo, hi in self.q_delta_intervals)


def _runs(mask: np.ndarray) -> list[tuple[int, int]]:
    """Inclusive index ranges of the ``True`` runs of ``mask``."""
    if mask.size == 0:
        return []
    d = np.diff(mask.astype(np.int8))
    starts = list(np.flatnonzero(d == 1) + 1)
    ends = list(np.flatnonzero(d == -1))
    if mask[0]:
        starts.insert(0, 0)
    if mask[-1]:
        ends.append(mask.size - 1)
    return list(zip((int(s) for s in starts), (int(e) for e in ends)))


class GridOracle:
    """Full evaluation of a problem on ``resolution`` uniform nodes, computed once."""

    def __init__(self, problem: ConstrainedProblem, resolution: int = DEFAULT_RESOLUTION):
        if resolution < 2:
            raise ValueError("resolution must be at least 2")
        self.problem = problem
        self.resolution = resolution
        a, b = problem.interval
        self.x = np.linspace(a, b, resolution)
        self.h = (b - a) / (resolution - 1)
        m = problem.m
        nu = np.full(resolution, m + 1, dtype=np.int64)
        g = np.empty(resolution)
        values = [evaluate_on_grid(fn, self.x) for fn in problem.functions]
        for j in range(m, -1, -1):  # lowest violated index wins
            if j == m:
                g[:] = values[j]
                continue
            viol = values[j] > 0
            nu[viol] = j + 1
            g[viol] = values[j][viol]
        bad = ~np.isfinite(g)
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            raise NumericError(float(self.x[i]), int(nu[i]), float(g[i]))
        self.nu = nu
        self.g = g
        self.values = values
        self.feasible = nu == m + 1

    def report(self, delta: Optional[float] = None) -> GridReport:
        delta = self.problem.delta if delta is None else delta
        runs = _runs(self.feasible)
        x = self.x
        feasible = [(float(x[s]), float(x[e])) for s, e in runs]
        isolated = [float(x[s]) for s, e in runs if s == e]
        q_runs = [(s, e) for s, e in runs if x[e] - x[s] >= delta]
        q_delta = [(float(x[s]), float(x[e])) for s, e in q_runs]
        gmin = gargmin = None
        if q_runs:
            idx = np.concatenate([np.arange(s, e + 1) for s, e in q_runs])
            i = idx[np.argmin(self.g[idx])]
            gmin, gargmin = float(self.g[i]), float(x[i])
        return GridReport(self.resolution, feasible, q_delta, gmin, gargmin,
                          isolated, self.h)

    def q_delta_mask(self, delta: Optional[float] = None) -> np.ndarray:
        delta = self.problem.delta if delta is None else delta
        mask = np.zeros(self.resolution, dtype=bool)
        for s, e in _runs(self.feasible):
            if self.x[e] - self.x[s] >= delta:
                mask[s:e + 1] = True
        return mask

    def node_range(self, l: float, r: float) -> tuple[int, int]:
        """Inclusive node indices inside ``[l, r]``."""
        lo = int(np.searchsorted(self.x, l, side="left"))
        hi = int(np.searchsorted(self.x, r, side="right")) - 1
        return lo, hi

    def _j_grid(self, zstar: Optional[float]) -> np.ndarray:
        # J^k at every node; cached because Z* changes rarely
        cached = getattr(self, "_j_cache", None)
        if cached is not None and cached[0] == zstar:
            return cached[1]
        j_grid = self.g.copy()
        j_grid[self.feasible] = -np.inf if zstar is None else j_grid[self.feasible] - zstar
        self._j_cache = (zstar, j_grid)
        return j_grid

    def characteristic_minima(self, state, impl=None) -> np.ndarray:
        """Grid minimum of the continuous index function over each working interval.

        The function is rebuilt from the recorded trials (cones with slope
        ``K_nu``) and the exact ``J^k`` at every node; only nodes whose true
        index is at least the interval's working ``max(nu_l, nu_r)`` count.
        """
        problem = self.problem
        m = problem.m
        zs = state.zstar.value
        K = np.asarray(problem.lipschitz)
        pts, vals, cls = [], [], []
        for tr in state.trials:
            if tr.nu < m + 1:
                pts.append(tr.x), vals.append(tr.g_value), cls.append(tr.nu - 1)
            elif zs is not None:
                pts.append(tr.x), vals.append(tr.g_value - zs), cls.append(m)
        tables = kernels.cone_tables(pts, vals, cls, K)
        j_grid = self._j_grid(zs)
        W = state.working
        lo = np.searchsorted(self.x, [w.l for w in W], side="left").astype(np.int64)
        hi = np.searchsorted(self.x, [w.r for w in W], side="right").astype(np.int64) - 1
        nubar = np.array([w.nubar for w in W], dtype=np.int64)
        return kernels.envelope_interval_minima(
            self.x, j_grid, self.nu, lo, hi, nubar, *tables, impl=impl)

    def characteristic_violations(self, state, impl=None) -> list[tuple[int, float, float]]:
        """``(position, R, grid minimum)`` for every working interval whose
        characteristic exceeds the grid minimum by more than ``max K * h``."""
        if not state.working:
            return []
        mins = self.characteristic_minima(state, impl=impl)
        slack = max(self.problem.lipschitz) * self.h + 1e-12
        return [(i, w.R, float(mn)) for i, (w, mn) in enumerate(zip(state.working, mins))
                if w.R > mn + slack]


def grid_report(problem: ConstrainedProblem, resolution: int = DEFAULT_RESOLUTION) -> GridReport:
    """Feasible runs, the ``delta``-long runs and the global minimum over them."""
    return GridOracle(problem, resolution).report()


def estimate_lipschitz(expr: Callable, interval: tuple[float, float],
                       resolution: int = DEFAULT_RESOLUTION) -> float:
    """Largest adjacent-node slope ``|dg| / dx``; multiply by a safety factor for ``K``."""
    if resolution < 3:
        raise ValueError("resolution must be at least 3")
    a, b = interval
    xs = np.linspace(a, b, resolution)
    g = evaluate_on_grid(expr, xs)
    if not np.all(np.isfinite(g)):
        i = int(np.flatnonzero(~np.isfinite(g))[0])
        raise NumericError(float(xs[i]), 0, float(g[i]))
    return float(np.max(np.abs(np.diff(g)) / np.diff(xs)))


def validate_characteristic(state, problem: ConstrainedProblem,
                            resolution: int = DEFAULT_RESOLUTION,
                            oracle: Optional[GridOracle] = None) -> bool:
    """True iff every working characteristic is a lower bound of the grid-rebuilt
    continuous index function on its interval (slack ``max K * h``)."""
    oracle = oracle or GridOracle(problem, resolution)
    return not oracle.characteristic_violations(state)


def sawtooth_grid_min(points, values, K: float, intervals, resolution: int = DEFAULT_RESOLUTION,
                      impl=None) -> float:
    """Brute-force minimum of ``max_p (f_p - K |x - x_p|)`` over grid nodes of the
    given intervals; the independent check for the exact support-function bound."""
    tables = kernels.cone_tables(points, values, np.zeros(len(points), dtype=np.int64), [K])
    best = math.inf
    for lo, hi in intervals:
        xs = np.linspace(lo, hi, resolution)
        env = kernels.cone_envelope(xs, *tables, impl=impl)
        best = min(best, float(env.min()))
    return best
