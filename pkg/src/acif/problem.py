"""Constrained univariate problems with ordered constraints and index-scheme trials.

A problem is a list of ``m + 1`` evaluators ``g_1 .. g_m, g_{m+1} = f`` over an
interval ``[a, b]``.  Constraint ``j + 1`` is only meaningful where constraints
``1 .. j`` hold, so a *trial* evaluates them in order and stops at the first
violated one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

Evaluator = Callable[[float], float]


class ProblemError(ValueError):
    """Invalid problem definition."""


class DomainError(ValueError):
    """A trial was requested outside the search interval."""


class NumericError(ArithmeticError):
    """An evaluator returned a non-finite value."""

    def __init__(self, x: float, j: int, value: float):
        super().__init__(f"g_{j}({x!r}) returned non-finite value {value!r}")
        self.x = x
        self.j = j
        self.value = value


@dataclass(frozen=True)
class ConstrainedProblem:
    """Minimize ``functions[-1]`` subject to ``functions[j] <= 0`` for ``j < m``.

    ``lipschitz[j]`` is an overestimate ``K_j`` of the Lipschitz constant of
    ``functions[j]``.  Evaluators are total over ``[a, b]``; the nesting rule
    is enforced by the order in which :func:`evaluate_trial` calls them.
    """

    functions: tuple[Evaluator, ...]
    lipschitz: tuple[float, ...]
    interval: tuple[float, float]
    delta: float
    name: str = "problem"
    labels: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        funcs = tuple(self.functions)
        ks = tuple(float(k) for k in self.lipschitz)
        object.__setattr__(self, "functions", funcs)
        object.__setattr__(self, "lipschitz", ks)
        a, b = (float(v) for v in self.interval)
        object.__setattr__(self, "interval", (a, b))
        if not funcs:
            raise ProblemError("at least the objective function is required")
        if len(ks) != len(funcs):
            raise ProblemError(
                f"{len(funcs)} functions but {len(ks)} Lipschitz constants")
        for j, k in enumerate(ks, start=1):
            if not (k > 0 and math.isfinite(k)):
                raise ProblemError(f"K_{j} must be positive and finite, got {k}")
        if not (math.isfinite(a) and math.isfinite(b) and a < b):
            raise ProblemError(f"need a < b, got [{a}, {b}]")
        if not (self.delta > 0 and math.isfinite(self.delta)):
            raise ProblemError(f"delta must be positive, got {self.delta}")

    @property
    def m(self) -> int:
        """Number of constraints."""
        return len(self.functions) - 1

    @property
    def a(self) -> float:
        return self.interval[0]

    @property
    def b(self) -> float:
        return self.interval[1]

    @property
    def objective(self) -> Evaluator:
        return self.functions[-1]

    @property
    def constraints(self) -> tuple[Evaluator, ...]:
        return self.functions[:-1]

    def K(self, nu: int) -> float:
        """Lipschitz overestimate for the 1-based index ``nu``."""
        return self.lipschitz[nu - 1]


@dataclass(frozen=True)
class TrialRecord:
    """Result of a trial: starting index ``nu`` and ``g_nu(x)``."""

    x: float
    nu: int
    g_value: float


def evaluate_trial(problem: ConstrainedProblem, x: float) -> TrialRecord:
    """Evaluate constraints in order at ``x`` until the first one that is positive.

    Returns ``nu = j`` with ``g_value = g_j(x)`` for the first ``g_j(x) > 0``,
    or ``nu = m + 1`` with the objective value when every constraint holds.
    Exactly ``nu`` evaluator calls are made.
    """
    a, b = problem.interval
    if not (a <= x <= b):
        raise DomainError(f"trial point {x!r} outside [{a}, {b}]")
    m = problem.m
    for j, g in enumerate(problem.functions, start=1):
        value = float(g(x))
        if not math.isfinite(value):
            raise NumericError(x, j, value)
        if j == m + 1 or value > 0:
            return TrialRecord(float(x), j, value)
    raise AssertionError("unreachable")  # pragma: no cover


def count_evaluations(trials: Iterable[TrialRecord]) -> int:
    """Total evaluator calls behind ``trials``: trial with index ``nu`` costs ``nu``."""
    return sum(t.nu for t in trials)


def index_counts(trials: Iterable[TrialRecord], m: int) -> list[int]:
    """Number of trials whose last evaluated function was ``g_1 .. g_m, f``."""
    counts = [0] * (m + 1)
    for t in trials:
        counts[t.nu - 1] += 1
    return counts


def weighted_evaluations(counts: Sequence[int]) -> int:
    """``N_{g1} + 2 N_{g2} + ... + (m+1) N_f``."""
    return sum(j * n for j, n in enumerate(counts, start=1))
