import math

import numpy as np
import pytest

from acif.expr import parse_expression
from acif.pijavskii import (PenaltyProblem, default_penalty_lipschitz, penalty_value,
                            pijavskii_minimize, run_pen)
from acif.problem import ConstrainedProblem

from conftest import FSP9_EPS, FSP9_MINIMIZER, fsp9, fsp9_oracle


def simple():
    return ConstrainedProblem((parse_expression("x - 0.5"), parse_expression("x")),
                              (1.0, 1.0), (0.0, 1.0), 0.1)


def test_penalty_values():
    pp = PenaltyProblem(simple(), 10.0)
    assert penalty_value(pp, 0.7) == pytest.approx(2.7)
    assert penalty_value(pp, 0.3) == pytest.approx(0.3)
    assert pp.K_pen == pytest.approx(1.0 + 10.0 * 1.0)


def test_penalty_validation():
    with pytest.raises(ValueError):
        PenaltyProblem(simple(), 0.0)
    with pytest.raises(ValueError):
        PenaltyProblem(simple(), 1.0, K_pen=-1.0)


def test_v_shape():
    x, fmin, trials = pijavskii_minimize(lambda x: abs(x - 0.3), (0, 1), 1.5, 1e-4)
    assert fmin <= 1.5e-4
    assert abs(x - 0.3) <= 2e-4


def test_constant_function():
    res = pijavskii_minimize(lambda x: 2.0, (0, 1), 1.0, 1e-2)
    assert res.f_min == 2.0
    # with equal values every split lands at the midpoint
    assert all(abs(x - round(x * 256) / 256) < 1e-12 for x, _ in res.trials)


def test_minorant_is_valid():
    f = parse_expression("sin(3*x) + 0.5*sin(11*x)")
    K = 1.1 * (3 + 5.5)
    res = pijavskii_minimize(f, (0, 4), K, 1e-3)
    pts = sorted(res.trials)
    xs = np.array([p for p, _ in pts])
    fs = np.array([v for _, v in pts])
    grid = np.random.default_rng(1).uniform(0, 4, 20000)
    minorant = np.max(fs[None, :] - K * np.abs(grid[:, None] - xs[None, :]), axis=1)
    assert np.all(minorant <= f(grid) + 1e-12)
    for (l, r, R) in res.selected:
        assert R <= min(f(float(np.clip(x, l, r))) for x in (l, r, 0.5 * (l + r))) + 1e-12


def test_numeric_error():
    with pytest.raises(ArithmeticError):
        pijavskii_minimize(lambda x: math.nan, (0, 1), 1.0, 0.1)


def test_evaluation_accounting_on_problem9():
    out = run_pen(fsp9(), 15.0, FSP9_EPS)
    assert out.evaluations == 4 * out.iterations
    assert sum(t.nu for t in out.trace) == out.evaluations
    assert out.problem.K_pen == pytest.approx(default_penalty_lipschitz(fsp9(), 15.0))
    assert abs(out.minimizer - FSP9_MINIMIZER) <= FSP9_EPS


def test_penalty_minimizer_matches_constrained_oracle():
    # exact penalty with P = 15: the grid minimizer of P* equals the constrained one
    o = fsp9_oracle()
    viol = np.maximum.reduce([np.maximum(v, 0) for v in o.values[:-1]])
    pstar = o.values[-1] + 15.0 * viol
    x_pen = o.x[np.argmin(pstar)]
    assert abs(x_pen - o.report().global_argmin) <= 2 * o.h
