import math

import numpy as np
import pytest

from acif.expr import parse_expression
from acif.index import SolverStateError
from acif.oracle import GridOracle, sawtooth_grid_min
from acif.problem import ConstrainedProblem, TrialRecord
from acif.solver import (AcifConfig, BudgetExceeded, OutcomeKind, QDeltaMode, QDeltaVerdict,
                         SolverState, local_feasibility_check, restart, run_acif,
                         support_lower_bound, verify_qdelta)
from acif.synthetic import PiecewiseLinear

from conftest import FSP9_EPS, FSP9_MINIMIZER, fsp9, fsp9_oracle


def expr_problem(*exprs, K, interval=(0.0, 1.0), delta=0.1):
    return ConstrainedProblem(tuple(parse_expression(e) for e in exprs), K, interval, delta)


def state_from(problem, xs):
    """A solver state whose history holds the trials at ``xs`` (sorted)."""
    from acif.index import IntervalRecord
    st = SolverState(problem)
    trs = [st.trial(x) for x in xs]
    feas = [t for t in trs if t.nu == problem.m + 1]
    if feas:
        best = min(feas, key=lambda t: t.g_value)
        st.zstar.value, st.zstar.arg = best.g_value, best.x
    for a, b in zip(trs, trs[1:]):
        rec = IntervalRecord(a.x, b.x, a.nu, b.nu, a.g_value, b.g_value)
        st.history.append(rec)
        st.working.append(st.fresh_working(rec))
    from acif.index import initial_characteristic
    for w in st.working:
        w.R = initial_characteristic(w, problem.lipschitz)
    return st


class TestConfig:
    def test_eps_must_not_exceed_delta(self):
        with pytest.raises(ValueError):
            AcifConfig(0.1, 0.01)

    def test_budget_floor(self):
        with pytest.raises(ValueError):
            AcifConfig(0.01, 0.01, max_iterations=1)

    def test_modes(self):
        assert AcifConfig(0.1, 0.1, qdelta_mode="simplified").qdelta_mode is QDeltaMode.SIMPLIFIED


def test_monotone_objective():
    p = expr_problem("x", K=(1.5,), delta=1e-4)
    out = run_acif(p, AcifConfig(1e-4, 1e-4))
    assert out.kind is OutcomeKind.BOUNDED
    assert abs(out.minimizer) <= 1e-4
    assert out.lower <= 0.0 <= out.upper
    assert out.upper - out.lower <= 1.5 * 1e-4


def test_constant_violation_is_infeasible():
    p = expr_problem("1", "x", K=(1.0, 1.0), delta=0.1)
    out = run_acif(p, AcifConfig(1e-4, 0.1))
    assert out.kind is OutcomeKind.INFEASIBLE
    assert out.state.working == [] and out.iterations < 100


@pytest.mark.parametrize("mult", [1, 10])
def test_problem9_minimizer(mult):
    out = run_acif(fsp9(mult), AcifConfig(FSP9_EPS, mult * FSP9_EPS))
    assert abs(out.minimizer - FSP9_MINIMIZER) <= FSP9_EPS
    assert out.kind in (OutcomeKind.BOUNDED, OutcomeKind.SUPPORT_BOUNDED)


def test_simplified_mode_agrees_on_problem9():
    out = run_acif(fsp9(), AcifConfig(FSP9_EPS, 10 * FSP9_EPS, qdelta_mode="simplified"))
    assert abs(out.minimizer - FSP9_MINIMIZER) <= FSP9_EPS


def test_two_region_delta_filter(registry):
    spec = registry["two-region"]
    wide = run_acif(spec.build(1e-4, 0.01), AcifConfig(1e-4, 0.01))
    narrow = run_acif(spec.build(1e-4, 0.001), AcifConfig(1e-4, 0.001))
    assert wide.minimizer == pytest.approx(0.6, abs=1e-4)
    assert narrow.minimizer == pytest.approx(0.201, abs=1e-4)


def test_simplified_mode_two_region(registry):
    p = registry["two-region"].build(1e-4, 0.01)
    out = run_acif(p, AcifConfig(1e-4, 0.01, qdelta_mode="simplified"))
    assert out.minimizer == pytest.approx(0.6, abs=1e-4)


def test_budget_error_keeps_state():
    with pytest.raises(BudgetExceeded) as info:
        run_acif(fsp9(), AcifConfig(FSP9_EPS, 10 * FSP9_EPS, max_iterations=20))
    assert len(info.value.state.trials) == 20


def test_trace_events_have_the_schema_fields():
    out = run_acif(fsp9(), AcifConfig(FSP9_EPS, 10 * FSP9_EPS))
    actions = {e.action for e in out.state.events}
    assert {"trial", "stop"} <= actions
    assert actions <= {"trial", "exclude", "motion", "restart", "stop"}
    trials = [e for e in out.state.events if e.action == "trial"]
    assert [(e.x, e.nu, e.g_value) for e in trials] == \
        [(t.x, t.nu, t.g_value) for t in out.trace]


class TestQDelta:
    K = (1.0, 1.0)

    def test_case_i_excluded(self):
        p = expr_problem("0.45", "x", K=self.K)
        st = state_from(p, [0.0, 1.0])
        assert verify_qdelta(st, 0, AcifConfig(0.01, 0.2)) is QDeltaVerdict.EXCLUDED
        assert st.working == []

    def test_case_i_may_belong(self):
        p = expr_problem("0.05", "x", K=self.K)
        st = state_from(p, [0.0, 1.0])
        assert verify_qdelta(st, 0, AcifConfig(0.01, 0.2)) is QDeltaVerdict.MAY_BELONG

    def chain_problem(self):
        # g1 through (0, 0.1), (0.1, 0), (0.3, -0.1), (0.45, 0), (0.5, 0.05): feasible
        # run [0.1, 0.45] of length 0.35; f = x
        g = PiecewiseLinear((0.0, 0.1, 0.3, 0.45, 0.5, 1.0), (0.1, 0.0, -0.1, 0.0, 0.05, 0.1))
        return ConstrainedProblem((g, lambda x: x), (1.0, 1.0), (0.0, 1.0), 0.4)

    def test_case_ii_chain(self):
        p = self.chain_problem()
        st = state_from(p, [0.0, 0.3, 0.5])
        # 0.5 - 0 - 0.05/1 - 0.1/1 = 0.35 < 0.4
        assert verify_qdelta(st, 1, AcifConfig(0.01, 0.4)) is QDeltaVerdict.EXCLUDED
        assert st.v_delta == {0.3}
        assert st.working == []
        # the oracle agrees that the run is shorter than delta
        assert GridOracle(p, 100001).report(0.4).q_delta_intervals == []

    def test_case_ii_quick_accept(self):
        p = self.chain_problem()
        st = state_from(p, [0.0, 0.3, 0.5])
        assert verify_qdelta(st, 1, AcifConfig(0.01, 0.1)) is QDeltaVerdict.MAY_BELONG
        assert not st.v_delta

    def test_case_iii_mirror(self):
        g = PiecewiseLinear((0.0, 0.05, 0.2, 0.4, 0.5, 1.0), (0.05, 0.0, -0.1, 0.0, 0.1, 0.1))
        p = ConstrainedProblem((g, lambda x: x), (1.0, 1.0), (0.0, 1.0), 0.4)
        st = state_from(p, [0.0, 0.2, 0.5])
        assert verify_qdelta(st, 0, AcifConfig(0.01, 0.4)) is QDeltaVerdict.EXCLUDED
        assert st.v_delta == {0.2}

    def test_case_iv_walks_both_ways(self):
        g = PiecewiseLinear((0.0, 0.1, 0.2, 0.3, 0.4, 1.0), (0.1, 0.0, -0.1, 0.0, 0.1, 0.1))
        p = ConstrainedProblem((g, lambda x: x), (1.0, 1.0), (0.0, 1.0), 0.3)
        st = state_from(p, [0.0, 0.15, 0.25, 0.4])
        assert verify_qdelta(st, 1, AcifConfig(0.01, 0.3)) is QDeltaVerdict.EXCLUDED
        assert st.v_delta == {0.15, 0.25}
        st = state_from(p, [0.0, 0.15, 0.25, 0.4])
        assert verify_qdelta(st, 1, AcifConfig(0.01, 0.15)) is QDeltaVerdict.MAY_BELONG


class TestRestart:
    def test_identity_without_exclusions(self):
        p = expr_problem("x", K=(1.0,))
        st = state_from(p, [0.0, 0.5, 1.0])
        before = st.zstar.value
        restart(st)
        assert st.zstar.value == before and st.restarts == 1

    def test_new_estimate_skips_excluded_point(self):
        f = PiecewiseLinear((0.0, 0.5, 1.0), (3.0, 1.0, 3.5))
        p = ConstrainedProblem((f,), (10.0,), (0.0, 1.0), 0.1)
        st = state_from(p, [0.0, 0.5, 1.0])
        assert st.zstar.value == 1.0
        st.v_delta.add(0.5)
        restart(st)
        assert (st.zstar.value, st.zstar.arg) == (3.0, 0.0)
        # intervals touching 0.5 survive only if f(0.5) > new Z*; 1.0 < 3.0
        assert all(0.5 not in (w.l, w.r) for w in st.working)

    def test_all_feasible_points_excluded(self):
        g = PiecewiseLinear((0.0, 1.0, 2.0), (1.0, 0.0, 1.0))
        p = ConstrainedProblem((g, lambda x: x), (1.1, 1.1), (0.0, 2.0), 0.01)
        st = state_from(p, [0.0, 1.0, 2.0])
        st.v_delta.add(1.0)
        restart(st)
        assert not st.zstar.present
        assert all(w.nu_l < 2 and w.nu_r < 2 for w in st.working)


class TestLocalCheck:
    def test_wide_run(self):
        p = expr_problem("x^2 - 1", "x", K=(4.0, 1.0), interval=(-2.0, 2.0), delta=0.5)
        assert local_feasibility_check(p, 0.0, AcifConfig(0.01, 0.5))

    def test_isolated_point(self):
        p = expr_problem("(x - 1)^2", "x", K=(2.2, 1.0), interval=(0.0, 2.0), delta=0.1)
        assert not local_feasibility_check(p, 1.0, AcifConfig(0.01, 0.1))

    def test_problem9_solution(self):
        assert local_feasibility_check(fsp9(), FSP9_MINIMIZER, AcifConfig(FSP9_EPS, 10 * FSP9_EPS))
        assert fsp9_oracle().report(10 * FSP9_EPS).in_q_delta(FSP9_MINIMIZER)


class TestSupportBound:
    def test_symmetric_pair(self):
        trials = [TrialRecord(0.0, 1, 1.0), TrialRecord(1.0, 1, 1.0)]
        W = state_from(expr_problem("1", K=(1.0,)), [0.0, 1.0]).working
        assert support_lower_bound(trials, W, 1.0, 0) == pytest.approx(0.5)

    def test_single_point(self):
        trials = [TrialRecord(0.5, 1, 2.0)]
        W = state_from(expr_problem("1", K=(1.0,)), [0.0, 1.0]).working
        assert support_lower_bound(trials, W, 1.0, 0) == pytest.approx(1.5)

    def test_no_feasible_trials(self):
        assert support_lower_bound([TrialRecord(0.5, 1, 2.0)], [], 1.0, 1) is None

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_brute_force(self, seed):
        rng = np.random.default_rng(seed)
        xs = np.sort(rng.uniform(0, 1, 5))
        fs = rng.uniform(0, 1, 5)
        trials = [TrialRecord(float(x), 1, float(v)) for x, v in zip(xs, fs)]
        W = state_from(expr_problem("1", K=(1.0,)), [0.0, 0.4, 1.0]).working
        exact = support_lower_bound(trials, W, 2.0, 0)
        brute = sawtooth_grid_min(xs, fs, 2.0, [(0.0, 0.4), (0.4, 1.0)])
        assert exact == pytest.approx(brute, abs=1e-6)
        assert exact <= brute


def test_feasible_trial_without_estimate_is_a_state_error():
    from acif.index import z_value, ZEstimate
    with pytest.raises(SolverStateError):
        z_value(TrialRecord(0.0, 1, 0.0), ZEstimate(), 0)
