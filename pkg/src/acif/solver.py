"""Index-scheme branch and bound with continuous index functions.

The driver keeps a history list (every trial interval, immutable) and a
working list (intervals that may still hold a global minimizer).  Each
iteration selects the working interval with the smallest characteristic,
checks whether it can intersect a feasible run of length ``delta``, and
either stops at accuracy ``epsilon`` or splits it with a new trial.
"""
from __future__ import annotations

import bisect
import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

from .index import (
    IntervalRecord,
    SolverStateError,
    WorkingInterval,
    ZEstimate,
    backward_motion,
    initial_characteristic,
    onward_motion,
    select_interval,
    shift_z_on_new_zstar,
    subdivision_point,
    z_value,
)
from .problem import ConstrainedProblem, TrialRecord, evaluate_trial, index_counts


class QDeltaMode(str, enum.Enum):
    FULL = "full"
    SIMPLIFIED = "simplified"


class OutcomeKind(str, enum.Enum):
    INFEASIBLE = "Infeasible"
    BOUNDED = "BoundedSolution"
    SUPPORT_BOUNDED = "SupportBoundedSolution"


class QDeltaVerdict(str, enum.Enum):
    MAY_BELONG = "MayBelong"
    EXCLUDED = "Excluded"


class BudgetExceeded(RuntimeError):
    """``max_iterations`` trials were spent; ``state`` holds the partial run."""

    def __init__(self, state: "SolverState"):
        super().__init__(f"iteration budget of {len(state.trials)} trials exhausted")
        self.state = state


@dataclass(frozen=True)
class AcifConfig:
    epsilon: float
    delta: float
    max_iterations: int = 10**6
    qdelta_mode: QDeltaMode = QDeltaMode.FULL

    def __post_init__(self):
        object.__setattr__(self, "qdelta_mode", QDeltaMode(self.qdelta_mode))
        if not (0 < self.epsilon <= self.delta):
            raise ValueError(f"need 0 < epsilon <= delta, got {self.epsilon}, {self.delta}")
        if self.max_iterations < 2:
            raise ValueError("max_iterations must be at least 2")

    @classmethod
    def for_problem(cls, problem: ConstrainedProblem, epsilon: Optional[float] = None,
                    **kw) -> "AcifConfig":
        """Default accuracy ``1e-4 (b - a)`` and the problem's ``delta``."""
        eps = 1e-4 * (problem.b - problem.a) if epsilon is None else epsilon
        return cls(epsilon=eps, delta=kw.pop("delta", problem.delta), **kw)


@dataclass
class TraceEvent:
    k: int
    action: str
    x: Optional[float] = None
    nu: Optional[int] = None
    g_value: Optional[float] = None
    zstar: Optional[float] = None
    q: Optional[int] = None
    t: Optional[int] = None
    R_t: Optional[float] = None


@dataclass
class Removal:
    """A working interval leaving the list, with the best point at that time."""

    k: int
    l: float
    r: float
    reason: str
    xstar: Optional[float]
    zstar: Optional[float]


@dataclass
class SolverState:
    problem: ConstrainedProblem
    history: list[IntervalRecord] = field(default_factory=list)
    working: list[WorkingInterval] = field(default_factory=list)
    zstar: ZEstimate = field(default_factory=ZEstimate)
    v_delta: set[float] = field(default_factory=set)
    trials: list[TrialRecord] = field(default_factory=list)
    points: list[float] = field(default_factory=list)
    trial_at: dict[float, TrialRecord] = field(default_factory=dict)
    events: list[TraceEvent] = field(default_factory=list)
    removals: list[Removal] = field(default_factory=list)
    restarts: int = 0
    check_evaluations: int = 0

    @property
    def m(self) -> int:
        return self.problem.m

    @property
    def K(self) -> tuple[float, ...]:
        return self.problem.lipschitz

    @property
    def k(self) -> int:
        """Iteration number: intervals in the history list."""
        return len(self.history)

    @property
    def q(self) -> int:
        return len(self.working)

    @property
    def counts(self) -> list[int]:
        return index_counts(self.trials, self.m)

    def trial(self, x: float) -> TrialRecord:
        tr = evaluate_trial(self.problem, x)
        self.trials.append(tr)
        bisect.insort(self.points, tr.x)
        self.trial_at[tr.x] = tr
        self.zstar.max_index = max(self.zstar.max_index, tr.nu)
        return tr

    def z(self, tr: TrialRecord) -> float:
        return z_value(tr, self.zstar, self.m)

    def fresh_working(self, rec: IntervalRecord) -> WorkingInterval:
        tl, tr = self.trial_at[rec.l], self.trial_at[rec.r]
        return WorkingInterval(rec, self.z(tl), self.z(tr), rec.nu_l, rec.nu_r)

    def log(self, action: str, **kw):
        self.events.append(TraceEvent(self.k, action, zstar=self.zstar.value, q=self.q, **kw))

    def remove(self, w: WorkingInterval, reason: str):
        self.removals.append(Removal(self.k, w.l, w.r, reason, self.zstar.arg, self.zstar.value))


@dataclass
class Outcome:
    kind: OutcomeKind
    lower: Optional[float]
    upper: Optional[float]
    minimizer: Optional[float]
    trace: list[TrialRecord]
    v_delta: list[float]
    state: SolverState = field(repr=False)

    @property
    def iterations(self) -> int:
        return len(self.trace)

    @property
    def evaluations(self) -> int:
        return sum(t.nu for t in self.trace)


Observer = Callable[[SolverState, str], None]


# ----------------------------------------------------------- characteristics

def _settle(state: SolverState, fresh: list[WorkingInterval], with_motions: bool):
    """Compute characteristics of ``fresh`` entries, run motions from the
    positive ones (if asked) and drop every positive entry."""
    K, W = state.K, state.working
    for w in fresh:
        w.R = initial_characteristic(w, K)
    for w in fresh:
        if not (w.R > 0) or not _contains(W, w):
            continue
        if not with_motions or w.nu_l == w.nu_r:
            continue
        t = _position(W, w)
        if w.nu_l < w.nu_r:
            removed = backward_motion(W, t, K)
            state.log("motion", x=w.r, nu=w.nu_r, t=t, R_t=w.R)
        else:
            removed = onward_motion(W, t, K)
            state.log("motion", x=w.l, nu=w.nu_l, t=t, R_t=w.R)
        for gone in removed:
            state.remove(gone, "motion")
    positive = [w for w in W if w.R > 0]
    for w in positive:
        state.remove(w, "positive")
    if positive:
        state.working[:] = [w for w in W if not (w.R > 0)]


def _contains(W, w) -> bool:
    return any(v is w for v in W)


def _position(W, w) -> int:
    for i, v in enumerate(W):
        if v is w:
            return i
    raise SolverStateError("interval not in working list")


# ------------------------------------------------------------------ Q^delta

def _walk_bound(state: SolverState, start: int, step: int) -> tuple[float, int]:
    """From history point ``start`` (feasible), walk to the nearest point with
    index below ``m + 1``; return the cone bound on the feasible stretch in that
    direction and the position of the point where the walk ended."""
    pts, K, m1 = state.points, state.K, state.m + 1
    i = start + step
    while 0 <= i < len(pts):
        tr = state.trial_at[pts[i]]
        if tr.nu < m1:
            return pts[i] - step * tr.g_value / K[tr.nu - 1], i
        i += step
    end = 0 if step < 0 else len(pts) - 1
    return pts[end], end


def _stretch(state: SolverState, w: WorkingInterval) -> tuple[float, float, int, int]:
    """Outer bounds of the feasible stretch(es) through ``w`` and the history
    positions of the chain of points they span."""
    K, m1 = state.K, state.m + 1
    il = bisect.bisect_left(state.points, w.l)
    ir = bisect.bisect_left(state.points, w.r)
    if w.nu_l < m1:
        lo, jl = w.l + w.z_l / K[w.nu_l - 1], il
    else:
        lo, jl = _walk_bound(state, il, -1)
    if w.nu_r < m1:
        hi, jr = w.r - w.z_r / K[w.nu_r - 1], ir
    else:
        hi, jr = _walk_bound(state, ir, +1)
    return lo, hi, jl, jr


def _exclude_chain(state: SolverState, jl: int, jr: int, reason: str = "qdelta"):
    left, right = state.points[jl], state.points[jr]
    m1 = state.m + 1
    for p in state.points[jl:jr + 1]:
        if state.trial_at[p].nu == m1:
            state.v_delta.add(p)
    keep = []
    for w in state.working:
        if left <= w.l and w.r <= right:
            state.remove(w, reason)
        else:
            keep.append(w)
    state.working[:] = keep


def verify_qdelta(state: SolverState, t: int, config: AcifConfig) -> QDeltaVerdict:
    """Can working interval ``t`` intersect a feasible run of length ``delta``?

    On ``Excluded`` the whole chain of history intervals spanning the short
    feasible stretch leaves the working list and its feasible points join
    ``state.v_delta``.
    """
    w = state.working[t]
    K, m1, delta = state.K, state.m + 1, config.delta
    if config.qdelta_mode is QDeltaMode.SIMPLIFIED or (w.nu_l < m1 and w.nu_r < m1):
        if w.nu_l < m1 and w.nu_r < m1:
            y_minus = w.l + w.z_l / K[w.nu_l - 1]
            y_plus = w.r - w.z_r / K[w.nu_r - 1]
            if y_plus - y_minus < delta:
                _exclude_chain(state, *_history_span(state, w))
                return QDeltaVerdict.EXCLUDED
        return QDeltaVerdict.MAY_BELONG
    if w.nu_l == m1 and w.nu_r < m1:
        quick = w.r - w.l - w.z_r / K[w.nu_r - 1]
    elif w.nu_l < m1:
        quick = w.r - w.l - w.z_l / K[w.nu_l - 1]
    else:
        quick = w.r - w.l
    if quick > delta:
        return QDeltaVerdict.MAY_BELONG
    lo, hi, jl, jr = _stretch(state, w)
    if hi - lo < delta:
        _exclude_chain(state, jl, jr)
        return QDeltaVerdict.EXCLUDED
    return QDeltaVerdict.MAY_BELONG


def _history_span(state: SolverState, w: WorkingInterval) -> tuple[int, int]:
    return bisect.bisect_left(state.points, w.l), bisect.bisect_left(state.points, w.r)


# ------------------------------------------------------------------ restart

def restart(state: SolverState, config: Optional[AcifConfig] = None) -> SolverState:
    """Recompute Z* without ``v_delta`` points and rebuild the working list."""
    m1 = state.m + 1
    best = None
    for tr in state.trials:
        if tr.nu == m1 and tr.x not in state.v_delta:
            if best is None or tr.g_value < best.g_value:
                best = tr
    zs = state.zstar
    zs.value, zs.arg = (best.g_value, best.x) if best else (None, None)
    bound = zs.value if zs.present else math.inf
    W = []
    for rec in state.history:
        ends = [p for p in (rec.l, rec.r) if p in state.v_delta]
        if all(state.trial_at[p].g_value > bound for p in ends):
            W.append(state.fresh_working(rec))
    state.working[:] = W
    state.restarts += 1
    _settle(state, list(W), with_motions=True)
    state.log("restart", x=zs.arg)
    return state


# ------------------------------------------------------------ termination

def local_feasibility_check(problem: ConstrainedProblem, x: float,
                            config: AcifConfig) -> bool:
    """Scan ``[x - delta, x + delta]`` at spacing ``epsilon``: is ``x`` inside a
    feasible run of length at least ``delta``?"""
    return _local_check(problem, x, config.epsilon, config.delta)[0]


def _local_check(problem, x, eps, delta) -> tuple[bool, int]:
    a, b = problem.interval
    n = math.ceil(delta / eps - 1e-9)
    evals = 0

    def feasible(p):
        nonlocal evals
        for g in problem.constraints:
            evals += 1
            if g(p) > 0:
                return False
        return True

    if not feasible(x):
        return False, evals
    lo = hi = 0
    while lo > -n and x + (lo - 1) * eps >= a and feasible(x + (lo - 1) * eps):
        lo -= 1
    while hi < n and x + (hi + 1) * eps <= b and feasible(x + (hi + 1) * eps):
        hi += 1
    return (hi - lo) * eps >= delta * (1 - 1e-12), evals


def support_lower_bound(trials, W, K_obj: float, m: int) -> Optional[float]:
    """Minimum over the working intervals of the saw-tooth minorant of ``f``
    built from the feasible trials; ``None`` without feasible trials."""
    pts = sorted((t.x, t.g_value) for t in trials if t.nu == m + 1)
    if not pts or not W:
        return None
    xs = [p for p, _ in pts]
    pref, best = [], -math.inf
    for p, f in pts:
        best = max(best, f + K_obj * p)
        pref.append(best)
    suf, best = [0.0] * len(pts), -math.inf
    for i in range(len(pts) - 1, -1, -1):
        best = max(best, pts[i][1] - K_obj * pts[i][0])
        suf[i] = best
    lowest = math.inf
    for w in W:
        lo, hi = w.l, w.r
        cuts = [lo] + [p for p in xs if lo < p < hi] + [hi]
        for u, v in zip(cuts, cuts[1:]):
            i = bisect.bisect_right(xs, u)
            j = bisect.bisect_left(xs, v)
            A = pref[i - 1] if i > 0 else -math.inf
            B = suf[j] if j < len(xs) else -math.inf
            cand = [u, v]
            if math.isfinite(A) and math.isfinite(B):
                cand.append(min(max((A - B) / (2 * K_obj), u), v))
            for c in cand:
                lowest = min(lowest, max(A - K_obj * c, B + K_obj * c))
    return lowest


# ------------------------------------------------------------------- driver

def _split(state: SolverState, t: int, x: float) -> tuple[WorkingInterval, WorkingInterval, TrialRecord]:
    w = state.working[t]
    tr = state.trial(x)
    h = bisect.bisect_right([rec.l for rec in state.history], x) - 1
    rec = state.history[h]
    left = IntervalRecord(rec.l, x, rec.nu_l, tr.nu, rec.g_l, tr.g_value)
    right = IntervalRecord(x, rec.r, tr.nu, rec.nu_r, tr.g_value, rec.g_r)
    state.history[h:h + 1] = [left, right]

    m1 = state.m + 1
    zs = state.zstar
    shifted = False
    if tr.nu == m1 and (not zs.present or tr.g_value < zs.value):
        old = zs.value
        zs.value, zs.arg = tr.g_value, tr.x
        if old is not None:
            shift_z_on_new_zstar(state.working, old, zs.value, state.m, skip_x=x)
            shifted = True
    z_new = state.z(tr)
    wl = WorkingInterval(left, w.z_l, z_new, w.nu_l, tr.nu)
    wr = WorkingInterval(right, z_new, w.z_r, tr.nu, w.nu_r)
    state.working[t:t + 1] = [wl, wr]
    if shifted:
        others = [v for v in state.working if v is not wl and v is not wr]
        for v in others:
            v.R = initial_characteristic(v, state.K)
        positive = [v for v in others if v.R > 0]
        for v in positive:
            state.remove(v, "positive")
        state.working[:] = [v for v in state.working if not any(v is p for p in positive)]
    return wl, wr, tr


def _initial_state(problem: ConstrainedProblem) -> SolverState:
    state = SolverState(problem)
    ta = state.trial(problem.a)
    tb = state.trial(problem.b)
    m1 = problem.m + 1
    feasible = [t for t in (ta, tb) if t.nu == m1]
    if feasible:
        best = min(feasible, key=lambda t: t.g_value)
        state.zstar.value, state.zstar.arg = best.g_value, best.x
    rec = IntervalRecord(ta.x, tb.x, ta.nu, tb.nu, ta.g_value, tb.g_value)
    state.history.append(rec)
    w = state.fresh_working(rec)
    state.working.append(w)
    for tr in (ta, tb):
        state.log("trial", x=tr.x, nu=tr.nu, g_value=tr.g_value)
    _settle(state, [w], with_motions=True)
    return state


def _outcome(state, kind, lower=None, upper=None, minimizer=None) -> Outcome:
    state.log("stop", x=minimizer)
    return Outcome(kind, lower, upper, minimizer, list(state.trials),
                   sorted(state.v_delta), state)


def run_acif(problem: ConstrainedProblem, config: Optional[AcifConfig] = None,
             observer: Optional[Observer] = None) -> Outcome:
    """Solve ``problem``; see :class:`Outcome` for the three possible results.

    ``observer(state, stage)`` is called after the initial trials, after every
    new trial (stage ``"trial"``) and after every restart.
    """
    config = config or AcifConfig.for_problem(problem)
    state = _initial_state(problem)
    m1 = problem.m + 1
    if observer:
        observer(state, "init")

    def do_restart():
        restart(state, config)
        if observer:
            observer(state, "restart")

    while True:
        t = select_interval(state.working)
        if t is None:
            return _outcome(state, OutcomeKind.INFEASIBLE)
        w = state.working[t]
        verdict = verify_qdelta(state, t, config)
        if verdict is QDeltaVerdict.EXCLUDED:
            state.log("exclude", x=w.l, t=t, R_t=w.R)
            if state.zstar.arg is not None and state.zstar.arg in state.v_delta:
                do_restart()
            continue
        if w.r - w.l > config.epsilon:
            if len(state.trials) >= config.max_iterations:
                raise BudgetExceeded(state)
            x = subdivision_point(w, state.K)
            wl, wr, tr = _split(state, t, x)
            state.log("trial", x=tr.x, nu=tr.nu, g_value=tr.g_value, t=t, R_t=w.R)
            _settle(state, [wl, wr], with_motions=True)
            if observer:
                observer(state, "trial")
            continue

        # accuracy reached
        zs = state.zstar
        if not zs.present:
            raise SolverStateError("stopped on an interval without feasible data")
        if config.qdelta_mode is QDeltaMode.SIMPLIFIED:
            i = bisect.bisect_left(state.points, zs.arg)
            lo, jl = _walk_bound(state, i, -1)
            hi, jr = _walk_bound(state, i, +1)
            if hi - lo < config.delta:
                _exclude_chain(state, jl, jr)
                state.log("exclude", x=zs.arg)
                do_restart()
                continue
        ok, evals = _local_check(problem, zs.arg, config.epsilon, config.delta)
        state.check_evaluations += evals
        if not ok:
            state.v_delta.add(zs.arg)
            do_restart()
            continue
        open_constraint = any(v.R < 0 and v.nubar < m1 for v in state.working)
        if open_constraint:
            lower = support_lower_bound(state.trials, state.working, problem.K(m1), problem.m)
            return _outcome(state, OutcomeKind.SUPPORT_BOUNDED, lower, zs.value, zs.arg)
        return _outcome(state, OutcomeKind.BOUNDED, w.R + zs.value, zs.value, zs.arg)
