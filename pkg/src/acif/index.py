"""History list, working list and characteristics of the index scheme.

Working-list positions are 0-based.  ``K`` arguments are sequences indexed by
``nu - 1`` (``K[0]`` belongs to ``g_1``).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import MutableSequence, Optional, Sequence

from .problem import TrialRecord


class DegeneracyError(ArithmeticError):
    """A subdivision point collapsed onto an interval endpoint."""


class SolverStateError(RuntimeError):
    """Internal state does not allow the requested operation."""


@dataclass(frozen=True)
class IntervalRecord:
    """History-list entry; trial data of both endpoints, never modified."""

    l: float
    r: float
    nu_l: int
    nu_r: int
    g_l: float
    g_r: float


@dataclass
class WorkingInterval:
    """Working-list entry.

    ``z_*`` and ``nu_*`` start as copies of the history data and may be
    rewritten by motions and Z* shifts; ``history`` keeps the originals.
    """

    history: IntervalRecord
    z_l: float
    z_r: float
    nu_l: int
    nu_r: int
    R: float = float("nan")

    @property
    def l(self) -> float:
        return self.history.l

    @property
    def r(self) -> float:
        return self.history.r

    @property
    def nubar(self) -> int:
        return max(self.nu_l, self.nu_r)


@dataclass
class ZEstimate:
    """Current best objective value among feasible trials and its location.

    ``max_index`` is the largest starting index seen so far (diagnostic only).
    """

    value: Optional[float] = None
    arg: Optional[float] = None
    max_index: int = 0

    @property
    def present(self) -> bool:
        return self.value is not None


def z_value(trial: TrialRecord, zstar: ZEstimate, m: int) -> float:
    """``J^k`` at a trial point: the constraint value, or ``f - Z*`` if feasible."""
    if trial.nu < m + 1:
        return trial.g_value
    if not zstar.present:
        raise SolverStateError(
            f"feasible trial at x={trial.x} needs a Z* estimate")
    return trial.g_value - zstar.value


def aux_points(w: WorkingInterval, K: Sequence[float]) -> tuple[float, float]:
    """Cone roots ``y- = l + z(l)/K_nu(l)`` and ``y+ = r - z(r)/K_nu(r)``."""
    return (w.l + w.z_l / K[w.nu_l - 1], w.r - w.z_r / K[w.nu_r - 1])


def characteristic(l: float, r: float, nu_l: int, nu_r: int,
                   z_l: float, z_r: float, K: Sequence[float]) -> float:
    """Endpoint-only lower bound of the continuous index function over ``[l, r]``."""
    if nu_l == nu_r:
        return 0.5 * (z_l + z_r - K[nu_r - 1] * (r - l))
    if nu_l < nu_r:
        y_minus = l + z_l / K[nu_l - 1]
        return z_r - K[nu_r - 1] * (r - y_minus)
    y_plus = r - z_r / K[nu_r - 1]
    return z_l - K[nu_l - 1] * (y_plus - l)


def initial_characteristic(w: WorkingInterval, K: Sequence[float]) -> float:
    return characteristic(w.l, w.r, w.nu_l, w.nu_r, w.z_l, w.z_r, K)


def backward_motion(W: MutableSequence[WorkingInterval], t: int,
                    K: Sequence[float]) -> list[WorkingInterval]:
    """Propagate the cone of ``r_t`` leftwards through the working list.

    Intervals ``i < t`` whose left end still lies under the positive part of
    the cone are deleted from ``W``.  The first surviving interval ``j`` gets
    its right endpoint replaced by the cone value (and the index of ``r_t``)
    when the cone still reaches it (value >= 0) and that lowers its
    characteristic.  Returns the deleted entries; ``W``
    is modified in place, so ``t`` shifts left by their number.
    """
    wt = W[t]
    nu_t = wt.nu_r
    K_t = K[nu_t - 1]
    i = t - 1
    while i >= 0 and wt.z_r - K_t * (wt.r - W[i].l) > 0:
        i -= 1
    if i >= 0:
        wj = W[i]
        z_minus = wt.z_r - K_t * (wt.r - wj.r)
        R_minus = characteristic(wj.l, wj.r, wj.nu_l, nu_t, wj.z_l, z_minus, K)
        if z_minus >= 0 and R_minus < wj.R:
            wj.z_r, wj.nu_r, wj.R = z_minus, nu_t, R_minus
    removed = list(W[i + 1:t])
    del W[i + 1:t]
    return removed


def onward_motion(W: MutableSequence[WorkingInterval], t: int,
                  K: Sequence[float]) -> list[WorkingInterval]:
    """Mirror image of :func:`backward_motion`, driven by the cone of ``l_t``."""
    wt = W[t]
    nu_t = wt.nu_l
    K_t = K[nu_t - 1]
    i = t + 1
    while i < len(W) and wt.z_l - K_t * (W[i].r - wt.l) > 0:
        i += 1
    if i < len(W):
        wj = W[i]
        z_plus = wt.z_l - K_t * (wj.l - wt.l)
        R_plus = characteristic(wj.l, wj.r, nu_t, wj.nu_r, z_plus, wj.z_r, K)
        if z_plus >= 0 and R_plus < wj.R:
            wj.z_l, wj.nu_l, wj.R = z_plus, nu_t, R_plus
    removed = list(W[t + 1:i])
    del W[t + 1:i]
    return removed


def shift_z_on_new_zstar(W: MutableSequence[WorkingInterval], old_zstar: float,
                         new_zstar: float, m: int,
                         skip_x: Optional[float] = None):
    """Re-reference feasible z-values after Z* dropped from ``old_zstar``.

    Characteristics are stale afterwards and must be recomputed by the caller.
    """
    shift = old_zstar - new_zstar
    for w in W:
        if w.nu_l == m + 1 and w.l != skip_x:
            w.z_l += shift
        if w.nu_r == m + 1 and w.r != skip_x:
            w.z_r += shift
    return W


def select_interval(W: Sequence[WorkingInterval]) -> Optional[int]:
    """Leftmost position with the smallest characteristic, ``None`` if ``W`` is empty."""
    best = None
    best_R = float("inf")
    for i, w in enumerate(W):
        if best is None or w.R < best_R:
            best, best_R = i, w.R
    return best


def subdivision_point(w: WorkingInterval, K: Sequence[float]) -> float:
    """New trial point inside ``w``, the minimizer of its cone bound."""
    y_minus, y_plus = aux_points(w, K)
    if w.nu_l == w.nu_r:
        x = 0.5 * (y_minus + y_plus)
    elif w.nu_l < w.nu_r:
        x = 0.5 * (y_minus + w.r)
    else:
        x = 0.5 * (w.l + y_plus)
    if not (w.l < x < w.r):
        raise DegeneracyError(
            f"subdivision point {x!r} not strictly inside [{w.l!r}, {w.r!r}]")
    return x
