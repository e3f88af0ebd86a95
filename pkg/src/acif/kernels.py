"""Grid kernels behind the verification oracle, with backend selection.

The compiled extension ``acif._ckernels`` is used when it was built;
otherwise the NumPy fallback ``acif._pykernels`` is imported.  Setting
``ACIF_KERNELS=python`` forces the fallback.

Cone data layout shared by both backends: trial points ``pts_x`` sorted
ascending, each with a value ``J`` and a slope class ``c``.  For class ``c``
with slope ``k = slopes[c]``::

    pref[c, i] = max(J_p + k * x_p  for p <= i in class c)   (-inf if none)
    suf[c, i]  = max(J_p - k * x_p  for p >= i in class c)   (-inf if none)

so the cone envelope ``max_p (J_p - k_p |x - x_p|)`` is one prefix lookup and
one suffix lookup per class.
"""
from __future__ import annotations

import os

import numpy as np

from . import _pykernels

BACKEND = "python"
_impl = _pykernels
if os.environ.get("ACIF_KERNELS", "").lower() != "python":
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]
        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels


def backends() -> dict:
    """All importable backends by name."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels
        out["cython"] = _ckernels
    except ImportError:
        pass
    return out


def cone_tables(pts_x, values, classes, slopes):
    """Build sorted points and the ``pref``/``suf`` tables described above."""
    pts_x = np.asarray(pts_x, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    classes = np.asarray(classes, dtype=np.int64)
    slopes = np.asarray(slopes, dtype=np.float64)
    order = np.argsort(pts_x, kind="stable")
    pts_x, values, classes = pts_x[order], values[order], classes[order]
    C, n = slopes.shape[0], pts_x.shape[0]
    pref = np.full((C, n), -np.inf)
    suf = np.full((C, n), -np.inf)
    for c in range(C):
        sel = classes == c
        pref[c] = np.where(sel, values + slopes[c] * pts_x, -np.inf)
        suf[c] = np.where(sel, values - slopes[c] * pts_x, -np.inf)
        pref[c] = np.maximum.accumulate(pref[c]) if n else pref[c]
        suf[c] = np.maximum.accumulate(suf[c][::-1])[::-1] if n else suf[c]
    return pts_x, pref, suf, slopes


def cone_envelope(grid_x, pts_x, pref, suf, slopes, impl=None):
    """``max_p (J_p - k_p |x - x_p|)`` at every node of ``grid_x``."""
    return (impl or _impl).cone_envelope(grid_x, pts_x, pref, suf, slopes)


def envelope_interval_minima(grid_x, j_grid, nu_grid, lo, hi, nubar,
                             pts_x, pref, suf, slopes, impl=None):
    """Per interval ``s``, the minimum of ``max(envelope, j_grid)`` over nodes
    ``lo[s] .. hi[s]`` (inclusive) whose ``nu_grid`` is at least ``nubar[s]``;
    ``inf`` when no node qualifies."""
    return (impl or _impl).envelope_interval_minima(
        grid_x, j_grid, nu_grid, lo, hi, nubar, pts_x, pref, suf, slopes)
