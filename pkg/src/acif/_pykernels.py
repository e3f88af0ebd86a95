"""NumPy implementations of the grid kernels (fallback for ``_ckernels``).

Both modules share the signature conventions documented in
:mod:`acif.kernels`.
"""
import numpy as np


def _padded(pref, suf):
    C = pref.shape[0]
    ninf = np.full((C, 1), -np.inf)
    return np.hstack([ninf, pref]), np.hstack([suf, ninf])


def _envelope_at(xs, pts_x, prefp, sufp, slopes):
    # prefp[:, p + 1] covers points <= x, sufp[:, p + 1] covers points > x
    pos = np.searchsorted(pts_x, xs, side="right")
    env = np.full(xs.shape, -np.inf)
    for c in range(slopes.shape[0]):
        k = slopes[c]
        np.maximum(env, prefp[c, pos] - k * xs, out=env)
        np.maximum(env, sufp[c, pos] + k * xs, out=env)
    return env


def cone_envelope(grid_x, pts_x, pref, suf, slopes):
    grid_x = np.asarray(grid_x, dtype=np.float64)
    prefp, sufp = _padded(np.asarray(pref, np.float64), np.asarray(suf, np.float64))
    return _envelope_at(grid_x, np.asarray(pts_x, np.float64), prefp, sufp,
                        np.asarray(slopes, np.float64))


def envelope_interval_minima(grid_x, j_grid, nu_grid, lo, hi, nubar,
                             pts_x, pref, suf, slopes):
    lo = np.asarray(lo, dtype=np.int64)
    hi = np.asarray(hi, dtype=np.int64)
    nubar = np.asarray(nubar, dtype=np.int64)
    out = np.full(lo.shape[0], np.inf)
    keep = np.flatnonzero(hi >= lo)
    if keep.size == 0:
        return out
    lengths = hi[keep] - lo[keep] + 1
    starts = np.concatenate([[0], np.cumsum(lengths)[:-1]])
    # node indices of all kept intervals, concatenated
    idx = np.repeat(lo[keep] - starts, lengths) + np.arange(lengths.sum())
    xs = grid_x[idx]
    prefp, sufp = _padded(np.asarray(pref, np.float64), np.asarray(suf, np.float64))
    c = _envelope_at(xs, np.asarray(pts_x, np.float64), prefp, sufp,
                     np.asarray(slopes, np.float64))
    np.maximum(c, j_grid[idx], out=c)
    c[nu_grid[idx] < np.repeat(nubar[keep], lengths)] = np.inf
    out[keep] = np.minimum.reduceat(c, starts)
    return out
