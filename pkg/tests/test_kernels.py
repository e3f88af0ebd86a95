import numpy as np
import pytest

from acif import kernels

IMPLS = kernels.backends()


def brute_envelope(grid, pts, vals, classes, slopes):
    out = np.full(grid.shape, -np.inf)
    for p, v, c in zip(pts, vals, classes):
        out = np.maximum(out, v - slopes[c] * np.abs(grid - p))
    return out


@pytest.fixture(params=sorted(IMPLS))
def impl(request):
    return IMPLS[request.param]


@pytest.mark.parametrize("seed", range(4))
def test_envelope_matches_brute_force(impl, seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 40))
    pts, vals = rng.uniform(0, 1, n), rng.normal(size=n)
    classes, slopes = rng.integers(0, 3, n), np.array([1.0, 3.0, 7.0])
    grid = np.linspace(0, 1, 5001)
    tables = kernels.cone_tables(pts, vals, classes, slopes)
    got = kernels.cone_envelope(grid, *tables, impl=impl)
    assert np.allclose(got, brute_envelope(grid, pts, vals, classes, slopes), atol=1e-12)


def test_envelope_with_no_points(impl):
    tables = kernels.cone_tables([], [], [], [1.0])
    assert np.all(kernels.cone_envelope(np.linspace(0, 1, 5), *tables, impl=impl) == -np.inf)


@pytest.mark.parametrize("seed", range(4))
def test_interval_minima_match_brute_force(impl, seed):
    rng = np.random.default_rng(seed)
    n = 30
    pts, vals = rng.uniform(0, 1, n), rng.normal(size=n)
    classes, slopes = rng.integers(0, 2, n), np.array([2.0, 5.0])
    grid = np.linspace(0, 1, 2001)
    j_grid = rng.normal(size=grid.size)
    nu_grid = rng.integers(1, 3, grid.size).astype(np.int64)
    lo = np.array([0, 500, 1500, 10, 700], dtype=np.int64)
    hi = np.array([499, 1499, 2000, 9, 700], dtype=np.int64)
    nubar = np.array([1, 2, 1, 1, 2], dtype=np.int64)
    tables = kernels.cone_tables(pts, vals, classes, slopes)
    got = kernels.envelope_interval_minima(grid, j_grid, nu_grid, lo, hi, nubar, *tables,
                                           impl=impl)
    env = np.maximum(brute_envelope(grid, pts, vals, classes, slopes), j_grid)
    for s in range(lo.size):
        sel = np.arange(lo[s], hi[s] + 1)
        sel = sel[nu_grid[sel] >= nubar[s]]
        want = env[sel].min() if sel.size else np.inf
        assert got[s] == pytest.approx(want, abs=1e-12)


def test_backends_agree():
    if "cython" not in IMPLS:
        pytest.skip("compiled kernels not built")
    rng = np.random.default_rng(7)
    pts, vals = rng.uniform(0, 4, 200), rng.normal(size=200)
    classes = rng.integers(0, 4, 200)
    tables = kernels.cone_tables(pts, vals, classes, [18.0, 6.6, 1.2, 4.4])
    grid = np.linspace(0, 4, 100001)
    a = kernels.cone_envelope(grid, *tables, impl=IMPLS["python"])
    b = kernels.cone_envelope(grid, *tables, impl=IMPLS["cython"])
    assert np.array_equal(a, b)


def test_forced_python_backend(monkeypatch):
    import importlib
    monkeypatch.setenv("ACIF_KERNELS", "python")
    mod = importlib.reload(kernels)
    try:
        assert mod.BACKEND == "python"
    finally:
        monkeypatch.delenv("ACIF_KERNELS")
        importlib.reload(kernels)
