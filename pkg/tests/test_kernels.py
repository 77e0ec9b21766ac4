"""Backend equivalence: the compiled kernels must reproduce the reference."""

import numpy as np
import pytest

from ekwaves import kernels

compiled = kernels.compiled()
ref = kernels.reference()

pytestmark = pytest.mark.skipif(compiled is None,
                                reason="Cython backend not built")


def _fields(n, seed=0):
    rng = np.random.default_rng(seed)
    rho = 1.0 + 0.2 * rng.standard_normal(n)
    v = 0.3 * rng.standard_normal(n)
    r = rng.standard_normal(n)
    u = rng.standard_normal(n)
    return rho, v, r, u


@pytest.mark.parametrize("n", [16, 257, 1024])
@pytest.mark.parametrize("order", [2, 4])
@pytest.mark.parametrize("periodic", [True, False])
def test_diff1_equivalence(n, order, periodic):
    rng = np.random.default_rng(n + order)
    f = rng.standard_normal(n)
    a = ref.diff1(f, 0.03, order, periodic)
    b = compiled.diff1(f, 0.03, order, periodic)
    np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-12)


@pytest.mark.parametrize("order", [2, 4])
@pytest.mark.parametrize("periodic", [True, False])
def test_composite_kernels_equivalence(order, periodic):
    n, h = 513, 0.05
    rho, v, r, u = _fields(n, seed=order)
    g = rho - 1.0
    K = 1.0 / rho
    K1 = -1.0 / rho ** 2
    w0 = 1.0 + 0.1 * r
    w1 = 0.05 * u

    for fa, fb, args in [
        (ref.ek_rhs, compiled.ek_rhs, (rho, v, g, K, K1, h, order, periodic)),
        (ref.gauge_rhs, compiled.gauge_rhs, (rho, r, u, g, K, h, order, periodic)),
        (ref.apply_d2h, compiled.apply_d2h,
         (w0, w1, K, v, rho, r, u, h, order, periodic)),
        (ref.lin_rhs, compiled.lin_rhs,
         (w0, w1, K, v, rho, 0.7, r, u, h, order, periodic)),
    ]:
        for x, y in zip(fa(*args), fb(*args)):
            np.testing.assert_allclose(x, y, rtol=1e-12, atol=1e-11)


def test_lin_rhs_zero_shift_equivalence():
    n, h = 257, 0.05
    rho, v, r, u = _fields(n, seed=9)
    K = 1.0 / rho
    w0 = np.ones(n)
    w1 = 0.1 * v
    a = ref.lin_rhs(w0, w1, K, v, rho, 0.0, r, u, h, 4, True)
    b = compiled.lin_rhs(w0, w1, K, v, rho, 0.0, r, u, h, 4, True)
    for x, y in zip(a, b):
        np.testing.assert_allclose(x, y, rtol=1e-13, atol=1e-12)


def test_interp4_equivalence_and_nodes():
    rng = np.random.default_rng(3)
    table = np.cumsum(rng.standard_normal(200)) * 0.1
    xs = np.concatenate([rng.uniform(-3.0, 25.0, 500),
                         2.0 + 0.1 * np.arange(200)])
    a = ref.interp4(table, 2.0, 0.1, xs, -7.0, 7.0)
    b = compiled.interp4(table, 2.0, 0.1, xs, -7.0, 7.0)
    np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-13)
    # exact at nodes, fills outside
    np.testing.assert_allclose(a[500:], table, rtol=0, atol=1e-12)
    assert np.all(a[xs < 2.0] == -7.0)
    assert np.all(a[xs > 2.0 + 0.1 * 199] == 7.0)


def test_interp4_cubic_accuracy():
    xs = np.linspace(0.05, 9.95, 777)
    table_x = np.arange(0.0, 10.001, 0.05)
    table = np.sin(table_x)
    out = kernels.interp4(table, 0.0, 0.05, xs, 0.0, 0.0)
    assert np.max(np.abs(out - np.sin(xs))) < 5e-7
