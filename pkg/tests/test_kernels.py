import numpy as np
import pytest

from mhhelix import _pykernels, kernels


def _ring(rng, n=20, rho=3.0, noise=0.05):
    t = rng.uniform(0, 2 * np.pi, n)
    r = rho + noise * rng.standard_normal(n)
    return np.column_stack([1.0 + r * np.cos(t), -2.0 + r * np.sin(t)])


def test_backend_reported():
    assert kernels.BACKEND in kernels.available_backends()


@pytest.mark.skipif("cython" not in kernels.available_backends(),
                    reason="compiled kernels not built")
def test_compiled_matches_python(rng):
    from mhhelix import _ckernels
    for _ in range(5):
        y = _ring(rng)
        y = y - y.mean(axis=0)
        x0 = np.array([0.1, -0.1, np.log(2.5), np.log(50.0)])
        theta = x0 + 0.05 * rng.standard_normal(4)
        assert _ckernels.circle_nll(y, theta) == _pykernels.circle_nll(y, theta)
        args = (1e-8, 1e-10, 2000, 2, 0.1)
        c = _ckernels.fit_circle_nm(y, x0, *args)
        p = _pykernels.fit_circle_nm(y, x0, *args)
        assert np.array_equal(np.asarray(c[0]), np.asarray(p[0]))
        assert c[1:] == p[1:]
    for kappa in [0.3, 1.0, 1e3, 1e8]:
        assert _ckernels.log_norm_const(kappa) == pytest.approx(_pykernels.log_norm_const(kappa),
                                                                rel=1e-15)


def test_kappa_barrier(rng):
    y = _ring(rng)
    assert kernels.circle_nll(y, np.array([0, 0, 1.0, kernels.ETA_MAX + 1e-6])) == np.inf
