import math

import numpy as np
import pytest
from scipy import integrate

from mhhelix.errors import DegenerateInputError, DomainError, InputError
from mhhelix.mh2d import (KAPPA_MAX, MHCircleParams, MHEllipseParams, fit_circle, fit_ellipse,
                          init_circle, loglik, mh_log_norm_const, mh_logpdf)

# log C(1) from mpmath: log(sqrt(1/2pi) / (pi Phi(1)))
LOG_C1 = -1.89091464003062302640


def _ring(rng, n, a=(0.0, 0.0), rho=1.0, sigma=0.05):
    t = rng.uniform(0, 2 * np.pi, n)
    r = rho + sigma * rng.standard_normal(n)
    return np.column_stack([a[0] + r * np.cos(t), a[1] + r * np.sin(t)])


def test_log_norm_const_reference():
    assert mh_log_norm_const(1.0) == pytest.approx(LOG_C1, rel=1e-13)
    with pytest.raises(DomainError):
        mh_log_norm_const(0.0)


def _radial_mass(params, radius):
    def f(r, th):
        y = np.array([params.a[0] + r * math.cos(th), params.a[1] + r * math.sin(th)])
        return r * math.exp(mh_logpdf(y, params))
    val, _ = integrate.dblquad(f, 0, 2 * math.pi, 0, radius, epsabs=1e-10, epsrel=1e-10)
    return val


@pytest.mark.parametrize("kappa", [1.0, 10.0, 100.0])
def test_density_normalizes(kappa):
    p = MHCircleParams(a=(0.3, -0.2), rho=1.7, kappa=kappa)
    assert abs(_radial_mass(p, 10 * p.rho) - 1.0) < 1e-4


def test_ellipse_density_normalizes():
    p = MHEllipseParams(a=(0.0, 1.0), Sigma=[[2.0, 0.5], [0.5, 1.0]], kappa=5.0)
    L = np.linalg.cholesky(p.Sigma)

    def f(r, th):
        z = np.array([r * math.cos(th), r * math.sin(th)])
        return r * math.exp(mh_logpdf(np.asarray(p.a) + L @ z, p)) * np.linalg.det(L)
    val, _ = integrate.dblquad(f, 0, 2 * math.pi, 0, 10.0, epsabs=1e-10, epsrel=1e-10)
    assert abs(val - 1.0) < 1e-4


def test_mode_on_shell():
    p = MHCircleParams(a=(1.0, 2.0), rho=2.0, kappa=50.0)
    on = mh_logpdf([3.0, 2.0], p)
    assert on > mh_logpdf([3.1, 2.0], p)
    assert on > mh_logpdf([2.9, 2.0], p)
    assert on == pytest.approx(mh_logpdf([1.0, 4.0], p), abs=1e-12)


def test_exact_circle_hits_kappa_cap():
    t = 2 * np.pi * np.arange(12) / 12
    y = np.column_stack([1.0 + 2.3 * np.cos(t), -4.0 + 2.3 * np.sin(t)])
    fit = fit_circle(y)
    assert fit.params.rho == pytest.approx(2.3, rel=1e-7)
    assert np.allclose(fit.params.a, [1.0, -4.0], atol=1e-7)
    assert fit.params.kappa == pytest.approx(KAPPA_MAX, rel=1e-3)
    assert fit.mll == pytest.approx(loglik(y, fit.params), rel=1e-12)


def test_noisy_circle_recovers_parameters(rng):
    y = _ring(rng, 200, a=(2.0, -1.0), rho=1.0, sigma=0.05)
    fit = fit_circle(y)
    assert fit.converged
    assert np.allclose(fit.params.a, [2.0, -1.0], atol=0.02)
    assert fit.params.rho == pytest.approx(1.0, abs=0.02)
    # r^2 - 1 has sd ~ 2 sigma, so kappa ~ 1 / (4 sigma^2) = 100
    assert 60 < fit.params.kappa < 160


def test_fit_maximizes_likelihood(rng):
    y = _ring(rng, 50, rho=3.0, sigma=0.1)
    fit = fit_circle(y)
    p = fit.params
    for da, dr, dk in [(0.01, 0, 0), (0, 0.01, 0), (0, 0, 0.05 * p.kappa), (0, -0.01, 0)]:
        q = MHCircleParams(a=(p.a[0] + da, p.a[1]), rho=p.rho + dr, kappa=p.kappa + dk)
        assert loglik(y, q) <= fit.mll + 1e-9


def test_translation_and_rotation_invariance(rng):
    y = _ring(rng, 40, rho=2.0, sigma=0.1)
    fit = fit_circle(y)
    th = 0.83
    Q = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
    moved = fit_circle(y @ Q.T + [5.0, -3.0])
    assert moved.params.rho == pytest.approx(fit.params.rho, rel=1e-6)
    assert moved.params.kappa == pytest.approx(fit.params.kappa, rel=1e-5)
    assert moved.mll == pytest.approx(fit.mll, abs=1e-6)
    assert np.allclose(moved.params.a, Q @ np.asarray(fit.params.a) + [5.0, -3.0], atol=1e-6)


def test_ellipse_nests_circle(rng):
    y = _ring(rng, 60, rho=1.5, sigma=0.08)
    circ = fit_circle(y)
    ell = fit_ellipse(y)
    assert ell.mll >= circ.mll - 1e-9


def test_exact_ellipse():
    t = 2 * np.pi * np.arange(24) / 24
    y = np.column_stack([2.0 * np.cos(t), 1.0 * np.sin(t)])
    fit = fit_ellipse(y)
    ev = np.sort(np.linalg.eigvalsh(fit.params.Sigma))
    assert np.allclose(ev, [1.0, 4.0], rtol=1e-5)


def test_init_rules(rng):
    y = _ring(rng, 30)
    p = init_circle(y)
    d = np.linalg.norm(y - y.mean(axis=0), axis=1)
    assert p.rho == pytest.approx(d.mean())
    assert p.kappa == pytest.approx(1.0 / np.var(d, ddof=1))


def test_input_errors():
    with pytest.raises(InputError):
        fit_circle(np.zeros((3, 2)))
    with pytest.raises(DegenerateInputError):
        fit_circle(np.ones((5, 2)))
    with pytest.raises(InputError):
        fit_circle(np.zeros((5, 3)))
    with pytest.raises(DomainError):
        MHEllipseParams(a=(0, 0), Sigma=[[1, 2], [2, 1]], kappa=1.0)
