import math

import numpy as np
import pytest
from scipy import integrate

from mhhelix.errors import DomainError, InputError
from mhhelix.mh2d import MHEllipseParams, mh_logpdf
from mhhelix.mvmh import (MvMHParams, mvmh_fit, mvmh_loglik, mvmh_logpdf, mvmh_sample,
                          n_free_params)


def _random_spd(rng, d):
    A = rng.standard_normal((d, d))
    return A @ A.T + 0.5 * np.eye(d)


@pytest.mark.parametrize("d", [2, 3, 4])
@pytest.mark.parametrize("kappa", [1.0, 5.0, 50.0])
def test_density_normalizes(d, kappa, rng):
    p = MvMHParams(mu=rng.standard_normal(d), Sigma=_random_spd(rng, d), kappa=kappa)
    L = np.linalg.cholesky(p.Sigma)
    e = np.zeros(d)
    e[0] = 1.0
    area = 2 * math.pi ** (d / 2) / math.gamma(d / 2)
    det = float(np.prod(np.diag(L)))

    # the density depends on x only through r = |L^{-1}(x - mu)|

    def radial(r):
        return r ** (d - 1) * math.exp(mvmh_logpdf(p.mu + r * (L @ e), p))
    total = sum(integrate.quad(radial, lo, hi, epsabs=1e-13, epsrel=1e-12, limit=200)[0]
                for lo, hi in [(0, 1), (1, 3), (3, np.inf)])
    assert abs(area * det * total - 1.0) < 1e-8


def test_matches_planar_model(rng):
    for _ in range(100):
        S = _random_spd(rng, 2)
        mu = rng.standard_normal(2)
        kappa = float(np.exp(rng.uniform(-2, 6)))
        x = mu + rng.standard_normal(2)
        a = mvmh_logpdf(x, MvMHParams(mu, S, kappa))
        b = mh_logpdf(x, MHEllipseParams(mu, S, kappa))
        assert abs(a - b) < 1e-8


def test_mode_on_shell():
    p = MvMHParams(mu=np.zeros(3), Sigma=np.diag([4.0, 1.0, 1.0]), kappa=20.0)
    on = mvmh_logpdf([2.0, 0.0, 0.0], p)
    assert on == pytest.approx(mvmh_logpdf([0.0, 1.0, 0.0], p), abs=1e-12)
    assert on > mvmh_logpdf([1.9, 0.0, 0.0], p)
    assert on > mvmh_logpdf([2.1, 0.0, 0.0], p)


def test_affine_consistency(rng):
    p = MvMHParams(mu=np.array([1.0, -1.0, 0.5]), Sigma=_random_spd(rng, 3), kappa=7.0)
    A = _random_spd(rng, 3) + rng.standard_normal((3, 3))
    b = rng.standard_normal(3)
    q = MvMHParams(mu=A @ p.mu + b, Sigma=A @ p.Sigma @ A.T, kappa=7.0)
    x = rng.standard_normal((10, 3))
    lhs = mvmh_logpdf(x @ A.T + b, q)
    rhs = mvmh_logpdf(x, p) - math.log(abs(np.linalg.det(A)))
    assert np.allclose(lhs, rhs, atol=1e-10)


def test_sampler_moments():
    # E[r^2] and E[r^4] of the radial law, by quadrature, against samples
    d, kappa = 3, 10.0
    p = MvMHParams(mu=np.zeros(d), Sigma=np.diag([2.0, 1.0, 0.5]), kappa=kappa)
    x = mvmh_sample(p, 40000, rng=1)
    r2 = np.einsum("ij,ij->i", x @ np.linalg.inv(p.Sigma), x)

    def w(r, k):
        return r ** (d - 1 + 2 * k) * math.exp(-0.5 * kappa * (r * r - 1) ** 2)
    m = [integrate.quad(w, 0, np.inf, args=(k,))[0] for k in range(3)]
    se = math.sqrt(m[2] / m[0] - (m[1] / m[0]) ** 2) / math.sqrt(x.shape[0])
    assert abs(r2.mean() - m[1] / m[0]) < 5 * se
    assert np.allclose(x.mean(axis=0), 0.0, atol=0.03)


def test_unit_sphere_fit():
    rng = np.random.default_rng(4)
    u = rng.standard_normal((100, 3))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    fit = mvmh_fit(u)
    assert np.allclose(np.linalg.eigvalsh(fit.params.Sigma), 1.0, atol=1e-5)
    assert np.allclose(fit.params.mu, 0.0, atol=1e-5)
    assert fit.mll == pytest.approx(mvmh_loglik(u, fit.params), rel=1e-10)


def test_sampled_ellipsoid_fit():
    p = MvMHParams(mu=np.array([1.0, 2.0, 3.0]), Sigma=np.diag([4.0, 1.0, 0.25]), kappa=200.0)
    x = mvmh_sample(p, 500, rng=7)
    fit = mvmh_fit(x)
    ev = np.sort(np.linalg.eigvalsh(fit.params.Sigma))
    assert np.allclose(ev, [0.25, 1.0, 4.0], rtol=0.05)
    assert fit.params.kappa == pytest.approx(200.0, rel=0.2)


def test_tied_cylinder_long_axis():
    axis = np.array([1.0, 2.0, 2.0]) / 3.0
    seed = np.array([1.0, 0.0, 0.0])
    u = seed - (seed @ axis) * axis
    u /= np.linalg.norm(u)
    v = np.cross(axis, u)
    Q = np.column_stack([axis, u, v])
    Sigma = Q @ np.diag([9.0, 1.0, 1.0]) @ Q.T
    x = mvmh_sample(MvMHParams(mu=np.zeros(3), Sigma=Sigma, kappa=50.0), 400, rng=3)
    fit = mvmh_fit(x, tie_smallest_two=True)
    ev, vecs = np.linalg.eigh(fit.params.Sigma)
    assert ev[0] == pytest.approx(ev[1], rel=1e-9)
    angle = math.degrees(math.acos(min(1.0, abs(vecs[:, -1] @ axis))))
    assert angle < 2.0
    free = mvmh_fit(x)
    assert free.mll >= fit.mll - 1e-6


def test_validation():
    assert n_free_params(3) == 10
    with pytest.raises(InputError):
        mvmh_fit(np.zeros((5, 3)))
    with pytest.raises(DomainError):
        MvMHParams(mu=np.zeros(2), Sigma=-np.eye(2), kappa=1.0)
    with pytest.raises(InputError):
        mvmh_fit(np.random.default_rng(0).standard_normal((20, 2)), tie_smallest_two=True)
