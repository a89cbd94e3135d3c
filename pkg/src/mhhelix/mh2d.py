"""Planar Mardia-Holmes model: density, initial estimates and ML fits.

The density concentrates near the ellipse ``(y-a)^T Sigma^{-1} (y-a) = 1``::

    f(y) = C(kappa) |Sigma|^{-1/2} exp(-kappa/2 [(y-a)^T Sigma^{-1} (y-a) - 1]^2)
    C(kappa) = sqrt(kappa / 2pi) / (pi Phi(sqrt kappa))

The circle case is ``Sigma = rho^2 I``. Fits work in the unconstrained
coordinates ``log rho`` / ``log kappa`` (and a log-Cholesky factor of
``Sigma`` for ellipses).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DegenerateInputError, DomainError, InputError
from .optim import OptOptions, OptResult, minimize
from .specfun import log_std_normal_cdf

__all__ = [
    "KAPPA_MAX",
    "MHCircleParams",
    "MHEllipseParams",
    "MHFit",
    "mh_log_norm_const",
    "mh_logpdf",
    "loglik",
    "init_circle",
    "fit_circle",
    "fit_ellipse",
]

KAPPA_MAX = kernels.KAPPA_MAX
_LOG_KAPPA_MAX = math.log(KAPPA_MAX)


@dataclass(frozen=True)
class MHCircleParams:
    a: tuple
    rho: float
    kappa: float

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(v) for v in np.asarray(self.a).reshape(2)))
        if not self.rho > 0:
            raise DomainError(f"rho must be positive, got {self.rho}")
        if not self.kappa > 0:
            raise DomainError(f"kappa must be positive, got {self.kappa}")

    @property
    def Sigma(self):
        return self.rho ** 2 * np.eye(2)


@dataclass(frozen=True)
class MHEllipseParams:
    a: tuple
    Sigma: np.ndarray
    kappa: float

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(v) for v in np.asarray(self.a).reshape(2)))
        S = np.array(self.Sigma, dtype=float).reshape(2, 2)
        if abs(S[0, 1] - S[1, 0]) > 1e-12 * max(1.0, np.abs(S).max()):
            raise DomainError("Sigma must be symmetric")
        S = 0.5 * (S + S.T)
        if np.linalg.eigvalsh(S).min() <= 0:
            raise DomainError("Sigma must be positive definite")
        object.__setattr__(self, "Sigma", S)
        if not self.kappa > 0:
            raise DomainError(f"kappa must be positive, got {self.kappa}")


@dataclass
class MHFit:
    params: MHCircleParams | MHEllipseParams
    mll: float
    converged: bool
    iterations: int
    init_used: dict = field(default_factory=dict)
    evaluations: int = 0


def mh_log_norm_const(kappa: float) -> float:
    """``log C(kappa) = log sqrt(kappa/2pi) - log pi - log Phi(sqrt kappa)``."""
    kappa = float(kappa)
    if not (kappa > 0 and math.isfinite(kappa)):
        raise DomainError(f"kappa must be positive and finite, got {kappa}")
    return (0.5 * math.log(kappa / (2.0 * math.pi)) - math.log(math.pi)
            - log_std_normal_cdf(math.sqrt(kappa)))


def _quad_form(y, params):
    y = np.asarray(y, dtype=float)
    d = y - np.asarray(params.a)
    if isinstance(params, MHCircleParams):
        return np.sum(d * d, axis=-1) / params.rho ** 2, 2.0 * math.log(params.rho)
    S = params.Sigma
    try:
        L = np.linalg.cholesky(S)
    except np.linalg.LinAlgError:
        raise DomainError("Sigma is singular") from None
    z = np.linalg.solve(L, d.reshape(-1, 2).T).T
    q = np.sum(z * z, axis=-1).reshape(d.shape[:-1])
    return q, float(np.sum(np.log(np.diag(L))))


def mh_logpdf(y, params):
    """Log-density at a point (or array of points, last axis of length 2)."""
    q, half_logdet = _quad_form(y, params)
    out = mh_log_norm_const(params.kappa) - half_logdet - 0.5 * params.kappa * (q - 1.0) ** 2
    return float(out) if np.ndim(out) == 0 else out


def loglik(data, params) -> float:
    """Summed log-likelihood of an ``(n, 2)`` data array."""
    return float(np.sum(mh_logpdf(_as_planar(data), params)))


def _as_planar(data, min_n=1):
    y = np.asarray(data, dtype=float)
    if y.ndim != 2 or y.shape[1] != 2:
        raise InputError(f"planar data must be an (n, 2) array, got shape {y.shape}")
    if y.shape[0] < min_n:
        raise InputError(f"need at least {min_n} points, got {y.shape[0]}")
    if not np.all(np.isfinite(y)):
        raise InputError("planar data contains non-finite values")
    return y


def init_circle(data) -> MHCircleParams:
    """Moment-style starting values.

    Centre is the data mean, radius the mean distance from it, and
    concentration the reciprocal of the (n-1)-divisor variance of those
    distances, capped at ``KAPPA_MAX``.
    """
    y = _as_planar(data, min_n=4)
    a = y.mean(axis=0)
    dist = np.linalg.norm(y - a, axis=1)
    rho = float(dist.mean())
    if not rho > 0:
        raise DegenerateInputError("all points coincide")
    var = float(np.var(dist, ddof=1))
    kappa = KAPPA_MAX if var <= 1.0 / KAPPA_MAX else 1.0 / var
    return MHCircleParams(a=a, rho=rho, kappa=kappa)


def fit_circle(data, init: MHCircleParams | None = None,
               options: OptOptions | None = None) -> MHFit:
    """Maximum-likelihood fit of the circular model.

    Optimizes ``(a1, a2, log rho, log kappa)`` with Nelder-Mead on the
    negated summed log-likelihood; the concentration is bounded by
    ``KAPPA_MAX`` (reached on exact circle data). The data are centred
    internally, so translating the data translates the fit exactly.
    """
    y = _as_planar(data, min_n=4)
    opts = options or OptOptions()
    base = init_circle(y)  # also validates degeneracy
    start = init or base
    origin = y.mean(axis=0)
    yc = np.ascontiguousarray(y - origin)
    x0 = np.array([start.a[0] - origin[0], start.a[1] - origin[1],
                   math.log(start.rho), min(math.log(start.kappa), _LOG_KAPPA_MAX)])
    if init is not None and not math.isfinite(kernels.circle_nll(yc, x0)):
        start = base
        x0 = np.array([0.0, 0.0, math.log(base.rho), min(math.log(base.kappa), _LOG_KAPPA_MAX)])
    x, f, iters, evals, conv = kernels.fit_circle_nm(
        yc, x0, opts.x_tol, opts.f_tol, opts.max_iters, opts.restarts, opts.initial_step)
    params = MHCircleParams(a=(x[0] + origin[0], x[1] + origin[1]),
                            rho=math.exp(x[2]), kappa=math.exp(x[3]))
    init_used = {"a": list(start.a), "rho": start.rho, "kappa": start.kappa}
    return MHFit(params=params, mll=-f, converged=conv, iterations=iters,
                 init_used=init_used, evaluations=evals)


def _ellipse_unpack(theta):
    a = theta[:2]
    L = np.array([[math.exp(theta[2]), 0.0], [theta[3], math.exp(theta[4])]])
    return a, L, theta[5]


def _ellipse_nll(yc, theta):
    a, L, eta = _ellipse_unpack(theta)
    if not eta <= _LOG_KAPPA_MAX:
        return math.inf
    kappa = math.exp(eta)
    d = yc - a
    # L^{-1} d for lower-triangular L
    z1 = d[:, 0] / L[0, 0]
    z2 = (d[:, 1] - L[1, 0] * z1) / L[1, 1]
    e = z1 * z1 + z2 * z2 - 1.0
    n = yc.shape[0]
    return -(n * (kernels.log_norm_const(kappa) - theta[2] - theta[4])
             - 0.5 * kappa * float(e @ e))


def fit_ellipse(data, init: MHEllipseParams | None = None,
                options: OptOptions | None = None) -> MHFit:
    """Maximum-likelihood fit of the general-ellipse model.

    ``Sigma = L L^T`` with ``L`` lower triangular and log-transformed
    diagonal. Defaults to starting from the circle fit.
    """
    y = _as_planar(data, min_n=6)
    opts = options or OptOptions()
    origin = y.mean(axis=0)
    yc = y - origin
    if init is None:
        circ = fit_circle(y, options=opts)
        a0 = np.asarray(circ.params.a) - origin
        L0 = circ.params.rho * np.eye(2)
        k0 = circ.params.kappa
        init_used = {"from": "circle", "a": list(circ.params.a), "rho": circ.params.rho,
                     "kappa": k0}
    else:
        a0 = np.asarray(init.a) - origin
        L0 = np.linalg.cholesky(init.Sigma)
        k0 = init.kappa
        init_used = {"a": list(init.a), "Sigma": init.Sigma.tolist(), "kappa": k0}
    x0 = np.array([a0[0], a0[1], math.log(L0[0, 0]), L0[1, 0], math.log(L0[1, 1]),
                   min(math.log(k0), _LOG_KAPPA_MAX)])
    res: OptResult = minimize(lambda th: _ellipse_nll(yc, th), x0, opts)
    a, L, eta = _ellipse_unpack(res.x_min)
    params = MHEllipseParams(a=a + origin, Sigma=L @ L.T, kappa=math.exp(eta))
    return MHFit(params=params, mll=-res.f_min, converged=res.converged,
                 iterations=res.iterations, init_used=init_used, evaluations=res.evaluations)
