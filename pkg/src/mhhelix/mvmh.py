"""d-dimensional Mardia-Holmes model concentrated near an ellipsoid.

    f(x) = C(kappa) |Sigma|^{-1/2} exp(-kappa/2 (r^2 - 1)^2),
    r^2 = (x - mu)^T Sigma^{-1} (x - mu),
    C(kappa) = Gamma(d/2) / (2 pi^{d/2} b(kappa, d)).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import expm

from .errors import DomainError, InputError
from .mh2d import KAPPA_MAX
from .optim import OptOptions, minimize
from .specfun import log_b_kappa

__all__ = [
    "MvMHParams",
    "MvMHFit",
    "mvmh_log_norm_const",
    "mvmh_logpdf",
    "mvmh_loglik",
    "mvmh_fit",
    "mvmh_sample",
    "n_free_params",
]

_LOG_KAPPA_MAX = math.log(KAPPA_MAX)


@dataclass(frozen=True)
class MvMHParams:
    mu: np.ndarray
    Sigma: np.ndarray
    kappa: float

    def __post_init__(self):
        mu = np.array(self.mu, dtype=float).ravel()
        d = mu.size
        if d < 2:
            raise DomainError("dimension must be at least 2")
        S = np.array(self.Sigma, dtype=float)
        if S.shape != (d, d):
            raise DomainError(f"Sigma must be {d}x{d}, got {S.shape}")
        if np.max(np.abs(S - S.T)) > 1e-12 * max(1.0, np.abs(S).max()):
            raise DomainError("Sigma must be symmetric")
        S = 0.5 * (S + S.T)
        if np.linalg.eigvalsh(S).min() <= 0:
            raise DomainError("Sigma must be positive definite")
        if not self.kappa > 0:
            raise DomainError(f"kappa must be positive, got {self.kappa}")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "Sigma", S)

    @property
    def d(self) -> int:
        return self.mu.size


@dataclass
class MvMHFit:
    params: MvMHParams
    mll: float
    converged: bool
    iterations: int
    evaluations: int = 0
    tied: bool = False


@lru_cache(maxsize=4096)
def mvmh_log_norm_const(kappa: float, d: int) -> float:
    """``log C(kappa)`` for dimension ``d``."""
    return (math.lgamma(0.5 * d) - math.log(2.0) - 0.5 * d * math.log(math.pi)
            - log_b_kappa(kappa, d))


def _quad_form(x, mu, Sigma):
    try:
        L = np.linalg.cholesky(Sigma)
    except np.linalg.LinAlgError:
        raise DomainError("Sigma is singular") from None
    x = np.asarray(x, dtype=float)
    diff = (x - mu).reshape(-1, mu.size)
    z = np.linalg.solve(L, diff.T)
    r2 = np.sum(z * z, axis=0).reshape(x.shape[:-1])
    return r2, float(np.sum(np.log(np.diag(L))))


def mvmh_logpdf(x, params: MvMHParams):
    """Log-density at one point or along the last axis of an array."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != params.d:
        raise InputError(f"points must have {params.d} coordinates")
    r2, half_logdet = _quad_form(x, params.mu, params.Sigma)
    out = (mvmh_log_norm_const(float(params.kappa), params.d) - half_logdet
           - 0.5 * params.kappa * (r2 - 1.0) ** 2)
    return float(out) if np.ndim(out) == 0 else out


def mvmh_loglik(data, params: MvMHParams) -> float:
    return float(np.sum(mvmh_logpdf(np.asarray(data, dtype=float), params)))


def n_free_params(d: int) -> int:
    return d * (d + 1) // 2 + d + 1


def _skew(vals, d):
    S = np.zeros((d, d))
    S[np.triu_indices(d, 1)] = vals
    return S - S.T


class _Cholesky:
    """``Sigma = L L^T``, lower-triangular ``L`` with logged diagonal."""

    def __init__(self, d):
        self.d = d
        self.rows, self.cols = np.tril_indices(d)
        self.diag = self.rows == self.cols
        self.size = self.rows.size

    def pack(self, Sigma):
        L = np.linalg.cholesky(Sigma)
        v = L[self.rows, self.cols].copy()
        v[self.diag] = np.log(v[self.diag])
        return v

    def factor(self, v):
        L = np.zeros((self.d, self.d))
        vals = np.where(self.diag, np.exp(v), v)
        L[self.rows, self.cols] = vals
        return L


class _TiedEigen:
    """``Sigma = Q diag(e^l) Q^T`` with the last two log-eigenvalues shared.

    ``Q = Q0 expm(S)`` for a skew-symmetric ``S``; ``Q0`` holds the initial
    eigenvectors ordered largest first.
    """

    def __init__(self, d, Q0):
        self.d = d
        self.Q0 = Q0
        self.n_rot = d * (d - 1) // 2
        self.size = self.n_rot + d - 1

    def pack(self, eigvals):
        lv = np.log(eigvals)
        return np.concatenate([np.zeros(self.n_rot), lv[: self.d - 2],
                               [0.5 * (lv[-2] + lv[-1])]])

    def frame(self, v):
        return self.Q0 @ expm(_skew(v[: self.n_rot], self.d))

    def factor(self, v):
        Q = self.frame(v)
        lv = np.concatenate([v[self.n_rot:], [v[-1]]])
        return Q * np.exp(0.5 * lv)


def _init_params(X):
    mu = X.mean(axis=0)
    S = np.cov(X, rowvar=False)
    diff = X - mu
    q = np.einsum("ij,ij->i", diff @ np.linalg.inv(S), diff)
    # rescale the sample covariance so that the mean quadratic form is 1
    Sigma = S * q.mean()
    r2 = q / q.mean()
    var = float(np.var(r2, ddof=1))
    kappa = KAPPA_MAX if var <= 1.0 / KAPPA_MAX else 1.0 / var
    return MvMHParams(mu=mu, Sigma=Sigma, kappa=kappa)


def mvmh_fit(data, init: MvMHParams | None = None, options: OptOptions | None = None,
             *, tie_smallest_two: bool = False) -> MvMHFit:
    """Maximum-likelihood ellipsoid fit.

    ``Sigma`` is parameterized by its log-Cholesky factor, or, with
    ``tie_smallest_two``, by an orthonormal frame and log-eigenvalues in
    which the two smallest are forced equal (a right circular cylinder-like
    shell whose long axis is the untied eigenvector).
    """
    X = np.asarray(data, dtype=float)
    if X.ndim != 2 or X.shape[1] < 2:
        raise InputError(f"data must be an (n, d) array with d >= 2, got shape {X.shape}")
    n, d = X.shape
    if n < n_free_params(d):
        raise InputError(f"need at least {n_free_params(d)} points in dimension {d}, got {n}")
    if not np.all(np.isfinite(X)):
        raise InputError("data contain non-finite values")
    opts = options or OptOptions(max_iters=20000)
    start = init or _init_params(X)
    origin = X.mean(axis=0)
    Xc = X - origin

    if tie_smallest_two:
        if d < 3:
            raise InputError("tying the two smallest eigenvalues needs d >= 3")
        evals, evecs = np.linalg.eigh(start.Sigma)
        order = np.argsort(evals)[::-1]
        Q0 = evecs[:, order]
        if np.linalg.det(Q0) < 0:
            Q0[:, -1] = -Q0[:, -1]
        param = _TiedEigen(d, Q0)
        shape0 = param.pack(evals[order])
    else:
        param = _Cholesky(d)
        shape0 = param.pack(start.Sigma)

    def unpack(theta):
        return theta[:d], param.factor(theta[d:-1]), theta[-1]

    def nll(theta):
        mu, L, eta = unpack(theta)
        if not eta <= _LOG_KAPPA_MAX:
            return math.inf
        kappa = math.exp(eta)
        try:
            z = np.linalg.solve(L, (Xc - mu).T)
        except np.linalg.LinAlgError:
            return math.inf
        e = np.sum(z * z, axis=0) - 1.0
        logdet = float(np.sum(np.log(np.abs(np.diag(L))))) if not tie_smallest_two else \
            0.5 * float(np.sum(theta[d + param.n_rot:-1])) + 0.5 * float(theta[-2])
        return -(n * (mvmh_log_norm_const(kappa, d) - logdet) - 0.5 * kappa * float(e @ e))

    x0 = np.concatenate([start.mu - origin, shape0, [min(math.log(start.kappa), _LOG_KAPPA_MAX)]])
    res = minimize(nll, x0, opts)
    mu, L, eta = unpack(res.x_min)
    Sigma = L @ L.T
    params = MvMHParams(mu=mu + origin, Sigma=0.5 * (Sigma + Sigma.T), kappa=math.exp(eta))
    return MvMHFit(params=params, mll=-res.f_min, converged=res.converged,
                   iterations=res.iterations, evaluations=res.evaluations,
                   tied=tie_smallest_two)


def _sample_r2(kappa, d, size, rng):
    """Draw ``t = r^2`` from the density proportional to
    ``t^(d/2-1) exp(-kappa (t-1)^2 / 2)`` on ``t > 0`` by rejection from a
    normal envelope centred at the mode."""
    alpha = 0.5 * d - 1.0

    def logf(t):
        with np.errstate(divide="ignore", invalid="ignore"):
            out = alpha * np.log(t) - 0.5 * kappa * (t - 1.0) ** 2
        return np.where(t > 0, out, -np.inf)

    # mode: alpha / t = kappa (t - 1)
    mode = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * alpha / kappa)) if alpha > 0 else 1.0
    curv = kappa + (alpha / mode ** 2 if alpha > 0 else 0.0)
    scale = 1.5 / math.sqrt(curv)

    grid = np.linspace(max(1e-12, mode - 40 * scale), mode + 40 * scale, 20001)
    log_ratio = logf(grid) + 0.5 * ((grid - mode) / scale) ** 2
    log_m = float(np.max(log_ratio)) + 1e-3
    out = np.empty(0)
    while out.size < size:
        m = 2 * (size - out.size) + 16
        t = mode + scale * rng.standard_normal(m)
        log_acc = logf(t) + 0.5 * ((t - mode) / scale) ** 2 - log_m
        keep = np.log(rng.uniform(size=m)) < log_acc
        out = np.concatenate([out, t[keep]])
    return out[:size]


def mvmh_sample(params: MvMHParams, size: int, rng=None) -> np.ndarray:
    """Random draws from the model, shape ``(size, d)``."""
    rng = np.random.default_rng(rng)
    d = params.d
    t = _sample_r2(float(params.kappa), d, size, rng)
    u = rng.standard_normal((size, d))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    L = np.linalg.cholesky(params.Sigma)
    return params.mu + (np.sqrt(t)[:, None] * u) @ L.T
