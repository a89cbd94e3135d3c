"""Helix axis estimation.

Two estimators:

* :func:`estimate_axis_mh` maximizes the profile likelihood ``MLL(w)``, the
  maximized circular Mardia-Holmes log-likelihood of the data projected onto
  the plane normal to ``w``. The outer search runs over stereographic
  coordinates centred on an initial axis; each outer step runs an inner
  circle fit.
* :func:`optls_fit` is a least-squares helix fit with known turn angle. For
  fixed ``w`` the helix is linear in the remaining parameters, so the
  residual sum of squares is profiled in closed form and only ``w`` is
  searched numerically.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ConvergenceError, DegenerateInputError, DomainError, InitializationError, InputError
from .geometry import (HelixParams, PointCloud, _unit, frame_from_axis, helix_curve,
                       stereographic_to_axis)
from .mh2d import MHCircleParams, MHFit, fit_circle
from .optim import OptOptions, OptResult, minimize

__all__ = [
    "AxisFit",
    "HelixFit",
    "project_to_plane",
    "mll_given_axis",
    "init_axis_pca",
    "estimate_axis_mh",
    "optls_rss",
    "optls_fit",
]

INNER_OPTIONS = OptOptions()
OUTER_OPTIONS = OptOptions(x_tol=1e-9, f_tol=1e-10, max_iters=2000, restarts=2, initial_step=0.05)


@dataclass
class AxisFit:
    w: np.ndarray
    p: np.ndarray
    mll: float
    inner_fit: MHFit
    outer_result: OptResult
    w_init: np.ndarray

    @property
    def converged(self):
        return self.outer_result.converged


@dataclass
class HelixFit:
    params: HelixParams
    rss: float
    converged: bool
    outer_result: OptResult | None = field(default=None, repr=False)
    w_init: np.ndarray | None = None

    @property
    def w(self):
        return self.params.w


def _points(cloud):
    if isinstance(cloud, PointCloud):
        return cloud.points
    return PointCloud(np.asarray(cloud, dtype=float)).points


def project_to_plane(cloud, w) -> np.ndarray:
    """First two coordinates of ``R^T x_i`` with ``R = frame_from_axis(w)``."""
    R = frame_from_axis(w)
    return _points(cloud) @ R[:, :2]


def mll_given_axis(cloud, w, options: OptOptions | None = None,
                   warm_start: MHCircleParams | None = None):
    """Profile log-likelihood ``MLL(w)`` and the inner circle fit."""
    X = _points(cloud)
    if X.shape[0] < 4:
        raise InputError("need at least 4 points")
    y = project_to_plane(X, w)
    fit = fit_circle(y, init=warm_start, options=options or INNER_OPTIONS)
    return fit.mll, fit


def init_axis_pca(cloud, mode: str = "largest") -> np.ndarray:
    """Principal-axis estimate of the helix axis.

    ``mode="largest"`` returns the leading eigenvector of the centred
    covariance (appropriate for long, thin helices). ``mode="isolated"``
    returns the eigenvector whose eigenvalue is farthest, in log ratio, from
    the other two; the two in-plane eigenvalues of a helix are close to
    each other, so this also handles short, wide helices. The sign is chosen
    so the axis points from the first point towards the last.
    """
    X = _points(cloud)
    if X.shape[0] < 3:
        raise InputError("need at least 3 points")
    Xc = X - X.mean(axis=0)
    evals, evecs = np.linalg.eigh(Xc.T @ Xc / X.shape[0])
    if not evals[-1] > 1e-300:
        raise DegenerateInputError("points are coincident")
    if mode == "largest":
        k = 2
    elif mode == "isolated":
        lv = np.log(np.maximum(evals, evals[-1] * 1e-300))
        gap_low = lv[1] - lv[0]
        gap_high = lv[2] - lv[1]
        k = 0 if gap_low > gap_high else 2
    else:
        raise ValueError(f"unknown PCA mode {mode!r}")
    w = evecs[:, k]
    travel = X[-1] - X[0]
    if float(w @ travel) < 0:
        w = -w
    return w / np.linalg.norm(w)


def _principal_axes(X):
    Xc = X - X.mean(axis=0)
    _, evecs = np.linalg.eigh(Xc.T @ Xc)
    return [evecs[:, k] for k in (2, 0, 1)]


def _resolve_init(X, w_init, beta=None):
    if isinstance(w_init, str) and w_init == "pca":
        return init_axis_pca(X)
    if isinstance(w_init, str):
        if w_init == "pca-isolated":
            return init_axis_pca(X, mode="isolated")
        if w_init == "optls":
            if beta is None:
                raise InputError("w_init='optls' needs the turn angle beta")
            return optls_fit(X, beta).params.w
        raise ValueError(f"unknown initializer {w_init!r}")
    return _unit(w_init, "w_init", tol=1e-6)


def estimate_axis_mh(cloud, w_init=None, inner_options: OptOptions | None = None,
                     outer_options: OptOptions | None = None, *, beta=None) -> AxisFit:
    """Maximum profile-likelihood helix axis.

    Parameters
    ----------
    cloud : PointCloud or (n, 3) array
    w_init : array_like or {"pca", "pca-isolated", "optls"}, optional
        Starting axis. By default the search is run from each of the three
        principal axes of the data (each pointing from the first towards
        the last point) and the fit with the largest ``MLL`` is returned;
        ``"pca"`` starts from :func:`init_axis_pca` only. ``"optls"`` needs
        ``beta``.
    inner_options, outer_options : OptOptions, optional
        Nelder-Mead settings for the circle fit and the axis search.

    Notes
    -----
    The data are rotated so that ``w_init`` is the pole, and the candidate
    axis is ``stereographic_to_axis(p)`` in that frame, starting from
    ``p = 0``. That maps to the antipode of the pole, which defines the same
    projection plane and hence the same ``MLL``. The returned axis is
    sign-canonicalized so that ``w . w_init >= 0``. Each inner fit is warm
    started from the best inner optimum found so far.
    """
    X = _points(cloud)
    if X.shape[0] < 4:
        raise InputError("need at least 4 points")
    inner = inner_options or INNER_OPTIONS
    outer = outer_options or OUTER_OPTIONS
    if w_init is None:
        starts = _principal_axes(X)
        for k, ws in enumerate(starts):
            if float(ws @ (X[-1] - X[0])) < 0:
                starts[k] = -ws
    else:
        starts = [_resolve_init(X, w_init, beta)]
    best = None
    for ws in starts:
        fit = _mh_search(X, ws, inner, outer)
        if best is None or fit.mll > best.mll:
            best = fit
    if w_init is None and float(best.w @ (X[-1] - X[0])) < 0:
        # the winning start may sit far from the optimum; orient along travel
        best.w = -best.w
        best.w_init = -best.w_init
    return best


def _mh_search(X, w0, inner, outer):
    R0 = frame_from_axis(w0)
    Xr = (X - X.mean(axis=0)) @ R0

    state = {"warm": None, "best_f": math.inf, "best_fit": None}

    def objective(p):
        wr = stereographic_to_axis(p)
        y = Xr @ frame_from_axis(wr)[:, :2]
        fit = fit_circle(y, init=state["warm"], options=inner)
        f = -fit.mll
        if f < state["best_f"]:
            state["best_f"] = f
            state["best_fit"] = fit
            state["warm"] = fit.params
        return f

    try:
        objective(np.zeros(2))
    except (InputError, ConvergenceError, FloatingPointError) as exc:
        raise InitializationError(f"inner fit failed at the initial axis: {exc}") from exc
    res = minimize(objective, np.zeros(2), outer)
    w = R0 @ stereographic_to_axis(res.x_min)
    w = w / np.linalg.norm(w)
    if float(w @ w0) < 0:
        w = -w
    return AxisFit(w=w, p=np.array(res.x_min), mll=-res.f_min, inner_fit=state["best_fit"],
                   outer_result=res, w_init=w0)


@lru_cache(maxsize=64)
def _optls_bases(n, beta):
    t = beta * np.arange(1, n + 1)
    cos_t, sin_t = np.cos(t), np.sin(t)
    one, zero = np.ones(n), np.zeros(n)
    # [A, B, b1, b2] with A = r cos t0, B = r sin t0
    D12 = np.vstack([
        np.column_stack([cos_t, -sin_t, one, zero]),
        np.column_stack([sin_t, cos_t, zero, one]),
    ])
    D3 = np.column_stack([t, one])
    for D in (D12, D3):
        if np.linalg.matrix_rank(D, tol=1e-10 * np.sqrt(n)) < D.shape[1]:
            raise DomainError(f"singular least-squares design for beta={beta} "
                              "(turn angle a multiple of 2 pi)")
    Q12, R12 = np.linalg.qr(D12)
    Q3, R3 = np.linalg.qr(D3)
    return t, Q12, R12, Q3, R3


def _optls_coords(X, w):
    R = frame_from_axis(w)
    return X @ R, R


def optls_rss(cloud, beta, w) -> float:
    """Least-squares residual of the best helix with axis ``w`` and turn angle ``beta``."""
    X = _points(cloud)
    _, Q12, _, Q3, _ = _optls_bases(X.shape[0], float(beta))
    Z, _ = _optls_coords(X, w)
    return _rss(Z, Q12, Q3)


def _rss(Z, Q12, Q3):
    y12 = np.concatenate([Z[:, 0], Z[:, 1]])
    r12 = y12 - Q12 @ (Q12.T @ y12)
    y3 = Z[:, 2]
    r3 = y3 - Q3 @ (Q3.T @ y3)
    return float(r12 @ r12 + r3 @ r3)


def _optls_search(Xc, beta, w_start, options):
    n = Xc.shape[0]
    _, Q12, _, Q3, _ = _optls_bases(n, beta)
    # The design fixes the sense of rotation about w; pick the orientation
    # of w that matches the data.
    if _rss(Xc @ frame_from_axis(-w_start), Q12, Q3) < _rss(Xc @ frame_from_axis(w_start), Q12, Q3):
        w_start = -w_start
    R0 = frame_from_axis(w_start)
    # stereographic p = 0 is the south pole; flip the frame so that it lands on w_start.
    F = R0 @ np.diag([1.0, -1.0, -1.0])
    Xr = Xc @ F

    def objective(p):
        wr = stereographic_to_axis(p)
        return _rss(Xr @ frame_from_axis(wr), Q12, Q3)

    res = minimize(objective, np.zeros(2), options)
    w = F @ stereographic_to_axis(res.x_min)
    return w / np.linalg.norm(w), res


def optls_fit(cloud, beta: float, w_init=None, options: OptOptions | None = None) -> HelixFit:
    """Least-squares helix fit with known turn angle ``beta``.

    Minimizes ``sum_i |x_i - (r cos(t0 + i beta) u + r sin(t0 + i beta) v
    + c i beta w + b)|^2``. For a fixed axis the problem is linear in
    ``(r cos t0, r sin t0, c, b)`` and is solved exactly by a precomputed QR
    projection; the axis is searched in stereographic coordinates.

    Without ``w_init`` the search is started from each of the three
    principal axes of the data and the lowest residual is kept.
    """
    X = _points(cloud)
    n = X.shape[0]
    if n < 4:
        raise InputError("need at least 4 points")
    beta = float(beta)
    opts = options or OUTER_OPTIONS
    Xc = X - X.mean(axis=0)
    if w_init is None:
        starts = _principal_axes(X)
    else:
        starts = [_resolve_init(X, w_init, beta)]
    best = None
    for ws in starts:
        w, res = _optls_search(Xc, beta, ws, opts)
        if best is None or res.f_min < best[1].f_min:
            best = (w, res, ws)
    w, res, ws = best
    params = _optls_params(X, beta, w)
    rss = helix_rss(X, params)
    return HelixFit(params=params, rss=rss, converged=res.converged, outer_result=res, w_init=ws)


def _optls_params(X, beta, w):
    n = X.shape[0]
    t, Q12, R12, Q3, R3 = _optls_bases(n, beta)
    R = frame_from_axis(w)
    Z = X @ R
    y12 = np.concatenate([Z[:, 0], Z[:, 1]])
    A, B, b1, b2 = np.linalg.solve(R12, Q12.T @ y12)
    c, b3 = np.linalg.solve(R3, Q3.T @ Z[:, 2])
    r = math.hypot(A, B)
    if not r > 0:
        raise DegenerateInputError("fitted helix has zero radius")
    t0 = math.atan2(B, A)
    shift = R @ np.array([b1, b2, b3 - c * t0])
    return HelixParams(r=r, c=float(c), beta=beta, u=R[:, 0], v=R[:, 1], w=R[:, 2],
                       b=shift, t0=t0)


def helix_rss(cloud, params: HelixParams) -> float:
    """Residual sum of squares of ``cloud`` against the helix sampled at ``i * beta``."""
    X = _points(cloud)
    fitted = helix_curve(params, params.beta * np.arange(1, X.shape[0] + 1))
    d = X - fitted
    return float(np.sum(d * d))
