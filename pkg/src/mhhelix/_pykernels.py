"""Pure-Python implementations of the hot kernels.

Mirrors ``_ckernels.pyx`` operation for operation; used when the compiled
extension is unavailable or ``MHHELIX_PURE_PYTHON=1`` is set.
"""
import math

import numpy as np

from .optim import OptOptions, minimize

KAPPA_MAX = 1e8
ETA_MAX = math.log(KAPPA_MAX)
_LOG_2PI = math.log(2.0 * math.pi)
_LOG_PI = math.log(math.pi)
_SQRT2 = math.sqrt(2.0)


def log_norm_const(kappa):
    """log C(kappa) of the planar model for kappa > 0."""
    return (0.5 * (math.log(kappa) - _LOG_2PI) - _LOG_PI
            - math.log1p(-0.5 * math.erfc(math.sqrt(kappa) / _SQRT2)))


def _nll_rows(rows, a1, a2, tau, eta):
    if not eta <= ETA_MAX:
        return math.inf
    kappa = math.exp(eta)
    inv_rho2 = math.exp(-2.0 * tau)
    acc = 0.0
    for y1, y2 in rows:
        d1 = y1 - a1
        d2 = y2 - a2
        e = (d1 * d1 + d2 * d2) * inv_rho2 - 1.0
        acc += e * e
    v = -(len(rows) * (log_norm_const(kappa) - 2.0 * tau) - 0.5 * kappa * acc)
    return v if math.isfinite(v) else math.inf


def circle_nll(y, theta):
    """Negative circular log-likelihood at ``theta = (a1, a2, log rho, log kappa)``.

    Returns ``inf`` above the concentration cap ``KAPPA_MAX``.
    """
    rows = [tuple(r) for r in np.asarray(y, dtype=float).tolist()]
    return _nll_rows(rows, *(float(t) for t in theta))


def fit_circle_nm(y, x0, x_tol, f_tol, max_iters, restarts, initial_step):
    """Minimize :func:`circle_nll` over its four parameters.

    Returns ``(x, f, iterations, evaluations, converged)``.
    """
    rows = [tuple(r) for r in np.asarray(y, dtype=float).tolist()]
    opts = OptOptions(x_tol=x_tol, f_tol=f_tol, max_iters=max_iters,
                      restarts=restarts, initial_step=initial_step)
    res = minimize(lambda th: _nll_rows(rows, float(th[0]), float(th[1]), float(th[2]), float(th[3])),
                   np.asarray(x0, dtype=float), opts)
    return res.x_min, res.f_min, res.iterations, res.evaluations, res.converged
