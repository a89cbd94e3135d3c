# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: circular Mardia-Holmes likelihood and its
Nelder-Mead fit. Operation order matches ``_pykernels.py``."""
from libc.math cimport exp, log, log1p, erfc, sqrt, fabs, isfinite, INFINITY, M_PI
from libc.stdlib cimport malloc, free

import numpy as np

cdef double KAPPA_MAX_C = 1e8
cdef double ETA_MAX_C = log(1e8)
cdef double LOG_2PI = log(2.0 * M_PI)
cdef double LOG_PI = log(M_PI)
cdef double SQRT2 = sqrt(2.0)

KAPPA_MAX = KAPPA_MAX_C
ETA_MAX = ETA_MAX_C


cdef inline double _log_norm_const(double kappa) nogil:
    return (0.5 * (log(kappa) - LOG_2PI) - LOG_PI
            - log1p(-0.5 * erfc(sqrt(kappa) / SQRT2)))


def log_norm_const(double kappa):
    return _log_norm_const(kappa)


cdef double _nll(const double[:, ::1] y, const double* th) nogil:
    cdef double a1 = th[0], a2 = th[1], tau = th[2], eta = th[3]
    cdef double kappa, inv_rho2, acc, d1, d2, e, v
    cdef Py_ssize_t i, n = y.shape[0]
    if not eta <= ETA_MAX_C:
        return INFINITY
    kappa = exp(eta)
    inv_rho2 = exp(-2.0 * tau)
    acc = 0.0
    for i in range(n):
        d1 = y[i, 0] - a1
        d2 = y[i, 1] - a2
        e = (d1 * d1 + d2 * d2) * inv_rho2 - 1.0
        acc += e * e
    v = -(<double>n * (_log_norm_const(kappa) - 2.0 * tau) - 0.5 * kappa * acc)
    if not isfinite(v):
        return INFINITY
    return v


def circle_nll(y, theta):
    cdef const double[:, ::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef double th[4]
    cdef int j
    for j in range(4):
        th[j] = float(theta[j])
    return _nll(yv, th)


cdef void _sort(double* sim, double* fs, int m, int dim, double* tmpx) nogil:
    # Stable insertion sort of the m vertices by value.
    cdef int i, k, j
    cdef double fv
    for i in range(1, m):
        fv = fs[i]
        for j in range(dim):
            tmpx[j] = sim[i * dim + j]
        k = i - 1
        while k >= 0 and fs[k] > fv:
            fs[k + 1] = fs[k]
            for j in range(dim):
                sim[(k + 1) * dim + j] = sim[k * dim + j]
            k -= 1
        fs[k + 1] = fv
        for j in range(dim):
            sim[(k + 1) * dim + j] = tmpx[j]


cdef int _run(const double[:, ::1] y, double* x0, double f0, double x_tol, double f_tol,
              int max_iters, double step, double* sim, double* fs, double* work,
              int* iters_out, long* evals_out) nogil:
    """One Nelder-Mead pass; best vertex ends in sim[0:4], fs[0]. Returns converged."""
    cdef int dim = 4, m = 5
    cdef int j, k, iters = 0, shrink, converged = 0
    cdef long evals = 0
    cdef double* c = work
    cdef double* xr = work + dim
    cdef double* xe = work + 2 * dim
    cdef double* xc = work + 3 * dim
    cdef double* tmpx = work + 4 * dim
    cdef double fr, fe, fc, diam, dd, spread
    for j in range(dim):
        sim[j] = x0[j]
    fs[0] = f0
    for k in range(dim):
        for j in range(dim):
            sim[(k + 1) * dim + j] = x0[j]
        sim[(k + 1) * dim + k] += step
        fs[k + 1] = _nll(y, sim + (k + 1) * dim)
        evals += 1
    _sort(sim, fs, m, dim, tmpx)
    while True:
        diam = 0.0
        for k in range(1, m):
            for j in range(dim):
                dd = fabs(sim[k * dim + j] - sim[j])
                if dd > diam:
                    diam = dd
        spread = fs[m - 1] - fs[0]
        if diam <= x_tol and spread <= f_tol:
            converged = 1
            break
        if iters >= max_iters:
            break
        iters += 1

        for j in range(dim):
            c[j] = 0.0
            for k in range(m - 1):
                c[j] += sim[k * dim + j]
            c[j] /= dim
        for j in range(dim):
            xr[j] = c[j] + 1.0 * (c[j] - sim[(m - 1) * dim + j])
        fr = _nll(y, xr)
        evals += 1
        shrink = 0
        if fr < fs[0]:
            for j in range(dim):
                xe[j] = c[j] + 2.0 * (c[j] - sim[(m - 1) * dim + j])
            fe = _nll(y, xe)
            evals += 1
            if fe < fr:
                for j in range(dim):
                    sim[(m - 1) * dim + j] = xe[j]
                fs[m - 1] = fe
            else:
                for j in range(dim):
                    sim[(m - 1) * dim + j] = xr[j]
                fs[m - 1] = fr
        elif fr < fs[m - 2]:
            for j in range(dim):
                sim[(m - 1) * dim + j] = xr[j]
            fs[m - 1] = fr
        elif fr < fs[m - 1]:
            for j in range(dim):
                xc[j] = c[j] + 0.5 * (xr[j] - c[j])
            fc = _nll(y, xc)
            evals += 1
            if fc <= fr:
                for j in range(dim):
                    sim[(m - 1) * dim + j] = xc[j]
                fs[m - 1] = fc
            else:
                shrink = 1
        else:
            for j in range(dim):
                xc[j] = c[j] + 0.5 * (sim[(m - 1) * dim + j] - c[j])
            fc = _nll(y, xc)
            evals += 1
            if fc < fs[m - 1]:
                for j in range(dim):
                    sim[(m - 1) * dim + j] = xc[j]
                fs[m - 1] = fc
            else:
                shrink = 1
        if shrink:
            for k in range(1, m):
                for j in range(dim):
                    sim[k * dim + j] = sim[j] + 0.5 * (sim[k * dim + j] - sim[j])
                fs[k] = _nll(y, sim + k * dim)
                evals += 1
        _sort(sim, fs, m, dim, tmpx)
    iters_out[0] = iters
    evals_out[0] = evals
    return converged


def fit_circle_nm(y, x0, double x_tol, double f_tol, int max_iters, int restarts,
                  double initial_step):
    """Minimize the circular negative log-likelihood; see ``_pykernels``."""
    cdef const double[:, ::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef double best_x[4]
    cdef double start[4]
    cdef double sim[20]
    cdef double fs[5]
    cdef double work[20]
    cdef double best_f, f0, improvement
    cdef int j, attempt, it, conv = 0
    cdef long ev, total_evals = 1
    cdef long total_iters = 0
    if len(x0) != 4:
        raise ValueError("x0 must have four components")
    for j in range(4):
        best_x[j] = float(x0[j])
    f0 = _nll(yv, best_x)
    if f0 != f0:
        raise ValueError("objective is NaN at the starting point")
    best_f = f0
    with nogil:
        for attempt in range(restarts + 1):
            for j in range(4):
                start[j] = best_x[j]
            conv = _run(yv, start, best_f, x_tol, f_tol, max_iters, initial_step,
                        sim, fs, work, &it, &ev)
            total_iters += it
            total_evals += ev
            improvement = best_f - fs[0]
            if fs[0] <= best_f:
                for j in range(4):
                    best_x[j] = sim[j]
                best_f = fs[0]
            if attempt > 0 and conv and not improvement > f_tol:
                break
    x = np.array([best_x[0], best_x[1], best_x[2], best_x[3]])
    return x, best_f, int(total_iters), int(total_evals), bool(conv)
