"""Derivative-free local minimization (Nelder-Mead simplex with restarts)."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError

__all__ = ["OptOptions", "OptResult", "minimize"]

REFLECT = 1.0
EXPAND = 2.0
CONTRACT = 0.5
SHRINK = 0.5


@dataclass(frozen=True)
class OptOptions:
    x_tol: float = 1e-8
    f_tol: float = 1e-10
    max_iters: int = 2000
    restarts: int = 2
    initial_step: float = 0.1

    def __post_init__(self):
        if not (self.x_tol > 0 and self.f_tol > 0 and self.initial_step > 0):
            raise ValueError("tolerances and initial_step must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.restarts < 0:
            raise ValueError("restarts must be >= 0")


@dataclass
class OptResult:
    x_min: np.ndarray
    f_min: float
    iterations: int
    converged: bool
    evaluations: int
    history: list = field(default_factory=list, repr=False)


def _safe(f):
    def wrapped(x):
        v = float(f(x))
        return v if math.isfinite(v) else math.inf
    return wrapped


def _sort(sim, fs):
    order = sorted(range(len(fs)), key=fs.__getitem__)
    return [sim[i] for i in order], [fs[i] for i in order]


def _run(fun, x0, f0, opts, max_iters, history):
    """One Nelder-Mead pass from ``x0``; returns (x, f, iters, evals, converged)."""
    dim = x0.size
    sim = [x0]
    fs = [f0]
    evals = 0
    for j in range(dim):
        x = x0.copy()
        x[j] += opts.initial_step
        sim.append(x)
        fs.append(fun(x))
        evals += 1
    sim, fs = _sort(sim, fs)
    iters = 0
    converged = False
    while True:
        diam = max(float(np.max(np.abs(sim[k] - sim[0]))) for k in range(1, dim + 1))
        spread = fs[-1] - fs[0]
        if diam <= opts.x_tol and spread <= opts.f_tol:
            converged = True
            break
        if iters >= max_iters:
            break
        iters += 1

        centroid = sum(sim[:-1]) / dim
        worst = sim[-1]
        xr = centroid + REFLECT * (centroid - worst)
        fr = fun(xr)
        evals += 1
        shrink = False
        if fr < fs[0]:
            xe = centroid + EXPAND * (centroid - worst)
            fe = fun(xe)
            evals += 1
            if fe < fr:
                sim[-1], fs[-1] = xe, fe
            else:
                sim[-1], fs[-1] = xr, fr
        elif fr < fs[-2]:
            sim[-1], fs[-1] = xr, fr
        elif fr < fs[-1]:
            xc = centroid + CONTRACT * (xr - centroid)
            fc = fun(xc)
            evals += 1
            if fc <= fr:
                sim[-1], fs[-1] = xc, fc
            else:
                shrink = True
        else:
            xc = centroid + CONTRACT * (worst - centroid)
            fc = fun(xc)
            evals += 1
            if fc < fs[-1]:
                sim[-1], fs[-1] = xc, fc
            else:
                shrink = True
        if shrink:
            best = sim[0]
            for k in range(1, dim + 1):
                sim[k] = best + SHRINK * (sim[k] - best)
                fs[k] = fun(sim[k])
                evals += 1
        sim, fs = _sort(sim, fs)
        if history is not None:
            history.append(fs[0])
    return sim[0], fs[0], iters, evals, converged


def minimize(objective, x0, options: OptOptions | None = None, *, record_history=False) -> OptResult:
    """Minimize ``objective`` from ``x0`` with Nelder-Mead.

    Standard coefficients (reflect 1, expand 2, contract 1/2, shrink 1/2).
    Non-finite objective values are treated as ``+inf`` so callers can
    express domain limits as barriers. After the first pass the simplex is
    rebuilt around the best point up to ``options.restarts`` times; restarts
    stop early once one fails to improve the best value by more than
    ``f_tol``.

    A pass converges when the simplex diameter (max-norm from the best
    vertex) is at most ``x_tol`` and the spread of vertex values is at most
    ``f_tol``. ``max_iters`` bounds the iterations of each pass.
    """
    opts = options or OptOptions()
    x = np.array(x0, dtype=float).ravel()
    if x.size < 1:
        raise InputError("x0 must have at least one component")
    f0 = float(objective(x))
    if math.isnan(f0):
        raise InputError("objective is NaN at the starting point")
    fun = _safe(objective)
    f0 = fun(x)
    history = [f0] if record_history else None

    total_iters = 0
    total_evals = 1
    best_x, best_f = x, f0
    converged = False
    for attempt in range(opts.restarts + 1):
        xr, fr, it, ev, conv = _run(fun, best_x.copy(), best_f, opts, opts.max_iters, history)
        total_iters += it
        total_evals += ev
        improvement = best_f - fr
        if fr <= best_f:
            best_x, best_f = xr, fr
        converged = conv
        if attempt > 0 and conv and not improvement > opts.f_tol:
            break
    return OptResult(np.array(best_x), best_f, total_iters, converged, total_evals,
                     history if history is not None else [])
