"""Special functions for the Mardia-Holmes family.

Standard normal CDF, the parabolic cylinder function ``U(a, z)`` from its
integral representation, and the radial normalizing integral

    b(kappa, d) = int_0^inf r^(d-1) exp(-kappa (r^2 - 1)^2 / 2) dr

in two independent forms (parabolic-cylinder closed form and direct
QUADPACK quadrature).
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import ConvergenceError, DomainError

__all__ = [
    "QuadratureSpec",
    "std_normal_cdf",
    "log_std_normal_cdf",
    "gauss_kronrod",
    "pcf_U",
    "log_pcf_U",
    "b_kappa",
    "log_b_kappa",
]

SQRT2 = math.sqrt(2.0)

# 15-point Kronrod extension of the 7-point Gauss-Legendre rule (QUADPACK qk15).
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_WK = np.concatenate([_WGK[:-1], _WGK[::-1]])
# Gauss nodes are the odd-indexed Kronrod nodes.
_WG_FULL = np.zeros(15)
_WG_FULL[1::2] = np.concatenate([_WG[:-1], _WG[::-1]])


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances for the adaptive quadrature used by :func:`pcf_U`."""

    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_subdivisions: int = 2000

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


DEFAULT_QUAD = QuadratureSpec()


def std_normal_cdf(z: float) -> float:
    """Standard normal CDF.

    Uses the C library ``erfc``, whose error is a few ulp, so the absolute
    error is far below 1e-12 over the whole real line.
    """
    z = float(z)
    if not math.isfinite(z):
        raise DomainError(f"std_normal_cdf requires a finite argument, got {z}")
    return 0.5 * math.erfc(-z / SQRT2)


def log_std_normal_cdf(z: float) -> float:
    """``log Phi(z)``, accurate in both tails."""
    z = float(z)
    if not math.isfinite(z):
        raise DomainError(f"log_std_normal_cdf requires a finite argument, got {z}")
    if z > -5.0:
        return math.log1p(-0.5 * math.erfc(z / SQRT2))
    # erfc(x) == erfcx(x) exp(-x^2); keep the Gaussian factor in log space.
    from scipy.special import erfcx

    x = -z / SQRT2
    return math.log(0.5 * erfcx(x)) - x * x


def _gk15(f, lo, hi):
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    fx = f(mid + half * _NODES)
    k = half * float(np.dot(_WK, fx))
    g = half * float(np.dot(_WG_FULL, fx))
    return k, abs(k - g)


def gauss_kronrod(f, lo, hi, abs_tol=1e-10, rel_tol=1e-10, max_subdivisions=2000,
                  breakpoints=()):
    """Globally adaptive Gauss-Kronrod (7/15) quadrature on a finite interval.

    ``f`` must accept a numpy array of abscissae. Returns ``(value, error)``.
    Raises :class:`ConvergenceError` if the error target is not met within
    ``max_subdivisions`` bisections.
    """
    edges = [lo, *sorted(b for b in breakpoints if lo < b < hi), hi]
    heap = []
    total = 0.0
    err_total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        v, e = _gk15(f, a, b)
        heapq.heappush(heap, (-e, a, b, v))
        total += v
        err_total += e
    splits = 0
    while err_total > max(abs_tol, rel_tol * abs(total)):
        if splits >= max_subdivisions:
            raise ConvergenceError(
                "adaptive quadrature did not converge",
                diagnostics={"value": total, "error": err_total, "subdivisions": splits,
                             "interval": (lo, hi)},
            )
        neg_e, a, b, v = heapq.heappop(heap)
        m = 0.5 * (a + b)
        v1, e1 = _gk15(f, a, m)
        v2, e2 = _gk15(f, m, b)
        heapq.heappush(heap, (-e1, a, m, v1))
        heapq.heappush(heap, (-e2, m, b, v2))
        total += v1 + v2 - v
        err_total += e1 + e2 + neg_e
        splits += 1
    # Re-sum to shed the running-update rounding.
    total = math.fsum(item[3] for item in heap)
    return total, err_total


def _log_pcf_integral(a, z, quad):
    """log of int_0^inf s^(a-1/2) exp(-s^2/2 - z s) ds.

    The exponent is handled as ``psi(s) + z^2/2`` with
    ``psi(s) = (a-1/2) log s - (s+z)^2/2``, which avoids cancellation
    between ``s^2/2`` and ``z s`` when ``z`` is large and negative.
    """
    alpha = a - 0.5

    def psi(s):
        if alpha == 0.0:
            return -0.5 * (s + z) ** 2
        return alpha * np.log(s) - 0.5 * (s + z) ** 2

    def dpsi(s):
        return alpha / s - (s + z)

    # Interior maximum of psi: root of s^2 + z s - alpha = 0.
    disc = z * z + 4.0 * alpha
    peak = 0.0
    if disc >= 0.0:
        # numerically stable positive root
        if z < 0.0:
            root = 0.5 * (-z + math.sqrt(disc))
        else:
            root = 2.0 * alpha / (z + math.sqrt(disc)) if alpha > 0.0 else 0.0
        if root > 0.0 and (alpha >= 0.0 or root * root > -alpha):
            peak = root
    if peak > 0.0:
        shift = float(psi(peak))
        curv = 1.0 + alpha / (peak * peak)
        width = 1.0 / math.sqrt(curv) if curv > 0.0 else 1.0
    else:
        # Monotone decreasing integrand; scale by its value at a small offset.
        width = 1.0 / (1.0 + abs(z))
        shift = float(psi(width)) if alpha != 0.0 else -0.5 * z * z

    def g(s):
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.exp(psi(s) - shift)
        return np.where(s > 0.0, out, 0.0)

    # Upper limit: psi is concave beyond max(peak, sqrt(-alpha)), hence
    #   int_S^inf exp(psi) <= exp(psi(S)) / (-psi'(S))   whenever psi'(S) < 0.
    # Grow S until that tail bound falls below abs_tol * width.
    tail_target = quad.abs_tol * width
    start = max(peak, math.sqrt(max(-alpha, 0.0)))
    step = 8.0 * width
    upper = start + step
    while True:
        slope = -dpsi(upper)
        if slope > 0.0 and math.exp(float(psi(upper)) - shift) / slope <= tail_target:
            break
        step *= 2.0
        upper = start + step
        if step > 1e8:
            raise ConvergenceError("could not bound the integrand tail",
                                   diagnostics={"a": a, "z": z, "upper": upper})
    # Far from the origin the mass sits in a window around the peak; skip the
    # negligible stretch [0, peak - 40 width] where psi is far below its max.
    lower = 0.0
    if peak > 0.0:
        cut = peak - 40.0 * width
        if cut > 0.0 and float(psi(cut)) - shift < -700.0:
            lower = cut
    breaks = (peak,) if peak > 0.0 else ()
    val, _ = gauss_kronrod(g, lower, upper, abs_tol=tail_target, rel_tol=quad.rel_tol,
                           max_subdivisions=quad.max_subdivisions, breakpoints=breaks)
    if not val > 0.0:
        raise ConvergenceError("non-positive quadrature value",
                               diagnostics={"a": a, "z": z, "value": val})
    return math.log(val) + shift + 0.5 * z * z


def _check_pcf_args(a, z):
    if not a > -0.5:
        raise DomainError(f"pcf_U integral representation requires a > -1/2, got a={a}")
    if not math.isfinite(z):
        raise DomainError(f"pcf_U requires finite z, got {z}")


def log_pcf_U(a: float, z: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Natural log of the parabolic cylinder function ``U(a, z)`` for a > -1/2."""
    a = float(a)
    z = float(z)
    _check_pcf_args(a, z)
    return -0.25 * z * z - math.lgamma(a + 0.5) + _log_pcf_integral(a, z, quad)


def pcf_U(a: float, z: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Parabolic cylinder function ``U(a, z)`` from its integral definition.

    ``U(a,z) = exp(-z^2/4) / Gamma(a+1/2) * int_0^inf s^(a-1/2) exp(-s^2/2 - z s) ds``

    Overflows to ``inf`` for strongly negative ``z``; use :func:`log_pcf_U`
    there.
    """
    return math.exp(log_pcf_U(a, z, quad))


def _check_b_args(kappa, d):
    if not (math.isfinite(kappa) and kappa > 0.0):
        raise DomainError(f"kappa must be positive and finite, got {kappa}")
    if int(d) != d or d < 1:
        raise DomainError(f"dimension d must be an integer >= 1, got {d}")


def _log_b_quadrature(kappa, d, quad):
    def f(r):
        return r ** (d - 1) * math.exp(-0.5 * kappa * (r * r - 1.0) ** 2)

    # Integrand is negligible once kappa (r^2-1)^2 / 2 exceeds ~ 60 + (d-1) log r.
    spread = math.sqrt(2.0 * 80.0 / kappa)
    hi = math.sqrt(1.0 + spread) + 1.0
    lo = math.sqrt(max(0.0, 1.0 - spread))
    opts = dict(epsabs=0.0, epsrel=min(quad.rel_tol, 1e-12), limit=quad.max_subdivisions)
    core = [integrate.quad(f, lo, 1.0, **opts)[0], integrate.quad(f, 1.0, hi, **opts)[0]]
    # the outer pieces are tiny; an absolute target relative to the core suffices
    tail_opts = dict(opts, epsabs=1e-15 * math.fsum(core))
    pieces = core + [integrate.quad(f, hi, np.inf, **tail_opts)[0]]
    if lo > 0.0:
        pieces.append(integrate.quad(f, 0.0, lo, **tail_opts)[0])
    return math.log(math.fsum(pieces))


def log_b_kappa(kappa: float, d: int, method: str = "closed_form",
                quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Natural log of the radial normalizing integral ``b(kappa, d)``."""
    kappa = float(kappa)
    _check_b_args(kappa, d)
    d = int(d)
    if method == "quadrature":
        return _log_b_quadrature(kappa, d, quad)
    if method != "closed_form":
        raise ValueError(f"unknown method {method!r}")
    a = 0.5 * (d - 1)
    # Gamma(a+1/2) exp(-kappa/4) U(a, -sqrt(kappa)) / (2 kappa^((2a+1)/4))
    return (math.lgamma(a + 0.5) - 0.25 * kappa + log_pcf_U(a, -math.sqrt(kappa), quad)
            - math.log(2.0) - 0.25 * (2.0 * a + 1.0) * math.log(kappa))


def b_kappa(kappa: float, d: int, method: str = "closed_form",
            quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Radial normalizing integral of the d-dimensional Mardia-Holmes density.

    Parameters
    ----------
    kappa : float
        Concentration, > 0.
    d : int
        Dimension, >= 1.
    method : {"closed_form", "quadrature"}
        ``closed_form`` goes through the parabolic cylinder function with
        ``a = (d-1)/2``; ``quadrature`` integrates the radial integrand
        directly with QUADPACK.
    """
    return math.exp(log_b_kappa(kappa, d, method, quad))
