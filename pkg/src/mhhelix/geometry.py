"""Helix model, orthonormal frames, stereographic axis coordinates and a
seeded helix simulator."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InputError

__all__ = [
    "HelixParams",
    "PointCloud",
    "helix_point",
    "helix_curve",
    "simulate_helix",
    "frame_from_axis",
    "stereographic_to_axis",
    "axis_to_stereographic",
    "angle_between_axes",
    "rotation_about",
]

# frame_from_axis seeds Gram-Schmidt with e_x unless |w_x| exceeds this,
# making the frame continuous everywhere except on the cone |w_x| = 0.9.
_BRANCH = 0.9


def _unit(w, what="axis", tol=None):
    w = np.asarray(w, dtype=float).reshape(3)
    norm = float(np.linalg.norm(w))
    if not math.isfinite(norm) or norm < 1e-12:
        raise DomainError(f"{what} has (near) zero length")
    if tol is not None and abs(norm - 1.0) > tol:
        raise DomainError(f"{what} is not a unit vector (norm {norm})")
    return w / norm


@dataclass
class HelixParams:
    """Helix ``x(t) = r cos(t0+t) u + r sin(t0+t) v + c (t0+t) w + b``.

    ``(u, v, w)`` must be a right-handed orthonormal frame; ``w`` is the
    axis and ``2 pi c`` the pitch.
    """

    r: float
    c: float
    beta: float
    u: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0]))
    v: np.ndarray = field(default_factory=lambda: np.array([0.0, 1.0, 0.0]))
    w: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))
    b: np.ndarray = field(default_factory=lambda: np.zeros(3))
    t0: float = 0.0

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=float).reshape(3)
        self.v = np.asarray(self.v, dtype=float).reshape(3)
        self.w = np.asarray(self.w, dtype=float).reshape(3)
        self.b = np.asarray(self.b, dtype=float).reshape(3)
        if not self.r > 0:
            raise DomainError(f"helix radius must be positive, got {self.r}")
        frame = self.frame
        if not np.allclose(frame.T @ frame, np.eye(3), atol=1e-12, rtol=0):
            raise DomainError("u, v, w must be orthonormal")
        if abs(np.linalg.det(frame) - 1.0) > 1e-9:
            raise DomainError("frame [u v w] must be right-handed")

    @property
    def frame(self) -> np.ndarray:
        return np.column_stack([self.u, self.v, self.w])

    @property
    def pitch(self) -> float:
        return 2.0 * math.pi * self.c

    @classmethod
    def with_axis(cls, r, c, beta, axis=(0.0, 0.0, 1.0), shift=(0.0, 0.0, 0.0), t0=0.0):
        """Build parameters whose frame is ``frame_from_axis(axis)``."""
        R = frame_from_axis(axis)
        return cls(r=r, c=c, beta=beta, u=R[:, 0], v=R[:, 1], w=R[:, 2], b=shift, t0=t0)


@dataclass
class PointCloud:
    points: np.ndarray
    labels: list | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise InputError(f"point cloud must be an (n, 3) array, got shape {pts.shape}")
        if pts.shape[0] < 1:
            raise InputError("point cloud is empty")
        if not np.all(np.isfinite(pts)):
            raise InputError("point cloud contains non-finite coordinates")
        self.points = pts
        if self.labels is not None and len(self.labels) != pts.shape[0]:
            raise InputError("labels must match the number of points")

    def __len__(self):
        return self.points.shape[0]


def helix_curve(params: HelixParams, t) -> np.ndarray:
    """Noise-free helix evaluated at an array of times, shape ``(len(t), 3)``."""
    s = params.t0 + np.asarray(t, dtype=float)
    return (params.r * np.cos(s)[:, None] * params.u
            + params.r * np.sin(s)[:, None] * params.v
            + params.c * s[:, None] * params.w
            + params.b)


def helix_point(params: HelixParams, t: float) -> np.ndarray:
    return helix_curve(params, np.array([t]))[0]


def simulate_helix(params: HelixParams, n: int, sigma2: float, seed) -> PointCloud:
    """Noisy helix at ``t_i = i * beta``, ``i = 1..n``, with isotropic
    ``N(0, sigma2 I_3)`` noise.

    ``seed`` is anything accepted by :func:`numpy.random.default_rng`.
    """
    if n < 1:
        raise InputError("n must be >= 1")
    if not sigma2 >= 0:
        raise DomainError(f"sigma2 must be non-negative, got {sigma2}")
    t = params.beta * np.arange(1, n + 1)
    pts = helix_curve(params, t)
    if sigma2 > 0:
        rng = np.random.default_rng(seed)
        pts = pts + math.sqrt(sigma2) * rng.standard_normal((n, 3))
    return PointCloud(pts)


def frame_from_axis(w) -> np.ndarray:
    """Right-handed orthonormal frame ``[u v w]`` with ``w`` as third column.

    ``u`` is ``e_x`` (``e_y`` when ``|w_x| > 0.9``) made orthogonal to ``w``;
    ``v = w x u``. ``(0, 0, 1)`` gives the identity.
    """
    w = _unit(w, tol=1e-6)
    seed = np.array([1.0, 0.0, 0.0]) if abs(w[0]) <= _BRANCH else np.array([0.0, 1.0, 0.0])
    u = seed - (seed @ w) * w
    u /= np.linalg.norm(u)
    v = np.cross(w, u)
    return np.column_stack([u, v, w])


def stereographic_to_axis(p) -> np.ndarray:
    """Unit vector from stereographic coordinates; ``p = 0`` maps to ``(0, 0, -1)``."""
    p1, p2 = (float(x) for x in np.asarray(p, dtype=float).reshape(2))
    q = p1 * p1 + p2 * p2
    den = 1.0 + q
    return np.array([2.0 * p1 / den, 2.0 * p2 / den, (q - 1.0) / den])


def axis_to_stereographic(w) -> np.ndarray:
    """Inverse of :func:`stereographic_to_axis` (undefined at the north pole)."""
    w = _unit(w)
    den = 1.0 - w[2]
    if den <= 0.0:
        raise DomainError("the north pole has no finite stereographic coordinates")
    return np.array([w[0] / den, w[1] / den])


def angle_between_axes(w1, w2) -> float:
    w1 = _unit(w1, "w1", tol=1e-6)
    w2 = _unit(w2, "w2", tol=1e-6)
    return math.acos(min(1.0, max(-1.0, float(w1 @ w2))))


def rotation_about(axis, angle: float) -> np.ndarray:
    """Rotation matrix for ``angle`` radians about ``axis`` (Rodrigues)."""
    k = _unit(axis)
    K = np.array([[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]])
    return np.eye(3) + math.sin(angle) * K + (1.0 - math.cos(angle)) * (K @ K)
