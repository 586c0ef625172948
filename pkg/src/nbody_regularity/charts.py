"""Charts for the spherical compactification of R^n and for the one-point
compactification.

A point of the spherical compactification is stored as a unit vector
``(y0, y1, ..., yn)`` with ``y0 >= 0``; ``y0 == 0`` encodes the ray at
infinity with direction ``(y1, ..., yn)``. All functions accept a leading
batch axis.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NonFinite, PoleError, SingularMap

CHART_TOL = 1e-12
DEPTH_TOL = 1e-14

__all__ = [
    "theta",
    "theta_inv",
    "is_compact_point",
    "boundary_ray",
    "is_ray",
    "affine_extend",
    "theta_x",
    "onepoint_psi",
    "onepoint_psi_from_theta_x",
    "stereographic",
    "stereographic_inv",
    "ModelChartPoint",
    "boundary_depth",
    "roundtrip_errors",
]


def theta(x) -> np.ndarray:
    """(1, x) / sqrt(1 + |x|^2)."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise NonFinite("theta needs a finite point")
    ones = np.ones(x.shape[:-1] + (1,))
    y = np.concatenate([ones, x], axis=-1)
    return y / np.sqrt(1.0 + np.sum(x * x, axis=-1, keepdims=True))


def boundary_ray(direction) -> np.ndarray:
    """Compact point at infinity in the given (nonzero) direction."""
    d = np.asarray(direction, dtype=float)
    norm = np.linalg.norm(d, axis=-1, keepdims=True)
    if np.any(norm == 0):
        raise DomainError("a ray needs a nonzero direction")
    zeros = np.zeros(d.shape[:-1] + (1,))
    return np.concatenate([zeros, d / norm], axis=-1)


def is_ray(p) -> np.ndarray | bool:
    p = np.asarray(p, dtype=float)
    r = p[..., 0] <= 0.0
    return bool(r) if np.ndim(r) == 0 else r


def is_compact_point(p, tol: float = CHART_TOL) -> bool:
    p = np.asarray(p, dtype=float)
    return bool(np.all(np.abs(np.linalg.norm(p, axis=-1) - 1.0) < tol) and np.all(p[..., 0] >= 0.0))


def theta_inv(p):
    """Inverse chart.

    Returns ``(coords, ray)``: for ``y0 > 0`` the point ``y'/y0`` and
    ``False``; for ``y0 == 0`` the unit direction ``y'`` and ``True``. With a
    batch of points ``ray`` is a boolean array.
    """
    p = np.asarray(p, dtype=float)
    y0 = p[..., :1]
    rest = p[..., 1:]
    ray = y0[..., 0] <= 0.0
    safe = np.where(ray[..., None], 1.0, y0)
    out = np.where(ray[..., None], rest, rest / safe)
    if np.ndim(ray) == 0:
        return out, bool(ray)
    return out, ray


def affine_extend(A, V, p) -> np.ndarray:
    """Extension of x -> Ax + V to the compactification.

    Works on the homogeneous lift (t, q) -> (t, Aq + tV) followed by
    normalization, so boundary rays go to the ray through A(direction).
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    V = np.asarray(V, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n) or V.shape != (n,):
        raise ValueError("A must be square and V of matching length")
    if np.linalg.matrix_rank(A) < n:
        raise SingularMap("affine map is not invertible")
    p = np.asarray(p, dtype=float)
    t = p[..., :1]
    q = p[..., 1:]
    img = np.concatenate([t, q @ A.T + t * V], axis=-1)
    img = img / np.linalg.norm(img, axis=-1, keepdims=True)
    # rays whose direction A leaves unchanged stay bit-exact
    fixed = (t[..., 0] == 0) & np.all(q @ A.T == q, axis=-1)
    return np.where(fixed[..., None], p, img)


# One-point compactification. The half sphere S'_+ is the unit sphere
# centred at the south pole S = (-1, 0) of S_{R x X}, restricted to its
# upper half; x in X sits at angle alpha = arctan|x| from the vertical.

def theta_x(x) -> np.ndarray:
    """Position of x on the shifted half sphere: theta(x) - (1, 0)."""
    y = theta(x)
    y[..., 0] -= 1.0
    return y


def onepoint_psi(alpha, y) -> np.ndarray:
    """(cos a - 1, sin a * y) -> (cos 2a, sin 2a * y)."""
    alpha = np.asarray(alpha, dtype=float)
    if np.any(alpha < 0.0) or np.any(alpha > np.pi / 2):
        raise DomainError("alpha must lie in [0, pi/2]")
    y = np.asarray(y, dtype=float)
    a = alpha[..., None]
    return np.concatenate([np.cos(2 * a), np.sin(2 * a) * y], axis=-1)


def onepoint_psi_from_theta_x(q) -> np.ndarray:
    """Apply the one-point map to a point given in S'_+ coordinates."""
    q = np.asarray(q, dtype=float)
    cos_a = np.clip(q[..., 0] + 1.0, 0.0, 1.0)
    rest = q[..., 1:]
    sin_a = np.linalg.norm(rest, axis=-1)
    alpha = np.arctan2(sin_a, cos_a)
    safe = np.where(sin_a > 0, sin_a, 1.0)[..., None]
    y = np.where(sin_a[..., None] > 0, rest / safe, 0.0)
    return onepoint_psi(alpha, y)


def stereographic(p) -> np.ndarray:
    """(cos th, sin th * y) -> tan(th/2) * y, i.e. p' / (1 + p0)."""
    p = np.asarray(p, dtype=float)
    p0, rest = p[..., :1], p[..., 1:]
    # on the sphere 1 + p0 = |p'|^2 / (1 - p0), which avoids cancellation near the pole
    with np.errstate(divide="ignore", invalid="ignore"):
        denom = np.where(p0 < 0.0, np.sum(rest * rest, axis=-1, keepdims=True) / (1.0 - p0), 1.0 + p0)
    if np.any(denom <= 1e-300):
        raise PoleError("the south pole has no stereographic image")
    return rest / denom


def stereographic_inv(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    r2 = np.sum(x * x, axis=-1, keepdims=True)
    return np.concatenate([(1.0 - r2) / (1.0 + r2), 2.0 * x / (1.0 + r2)], axis=-1)


@dataclass(frozen=True)
class ModelChartPoint:
    """Point of [0, inf)^k x R^(n-k)."""

    k: int
    coords: tuple[float, ...]

    def __post_init__(self):
        if not 0 <= self.k <= len(self.coords):
            raise DomainError("corner codimension out of range")
        if any(c < 0 for c in self.coords[: self.k]):
            raise DomainError("corner coordinates must be nonnegative")


def boundary_depth(p: ModelChartPoint, tol: float = DEPTH_TOL) -> int:
    return sum(1 for c in p.coords[: p.k] if abs(c) <= tol)


def roundtrip_errors(n: int, samples: int, seed: int = 0) -> dict:
    """Worst roundtrip errors of theta on R^n and of the stereographic map on
    the unit sphere.

    Points of R^n are Gaussian directions with magnitudes log-uniform in
    [1e-3, 1e3] (error relative to max(1, |x|)); sphere points are uniform.
    """
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((samples, n))
    g /= np.linalg.norm(g, axis=-1, keepdims=True)
    x = g * (10.0 ** rng.uniform(-3.0, 3.0, size=(samples, 1)))
    scale = np.maximum(1.0, np.linalg.norm(x, axis=-1))
    back, ray = theta_inv(theta(x))
    theta_err = float(np.max(np.linalg.norm(back - x, axis=-1) / scale))
    s = rng.standard_normal((samples, n + 1))
    s /= np.linalg.norm(s, axis=-1, keepdims=True)
    sphere_err = float(np.max(np.linalg.norm(stereographic_inv(stereographic(s)) - s, axis=-1)))
    plane_err = float(np.max(np.linalg.norm(stereographic(stereographic_inv(x)) - x, axis=-1) / scale))
    return {"dim": n, "samples": samples, "seed": seed, "theta": theta_err, "stereographic": sphere_err,
            "stereographic_plane": plane_err, "max_error": max(theta_err, sphere_err, plane_err), "rays": int(np.sum(ray))}
