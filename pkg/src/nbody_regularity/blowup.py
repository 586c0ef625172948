"""Point-level data of the blow-ups of the compactified space.

Quotients X/Y are modelled by the orthogonal complement of Y, so a point
of the compactified quotient is a compact point in the coordinates of the
canonical basis of Y-perp (see :attr:`Subspace.perp`).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .charts import boundary_ray, theta, theta_inv
from .errors import (DegenerateDirection, DegenerateSubspace, DomainError, EmptyIntersection, OnBlownCenter,
                     OnSingularSet)
from .lattice import Semilattice
from .subspace import RANK_TOL, Subspace, dist_to, intersect, make_subspace, project

__all__ = [
    "SplitPoint",
    "split_point",
    "blowdown_xi",
    "blowdown_split",
    "sphere_blowup_map",
    "sphere_blowup_inv",
    "GVPoint",
    "gv_embed",
    "ray_limit",
    "PolarData",
    "XFPoint",
    "xf_coords",
    "Stratum",
    "CleanReport",
    "clean_check",
    "clean_check_random",
]


@dataclass(frozen=True)
class SplitPoint:
    quotient_part: np.ndarray
    fiber_part: np.ndarray


def split_point(y: Subspace, x) -> SplitPoint:
    """Image of an interior point under the splitting of [X̄ : S_Y].

    With x = v_Y + v_perp, the quotient part is theta(v_perp) and the fiber
    part is theta(v_Y / sqrt(1 + |v_perp|^2)).
    """
    if y.is_zero() or y.is_full():
        raise DegenerateSubspace("the splitting needs 0 < dim Y < n")
    x = np.asarray(x, dtype=float)
    v_perp = y.perp.coords(x)
    v_y = y.coords(x)
    scale = np.sqrt(1.0 + np.sum(v_perp * v_perp, axis=-1, keepdims=True))
    return SplitPoint(theta(v_perp), theta(v_y / scale))


def blowdown_xi(y: Subspace, z, fiber, fiber_is_ray: bool = False):
    """Blow-down in split coordinates: (z, y) -> z + sqrt(1 + <z,z>) y.

    ``z`` and ``fiber`` are coordinates in the bases of Y-perp and Y. A
    fiber point at infinity is returned unchanged as a ray of X. Returns
    ``(point, is_ray)`` in ambient coordinates.
    """
    z = np.asarray(z, dtype=float)
    fiber = np.asarray(fiber, dtype=float)
    if fiber_is_ray:
        d = fiber @ y.basis
        return d / np.linalg.norm(d), True
    scale = np.sqrt(1.0 + np.sum(z * z, axis=-1, keepdims=True))
    return z @ y.perp.basis + scale * (fiber @ y.basis), False


def blowdown_split(y: Subspace, sp: SplitPoint):
    z, z_ray = theta_inv(sp.quotient_part)
    f, f_ray = theta_inv(sp.fiber_part)
    if np.any(z_ray) and not np.all(f_ray):
        raise DomainError("quotient part at infinity needs the matching front-face data")
    return blowdown_xi(y, z, f, fiber_is_ray=bool(np.all(f_ray)))


def sphere_blowup_map(eta, mu):
    """(eta, mu) -> (eta/|eta|, (|eta|, mu)), defined off eta = 0."""
    eta = np.asarray(eta, dtype=float)
    mu = np.asarray(mu, dtype=float)
    r = np.linalg.norm(eta, axis=-1, keepdims=True)
    if np.any(r == 0.0):
        raise OnBlownCenter("eta = 0 is the blown-up centre")
    return eta / r, np.concatenate([r, mu], axis=-1)


def sphere_blowup_inv(u, w):
    u = np.asarray(u, dtype=float)
    w = np.asarray(w, dtype=float)
    return w[..., :1] * u, w[..., 1:]


@dataclass
class GVPoint:
    """One compact point of the compactified quotient per member."""

    components: dict[str, np.ndarray]

    def tags(self) -> dict[str, str]:
        return {k: ("ray" if v[0] <= 0.0 else "interior") for k, v in self.components.items()}

    def to_json(self) -> list[dict]:
        out = []
        for name, p in self.components.items():
            coords, ray = theta_inv(p)
            out.append({"member": name, "tag": "ray" if ray else "interior",
                        "coords": coords.tolist(), "compact": p.tolist()})
        return out


def gv_embed(F: Semilattice, x) -> GVPoint:
    """Multi-diagonal image: component Y is theta of the Y-perp coordinates of x."""
    x = np.asarray(x, dtype=float)
    return GVPoint({y.name: theta(y.perp.coords(x)) for y in F.members})


def ray_limit(F: Semilattice, base, direction) -> GVPoint:
    """Limit of gv_embed(base + t*direction) as t -> infinity."""
    base = np.asarray(base, dtype=float)
    d = np.asarray(direction, dtype=float)
    dn = np.linalg.norm(d)
    if dn == 0.0:
        raise DegenerateDirection("direction must be nonzero")
    comps = {}
    for y in F.members:
        dq = y.perp.coords(d)
        if np.linalg.norm(dq) > RANK_TOL * dn:
            comps[y.name] = boundary_ray(dq)
        else:
            comps[y.name] = theta(y.perp.coords(base))
    return GVPoint(comps)


@dataclass(frozen=True)
class PolarData:
    foot: np.ndarray
    direction: np.ndarray
    radius: float


@dataclass
class XFPoint:
    gv: GVPoint
    polar: dict[str, PolarData] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"gv": self.gv.to_json(),
                "polar": [{"member": k, "foot": v.foot.tolist(), "direction": v.direction.tolist(),
                           "radius": v.radius} for k, v in self.polar.items()]}


def xf_coords(F: Semilattice, x) -> XFPoint:
    """GV data plus (foot, unit normal direction, distance) for every member."""
    x = np.asarray(x, dtype=float)
    polar = {}
    for y in F.members:
        foot = project(y, x)
        r = float(np.linalg.norm(x - foot))
        if r <= RANK_TOL * max(1.0, float(np.linalg.norm(x))):
            raise OnSingularSet(f"point lies on {y.name}")
        polar[y.name] = PolarData(foot, (x - foot) / r, r)
    return XFPoint(gv_embed(F, x), polar)


# Clean intersections. Under theta the closure of Y is the half sphere in
# span(e0) + Y and its sphere at infinity is the unit sphere of Y inside
# {y0 = 0}; both are (sphere ∩ linear subspace) of R^(n+1).

@dataclass(frozen=True)
class Stratum:
    kind: str  # "closure" or "sphere"
    subspace: Subspace

    def __post_init__(self):
        if self.kind not in ("closure", "sphere"):
            raise ValueError(f"unknown stratum kind {self.kind!r}")

    @property
    def label(self) -> str:
        return f"{self.kind}:{self.subspace.name}"

    def linear_hull(self) -> Subspace:
        n = self.subspace.n
        rows = [np.concatenate([[0.0], b]) for b in self.subspace.basis]
        if self.kind == "closure":
            rows.append(np.eye(n + 1)[0])
        return make_subspace(n + 1, rows, name=self.label)


@dataclass(frozen=True)
class CleanReport:
    p: str
    q: str
    point: tuple[float, ...]
    dim_tangent_of_intersection: int
    dim_intersection_of_tangents: int

    @property
    def clean(self) -> bool:
        return self.dim_tangent_of_intersection == self.dim_intersection_of_tangents

    def to_dict(self) -> dict:
        return {"p": self.p, "q": self.q, "point": list(self.point),
                "dim_T_intersection": self.dim_tangent_of_intersection,
                "dim_TP_cap_TQ": self.dim_intersection_of_tangents, "clean": self.clean}


def _tangent(hull: Subspace, p: np.ndarray) -> Subspace:
    # T_p(sphere ∩ L) = L ∩ p-perp
    return intersect(hull, make_subspace(hull.n, [p]).perp)


def _auto_point(meet: Subspace) -> np.ndarray:
    e0 = np.eye(meet.n)[0]
    at_infinity = intersect(meet, make_subspace(meet.n, [e0]).perp)
    if at_infinity.dim > 0:
        return at_infinity.basis[0]
    if meet.dim > 0:
        return e0
    raise EmptyIntersection("the strata do not meet")


def clean_check(P: Stratum, Q: Stratum, point=None) -> CleanReport:
    """Compare dim T(P∩Q) with dim(TP ∩ TQ) at a common point.

    Without ``point`` a ray through a unit vector of the common linear hull
    at infinity is used (the origin when the strata only meet there).
    """
    hp, hq = P.linear_hull(), Q.linear_hull()
    meet = intersect(hp, hq)
    if point is None:
        p = _auto_point(meet)
    else:
        p = np.asarray(point, dtype=float)
        if dist_to(meet, p) > 1e-10 or abs(np.linalg.norm(p) - 1.0) > 1e-10 or p[0] < 0:
            raise DomainError("test point is not a common point of both strata")
    t_meet = _tangent(meet, p)
    t_both = intersect(_tangent(hp, p), _tangent(hq, p))
    return CleanReport(P.label, Q.label, tuple(p.tolist()), t_meet.dim, t_both.dim)


def clean_check_random(P: Stratum, Q: Stratum, rng: np.random.Generator, count: int = 3) -> list[CleanReport]:
    """Reports at the auto-selected point and at random common points."""
    meet = intersect(P.linear_hull(), Q.linear_hull())
    reports = [clean_check(P, Q)]
    for _ in range(count):
        c = rng.standard_normal(meet.dim) @ meet.basis
        c[0] = abs(c[0])
        reports.append(clean_check(P, Q, c / np.linalg.norm(c)))
    return reports
