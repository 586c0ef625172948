"""Smoothed distance functions attached to a semilattice.

The product rho_F is assembled from factors t_Y computed bottom-up:

    t_Y = phi0(d_Y) / prod_{Z in F, Z strictly inside Y} t_Z,
    rho_F = prod_Y t_Y,

which telescopes to phi0(d_Y) along chains.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainError, OnSingularSet
from .lattice import Semilattice
from .subspace import Subspace, contains, dist_to

SINGULAR_TOL = 1e-14
CHUNK = 4096

__all__ = [
    "phi0",
    "smoothed_r",
    "RhoTable",
    "rho_system",
    "rho_F",
    "strata_samples",
    "EquivalenceStats",
    "equivalence_scan",
    "doubling_stability",
    "ProbeReport",
    "ratio_probe",
    "line_path",
    "true_metric_profile",
    "gz_distance",
    "metric_inequality_check",
]


def _bump(u):
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    pos = u > 0
    out[pos] = np.exp(-1.0 / u[pos])
    return out


def _switch(t):
    """Smooth step on [1/2, 1]: 1 at t <= 1/2, 0 at t >= 1."""
    t = np.clip(np.asarray(t, dtype=float), 0.5, 1.0)
    a = _bump(2.0 * (1.0 - t))
    b = _bump(2.0 * t - 1.0)
    return a / (a + b)


def phi0(t):
    """Cut-off profile: t on [0, 1/2], 1 on [1, inf), smooth and monotone."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("phi0 is defined on [0, inf)")
    h = _switch(t)
    # t h + (1 - h) written so that rounding keeps it monotone
    out = np.where(t <= 0.5, t, np.where(t >= 1.0, 1.0, 1.0 - h * (1.0 - t)))
    return float(out) if out.ndim == 0 else out


def smoothed_r(y: Subspace, x):
    return phi0(dist_to(y, x))


@dataclass
class RhoTable:
    distances: dict[str, np.ndarray]
    factors: dict[str, np.ndarray]
    rho: np.ndarray
    delta: np.ndarray

    def to_dict(self) -> dict:
        def plain(v):
            v = np.asarray(v)
            return v.tolist() if v.ndim else float(v)
        return {"d": {k: plain(v) for k, v in self.distances.items()},
                "t": {k: plain(v) for k, v in self.factors.items()},
                "rho_F": plain(self.rho), "delta_F": plain(self.delta)}


def _below(F: Semilattice) -> dict[str, list[int]]:
    idx = {}
    for i, y in enumerate(F.members):
        idx[y.name] = [j for j, z in enumerate(F.members) if z.dim < y.dim and contains(y, z)]
    return idx


def rho_system(F: Semilattice, x, order: Sequence[str] | None = None, total: bool = False) -> RhoTable:
    """Table of distances d_Y, factors t_Y, rho_F and delta_F at x.

    ``order`` is any admissible listing of the member names (default: the
    member order); the factors do not depend on it. Points on the union of
    the members raise unless ``total`` is set, in which case rho_F is 0 there
    and the factors are NaN.
    """
    x = np.asarray(x, dtype=float)
    names = [y.name for y in F.members]
    dist = {y.name: np.asarray(dist_to(y, x), dtype=float) for y in F.members}
    dmin = np.min(np.stack(list(dist.values())), axis=0)
    on_sing = dmin <= SINGULAR_TOL
    if np.any(on_sing) and not total:
        raise OnSingularSet("rho_F factors are undefined on the singular set")
    below = _below(F)
    seq = list(order) if order is not None else names
    seq = [s for s in seq if s in F]
    if sorted(seq) != sorted(names):
        raise ValueError("order must list every member exactly once")
    with np.errstate(divide="ignore", invalid="ignore"):
        t: dict[str, np.ndarray] = {}
        for name in seq:
            denom = np.ones_like(dmin)
            # multiply in member order so the result is independent of `seq`
            for j in below[name]:
                zname = names[j]
                if zname not in t:
                    raise ValueError(f"order is not admissible: {zname} must precede {name}")
                denom = denom * t[zname]
            t[name] = phi0(dist[name]) / denom
        rho = np.ones_like(dmin)
        for name in names:
            rho = rho * t[name]
    rho = np.where(on_sing, 0.0, rho)
    factors = {k: np.where(on_sing, np.nan, t[k]) for k in names}
    return RhoTable(dist, factors, rho, np.minimum(dmin, 1.0))


def rho_F(F: Semilattice, x, total: bool = True):
    r = rho_system(F, x, total=total).rho
    return float(r) if np.ndim(r) == 0 else r


# Strata-concentrated sampling. Chunks are seeded independently so the
# first N samples of a 2N draw equal the N-sample draw.

def _unit_in(sub: Subspace, g: np.ndarray) -> np.ndarray:
    c = sub.coords(g)
    return (c / np.linalg.norm(c, axis=-1, keepdims=True)) @ sub.basis


def _chunk(F: Semilattice, size: int, rng: np.random.Generator, far_radius: float) -> np.ndarray:
    n = F.n
    kind = rng.uniform(size=size)
    m_idx = rng.integers(0, len(F.members), size=size)
    foot_scale = 10.0 ** rng.uniform(-3.0, np.log10(far_radius), size=size)
    k = rng.integers(1, 9, size=size)
    offset = 10.0 ** (-k + rng.uniform(-0.5, 0.5, size=size))
    g1 = rng.standard_normal((size, n))
    g2 = rng.standard_normal((size, n))
    far_r = 10.0 ** rng.uniform(0.0, np.log10(far_radius), size=size)
    bulk_r = 3.0 * rng.uniform(size=size)

    unit = g1 / np.linalg.norm(g1, axis=-1, keepdims=True)
    pts = np.where((kind < 0.8)[:, None], bulk_r[:, None] * unit, far_r[:, None] * unit)
    near = kind < 0.6
    for i, y in enumerate(F.members):
        sel = near & (m_idx == i)
        if not sel.any():
            continue
        foot = np.zeros((int(sel.sum()), n))
        if y.dim:
            foot = foot_scale[sel, None] * _unit_in(y, g1[sel])
        pts[sel] = foot + offset[sel, None] * _unit_in(y.perp, g2[sel])
    return pts


def strata_samples(F: Semilattice, count: int, seed: int = 0, far_radius: float = 1e6) -> np.ndarray:
    """Points at distance ~10^-k (k = 1..8) from random members, plus bulk
    and far-field points out to ``far_radius``.

    Bulk radii are uniform on [0, 3] rather than uniform in volume, so every
    scale below 3 is covered equally well whatever the dimension.
    """
    children = np.random.SeedSequence(seed).spawn((count + CHUNK - 1) // CHUNK)
    parts = []
    left = count
    for child in children:
        size = min(CHUNK, left)
        parts.append(_chunk(F, CHUNK, np.random.default_rng(child), far_radius)[:size])
        left -= size
    return np.vstack(parts) if parts else np.zeros((0, F.n))


@dataclass
class EquivalenceStats:
    min_ratio: float
    max_ratio: float
    samples: int
    skipped: int
    histogram: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"min_ratio": self.min_ratio, "max_ratio": self.max_ratio, "samples": self.samples,
                "skipped": self.skipped, "histogram": self.histogram}


def _ratio_stats(F: Semilattice, pts: np.ndarray, bins: int) -> EquivalenceStats:
    table = rho_system(F, pts, total=True)
    keep = table.delta > SINGULAR_TOL
    ratio = table.rho[keep] / table.delta[keep]
    lo, hi = float(ratio.min()), float(ratio.max())
    edges = np.linspace(np.floor(np.log10(lo) * 10) / 10, np.ceil(np.log10(hi) * 10) / 10 + 1e-9, bins + 1)
    counts, _ = np.histogram(np.log10(ratio), bins=edges)
    hist = {"log10_edges": edges.tolist(), "counts": counts.tolist()}
    return EquivalenceStats(lo, hi, int(keep.sum()), int((~keep).sum()), hist)


def equivalence_scan(F: Semilattice, samples: int = 100_000, seed: int = 0, bins: int = 20,
                     far_radius: float = 1e6) -> EquivalenceStats:
    """Range and histogram of rho_F / delta_F over strata-concentrated samples."""
    pts = strata_samples(F, samples, seed, far_radius)
    return _ratio_stats(F, pts, bins)


def doubling_stability(F: Semilattice, samples: int, seed: int = 0) -> dict:
    """Relative change of the ratio extremes when the sample count doubles."""
    a = equivalence_scan(F, samples, seed)
    b = equivalence_scan(F, 2 * samples, seed)
    return {"n": a.to_dict(), "2n": b.to_dict(),
            "min_change": abs(b.min_ratio - a.min_ratio) / a.min_ratio,
            "max_change": abs(b.max_ratio - a.max_ratio) / a.max_ratio}


@dataclass
class ProbeReport:
    values: np.ndarray
    sup: float
    second_difference_oscillation: float
    limit_estimate: float


def line_path(base, direction, params) -> np.ndarray:
    base = np.asarray(base, dtype=float)
    direction = np.asarray(direction, dtype=float)
    return base + np.asarray(params, dtype=float)[:, None] * direction


def ratio_probe(F: Semilattice, member: str, path) -> ProbeReport:
    """rho_F / d_Y along a sequence of points avoiding the singular set."""
    pts = np.atleast_2d(np.asarray(path, dtype=float))
    table = rho_system(F, pts)
    vals = table.rho / table.distances[F[member].name]
    dd = np.diff(vals, 2) if len(vals) > 2 else np.zeros(1)
    return ProbeReport(vals, float(np.max(np.abs(vals))), float(np.ptp(dd)), float(vals[-1]))


def true_metric_profile(r):
    """r on [0, 1], 2 - 1/r on [2, inf], blended in between; 2 at infinity."""
    r = np.asarray(r, dtype=float)
    outer = 2.0 - 1.0 / np.maximum(r, 1.0)
    h = _switch(np.clip(r, 1.0, 2.0) / 2.0)
    rc = np.clip(r, 1.0, 2.0)
    mid = rc * h + outer * (1.0 - h)
    out = np.where(r <= 1.0, r, np.where(r >= 2.0, outer, mid))
    return float(out) if out.ndim == 0 else out


def gz_distance(z, ray: bool = False) -> float:
    """Distance from the origin of the compactified quotient to z."""
    if ray:
        return 2.0
    return true_metric_profile(np.linalg.norm(np.asarray(z, dtype=float), axis=-1))


def metric_inequality_check(F: Semilattice, points) -> dict:
    """Max violation of gz(pi_Z x) >= min(1, d_Z(x)) over points and members,
    and of the component bound sum_Y gz^2 >= max_Z gz^2."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    worst = 0.0
    total = np.zeros(len(pts))
    biggest = np.zeros(len(pts))
    for y in F.members:
        d = np.linalg.norm(y.perp.coords(pts), axis=-1)
        g = true_metric_profile(d)
        worst = max(worst, float(np.max(np.minimum(1.0, d) - g, initial=0.0)))
        total += g * g
        biggest = np.maximum(biggest, g * g)
    comp = float(np.max(biggest - total, initial=0.0))
    return {"samples": len(pts), "members": len(F), "max_violation": max(worst, 0.0),
            "component_bound_violation": comp,
            "violations": int(worst > 0.0) + int(comp > 0.0)}
