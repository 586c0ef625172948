"""Weighted Sobolev seminorms of eigenfunctions near the singular set.

For a multi-index alpha the verifier integrates

    w(x)^(2|alpha| + 2k) |d^alpha u(x)|^2   over {delta_F > eps, |x| < R}

for a decreasing ladder of exclusion radii eps and fits the exponent of
the growth in eps. A weight that makes the integral converge shows up as a
flat fit; an integrable singularity missing its weight shows up as a
negative exponent.

Two quadratures are used. When every member of F is {0} and n <= 3 the
domain is cut into spherical shells (log-spaced below radius 1) with
Gauss-Legendre nodes in log r and a product rule on the sphere. Otherwise
scrambled Sobol points are pushed through a mixture of densities
concentrated near each member, and the estimate is importance weighted.
In both cases the estimate for a smaller eps adds nonnegative pieces to
the estimate for a larger one, so the ladder is monotone.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import special
from scipy.stats import qmc

from .distance import rho_system
from .errors import StencilTooWide
from .lattice import Semilattice

SCHEMA_VERSION = 1
DEFAULT_EPS = (1e-3, 1e-4, 1e-5, 1e-6, 1e-7)
DEFAULT_RADIUS = 40.0

FINITE_SLOPE = 0.1
FINITE_REL_CHANGE = 0.02
DIVERGENT_SLOPE = -0.2

__all__ = [
    "multi_indices",
    "fd_partial",
    "default_step",
    "WeightedNormSpec",
    "Estimate",
    "weighted_seminorm",
    "NormReport",
    "refinement_study",
    "RegularityReport",
    "regularity_report",
    "fit_exponent",
    "classify",
]


def multi_indices(n: int, order: int) -> list[tuple[int, ...]]:
    """All alpha in N^n with |alpha| == order, lexicographically descending."""
    out = []
    for combo in itertools.combinations_with_replacement(range(n), order):
        alpha = [0] * n
        for i in combo:
            alpha[i] += 1
        out.append(tuple(alpha))
    return sorted(set(out), reverse=True)


_STENCILS = {
    0: {0: 1.0},
    1: {-1: -0.5, 1: 0.5},
    2: {-1: 1.0, 0: -2.0, 1: 1.0},
    3: {-2: -0.5, -1: 1.0, 1: -1.0, 2: 0.5},
    4: {-2: 1.0, -1: -4.0, 0: 6.0, 1: -4.0, 2: 1.0},
}


def default_step(F: Semilattice, x, alpha) -> float:
    order = sum(alpha)
    if order == 0:
        return 1e-4
    return min(1e-4, _dist_union(F, x) / (4 * order))


def _dist_union(F: Semilattice, x) -> float:
    x = np.asarray(x, dtype=float)
    return float(min(np.linalg.norm(y.perp.coords(x)) for y in F.members))


def fd_partial(u: Callable, x, alpha, h: float | None = None, F: Semilattice | None = None):
    """Central-difference d^alpha u at x, second order in h.

    With ``F`` given the stencil must stay inside the ball of radius
    |alpha| h around x, which in turn must miss the union of F.
    """
    x = np.asarray(x, dtype=float)
    alpha = tuple(int(a) for a in alpha)
    order = sum(alpha)
    if order == 0:
        return u(x)
    if any(a > 4 for a in alpha):
        raise ValueError("per-coordinate order above 4 is not supported")
    if h is None:
        h = default_step(F, x, alpha) if F is not None else 1e-4
    if h <= 0:
        raise ValueError("step must be positive")
    if F is not None and x.ndim == 1 and _dist_union(F, x) <= order * h:
        raise StencilTooWide(f"stencil of radius {order * h:g} reaches the singular set")
    per_axis = [list(_STENCILS[a].items()) for a in alpha]
    total = 0.0
    for combo in itertools.product(*per_axis):
        shift = np.array([off for off, _ in combo], dtype=float) * h
        coef = math.prod(c for _, c in combo)
        total = total + coef * u(x + shift)
    return total / h**order


@dataclass(frozen=True)
class WeightedNormSpec:
    alpha: tuple[int, ...]
    weight: str = "delta"  # delta | rho | none
    extra_exponent: float = 0.0
    eps: float = 1e-3
    radius: float = DEFAULT_RADIUS
    p: int = 2
    method: str = "auto"  # auto | grid | qmc
    samples: int = 2**16
    seed: int = 0

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError("exclusion radius must be positive")
        if sum(self.alpha) > 4:
            raise ValueError("|alpha| <= 4")
        if self.weight not in ("delta", "rho", "none"):
            raise ValueError(f"unknown weight {self.weight!r}")
        if self.p != 2:
            raise NotImplementedError("only p = 2 norms are evaluated")


STABLE_REL_ERROR = 1e-2
QMC_REPLICATES = 8


@dataclass
class Estimate:
    value: float
    error: float
    method: str
    evaluations: int

    @property
    def inconclusive(self) -> bool:
        """Error bar too wide relative to the value to trust the estimate."""
        return self.error > STABLE_REL_ERROR * abs(self.value) + 1e-300


def _weight_values(F: Semilattice, pts: np.ndarray, kind: str):
    if kind == "none":
        return np.ones(len(pts))
    table = rho_system(F, pts, total=True)
    return table.delta if kind == "delta" else table.rho


def _integrand(u, F, alpha, weight, extra, pts):
    power = 2 * sum(alpha) + 2 * extra
    vals = _partial(u, alpha, pts)
    w = _weight_values(F, pts, weight)
    return w**power * vals * vals


def _partial(u, alpha, pts):
    if hasattr(u, "partial"):
        return np.asarray(u.partial(alpha, pts), dtype=float)
    return np.asarray(fd_partial(u, pts, alpha, h=1e-4), dtype=float)


def _is_point_lattice(F: Semilattice) -> bool:
    return all(m.is_zero() for m in F.members)


def _choose_method(F: Semilattice, method: str) -> str:
    if method != "auto":
        return method
    return "grid" if F.n <= 3 and _is_point_lattice(F) else "qmc"


# Grid quadrature for point singularities.

def _sphere_rule(n: int, level: int):
    if n == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if n == 2:
        m = 16 * level
        ang = 2 * np.pi * (np.arange(m) + 0.5) / m
        return np.stack([np.cos(ang), np.sin(ang)], axis=-1), np.full(m, 2 * np.pi / m)
    if n == 3:
        nt, nphi = 12 * level, 24 * level
        ct, wt = np.polynomial.legendre.leggauss(nt)
        phi = 2 * np.pi * (np.arange(nphi) + 0.5) / nphi
        C, P = np.meshgrid(ct, phi, indexing="ij")
        S = np.sqrt(1 - C**2)
        dirs = np.stack([S * np.cos(P), S * np.sin(P), C], axis=-1).reshape(-1, 3)
        w = (wt[:, None] * np.full(nphi, 2 * np.pi / nphi)[None, :]).ravel()
        return dirs, w
    raise ValueError("grid quadrature is for n <= 3")


def _radial_breaks(lo: float, hi: float) -> list[float]:
    pts = {lo, hi}
    k = math.floor(math.log10(lo))
    while 10.0**k < hi:
        if 10.0**k > lo:
            pts.add(10.0**k)
        k += 1
    for b in (0.5, 1.0, 2.0, 5.0, 20.0):
        if lo < b < hi:
            pts.add(b)
    return sorted(pts)


def _grid_piece(u, F, alpha, weight, extra, lo, hi, level):
    """Integral over lo < |x| < hi in R^n, n <= 3."""
    n = F.n
    dirs, wdir = _sphere_rule(n, level)
    xs, wx = np.polynomial.legendre.leggauss(12 * level)
    total = 0.0
    count = 0
    breaks = _radial_breaks(lo, hi)
    for a, b in zip(breaks[:-1], breaks[1:]):
        la, lb = math.log(a), math.log(b)
        s = 0.5 * (lb - la) * xs + 0.5 * (lb + la)
        ws = 0.5 * (lb - la) * wx
        r = np.exp(s)
        pts = (r[:, None, None] * dirs[None, :, :]).reshape(-1, n)
        f = _integrand(u, F, alpha, weight, extra, pts).reshape(len(r), len(dirs))
        # dx = r^(n-1) dr dS = r^n ds dS with s = log r
        total += float(np.sum((ws * r**n)[:, None] * wdir[None, :] * f))
        count += pts.shape[0]
    return total, count


def _grid_ladder(u, F, alpha, weight, extra, eps_ladder, radius):
    values, errors = [], []
    acc = acc_coarse = 0.0
    evals = 0
    uppers = [radius] + list(eps_ladder[:-1])
    for lo, hi in zip(eps_ladder, uppers):
        fine, c1 = _grid_piece(u, F, alpha, weight, extra, lo, hi, 2)
        coarse, c2 = _grid_piece(u, F, alpha, weight, extra, lo, hi, 1)
        acc += fine
        acc_coarse += coarse
        evals += c1 + c2
        values.append(acc)
        errors.append(abs(acc - acc_coarse))
    return values, errors, evals


# Importance-sampled quasi Monte Carlo for general lattices.

def _ball_volume(d: int, radius: float) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1) * radius**d


def _sphere_area(d: int) -> float:
    """Area of the unit sphere S^(d-1) in R^d."""
    return 2 * math.pi ** (d / 2) / math.gamma(d / 2)


def _qmc_points(F: Semilattice, count: int, eps: float, radius: float, seed):
    """Points from the equal-weight mixture of one component per member
    (foot uniform in Y ∩ ball, log-uniform normal offset in [eps, R]) and a
    uniform component on the ball; returns points and mixture densities."""
    n = F.n
    members = F.members
    ncomp = len(members) + 1
    sob = qmc.Sobol(d=2 * n + 3, scramble=True, seed=seed)
    m = int(math.ceil(math.log2(max(count, 2))))
    U = sob.random_base2(m)[:count]
    U = np.clip(U, 1e-12, 1 - 1e-12)
    comp = np.minimum((U[:, 0] * ncomp).astype(int), ncomp - 1)
    g1 = special.ndtri(U[:, 1:1 + n])
    g2 = special.ndtri(U[:, 1 + n:1 + 2 * n])
    u_r1, u_r2 = U[:, 1 + 2 * n], U[:, 2 + 2 * n]
    log_span = math.log(radius / eps)
    pts = np.zeros((count, n))
    for ci, y in enumerate(members):
        sel = comp == ci
        if not sel.any():
            continue
        p, c = y.dim, y.codim
        foot = np.zeros((int(sel.sum()), n))
        if p:
            cf = y.coords(g1[sel])
            cf /= np.linalg.norm(cf, axis=-1, keepdims=True)
            foot = (radius * u_r1[sel] ** (1.0 / p))[:, None] * (cf @ y.basis)
        cn = y.perp.coords(g2[sel])
        cn /= np.linalg.norm(cn, axis=-1, keepdims=True)
        dist = eps * np.exp(u_r2[sel] * log_span)
        pts[sel] = foot + dist[:, None] * (cn @ y.perp.basis)
    sel = comp == ncomp - 1
    if sel.any():
        d = g1[sel] / np.linalg.norm(g1[sel], axis=-1, keepdims=True)
        pts[sel] = (radius * u_r1[sel] ** (1.0 / n))[:, None] * d
    dens = np.zeros(count)
    for y in members:
        p, c = y.dim, y.codim
        foot_norm = np.linalg.norm(y.coords(pts), axis=-1) if p else np.zeros(count)
        d = np.linalg.norm(y.perp.coords(pts), axis=-1)
        ok = (foot_norm < radius) & (d >= eps * (1 - 1e-12)) & (d <= radius * (1 + 1e-12))
        with np.errstate(divide="ignore"):
            py = np.where(ok, 1.0 / (_ball_volume(p, radius) if p else 1.0)
                          / (log_span * _sphere_area(c) * np.maximum(d, 1e-300) ** c), 0.0)
        dens += py
    inside = np.linalg.norm(pts, axis=-1) < radius
    dens += np.where(inside, 1.0 / _ball_volume(n, radius), 0.0)
    dens /= ncomp
    return pts, dens


def _qmc_ladder(u, F, alpha, weight, extra, eps_ladder, radius, samples, seed, replicates=QMC_REPLICATES):
    """Randomized QMC: independent scrambles, error from their spread."""
    eps_min = min(eps_ladder)
    per = max(samples // replicates, 2)
    seeds = np.random.SeedSequence(seed).spawn(replicates)
    means = np.zeros((replicates, len(eps_ladder)))
    for k, ss in enumerate(seeds):
        pts, dens = _qmc_points(F, per, eps_min, radius, np.random.default_rng(ss))
        inside = np.linalg.norm(pts, axis=-1) < radius
        delta = rho_system(F, pts, total=True).delta
        f = np.zeros(len(pts))
        good = inside & (delta > 0)
        f[good] = _integrand(u, F, alpha, weight, extra, pts[good]) / dens[good]
        for j, eps in enumerate(eps_ladder):
            means[k, j] = math.fsum(np.where(delta > eps, f, 0.0)) / len(f)
    values = [float(v) for v in means.mean(axis=0)]
    errors = [float(e) for e in means.std(axis=0, ddof=1) / math.sqrt(replicates)]
    return values, errors, per * replicates


def weighted_seminorm(u, F: Semilattice, spec: WeightedNormSpec) -> Estimate:
    """Integral of w^(2|alpha| + 2k) |d^alpha u|^2 over {delta_F > eps, |x| < R}."""
    method = _choose_method(F, spec.method)
    if method == "grid":
        if not _is_point_lattice(F) or F.n > 3:
            raise ValueError("grid quadrature needs n <= 3 and F = {{0}}")
        vals, errs, evals = _grid_ladder(u, F, spec.alpha, spec.weight, spec.extra_exponent,
                                         [spec.eps], spec.radius)
    else:
        vals, errs, evals = _qmc_ladder(u, F, spec.alpha, spec.weight, spec.extra_exponent,
                                        [spec.eps], spec.radius, spec.samples, spec.seed)
    return Estimate(vals[0], errs[0], method, evals)


def fit_exponent(eps: Sequence[float], estimates: Sequence[float]) -> float:
    """Least-squares slope of log(estimate) against log(eps)."""
    e = np.asarray(estimates, dtype=float)
    if np.any(e <= 0):
        return float("nan")
    slope, _ = np.polyfit(np.log(np.asarray(eps, dtype=float)), np.log(e), 1)
    return float(slope)


def classify(estimates: Sequence[float], exponent: float) -> str:
    e = np.asarray(estimates, dtype=float)
    if len(e) < 2 or not np.isfinite(exponent):
        return "inconclusive"
    rel = abs(e[-1] - e[-2]) / abs(e[-1]) if e[-1] != 0 else 0.0
    if abs(exponent) < FINITE_SLOPE and rel < FINITE_REL_CHANGE:
        return "finite"
    if exponent < DIVERGENT_SLOPE and np.all(np.diff(e) > 0):
        return "divergent"
    return "inconclusive"


@dataclass
class NormReport:
    case: str
    alpha: tuple[int, ...]
    weight: str
    eps: list[float]
    estimates: list[float]
    errors: list[float]
    exponent: float
    verdict: str
    seed: int
    method: str
    evaluations: int

    def to_dict(self) -> dict:
        return {"case": self.case, "alpha": list(self.alpha), "weight": self.weight, "eps": self.eps,
                "estimates": self.estimates, "errors": self.errors, "exponent": self.exponent,
                "verdict": self.verdict, "seed": self.seed, "method": self.method,
                "evaluations": self.evaluations}

    @classmethod
    def from_dict(cls, d: dict) -> "NormReport":
        return cls(d["case"], tuple(d["alpha"]), d["weight"], list(d["eps"]), list(d["estimates"]),
                   list(d["errors"]), d["exponent"], d["verdict"], d["seed"], d["method"], d["evaluations"])


def refinement_study(u, F: Semilattice, alpha, weight: str = "delta", eps_ladder=DEFAULT_EPS, *,
                     extra_exponent: float = 0.0, radius: float = DEFAULT_RADIUS, method: str = "auto",
                     samples: int = 2**18, seed: int = 0, case: str = "") -> NormReport:
    """Estimates over a decreasing eps ladder, fitted exponent and verdict."""
    eps = [float(e) for e in eps_ladder]
    if len(eps) < 4 or any(b >= a for a, b in zip(eps, eps[1:])):
        raise ValueError("eps ladder must be strictly decreasing with at least 4 rungs")
    if eps[0] >= 1.0:
        raise ValueError("exclusion radii must be below 1")
    alpha = tuple(int(a) for a in alpha)
    method = _choose_method(F, method)
    if method == "grid":
        vals, errs, evals = _grid_ladder(u, F, alpha, weight, extra_exponent, eps, radius)
    else:
        vals, errs, evals = _qmc_ladder(u, F, alpha, weight, extra_exponent, eps, radius, samples, seed)
    expo = fit_exponent(eps, vals)
    return NormReport(case, alpha, weight, eps, vals, errs, expo, classify(vals, expo), seed, method, evals)


@dataclass
class RegularityReport:
    case: str
    weight: str
    max_order: int
    seed: int
    weighted: list[NormReport] = field(default_factory=list)
    unweighted: list[NormReport] = field(default_factory=list)

    @property
    def weighted_all_finite(self) -> bool:
        return all(r.verdict == "finite" for r in self.weighted)

    @property
    def inconclusive(self) -> list[NormReport]:
        return [r for r in self.weighted + self.unweighted if r.verdict == "inconclusive"]

    def to_dict(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, "case": self.case, "weight": self.weight,
                "max_order": self.max_order, "seed": self.seed,
                "weighted_all_finite": self.weighted_all_finite,
                "weighted": [r.to_dict() for r in self.weighted],
                "unweighted": [r.to_dict() for r in self.unweighted]}

    @classmethod
    def from_dict(cls, d: dict) -> "RegularityReport":
        return cls(d["case"], d["weight"], d["max_order"], d["seed"],
                   [NormReport.from_dict(r) for r in d["weighted"]],
                   [NormReport.from_dict(r) for r in d["unweighted"]])


def regularity_report(pair, F: Semilattice | None = None, kmax: int = 3, weight: str = "delta",
                      eps_ladder=DEFAULT_EPS, seed: int = 0, **kw) -> RegularityReport:
    """Refinement studies for every |alpha| <= kmax, weighted and unweighted."""
    if kmax > 4:
        raise ValueError("kmax <= 4")
    F = F if F is not None else pair.F
    rep = RegularityReport(pair.name, weight, kmax, seed)
    for order in range(kmax + 1):
        for alpha in multi_indices(F.n, order):
            rep.weighted.append(refinement_study(pair.u, F, alpha, weight, eps_ladder, seed=seed,
                                                 case=pair.name, **kw))
            rep.unweighted.append(refinement_study(pair.u, F, alpha, "none", eps_ladder, seed=seed,
                                                   case=pair.name, **kw))
    return rep
