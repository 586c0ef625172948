"""Inverse-square and Coulomb potentials, closed-form eigenpairs and residuals.

Sign convention: the Laplacian is sum_i d_i^2 and eigenpairs satisfy
(Laplacian + V) u = lambda u.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .distance import rho_F, strata_samples
from .errors import DomainError, InvalidEigenpair, OnSingularSet, UnknownMember
from .lattice import Semilattice, closure
from .subspace import dist_to, make_subspace, zero_subspace

RESIDUAL_TOL = 1e-8
SINGULAR_TOL = 1e-14

__all__ = [
    "BoundedCoefficient",
    "InverseSquarePotential",
    "make_inverse_square",
    "eval_potential",
    "rho2V_bound_scan",
    "RadialFunction",
    "Eigenpair",
    "hydrogen_pair",
    "radial_invsq_pair",
    "nbody_coulomb",
    "residual",
    "laplacian",
]


@dataclass(frozen=True)
class BoundedCoefficient:
    """Smooth coefficient supplied as a callback with a declared sup bound."""

    fn: Callable[[np.ndarray], np.ndarray]
    bound: float

    def __call__(self, x):
        return np.asarray(self.fn(x), dtype=float)


def _coef(c, x: np.ndarray):
    if callable(c):
        return c(x)
    return float(c)


class InverseSquarePotential:
    """V = sum_Y (a_Y / d_Y^2 + b_Y / d_Y) + c."""

    def __init__(self, F: Semilattice, terms: Mapping[str, tuple] | None = None, c=0.0):
        self.F = F
        self.terms: dict[str, tuple] = {}
        for name, (a, b) in (terms or {}).items():
            if name not in F:
                raise UnknownMember(f"potential term on unknown member {name!r}")
            for coef in (a, b):
                if callable(coef) and not isinstance(coef, BoundedCoefficient):
                    raise TypeError("callback coefficients must declare a bound (BoundedCoefficient)")
            self.terms[name] = (a, b)
        if callable(c) and not isinstance(c, BoundedCoefficient):
            raise TypeError("callback coefficients must declare a bound (BoundedCoefficient)")
        self.c = c

    def __call__(self, x):
        return eval_potential(self, x)

    def __add__(self, other: "InverseSquarePotential") -> "InverseSquarePotential":
        if other.F is not self.F and [m.name for m in other.F] != [m.name for m in self.F]:
            raise ValueError("potentials live on different semilattices")
        terms = dict(self.terms)
        for name, (a2, b2) in other.terms.items():
            if name in terms:
                a1, b1 = terms[name]
                terms[name] = (_add(a1, a2), _add(b1, b2))
            else:
                terms[name] = (a2, b2)
        return InverseSquarePotential(self.F, terms, _add(self.c, other.c))

    def to_dict(self) -> dict:
        def plain(v):
            return v if not callable(v) else {"callback": True, "bound": v.bound}
        return {"terms": [{"member": k, "a": plain(a), "b": plain(b)} for k, (a, b) in self.terms.items()],
                "c": plain(self.c)}


def _add(p, q):
    if not callable(p) and not callable(q):
        return float(p) + float(q)
    return BoundedCoefficient(lambda x, p=p, q=q: _coef(p, x) + _coef(q, x),
                              (p.bound if callable(p) else abs(p)) + (q.bound if callable(q) else abs(q)))


def make_inverse_square(F: Semilattice, terms: Mapping[str, tuple] | None = None, c=0.0) -> InverseSquarePotential:
    return InverseSquarePotential(F, terms, c)


def eval_potential(V: InverseSquarePotential, x):
    x = np.asarray(x, dtype=float)
    dmin = np.min(np.stack([np.asarray(dist_to(y, x)) for y in V.F.members]), axis=0)
    if np.any(dmin <= SINGULAR_TOL):
        raise OnSingularSet("the potential is singular on the union of the members")
    total = np.zeros(x.shape[:-1]) + _coef(V.c, x)
    for name, (a, b) in V.terms.items():
        d = np.asarray(dist_to(V.F[name], x))
        total = total + _coef(a, x) / d**2 + _coef(b, x) / d
    return float(total) if np.ndim(total) == 0 else total


def rho2V_bound_scan(V: InverseSquarePotential, samples: int = 100_000, seed: int = 0) -> dict:
    """sup |rho_F^2 V| on strata-concentrated samples, at N and 2N points."""
    def sup(count):
        pts = strata_samples(V.F, count, seed)
        vals = rho_F(V.F, pts) ** 2 * eval_potential(V, pts)
        return float(np.max(np.abs(vals)))

    s1, s2 = sup(samples), sup(2 * samples)
    change = abs(s2 - s1) / s1 if s1 else 0.0
    return {"sup": s2, "sup_half": s1, "relative_change": change, "bounded": change < 0.05}


def _multi_to_axes(alpha) -> list[int]:
    return [i for i, a in enumerate(alpha) for _ in range(a)]


class RadialFunction:
    """u(x) = g(|x|) on R^n with analytic partials up to order 3.

    ``derivs`` holds g, g', g'', g''' as callables of r.
    """

    max_order = 3

    def __init__(self, n: int, derivs, label: str = "radial"):
        if len(derivs) != 4:
            raise ValueError("need g and its first three derivatives")
        self.n = n
        self.derivs = derivs
        self.label = label

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.derivs[0](np.linalg.norm(x, axis=-1))

    def partial(self, alpha, x):
        x = np.asarray(x, dtype=float)
        alpha = tuple(int(a) for a in alpha)
        if len(alpha) != self.n:
            raise ValueError(f"multi-index {alpha} has wrong length for R^{self.n}")
        axes = _multi_to_axes(alpha)
        order = len(axes)
        r = np.linalg.norm(x, axis=-1)
        if order == 0:
            return self.derivs[0](r)
        if order > self.max_order:
            # one central difference on top of the analytic lower partial
            i = axes[0]
            lower = list(alpha)
            lower[i] -= 1
            h = 1e-5 * np.maximum(r, 1e-3)[..., None]
            step = np.zeros(self.n)
            step[i] = 1.0
            return (self.partial(lower, x + h * step) - self.partial(lower, x - h * step)) / (2.0 * h[..., 0])
        nv = x / r[..., None]
        g1 = self.derivs[1](r)
        if order == 1:
            return g1 * nv[..., axes[0]]
        g2 = self.derivs[2](r)
        i, j = axes[0], axes[1]
        ni, nj = nv[..., i], nv[..., j]
        dij = float(i == j)
        if order == 2:
            return g2 * ni * nj + (g1 / r) * (dij - ni * nj)
        k = axes[2]
        nk = nv[..., k]
        g3 = self.derivs[3](r)
        dik, djk = float(i == k), float(j == k)
        mixed = dij * nk + dik * nj + djk * ni - 3.0 * ni * nj * nk
        return g3 * ni * nj * nk + (g2 / r - g1 / r**2) * mixed

    def laplacian(self, x):
        x = np.asarray(x, dtype=float)
        total = 0.0
        for i in range(self.n):
            alpha = [0] * self.n
            alpha[i] = 2
            total = total + self.partial(alpha, x)
        return total


def laplacian(u, x):
    return u.laplacian(x)


@dataclass
class Eigenpair:
    """Closed-form u with (Laplacian + V) u = lam u off the singular set.

    Construction probes the residual at 100 log-spaced radii and refuses
    pairs that fail it.
    """

    name: str
    u: RadialFunction
    V: InverseSquarePotential
    lam: float
    note: str = ""
    probe_radii: np.ndarray = field(default_factory=lambda: np.logspace(-2, 1, 100), repr=False)

    def __post_init__(self):
        pts = _probe_points(self.u.n, self.probe_radii)
        res = residual(self, pts, check=False)
        if not np.all(np.isfinite(res)) or np.max(res) >= RESIDUAL_TOL:
            raise InvalidEigenpair(f"{self.name}: residual {np.max(res):.3e} exceeds {RESIDUAL_TOL}")

    @property
    def F(self) -> Semilattice:
        return self.V.F

    @property
    def n(self) -> int:
        return self.u.n


def _probe_points(n: int, radii) -> np.ndarray:
    rng = np.random.default_rng(20240229)
    dirs = rng.standard_normal((len(radii), n))
    dirs /= np.linalg.norm(dirs, axis=-1, keepdims=True)
    return np.asarray(radii)[:, None] * dirs


def residual(pair: Eigenpair, x, check: bool = True):
    """|(Laplacian + V) u - lam u| at x using analytic second partials."""
    x = np.asarray(x, dtype=float)
    u = pair.u(x)
    res = np.abs(pair.u.laplacian(x) + eval_potential(pair.V, x) * u - pair.lam * u)
    return float(res) if np.ndim(res) == 0 else res


def _point_lattice(n: int) -> Semilattice:
    return closure(n, [zero_subspace(n)])


def hydrogen_pair() -> Eigenpair:
    """u = exp(-r) on R^3, V = 2/r, lambda = 1."""
    F = _point_lattice(3)
    e = lambda r: np.exp(-r)
    u = RadialFunction(3, (e, lambda r: -e(r), e, lambda r: -e(r)), "exp(-r)")
    V = make_inverse_square(F, {"0": (0.0, 2.0)})
    return Eigenpair("hydrogen", u, V, 1.0, "Coulomb class, F = {{0}} in R^3")


def radial_invsq_pair(gamma: float) -> Eigenpair:
    """u = r^gamma exp(-r) on R^3 with V = -gamma(gamma+1)/r^2 + 2(gamma+1)/r, lambda = 1."""
    if not 0.0 < gamma < 1.0:
        raise DomainError("gamma must lie in (0, 1)")
    g = float(gamma)
    F = _point_lattice(3)

    def g0(r):
        return r**g * np.exp(-r)

    def p(r):
        return g / r - 1.0

    def q(r):
        return p(r) ** 2 - g / r**2

    def g1(r):
        return p(r) * g0(r)

    def g2(r):
        return q(r) * g0(r)

    def g3(r):
        dq = 2.0 * p(r) * (-g / r**2) + 2.0 * g / r**3
        return (dq + q(r) * p(r)) * g0(r)

    u = RadialFunction(3, (g0, g1, g2, g3), f"r^{g} exp(-r)")
    V = make_inverse_square(F, {"0": (-g * (g + 1.0), 2.0 * (g + 1.0))})
    return Eigenpair(f"invsq:{g:g}", u, V, 1.0, "inverse-square class, F = {{0}} in R^3")


def _block_zero(N: int, j: int) -> np.ndarray:
    rows = []
    for b in range(N):
        if b != j:
            for k in range(3):
                row = np.zeros(3 * N)
                row[3 * b + k] = 1.0
                rows.append(row)
    return np.array(rows).reshape(-1, 3 * N)


def _diagonal(N: int, i: int, j: int) -> np.ndarray:
    rows = []
    for b in range(N):
        if b not in (i, j):
            for k in range(3):
                row = np.zeros(3 * N)
                row[3 * b + k] = 1.0
                rows.append(row)
    for k in range(3):
        row = np.zeros(3 * N)
        row[3 * i + k] = row[3 * j + k] = 1.0
        rows.append(row)
    return np.array(rows)


def nbody_coulomb(N: int, b=None, c=None):
    """Collision semilattice in R^(3N) and the Coulomb potential
    sum_j b_j/|x_j| + sum_{i<j} c_ij/|x_i - x_j|.

    ``c`` may be an N x N array or a mapping {(i, j): c_ij} with 1-based
    particle labels. Since dist(x, {x_i = x_j}) = |x_i - x_j|/sqrt(2), the
    pair coefficient enters the 1/d slot as c_ij/sqrt(2).
    """
    if N < 1:
        raise DomainError("need at least one particle")
    n = 3 * N
    b = np.ones(N) if b is None else np.asarray(b, dtype=float)
    pairs = list(itertools.combinations(range(N), 2))
    if c is None:
        cij = {p: 1.0 for p in pairs}
    elif isinstance(c, Mapping):
        cij = {(i - 1, j - 1): float(v) for (i, j), v in c.items()}
    else:
        arr = np.asarray(c, dtype=float)
        cij = {(i, j): float(arr[i, j]) for i, j in pairs}
    gens = [make_subspace(n, _block_zero(N, j), name=f"x{j + 1}=0") for j in range(N)]
    gens += [make_subspace(n, _diagonal(N, i, j), name=f"x{i + 1}=x{j + 1}") for i, j in pairs]
    F = closure(n, gens)
    terms = {f"x{j + 1}=0": (0.0, float(b[j])) for j in range(N)}
    for (i, j) in pairs:
        terms[f"x{i + 1}=x{j + 1}"] = (0.0, cij.get((i, j), 0.0) / math.sqrt(2.0))
    return F, make_inverse_square(F, terms)
