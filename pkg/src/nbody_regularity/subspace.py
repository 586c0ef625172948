"""Linear subspaces of a euclidean space R^n held as orthonormal bases.

Quotients X/Y are realized concretely as the orthogonal complement of Y,
with coordinates taken in the canonical basis of that complement.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

from .errors import AmbientMismatch, DegenerateInput

RANK_TOL = 1e-10
ORTHO_TOL = 1e-12

__all__ = [
    "AmbientSpace",
    "Subspace",
    "AdaptedBasis",
    "make_subspace",
    "zero_subspace",
    "full_subspace",
    "intersect",
    "span_sum",
    "complement",
    "contains",
    "project",
    "dist_to",
    "adapted_basis",
]


@dataclass(frozen=True)
class AmbientSpace:
    dim: int

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"ambient dimension must be a positive integer, got {self.dim!r}")


def _as_ambient(ambient) -> AmbientSpace:
    return ambient if isinstance(ambient, AmbientSpace) else AmbientSpace(int(ambient))


def _canonical_basis(proj: np.ndarray, rank: int) -> np.ndarray:
    # Basis depends only on the projector: orthonormalize the projected
    # coordinate vectors P e_i over a well-conditioned set of indices, taken
    # in increasing order. Coordinate subspaces get the coordinate vectors.
    n = proj.shape[0]
    if rank == 0:
        return np.zeros((0, n))
    _, _, piv = scipy.linalg.qr(proj, pivoting=True)
    cols = np.sort(piv[:rank])
    q, r = np.linalg.qr(proj[:, cols])
    q = q * np.sign(np.where(np.diag(r) == 0, 1.0, np.diag(r)))
    # one re-orthogonalization pass
    q2, r2 = np.linalg.qr(q)
    q2 = q2 * np.sign(np.diag(r2))
    basis = q2.T.copy()
    basis[np.abs(basis) < 1e-17] = 0.0
    basis.setflags(write=False)
    return basis


class Subspace:
    """A linear subspace Y of R^n.

    ``basis`` has shape ``(dim, n)``; its rows are orthonormal. The zero
    subspace has an empty basis. Two instances compare equal when they span
    the same subspace (projectors agree to ``RANK_TOL``).
    """

    def __init__(self, ambient, basis, name: str | None = None):
        self.ambient = _as_ambient(ambient)
        b = np.asarray(basis, dtype=float).reshape(-1, self.ambient.dim)
        b.setflags(write=False)
        self.basis = b
        self.name = name

    @property
    def n(self) -> int:
        return self.ambient.dim

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def codim(self) -> int:
        return self.n - self.dim

    @cached_property
    def projector(self) -> np.ndarray:
        p = self.basis.T @ self.basis
        p.setflags(write=False)
        return p

    @cached_property
    def fingerprint(self) -> tuple:
        """Hashable key of the span, used for deterministic ordering."""
        return tuple(np.round(self.projector, 9).ravel().tolist())

    @cached_property
    def perp(self) -> "Subspace":
        """Orthogonal complement, the concrete model of X/Y."""
        return complement(self)

    def is_zero(self) -> bool:
        return self.dim == 0

    def is_full(self) -> bool:
        return self.dim == self.n

    def coords(self, x) -> np.ndarray:
        """Coordinates of the projection of ``x`` in this subspace's basis."""
        return np.asarray(x, dtype=float) @ self.basis.T

    def same_span(self, other: "Subspace") -> bool:
        _check_ambient(self, other)
        return self.dim == other.dim and np.max(np.abs(self.projector - other.projector), initial=0.0) < RANK_TOL

    def renamed(self, name: str | None) -> "Subspace":
        return Subspace(self.ambient, self.basis, name)

    def __eq__(self, other):
        if not isinstance(other, Subspace):
            return NotImplemented
        return self.ambient == other.ambient and self.same_span(other)

    def __hash__(self):
        return hash((self.ambient.dim, self.dim))

    def __repr__(self):
        label = f"{self.name!r}, " if self.name else ""
        return f"Subspace({label}dim={self.dim}, n={self.n})"

    def to_dict(self) -> dict:
        return {"name": self.name, "basis": self.basis.tolist()}

    @classmethod
    def from_dict(cls, ambient, data: dict) -> "Subspace":
        """Inverse of :meth:`to_dict`; an orthonormal basis is kept bit for bit."""
        ambient = _as_ambient(ambient)
        basis = np.asarray(data.get("basis", []), dtype=float)
        if basis.size and basis.ndim == 2 and basis.shape[1] == ambient.dim:
            gram = basis @ basis.T
            if np.max(np.abs(gram - np.eye(len(basis)))) < ORTHO_TOL:
                return cls(ambient, basis, data.get("name"))
        return make_subspace(ambient, basis, name=data.get("name"))


def _check_ambient(a: Subspace, b: Subspace) -> None:
    if a.ambient != b.ambient:
        raise AmbientMismatch(f"subspaces live in R^{a.n} and R^{b.n}")


def _from_projector(ambient: AmbientSpace, proj: np.ndarray, name=None) -> Subspace:
    rank = int(round(np.trace(proj)))
    return Subspace(ambient, _canonical_basis(proj, rank), name)


def make_subspace(ambient, generators: Iterable[Sequence[float]], name: str | None = None,
                  nonzero: bool = False) -> Subspace:
    """Orthonormalized span of ``generators``; rank deficiency is dropped."""
    ambient = _as_ambient(ambient)
    gens = np.asarray(list(generators) if not isinstance(generators, np.ndarray) else generators, dtype=float)
    n = ambient.dim
    if gens.size == 0:
        return Subspace(ambient, np.zeros((0, n)), name)
    gens = gens.reshape(-1, n) if gens.ndim == 1 else gens
    if gens.shape[1] != n:
        raise AmbientMismatch(f"generators have length {gens.shape[1]}, expected {n}")
    if not np.all(np.isfinite(gens)):
        raise DegenerateInput("generators must be finite")
    _, s, vt = np.linalg.svd(gens, full_matrices=False)
    rank = int(np.sum(s > RANK_TOL * max(1.0, s[0])))
    if rank == 0:
        if nonzero:
            raise DegenerateInput("all generators vanish")
        return Subspace(ambient, np.zeros((0, n)), name)
    v = vt[:rank]
    return _from_projector(ambient, v.T @ v, name)


def zero_subspace(ambient, name: str | None = "0") -> Subspace:
    ambient = _as_ambient(ambient)
    return Subspace(ambient, np.zeros((0, ambient.dim)), name)


def full_subspace(ambient, name: str | None = "X") -> Subspace:
    ambient = _as_ambient(ambient)
    return Subspace(ambient, np.eye(ambient.dim), name)


def _null_space(mat: np.ndarray) -> np.ndarray:
    n = mat.shape[1]
    _, s, vt = np.linalg.svd(mat, full_matrices=True)
    s_full = np.zeros(n)
    s_full[: s.size] = s
    return vt[s_full <= RANK_TOL]


def intersect(a: Subspace, b: Subspace, name: str | None = None) -> Subspace:
    """A ∩ B as the common null space of the two complementary projectors."""
    _check_ambient(a, b)
    if a.is_zero() or b.is_zero():
        return zero_subspace(a.ambient, name)
    eye = np.eye(a.n)
    null = _null_space(np.vstack([eye - a.projector, eye - b.projector]))
    if null.shape[0] == 0:
        return zero_subspace(a.ambient, name)
    return _from_projector(a.ambient, null.T @ null, name)


def span_sum(a: Subspace, b: Subspace, name: str | None = None) -> Subspace:
    _check_ambient(a, b)
    return make_subspace(a.ambient, np.vstack([a.basis, b.basis]), name)


def complement(a: Subspace, name: str | None = None) -> Subspace:
    """Orthogonal complement; stands in for the quotient X/A."""
    return _from_projector(a.ambient, np.eye(a.n) - a.projector, name)


def contains(a: Subspace, b: Subspace) -> bool:
    """True iff B ⊆ A."""
    _check_ambient(a, b)
    if b.dim > a.dim:
        return False
    if b.is_zero():
        return True
    resid = b.basis - b.basis @ a.projector
    return bool(np.max(np.linalg.norm(resid, axis=1)) <= RANK_TOL)


def project(a: Subspace, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != a.n:
        raise AmbientMismatch(f"point has length {x.shape[-1]}, expected {a.n}")
    return x @ a.projector


def dist_to(a: Subspace, x) -> np.ndarray | float:
    x = np.asarray(x, dtype=float)
    d = np.linalg.norm(x - project(a, x), axis=-1)
    return float(d) if d.ndim == 0 else d


@dataclass(frozen=True)
class AdaptedBasis:
    """Basis e_1..e_n with e_1..e_m spanning Y∩Z, e_1..e_k spanning Y and
    e_1..e_m, e_{k+1}..e_{l+k-m} spanning Z.

    Each block is orthonormal and orthogonal to Y∩Z; the Y-block and the
    Z-block are mutually orthogonal only when Y and Z are orthogonal modulo
    their intersection, which ``orthonormal`` records.
    """

    vectors: np.ndarray
    m: int
    k: int
    l: int

    @property
    def orthonormal(self) -> bool:
        g = self.vectors @ self.vectors.T
        return bool(np.max(np.abs(g - np.eye(len(g))), initial=0.0) < ORTHO_TOL * 10)

    @property
    def y_block(self) -> np.ndarray:
        return self.vectors[: self.k]

    @property
    def z_block(self) -> np.ndarray:
        return np.vstack([self.vectors[: self.m], self.vectors[self.k: self.l + self.k - self.m]])

    @property
    def meet_block(self) -> np.ndarray:
        return self.vectors[: self.m]


def adapted_basis(y: Subspace, z: Subspace) -> AdaptedBasis:
    _check_ambient(y, z)
    w = intersect(y, z)
    w_perp = complement(w)
    y_rest = intersect(y, w_perp)
    z_rest = intersect(z, w_perp)
    rest = complement(span_sum(y, z))
    vecs = np.vstack([w.basis, y_rest.basis, z_rest.basis, rest.basis])
    return AdaptedBasis(vecs, w.dim, y.dim, z.dim)
