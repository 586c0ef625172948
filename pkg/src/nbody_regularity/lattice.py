"""Intersection-closed families of subspaces and the combinatorics of
iterated blow-up orders.

An order is a tuple of member names, possibly with repetitions, where the
marker ``EMPTY`` stands for the empty set (blowing up along it changes
nothing). Pull-backs are computed combinatorially: after blowing up the
head ``P``, every later entry contained in ``P`` lifts to ``EMPTY`` and the
others keep their name, with containment between lifts inherited from the
underlying subspaces.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

import numpy as np

from .errors import AmbientMismatch, ContainsAmbient, UnknownMember
from .subspace import Subspace, _as_ambient, contains, dist_to, intersect, zero_subspace

EMPTY = "EMPTY"

__all__ = [
    "EMPTY",
    "Semilattice",
    "Diagnostic",
    "OrderedTuple",
    "Admissibility",
    "LatticeRelations",
    "AtomicRelations",
    "closure",
    "validate",
    "delta_F",
    "generate_admissible_order",
    "size_order",
    "is_admissible",
    "reduce_tuple",
    "tuple_pullback",
    "disjoint_pairs",
]


def _sort_key(s: Subspace):
    return (s.dim, s.fingerprint)


class Semilattice:
    """A finite family of named subspaces of one ambient space.

    The constructor does not enforce closure; use :func:`closure` to build a
    valid semilattice and :func:`validate` to audit an arbitrary family.
    """

    def __init__(self, ambient, members: Iterable[Subspace], sort: bool = True):
        self.ambient = _as_ambient(ambient)
        members = list(members)
        for i, m in enumerate(members):
            if m.ambient != self.ambient:
                raise AmbientMismatch(f"member {m.name!r} lives in R^{m.n}, expected R^{self.ambient.dim}")
            if m.name is None:
                members[i] = m.renamed(f"Y{i}")
        if sort:
            members.sort(key=_sort_key)
        self.members: tuple[Subspace, ...] = tuple(members)
        self._by_name = {m.name: m for m in self.members}

    @property
    def n(self) -> int:
        return self.ambient.dim

    @property
    def names(self) -> list[str]:
        return [m.name for m in self.members]

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, name) -> bool:
        return name in self._by_name

    def __getitem__(self, name: str) -> Subspace:
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownMember(f"{name!r} is not a member of the semilattice") from None

    def find(self, sub: Subspace) -> Subspace | None:
        for m in self.members:
            if m.same_span(sub):
                return m
        return None

    def zero(self) -> Subspace | None:
        for m in self.members:
            if m.is_zero():
                return m
        return None

    def strictly_below(self, name: str) -> list[Subspace]:
        """Members strictly contained in ``name``."""
        y = self[name]
        return [z for z in self.members if z.dim < y.dim and contains(y, z)]

    def hasse_edges(self) -> list[tuple[str, str]]:
        """Cover relations (lower, upper) of the inclusion order."""
        edges = []
        for y in self.members:
            below = [z for z in self.strictly_below(y.name)]
            for z in below:
                if not any(w is not z and contains(w, z) and w.dim > z.dim for w in below):
                    edges.append((z.name, y.name))
        return edges

    def to_dict(self) -> dict:
        return {"ambient_dim": self.n, "subspaces": [m.to_dict() for m in self.members]}

    def __repr__(self):
        return f"Semilattice(n={self.n}, members={self.names})"


def _meet_name(a: Subspace, b: Subspace) -> str:
    return "&".join(sorted({a.name, b.name}))


def closure(ambient, subspaces: Sequence[Subspace]) -> Semilattice:
    """Smallest intersection-closed family containing ``subspaces`` and {0}."""
    ambient = _as_ambient(ambient)
    found: list[Subspace] = []

    def add(s: Subspace) -> bool:
        if any(f.same_span(s) for f in found):
            return False
        found.append(s)
        return True

    for i, s in enumerate(subspaces):
        if s.ambient != ambient:
            raise AmbientMismatch(f"subspace {s.name!r} lives in R^{s.n}")
        if s.is_full():
            raise ContainsAmbient(f"{s.name or 'input'} is the whole space")
        add(s if s.name is not None else s.renamed(f"Y{i}"))
    if not any(f.is_zero() for f in found):
        add(zero_subspace(ambient))

    changed = True
    while changed:
        changed = False
        for a, b in itertools.combinations(list(found), 2):
            meet = intersect(a, b)
            if add(meet.renamed("0" if meet.is_zero() else _meet_name(a, b))):
                changed = True
    return Semilattice(ambient, found)


@dataclass(frozen=True)
class Diagnostic:
    kind: str
    message: str
    members: tuple = ()

    def to_dict(self) -> dict:
        return {"kind": self.kind, "message": self.message, "members": list(self.members)}


def validate(F: Semilattice) -> list[Diagnostic]:
    """Every violated semilattice invariant; empty iff ``F`` is valid."""
    out: list[Diagnostic] = []
    if F.zero() is None:
        out.append(Diagnostic("missing-zero", "{0} is not a member"))
    for m in F.members:
        if m.is_full():
            out.append(Diagnostic("contains-ambient", f"{m.name} is the whole space", (m.name,)))
    for a, b in itertools.combinations(F.members, 2):
        if a.same_span(b):
            out.append(Diagnostic("duplicate", f"{a.name} and {b.name} have the same span", (a.name, b.name)))
    for a, b in itertools.combinations(F.members, 2):
        if a.same_span(b):
            continue
        meet = intersect(a, b)
        if F.find(meet) is None:
            out.append(Diagnostic("missing-intersection",
                                  f"{a.name} ∩ {b.name} (dim {meet.dim}) is not a member", (a.name, b.name)))
    return out


def delta_F(F: Semilattice, x) -> np.ndarray | float:
    """min(dist(x, ∪F), 1); accepts a point or an array of points."""
    x = np.asarray(x, dtype=float)
    d = np.min(np.stack([np.asarray(dist_to(y, x)) for y in F.members]), axis=0)
    d = np.minimum(d, 1.0)
    return float(d) if d.ndim == 0 else d


@dataclass(frozen=True)
class OrderedTuple:
    """Entries of an iterated blow-up, head first.

    ``blown`` records what earlier pull-backs already blew up; it only
    matters for deciding which lifts became disjoint.
    """

    entries: tuple[Hashable, ...]
    blown: tuple[Hashable, ...] = field(default=())

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    @classmethod
    def of(cls, *entries) -> "OrderedTuple":
        return cls(tuple(entries))


class LatticeRelations:
    """Containment oracle for entries that name members of a semilattice."""

    def __init__(self, F: Semilattice):
        self.F = F

    def check(self, entry) -> None:
        if entry != EMPTY and entry not in self.F:
            raise UnknownMember(f"{entry!r} is not a member of the semilattice")

    def subset(self, q, r) -> bool:
        if q == EMPTY:
            return True
        if r == EMPTY:
            return False
        return contains(self.F[r], self.F[q])

    def strict_subset(self, q, r) -> bool:
        return q != r and self.subset(q, r) and not self.subset(r, q)

    def lift(self, q, head):
        if q == EMPTY or head == EMPTY:
            return q
        return EMPTY if self.subset(q, head) else q

    def disjoint(self, q, r, blown: Sequence) -> bool:
        if EMPTY in (q, r):
            return True
        meet = intersect(self.F[q], self.F[r])
        return any(b != EMPTY and contains(self.F[b], meet) for b in blown)


class AtomicRelations:
    """Containment oracle for abstract sets given as frozensets of pairwise
    disjoint pieces (for example connected components).

    Blowing up ``P`` removes its pieces from every later entry, which is
    the closure of the preimage of ``Q ∖ P`` when pieces are disjoint.
    """

    def check(self, entry) -> None:
        if entry != EMPTY and not isinstance(entry, frozenset):
            raise UnknownMember(f"{entry!r} is not a set of atoms")

    def subset(self, q, r) -> bool:
        if q == EMPTY:
            return True
        if r == EMPTY:
            return False
        return q <= r

    def strict_subset(self, q, r) -> bool:
        return q != r and self.subset(q, r) and not self.subset(r, q)

    def lift(self, q, head):
        if q == EMPTY or head == EMPTY:
            return q
        rest = q - head
        return frozenset(rest) if rest else EMPTY

    def disjoint(self, q, r, blown: Sequence) -> bool:
        if EMPTY in (q, r):
            return True
        return not (q & r)


def _relations(rel_or_lattice):
    return LatticeRelations(rel_or_lattice) if isinstance(rel_or_lattice, Semilattice) else rel_or_lattice


def tuple_pullback(t: OrderedTuple, relations) -> OrderedTuple:
    """Drop the head P_1 and lift every remaining entry through [M : P_1]."""
    rel = _relations(relations)
    if not t.entries:
        return t
    head, rest = t.entries[0], t.entries[1:]
    return OrderedTuple(tuple(rel.lift(q, head) for q in rest), t.blown + (head,))


def disjoint_pairs(t: OrderedTuple, relations) -> list[tuple[int, int]]:
    """Index pairs of distinct non-empty entries whose lifts no longer meet."""
    rel = _relations(relations)
    out = []
    for i, j in itertools.combinations(range(len(t)), 2):
        q, r = t[i], t[j]
        if EMPTY in (q, r) or q == r:
            continue
        if rel.disjoint(q, r, t.blown):
            out.append((i, j))
    return out


def reduce_tuple(t: OrderedTuple) -> OrderedTuple:
    """Remove repetitions, keeping the first occurrence of each entry."""
    seen = set()
    out = []
    for e in t.entries:
        if e not in seen:
            seen.add(e)
            out.append(e)
    return OrderedTuple(tuple(out), t.blown)


@dataclass(frozen=True)
class Admissibility:
    ok: bool
    index: int | None = None
    head_index: int | None = None

    def __bool__(self):
        return self.ok


def is_admissible(relations, order: OrderedTuple | Sequence) -> Admissibility:
    """Check the recursive minimality condition.

    On failure ``index`` is the position of the first later entry strictly
    contained in the current head and ``head_index`` the position of that
    head, both in the original tuple. Empty entries never violate.
    """
    rel = _relations(relations)
    if not isinstance(order, OrderedTuple):
        order = OrderedTuple(tuple(order))
    for e in order.entries:
        rel.check(e)
    entries = list(order.entries)
    pos = list(range(len(entries)))
    t = OrderedTuple(tuple(entries), order.blown)
    while t.entries:
        head = t.entries[0]
        if head != EMPTY:
            for j in range(1, len(t.entries)):
                q = t.entries[j]
                if q != EMPTY and rel.strict_subset(q, head):
                    return Admissibility(False, pos[j], pos[0])
        t = tuple_pullback(t, rel)
        pos = pos[1:]
    return Admissibility(True)


def generate_admissible_order(F: Semilattice, prefer: str | None = None) -> OrderedTuple:
    """(EMPTY, P_1, ..., P_k) by repeatedly taking a minimal remaining member.

    Ties go to the deterministic member order. With ``prefer=Y`` the members
    inside Y are exhausted first, so everything listed before Y lies in Y.
    """
    if prefer is not None:
        target = F[prefer]
    remaining = list(F.members)
    chosen: list[str] = []
    while remaining:
        pool = remaining
        if prefer is not None and prefer not in chosen:
            pool = [m for m in remaining if contains(target, m)]
        pick = next(m for m in pool
                    if not any(o is not m and o.dim < m.dim and contains(m, o) for o in remaining))
        chosen.append(pick.name)
        remaining.remove(pick)
    return OrderedTuple((EMPTY, *chosen))


def size_order(F: Semilattice) -> OrderedTuple:
    """Members by increasing dimension; admissible for linear lattices."""
    return OrderedTuple((EMPTY, *[m.name for m in sorted(F.members, key=lambda m: m.dim)]))
