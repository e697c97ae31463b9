"""Congruences of finite sections and the bridge to equational theories."""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .block_algebra import BlockAlgebra
from .clone_engine import FinAlgebra, term_clone, term_eval
from .finite_ops import canonicalize
from .tables import TableAlgebra, from_clone_algebra, from_fin_algebra, parallel_map
from .terms import Term, max_var


class SizeGuardExceeded(ValueError):
    pass


def _translations(tab: np.ndarray) -> np.ndarray:
    """All unary polynomial maps x -> op(c.., x, d..) of one table, as rows."""
    N = tab.shape[0] if tab.ndim else 0
    rows = []
    for p in range(tab.ndim):
        rows.append(np.moveaxis(tab, p, -1).reshape(-1, N))
    return np.concatenate(rows) if rows else np.empty((0, N), dtype=np.int64)


@dataclass
class SectionStructure:
    """A finite section with the unary translations of its operations."""
    algebra: TableAlgebra
    translations: np.ndarray
    descriptor: str

    @classmethod
    def build(cls, algebra: TableAlgebra, ops: Iterable[str] | None = None,
              descriptor: str | None = None) -> "SectionStructure":
        names = sorted(algebra.ops if ops is None else ops)
        N = algebra.size
        parts = [_translations(algebra.ops[n]) for n in names if algebra.ops[n].ndim]
        if parts:
            trans = np.unique(np.concatenate(parts), axis=0)
        else:
            trans = np.empty((0, N), dtype=np.int64)
        # drop the identity map, it never adds pairs
        trans = trans[~np.all(trans == np.arange(N), axis=1)] if len(trans) else trans
        if trans.size and (trans.min() < 0 or trans.max() >= N):
            raise ValueError("translation leaves the section")
        desc = descriptor or f"{algebra.name}: {N} elements, ops {','.join(names)}"
        return cls(algebra, trans, desc)

    @property
    def size(self) -> int:
        return self.algebra.size

    @property
    def labels(self):
        return self.algebra.labels


@dataclass(frozen=True)
class Congruence:
    """A partition stored as a canonical class-index vector (first-seen numbering)."""
    classes: tuple[int, ...]

    @classmethod
    def from_roots(cls, roots: Sequence[int]) -> "Congruence":
        seen: dict[int, int] = {}
        return cls(tuple(seen.setdefault(r, len(seen)) for r in roots))

    @property
    def num_classes(self) -> int:
        return max(self.classes, default=-1) + 1

    def related(self, a: int, b: int) -> bool:
        return self.classes[a] == self.classes[b]

    def blocks(self) -> list[list[int]]:
        out = [[] for _ in range(self.num_classes)]
        for x, c in enumerate(self.classes):
            out[c].append(x)
        return out

    def leq(self, other: "Congruence") -> bool:
        """self is contained in other."""
        image: dict[int, int] = {}
        for c, d in zip(self.classes, other.classes):
            if image.setdefault(c, d) != d:
                return False
        return True

    def meet(self, other: "Congruence") -> "Congruence":
        return Congruence.from_roots(list(zip(self.classes, other.classes)))

    def fingerprint(self) -> tuple:
        return tuple(sorted(tuple(b) for b in self.blocks()))

    def sort_key(self):
        return (self.num_classes, self.fingerprint())

    def is_compatible(self, s: SectionStructure) -> bool:
        t = s.translations
        if not len(t):
            return True
        cls = np.asarray(self.classes)
        for block in self.blocks():
            images = cls[t[:, block]]
            if np.any(images != images[:, :1]):
                return False
        return True


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True


def congruence_generate(s: SectionStructure, pairs: Iterable[tuple[int, int]],
                        start: Congruence | None = None) -> Congruence:
    """Least congruence containing ``pairs`` (and ``start``), by union-find saturation."""
    N = s.size
    uf = _UnionFind(N)
    work = []
    if start is not None:
        for block in start.blocks():
            for x in block[1:]:
                if uf.union(block[0], x):
                    work.append((block[0], x))
    for a, b in pairs:
        if not (0 <= a < N and 0 <= b < N):
            raise IndexError(f"pair ({a}, {b}) outside the section")
        if uf.union(a, b):
            work.append((a, b))
    T = s.translations
    while work:
        a, b = work.pop()
        if not len(T):
            continue
        ta, tb = T[:, a], T[:, b]
        diff = ta != tb
        for x, y in zip(ta[diff].tolist(), tb[diff].tolist()):
            if uf.union(x, y):
                work.append((x, y))
    return Congruence.from_roots([uf.find(x) for x in range(N)])


def _join(s: SectionStructure, a: Congruence, b: Congruence) -> Congruence:
    uf = _UnionFind(s.size)
    for c in (a, b):
        for block in c.blocks():
            for x in block[1:]:
                uf.union(block[0], x)
    return Congruence.from_roots([uf.find(x) for x in range(s.size)])


@dataclass
class CongruenceLattice:
    descriptor: str
    labels: tuple[str, ...]
    congruences: list[Congruence]
    covers: list[tuple[int, int]] = field(default_factory=list)

    def __len__(self):
        return len(self.congruences)

    def to_dict(self) -> dict:
        return {
            "section": self.descriptor,
            "elements": list(self.labels),
            "count": len(self.congruences),
            "congruences": [[[self.labels[x] for x in b] for b in c.blocks()]
                            for c in self.congruences],
            "covers": [list(p) for p in self.covers],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def congruence_enumerate(s: SectionStructure, limit: int = 40) -> CongruenceLattice:
    """All congruences of the section: joins of principal congruences, plus Δ."""
    N = s.size
    if N > limit:
        raise SizeGuardExceeded(f"section has {N} elements, guard is {limit}")
    pairs = [(a, b) for a in range(N) for b in range(a + 1, N)]
    principal = parallel_map(lambda p: congruence_generate(s, [p]), pairs)
    delta = Congruence(tuple(range(N)))
    found = {delta}
    found.update(principal)
    base = sorted(set(principal), key=Congruence.sort_key)
    frontier = list(base)
    while frontier:
        new = []
        for c in frontier:
            for p in base:
                j = _join(s, c, p)
                if j not in found:
                    found.add(j)
                    new.append(j)
        frontier = new
    congs = sorted(found, key=Congruence.sort_key, reverse=True)
    covers = []
    for i, lo in enumerate(congs):
        ups = [j for j, hi in enumerate(congs) if j != i and lo.leq(hi)]
        for j in ups:
            if not any(k != j and congs[k].leq(congs[j]) for k in ups):
                covers.append((i, j))
    return CongruenceLattice(s.descriptor, s.labels, congs, sorted(covers))


def emit_dot(lattice: CongruenceLattice) -> str:
    lines = ["digraph congruences {", "  rankdir=BT;"]
    for i, c in enumerate(lattice.congruences):
        lines.append(f'  n{i} [label="{c.num_classes}"];')
    for i, j in lattice.covers:
        lines.append(f"  n{i} -> n{j};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def clv_block_algebra(a: FinAlgebra, cap: int) -> BlockAlgebra:
    """Block algebra of the term clone of ``a``: the Cl(Var(a)) section of arity <= cap."""
    return BlockAlgebra(term_clone(a, cap), name=f"Cl({a.name},{cap})")


def section_structure(C, pure: bool = False, elements=None) -> SectionStructure:
    """Translations of q_n (n <= cap), and of sigma unless ``pure``."""
    T = from_clone_algebra(C, elements=elements, sigma=not pure)
    return SectionStructure.build(T, descriptor=(
        f"{C.name}: {T.size} elements, q_0..q_{max(T.q_ops)}"
        + ("" if pure else ", sigma") + " translations"))


def fin_structure(a: FinAlgebra) -> SectionStructure:
    T = from_fin_algebra(a)
    return SectionStructure.build(T, descriptor=f"{a.name}: {T.size} elements")


def equation_derivable(a: FinAlgebra, s: Term, t: Term, k: int | None = None) -> bool:
    """Does s = t hold in Var(a)? Decided by comparing term operations on ``a``."""
    if k is None:
        k = max(max_var(s), max_var(t), 1)
    return canonicalize(term_eval(s, a, k)) == canonicalize(term_eval(t, a, k))
