"""Finite algebras as numpy index tables.

A ``TableAlgebra`` holds elements ``0..N-1`` with string labels and each
operation as an array of shape ``(N,) * arity``. Clone-algebra sections,
Church algebras and plain finite algebras all convert to this form, which is
what the centrality and congruence code works on.
"""
from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Mapping, Sequence

import numpy as np

from .clone_engine import CapError, FinAlgebra


class SectionNotClosed(ValueError):
    """An operation leaves the finite section it is tabulated on."""


def workers() -> int:
    """Worker count from ``CLONEOPS_WORKERS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("CLONEOPS_WORKERS", "1")))
    except ValueError:
        return 1


def parallel_map(fn: Callable, items: Sequence) -> list:
    """Order-preserving map, threaded when more than one worker is configured."""
    n = workers()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


@dataclass
class TableAlgebra:
    name: str
    labels: tuple[str, ...]
    ops: dict[str, np.ndarray] = field(default_factory=dict)
    q_ops: dict[int, str] = field(default_factory=dict)    # n -> name of q_n
    e_ops: dict[int, str] = field(default_factory=dict)    # i -> name of e_i
    elements: tuple | None = None                          # source objects, if any

    def __post_init__(self):
        self.labels = tuple(self.labels)
        N = len(self.labels)
        if len(set(self.labels)) != N:
            raise ValueError("element labels must be distinct")
        for name, t in self.ops.items():
            t = np.asarray(t, dtype=np.int64)
            if t.shape != (N,) * t.ndim:
                raise ValueError(f"table of {name} has shape {t.shape}")
            if t.size and (t.min() < 0 or t.max() >= N):
                raise SectionNotClosed(f"{name} leaves the section")
            self.ops[name] = t
        for n, name in self.q_ops.items():
            if self.ops[name].ndim != n + 1:
                raise ValueError(f"q_{n} must have arity {n + 1}")
        for i, name in self.e_ops.items():
            if self.ops[name].ndim != 0:
                raise ValueError(f"e_{i} must be nullary")

    @property
    def size(self) -> int:
        return len(self.labels)

    def arity(self, name: str) -> int:
        return self.ops[name].ndim

    def e(self, i: int) -> int:
        try:
            return int(self.ops[self.e_ops[i]])
        except KeyError:
            raise CapError(f"e_{i} is not available in {self.name}") from None

    def q_table(self, n: int) -> np.ndarray:
        try:
            return self.ops[self.q_ops[n]]
        except KeyError:
            raise CapError(f"q_{n} is not available in {self.name}") from None

    def index_of(self, label: str) -> int:
        return self.labels.index(label)

    @property
    def sigma_names(self) -> list[str]:
        special = set(self.q_ops.values()) | set(self.e_ops.values())
        return sorted(n for n in self.ops if n not in special)

    def pure(self) -> "TableAlgebra":
        keep = set(self.q_ops.values()) | set(self.e_ops.values())
        return TableAlgebra(f"{self.name}_0", self.labels,
                            {n: t for n, t in self.ops.items() if n in keep},
                            dict(self.q_ops), dict(self.e_ops), self.elements)

    def restrict_ops(self, names: Iterable[str]) -> "TableAlgebra":
        names = set(names)
        return TableAlgebra(self.name, self.labels,
                            {n: t for n, t in self.ops.items() if n in names},
                            {n: k for n, k in self.q_ops.items() if k in names},
                            {i: k for i, k in self.e_ops.items() if k in names},
                            self.elements)


def _tabulate(fn: Callable, arity: int, elems: Sequence, index: Mapping) -> np.ndarray:
    N = len(elems)
    out = np.empty(N ** arity, dtype=np.int64)
    for r, args in enumerate(itertools.product(elems, repeat=arity)):
        v = fn(*args)
        try:
            out[r] = index[v]
        except KeyError:
            raise SectionNotClosed(f"value at {r} lies outside the section") from None
    return out.reshape((N,) * arity)


def from_clone_algebra(C, elements: Sequence | None = None, max_n: int | None = None,
                       sigma: bool = True, max_e: int | None = None) -> TableAlgebra:
    """Tabulate q_n (n <= max_n), e_i (i <= max_e) and sigma over a closed section."""
    elems = sorted(C.elements() if elements is None else elements, key=C.sort_key)
    index = {x: i for i, x in enumerate(elems)}
    top_n = C.max_e() if max_n is None else max_n
    top_e = C.max_e() if max_e is None else max_e
    ops: dict[str, np.ndarray] = {}
    q_ops, e_ops = {}, {}
    for n in range(0, top_n + 1):
        ops[f"q{n}"] = _tabulate(C.q, n + 1, elems, index)
        q_ops[n] = f"q{n}"
    for i in range(1, top_e + 1):
        x = C.e(i)
        if x not in index:
            raise SectionNotClosed(f"e_{i} is not in the section")
        ops[f"e{i}"] = np.array(index[x])
        e_ops[i] = f"e{i}"
    if sigma:
        for name, k in sorted(C.signature.items()):
            ops[f"s:{name}"] = _tabulate(lambda *a, _n=name: C.sigma(_n, *a), k, elems, index)
    return TableAlgebra(C.name, tuple(C.label(x) for x in elems), ops, q_ops, e_ops,
                        tuple(elems))


def from_fin_algebra(a: FinAlgebra, q: Mapping[int, str] | None = None,
                     e: Mapping[int, str] | None = None) -> TableAlgebra:
    """A finite algebra as tables; ``q``/``e`` name the Church operations.

    By default an operation called ``q`` of arity n+1 is q_n and nullary
    operations ``e1, e2, ...`` are the constants e_i.
    """
    ops = {}
    for name, op in a.operations.items():
        ops[name] = np.array(op.table, dtype=np.int64).reshape((a.universe.size,) * op.arity)
    if q is None:
        q = {a.operations["q"].arity - 1: "q"} if "q" in a.operations else {}
    if e is None:
        e = {}
        for name, op in a.operations.items():
            if op.arity == 0 and name[:1] == "e" and name[1:].isdigit():
                e[int(name[1:])] = name
    return TableAlgebra(a.name, a.universe.elements, ops, dict(q), dict(e))


def church_n(n: int) -> TableAlgebra:
    """The pure n-Church algebra on {e_1..e_n} with q_n(e_i, x) = x_i."""
    if n < 1:
        raise ValueError("n must be positive")
    labels = tuple(f"e{i}" for i in range(1, n + 1))
    q = np.empty((n,) * (n + 1), dtype=np.int64)
    for idx in itertools.product(range(n), repeat=n + 1):
        q[idx] = idx[1 + idx[0]]
    ops = {"q": q}
    ops.update({f"e{i}": np.array(i - 1) for i in range(1, n + 1)})
    return TableAlgebra(f"{n}", labels, ops, {n: "q"}, {i: f"e{i}" for i in range(1, n + 1)})


def power(T: TableAlgebra, m: int) -> TableAlgebra:
    """Direct power T^m with componentwise operations (elements are m-tuples)."""
    N = T.size
    tuples = list(itertools.product(range(N), repeat=m))
    index = {t: i for i, t in enumerate(tuples)}
    labels = tuple("(" + ",".join(T.labels[c] for c in t) + ")" for t in tuples)
    ops = {}
    for name, tab in T.ops.items():
        k = tab.ndim
        out = np.empty((len(tuples),) * k, dtype=np.int64)
        for args in itertools.product(range(len(tuples)), repeat=k):
            comp = tuple(int(tab[tuple(tuples[a][j] for a in args)]) for j in range(m))
            out[args] = index[comp]
        ops[name] = out
    return TableAlgebra(f"{T.name}^{m}", labels, ops, dict(T.q_ops), dict(T.e_ops),
                        tuple(tuples))


def church_power(n: int, x_size: int) -> TableAlgebra:
    """The pure nBA 𝐧^X for |X| = x_size."""
    return power(church_n(n), x_size)


def n_partitions(n: int, xs: Sequence[Hashable]) -> list[tuple[frozenset, ...]]:
    """All n-tuples of pairwise disjoint subsets of X whose union is X."""
    X = list(xs)
    out = set()
    for assign in itertools.product(range(n), repeat=len(X)):
        out.add(tuple(frozenset(x for x, c in zip(X, assign) if c == i) for i in range(n)))
    return sorted(out, key=lambda p: [sorted(map(str, b)) for b in p])


def partition_algebra(n: int, xs: Sequence[Hashable]) -> TableAlgebra:
    """The n-partition algebra of X.

    q_n(y, z_1..z_n) has j-th block the union over i of Y_i ∩ (Z_i)_j, and e_j is
    the partition with X in block j.
    """
    X = frozenset(xs)
    parts = n_partitions(n, sorted(xs, key=str))
    index = {p: i for i, p in enumerate(parts)}

    def q(y, *zs):
        return tuple(frozenset().union(*(y[i] & zs[i][j] for i in range(n))) for j in range(n))

    qt = np.empty((len(parts),) * (n + 1), dtype=np.int64)
    for idx in itertools.product(range(len(parts)), repeat=n + 1):
        qt[idx] = index[q(*(parts[i] for i in idx))]
    ops = {"q": qt}
    for j in range(1, n + 1):
        ej = tuple(X if i == j - 1 else frozenset() for i in range(n))
        ops[f"e{j}"] = np.array(index[ej])
    labels = tuple("|".join("".join(sorted(map(str, b))) for b in p) for p in parts)
    return TableAlgebra(f"Part{n}({len(X)})", labels, ops, {n: "q"},
                        {i: f"e{i}" for i in range(1, n + 1)}, tuple(parts))


def partition_to_power(n: int, xs: Sequence[Hashable]) -> tuple[dict, bool]:
    """The map sending an n-partition to the function x -> block index, as a
    bijection onto 𝐧^X, and whether it preserves q_n and the e_i."""
    X = sorted(xs, key=str)
    P = partition_algebra(n, X)
    K = church_power(n, len(X))
    kindex = {t: i for i, t in enumerate(K.elements)}
    phi = {}
    for i, p in enumerate(P.elements):
        f = tuple(next(j for j in range(n) if x in p[j]) for x in X)
        phi[i] = kindex[f]
    ok = len(set(phi.values())) == K.size == P.size
    ok = ok and all(phi[P.e(i)] == K.e(i) for i in range(1, n + 1))
    qp, qk = P.q_table(n), K.q_table(n)
    for idx in itertools.product(range(P.size), repeat=n + 1):
        if not ok:
            break
        ok = phi[int(qp[idx])] == int(qk[tuple(phi[i] for i in idx)])
    return phi, ok
