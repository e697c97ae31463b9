"""Instance checker for the clone-algebra axioms and their derived laws.

Identities are small expression trees over variables, the constants ``e_i``
and the operators ``q_n`` / ``sigma``. Exhaustive runs tabulate ``q_n`` over the
section once and evaluate instances in bulk with numpy broadcasting; sampled
runs and identities that mention constants outside the section go through
direct handle calls.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .block_algebra import CloneAlgebra
from .clone_engine import CapError

log = logging.getLogger(__name__)

CHUNK = 1 << 24


# expression nodes: ("x", name) | ("e", i) | ("q", args...) | ("s", name, args...)
def X(name):
    return ("x", name)


def E(i):
    return ("e", i)


def Q(*args):
    return ("q",) + tuple(args)


def S(name, *args):
    return ("s", name) + tuple(args)


@dataclass
class Identity:
    axiom: str
    params: dict
    lhs: tuple
    rhs: tuple
    variables: tuple[str, ...]

    @property
    def key(self) -> str:
        inner = ",".join(f"{k}={v}" for k, v in self.params.items())
        return f"{self.axiom}[{inner}]"


def _walk(expr):
    yield expr
    if expr[0] == "q":
        for a in expr[1:]:
            yield from _walk(a)
    elif expr[0] == "s":
        for a in expr[2:]:
            yield from _walk(a)


def _q_arities(expr) -> set[int]:
    return {len(node) - 2 for node in _walk(expr) if node[0] == "q"}


def _e_used(expr) -> set[int]:
    return {node[1] for node in _walk(expr) if node[0] == "e"}


def _sigma_used(expr) -> set[str]:
    return {node[1] for node in _walk(expr) if node[0] == "s"}


def _xs(prefix, n):
    return [X(f"{prefix}{i}") for i in range(1, n + 1)]


def _names(*groups):
    return tuple(v[1] for g in groups for v in g)


def clone_axioms(signature: dict[str, int], max_n: int, max_e: int) -> list[Identity]:
    """(C1)-(C6) instances with q-arity <= max_n and constants e_j, j <= max_e."""
    out = []
    for n in range(1, max_n + 1):
        xs = _xs("x", n)
        for i in range(1, min(n, max_e) + 1):
            out.append(Identity("C1", {"n": n, "i": i}, Q(E(i), *xs), xs[i - 1], _names(xs)))
    for n in range(0, max_n + 1):
        xs = _xs("x", n)
        for j in range(n + 1, max_e + 1):
            out.append(Identity("C2", {"n": n, "j": j}, Q(E(j), *xs), E(j), _names(xs)))
    for n in range(0, min(max_n, max_e) + 1):
        out.append(Identity("C3", {"n": n}, Q(X("x"), *(E(i) for i in range(1, n + 1))),
                            X("x"), ("x",)))
    for n in range(1, min(max_n, max_e) + 1):
        for k in range(0, n):
            ys = _xs("y", k)
            lhs = Q(X("x"), *ys)
            rhs = Q(X("x"), *ys, *(E(i) for i in range(k + 1, n + 1)))
            out.append(Identity("C4", {"k": k, "n": n}, lhs, rhs, ("x",) + _names(ys)))
    for n in range(1, max_n + 1):
        ys, zs = _xs("y", n), _xs("z", n)
        lhs = Q(Q(X("x"), *ys), *zs)
        rhs = Q(X("x"), *(Q(y, *zs) for y in ys))
        out.append(Identity("C5", {"n": n}, lhs, rhs, ("x",) + _names(ys, zs)))
    for name, k in sorted(signature.items()):
        for n in range(0, max_n + 1):
            xs, ys = _xs("x", k), _xs("y", n)
            lhs = Q(S(name, *xs), *ys)
            rhs = S(name, *(Q(x, *ys) for x in xs))
            out.append(Identity("C6", {"sigma": name, "n": n}, lhs, rhs, _names(xs, ys)))
    return out


def derived_laws(max_n: int) -> list[Identity]:
    """The two composition laws that follow from (C1)-(C5)."""
    out = []
    for n in range(0, max_n + 1):
        for k in range(1, max_n + 1):
            ys, zs = _xs("y", n), _xs("z", k)
            lhs = Q(Q(X("x"), *ys), *zs)
            if n < k:
                rhs = Q(X("x"), *(Q(y, *zs) for y in ys), *zs[n:])
                out.append(Identity("extend(i)", {"n": n, "k": k}, lhs, rhs,
                                    ("x",) + _names(ys, zs)))
            elif n > k:
                rhs = Q(X("x"), *(Q(y, *zs) for y in ys))
                out.append(Identity("extend(ii)", {"n": n, "k": k}, lhs, rhs,
                                    ("x",) + _names(ys, zs)))
    return out


@dataclass
class Violation:
    key: str
    count: int
    witnesses: list[dict]


@dataclass
class AxiomReport:
    algebra: str
    mode: str
    section_size: int
    checked: dict[str, int] = field(default_factory=dict)
    violations: list[Violation] = field(default_factory=list)
    skipped: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def total_violations(self) -> int:
        return sum(v.count for v in self.violations)

    def to_dict(self) -> dict[str, Any]:
        return {
            "algebra": self.algebra,
            "mode": self.mode,
            "section_size": self.section_size,
            "instances_checked": dict(sorted(self.checked.items())),
            "violations": [{"identity": v.key, "count": v.count, "witnesses": v.witnesses}
                           for v in sorted(self.violations, key=lambda v: v.key)],
            "skipped": sorted(self.skipped),
            "notes": self.notes,
            "ok": self.ok,
        }


class _Tables:
    """q_n and sigma tabulated over an element list (index arrays)."""

    def __init__(self, A: CloneAlgebra, elems: Sequence, limit: int):
        self.A = A
        self.elems = list(elems)
        self.index = {x: i for i, x in enumerate(self.elems)}
        self.N = len(self.elems)
        self.limit = limit
        self.q: dict[int, np.ndarray | None] = {}
        self.s: dict[str, np.ndarray | None] = {}
        self.open_cells: list[str] = []

    def _tab(self, arity, fn):
        if self.N ** arity > self.limit:
            return None
        out = np.empty((self.N,) * arity, dtype=np.int32)
        closed = True
        for idx in itertools.product(range(self.N), repeat=arity):
            v = fn(*(self.elems[i] for i in idx))
            j = self.index.get(v)
            if j is None:
                closed = False
                j = -1
            out[idx] = j
        return out, closed

    def q_table(self, n):
        if n not in self.q:
            res = self._tab(n + 1, self.A.q)
            if res is None:
                self.q[n] = None
            else:
                tab, closed = res
                if not closed:
                    self.open_cells.append(f"q_{n}")
                self.q[n] = tab if closed else None
        return self.q[n]

    def s_table(self, name):
        if name not in self.s:
            res = self._tab(self.A.signature[name], lambda *a: self.A.sigma(name, *a))
            if res is None:
                self.s[name] = None
            else:
                tab, closed = res
                if not closed:
                    self.open_cells.append(f"sigma {name}")
                self.s[name] = tab if closed else None
        return self.s[name]

    def e_index(self, i):
        try:
            return self.index.get(self.A.e(i))
        except CapError:
            return None

    def usable(self, ident: Identity) -> bool:
        exprs = (ident.lhs, ident.rhs)
        for e in set().union(*map(_e_used, exprs)):
            if self.e_index(e) is None:
                return False
        for n in set().union(*map(_q_arities, exprs)):
            if self.q_table(n) is None:
                return False
        for name in set().union(*map(_sigma_used, exprs)):
            if self.s_table(name) is None:
                return False
        return True

    def evaluate(self, expr, env):
        tag = expr[0]
        if tag == "x":
            return env[expr[1]]
        if tag == "e":
            return self.e_index(expr[1])
        if tag == "q":
            args = [self.evaluate(a, env) for a in expr[1:]]
            return self.q[len(args) - 1][tuple(args)]
        args = [self.evaluate(a, env) for a in expr[2:]]
        tab = self.s[expr[1]]
        return tab[tuple(args)] if args else tab[()]


def _direct(A: CloneAlgebra, expr, env, cache):
    tag = expr[0]
    if tag == "x":
        return env[expr[1]]
    if tag == "e":
        return A.e(expr[1])
    if tag == "q":
        args = tuple(_direct(A, a, env, cache) for a in expr[1:])
        key = ("q",) + args
        if key not in cache:
            cache[key] = A.q(*args)
        return cache[key]
    args = tuple(_direct(A, a, env, cache) for a in expr[2:])
    key = ("s", expr[1]) + args
    if key not in cache:
        cache[key] = A.sigma(expr[1], *args)
    return cache[key]


def _check_tabulated(ident: Identity, T: _Tables, max_witnesses: int):
    names = ident.variables
    m = len(names)
    N = T.N
    lead = 0
    while N ** (m - lead) > CHUNK:
        lead += 1
    rest = m - lead
    grids = {}
    for j, name in enumerate(names[lead:]):
        shape = [1] * rest
        shape[j] = N
        grids[name] = np.arange(N).reshape(shape)
    count = 0
    witnesses = []
    for head in itertools.product(range(N), repeat=lead):
        env = dict(grids)
        env.update(zip(names[:lead], head))
        lhs = np.asarray(T.evaluate(ident.lhs, env))
        rhs = np.asarray(T.evaluate(ident.rhs, env))
        lhs, rhs = np.broadcast_arrays(lhs, rhs)
        bad = lhs != rhs
        c = int(np.count_nonzero(bad))
        if c:
            count += c
            if len(witnesses) < max_witnesses:
                full = np.broadcast_to(bad, (N,) * rest) if rest else bad
                for pos in np.argwhere(full)[: max_witnesses - len(witnesses)]:
                    assign = list(head) + [int(p) for p in pos]
                    witnesses.append({n: T.A.label(T.elems[i]) for n, i in zip(names, assign)})
    return N ** m, count, witnesses


def _check_direct(ident: Identity, A: CloneAlgebra, assignments, max_witnesses: int, cache):
    count = checked = 0
    witnesses = []
    for values in assignments:
        env = dict(zip(ident.variables, values))
        checked += 1
        if _direct(A, ident.lhs, env, cache) != _direct(A, ident.rhs, env, cache):
            count += 1
            if len(witnesses) < max_witnesses:
                witnesses.append({n: A.label(v) for n, v in env.items()})
    return checked, count, witnesses


def check_identities(A: CloneAlgebra, identities: Sequence[Identity], *,
                     elements: Sequence | None = None, mode: str = "exhaustive",
                     samples: int = 1000, seed: int | None = None,
                     table_limit: int = 1 << 21, direct_limit: int = 1 << 20,
                     max_witnesses: int = 3) -> AxiomReport:
    elems = sorted(A.elements() if elements is None else elements, key=A.sort_key)
    report = AxiomReport(A.name, mode, len(elems))
    cache: dict = {}
    if mode == "exhaustive":
        T = _Tables(A, elems, table_limit)
        for ident in identities:
            m = len(ident.variables)
            if T.usable(ident):
                checked, count, wit = _check_tabulated(ident, T, max_witnesses)
            elif len(elems) ** m <= direct_limit:
                checked, count, wit = _check_direct(
                    ident, A, itertools.product(elems, repeat=m), max_witnesses, cache)
            else:
                report.skipped.append(ident.key)
                continue
            report.checked[ident.key] = checked
            if count:
                report.violations.append(Violation(ident.key, count, wit))
        if T.open_cells:
            report.notes.append("section not closed under: " + ", ".join(sorted(set(T.open_cells))))
    elif mode == "sampled":
        if seed is None:
            raise ValueError("sampled mode needs a seed")
        rng = np.random.default_rng(seed)
        for ident in identities:
            m = len(ident.variables)
            picks = rng.integers(0, len(elems), size=(samples, m))
            assignments = ([elems[i] for i in row] for row in picks)
            checked, count, wit = _check_direct(ident, A, assignments, max_witnesses, cache)
            report.checked[ident.key] = checked
            if count:
                report.violations.append(Violation(ident.key, count, wit))
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return report


def _dimension_laws(A: CloneAlgebra, elems, max_n: int, report: AxiomReport):
    """Per-element laws: independence of trailing arguments and dimension bounds."""
    dims = {x: A.dimension(x) for x in elems}
    members = set(elems)
    cache: dict = {}

    def q(*args):
        if args not in cache:
            cache[args] = A.q(*args)
        return cache[args]

    # an element independent of e_n..e_k ignores substitutions at positions >= n
    bad, checked, wit = 0, 0, []
    for a in elems:
        d = dims[a]
        for k in range(d + 1, max_n + 1):
            for bs in itertools.product(elems, repeat=k):
                checked += 1
                if q(a, *bs) != q(a, *bs[:d]):
                    bad += 1
                    if len(wit) < 3:
                        wit.append({"a": A.label(a), "bs": [A.label(b) for b in bs]})
    report.checked["tail-independence"] = checked
    if bad:
        report.violations.append(Violation("tail-independence", bad, wit))
    # dimension never grows under q_n and sigma
    bad, checked, wit = 0, 0, []
    for n in range(0, max_n + 1):
        for args in itertools.product(elems, repeat=n + 1):
            r = q(*args)
            if r not in members:
                continue
            checked += 1
            if dims.get(r, A.dimension(r)) > max(dims[x] for x in args):
                bad += 1
                if len(wit) < 3:
                    wit.append({"args": [A.label(x) for x in args], "result": A.label(r)})
    for name, k in sorted(A.signature.items()):
        for args in itertools.product(elems, repeat=k):
            r = A.sigma(name, *args)
            checked += 1
            if A.dimension(r) > max((dims[x] for x in args), default=0):
                bad += 1
                if len(wit) < 3:
                    wit.append({"sigma": name, "args": [A.label(x) for x in args]})
    report.checked["dimension-bound"] = checked
    if bad:
        report.violations.append(Violation("dimension-bound", bad, wit))


def check_axioms(A: CloneAlgebra, *, max_n: int = 3, elements: Sequence | None = None,
                 mode: str = "exhaustive", samples: int = 1000, seed: int | None = None,
                 derived: bool = True, dimension_laws: bool = True,
                 max_e: int | None = None) -> AxiomReport:
    """Check (C1)-(C6) and, optionally, the derived laws on a section.

    ``elements`` restricts the quantified variables (default: the whole
    enumerable section); constants ``e_j`` range up to ``max_e`` (default: the
    algebra's bound).
    """
    top_e = A.max_e() if max_e is None else max_e
    idents = clone_axioms(dict(A.signature), max_n, top_e)
    if derived:
        idents += derived_laws(max_n)
    report = check_identities(A, idents, elements=elements, mode=mode,
                              samples=samples, seed=seed)
    if derived and dimension_laws and mode == "exhaustive":
        elems = sorted(A.elements() if elements is None else elements, key=A.sort_key)
        if len(elems) ** (max_n + 1) <= 1 << 20:
            _dimension_laws(A, elems, max_n, report)
        else:
            report.skipped.append("tail-independence and dimension-bound (section too large)")
    return report
