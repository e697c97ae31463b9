"""Decomposition operators, n-central elements and direct factorization.

Everything here works on ``TableAlgebra`` sections. Clone-algebra handles are
tabulated on their enumerable section first, so every verdict is relative to
that section.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .clone_engine import CapError, FinAlgebra
from .congruence import Congruence, SectionStructure, SizeGuardExceeded, congruence_generate
from .tables import (SectionNotClosed, TableAlgebra, from_clone_algebra, from_fin_algebra,
                     parallel_map)

# above this many instances D2/D3 switch to the factor-congruence test
IDENTITY_LIMIT = 50_000_000
CHUNK = 1 << 22


class NotCentral(ValueError):
    pass


class NotChurchAlgebra(ValueError):
    """q_n(e_i, x_1..x_n) = x_i fails somewhere."""


def as_tables(A, n: int | None = None) -> TableAlgebra:
    if isinstance(A, TableAlgebra):
        return A
    if isinstance(A, FinAlgebra):
        return from_fin_algebra(A)
    return from_clone_algebra(A)


def _forall(N: int, nvars: int, pred) -> bool:
    """pred(vars) -> bool array over broadcast open grids; True iff all hold."""
    lead = 0
    while N ** (nvars - lead) > CHUNK:
        lead += 1
    rest = nvars - lead
    grids = []
    for j in range(rest):
        shape = [1] * rest
        shape[j] = N
        grids.append(np.arange(N).reshape(shape))
    for head in itertools.product(range(N), repeat=lead):
        if not np.all(pred(list(head) + grids)):
            return False
    return True


def _apply(tab: np.ndarray, args):
    return tab[tuple(args)] if args else tab[()]


def _check_table(T: TableAlgebra, f: np.ndarray, n: int):
    f = np.asarray(f, dtype=np.int64)
    if f.shape != (T.size,) * n:
        raise ValueError(f"expected a table of shape {(T.size,) * n}")
    if f.size and (f.min() < 0 or f.max() >= T.size):
        raise SectionNotClosed("f leaves the section")
    return f


def _decomposition_identities(T: TableAlgebra, f: np.ndarray, n: int) -> bool:
    N = T.size
    diag = f[tuple([np.arange(N)] * n)] if n else f[()]
    if n and not np.array_equal(diag, np.arange(N)):
        return False            # D1
    if n and not _forall(N, n * n, lambda v: _apply(
            f, [_apply(f, v[i * n:(i + 1) * n]) for i in range(n)])
            == _apply(f, [v[i * n + i] for i in range(n)])):
        return False            # D2
    for name in sorted(T.ops):
        g = T.ops[name]
        m = g.ndim

        # x[i][j]: row i feeds f's i-th argument through g, column j feeds g's j-th
        def hom(v, g=g, m=m):
            rows = [_apply(g, v[i * m:(i + 1) * m]) for i in range(n)]
            cols = [_apply(f, [v[i * m + j] for i in range(n)]) for j in range(m)]
            return _apply(f, rows) == _apply(g, cols)

        if not _forall(N, n * m, hom):
            return False        # D3
    return True


def congruences_from_operator(f: np.ndarray, n: int) -> list[Congruence]:
    """θ_i with a θ_i b iff f_i(b, a) = a, where f_i puts its first argument at i."""
    N = f.shape[0]
    out = []
    for i in range(n):
        rel = np.zeros((N, N), dtype=bool)
        for a in range(N):
            for b in range(N):
                args = [a] * n
                args[i] = b
                rel[a, b] = f[tuple(args)] == a
        if not (rel.diagonal().all() and np.array_equal(rel, rel.T)
                and np.array_equal(rel, (rel.astype(int) @ rel.astype(int)) > 0)):
            raise NotCentral(f"θ_{i + 1} is not an equivalence relation")
        out.append(Congruence.from_roots([int(np.argmax(rel[a])) for a in range(N)]))
    return out


def operator_from_congruences(thetas: Sequence[Congruence]) -> np.ndarray:
    """f(a_1..a_n) = the unique u with a_i θ_i u."""
    n = len(thetas)
    N = len(thetas[0].classes)
    key = {}
    for u in range(N):
        k = tuple(t.classes[u] for t in thetas)
        if k in key:
            raise NotCentral("the congruences do not meet in Δ")
        key[k] = u
    f = np.empty((N,) * n, dtype=np.int64)
    for args in itertools.product(range(N), repeat=n):
        k = tuple(t.classes[a] for t, a in zip(thetas, args))
        if k not in key:
            raise NotCentral("no element solves the system at " + str(args))
        f[args] = key[k]
    return f


def _decomposition_congruences(T: TableAlgebra, f: np.ndarray, n: int) -> bool:
    """f is a decomposition operator iff its θ_i are complementary factor
    congruences of which f is the induced operator."""
    try:
        thetas = congruences_from_operator(f, n)
    except NotCentral:
        return False
    s = SectionStructure.build(T)
    if not all(t.is_compatible(s) for t in thetas):
        return False
    try:
        g = operator_from_congruences(thetas)
    except NotCentral:
        return False
    return np.array_equal(f, g)


def _pick(T: TableAlgebra, n: int, method: str) -> str:
    """Resolve "auto"; refuse an explicit identity check that is too large."""
    widest = max((t.ndim for t in T.ops.values()), default=0)
    cost = T.size ** (n * max(n, widest))
    if method == "auto":
        return "identities" if cost <= IDENTITY_LIMIT else "congruences"
    if method == "identities" and cost > IDENTITY_LIMIT:
        raise SizeGuardExceeded(f"identity check needs {cost} instances, guard is {IDENTITY_LIMIT}")
    if method not in ("identities", "congruences"):
        raise ValueError(f"unknown method {method!r}")
    return method


def is_decomposition_op(A, f, n: int, method: str = "auto") -> bool:
    """D1-D3 for the n-ary map ``f`` (a table over the section) w.r.t. all operations."""
    T = as_tables(A)
    f = _check_table(T, f, n)
    method = _pick(T, n, method)
    if method == "identities":
        return _decomposition_identities(T, f, n)
    if method == "congruences":
        return _decomposition_congruences(T, f, n)
    raise ValueError(f"unknown method {method!r}")


def _fc(T: TableAlgebra, c: int, n: int) -> np.ndarray:
    return T.q_table(n)[c]


def _theta_ce(T: TableAlgebra, c: int, n: int, s: SectionStructure | None = None):
    s = s or SectionStructure.build(T)
    return [congruence_generate(s, [(c, T.e(i))]) for i in range(1, n + 1)]


def _central_by_congruences(T: TableAlgebra, c: int, n: int, s=None) -> bool:
    thetas = _theta_ce(T, c, n, s)
    if len(set(zip(*(t.classes for t in thetas)))) != T.size:
        return False            # the θ(c, e_i) do not meet in Δ
    f = _fc(T, c, n)
    cls = [np.asarray(t.classes) for t in thetas]
    for i in range(n):
        # class of f(a) must equal class of a_i for every tuple
        fa = cls[i][f]
        ai = cls[i][np.arange(T.size).reshape([-1 if j == i else 1 for j in range(n)])]
        if not np.all(fa == ai):
            return False
    return True


def is_n_central(A, c, n: int, method: str = "auto") -> bool:
    """Is ``c`` (an index into the section, or a source element) n-central?"""
    T = as_tables(A)
    ci = _index(T, c)
    if n not in T.q_ops:
        raise CapError(f"q_{n} is not available (n exceeds the cap)")
    es = [T.e(i) for i in range(1, n + 1)]
    f = _fc(T, ci, n)
    if f[tuple(es)] != ci:
        return False
    method = _pick(T, n, method)
    if method == "congruences":
        return _central_by_congruences(T, ci, n)
    return is_decomposition_op(T, f, n, method=method)


def _index(T: TableAlgebra, c) -> int:
    if isinstance(c, (int, np.integer)) and not isinstance(c, bool):
        return int(c)
    if T.elements is not None and c in T.elements:
        return T.elements.index(c)
    return T.index_of(c)


@dataclass
class CentralRange:
    low: int
    high: int
    verdicts: dict[int, bool]


def central_range(A, c, method: str = "auto") -> CentralRange | None:
    """[γ(c), cap] if c is central for some n <= cap, else None.

    The interval is checked against the verdict for every n; a mismatch raises.
    """
    T = as_tables(A)
    ci = _index(T, c)
    if not T.e_ops:
        raise CapError("no constants e_i available")
    ns = sorted(n for n in T.q_ops if 1 <= n <= max(T.e_ops))
    if not ns:
        raise CapError("no q_n with n >= 1 available")
    top = ns[-1]
    verdicts = {n: is_n_central(T, ci, n, method) for n in ns}
    if not any(verdicts.values()):
        return None
    gamma = _dimension(T, ci)
    expected = {n: n >= gamma for n in verdicts}
    if verdicts != expected:
        raise CapError(f"centrality verdicts {verdicts} do not form [{gamma}, {top}]")
    return CentralRange(gamma, top, verdicts)


def _dimension(T: TableAlgebra, ci: int) -> int:
    """Largest n with q_n(a, e_1..e_{n-1}, e_{n+1}) != a, probing the section."""
    top = max(T.e_ops)
    for n in range(top, 0, -1):
        head = [T.e(i) for i in range(1, n)]
        probes = [T.e(n + 1)] if n + 1 in T.e_ops else range(T.size)
        q = T.q_table(n)
        if any(q[tuple([ci] + head + [b])] != ci for b in probes):
            return n
    return 0


@dataclass
class FactorSystem:
    n: int
    c: int
    thetas: list[Congruence]
    valid: bool
    problems: list[str] = field(default_factory=list)


def factor_congruences(A, c, n: int) -> FactorSystem:
    T = as_tables(A)
    ci = _index(T, c)
    if not is_n_central(T, ci, n):
        raise NotCentral(f"{T.labels[ci]} is not {n}-central")
    thetas = _theta_ce(T, ci, n)
    problems = []
    keys = list(zip(*(t.classes for t in thetas)))
    if len(set(keys)) != T.size:
        problems.append("intersection is not Δ")
    f = _fc(T, ci, n)
    for args in itertools.product(range(T.size), repeat=n):
        u = int(f[args])
        if any(not thetas[i].related(args[i], u) for i in range(n)):
            problems.append(f"q_{n}(c, {args}) does not solve the system")
            break
    return FactorSystem(n, ci, thetas, not problems, problems)


@dataclass
class Decomposition:
    factors: list[TableAlgebra]
    mapping: dict[int, tuple[int, ...]]
    bijective: bool
    preserves_ops: bool

    @property
    def sizes(self) -> list[int]:
        return [F.size for F in self.factors]

    @property
    def ok(self) -> bool:
        return self.bijective and self.preserves_ops


def quotient(T: TableAlgebra, theta: Congruence, name: str) -> TableAlgebra:
    blocks = theta.blocks()
    reps = [b[0] for b in blocks]
    cls = np.asarray(theta.classes)
    ops = {}
    for op, tab in T.ops.items():
        sub = tab[np.ix_(*[reps] * tab.ndim)] if tab.ndim else tab
        ops[op] = cls[sub]
    labels = tuple("{" + ",".join(T.labels[x] for x in b) + "}" for b in blocks)
    return TableAlgebra(name, labels, ops, dict(T.q_ops), dict(T.e_ops))


def decompose(A, c, n: int) -> Decomposition:
    """A ≅ A/θ(c,e_1) × ... × A/θ(c,e_n), checked on the section."""
    T = as_tables(A)
    fs = factor_congruences(T, c, n)
    factors = [quotient(T, th, f"{T.name}/θ{i + 1}") for i, th in enumerate(fs.thetas)]
    mapping = {a: tuple(th.classes[a] for th in fs.thetas) for a in range(T.size)}
    total = int(np.prod([F.size for F in factors]))
    bijective = len(set(mapping.values())) == T.size == total
    preserves = True
    for op, tab in T.ops.items():
        for args in itertools.product(range(T.size), repeat=tab.ndim):
            image = mapping[int(tab[args])]
            comp = tuple(int(_apply(F.ops[op], [mapping[a][i] for a in args]))
                         for i, F in enumerate(factors))
            if image != comp:
                preserves = False
                break
        if not preserves:
            break
    return Decomposition(factors, mapping, bijective, preserves)


def check_church(T: TableAlgebra, n: int) -> None:
    if n not in T.q_ops:
        raise NotChurchAlgebra(f"no q_{n}")
    q = T.q_table(n)
    for i in range(1, n + 1):
        ei = T.e(i)
        expected = np.arange(T.size).reshape([-1 if j == i - 1 else 1 for j in range(n)])
        if not np.all(q[ei] == expected):
            raise NotChurchAlgebra(f"q_{n}(e_{i}, x_1..x_{n}) != x_{i}")


def is_nba(A, n: int, method: str = "auto") -> bool:
    """Every element n-central; a malformed n-Church structure raises NotChurchAlgebra."""
    T = as_tables(A)
    check_church(T, n)
    verdicts = parallel_map(lambda c: is_n_central(T, c, n, method), list(range(T.size)))
    return all(verdicts)


def central_elements(A, n: int, method: str = "auto") -> list[int]:
    T = as_tables(A)
    return [c for c in range(T.size) if is_n_central(T, c, n, method)]
