"""Minimal clone algebras, interpretations, products and independence of varieties."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Hashable, Mapping, Sequence

from .axioms import E, Identity, Q, X, check_identities
from .block_algebra import BlockAlgebra, CloneAlgebra, DimensionExceeded, NotEnumerable
from .clone_engine import CapError, FinAlgebra, term_eval
from .congruence import clv_block_algebra, equation_derivable
from .finite_ops import Block, canonicalize, projection_block
from .terms import App, Term, Var, depth, max_var, substitute


class InterpretationError(ValueError):
    pass


class HomomorphismError(ValueError):
    pass


class ProductAlgebra(CloneAlgebra):
    """C × D with componentwise e_i, q_n and sigma."""

    def __init__(self, C: CloneAlgebra, D: CloneAlgebra, name: str | None = None):
        if dict(C.signature) != dict(D.signature):
            raise ValueError("product factors must have the same type")
        self.left, self.right = C, D
        self.signature = dict(C.signature)
        bounds = [C.dim_bound, D.dim_bound]
        self.dim_bound = None if None in bounds else max(bounds)
        self.name = name or f"{C.name}x{D.name}"

    def e(self, i):
        return (self.left.e(i), self.right.e(i))

    def q(self, a, *bs):
        return (self.left.q(a[0], *(b[0] for b in bs)),
                self.right.q(a[1], *(b[1] for b in bs)))

    def sigma(self, name, *args):
        return (self.left.sigma(name, *(x[0] for x in args)),
                self.right.sigma(name, *(x[1] for x in args)))

    def elements(self):
        return tuple(itertools.product(self.left.elements(), self.right.elements()))

    def label(self, x):
        return f"({self.left.label(x[0])},{self.right.label(x[1])})"

    def sort_key(self, x):
        return (self.left.sort_key(x[0]), self.right.sort_key(x[1]))

    def max_e(self):
        return min(self.left.max_e(), self.right.max_e())

    def dimension(self, a):
        d1, d2 = self.left.dimension(a[0]), self.right.dimension(a[1])
        for d in (d1, d2):
            if isinstance(d, DimensionExceeded):
                return d
        return max(d1, d2)


class TrivialAlgebra(CloneAlgebra):
    """The one-element clone algebra of a given type."""

    def __init__(self, signature: Mapping[str, int] | None = None, bound: int = 1):
        self.signature = dict(signature or {})
        self.dim_bound = bound
        self.name = "1"

    def e(self, i):
        return "*"

    def q(self, a, *bs):
        return "*"

    def sigma(self, name, *args):
        return "*"

    def elements(self):
        return ("*",)

    def dimension(self, a):
        return 0


@dataclass
class MinimalSection:
    elements: list
    witnesses: dict            # element -> ground term (prefix text, e_i leaves)
    depth: int
    saturated: bool            # the last level added nothing new
    q_closed: bool | None      # None when too large to check


def _ground_text(t) -> str:
    if isinstance(t, int):
        return f"e{t}"
    name, args = t
    return "(" + " ".join([name, *map(_ground_text, args)]) + ")" if args else f"({name})"


def minimal_section(C: CloneAlgebra, depth: int, q_check_limit: int = 200_000) -> MinimalSection:
    """Values of ground terms over e_1..e_cap and sigma, up to the given depth."""
    cap = C.max_e()
    found: dict = {}
    order: list = []
    for i in range(1, cap + 1):
        x = C.e(i)
        if x not in found:
            found[x] = i
            order.append(x)
    sigs = sorted(C.signature.items())
    saturated = False
    done_before = 0
    for _ in range(depth):
        start = len(order)
        for name, k in sigs:
            for combo in itertools.product(range(start), repeat=k):
                if k and max(combo) < done_before:
                    continue
                if not k and done_before:
                    continue
                v = C.sigma(name, *(order[j] for j in combo))
                if v not in found:
                    found[v] = (name, tuple(found[order[j]] for j in combo))
                    order.append(v)
        done_before = start
        if len(order) == start:
            saturated = True
            break
    q_closed = None
    members = set(order)
    try:
        section = set(C.elements())
    except NotEnumerable:
        section = None
    if sum(len(order) ** (n + 1) for n in range(cap + 1)) <= q_check_limit:
        q_closed = True
        for n in range(cap + 1):
            for args in itertools.product(order, repeat=n + 1):
                try:
                    r = C.q(*args)
                except CapError:
                    continue
                if r not in members and (section is None or r in section):
                    q_closed = False
                    break
            if not q_closed:
                break
    elems = sorted(order, key=C.sort_key)
    return MinimalSection(elems, {x: _ground_text(found[x]) for x in elems}, depth,
                          saturated, q_closed)


@dataclass
class MinimalityVerdict:
    verdict: str               # "minimal" | "not-minimal" | "unknown"
    reached: int
    total: int
    missing: list[str] = field(default_factory=list)
    depth: int = 0


def is_minimal_bounded(C: CloneAlgebra, depth: int) -> MinimalityVerdict:
    """Compare the ground-term values with the section.

    "not-minimal" is definite once term generation saturates with elements
    still missing; with missing elements and no saturation the answer is
    "unknown".
    """
    ms = minimal_section(C, depth)
    section = list(C.elements())
    hit = set(ms.elements)
    missing = [x for x in sorted(section, key=C.sort_key) if x not in hit]
    if not missing:
        v = "minimal"
    elif ms.saturated:
        v = "not-minimal"
    else:
        v = "unknown"
    return MinimalityVerdict(v, len(section) - len(missing), len(section),
                             [C.label(x) for x in missing[:10]], depth)


@dataclass(frozen=True)
class Interpretation:
    """sigma -> target term; nullary sigma maps to a unary term constant in the target."""
    source_signature: Mapping[str, int]
    target: FinAlgebra
    mapping: Mapping[str, Term]

    def __post_init__(self):
        for name, k in self.source_signature.items():
            if name not in self.mapping:
                raise InterpretationError(f"no image for {name}")
            t = self.mapping[name]
            need = max(k, 1)
            if max_var(t) > need:
                raise InterpretationError(f"image of {name} uses v{max_var(t)} > v{need}")
            if k == 0:
                other = substitute(t, {1: Var(2)})
                if not equation_derivable(self.target, t, other, 2):
                    raise InterpretationError(
                        f"image of nullary {name} is not constant in the target: {t}")

    def translate(self, t: Term) -> Term:
        if isinstance(t, Var):
            return t
        image = self.mapping[t.op]
        args = [self.translate(a) for a in t.args]
        if not args:
            return substitute(image, {1: Var(1)})
        return substitute(image, {i + 1: a for i, a in enumerate(args)})


@dataclass
class PureHom:
    source: BlockAlgebra
    target: BlockAlgebra
    table: dict                # source block -> target block
    checked: int
    failures: list[str]

    @property
    def ok(self) -> bool:
        return not self.failures

    def __call__(self, b):
        return self.table[b]


def interp_to_purehom(I: Interpretation, source: FinAlgebra, cap: int) -> PureHom:
    """F(<t>) = <t*> on the Cl sections, checked to preserve e_i and q_n."""
    if dict(source.signature) != dict(I.source_signature):
        raise InterpretationError("source algebra does not match the interpretation type")
    S = clv_block_algebra(source, cap)
    T = clv_block_algebra(I.target, cap)
    table = {}
    failures = []
    for b in S.elements():
        t = S.term_of(b)
        tb = canonicalize(term_eval(I.translate(t), I.target, cap))
        if tb not in T.section:
            failures.append(f"image of {S.label(b)} is outside the target section")
        table[b] = tb
    checked = 0
    for i in range(1, cap + 1):
        checked += 1
        if table[S.e(i)] != T.e(i):
            failures.append(f"F(e_{i}) != e_{i}")
    elems = S.elements()
    for n in range(0, cap + 1):
        for args in itertools.product(elems, repeat=n + 1):
            checked += 1
            if table[S.q(*args)] != T.q(*(table[a] for a in args)):
                failures.append(f"F(q_{n}{tuple(map(S.label, args))}) != q_{n}(F(..))")
                if len(failures) > 20:
                    break
    return PureHom(S, T, table, checked, failures[:20])


def _binary_terms(algebras: Sequence[FinAlgebra], depth_limit: int):
    """Breadth-first terms t(v1, v2) deduplicated by their binary term operations.

    Yields (depth, term, key) for each semantically new term, in canonical order,
    and finally ("saturated", bool) to report whether generation stopped early.
    """
    sig = sorted(algebras[0].signature.items())
    known: dict = {}
    order: list[Term] = []

    def key(t):
        return tuple(term_eval(t, a, 2).table for a in algebras)

    for v in (Var(1), Var(2)):
        k = key(v)
        if k not in known:
            known[k] = v
            order.append(v)
            yield 0, v, k
    prev = 0
    for d in range(1, depth_limit + 1):
        start = len(order)
        for name, m in sig:
            for combo in itertools.product(range(start), repeat=m):
                if m and max(combo) < prev:
                    continue
                if not m and prev:
                    continue
                t = App(name, tuple(order[j] for j in combo))
                k = key(t)
                if k not in known:
                    known[k] = t
                    order.append(t)
                    yield d, t, k
        prev = start
        if len(order) == start:
            yield "saturated", True, None
            return
    yield "saturated", False, None


@dataclass
class IndependenceResult:
    witness: Term | None
    depth: int | None
    saturated: bool
    searched_depth: int

    def describe(self) -> str:
        if self.witness is not None:
            return str(self.witness)
        return "none (exhaustive)" if self.saturated else f"none at depth {self.searched_depth}"


def independence_search(A1: FinAlgebra, A2: FinAlgebra, depth_limit: int) -> IndependenceResult:
    """First t(v1, v2) by depth with A1 |= t = v1 and A2 |= t = v2."""
    if dict(A1.signature) != dict(A2.signature):
        raise ValueError("independence needs algebras of the same type")
    p1 = (term_eval(Var(1), A1, 2).table, term_eval(Var(2), A2, 2).table)
    saturated = False
    for d, t, k in _binary_terms([A1, A2], depth_limit):
        if d == "saturated":
            saturated = t
            break
        if k == p1:
            return IndependenceResult(t, d, False, depth_limit)
    return IndependenceResult(None, None, saturated, depth_limit)


@dataclass
class ProductMinimality:
    independence: IndependenceResult
    minimality: MinimalityVerdict
    agree: bool | None          # None when neither side is definite at these bounds

    def to_dict(self):
        return {
            "witness": None if self.independence.witness is None else str(self.independence.witness),
            "witness_depth": self.independence.depth,
            "independence": self.independence.describe(),
            "minimal": self.minimality.verdict,
            "reached": self.minimality.reached,
            "section_size": self.minimality.total,
            "agree": self.agree,
        }


def product_minimality_check(A1: FinAlgebra, A2: FinAlgebra, depth_limit: int,
                             cap: int) -> ProductMinimality:
    ind = independence_search(A1, A2, depth_limit)
    E_ = ProductAlgebra(clv_block_algebra(A1, cap), clv_block_algebra(A2, cap))
    mv = is_minimal_bounded(E_, depth_limit)
    found = ind.witness is not None
    definite_ind = found or ind.saturated
    definite_min = mv.verdict != "unknown"
    if definite_ind and definite_min:
        agree = found == (mv.verdict == "minimal")
    elif found and mv.verdict == "not-minimal" or (ind.saturated and mv.verdict == "minimal"):
        agree = False
    else:
        agree = None
    return ProductMinimality(ind, mv, agree)


class FExpansion(CloneAlgebra):
    """D with sigma(a_1..a_k) = q_k(h(sigma^C(e_1..e_k)), a_1..a_k)."""

    def __init__(self, C: CloneAlgebra, D: CloneAlgebra, h: Callable):
        self.C, self.D, self.h = C, D, h
        self.signature = dict(C.signature)
        self.dim_bound = D.dim_bound
        self.name = f"{D.name}^f"
        self.constants = {name: h(C.sigma(name, *(C.e(i) for i in range(1, k + 1))))
                          for name, k in self.signature.items()}

    def e(self, i):
        return self.D.e(i)

    def q(self, a, *bs):
        return self.D.q(a, *bs)

    def sigma(self, name, *args):
        return self.D.q(self.constants[name], *args)

    def elements(self):
        return self.D.elements()

    def label(self, x):
        return self.D.label(x)

    def sort_key(self, x):
        return self.D.sort_key(x)

    def max_e(self):
        return self.D.max_e()

    def dimension(self, a):
        return self.D.dimension(a)


def f_expansion(C: CloneAlgebra, D: CloneAlgebra, h: Callable,
                max_n: int | None = None) -> FExpansion:
    """Build D^f after checking h is a pure homomorphism on the section of C;
    the result is checked to make h a homomorphism of tau-algebras."""
    elems = list(C.elements())
    top = C.max_e() if max_n is None else max_n
    for i in range(1, min(C.max_e(), D.max_e()) + 1):
        if h(C.e(i)) != D.e(i):
            raise HomomorphismError(f"h(e_{i}) != e_{i}")
    for n in range(0, top + 1):
        for args in itertools.product(elems, repeat=n + 1):
            if h(C.q(*args)) != D.q(*(h(a) for a in args)):
                raise HomomorphismError(f"h does not preserve q_{n}")
    Df = FExpansion(C, D, h)
    for name, k in sorted(C.signature.items()):
        for args in itertools.product(elems, repeat=k):
            if h(C.sigma(name, *args)) != Df.sigma(name, *(h(a) for a in args)):
                raise HomomorphismError(f"h is not a homomorphism for {name} on D^f")
    return Df


def diagonal_identity(n: int) -> Identity:
    """q_n(y, q_n(y, x_11..x_1n), ..., q_n(y, x_n1..x_nn)) = q_n(y, x_11, x_22, ..., x_nn)."""
    xs = [[X(f"x{i}{j}") for j in range(1, n + 1)] for i in range(1, n + 1)]
    y = X("y")
    lhs = Q(y, *(Q(y, *row) for row in xs))
    rhs = Q(y, *(xs[i][i] for i in range(n)))
    names = ("y",) + tuple(v[1] for row in xs for v in row)
    return Identity("diagonal", {"n": n}, lhs, rhs, names)


def check_diagonal_identity(C: CloneAlgebra, n: int, elements=None):
    return check_identities(C, [diagonal_identity(n)], elements=elements)
