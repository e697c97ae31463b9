"""Clone algebras over finite sections.

``CloneAlgebra`` is the common surface (``e``, ``q``, ``sigma``, equality of
hashable elements); ``BlockAlgebra`` realizes it on the blocks of a clone
section, where ``q_n`` substitutes into the first n variables.
"""
from __future__ import annotations

from abc import ABC, abstractmethod
from functools import cached_property
from typing import Callable, Hashable, Iterable, Mapping, Sequence

from .clone_engine import CapError, CloneSection
from .finite_ops import (Block, Stream, canonicalize, compose, expand,
                         projection, projection_block)


class NotEnumerable(TypeError):
    pass


class DimensionExceeded(int):
    """Returned by ``dimension`` when dependence reaches past the known bound."""

    def __new__(cls, bound):
        return super().__new__(cls, bound)

    def __repr__(self):
        return f"DimensionExceeded(>{int(self)})"


class CloneAlgebra(ABC):
    """Finite-section view of a clone tau-algebra."""

    signature: Mapping[str, int] = {}
    dim_bound: int | None = None
    name: str = "C"

    @abstractmethod
    def e(self, i: int) -> Hashable: ...

    @abstractmethod
    def q(self, a, *bs) -> Hashable: ...

    def sigma(self, name: str, *args) -> Hashable:
        raise KeyError(f"no operation {name!r} in the signature of {self.name}")

    def elements(self) -> tuple:
        raise NotEnumerable(f"{self.name} has no enumerable section")

    def label(self, x) -> str:
        return str(x)

    def sort_key(self, x):
        return self.label(x)

    def max_e(self) -> int:
        """Largest i for which ``e(i)`` is available."""
        if self.dim_bound is None:
            raise NotEnumerable("no bound on available e_i")
        return self.dim_bound

    def independent_of(self, a, n: int) -> bool:
        """``q_n(a, e_1, ..., e_{n-1}, e_{n+1}) == a``.

        When ``e_{n+1}`` is unavailable every section element is tried in that
        slot, which is equivalent on a section containing enough witnesses.
        """
        head = [self.e(i) for i in range(1, n)]
        try:
            probes = [self.e(n + 1)]
        except CapError:
            probes = list(self.elements())
        return all(self.q(a, *head, b) == a for b in probes)

    def dimension(self, a) -> int:
        bound = self.max_e()
        if not self.independent_of(a, bound + 1):
            return DimensionExceeded(bound)
        for n in range(bound, 0, -1):
            if not self.independent_of(a, n):
                return n
        return 0

    def pure(self) -> "CloneAlgebra":
        return PureReduct(self)


class PureReduct(CloneAlgebra):
    def __init__(self, base: CloneAlgebra):
        self.base = base
        self.signature = {}
        self.dim_bound = base.dim_bound
        self.name = f"{base.name}_0"

    def e(self, i):
        return self.base.e(i)

    def q(self, a, *bs):
        return self.base.q(a, *bs)

    def elements(self):
        return self.base.elements()

    def label(self, x):
        return self.base.label(x)

    def sort_key(self, x):
        return self.base.sort_key(x)

    def max_e(self):
        return self.base.max_e()

    def dimension(self, a):
        return self.base.dimension(a)


def q_apply(a: Block, bs: Sequence[Block], cap: int | None = None) -> Block:
    """``q_n(a, b_1, ..., b_n)`` on blocks.

    Only the first ``arity(a)`` substituted blocks matter; missing ones are
    the projections, so the working arity never exceeds the inputs' arities.
    """
    n = len(bs)
    m = a.arity
    used = list(bs[:m])
    k = max([b.arity for b in used] + ([m] if m > n else []), default=0)
    if cap is not None and k > cap:
        raise CapError(f"q_{n} needs arity {k} above cap {cap}")
    if m == 0:
        return a
    u = a.universe
    inner = [expand(b.generator, k) for b in used]
    inner += [projection(u, i, k) for i in range(n + 1, m + 1)]
    return canonicalize(compose(a.generator, inner, k))


def q_apply_padded(a: Block, bs: Sequence[Block], k: int) -> Block:
    """``q_n`` computed literally at padding arity ``k``:
    ``a^(k)(b_1^(k), ..., b_n^(k), p_{n+1}^(k), ..., p_k^(k))``."""
    n = len(bs)
    if k < n or k < a.arity or any(b.arity > k for b in bs):
        raise CapError(f"padding arity {k} too small")
    u = a.universe
    inner = [expand(b.generator, k) for b in bs]
    inner += [projection(u, i, k) for i in range(n + 1, k + 1)]
    return canonicalize(compose(expand(a.generator, k), inner, k))


class BlockAlgebra(CloneAlgebra):
    """The block algebra of a clone section; sigma are the basic operations."""

    def __init__(self, section: CloneSection, sigma: Iterable[str] | None = None,
                 name: str | None = None):
        self.section = section
        alg = section.presentation.algebra
        names = alg.operations if sigma is None else list(sigma)
        self._sigma = {n: alg.operations[n] for n in names}
        self.signature = {n: op.arity for n, op in self._sigma.items()}
        self.dim_bound = section.cap
        self.name = name or f"B({alg.name},{section.cap})"
        self.universe = section.universe

    @property
    def cap(self) -> int:
        return self.section.cap

    def elements(self) -> tuple:
        return self.section.members

    def e(self, i: int) -> Block:
        if not 1 <= i <= self.cap:
            raise CapError(f"e_{i} is outside the section (cap {self.cap})")
        return projection_block(self.universe, i)

    def q(self, a, *bs) -> Block:
        return q_apply(a, bs, self.cap)

    def sigma(self, name, *args) -> Block:
        try:
            op = self._sigma[name]
        except KeyError:
            raise KeyError(f"no operation {name!r} in {self.name}") from None
        if len(args) != op.arity:
            raise ValueError(f"{name} takes {op.arity} arguments")
        k = max((b.arity for b in args), default=0)
        return canonicalize(compose(op, [expand(b.generator, k) for b in args], k))

    def sigma_block(self, name) -> Block:
        return canonicalize(self._sigma[name])

    def dimension(self, a) -> int:
        return a.arity

    def max_e(self):
        return self.cap

    def label(self, b: Block) -> str:
        return f"{b.arity}:{''.join(b.generator.symbols())}"

    def sort_key(self, b):
        return b.sort_key()

    def term_of(self, b: Block):
        return self.section.witnesses.get(b)

    def pure(self) -> "BlockAlgebra":
        return BlockAlgebra(self.section, sigma=(), name=f"{self.name}_0")


def dimension(A: CloneAlgebra, a) -> int:
    return A.dimension(a)


class ConstantsAlgebra(CloneAlgebra):
    """A pure clone algebra with named constants ``c_sigma``."""

    def __init__(self, pure: CloneAlgebra, constants: Mapping[str, Hashable],
                 arities: Mapping[str, int]):
        self.base = pure
        self.constants = dict(constants)
        self.const_arity = dict(arities)
        self.signature = {}
        self.dim_bound = pure.dim_bound
        self.name = f"{pure.name}^*c"

    def e(self, i):
        return self.base.e(i)

    def q(self, a, *bs):
        return self.base.q(a, *bs)

    def elements(self):
        return self.base.elements()

    def label(self, x):
        return self.base.label(x)

    def sort_key(self, x):
        return self.base.sort_key(x)

    def max_e(self):
        return self.base.max_e()

    def dimension(self, a):
        return self.base.dimension(a)


def to_constants(C: CloneAlgebra) -> ConstantsAlgebra:
    """``C -> C^bullet``: each sigma becomes the constant sigma(e_1, ..., e_k)."""
    consts = {}
    for name, k in C.signature.items():
        consts[name] = C.sigma(name, *(C.e(i) for i in range(1, k + 1)))
    return ConstantsAlgebra(C.pure(), consts, C.signature)


class FromConstants(CloneAlgebra):
    """``A -> A^*``: sigma(a_1..a_k) = q_k(c_sigma, a_1..a_k)."""

    def __init__(self, A: ConstantsAlgebra):
        self.source = A
        self.signature = dict(A.const_arity)
        self.dim_bound = A.dim_bound
        self.name = f"({A.name})^*"

    def e(self, i):
        return self.source.e(i)

    def q(self, a, *bs):
        return self.source.q(a, *bs)

    def sigma(self, name, *args):
        k = self.signature[name]
        if len(args) != k:
            raise ValueError(f"{name} takes {k} arguments")
        return self.source.q(self.source.constants[name], *args)

    def elements(self):
        return self.source.elements()

    def label(self, x):
        return self.source.label(x)

    def sort_key(self, x):
        return self.source.sort_key(x)

    def max_e(self):
        return self.source.max_e()

    def dimension(self, a):
        return self.source.dimension(a)


def from_constants(A: ConstantsAlgebra) -> FromConstants:
    return FromConstants(A)


def epsilon_stream(C: CloneAlgebra, overrides: Mapping[int, Hashable] | None = None) -> Stream:
    """A point over C relativized to the thread e_1, e_2, ..."""
    return Stream(C.e, overrides or {}, "epsilon")


def _support(C: CloneAlgebra, s: Stream) -> int:
    k = 0
    for p, v in s.overrides.items():
        if p > k:
            try:
                differs = v != C.e(p)
            except CapError:
                differs = True
            if differs:
                k = p
    return k


def rca_embed(C: CloneAlgebra, c, s: Stream):
    """``F(c)(s) = q_k(c, s_1, ..., s_k)`` for the least k with s = eps[s_1..s_k]."""
    k = _support(C, s)
    if C.dim_bound is not None and k > C.dim_bound:
        raise CapError(f"stream support {k} exceeds the section bound {C.dim_bound}")
    return C.q(c, *s.prefix(k))


def relativized_q(C: CloneAlgebra, b, cs: Sequence, s: Stream):
    """``q_n`` of the relativized functional algebra, applied to embedded
    elements and evaluated at ``s``: F(b)(s[F(c_1)(s), ..., F(c_n)(s)])."""
    values = [rca_embed(C, c, s) for c in cs]
    return rca_embed(C, b, s.replace_prefix(values))


def relativized_sigma(C: CloneAlgebra, name: str, bs: Sequence, s: Stream):
    return C.sigma(name, *(rca_embed(C, b, s) for b in bs))
