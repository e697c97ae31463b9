"""Representable functions, the blocks R(a) and the representation isomorphism."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Hashable, Sequence

from .block_algebra import BlockAlgebra, CloneAlgebra, DimensionExceeded
from .clone_engine import CapError
from .tables import SectionNotClosed
from .finite_ops import (Block, FinUniverse, OperationError, OpTable, canonicalize,
                         compose, expand, projection)


@dataclass(frozen=True)
class RepFunction:
    """The k-ary function x -> q_k(value, x) of a clone algebra."""
    algebra: CloneAlgebra
    arity: int
    value: Hashable

    def __call__(self, *xs):
        if len(xs) != self.arity:
            raise ValueError(f"expected {self.arity} arguments, got {len(xs)}")
        return self.algebra.q(self.value, *xs)


def is_representable(C: CloneAlgebra, f: Callable | dict, k: int,
                     elements: Sequence | None = None) -> bool:
    """Does ``f(x) = q_k(f(e_1..e_k), x)`` hold on the section, with dim f(e) <= k?

    ``f`` may be a callable or a dict from k-tuples to elements.
    """
    elems = list(C.elements() if elements is None else elements)
    members = set(elems)
    fn = f.__getitem__ if isinstance(f, dict) else None

    def call(args):
        try:
            return fn(tuple(args)) if fn else f(*args)
        except KeyError:
            raise SectionNotClosed(f"f undefined at {args}") from None

    es = [C.e(i) for i in range(1, k + 1)]
    a = call(es)
    d = C.dimension(a)
    if isinstance(d, DimensionExceeded) or d > k:
        return False
    for xs in itertools.product(elems, repeat=k):
        lhs = call(xs)
        if lhs not in members:
            raise SectionNotClosed(f"f{tuple(map(C.label, xs))} leaves the section")
        if lhs != C.q(a, *xs):
            return False
    return True


@dataclass(frozen=True)
class RepBlock:
    """R(a): the functions q_n(a, -) for n >= dimension(a)."""
    algebra: CloneAlgebra
    value: Hashable
    arity: int

    def member(self, n: int) -> RepFunction:
        if n < self.arity:
            raise ValueError(f"R(a) has no member of arity {n} < {self.arity}")
        return RepFunction(self.algebra, n, self.value)


def rep_block(C: CloneAlgebra, a) -> RepBlock:
    d = C.dimension(a)
    if isinstance(d, DimensionExceeded):
        raise CapError(f"dimension of {C.label(a)} exceeds the bound {int(d)}")
    return RepBlock(C, a, int(d))


def fi_section(C: CloneAlgebra, k: int, max_n: int | None = None) -> tuple[list, list[str]]:
    """Elements of dimension <= k, plus a list of closure failures (empty if closed)."""
    elems = sorted(C.elements(), key=C.sort_key)
    fi = [a for a in elems if not isinstance(C.dimension(a), DimensionExceeded)
          and C.dimension(a) <= k]
    members = set(fi)
    problems = []
    top = C.max_e() if max_n is None else max_n
    for n in range(0, top + 1):
        for args in itertools.product(fi, repeat=n + 1):
            try:
                r = C.q(*args)
            except CapError:
                continue
            if r not in members:
                problems.append(f"q_{n}{tuple(map(C.label, args))}")
    for name, m in sorted(C.signature.items()):
        for args in itertools.product(fi, repeat=m):
            if C.sigma(name, *args) not in members:
                problems.append(f"{name}{tuple(map(C.label, args))}")
    return fi, problems


@dataclass
class RepIsoReport:
    algebra: str
    cap: int
    size: int
    checks: dict[str, int] = field(default_factory=dict)
    mismatches: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def to_dict(self):
        return {"algebra": self.algebra, "cap": self.cap, "section_size": self.size,
                "checks": dict(sorted(self.checks.items())),
                "mismatches": self.mismatches, "notes": self.notes, "ok": self.ok}


def _rep_table(C: BlockAlgebra, a, universe: FinUniverse, index, k: int) -> OpTable:
    """The k-ary function q_k(a, -) on the section as an operation table."""
    elems = universe.elements
    rows = []
    for xs in itertools.product(range(len(elems)), repeat=k):
        r = C.q(a, *(index[i] for i in xs))
        rows.append(universe.index(C.label(r)))
    return OpTable(universe, k, tuple(rows))


def rep_iso_check(C: BlockAlgebra, max_witnesses: int = 20) -> RepIsoReport:
    """Check that a -> R(a) is an isomorphism onto its image on the section.

    Every element is mapped to the canonical generator of R(a), an operation on
    the section itself; the image is then compared with the block algebra it
    spans, with composition done by plain table arithmetic.
    """
    elems = sorted(C.elements(), key=C.sort_key)
    cap = C.max_e()
    rep = RepIsoReport(C.name, cap, len(elems))
    rep.notes.append(f"surjectivity is checked on the arity-<={cap} section only")
    universe = FinUniverse(f"sec({C.name})", tuple(C.label(x) for x in elems))
    index = dict(enumerate(elems))

    def add(msg):
        if len(rep.mismatches) < max_witnesses:
            rep.mismatches.append(msg)
        rep.checks["mismatch_total"] = rep.checks.get("mismatch_total", 0) + 1

    image: dict = {}
    for a in elems:
        d = C.dimension(a)
        try:
            blk = canonicalize(_rep_table(C, a, universe, index, cap))
        except (CapError, OperationError) as exc:   # q leaving the section
            add(f"R({C.label(a)}) not computable: {exc}")
            continue
        image[a] = blk
        if blk.arity != d:
            add(f"arity of R({C.label(a)}) is {blk.arity}, dimension is {d}")
    rep.checks["elements"] = len(image)
    blocks = set(image.values())
    if len(blocks) != len(image):
        add("R is not injective on the section")
    rep.checks["injective"] = int(len(blocks) == len(image))

    # e_i -> projection blocks
    for i in range(1, cap + 1):
        if image.get(C.e(i)) != canonicalize(projection(universe, i, i)):
            add(f"R(e_{i}) is not the projection p_{i}")
    rep.checks["e"] = cap

    def q_blocks(b: Block, cs: Sequence[Block], n: int) -> Block:
        k = max([b.arity, n] + [c.arity for c in cs])
        inner = [expand(c.generator, k) for c in cs]
        inner += [projection(universe, i, k) for i in range(n + 1, k + 1)]
        return canonicalize(compose(expand(b.generator, k), inner, k))

    count = 0
    for n in range(0, cap + 1):
        for args in itertools.product(elems, repeat=n + 1):
            try:
                r = C.q(*args)
            except CapError:
                continue
            if r not in image:
                continue
            count += 1
            want = q_blocks(image[args[0]], [image[x] for x in args[1:]], n)
            if image[r] != want:
                add(f"R(q_{n}{tuple(map(C.label, args))}) != q_{n} of images")
    rep.checks["q"] = count

    count = 0
    for name, m in sorted(C.signature.items()):
        sig = OpTable(universe, m, tuple(
            universe.index(C.label(C.sigma(name, *(index[i] for i in row))))
            for row in itertools.product(range(len(elems)), repeat=m)))
        for args in itertools.product(elems, repeat=m):
            count += 1
            k = max((image[x].arity for x in args), default=0)
            want = canonicalize(compose(sig, [expand(image[x].generator, k) for x in args], k))
            if image[C.sigma(name, *args)] != want:
                add(f"R({name}{tuple(map(C.label, args))}) != {name} of images")
    rep.checks["sigma"] = count

    # the image is closed: it is the whole represented section
    closed = True
    for n in range(0, cap + 1):
        for args in itertools.product(sorted(blocks, key=Block.sort_key), repeat=n + 1):
            if max(x.arity for x in args) > cap:
                continue
            if q_blocks(args[0], args[1:], n) not in blocks:
                closed = False
                break
        if not closed:
            break
    if not closed:
        add("R-image is not closed under q")
    rep.checks["surjective_onto_image"] = int(closed)
    return rep
