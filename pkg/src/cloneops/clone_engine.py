"""Clone generation below an arity cap and term operations of finite algebras.

The clone generated by F is computed through its top-arity part: the cap-ary
members form the smallest set of cap-ary operations containing the projections
and closed under applying each generator. Every member of smaller arity is the
restriction of a fictitious cap-ary member, so canonicalizing the cap-ary part
yields every block of arity <= cap. Composition never needs an intermediate
arity above the cap, so the section is exact whenever all generators fit.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .finite_ops import (Block, FinUniverse, OperationError, OpTable, all_operations,
                         canonicalize, compose, expand, projection)
from .terms import App, Term, Var, max_var


FULL_LIMIT = 1 << 20


class CapError(ValueError):
    """A requested arity lies above the cap of a finite section."""


class Undecided(Exception):
    """Membership cannot be decided at this cap."""


@dataclass(frozen=True)
class FinAlgebra:
    name: str
    universe: FinUniverse
    operations: Mapping[str, OpTable] = field(default_factory=dict)

    def __post_init__(self):
        ops = dict(self.operations)
        for name, op in ops.items():
            if op.universe != self.universe:
                raise OperationError(f"operation {name!r} lives on another universe")
        object.__setattr__(self, "operations", ops)

    @property
    def signature(self) -> dict[str, int]:
        return {name: op.arity for name, op in self.operations.items()}

    def __hash__(self):
        return hash((self.name, self.universe, tuple(sorted(
            (n, op.table) for n, op in self.operations.items()))))


@dataclass(frozen=True)
class ClonePresentation:
    algebra: FinAlgebra
    cap: int
    generators: tuple[str, ...] | None = None   # None: all basic operations
    extra: tuple[OpTable, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "extra", tuple(self.extra))
        if self.generators is not None:
            object.__setattr__(self, "generators", tuple(self.generators))
            for g in self.generators:
                if g not in self.algebra.operations:
                    raise OperationError(f"unknown generator {g!r}")
        if self.cap < 1:
            raise CapError("arity cap must be at least 1")
        for name, op in self.generator_ops():
            if op.arity > self.cap:
                raise CapError(f"generator {name} has arity {op.arity} above cap {self.cap}")

    def generator_ops(self) -> list[tuple[str, OpTable]]:
        names = self.algebra.operations if self.generators is None else self.generators
        ops = [(n, self.algebra.operations[n]) for n in names]
        ops += [(f"g{i + 1}", op) for i, op in enumerate(self.extra)]
        return ops


@dataclass(frozen=True)
class CloneSection:
    presentation: ClonePresentation
    members: tuple[Block, ...]
    witnesses: Mapping[Block, Term]

    @property
    def cap(self) -> int:
        return self.presentation.cap

    @property
    def universe(self) -> FinUniverse:
        return self.presentation.algebra.universe

    def __contains__(self, block: Block) -> bool:
        return block in self._member_set

    @property
    def _member_set(self) -> frozenset:
        try:
            return self.__dict__["_ms"]
        except KeyError:
            ms = frozenset(self.members)
            object.__setattr__(self, "_ms", ms)
            return ms

    def operations(self, max_arity: int | None = None) -> list[OpTable]:
        """Every operation of arity <= max_arity (default: the cap) in the clone."""
        top = self.cap if max_arity is None else max_arity
        ops = [op for b in self.members for op in b.members(top)]
        return sorted(ops, key=OpTable.sort_key)

    def of_arity_at_most(self, k: int) -> list[Block]:
        return [b for b in self.members if b.arity <= k]


def _closure_top(universe: FinUniverse, gens: Sequence[tuple[str, OpTable]],
                 cap: int, limit: int):
    known: dict[OpTable, Term] = {}
    order: list[OpTable] = []

    def add(op, term):
        if op not in known:
            if len(known) >= limit:
                raise CapError(f"clone section exceeds {limit} cap-ary members")
            known[op] = term
            order.append(op)
            return True
        return False

    for i in range(1, cap + 1):
        add(projection(universe, i, cap), Var(i))
    for name, g in gens:
        if g.arity == 0:
            add(compose(g, [], cap), App(name))
    done = 0
    while done < len(order):
        frontier_start = done
        done = len(order)
        for name, g in gens:
            m = g.arity
            if m == 0:
                continue
            # tuples with at least one argument from the newest round
            for combo in itertools.product(range(done), repeat=m):
                if max(combo) < frontier_start:
                    continue
                args = [order[j] for j in combo]
                add(compose(g, args, cap), App(name, tuple(known[a] for a in args)))
    return known, order


def clone_close(p: ClonePresentation, limit: int = 200_000) -> CloneSection:
    universe = p.algebra.universe
    known, order = _closure_top(universe, p.generator_ops(), p.cap, limit)
    witnesses: dict[Block, Term] = {}
    for op in order:
        b = canonicalize(op)
        if b not in witnesses:
            witnesses[b] = known[op]
    members = tuple(sorted(witnesses, key=Block.sort_key))
    return CloneSection(p, members, witnesses)


def clone_contains(s: CloneSection, op: OpTable) -> bool:
    """Membership of ``op``; raises ``Undecided`` above the cap."""
    if op.universe != s.universe:
        raise OperationError("universe mismatch")
    if op.arity > s.cap:
        raise Undecided(f"arity {op.arity} is above cap {s.cap}")
    return canonicalize(op) in s


def term_clone(a: FinAlgebra, cap: int) -> CloneSection:
    return clone_close(ClonePresentation(a, cap))


def term_eval(t: Term, a: FinAlgebra, k: int) -> OpTable:
    """The k-ary term operation of ``t`` on ``a``."""
    if max_var(t) > k:
        raise CapError(f"term uses v{max_var(t)} but arity is {k}")
    cache: dict[Term, OpTable] = {}

    def ev(u: Term) -> OpTable:
        if u in cache:
            return cache[u]
        if isinstance(u, Var):
            res = projection(a.universe, u.index, k)
        else:
            try:
                op = a.operations[u.op]
            except KeyError:
                raise OperationError(f"operation symbol {u.op!r} not in {a.name}") from None
            if op.arity != len(u.args):
                raise OperationError(
                    f"{u.op} has arity {op.arity}, applied to {len(u.args)} arguments")
            res = compose(op, [ev(x) for x in u.args], k)
        cache[u] = res
        return res

    return ev(t)


def term_block(t: Term, a: FinAlgebra, k: int | None = None) -> Block:
    return canonicalize(term_eval(t, a, max_var(t) if k is None else k))


def block_partition(ops: Mapping[str, OpTable]) -> list[tuple[Block, list[str]]]:
    """Group named operations by similarity."""
    groups: dict[Block, list[str]] = {}
    for name, op in ops.items():
        groups.setdefault(canonicalize(op), []).append(name)
    return sorted(((b, sorted(ns)) for b, ns in groups.items()),
                  key=lambda item: item[0].sort_key())


def to_cap(block: Block, k: int) -> OpTable:
    if block.arity > k:
        raise CapError(f"block of arity {block.arity} has no member of arity {k}")
    return expand(block.generator, k)


def full_section(a: FinAlgebra, cap: int) -> CloneSection:
    """Every block of arity <= cap on the universe of ``a`` (the full clone's section).

    The basic operations of ``a`` are kept as the signature; no witness terms
    are recorded.
    """
    p = ClonePresentation(a, cap)
    u = a.universe
    if u.size ** (u.size ** cap) > FULL_LIMIT:
        raise CapError(f"the full clone section on {u.size} elements at cap {cap} is too large")
    members = {canonicalize(op) for k in range(cap + 1) for op in all_operations(u, k)}
    return CloneSection(p, tuple(sorted(members, key=Block.sort_key)), {})

