"""Finitary operations on a finite universe.

Tables are stored row-major with the leftmost argument most significant, as
tuples of element indices. Positions of arguments are 1-based throughout.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Mapping, Sequence


class OperationError(ValueError):
    """Bad arity, unknown symbol or mismatched universes."""


@dataclass(frozen=True)
class FinUniverse:
    # identity is the ordered symbol list; the name is only a display label
    name: str = field(compare=False)
    elements: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        if not self.elements:
            raise OperationError(f"universe {self.name!r} is empty")
        if len(set(self.elements)) != len(self.elements):
            raise OperationError(f"universe {self.name!r} has repeated symbols")

    @property
    def size(self) -> int:
        return len(self.elements)

    @cached_property
    def _index(self) -> dict[str, int]:
        return {s: i for i, s in enumerate(self.elements)}

    def index(self, symbol) -> int:
        try:
            return self._index[str(symbol)]
        except KeyError:
            raise OperationError(
                f"unknown element {symbol!r} in universe {self.name!r}") from None

    def __len__(self):
        return len(self.elements)


def boolean_universe() -> FinUniverse:
    return FinUniverse("2", ("0", "1"))


@dataclass(frozen=True, order=False)
class OpTable:
    universe: FinUniverse
    arity: int
    table: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "table", tuple(int(v) for v in self.table))
        if self.arity < 0:
            raise OperationError("arity must be non-negative")
        size = self.universe.size
        if len(self.table) != size ** self.arity:
            raise OperationError(
                f"table has {len(self.table)} entries, expected {size}^{self.arity}")
        if any(v < 0 or v >= size for v in self.table):
            raise OperationError("table entry outside the universe")

    @classmethod
    def from_function(cls, universe: FinUniverse, arity: int,
                      fn: Callable[..., int]) -> "OpTable":
        """Tabulate ``fn`` acting on element indices."""
        rows = itertools.product(range(universe.size), repeat=arity)
        return cls(universe, arity, tuple(fn(*row) for row in rows))

    @classmethod
    def from_symbols(cls, universe: FinUniverse, arity: int,
                     symbols: Iterable) -> "OpTable":
        return cls(universe, arity, tuple(universe.index(s) for s in symbols))

    def sort_key(self):
        return (self.arity, self.table)

    def value(self, row: Sequence[int]) -> int:
        idx = 0
        size = self.universe.size
        for a in row:
            idx = idx * size + a
        return self.table[idx]

    def symbols(self) -> list[str]:
        return [self.universe.elements[v] for v in self.table]

    def __repr__(self):
        return f"OpTable({self.arity}, {''.join(self.symbols()) if self.universe.size <= 10 else self.table})"


def projection(universe: FinUniverse, i: int, k: int) -> OpTable:
    """The k-ary projection onto argument i (1-based)."""
    if not 1 <= i <= k:
        raise OperationError(f"projection index {i} out of range for arity {k}")
    size = universe.size
    stride = size ** (k - i)
    return OpTable(universe, k, tuple((r // stride) % size for r in range(size ** k)))


def constant(universe: FinUniverse, value: int, k: int = 0) -> OpTable:
    return OpTable(universe, k, (value,) * universe.size ** k)


def evaluate(op: OpTable, args: Sequence) -> str:
    """Evaluate ``op`` on element symbols and return the result symbol."""
    if len(args) != op.arity:
        raise OperationError(f"expected {op.arity} arguments, got {len(args)}")
    row = [op.universe.index(a) for a in args]
    return op.universe.elements[op.value(row)]


def compose(f: OpTable, gs: Sequence[OpTable], k: int) -> OpTable:
    """The k-ary operation ``a -> f(g_1(a), ..., g_n(a))``."""
    if len(gs) != f.arity:
        raise OperationError(f"{f.arity}-ary operation given {len(gs)} arguments")
    for g in gs:
        if g.arity != k:
            raise OperationError(f"inner operation has arity {g.arity}, expected {k}")
        if g.universe != f.universe:
            raise OperationError("universe mismatch in composition")
    size = f.universe.size
    rows = size ** k
    if f.arity == 0:
        return OpTable(f.universe, k, f.table * rows)
    ft = f.table
    if f.arity == 1:
        return OpTable(f.universe, k, tuple(ft[v] for v in gs[0].table))
    out = []
    cols = [g.table for g in gs]
    for r in range(rows):
        idx = 0
        for c in cols:
            idx = idx * size + c[r]
        out.append(ft[idx])
    return OpTable(f.universe, k, tuple(out))


def depends_on(op: OpTable, i: int) -> bool:
    if not 1 <= i <= op.arity:
        raise OperationError(f"argument index {i} out of range for arity {op.arity}")
    size = op.universe.size
    stride = size ** (op.arity - i)
    block = stride * size
    t = op.table
    for start in range(0, len(t), block):
        for off in range(stride):
            first = t[start + off]
            for j in range(1, size):
                if t[start + off + j * stride] != first:
                    return True
    return False


def restrict(op: OpTable) -> OpTable:
    """Drop the (fictitious) last argument."""
    if op.arity == 0:
        raise OperationError("nullary operations have no restriction")
    size = op.universe.size
    return OpTable(op.universe, op.arity - 1, op.table[::size])


def expand(op: OpTable, k: int) -> OpTable:
    """The fictitious expansion of ``op`` to arity ``k`` (dummy trailing arguments)."""
    if k < op.arity:
        raise OperationError(f"cannot expand arity {op.arity} down to {k}")
    factor = op.universe.size ** (k - op.arity)
    return OpTable(op.universe, k, tuple(v for v in op.table for _ in range(factor)))


@dataclass(frozen=True)
class Block:
    """A similarity class of operations, identified by its minimal generator."""
    generator: OpTable

    @property
    def universe(self) -> FinUniverse:
        return self.generator.universe

    @property
    def arity(self) -> int:
        return self.generator.arity

    def at(self, k: int) -> OpTable:
        """The unique member of arity ``k``."""
        return expand(self.generator, k)

    def members(self, max_arity: int) -> list[OpTable]:
        return [self.at(k) for k in range(self.arity, max_arity + 1)]

    def sort_key(self):
        return self.generator.sort_key()

    def __lt__(self, other):
        return self.sort_key() < other.sort_key()

    def __repr__(self):
        return f"<{self.generator!r}>"


def canonicalize(op: OpTable) -> Block:
    while op.arity > 0 and not depends_on(op, op.arity):
        op = restrict(op)
    return Block(op)


def similar(f: OpTable, g: OpTable) -> bool:
    if f.universe != g.universe:
        raise OperationError("universe mismatch")
    return canonicalize(f) == canonicalize(g)


def projection_block(universe: FinUniverse, i: int) -> Block:
    # canonical even on a one-element universe, where p_i is fictitious
    return canonicalize(projection(universe, i, i))


def constant_block(universe: FinUniverse, value: int) -> Block:
    return Block(constant(universe, value, 0))


@dataclass(frozen=True)
class Stream:
    """A point of A^omega: a default thread plus finitely many overrides.

    ``thread`` maps a 1-based position to an element; ``overrides`` replaces the
    thread value at finitely many positions.
    """
    thread: Callable[[int], object]
    overrides: Mapping[int, object] = field(default_factory=dict)
    thread_name: str = "thread"

    def __post_init__(self):
        if any(p < 1 for p in self.overrides):
            raise OperationError("stream positions start at 1")
        object.__setattr__(self, "overrides", dict(self.overrides))

    def __getitem__(self, i: int):
        if i < 1:
            raise IndexError(i)
        if i in self.overrides:
            return self.overrides[i]
        return self.thread(i)

    def prefix(self, k: int) -> list:
        return [self[i] for i in range(1, k + 1)]

    def replace_prefix(self, values: Sequence) -> "Stream":
        """``s[a_1, ..., a_n]``: overwrite the first n positions."""
        merged = dict(self.overrides)
        merged.update({i + 1: v for i, v in enumerate(values)})
        return Stream(self.thread, merged, self.thread_name)

    def support(self) -> int:
        """Least k with ``s = thread[s_1, ..., s_k]``."""
        k = 0
        for p, v in self.overrides.items():
            if p > k and v != self.thread(p):
                k = p
        return k


def constant_stream(value, overrides: Mapping[int, object] | None = None) -> Stream:
    return Stream(lambda _i: value, overrides or {}, f"const:{value}")


def top_eval(block: Block, s: Stream):
    """Value of the top extension of ``block`` at ``s`` (element indices)."""
    return block.generator.value(s.prefix(block.arity))


def all_operations(universe: FinUniverse, arity: int) -> Iterable[OpTable]:
    for table in itertools.product(range(universe.size), repeat=universe.size ** arity):
        yield OpTable(universe, arity, table)
