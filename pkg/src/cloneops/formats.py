"""Algebra files (JSON, row-major tables) and deterministic artifact output."""
from __future__ import annotations

import json
import os
import re
import tempfile
from pathlib import Path

from .clone_engine import FinAlgebra
from .finite_ops import FinUniverse, OperationError, OpTable

FORMAT = "cloneops-algebra/1"
CONVENTION = "row-major, leftmost argument most significant"


class AlgebraFileError(ValueError):
    def __init__(self, source: str, message: str, line: int | None = None):
        self.source, self.line = source, line
        where = f"{source}:{line}" if line else source
        super().__init__(f"{where}: {message}")


def _line_of(text: str, needle: str) -> int | None:
    m = re.search(re.escape(needle), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def parse_algebra_text(text: str, source: str = "<string>") -> FinAlgebra:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise AlgebraFileError(source, f"invalid JSON: {exc.msg} (column {exc.colno})",
                               exc.lineno) from None
    if not isinstance(data, dict):
        raise AlgebraFileError(source, "top level must be an object", 1)
    fmt = data.get("format", FORMAT)
    if fmt != FORMAT:
        raise AlgebraFileError(source, f"format: unsupported {fmt!r}", _line_of(text, '"format"'))
    conv = data.get("convention", CONVENTION)
    if conv != CONVENTION:
        raise AlgebraFileError(source, f"convention: expected {CONVENTION!r}",
                               _line_of(text, '"convention"'))
    name = data.get("name", Path(source).stem)
    if not isinstance(name, str):
        raise AlgebraFileError(source, "name: must be a string", _line_of(text, '"name"'))
    universe = data.get("universe")
    if not isinstance(universe, list) or not universe:
        raise AlgebraFileError(source, "universe: must be a non-empty list of symbols",
                               _line_of(text, '"universe"'))
    try:
        U = FinUniverse(name, tuple(str(s) for s in universe))
    except OperationError as exc:
        raise AlgebraFileError(source, f"universe: {exc}", _line_of(text, '"universe"')) from None
    ops_data = data.get("operations", [])
    if not isinstance(ops_data, list):
        raise AlgebraFileError(source, "operations: must be a list", _line_of(text, '"operations"'))
    ops = {}
    for i, od in enumerate(ops_data):
        field = f"operations[{i}]"
        if not isinstance(od, dict):
            raise AlgebraFileError(source, f"{field}: must be an object")
        oname = od.get("name")
        line = _line_of(text, json.dumps(oname)) if isinstance(oname, str) else None
        if not isinstance(oname, str) or not oname:
            raise AlgebraFileError(source, f"{field}.name: must be a non-empty string")
        if any(c.isspace() or c in "()" for c in oname):
            raise AlgebraFileError(source, f"{field}.name: {oname!r} contains blanks or parentheses",
                                   line)
        if oname in ops:
            raise AlgebraFileError(source, f"{field}.name: duplicate operation {oname!r}", line)
        arity = od.get("arity")
        if not isinstance(arity, int) or isinstance(arity, bool) or arity < 0:
            raise AlgebraFileError(source, f"{field}.arity: must be a natural number "
                                   f"(operation {oname!r})", line)
        table = od.get("table")
        if not isinstance(table, list):
            raise AlgebraFileError(source, f"{field}.table: must be a list (operation {oname!r})",
                                   line)
        want = U.size ** arity
        if len(table) != want:
            raise AlgebraFileError(source, f"{field}.table: operation {oname!r} of arity {arity} "
                                   f"needs {want} entries, got {len(table)}", line)
        try:
            ops[oname] = OpTable.from_symbols(U, arity, [str(s) for s in table])
        except OperationError as exc:
            raise AlgebraFileError(source, f"{field}.table: operation {oname!r}: {exc}",
                                   line) from None
    return FinAlgebra(name, U, ops)


def parse_algebra(path) -> FinAlgebra:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise AlgebraFileError(str(path), f"cannot read file: {exc.strerror}") from None
    return parse_algebra_text(text, str(path))


def serialize_algebra(a: FinAlgebra) -> str:
    data = {
        "format": FORMAT,
        "convention": CONVENTION,
        "name": a.name,
        "universe": list(a.universe.elements),
        "operations": [{"name": n, "arity": op.arity, "table": op.symbols()}
                       for n, op in a.operations.items()],
    }
    return json.dumps(data, indent=2) + "\n"


def dumps(obj) -> str:
    """Canonical JSON text for reports."""
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def write_atomic(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
