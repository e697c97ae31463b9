"""Command-line interface: ``cloneops <command> ...``.

Exit status is 0 on success, 1 when a checked property is violated and 2 on
usage, parse or validation errors. JSON and DOT artifacts are byte-stable.
"""
from __future__ import annotations

import argparse
import logging
import sys
from collections import Counter

from . import central as cen
from .axioms import check_axioms
from .block_algebra import BlockAlgebra, DimensionExceeded
from .clone_engine import (CapError, ClonePresentation, Undecided, block_partition,
                           clone_close, full_section, term_block, term_clone)
from .congruence import (SizeGuardExceeded, SectionStructure, clv_block_algebra,
                         congruence_enumerate, emit_dot, equation_derivable, section_structure)
from .finite_ops import OperationError
from .formats import AlgebraFileError, dumps, parse_algebra, write_atomic
from .representable import rep_iso_check
from .tables import SectionNotClosed, from_clone_algebra, from_fin_algebra
from .terms import TermSyntaxError, parse_term
from .varieties import independence_search, is_minimal_bounded, product_minimality_check

log = logging.getLogger("cloneops")


class UsageError(Exception):
    pass


def _table_text(op) -> str:
    syms = op.symbols()
    return "".join(syms) if all(len(s) == 1 for s in syms) else " ".join(syms)


def _emit(args, report: dict) -> None:
    if getattr(args, "out", None):
        write_atomic(args.out, dumps(report))


def _block_algebra(args, alg):
    if getattr(args, "full", False):
        return BlockAlgebra(full_section(alg, args.cap), name=f"Full({alg.name},{args.cap})")
    return BlockAlgebra(term_clone(alg, args.cap))


def _element(B: BlockAlgebra, alg, text: str):
    text = text.strip()
    labels = {B.label(b): b for b in B.elements()}
    if text in labels:
        return labels[text]
    if text[:1] == "e" and text[1:].isdigit():
        return B.e(int(text[1:]))
    t = parse_term(text)
    b = term_block(t, alg)
    if b not in B.section:
        raise UsageError(f"{text} is not in the section")
    return b


def cmd_close(args) -> int:
    alg = parse_algebra(args.algebra)
    gens = None if args.generators is None else tuple(
        g for g in args.generators.split(",") if g)
    section = clone_close(ClonePresentation(alg, args.cap, gens))
    ops = section.operations()
    print(f"{len(ops)} operations of arity <= {args.cap} in {len(section.members)} blocks")
    for op in ops:
        print(f"{op.arity} {_table_text(op)}")
    _emit(args, {
        "algebra": alg.name, "cap": args.cap,
        "generators": sorted(alg.operations) if gens is None else list(gens),
        "operation_count": len(ops),
        "operations": [{"arity": op.arity, "table": op.symbols()} for op in ops],
        "blocks": [{"arity": b.arity, "table": b.generator.symbols(),
                    "term": str(section.witnesses[b])} for b in section.members],
    })
    return 0


def cmd_blocks(args) -> int:
    alg = parse_algebra(args.algebra)
    groups = block_partition(alg.operations)
    rows = []
    for b, names in groups:
        print(f"{b.arity}:{_table_text(b.generator)}  {' '.join(names)}")
        rows.append({"arity": b.arity, "table": b.generator.symbols(), "operations": names})
    _emit(args, {"algebra": alg.name, "blocks": rows})
    return 0


def cmd_axioms(args) -> int:
    alg = parse_algebra(args.algebra)
    B = _block_algebra(args, alg)
    top = args.cap if args.max_arity is None else args.max_arity
    elems = [b for b in B.elements() if b.arity <= top]
    if args.sampled is not None and args.seed is None:
        raise UsageError("--sampled needs --seed")
    mode = "sampled" if args.sampled is not None else "exhaustive"
    rep = check_axioms(B, max_n=args.max_n, elements=elems, mode=mode,
                       samples=args.sampled or 0, seed=args.seed)
    total = sum(rep.checked.values())
    print(f"{B.name}: {len(elems)} elements, {total} instances, "
          f"{rep.total_violations} violations")
    for v in rep.violations:
        print(f"  {v.key}: {v.count}")
    _emit(args, rep.to_dict())
    return 0 if rep.ok else 1


def cmd_dim(args) -> int:
    alg = parse_algebra(args.algebra)
    B = _block_algebra(args, alg)
    a = _element(B, alg, args.element)
    d = B.dimension(a)
    text = f">{int(d)}" if isinstance(d, DimensionExceeded) else str(d)
    print(f"dimension({B.label(a)}) = {text}")
    _emit(args, {"algebra": B.name, "element": B.label(a), "dimension": text})
    return 0


def _church_tables(args, alg):
    """Tables of a Church-algebra file, or of the pure block algebra at --cap."""
    if args.cap is None:
        return from_fin_algebra(alg), None
    B = _block_algebra(args, alg)
    return from_clone_algebra(B.pure()), B


def _pick(T, B, alg, text):
    if B is not None:
        return T.elements.index(_element(B, alg, text))
    if text in T.labels:
        return T.index_of(text)
    if text[:1] == "e" and text[1:].isdigit():
        return T.e(int(text[1:]))
    raise UsageError(f"unknown element {text!r}")


def cmd_central(args) -> int:
    alg = parse_algebra(args.algebra)
    T, B = _church_tables(args, alg)
    report = {"algebra": T.name, "n": args.n}
    if args.element is not None:
        c = _pick(T, B, alg, args.element)
        verdict = cen.is_n_central(T, c, args.n, args.method)
        report.update({"element": T.labels[c], "central": verdict})
        print(f"{T.labels[c]} is {'' if verdict else 'not '}{args.n}-central")
        if B is not None:
            r = cen.central_range(T, c, args.method)
            report["range"] = None if r is None else [r.low, r.high]
            print("central range: " + ("empty" if r is None else f"[{r.low}, {r.high}]"))
    else:
        try:
            cen.check_church(T, args.n)
        except cen.NotChurchAlgebra as exc:
            print(f"not an {args.n}-Church algebra: {exc}")
            report["error"] = str(exc)
            _emit(args, report)
            return 1
        cs = cen.central_elements(T, args.n, args.method)
        report["central"] = [T.labels[c] for c in cs]
        report["nba"] = len(cs) == T.size
        print(f"{len(cs)} of {T.size} elements are {args.n}-central; "
              f"{args.n}BA: {'yes' if report['nba'] else 'no'}")
        for c in cs:
            print(f"  {T.labels[c]}")
    _emit(args, report)
    return 0


def cmd_decompose(args) -> int:
    alg = parse_algebra(args.algebra)
    T, B = _church_tables(args, alg)
    c = _pick(T, B, alg, args.element)
    try:
        d = cen.decompose(T, c, args.n)
    except cen.NotCentral as exc:
        print(str(exc))
        _emit(args, {"algebra": T.name, "element": T.labels[c], "error": str(exc)})
        return 1
    print(f"{T.name} = " + " x ".join(str(s) for s in d.sizes)
          + f"  (bijective: {d.bijective}, operations preserved: {d.preserves_ops})")
    _emit(args, {
        "algebra": T.name, "element": T.labels[c], "n": args.n,
        "factor_sizes": d.sizes, "bijective": d.bijective,
        "preserves_operations": d.preserves_ops,
        "factors": [list(F.labels) for F in d.factors],
    })
    return 0 if d.ok else 1


def cmd_congruences(args) -> int:
    alg = parse_algebra(args.algebra)
    if args.direct:
        T = from_fin_algebra(alg)
        s = SectionStructure.build(T, descriptor=f"{alg.name}: {T.size} elements")
    else:
        C = clv_block_algebra(alg, args.section)
        s = section_structure(C, pure=args.pure)
    lat = congruence_enumerate(s, limit=args.limit)
    print(f"{len(lat)} congruences")
    if args.dot:
        write_atomic(args.dot, emit_dot(lat))
    _emit(args, lat.to_dict())
    return 0


def cmd_derive(args) -> int:
    alg = parse_algebra(args.algebra)
    s, t = parse_term(args.lhs), parse_term(args.rhs)
    holds = equation_derivable(alg, s, t, args.k)
    print(f"{s} = {t}: {'holds' if holds else 'fails'} in Var({alg.name})")
    _emit(args, {"algebra": alg.name, "lhs": str(s), "rhs": str(t), "holds": holds})
    return 0


def cmd_clv(args) -> int:
    alg = parse_algebra(args.algebra)
    C = clv_block_algebra(alg, args.cap)
    counts = Counter(b.arity for b in C.elements())
    ops = C.section.operations()
    print(f"{C.name}: {len(C.elements())} blocks, {len(ops)} operations of arity <= {args.cap}")
    for k in sorted(counts):
        print(f"  arity {k}: {counts[k]} blocks")
    _emit(args, {
        "algebra": alg.name, "cap": args.cap, "blocks": len(C.elements()),
        "operations": len(ops), "blocks_by_arity": {str(k): counts[k] for k in sorted(counts)},
        "elements": [C.label(b) for b in C.elements()],
    })
    return 0


def cmd_repiso(args) -> int:
    alg = parse_algebra(args.algebra)
    B = _block_algebra(args, alg)
    rep = rep_iso_check(B)
    print(f"{B.name}: {'isomorphism confirmed' if rep.ok else 'mismatches found'}, "
          f"{rep.checks.get('mismatch_total', 0)} mismatches")
    for m in rep.mismatches:
        print(f"  {m}")
    _emit(args, rep.to_dict())
    return 0 if rep.ok else 1


def cmd_independence(args) -> int:
    a1, a2 = parse_algebra(args.first), parse_algebra(args.second)
    res = independence_search(a1, a2, args.depth)
    print(res.describe())
    _emit(args, {"first": a1.name, "second": a2.name, "depth": args.depth,
                 "witness": None if res.witness is None else str(res.witness),
                 "witness_depth": res.depth, "saturated": res.saturated})
    return 0


def cmd_minimal(args) -> int:
    alg = parse_algebra(args.algebra)
    if args.other:
        other = parse_algebra(args.other)
        r = product_minimality_check(alg, other, args.depth, args.cap)
        d = r.to_dict()
        print(f"independence: {d['independence']}; product: {d['minimal']}; "
              f"agree: {d['agree']}")
        _emit(args, d)
        return 1 if r.agree is False else 0
    B = _block_algebra(args, alg)
    v = is_minimal_bounded(B, args.depth)
    print(f"{B.name}: {v.verdict} ({v.reached} of {v.total} elements reached)")
    _emit(args, {"algebra": B.name, "depth": args.depth, "verdict": v.verdict,
                 "reached": v.reached, "total": v.total, "missing": v.missing})
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cloneops", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def cmd(name, fn, help_, cap=None, out=True):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(func=fn)
        if out:
            sp.add_argument("--out", help="write the JSON report here")
        if cap is not None:
            sp.add_argument("--cap", type=_positive, required=cap == "required",
                            default=None if cap == "optional" else cap,
                            help="arity cap of the clone section")
        return sp

    sp = cmd("close", cmd_close, "list the clone section generated by the operations", "required")
    sp.add_argument("algebra")
    sp.add_argument("--generators", help="comma-separated generator names (default: all)")

    sp = cmd("blocks", cmd_blocks, "group the basic operations by similarity")
    sp.add_argument("algebra")

    sp = cmd("axioms", cmd_axioms, "check the clone-algebra axioms on a block algebra", "required")
    sp.add_argument("algebra")
    sp.add_argument("--max-n", type=_natural, default=3)
    sp.add_argument("--max-arity", type=_natural, help="quantify over blocks of this arity or less")
    sp.add_argument("--sampled", type=_positive, help="sample this many instances per identity")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--full", action="store_true", help="use the full clone section")

    sp = cmd("dim", cmd_dim, "dimension of an element of a block algebra", "required")
    sp.add_argument("algebra")
    sp.add_argument("--element", required=True, help="term, block label (2:0001) or e<i>")
    sp.add_argument("--full", action="store_true")

    for name, fn, hlp in (("central", cmd_central, "n-central elements"),
                          ("decompose", cmd_decompose, "direct decomposition by a central element")):
        sp = cmd(name, fn, hlp, "optional")
        sp.add_argument("algebra")
        sp.add_argument("--n", type=_positive, required=True)
        sp.add_argument("--element", required=name == "decompose")
        sp.add_argument("--full", action="store_true")
        sp.add_argument("--method", choices=("auto", "identities", "congruences"),
                        default="auto")

    sp = cmd("congruences", cmd_congruences, "congruence lattice of a Cl(V) section")
    sp.add_argument("algebra")
    sp.add_argument("--section", type=_positive, default=2, help="number of variables (cap)")
    sp.add_argument("--pure", action="store_true", help="q-translations only")
    sp.add_argument("--direct", action="store_true", help="congruences of the algebra itself")
    sp.add_argument("--limit", type=_positive, default=40)
    sp.add_argument("--dot", help="write the lattice as DOT here")

    sp = cmd("derive", cmd_derive, "does s = t hold in the variety of the algebra?")
    sp.add_argument("algebra")
    sp.add_argument("lhs")
    sp.add_argument("rhs")
    sp.add_argument("--k", type=_positive)

    sp = cmd("clv", cmd_clv, "summary of the Cl(Var(A)) block algebra section", "required")
    sp.add_argument("algebra")

    sp = cmd("repiso", cmd_repiso, "check the representation isomorphism", "required")
    sp.add_argument("algebra")
    sp.add_argument("--full", action="store_true")

    sp = cmd("independence", cmd_independence, "search a term t with A1 |= t=v1, A2 |= t=v2")
    sp.add_argument("first")
    sp.add_argument("second")
    sp.add_argument("--depth", type=_positive, default=2)

    sp = cmd("minimal", cmd_minimal, "bounded minimality of a block algebra or a product", 2)
    sp.add_argument("algebra")
    sp.add_argument("other", nargs="?")
    sp.add_argument("--depth", type=_positive, default=3)
    sp.add_argument("--full", action="store_true")
    return p


def _natural(text) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def _positive(text) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (AlgebraFileError, TermSyntaxError, OperationError, CapError, Undecided,
            SizeGuardExceeded, SectionNotClosed, UsageError, ValueError) as exc:
        print(f"cloneops: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
