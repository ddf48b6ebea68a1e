"""Command-line front end: ``ctxalign validate|align|query|report``.

Exit codes: 0 success, 1 validation/parse error, 2 I/O error,
3 undefined metric (only under ``--strict``), 4 bad usage.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Sequence, TextIO

from . import __version__
from .alignment import AlignmentMode, AlignmentReport, align_ontologies, default_mapping
from .errors import (
    CtxAlignError,
    DomainError,
    UndefinedImprovementError,
    UndefinedMetricError,
    ValidationError,
)
from .formats import (
    format_pct,
    load_reference_results,
    parse_mapping,
    parse_overrides,
    check_override_ids,
    read_descriptor_table,
    read_report,
    write_report,
)
from .model import Ontology, lint_descriptor_kinds
from . import relational as rel
from .similarity import make_scorer
from .text import normalize_label

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_IO = 2
EXIT_UNDEFINED = 3
EXIT_USAGE = 4

TABLE_HELP = """\
descriptor table formats:
  CSV  header 'concept,property,descriptor,type,sources' with an optional
       trailing 'value' column; type is formal|essential|contextual;
       sources is a non-negative base-10 integer.
  JSON list of row objects with the same keys, or {"name": ..., "rows": [...]}.
"""

ALIGN_HELP = TABLE_HELP + """\
overrides file (JSON): [{"left": "<source descriptor id>", "right": "<target descriptor id>", "s": 0.85}, ...]
mapping file (JSON):   [{"source": "<source entity id>", "target": "<target entity id>"}, ...]
ids are normalized labels joined by '/', e.g. 'responsibility/integrity/internal audit processes'.
"""


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(f"{self.prog}: error: {message}")


def _pos_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.RawDescriptionHelpFormatter
    parser = _Parser(prog="ctxalign", description="Ontology alignment with essential and contextual descriptors.",
                     formatter_class=fmt)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("validate", help="parse a descriptor table and print summary counts",
                       description="Parse a descriptor table, check invariants, print counts.",
                       epilog=TABLE_HELP, formatter_class=fmt)
    p.add_argument("file", help="descriptor table (.csv or .json)")
    p.add_argument("--input-format", choices=("csv", "json"), help="override format detection by extension")
    p.add_argument("--lint", action="store_true", help="warn about descriptors whose wording suggests the other kind")

    p = sub.add_parser("align", help="align two descriptor tables and write a report",
                       description="Essential-only vs combined alignment with per-concept improvement.",
                       epilog=ALIGN_HELP, formatter_class=fmt)
    p.add_argument("--source", required=True, help="source descriptor table")
    p.add_argument("--target", required=True, help="target descriptor table")
    p.add_argument("--mapping", help="entity mapping file (default: pair entities with equal normalized names)")
    p.add_argument("--overrides", help="expert similarity scores that replace lexical similarity")
    p.add_argument("--mode", choices=("essential", "combined", "both"), default="both",
                   help="which similarities to compute (default: both, needed for improvement)")
    p.add_argument("--weight-basis", choices=("source", "mean"), default="source",
                   help="source counts used as weights: source side only, or mean of both sides")
    p.add_argument("--out", required=True, help="report output path")
    p.add_argument("--format", choices=("json", "csv"), help="report format (default: from --out extension, else json)")
    p.add_argument("--strict", action="store_true",
                   help="exit 3 on undefined metrics and 1 on dangling override ids instead of warning")
    p.add_argument("--jobs", type=_pos_int, default=1, help="concept rows computed in parallel (output unchanged)")
    p.add_argument("--verbose", action="store_true", help="include per-property similarities in the JSON report")

    p = sub.add_parser("query", help="run a relational operation on parsed tables",
                       description="Projections, selections, join and difference over descriptor relations. "
                                   "Output is one tab-separated tuple per line, in canonical order.",
                       epilog=TABLE_HELP, formatter_class=fmt)
    p.add_argument("op", choices=("project-props", "project-essential", "project-contextual", "select-entities",
                                  "select-essential", "select-contextual", "join", "diff"))
    p.add_argument("--ontology", required=True, help="descriptor table")
    p.add_argument("--other", help="second table: unioned in for select-*, subtrahend for diff")
    p.add_argument("--entity", help="entity id (project-props; restricts diff of props)")
    p.add_argument("--property", help="property id (project-essential/contextual; join restricted to one property)")
    p.add_argument("--relation", choices=("props", "essential", "contextual", "descriptors"), default="props",
                   help="relation used by diff (default: props)")

    p = sub.add_parser("report", help="pretty-print a JSON report",
                       description="Print a report as a table, optionally next to the published reference values.")
    p.add_argument("--in", dest="input", required=True, help="JSON report written by 'align'")
    p.add_argument("--compare-paper", action="store_true",
                   help="show published per-concept improvements and levels with deltas")
    return parser


def _ontology(path: str, fmt: str | None = None) -> Ontology:
    return read_descriptor_table(path, fmt)


def _cmd_validate(args: argparse.Namespace, out: TextIO, err: TextIO) -> int:
    o = _ontology(args.file, args.input_format)
    c = o.counts()
    noun = "entity" if c["entities"] == 1 else "entities"
    print(f"{c['entities']} {noun}, {c['properties']} properties, "
          f"{c['essential']} essential, {c['contextual']} contextual", file=out)
    if args.lint:
        for w in lint_descriptor_kinds(o):
            print(f"lint: {w}", file=err)
    return EXIT_OK


def _fmt_s(v: float | None) -> str:
    return "-" if v is None else f"{v:.4f}"


def _cmd_align(args: argparse.Namespace, out: TextIO, err: TextIO) -> int:
    a = _ontology(args.source)
    b = _ontology(args.target)
    overrides = None
    if args.overrides:
        overrides = parse_overrides(Path(args.overrides).read_bytes())
        for w in check_override_ids(overrides, a, b, strict=args.strict):
            print(f"warning: {w}", file=err)
    mapping = parse_mapping(Path(args.mapping).read_bytes()) if args.mapping else default_mapping(a, b)
    modes = [AlignmentMode.ESSENTIAL_ONLY, AlignmentMode.COMBINED] if args.mode == "both" else [args.mode]
    report = align_ontologies(
        a, b, mapping, make_scorer(overrides), args.weight_basis, modes,
        similarity_source="expert overrides + lexical" if overrides is not None else "lexical",
        detail=args.verbose,
        workers=args.jobs,
    )
    fmt = args.format or ("csv" if args.out.lower().endswith(".csv") else "json")
    Path(args.out).write_bytes(write_report(report, fmt))
    _print_table(report, out)
    print(f"wrote {args.out}", file=out)
    problems = [f"{r.concept}: {w}" for r in report.rows for w in r.warnings] + list(report.warnings)
    for p in problems:
        print(f"warning: {p}", file=err)
    if args.strict and problems:
        return EXIT_UNDEFINED
    return EXIT_OK


def _print_table(report: AlignmentReport, out: TextIO, reference=None) -> None:
    header = ["concept", "S_essential", "S_combined", "improvement_%"]
    if reference is not None:
        header += ["published_%", "delta_pp", "published_level_%"]
    lines = [header]
    for r in report.rows:
        line = [r.concept, _fmt_s(r.s_essential), _fmt_s(r.s_combined), format_pct(r.improvement) or "-"]
        if reference is not None:
            key = normalize_label(r.concept)
            pub = {normalize_label(k): v for k, v in reference.improvements.items()}.get(key)
            lvl = {normalize_label(k): v for k, v in reference.levels.items()}.get(key)
            delta = "-"
            if pub is not None and r.improvement is not None:
                delta = f"{r.improvement * 100 - pub:+.2f}"
            line += ["-" if pub is None else f"{pub:.2f}", delta, "-" if lvl is None else f"{lvl:.2f}"]
        lines.append(line)
    widths = [max(len(row[i]) for row in lines) for i in range(len(header))]
    for row in lines:
        print("  ".join(cell.ljust(w) if i == 0 else cell.rjust(w) for i, (cell, w) in enumerate(zip(row, widths))),
              file=out)
    avg = format_pct(report.average_improvement)
    print(f"average improvement: {avg + '%' if avg else 'undefined'}", file=out)


def _cmd_report(args: argparse.Namespace, out: TextIO, err: TextIO) -> int:
    report = read_report(Path(args.input).read_bytes())
    reference = load_reference_results() if args.compare_paper else None
    _print_table(report, out, reference)
    if reference is not None:
        n = len(reference.improvements)
        rows_mean = reference.mean_of_rows_pct
        print(f"published per-concept rows ({n}): mean improvement {rows_mean:.2f}%", file=out)
        print(f"published stated average: approximately {reference.stated_average_pct:.2f}% "
              f"[not exactly recoverable from the {n} published rows, whose mean is {rows_mean:.2f}%]", file=out)
    for w in report.warnings:
        print(f"warning: {w}", file=err)
    return EXIT_OK


def _print_lines(items, out: TextIO) -> None:
    for item in sorted(items):
        if isinstance(item, tuple):
            print("\t".join(str(x) for x in item), file=out)
        else:
            print("\t".join([item.property, item.descriptor, item.value, item.kind.value, str(item.source_count)])
                  if isinstance(item, rel.DescriptorTriple)
                  else "\t".join([item.entity, item.property, item.value]), file=out)


def _relation(o: Ontology, which: str):
    if which == "props":
        return rel.property_triples(o)
    if which == "essential":
        return rel.essential_triples(o)
    if which == "contextual":
        return rel.contextual_triples(o)
    return rel.join_descriptors(rel.essential_triples(o), rel.contextual_triples(o))


def _need(args: argparse.Namespace, name: str) -> str:
    value = getattr(args, name)
    if not value:
        raise UsageError(f"ctxalign query {args.op}: --{name} is required")
    return value


def _cmd_query(args: argparse.Namespace, out: TextIO, err: TextIO) -> int:
    o = _ontology(args.ontology)
    other = _ontology(args.other) if args.other else None
    op = args.op

    def pooled(which: str):
        r = _relation(o, which)
        return r.union(_relation(other, which)) if other is not None else r

    if op == "project-props":
        result = rel.project_property_values(pooled("props"), normalize_label(_need(args, "entity")))
    elif op == "project-essential":
        result = rel.project_essential_values(pooled("essential"), normalize_label(_need(args, "property")))
    elif op == "project-contextual":
        result = rel.project_contextual_values(pooled("contextual"), normalize_label(_need(args, "property")))
    elif op == "select-entities":
        result = rel.select_matching_entities(pooled("props"))
    elif op == "select-essential":
        result = rel.select_matching_by_essential(pooled("essential"))
    elif op == "select-contextual":
        result = rel.select_matching_by_contextual(pooled("contextual"))
    elif op == "join":
        if args.property:
            result = rel.combined_description(o, normalize_label(args.property))
        else:
            result = rel.join_descriptors(rel.essential_triples(o), rel.contextual_triples(o))
    else:
        if other is None:
            raise UsageError("ctxalign query diff: --other is required")
        a, b = _relation(o, args.relation), _relation(other, args.relation)
        if args.entity:
            if args.relation != "props":
                raise UsageError("ctxalign query diff: --entity only applies to --relation props")
            e = normalize_label(args.entity)
            a, b = rel.restrict_to_entity(a, e), rel.restrict_to_entity(b, e)
        result = rel.relation_difference(a, b)
    _print_lines(result, out)
    return EXIT_OK


_COMMANDS = {"validate": _cmd_validate, "align": _cmd_align, "query": _cmd_query, "report": _cmd_report}


def main(argv: Sequence[str] | None = None, out: TextIO | None = None, err: TextIO | None = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    logging.basicConfig(level=logging.ERROR, format="%(levelname)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        return _COMMANDS[args.command](args, out, err)
    except UsageError as exc:
        print(exc, file=err)
        return EXIT_USAGE
    except (UndefinedMetricError, UndefinedImprovementError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_UNDEFINED
    except (ValidationError, DomainError, CtxAlignError, LookupError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_IO
