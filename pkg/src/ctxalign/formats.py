"""Reading and writing descriptor tables, overrides, mappings and reports.

All inputs are UTF-8 bytes.  Parse errors carry a 1-based row locator;
for CSV inputs the header is row 1, for JSON inputs rows count entries
of the top-level list.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

from .alignment import AlignmentReport, ConceptAlignmentRow, EntityMapping, PropertyScore, build_report
from .errors import ChecksumError, ParseError, ValidationError
from .model import Kind, Ontology, build_ontology
from .similarity import OverrideTable
from .text import make_id, normalize_label

SCHEMA_VERSION = 1

TABLE_COLUMNS = ("concept", "property", "descriptor", "type", "sources")
TABLE_COLUMNS_WITH_VALUE = TABLE_COLUMNS + ("value",)
REPORT_CSV_COLUMNS = ("concept", "s_essential", "s_combined", "improvement_pct")

_INT = re.compile(r"[+-]?[0-9]+")

BUNDLED_TABLE = "responsibility_table1.csv"
_CHECKSUMS = "SHA256SUMS"


def _decode(data: bytes) -> str:
    try:
        return data.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise ParseError(f"input is not valid UTF-8 ({exc.reason} at byte {exc.start})") from None


def _load_json(data: bytes) -> Any:
    try:
        return json.loads(_decode(data))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


# ---------------------------------------------------------------------------
# descriptor tables


def _parse_sources(raw: Any, row: int) -> int:
    if isinstance(raw, bool):
        raise ParseError(f"sources must be a base-10 integer, got {raw!r}", row, "sources")
    if isinstance(raw, int):
        value = raw
    elif isinstance(raw, str) and _INT.fullmatch(raw.strip()):
        value = int(raw.strip())
    else:
        raise ParseError(f"sources must be a base-10 integer, got {raw!r}", row, "sources")
    if value < 0:
        raise ParseError(f"negative source count {value}", row, "sources")
    return value


class _TableBuilder:
    """Groups flat rows into the nested records :func:`build_ontology` takes."""

    def __init__(self) -> None:
        self.entities: dict[str, dict[str, Any]] = {}
        self.seen: dict[str, int] = {}

    def add(self, row: int, cells: Mapping[str, Any]) -> None:
        concept = cells.get("concept") or ""
        prop = cells.get("property") or ""
        desc = cells.get("descriptor") or ""
        kind_raw = cells.get("type") or ""
        sources_raw = cells.get("sources")
        value = cells.get("value") or ""
        for name, cell in (("concept", concept), ("property", prop), ("descriptor", desc), ("type", kind_raw),
                           ("value", value)):
            if not isinstance(cell, str):
                raise ParseError(f"expected text, got {cell!r}", row, name)
        if not normalize_label(concept):
            raise ParseError("empty label", row, "concept")

        eid = make_id(concept)
        entity = self.entities.setdefault(eid, {"name": concept, "properties": {}})
        no_sources = sources_raw is None or (isinstance(sources_raw, str) and not sources_raw.strip())
        bare_descriptor = not normalize_label(desc) and not normalize_label(kind_raw) and no_sources
        if not normalize_label(prop):
            if normalize_label(desc) or normalize_label(kind_raw) or normalize_label(value):
                raise ParseError("empty label", row, "property")
            return

        pid = make_id(concept, prop)
        record = entity["properties"].setdefault(pid, {"name": prop, "value": None, "descriptors": [], "row": row})
        if normalize_label(value):
            if record["value"] is not None and normalize_label(record["value"]) != normalize_label(value):
                raise ParseError(
                    f"property value {value!r} conflicts with {record['value']!r} given on row {record['row']}",
                    row,
                    "value",
                )
            record["value"] = value
        if bare_descriptor:
            return

        if not normalize_label(desc):
            raise ParseError("empty label", row, "descriptor")
        try:
            kind = Kind.parse(kind_raw)
        except ValueError:
            raise ParseError(
                f"unknown descriptor type {kind_raw!r} (expected formal, essential or contextual)", row, "type"
            ) from None
        sources = _parse_sources(sources_raw, row)
        did = make_id(concept, prop, desc)
        if did in self.seen:
            raise ParseError(f"duplicate descriptor {did!r} (first given on row {self.seen[did]})", row, "descriptor")
        self.seen[did] = row
        record["descriptors"].append({"label": desc, "kind": kind, "sources": sources})

    def build(self, name: str) -> Ontology:
        raw = [
            {"name": e["name"], "properties": list(e["properties"].values())}
            for e in self.entities.values()
        ]
        try:
            return build_ontology(name, raw)
        except ValidationError as exc:
            raise ParseError(str(exc)) from None


def parse_descriptor_table(data: bytes, format: str = "csv", name: str = "ontology") -> Ontology:
    """Parse a descriptor table into a validated :class:`Ontology`.

    CSV needs the header ``concept,property,descriptor,type,sources`` with an
    optional trailing ``value`` column.  ``type`` accepts ``formal`` as a
    synonym of ``essential``.  JSON is either a list of row objects with the
    same keys or ``{"name": ..., "rows": [...]}``.

    A row with blank descriptor, type and sources declares a property with
    no descriptors; a row with only ``concept`` declares an empty entity.
    """
    builder = _TableBuilder()
    if format == "csv":
        reader = csv.reader(io.StringIO(_decode(data), newline=""), strict=True)
        try:
            header = next(reader, None)
            if header is None or tuple(h.strip() for h in header) not in (TABLE_COLUMNS, TABLE_COLUMNS_WITH_VALUE):
                raise ParseError(f"missing or malformed header; expected {','.join(TABLE_COLUMNS)}[,value]", 1)
            columns = tuple(h.strip() for h in header)
            for row, cells in enumerate(reader, start=2):
                if not cells or all(not c.strip() for c in cells):
                    continue
                if len(cells) != len(columns):
                    raise ParseError(f"expected {len(columns)} fields, found {len(cells)}", row)
                builder.add(row, dict(zip(columns, cells)))
        except csv.Error as exc:
            raise ParseError(f"malformed CSV: {exc}", reader.line_num) from None
    elif format == "json":
        doc = _load_json(data)
        if isinstance(doc, dict):
            name = doc.get("name", name)
            doc = doc.get("rows")
        if not isinstance(doc, list):
            raise ParseError("expected a list of row objects")
        for row, cells in enumerate(doc, start=1):
            if not isinstance(cells, dict):
                raise ParseError("expected an object", row)
            unknown = set(cells) - set(TABLE_COLUMNS_WITH_VALUE)
            if unknown:
                raise ParseError(f"unknown keys {sorted(unknown)}", row)
            builder.add(row, cells)
    else:
        raise ValueError(f"unsupported table format {format!r}")
    return builder.build(name)


def dump_descriptor_table(ontology: Ontology, format: str = "csv") -> bytes:
    """Serialize ``ontology`` in a form :func:`parse_descriptor_table` reads back."""
    with_value = any(normalize_label(p.value) != normalize_label(p.name) for p in ontology.properties())
    rows: list[dict[str, Any]] = []
    for e in ontology.entities:
        if not e.properties:
            rows.append({"concept": e.name, "property": "", "descriptor": "", "type": "", "sources": ""})
        for p in e.properties:
            base = {"concept": e.name, "property": p.name}
            if with_value:
                base["value"] = p.value
            if not p.descriptors:
                rows.append({**base, "descriptor": "", "type": "", "sources": ""})
            for d in p.descriptors:
                rows.append({**base, "descriptor": d.label, "type": d.kind.value, "sources": d.source_count})
    if format == "json":
        return (json.dumps({"name": ontology.name, "rows": rows}, indent=2, ensure_ascii=False) + "\n").encode()
    if format != "csv":
        raise ValueError(f"unsupported table format {format!r}")
    out = io.StringIO()
    columns = TABLE_COLUMNS_WITH_VALUE if with_value else TABLE_COLUMNS
    writer = csv.DictWriter(out, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return out.getvalue().encode()


def table_format_for(path: str | Path) -> str:
    return "json" if str(path).lower().endswith(".json") else "csv"


def read_descriptor_table(path: str | Path, format: str | None = None) -> Ontology:
    path = Path(path)
    return parse_descriptor_table(path.read_bytes(), format or table_format_for(path), name=path.stem)


def load_table1() -> Ontology:
    """The bundled Responsibility descriptor table."""
    data = resources.files("ctxalign").joinpath("data", BUNDLED_TABLE).read_bytes()
    return parse_descriptor_table(data, "csv", name="responsibility_table1")


# ---------------------------------------------------------------------------
# overrides and mappings


def _entries(data: bytes, keys: tuple[str, ...]) -> list[tuple[int, dict[str, Any]]]:
    doc = _load_json(data)
    if not isinstance(doc, list):
        raise ParseError("expected a JSON list")
    out = []
    for row, item in enumerate(doc, start=1):
        if not isinstance(item, dict):
            raise ParseError("expected an object", row)
        for k in keys:
            if k not in item:
                raise ParseError("missing key", row, k)
        for k in keys:
            if k != "s" and (not isinstance(item[k], str) or not item[k].strip()):
                raise ParseError("expected a non-empty string", row, k)
        out.append((row, item))
    return out


def parse_overrides(data: bytes) -> OverrideTable:
    """Parse ``[{"left": id, "right": id, "s": score}, ...]``.

    Scores outside ``[0, 1]`` and repeated ``(left, right)`` keys are errors.
    """
    scores: dict[tuple[str, str], float] = {}
    for row, item in _entries(data, ("left", "right", "s")):
        s = item["s"]
        if isinstance(s, bool) or not isinstance(s, (int, float)) or not 0.0 <= s <= 1.0:
            raise ParseError(f"score must be a number in [0, 1], got {s!r}", row, "s")
        key = (item["left"].strip(), item["right"].strip())
        if key in scores:
            raise ParseError(f"duplicate override for {key[0]!r} -> {key[1]!r}", row, "left")
        scores[key] = float(s)
    return OverrideTable(scores)


def check_override_ids(
    table: OverrideTable, source: Ontology, target: Ontology, strict: bool = False
) -> list[str]:
    """Return warnings for override keys naming unknown descriptors.

    With ``strict`` the first dangling id raises :class:`ValidationError`.
    """
    known_left = {d.id for d in source.descriptors()}
    known_right = {d.id for d in target.descriptors()}
    warnings = []
    for left, right in table:
        for side, ident, known in (("left", left, known_left), ("right", right, known_right)):
            if ident not in known:
                msg = f"override {side} id {ident!r} matches no descriptor"
                if strict:
                    raise ValidationError(msg)
                warnings.append(msg)
    return warnings


def parse_mapping(data: bytes) -> EntityMapping:
    """Parse ``[{"source": entity id, "target": entity id}, ...]``."""
    pairs: list[tuple[str, str]] = []
    seen_src: dict[str, int] = {}
    seen_tgt: dict[str, int] = {}
    for row, item in _entries(data, ("source", "target")):
        src, tgt = normalize_label(item["source"]), normalize_label(item["target"])
        if src in seen_src:
            raise ParseError(f"source {src!r} already mapped on row {seen_src[src]}", row, "source")
        if tgt in seen_tgt:
            raise ParseError(f"target {tgt!r} already mapped on row {seen_tgt[tgt]}", row, "target")
        seen_src[src], seen_tgt[tgt] = row, row
        pairs.append((src, tgt))
    return EntityMapping(pairs)


# ---------------------------------------------------------------------------
# reports


def format_pct(improvement: float | None) -> str:
    """Relative improvement as a percentage with two decimals (``0.0704`` -> ``"7.04"``)."""
    if improvement is None:
        return ""
    text = f"{improvement * 100:.2f}"
    return "0.00" if text == "-0.00" else text


def _row_to_json(r: ConceptAlignmentRow) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "source": r.source,
        "target": r.target,
        "concept": r.concept,
        "s_essential": r.s_essential,
        "s_combined": r.s_combined,
        "improvement": r.improvement,
        "improvement_pct": format_pct(r.improvement) or None,
        "pairs": {"essential": r.pairs_essential, "contextual": r.pairs_contextual},
        "unmatched": {"essential": r.unmatched_essential, "contextual": r.unmatched_contextual},
        "warnings": list(r.warnings),
    }
    if r.properties:
        doc["properties"] = [
            {"property": p.property, "s_essential": p.s_essential, "s_combined": p.s_combined}
            for p in r.properties
        ]
    return doc


def report_to_json(report: AlignmentReport) -> dict[str, Any]:
    defined = sum(r.improvement is not None for r in report.rows)
    return {
        "schema_version": SCHEMA_VERSION,
        "metadata": dict(report.metadata),
        "rows": [_row_to_json(r) for r in report.rows],
        "summary": {
            "rows": len(report.rows),
            "defined_improvements": defined,
            "average_improvement": report.average_improvement,
            "average_improvement_pct": format_pct(report.average_improvement) or None,
        },
        "warnings": list(report.warnings),
    }


def write_report(report: AlignmentReport, format: str = "json") -> bytes:
    """Serialize a report.

    JSON holds the full report with metadata; CSV holds one line per concept
    plus a final ``average`` line.  Improvements are percentages with two
    decimals; undefined values are empty (CSV) or ``null`` (JSON).
    """
    if format == "json":
        text = json.dumps(report_to_json(report), indent=2, sort_keys=True, ensure_ascii=False, allow_nan=False)
        return (text + "\n").encode()
    if format != "csv":
        raise ValueError(f"unsupported report format {format!r}")
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(REPORT_CSV_COLUMNS)
    for r in report.rows:
        writer.writerow([
            r.concept,
            "" if r.s_essential is None else f"{r.s_essential:.6f}",
            "" if r.s_combined is None else f"{r.s_combined:.6f}",
            format_pct(r.improvement),
        ])
    writer.writerow(["average", "", "", format_pct(report.average_improvement)])
    return out.getvalue().encode()


def _opt_float(v: Any, row: int, fld: str) -> float | None:
    if v is None:
        return None
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ParseError(f"expected a number or null, got {v!r}", row, fld)
    return float(v)


def read_report(data: bytes) -> AlignmentReport:
    """Inverse of ``write_report(..., "json")``."""
    doc = _load_json(data)
    if not isinstance(doc, dict) or doc.get("schema_version") != SCHEMA_VERSION:
        raise ParseError(f"not a report document with schema_version {SCHEMA_VERSION}")
    rows = []
    try:
        for i, r in enumerate(doc["rows"], start=1):
            props = tuple(
                PropertyScore(p["property"], _opt_float(p["s_essential"], i, "properties"),
                              _opt_float(p["s_combined"], i, "properties"))
                for p in r.get("properties", ())
            )
            rows.append(ConceptAlignmentRow(
                source=r["source"],
                target=r["target"],
                concept=r["concept"],
                s_essential=_opt_float(r["s_essential"], i, "s_essential"),
                s_combined=_opt_float(r["s_combined"], i, "s_combined"),
                improvement=_opt_float(r["improvement"], i, "improvement"),
                pairs_essential=r["pairs"]["essential"],
                pairs_contextual=r["pairs"]["contextual"],
                unmatched_essential=r["unmatched"]["essential"],
                unmatched_contextual=r["unmatched"]["contextual"],
                warnings=tuple(r["warnings"]),
                properties=props,
            ))
        report = build_report(rows, doc["metadata"])
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed report document: missing or invalid {exc}") from None
    stored = doc.get("summary", {}).get("average_improvement")
    if stored != report.average_improvement:
        raise ParseError(f"stored average {stored!r} disagrees with rows ({report.average_improvement!r})")
    return report


def report_from_improvements(improvements: Mapping[str, float], baseline: float = 0.5) -> AlignmentReport:
    """Report whose rows have the given percentage improvements.

    Each row pins ``s_essential = baseline`` and
    ``s_combined = baseline * (1 + pct / 100)``.  Useful to summarize
    externally reported per-concept gains with the same machinery.
    """
    rows = []
    for concept, pct in improvements.items():
        s_fc = baseline * (1 + pct / 100)
        cid = make_id(concept)
        rows.append(ConceptAlignmentRow(
            cid, cid, concept, baseline, s_fc, (s_fc - baseline) / baseline
        ))
    return build_report(rows, {"modes": ["combined", "essential"], "similarity_source": "pinned"})


# ---------------------------------------------------------------------------
# bundled reference values


@dataclass(frozen=True)
class ReferenceResults:
    improvements: Mapping[str, float]
    levels: Mapping[str, float]
    stated_average_pct: float
    provenance: Mapping[tuple[str, str], str]

    @property
    def mean_of_rows_pct(self) -> float:
        return sum(self.improvements.values()) / len(self.improvements)


def _verify(data_dir: Path) -> dict[str, bytes]:
    manifest = data_dir / _CHECKSUMS
    blobs = {}
    for line in manifest.read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        digest, fname = line.split(maxsplit=1)
        blob = (data_dir / fname.strip()).read_bytes()
        if hashlib.sha256(blob).hexdigest() != digest:
            raise ChecksumError(f"{fname.strip()}: checksum mismatch, bundled data corrupted")
        blobs[fname.strip()] = blob
    return blobs


def _read_table(blob: bytes, value_col: str, table: str, provenance: dict) -> dict[str, float]:
    out = {}
    for row in csv.DictReader(io.StringIO(blob.decode("utf-8"), newline="")):
        out[row["concept"]] = float(row[value_col])
        provenance[(table, row["concept"])] = row["provenance"]
    return out


def load_reference_results(data_dir: str | Path | None = None) -> ReferenceResults:
    """Load the published per-concept improvements and indicator levels.

    Every file is checked against ``SHA256SUMS``; a mismatch raises
    :class:`ChecksumError` and a missing file raises ``FileNotFoundError``.
    """
    base = Path(data_dir) if data_dir is not None else Path(str(resources.files("ctxalign").joinpath("data")))
    blobs = _verify(base)
    for needed in ("reference_improvements.csv", "reference_levels.csv", "reference_summary.csv"):
        if needed not in blobs:
            raise FileNotFoundError(f"{needed} missing from checksum manifest in {base}")
    provenance: dict[tuple[str, str], str] = {}
    improvements = _read_table(blobs["reference_improvements.csv"], "improvement_pct", "improvements", provenance)
    levels = _read_table(blobs["reference_levels.csv"], "level_pct", "levels", provenance)
    summary = {
        row["key"]: row
        for row in csv.DictReader(io.StringIO(blobs["reference_summary.csv"].decode("utf-8"), newline=""))
    }
    stated = summary["stated_average_improvement_pct"]
    provenance[("summary", "stated_average_improvement_pct")] = stated["provenance"]
    return ReferenceResults(improvements, levels, float(stated["value"]), provenance)

