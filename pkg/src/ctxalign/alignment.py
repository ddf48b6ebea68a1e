"""Concept-level alignment of two ontologies.

For every mapped pair of concepts the engine

1. splits descriptors into essential and contextual,
2. greedily pairs source descriptors with same-kind target descriptors,
3. aggregates the essential pairs alone (baseline) and essential plus
   contextual pairs together (combined),
4. reports the relative improvement of combined over baseline.
"""

from __future__ import annotations

import enum
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from . import __version__
from .errors import UndefinedImprovementError, UndefinedMetricError, UnknownIdError, ValidationError
from .model import Entity, Kind, Ontology
from .similarity import MatchedPair, Scorer, aggregate_similarity, improvement, make_scorer
from .text import normalize_label

log = logging.getLogger(__name__)

IMPROVEMENT_AGGREGATION = "arithmetic mean of per-concept improvements"


class AlignmentMode(str, enum.Enum):
    ESSENTIAL_ONLY = "essential"
    COMBINED = "combined"


class WeightBasis(str, enum.Enum):
    SOURCE = "source"
    MEAN = "mean"


class EntityMapping(Mapping[str, str]):
    """Injective map from source entity ids to target entity ids."""

    def __init__(self, pairs: Mapping[str, str] | Iterable[tuple[str, str]] = ()):
        items = pairs.items() if isinstance(pairs, Mapping) else pairs
        forward: dict[str, str] = {}
        targets: set[str] = set()
        for src, tgt in items:
            if src in forward:
                raise ValidationError(f"source entity {src!r} mapped twice")
            if tgt in targets:
                raise ValidationError(f"target entity {tgt!r} mapped twice")
            forward[src] = tgt
            targets.add(tgt)
        self._forward = forward

    def __getitem__(self, key: str) -> str:
        return self._forward[key]

    def __iter__(self):
        return iter(sorted(self._forward))

    def __len__(self) -> int:
        return len(self._forward)

    def __repr__(self) -> str:
        return f"EntityMapping({dict(sorted(self._forward.items()))!r})"


def default_mapping(a: Ontology, b: Ontology) -> EntityMapping:
    """Pair entities whose normalized names coincide."""
    by_name = {normalize_label(e.name): e.id for e in b.entities}
    return EntityMapping(
        (e.id, by_name[normalize_label(e.name)]) for e in a.entities if normalize_label(e.name) in by_name
    )


def match_descriptors(
    source: Entity,
    target: Entity,
    kind: Kind,
    scorer: Scorer,
    weight_basis: WeightBasis | str = WeightBasis.SOURCE,
) -> list[MatchedPair]:
    """Greedy one-to-one pairing of ``kind`` descriptors.

    Source descriptors are visited in canonical-id order; each takes the
    best-scoring target still free (ties go to the smallest target id).
    Source descriptors left over once targets run out are emitted with no
    target and ``s = 0``.  Target descriptors left over are ignored.
    """
    basis = WeightBasis(weight_basis)
    free = list(target.descriptors(kind))
    pairs = []
    for d in source.descriptors(kind):
        if not free:
            pairs.append(MatchedPair(d.id, None, kind, 0.0, d.source_count))
            continue
        best_i, best_s = 0, -1.0
        for i, t in enumerate(free):
            s = scorer(d, t)
            if s > best_s:  # strict: earlier (smaller id) wins ties
                best_i, best_s = i, s
        t = free.pop(best_i)
        src = d.source_count if basis is WeightBasis.SOURCE else (d.source_count + t.source_count) / 2
        pairs.append(MatchedPair(d.id, t.id, kind, best_s, src))
    return pairs


def align_concept(
    source: Entity,
    target: Entity,
    mode: AlignmentMode | str,
    scorer: Scorer,
    weight_basis: WeightBasis | str = WeightBasis.SOURCE,
) -> float:
    """Concept similarity in the given mode.

    Raises :class:`UndefinedMetricError` when there is nothing weighted to
    aggregate.
    """
    pairs = match_descriptors(source, target, Kind.ESSENTIAL, scorer, weight_basis)
    if AlignmentMode(mode) is AlignmentMode.COMBINED:
        pairs += match_descriptors(source, target, Kind.CONTEXTUAL, scorer, weight_basis)
    return aggregate_similarity(pairs)


@dataclass(frozen=True)
class PropertyScore:
    property: str
    s_essential: float | None
    s_combined: float | None


@dataclass(frozen=True)
class ConceptAlignmentRow:
    source: str
    target: str
    concept: str
    s_essential: float | None
    s_combined: float | None
    improvement: float | None
    pairs_essential: int = 0
    pairs_contextual: int = 0
    unmatched_essential: int = 0
    unmatched_contextual: int = 0
    warnings: tuple[str, ...] = ()
    properties: tuple[PropertyScore, ...] = ()

    @property
    def undefined(self) -> bool:
        return bool(self.warnings)


@dataclass(frozen=True)
class AlignmentReport:
    rows: tuple[ConceptAlignmentRow, ...]
    average_improvement: float | None
    metadata: Mapping[str, object] = field(default_factory=dict)
    warnings: tuple[str, ...] = ()

    @property
    def undefined_rows(self) -> tuple[ConceptAlignmentRow, ...]:
        return tuple(r for r in self.rows if r.undefined)


def mean_improvement(values: Iterable[float | None]) -> float | None:
    """Arithmetic mean of the defined improvements, ``None`` if there are none."""
    defined = [v for v in values if v is not None]
    if not defined:
        return None
    return math.fsum(defined) / len(defined)


def build_report(
    rows: Iterable[ConceptAlignmentRow],
    metadata: Mapping[str, object] | None = None,
) -> AlignmentReport:
    """Assemble a report in canonical row order and compute its summary."""
    rows = tuple(sorted(rows, key=lambda r: (r.source, r.target)))
    meta = dict(metadata or {})
    modes = meta.get("modes", [m.value for m in AlignmentMode])
    wants_imp = AlignmentMode.ESSENTIAL_ONLY.value in modes and AlignmentMode.COMBINED.value in modes
    avg = mean_improvement(r.improvement for r in rows) if wants_imp else None
    warnings = []
    if wants_imp and rows and avg is None:
        warnings.append("no concept has a defined improvement; average omitted")
    return AlignmentReport(rows, avg, meta, tuple(warnings))


def _safe(pairs: list[MatchedPair], what: str, warnings: list[str] | None = None) -> float | None:
    try:
        return aggregate_similarity(pairs)
    except UndefinedMetricError as exc:
        if warnings is not None:
            warnings.append(f"{what} undefined: {exc}")
        return None


def _property_scores(source: Entity, ess: list[MatchedPair], ctx: list[MatchedPair]) -> tuple[PropertyScore, ...]:
    out = []
    for p in source.properties:
        ids = {d.id for d in p.descriptors}
        pe = [x for x in ess if x.source in ids]
        pc = [x for x in ctx if x.source in ids]
        out.append(PropertyScore(p.id, _safe(pe, p.id), _safe(pe + pc, p.id)))
    return tuple(out)


def _align_row(
    source: Entity,
    target: Entity,
    modes: frozenset[AlignmentMode],
    scorer: Scorer,
    weight_basis: WeightBasis,
    detail: bool,
) -> ConceptAlignmentRow:
    ess = match_descriptors(source, target, Kind.ESSENTIAL, scorer, weight_basis)
    ctx = match_descriptors(source, target, Kind.CONTEXTUAL, scorer, weight_basis)
    warnings: list[str] = []
    s_f = _safe(ess, "essential-only similarity", warnings) if AlignmentMode.ESSENTIAL_ONLY in modes else None
    s_fc = _safe(ess + ctx, "combined similarity", warnings) if AlignmentMode.COMBINED in modes else None
    imp = None
    if s_f is not None and s_fc is not None:
        try:
            imp = improvement(s_f, s_fc)
        except UndefinedImprovementError as exc:
            warnings.append(f"improvement undefined: {exc}")
    return ConceptAlignmentRow(
        source=source.id,
        target=target.id,
        concept=source.name,
        s_essential=s_f,
        s_combined=s_fc,
        improvement=imp,
        pairs_essential=sum(p.target is not None for p in ess),
        pairs_contextual=sum(p.target is not None for p in ctx),
        unmatched_essential=sum(p.target is None for p in ess),
        unmatched_contextual=sum(p.target is None for p in ctx),
        warnings=tuple(warnings),
        properties=_property_scores(source, ess, ctx) if detail else (),
    )


def align_ontologies(
    a: Ontology,
    b: Ontology,
    mapping: Mapping[str, str] | None = None,
    scorer: Scorer | None = None,
    weight_basis: WeightBasis | str = WeightBasis.SOURCE,
    modes: Iterable[AlignmentMode | str] = (AlignmentMode.ESSENTIAL_ONLY, AlignmentMode.COMBINED),
    *,
    similarity_source: str = "lexical",
    detail: bool = False,
    workers: int = 1,
) -> AlignmentReport:
    """Align every mapped concept pair and summarize the improvements.

    ``mapping`` defaults to :func:`default_mapping`.  Rows are computed
    concurrently when ``workers > 1``; the report is identical either way.
    Concepts whose metrics are undefined are kept with ``None`` values and
    a warning, and are excluded from the average.
    """
    if mapping is None:
        mapping = default_mapping(a, b)
    scorer = scorer or make_scorer()
    basis = WeightBasis(weight_basis)
    mode_set = frozenset(AlignmentMode(m) for m in modes)
    if not mode_set:
        raise ValidationError("at least one alignment mode is required")
    jobs = []
    for src_id in sorted(mapping):
        tgt_id = mapping[src_id]
        try:
            jobs.append((a.entity(src_id), b.entity(tgt_id)))
        except UnknownIdError as exc:
            raise UnknownIdError(f"mapping references {exc}") from None

    def run(job: tuple[Entity, Entity]) -> ConceptAlignmentRow:
        return _align_row(job[0], job[1], mode_set, scorer, basis, detail)

    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run, jobs))
    else:
        rows = [run(j) for j in jobs]
    for r in rows:
        for w in r.warnings:
            log.warning("%s -> %s: %s", r.source, r.target, w)

    metadata = {
        "modes": sorted(m.value for m in mode_set),
        "similarity_source": similarity_source,
        "weight_basis": basis.value,
        "log_base": "e",
        "improvement_aggregation": IMPROVEMENT_AGGREGATION,
        "source_ontology": a.name,
        "target_ontology": b.name,
        "tool_version": __version__,
    }
    return build_report(rows, metadata)


def summarize_improvements(improvements: Iterable[float | None]) -> dict[str, float | int | None]:
    """Count, mean, min and max of the defined relative improvements."""
    defined = [v for v in improvements if v is not None]
    return {
        "count": len(defined),
        "mean": mean_improvement(defined),
        "min": min(defined) if defined else None,
        "max": max(defined) if defined else None,
    }

