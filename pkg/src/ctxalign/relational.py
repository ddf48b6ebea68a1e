"""Set-semantics relational algebra over property and descriptor triples.

Three relations are derived from an :class:`~ctxalign.model.Ontology`:

* the property relation, ``(entity, property, value)``;
* the essential-descriptor relation, ``(property, descriptor, value)``;
* the contextual-descriptor relation, same shape, contextual kind.

Values are stored in canonical (normalized) form, so tuple equality is
exactly the canonical text equality used by the selections.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Generic, Iterable, Iterator, TypeVar

from .errors import KindMismatchError, ValidationError
from .model import Kind, Ontology
from .text import normalize_label


@dataclass(frozen=True, order=True)
class PropertyTriple:
    entity: str
    property: str
    value: str

    def __post_init__(self) -> None:
        value = normalize_label(self.value)
        if not value:
            raise ValidationError(f"property triple {self.entity}/{self.property}: empty value")
        object.__setattr__(self, "value", value)


@dataclass(frozen=True, order=True)
class DescriptorTriple:
    property: str
    descriptor: str
    value: str
    kind: Kind
    source_count: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "value", normalize_label(self.value))


T = TypeVar("T", PropertyTriple, DescriptorTriple)


class Relation(Generic[T]):
    """Immutable finite set of triples, iterated in canonical order."""

    __slots__ = ("_tuples",)

    def __init__(self, tuples: Iterable[T] = ()):
        self._tuples: frozenset[T] = frozenset(tuples)

    def __iter__(self) -> Iterator[T]:
        return iter(sorted(self._tuples))

    def __len__(self) -> int:
        return len(self._tuples)

    def __contains__(self, item: object) -> bool:
        return item in self._tuples

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Relation):
            return self._tuples == other._tuples
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self._tuples)

    def __repr__(self) -> str:
        return f"Relation({sorted(self._tuples)!r})"

    def add(self, item: T) -> "Relation[T]":
        return Relation(self._tuples | {item})

    def union(self, other: "Relation[T]") -> "Relation[T]":
        return Relation(self._tuples | other._tuples)

    def intersection(self, other: "Relation[T]") -> "Relation[T]":
        return Relation(self._tuples & other._tuples)

    def difference(self, other: "Relation[T]") -> "Relation[T]":
        return Relation(self._tuples - other._tuples)

    def as_set(self) -> frozenset[T]:
        return self._tuples


def _descriptor_triples(o: Ontology, kind: Kind | None) -> Relation[DescriptorTriple]:
    return Relation(
        DescriptorTriple(p.id, d.id, d.label, d.kind, d.source_count)
        for p in o.properties()
        for d in p.descriptors
        if kind is None or d.kind is kind
    )


def _require_kind(rel: Relation[DescriptorTriple], kind: Kind) -> None:
    for t in rel:
        if t.kind is not kind:
            raise KindMismatchError(f"expected only {kind.value} tuples, found {t.kind.value} tuple {t.descriptor!r}")


def property_triples(o: Ontology) -> Relation[PropertyTriple]:
    """One ``(entity, property, value)`` tuple per property of every entity."""
    return Relation(PropertyTriple(e.id, p.id, p.value) for e in o.entities for p in e.properties)


def essential_triples(o: Ontology) -> Relation[DescriptorTriple]:
    return _descriptor_triples(o, Kind.ESSENTIAL)


def contextual_triples(o: Ontology) -> Relation[DescriptorTriple]:
    return _descriptor_triples(o, Kind.CONTEXTUAL)


def project_property_values(rel: Relation[PropertyTriple], entity: str) -> set[tuple[str, str]]:
    return {(t.property, t.value) for t in rel if t.entity == entity}


def project_essential_values(rel: Relation[DescriptorTriple], prop: str) -> set[tuple[str, str]]:
    _require_kind(rel, Kind.ESSENTIAL)
    return {(t.descriptor, t.value) for t in rel if t.property == prop}


def project_contextual_values(rel: Relation[DescriptorTriple], prop: str) -> set[tuple[str, str]]:
    _require_kind(rel, Kind.CONTEXTUAL)
    return {(t.descriptor, t.value) for t in rel if t.property == prop}


def join_descriptors(
    ess: Relation[DescriptorTriple], ctx: Relation[DescriptorTriple]
) -> Relation[DescriptorTriple]:
    """Outer union keyed on property.

    Properties that only carry one kind of descriptor keep their tuples;
    an inner join would drop them.
    """
    _require_kind(ess, Kind.ESSENTIAL)
    _require_kind(ctx, Kind.CONTEXTUAL)
    return ess.union(ctx)


def _matching_pairs(keyed: Iterable[tuple[str, str]]) -> set[tuple[str, str]]:
    # group owners by value, then emit each unordered pair once in id order
    owners: dict[str, set[str]] = {}
    for owner, value in keyed:
        owners.setdefault(value, set()).add(owner)
    pairs: set[tuple[str, str]] = set()
    for group in owners.values():
        pairs.update(combinations(sorted(group), 2))
    return pairs


def select_matching_entities(rel: Relation[PropertyTriple]) -> set[tuple[str, str]]:
    """Pairs of distinct entities that share at least one property value."""
    return _matching_pairs((t.entity, t.value) for t in rel)


def select_matching_by_contextual(rel: Relation[DescriptorTriple]) -> set[tuple[str, str]]:
    """Pairs of distinct properties that share a contextual-descriptor value."""
    _require_kind(rel, Kind.CONTEXTUAL)
    return _matching_pairs((t.property, t.value) for t in rel)


def select_matching_by_essential(rel: Relation[DescriptorTriple]) -> set[tuple[str, str]]:
    """Pairs of distinct properties that share an essential-descriptor value."""
    _require_kind(rel, Kind.ESSENTIAL)
    return _matching_pairs((t.property, t.value) for t in rel)


def combined_description(o: Ontology, prop: str) -> Relation[DescriptorTriple]:
    """Every descriptor triple, of either kind, attached to property ``prop``."""
    p = o.property(prop)
    return Relation(DescriptorTriple(p.id, d.id, d.label, d.kind, d.source_count) for d in p.descriptors)


def relation_difference(a: Relation[T], b: Relation[T]) -> Relation[T]:
    return a.difference(b)


def restrict_to_entity(rel: Relation[PropertyTriple], entity: str) -> Relation[PropertyTriple]:
    return Relation(t for t in rel if t.entity == entity)


def restrict_to_property(rel: Relation[DescriptorTriple], prop: str) -> Relation[DescriptorTriple]:
    return Relation(t for t in rel if t.property == prop)

