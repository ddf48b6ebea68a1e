"""Immutable entity -> property -> descriptor hierarchy.

An :class:`Ontology` owns entities (top-level concepts such as
*Responsibility*), each entity owns properties, and each property owns
descriptors typed either essential or contextual.  Every node carries a
canonical id built from normalized labels, and children are always kept
in canonical-id order so downstream matching is deterministic.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

from .errors import UnknownIdError, ValidationError
from .text import make_id, normalize_label


class Kind(str, enum.Enum):
    ESSENTIAL = "essential"
    CONTEXTUAL = "contextual"

    @classmethod
    def parse(cls, token: str) -> "Kind":
        """Accept ``essential``/``formal``/``contextual`` in any case."""
        key = normalize_label(token)
        if key in ("essential", "formal"):
            return cls.ESSENTIAL
        if key == "contextual":
            return cls.CONTEXTUAL
        raise ValueError(f"unknown descriptor type {token!r}")


@dataclass(frozen=True)
class Descriptor:
    id: str
    label: str
    kind: Kind
    source_count: int = 0

    def __post_init__(self) -> None:
        if not normalize_label(self.label):
            raise ValidationError(f"descriptor {self.id!r}: empty label")
        if not isinstance(self.kind, Kind):
            raise ValidationError(f"descriptor {self.id!r}: kind must be a Kind, got {self.kind!r}")
        if isinstance(self.source_count, bool) or not isinstance(self.source_count, int):
            raise ValidationError(f"descriptor {self.id!r}: source count must be an integer")
        if self.source_count < 0:
            raise ValidationError(f"descriptor {self.id!r}: negative source count {self.source_count}")


@dataclass(frozen=True)
class Property:
    id: str
    name: str
    value: str
    descriptors: tuple[Descriptor, ...] = ()

    def __post_init__(self) -> None:
        if not normalize_label(self.name):
            raise ValidationError(f"property {self.id!r}: empty name")
        if not normalize_label(self.value):
            raise ValidationError(f"property {self.id!r}: empty value")
        _check_unique((d.id for d in self.descriptors), f"descriptor in property {self.id!r}")
        object.__setattr__(self, "descriptors", tuple(sorted(self.descriptors, key=lambda d: d.id)))


@dataclass(frozen=True)
class Entity:
    id: str
    name: str
    properties: tuple[Property, ...] = ()

    def __post_init__(self) -> None:
        if not normalize_label(self.name):
            raise ValidationError(f"entity {self.id!r}: empty name")
        _check_unique((p.id for p in self.properties), f"property in entity {self.id!r}")
        object.__setattr__(self, "properties", tuple(sorted(self.properties, key=lambda p: p.id)))

    def descriptors(self, kind: Kind | None = None) -> tuple[Descriptor, ...]:
        """All descriptors under this entity, in canonical-id order."""
        found = [d for p in self.properties for d in p.descriptors if kind is None or d.kind is kind]
        return tuple(sorted(found, key=lambda d: d.id))

    def property(self, property_id: str) -> Property:
        for p in self.properties:
            if p.id == property_id:
                return p
        raise UnknownIdError(f"unknown property id {property_id!r} in entity {self.id!r}")


@dataclass(frozen=True)
class Ontology:
    name: str
    entities: tuple[Entity, ...] = ()
    _index: Mapping[str, Entity] = field(default=None, init=False, repr=False, compare=False)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        _check_unique((e.id for e in self.entities), "entity")
        _check_unique((p.id for e in self.entities for p in e.properties), "property")
        entities = tuple(sorted(self.entities, key=lambda e: e.id))
        object.__setattr__(self, "entities", entities)
        object.__setattr__(self, "_index", {e.id: e for e in entities})

    def entity(self, entity_id: str) -> Entity:
        try:
            return self._index[entity_id]
        except KeyError:
            raise UnknownIdError(f"unknown entity id {entity_id!r}") from None

    def __contains__(self, entity_id: object) -> bool:
        return entity_id in self._index

    def properties(self) -> tuple[Property, ...]:
        return tuple(p for e in self.entities for p in e.properties)

    def property(self, property_id: str) -> Property:
        for p in self.properties():
            if p.id == property_id:
                return p
        raise UnknownIdError(f"unknown property id {property_id!r}")

    def descriptors(self, kind: Kind | None = None) -> tuple[Descriptor, ...]:
        return tuple(d for e in self.entities for d in e.descriptors(kind))

    def counts(self) -> dict[str, int]:
        return {
            "entities": len(self.entities),
            "properties": len(self.properties()),
            "essential": len(self.descriptors(Kind.ESSENTIAL)),
            "contextual": len(self.descriptors(Kind.CONTEXTUAL)),
        }


def _check_unique(ids: Iterable[str], what: str) -> None:
    seen: set[str] = set()
    for i in ids:
        if i in seen:
            raise ValidationError(f"duplicate {what} id {i!r}")
        seen.add(i)


def build_ontology(name: str, raw_entities: Iterable[Mapping[str, Any]]) -> Ontology:
    """Validate raw nested records and return an :class:`Ontology`.

    Each raw entity is ``{"name": str, "properties": [...]}``; each raw
    property is ``{"name": str, "value": str | None, "descriptors": [...]}``;
    each raw descriptor is ``{"label": str, "kind": Kind | str, "sources": int}``.
    ``kind`` strings accept ``formal`` as a synonym of ``essential``.  A
    missing or blank property value defaults to the normalized property name.

    Raises :class:`ValidationError` on empty labels, negative source counts
    and ids that collide after normalization.
    """
    entities = []
    for raw_entity in raw_entities:
        ename = _label(raw_entity.get("name"), "entity")
        eid = make_id(ename)
        props = []
        for raw_prop in raw_entity.get("properties", ()):
            pname = _label(raw_prop.get("name"), f"property of entity {eid!r}")
            pid = make_id(ename, pname)
            value = raw_prop.get("value")
            if value is None or not normalize_label(value):
                value = normalize_label(pname)
            descs = []
            for raw_desc in raw_prop.get("descriptors", ()):
                label = _label(raw_desc.get("label"), f"descriptor of property {pid!r}")
                kind = raw_desc.get("kind")
                if not isinstance(kind, Kind):
                    try:
                        kind = Kind.parse(str(kind))
                    except ValueError as exc:
                        raise ValidationError(f"descriptor {label!r}: {exc}") from None
                descs.append(Descriptor(make_id(ename, pname, label), label, kind, raw_desc.get("sources", 0)))
            props.append(Property(pid, pname, value, tuple(descs)))
        entities.append(Entity(eid, ename, tuple(props)))
    return Ontology(name, tuple(entities))


def _label(value: Any, what: str) -> str:
    if not isinstance(value, str) or not normalize_label(value):
        raise ValidationError(f"empty label for {what}")
    return value


def to_raw(ontology: Ontology) -> list[dict[str, Any]]:
    """Inverse of :func:`build_ontology` (up to canonical ordering)."""
    return [
        {
            "name": e.name,
            "properties": [
                {
                    "name": p.name,
                    "value": p.value,
                    "descriptors": [
                        {"label": d.label, "kind": d.kind.value, "sources": d.source_count}
                        for d in p.descriptors
                    ],
                }
                for p in e.properties
            ],
        }
        for e in ontology.entities
    ]


def partition_descriptors(entity: Entity) -> tuple[tuple[Descriptor, ...], tuple[Descriptor, ...]]:
    """Split an entity's descriptors into ``(essential, contextual)``, each in id order."""
    return entity.descriptors(Kind.ESSENTIAL), entity.descriptors(Kind.CONTEXTUAL)


# Keyword cues derived from the curator checklist for the two descriptor
# kinds. Used only to flag suspicious typing for a human; never to classify.
_ESSENTIAL_CUES = frozenset(
    "legal legislation law contract contracts audit audits documentation documented policy policies "
    "standard standards code compliance procedure procedures process processes mechanism mechanisms "
    "regulation regulating regulatory framework frameworks committee committees checks mandatory".split()
)
_CONTEXTUAL_CUES = frozenset(
    "public perception perceptions expectation expectations cultural culture social societal opinion "
    "influence trust community communities sensitivity awareness stakeholder stakeholders media "
    "norms engagement".split()
)
_WORD = re.compile(r"\w+")


def lint_descriptor_kinds(ontology: Ontology) -> list[str]:
    """Warn about descriptors whose wording only carries cues of the other kind."""
    warnings = []
    for d in ontology.descriptors():
        words = set(_WORD.findall(normalize_label(d.label)))
        ess, ctx = bool(words & _ESSENTIAL_CUES), bool(words & _CONTEXTUAL_CUES)
        if d.kind is Kind.ESSENTIAL and ctx and not ess:
            warnings.append(f"{d.id}: typed essential but wording suggests a contextual descriptor")
        elif d.kind is Kind.CONTEXTUAL and ess and not ctx:
            warnings.append(f"{d.id}: typed contextual but wording suggests an essential descriptor")
    return warnings
