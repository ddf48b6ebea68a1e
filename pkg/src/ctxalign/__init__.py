"""Ontology alignment with essential and contextual descriptors."""

__version__ = "0.1.0"

from .alignment import (  # noqa: E402
    AlignmentMode,
    AlignmentReport,
    ConceptAlignmentRow,
    EntityMapping,
    WeightBasis,
    align_concept,
    align_ontologies,
    default_mapping,
    match_descriptors,
)
from .model import Descriptor, Entity, Kind, Ontology, Property, build_ontology, partition_descriptors  # noqa: E402
from .similarity import (  # noqa: E402
    MatchedPair,
    OverrideTable,
    aggregate_similarity,
    improvement,
    lexical_similarity,
    normalize_label,
    resolve_similarity,
)
