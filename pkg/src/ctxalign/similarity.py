"""Descriptor similarity scoring and log-weighted aggregation.

A concept's similarity is a pooled weighted mean over matched descriptor
pairs, each pair weighted by ``log(1 + src)`` where ``src`` is the number
of corpus sources backing the descriptor::

    S = sum(s_k * log(1 + src_k)) / sum(log(1 + src_k))

Essential and contextual pairs enter the same sums.  The relative gain of
the combined score over the essential-only baseline is
``(S_combined - S_essential) / S_essential``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

from .errors import DomainError, UndefinedImprovementError, UndefinedMetricError, ValidationError
from .model import Descriptor, Kind
from .text import normalize_label

__all__ = [
    "MatchedPair",
    "OverrideTable",
    "aggregate_similarity",
    "edit_distance",
    "improvement",
    "lexical_similarity",
    "log_weight",
    "normalize_label",
    "resolve_similarity",
    "token_jaccard",
]

_TOKEN = re.compile(r"\w+")

Scorer = Callable[[Descriptor, Descriptor], float]


def _check_score(value: float, what: str = "similarity") -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{what} must be a number, got {value!r}")
    value = float(value)
    if not 0.0 <= value <= 1.0:  # also rejects NaN
        raise ValidationError(f"{what} {value!r} outside [0, 1]")
    return value


def edit_distance(a: str, b: str) -> int:
    """Levenshtein distance (unit insert/delete/substitute costs)."""
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def token_jaccard(a: str, b: str) -> float:
    ta, tb = set(_TOKEN.findall(a)), set(_TOKEN.findall(b))
    if not ta and not tb:
        return 0.0
    return len(ta & tb) / len(ta | tb)


def lexical_similarity(a: str, b: str) -> float:
    """Mean of token Jaccard and normalized edit similarity, on normalized text.

    Returns exactly 1.0 whenever the normalized inputs are equal.
    """
    a, b = normalize_label(a), normalize_label(b)
    if a == b:
        return 1.0
    longest = max(len(a), len(b))
    edit = 1.0 - edit_distance(a, b) / longest
    return min(1.0, max(0.0, 0.5 * token_jaccard(a, b) + 0.5 * edit))


class OverrideTable(Mapping[tuple[str, str], float]):
    """Expert similarity scores keyed by ``(source id, target id)``.

    Lookups are directional.  Scores must already be averaged across
    experts and lie in ``[0, 1]``.
    """

    def __init__(self, scores: Mapping[tuple[str, str], float] | Iterable[tuple[tuple[str, str], float]] = ()):
        items = scores.items() if isinstance(scores, Mapping) else scores
        table: dict[tuple[str, str], float] = {}
        for key, value in items:
            if key in table:
                raise ValidationError(f"duplicate override key {key!r}")
            table[key] = _check_score(value, f"override score for {key!r}")
        self._table = table

    def __getitem__(self, key: tuple[str, str]) -> float:
        return self._table[key]

    def __iter__(self):
        return iter(sorted(self._table))

    def __len__(self) -> int:
        return len(self._table)

    def __repr__(self) -> str:
        return f"OverrideTable({dict(sorted(self._table.items()))!r})"


def resolve_similarity(
    source: Descriptor,
    target: Descriptor,
    overrides: Mapping[tuple[str, str], float] | None = None,
    fallback: Callable[[str, str], float] = lexical_similarity,
) -> float:
    """Expert override for the pair if one exists, else ``fallback`` on the labels."""
    if overrides is not None:
        score = overrides.get((source.id, target.id))
        if score is not None:
            return score
    return fallback(source.label, target.label)


def make_scorer(overrides: Mapping[tuple[str, str], float] | None = None) -> Scorer:
    def scorer(source: Descriptor, target: Descriptor) -> float:
        return resolve_similarity(source, target, overrides)

    return scorer


@dataclass(frozen=True)
class MatchedPair:
    source: str
    target: str | None
    kind: Kind
    s: float
    src: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "s", _check_score(self.s))
        if self.target is None and self.s != 0.0:
            raise ValidationError(f"unmatched pair {self.source!r} must have s = 0, got {self.s}")
        if not (isinstance(self.src, (int, float)) and self.src >= 0) or isinstance(self.src, bool):
            raise ValidationError(f"pair {self.source!r}: source weight basis must be >= 0, got {self.src!r}")


def log_weight(src: float) -> float:
    """Weight of a descriptor backed by ``src`` sources: natural ``log(1 + src)``."""
    return math.log1p(src)


def aggregate_similarity(
    pairs: Sequence[MatchedPair],
    weight: Callable[[float], float] = log_weight,
) -> float:
    """Log-source-weighted mean of pair similarities.

    Sums are accumulated with :func:`math.fsum` in canonical pair order,
    so the result does not depend on how ``pairs`` was assembled.  The
    result is clamped into ``[min s, max s]`` over positively weighted
    pairs to absorb the final division's rounding.

    Raises :class:`UndefinedMetricError` when ``pairs`` is empty or every
    weight is zero.
    """
    if not pairs:
        raise UndefinedMetricError("no descriptor pairs to aggregate")
    ordered = sorted(pairs, key=lambda p: (p.kind.value, p.source, p.target or ""))
    weights = [weight(p.src) for p in ordered]
    den = math.fsum(weights)
    if not den > 0.0:
        raise UndefinedMetricError("every descriptor pair has zero weight (all source counts are 0)")
    num = math.fsum(p.s * w for p, w in zip(ordered, weights))
    live = [p.s for p, w in zip(ordered, weights) if w > 0.0]
    return min(max(num / den, min(live)), max(live))


def improvement(s_essential: float, s_combined: float) -> float:
    """Relative change of the combined similarity over the essential-only baseline."""
    if s_essential < 0 or s_combined < 0:
        raise DomainError(f"similarities must be non-negative, got {s_essential!r}, {s_combined!r}")
    if s_essential == 0:
        raise UndefinedImprovementError("baseline similarity is zero; improvement undefined")
    return (s_combined - s_essential) / s_essential
