"""Label normalization and canonical id construction."""

from __future__ import annotations

import re
import unicodedata

_WS = re.compile(r"\s+")

ID_SEP = "/"


def normalize_label(text: str) -> str:
    """Trim, collapse whitespace, case-fold and NFC-compose ``text``.

    >>> normalize_label("  Legal   Liability ")
    'legal liability'
    """
    text = unicodedata.normalize("NFC", text)
    text = _WS.sub(" ", text).strip()
    # casefold may decompose (e.g. U+0130), so compose again afterwards
    return unicodedata.normalize("NFC", text.casefold())


def _escape(component: str) -> str:
    # keeps ids injective when a label itself contains the separator
    return component.replace("%", "%25").replace(ID_SEP, "%2F")


def make_id(*labels: str) -> str:
    """Join normalized labels into a canonical ``entity/property/descriptor`` path."""
    return ID_SEP.join(_escape(normalize_label(label)) for label in labels)
