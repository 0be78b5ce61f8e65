"""Shared domain types for the CVE to ATT&CK technique mapping pipeline."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

TECHNIQUE_ID_RE = re.compile(r"^T\d{4}(?:\.\d{3})?$")
CVE_ID_RE = re.compile(r"^CVE-\d{4}-\d{4,}$")

#: Explicit "no relevant technique" slot in a ranked prediction.
NONE_LABEL = "NONE"
#: Filler slot for positions lost to malformed model output. Always scored as wrong.
PAD_LABEL = "PAD"

RANKED_LIST_SIZE = 10


class CvemapError(Exception):
    """Base class for errors raised by this package."""


class MappingType(Enum):
    """The three attack phases a mapping can be labeled with."""

    EXPLOITATION_TECHNIQUE = "exploitation_technique"
    PRIMARY_IMPACT = "primary_impact"
    SECONDARY_IMPACT = "secondary_impact"

    @classmethod
    def parse(cls, label: str) -> "MappingType":
        """Parse a dataset label, case-insensitively, tolerating space/hyphen separators."""
        normalized = label.strip().lower().replace(" ", "_").replace("-", "_")
        for member in cls:
            if member.value == normalized:
                return member
        accepted = ", ".join(m.value for m in cls)
        raise ValueError(f"unknown mapping type {label!r}; accepted labels: {accepted}")


def is_technique_id(text: str) -> bool:
    return bool(TECHNIQUE_ID_RE.match(text))


def is_subtechnique_id(text: str) -> bool:
    return bool(TECHNIQUE_ID_RE.match(text)) and "." in text


@dataclass(frozen=True)
class TechniqueRef:
    """An ATT&CK technique: ID, name, and full description.

    ``description`` may be empty only when the technique is flagged deprecated
    or revoked (retired IDs referenced by older datasets).
    """

    id: str
    name: str
    description: str = ""
    deprecated: bool = False
    revoked: bool = False

    def __post_init__(self) -> None:
        if not TECHNIQUE_ID_RE.match(self.id):
            raise ValueError(f"invalid technique id: {self.id!r}")
        if not self.name:
            raise ValueError(f"technique {self.id} has an empty name")
        if not self.description and not (self.deprecated or self.revoked):
            raise ValueError(f"technique {self.id} has no description and is not flagged")

    @property
    def is_subtechnique(self) -> bool:
        return "." in self.id


@dataclass(frozen=True)
class CveRecord:
    """A vulnerability record: description plus CVSS and CWE enrichment fields."""

    id: str
    description: str
    cvss: dict[str, str] = field(default_factory=dict)
    cwe_id: str | None = None
    cwe_name: str | None = None
    cwe_description: str | None = None

    def __post_init__(self) -> None:
        if not CVE_ID_RE.match(self.id):
            raise ValueError(f"invalid CVE id: {self.id!r}")
        if not self.description:
            raise ValueError(f"CVE {self.id} has an empty description")


@dataclass(frozen=True)
class GroundTruthMapping:
    """A labeled (CVE, technique, mapping type) triple. Technique IDs are top-level."""

    cve_id: str
    technique_id: str
    mapping_type: MappingType

    def __post_init__(self) -> None:
        if not CVE_ID_RE.match(self.cve_id):
            raise ValueError(f"invalid CVE id: {self.cve_id!r}")
        if not TECHNIQUE_ID_RE.match(self.technique_id):
            raise ValueError(f"invalid technique id: {self.technique_id!r}")


class RankedListError(CvemapError):
    """Raised when ranked-list slots violate the list invariants."""


@dataclass(frozen=True)
class RankedList:
    """An ordered 10-slot prediction for one (CVE, mapping type) query.

    Each slot holds a top-level technique ID, the NONE label (explicit empty
    prediction), or the PAD label (slot lost to malformed output). Technique
    entries are distinct and at most one NONE appears.
    """

    slots: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.slots) != RANKED_LIST_SIZE:
            raise RankedListError(f"expected {RANKED_LIST_SIZE} slots, got {len(self.slots)}")
        techniques = [s for s in self.slots if s not in (NONE_LABEL, PAD_LABEL)]
        for entry in techniques:
            if not TECHNIQUE_ID_RE.match(entry):
                raise RankedListError(f"invalid slot entry: {entry!r}")
            if "." in entry:
                raise RankedListError(f"sub-technique in ranked list: {entry!r}")
        if len(set(techniques)) != len(techniques):
            raise RankedListError("duplicate technique entries in ranked list")
        if self.slots.count(NONE_LABEL) > 1:
            raise RankedListError("more than one NONE entry in ranked list")

    @classmethod
    def of(cls, entries: list[str] | tuple[str, ...]) -> "RankedList":
        return cls(tuple(entries))

    @classmethod
    def all_pad(cls) -> "RankedList":
        return cls(tuple([PAD_LABEL] * RANKED_LIST_SIZE))

    def techniques(self) -> list[str]:
        """Technique IDs in rank order, skipping NONE and PAD slots."""
        return [s for s in self.slots if s not in (NONE_LABEL, PAD_LABEL)]

    def __iter__(self):
        return iter(self.slots)

    def __len__(self) -> int:
        return len(self.slots)
