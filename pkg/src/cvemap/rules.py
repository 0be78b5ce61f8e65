"""Machine-readable method tables for mapping CVE properties to techniques.

The tables ship as an editable JSON data file (see ``data/cmm_tables.json``)
rather than code, so rows can be corrected or extended without a rebuild. Each
row carries a provenance note. Loading validates all structural invariants and
fails atomically, reporting every violation at once.
"""

from __future__ import annotations

import difflib
import json
from dataclasses import dataclass
from importlib import resources

from .types import CvemapError, MappingType, TECHNIQUE_ID_RE

EXPECTED_VULNERABILITY_TYPES = 27
EXPECTED_FUNCTIONALITIES = 14
EXPECTED_QUESTIONS = 8
EXPECTED_SUB_QUESTIONS = 2

YES = "yes"
NO = "no"


class RuleTableError(CvemapError):
    """Raised when the rule-table file violates a structural invariant."""


class RuleLookupError(CvemapError):
    """Raised for lookups against unknown table rows."""

    def __init__(self, message: str, suggestions: list[str] | None = None):
        if suggestions:
            message = f"{message} (did you mean: {', '.join(suggestions)}?)"
        super().__init__(message)
        self.suggestions = suggestions or []


@dataclass(frozen=True)
class VulnerabilityTypeEntry:
    name: str
    cwe_ids: tuple[str, ...]
    description: str
    techniques: dict[MappingType, tuple[str, ...]]
    note: str = ""


@dataclass(frozen=True)
class FunctionalityEntry:
    name: str
    description: str
    techniques: dict[MappingType, tuple[str, ...]]
    note: str = ""


@dataclass(frozen=True)
class SubQuestion:
    text: str
    options: tuple[str, ...]


@dataclass(frozen=True)
class ExploitationQuestion:
    id: str
    text: str
    sub_question: SubQuestion | None
    #: answer key ("yes" or a sub-question option) -> ordered technique IDs
    answers: dict[str, tuple[str, ...]]
    note: str = ""


@dataclass(frozen=True)
class AffectedObjectEntry:
    name: str
    description: str
    examples: tuple[str, ...]
    techniques: tuple[str, ...]
    note: str = ""


@dataclass(frozen=True)
class TacticEntry:
    name: str
    description: str
    techniques: tuple[str, ...]
    note: str = ""


@dataclass(frozen=True)
class RuleTables:
    vulnerability_types: tuple[VulnerabilityTypeEntry, ...]
    functionalities: tuple[FunctionalityEntry, ...]
    exploitation_questions: tuple[ExploitationQuestion, ...]
    affected_objects: tuple[AffectedObjectEntry, ...]
    tactics: tuple[TacticEntry, ...]
    version: str
    provenance: str

    def vulnerability_type(self, name: str) -> VulnerabilityTypeEntry:
        return _lookup(self.vulnerability_types, name, "vulnerability type")

    def functionality(self, name: str) -> FunctionalityEntry:
        return _lookup(self.functionalities, name, "functionality")

    def affected_object(self, name: str) -> AffectedObjectEntry:
        return _lookup(self.affected_objects, name, "affected object")

    def tactic(self, name: str) -> TacticEntry:
        return _lookup(self.tactics, name, "tactic")


def _lookup(entries, name: str, what: str):
    wanted = name.strip().lower()
    for entry in entries:
        if entry.name.lower() == wanted:
            return entry
    known = [entry.name for entry in entries]
    suggestions = difflib.get_close_matches(name, known, n=3, cutoff=0.5)
    raise RuleLookupError(f"unknown {what}: {name!r}", suggestions)


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------


def _parse_type_map(raw: dict, errors: list[str], where: str) -> dict[MappingType, tuple[str, ...]]:
    techniques: dict[MappingType, tuple[str, ...]] = {t: () for t in MappingType}
    for key, ids in (raw or {}).items():
        try:
            mapping_type = MappingType.parse(key)
        except ValueError as exc:
            errors.append(f"{where}: {exc}")
            continue
        techniques[mapping_type] = tuple(ids)
    return techniques


def _check_ids(ids, errors: list[str], where: str) -> None:
    for technique_id in ids:
        if not TECHNIQUE_ID_RE.match(technique_id):
            errors.append(f"{where}: malformed technique id {technique_id!r}")
        elif "." in technique_id:
            errors.append(f"{where}: sub-technique id {technique_id!r} (tables hold top-level IDs)")


def load_rule_tables(raw: bytes) -> RuleTables:
    """Load and validate the rule-table JSON document."""
    try:
        document = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise RuleTableError(f"rule-table file is not valid UTF-8 JSON: {exc}") from exc

    errors: list[str] = []

    vulnerability_types = []
    for row in document.get("vulnerability_types", []):
        techniques = _parse_type_map(row.get("techniques"), errors, row.get("name", "?"))
        for ids in techniques.values():
            _check_ids(ids, errors, f"vulnerability type {row.get('name', '?')}")
        vulnerability_types.append(
            VulnerabilityTypeEntry(
                name=row.get("name", ""),
                cwe_ids=tuple(row.get("cwe_ids", [])),
                description=row.get("description", ""),
                techniques=techniques,
                note=row.get("note", ""),
            )
        )

    functionalities = []
    for row in document.get("functionalities", []):
        techniques = _parse_type_map(row.get("techniques"), errors, row.get("name", "?"))
        for ids in techniques.values():
            _check_ids(ids, errors, f"functionality {row.get('name', '?')}")
        if techniques[MappingType.EXPLOITATION_TECHNIQUE]:
            errors.append(
                f"functionality {row.get('name', '?')} lists exploitation techniques"
            )
        functionalities.append(
            FunctionalityEntry(
                name=row.get("name", ""),
                description=row.get("description", ""),
                techniques=techniques,
                note=row.get("note", ""),
            )
        )

    questions = []
    for row in document.get("exploitation_questions", []):
        qid = row.get("id", "")
        sub = None
        if row.get("sub_question"):
            sub = SubQuestion(
                text=row["sub_question"].get("text", ""),
                options=tuple(row["sub_question"].get("options", [])),
            )
            if not sub.options:
                errors.append(f"question {qid}: sub-question has no options")
        answers = {key: tuple(ids) for key, ids in row.get("answers", {}).items()}
        if YES not in answers:
            errors.append(f"question {qid}: no 'yes' answer entry")
        allowed = {YES} | set(sub.options if sub else ())
        for key in answers:
            if key not in allowed:
                errors.append(f"question {qid}: answer key {key!r} is not 'yes' or a sub-option")
        if sub:
            for option in sub.options:
                if option not in answers:
                    errors.append(f"question {qid}: sub-option {option!r} has no answer entry")
        for key, ids in answers.items():
            _check_ids(ids, errors, f"question {qid} answer {key!r}")
        questions.append(
            ExploitationQuestion(
                id=qid,
                text=row.get("text", ""),
                sub_question=sub,
                answers=answers,
                note=row.get("note", ""),
            )
        )

    affected_objects = []
    for row in document.get("affected_objects", []):
        _check_ids(row.get("exploitation_technique", []), errors, f"affected object {row.get('affected_object', '?')}")
        if not row.get("description"):
            errors.append(f"affected object {row.get('affected_object', '?')}: empty description")
        affected_objects.append(
            AffectedObjectEntry(
                name=row.get("affected_object", ""),
                description=row.get("description", ""),
                examples=tuple(row.get("examples", [])),
                techniques=tuple(row.get("exploitation_technique", [])),
                note=row.get("note", ""),
            )
        )

    tactics = []
    for row in document.get("tactics", []):
        _check_ids(row.get("techniques", []), errors, f"tactic {row.get('name', '?')}")
        tactics.append(
            TacticEntry(
                name=row.get("name", ""),
                description=row.get("description", ""),
                techniques=tuple(row.get("techniques", [])),
                note=row.get("note", ""),
            )
        )

    for entries, what, expected in (
        (vulnerability_types, "vulnerability types", EXPECTED_VULNERABILITY_TYPES),
        (functionalities, "functionalities", EXPECTED_FUNCTIONALITIES),
        (questions, "exploitation questions", EXPECTED_QUESTIONS),
    ):
        if len(entries) != expected:
            errors.append(f"expected {expected} {what}, found {len(entries)}")

    sub_count = sum(1 for q in questions if q.sub_question is not None)
    if sub_count != EXPECTED_SUB_QUESTIONS:
        errors.append(f"expected {EXPECTED_SUB_QUESTIONS} questions with sub-questions, found {sub_count}")

    for entries, what in (
        (vulnerability_types, "vulnerability type"),
        (functionalities, "functionality"),
        (affected_objects, "affected object"),
        (tactics, "tactic"),
    ):
        seen: set[str] = set()
        for entry in entries:
            lowered = entry.name.lower()
            if not lowered:
                errors.append(f"{what} row with empty name")
            elif lowered in seen:
                errors.append(f"duplicate {what} name: {entry.name!r}")
            seen.add(lowered)
    question_ids = [q.id for q in questions]
    if len(set(question_ids)) != len(question_ids):
        errors.append("duplicate question ids")

    if errors:
        raise RuleTableError(
            "rule-table validation failed:\n  " + "\n  ".join(sorted(set(errors)))
        )

    return RuleTables(
        vulnerability_types=tuple(vulnerability_types),
        functionalities=tuple(functionalities),
        exploitation_questions=tuple(questions),
        affected_objects=tuple(affected_objects),
        tactics=tuple(tactics),
        version=document.get("version", ""),
        provenance=document.get("provenance", ""),
    )


def load_default_tables() -> RuleTables:
    """Load the rule tables shipped with the package."""
    raw = resources.files("cvemap").joinpath("data/cmm_tables.json").read_bytes()
    return load_rule_tables(raw)


def tables_to_dict(tables: RuleTables) -> dict:
    """Serialize back to the data-file schema (for round-trip checks and edits)."""

    def type_map(techniques: dict[MappingType, tuple[str, ...]]) -> dict[str, list[str]]:
        return {t.value: list(ids) for t, ids in techniques.items() if ids}

    return {
        "version": tables.version,
        "provenance": tables.provenance,
        "vulnerability_types": [
            {
                "name": row.name,
                "cwe_ids": list(row.cwe_ids),
                "description": row.description,
                "techniques": type_map(row.techniques),
                "note": row.note,
            }
            for row in tables.vulnerability_types
        ],
        "functionalities": [
            {
                "name": row.name,
                "description": row.description,
                "techniques": type_map(row.techniques),
                "note": row.note,
            }
            for row in tables.functionalities
        ],
        "exploitation_questions": [
            {
                "id": row.id,
                "text": row.text,
                **(
                    {
                        "sub_question": {
                            "text": row.sub_question.text,
                            "options": list(row.sub_question.options),
                        }
                    }
                    if row.sub_question
                    else {}
                ),
                "answers": {key: list(ids) for key, ids in row.answers.items()},
                "note": row.note,
            }
            for row in tables.exploitation_questions
        ],
        "affected_objects": [
            {
                "affected_object": row.name,
                "description": row.description,
                "examples": list(row.examples),
                "exploitation_technique": list(row.techniques),
                "note": row.note,
            }
            for row in tables.affected_objects
        ],
        "tactics": [
            {
                "name": row.name,
                "description": row.description,
                "techniques": list(row.techniques),
                "note": row.note,
            }
            for row in tables.tactics
        ],
    }


# ---------------------------------------------------------------------------
# Lookups
# ---------------------------------------------------------------------------


def techniques_for_vulnerability_type(tables: RuleTables, name: str) -> dict[MappingType, list[str]]:
    entry = tables.vulnerability_type(name)
    return {t: list(ids) for t, ids in entry.techniques.items()}


def techniques_for_functionality(tables: RuleTables, name: str) -> dict[MappingType, list[str]]:
    entry = tables.functionality(name)
    return {t: list(ids) for t, ids in entry.techniques.items()}


Answer = str | tuple[str, str]


def techniques_for_exploitation_answers(
    tables: RuleTables, answers: dict[str, Answer]
) -> list[str]:
    """Union the technique lists of all yes answers, in question order.

    ``answers`` maps question id to ``"no"``, ``"yes"``, or ``("yes", sub_answer)``
    for questions that carry a sub-question. Duplicates keep their first position.
    """
    result: list[str] = []
    seen: set[str] = set()
    for question in tables.exploitation_questions:
        if question.id not in answers:
            raise RuleLookupError(f"no answer supplied for question {question.id!r}")
        answer = answers[question.id]
        if answer == NO:
            continue
        if question.sub_question is not None:
            if not (isinstance(answer, tuple) and len(answer) == 2 and answer[0] == YES):
                raise RuleLookupError(
                    f"question {question.id!r} requires a sub-answer when answered yes"
                )
            sub_answer = answer[1]
            if sub_answer not in question.sub_question.options:
                raise RuleLookupError(
                    f"question {question.id!r}: {sub_answer!r} is not one of the closed options"
                )
            picked = list(question.answers[YES]) + list(question.answers[sub_answer])
        else:
            if answer != YES:
                raise RuleLookupError(
                    f"question {question.id!r} has no sub-question; answer must be yes or no"
                )
            picked = list(question.answers[YES])
        for technique_id in picked:
            if technique_id not in seen:
                seen.add(technique_id)
                result.append(technique_id)
    return result


def techniques_for_affected_object(tables: RuleTables, name: str) -> list[str]:
    return list(tables.affected_object(name).techniques)


def techniques_for_tactic(tables: RuleTables, name: str) -> list[str]:
    return list(tables.tactic(name).techniques)


def technique_ids_by_mapping_type(tables: RuleTables) -> dict[MappingType, set[str]]:
    """Every technique ID the tables can emit, grouped by mapping type."""
    sets: dict[MappingType, set[str]] = {t: set() for t in MappingType}
    for row in tables.vulnerability_types:
        for mapping_type, ids in row.techniques.items():
            sets[mapping_type].update(ids)
    for row in tables.functionalities:
        for mapping_type, ids in row.techniques.items():
            sets[mapping_type].update(ids)
    exploitation = sets[MappingType.EXPLOITATION_TECHNIQUE]
    for question in tables.exploitation_questions:
        for ids in question.answers.values():
            exploitation.update(ids)
    for row in tables.affected_objects:
        exploitation.update(row.techniques)
    for row in tables.tactics:
        exploitation.update(row.techniques)
    return sets


def validate_against_catalog(tables: RuleTables, known_ids: set[str]) -> list[str]:
    """Return technique IDs referenced by the tables but absent from the catalog."""
    referenced: set[str] = set()
    for ids in technique_ids_by_mapping_type(tables).values():
        referenced.update(ids)
    return sorted(referenced - known_ids)
