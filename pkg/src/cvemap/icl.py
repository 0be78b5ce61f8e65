"""In-context prompt construction and ranked-list response parsing.

The prompt for one (CVE, mapping type) query carries the technique catalog,
optional CWE/CVSS context, and labeled demonstrations drawn from the train
split. The response is a bracketed ranked list of ten entries; parsing lifts
sub-techniques, de-duplicates keep-first, pads short lists, and truncates long
ones.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import random
import re
from dataclasses import dataclass, field

from .corpus import DataSplit, EnrichedCorpus, lift_subtechnique
from .gateway import Gateway, GatewayError
from .mappers import RequestDefaults, load_template
from .types import (
    CvemapError,
    CveRecord,
    MappingType,
    NONE_LABEL,
    PAD_LABEL,
    RANKED_LIST_SIZE,
    RankedList,
    TechniqueRef,
)

logger = logging.getLogger(__name__)

FORMAT_REMINDER = (
    "Remember: provide only a ranked list of exactly ten entries, "
    "formatted like the example."
)


class RankedResponseError(CvemapError):
    """The response contains no usable ranked list."""


@dataclass(frozen=True)
class IclFeatures:
    include_attack_descriptions: bool = True
    include_cvss: bool = True
    include_cwe: bool = True
    #: None means the full train split, in canonical ascending-ID order.
    num_demonstrations: int | None = None

    def label(self) -> str:
        parts = []
        if self.include_attack_descriptions:
            parts.append("A")
        if self.include_cvss:
            parts.append("CVSS")
        if self.include_cwe:
            parts.append("CWE")
        return "+".join(parts) if parts else "none"


@dataclass(frozen=True)
class Demonstration:
    cve_id: str
    cve_description: str
    #: per mapping type: (technique id, technique name) pairs
    techniques: dict[MappingType, tuple[tuple[str, str], ...]]


def select_demonstrations(
    split: DataSplit,
    corpus: EnrichedCorpus,
    n: int | None = None,
    seed: int = 0,
) -> list[Demonstration]:
    """Pick demonstrations from the train split, uniformly without replacement.

    The full-train case uses a stable canonical order (ascending CVE ID).
    Smaller counts take a prefix of one seeded permutation, so growing ``n``
    only ever appends demonstrations.
    """
    train_ids = sorted(split.train_cve_ids)
    if n is None or n == len(train_ids):
        picked = train_ids
    elif n > len(train_ids):
        raise ValueError(f"requested {n} demonstrations but train split has {len(train_ids)}")
    else:
        rng = random.Random(f"demonstrations:{seed}")
        picked = rng.sample(train_ids, len(train_ids))[:n]

    index = corpus.mapping_index()
    demonstrations = []
    for cve_id in picked:
        techniques: dict[MappingType, tuple[tuple[str, str], ...]] = {}
        for mapping_type in MappingType:
            ids = sorted(index.get((cve_id, mapping_type), set()))
            techniques[mapping_type] = tuple(
                (technique_id, corpus.techniques[technique_id].name) for technique_id in ids
            )
        demonstrations.append(
            Demonstration(
                cve_id=cve_id,
                cve_description=corpus.cves[cve_id].description,
                techniques=techniques,
            )
        )
    return demonstrations


def _catalog_csv(catalog: list[TechniqueRef], with_descriptions: bool) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    if with_descriptions:
        writer.writerow(["attack_id", "attack_name", "attack_description"])
    else:
        writer.writerow(["attack_id", "attack_name"])
    for technique in sorted(catalog, key=lambda t: t.id):
        if technique.is_subtechnique:
            continue
        if with_descriptions:
            writer.writerow([technique.id, technique.name, technique.description])
        else:
            writer.writerow([technique.id, technique.name])
    return buffer.getvalue().rstrip("\n")


def _demonstrations_json(demonstrations: list[Demonstration], exclude_cve_id: str) -> str:
    block: dict[str, dict] = {}
    for demo in demonstrations:
        if demo.cve_id == exclude_cve_id:
            continue
        block[demo.cve_id] = {
            "description": demo.cve_description,
            "attack_techniques": {
                mapping_type.value: [
                    f"{technique_id}: {name}" for technique_id, name in demo.techniques[mapping_type]
                ]
                for mapping_type in MappingType
            },
        }
    return json.dumps(block, indent=2, ensure_ascii=False)


def mapping_type_phrase(mapping_type: MappingType) -> str:
    return mapping_type.value.replace("_", " ")


def build_icl_prompt(
    cve: CveRecord,
    mapping_type: MappingType,
    features: IclFeatures,
    demonstrations: list[Demonstration],
    catalog: list[TechniqueRef],
) -> str:
    cwe_block = ""
    if features.include_cwe and cve.cwe_id:
        cwe_text = cve.cwe_description or cve.cwe_name or ""
        cwe_block = f"The following CWE applies to this vulnerability:\n{cve.cwe_id}: {cwe_text}\n"
    cvss_block = ""
    if features.include_cvss and cve.cvss:
        lines = "\n".join(f"- {key}: {value}" for key, value in cve.cvss.items())
        cvss_block = f"The CVE has the following CVSS features:\n----\n{lines}\n----\n"

    template = load_template("icl")
    return (
        template.replace("<MAPPING-TYPE>", mapping_type_phrase(mapping_type))
        .replace("<CVE-DESCRIPTION>", cve.description)
        .replace("<TECHNIQUE-CSV>", _catalog_csv(catalog, features.include_attack_descriptions))
        .replace("<CWE-BLOCK>", cwe_block)
        .replace("<CVSS-BLOCK>", cvss_block)
        .replace("<DEMONSTRATIONS>", _demonstrations_json(demonstrations, cve.id))
    )


def icl_system_text() -> str:
    return load_template("icl_system").rstrip("\n")


# ---------------------------------------------------------------------------
# Response parsing
# ---------------------------------------------------------------------------

_BRACKETED_RE = re.compile(r"\[(.*?)\]", re.DOTALL)
_TECHNIQUE_TOKEN_RE = re.compile(r"^t\d{4}(?:\.\d{3})?$", re.IGNORECASE)


def _collect_slots(body: str) -> list[str]:
    slots: list[str] = []
    seen: set[str] = set()
    none_seen = False
    for token in body.split(","):
        token = token.strip().strip("\"'`").strip()
        if not token:
            continue
        if token.lower() == "none":
            if not none_seen and len(slots) < RANKED_LIST_SIZE:
                none_seen = True
                slots.append(NONE_LABEL)
            continue
        if not _TECHNIQUE_TOKEN_RE.match(token):
            logger.debug("ignoring unrecognized ranked-list entry %r", token)
            continue
        technique_id = lift_subtechnique(token.upper())
        if technique_id in seen:
            continue
        seen.add(technique_id)
        if len(slots) < RANKED_LIST_SIZE:
            slots.append(technique_id)
    return slots


def parse_ranked_response(text: str) -> RankedList:
    """Parse the first bracketed list literal into a 10-slot ranked list.

    Accepts quoted technique IDs and a bare or quoted None. Sub-techniques are
    lifted; duplicate techniques and extra None entries keep their first
    position; short lists are padded with PAD and long ones truncated. Bracket
    pairs holding no valid entries are skipped in favor of a later list.
    """
    matches = list(_BRACKETED_RE.finditer(text))
    if not matches:
        raise RankedResponseError(f"no bracketed list found in response: {text[:80]!r}")
    slots: list[str] = []
    for match in matches:
        slots = _collect_slots(match.group(1))
        if slots:
            break
    if not slots:
        raise RankedResponseError(f"bracketed list holds no valid entries: {text[:80]!r}")
    if len(slots) < RANKED_LIST_SIZE:
        logger.warning(
            "ranked response has %d usable slot(s); padding to %d", len(slots), RANKED_LIST_SIZE
        )
        slots.extend([PAD_LABEL] * (RANKED_LIST_SIZE - len(slots)))
    return RankedList.of(slots)


def render_ranked_list(entries: list[str | None]) -> str:
    """Render entries in the output format the prompt asks for."""
    parts = []
    for entry in entries:
        if entry is None or entry == NONE_LABEL:
            parts.append("None")
        else:
            parts.append(f"'{entry}'")
    return "[" + ", ".join(parts) + "]"


# ---------------------------------------------------------------------------
# Runner
# ---------------------------------------------------------------------------


@dataclass
class IclRunResult:
    ranked: RankedList
    prompts: dict[str, str] = field(default_factory=dict)
    responses: dict[str, str] = field(default_factory=dict)
    errors: list[str] = field(default_factory=list)


def catalog_from_corpus(corpus: EnrichedCorpus) -> list[TechniqueRef]:
    """Top-level, non-retired techniques: the labels the prompt may offer."""
    return sorted(
        (
            t
            for t in corpus.techniques.values()
            if not (t.is_subtechnique or t.revoked or t.deprecated)
        ),
        key=lambda t: t.id,
    )


def run_icl(
    gateway: Gateway,
    cve: CveRecord,
    mapping_type: MappingType,
    features: IclFeatures,
    split: DataSplit,
    corpus: EnrichedCorpus,
    defaults: RequestDefaults,
    seed: int = 0,
    demonstrations: list[Demonstration] | None = None,
) -> IclRunResult:
    """One gateway call per (CVE, mapping type); a parse failure is retried
    once with the format reminder appended, then yields an all-PAD list."""
    if demonstrations is None:
        demonstrations = select_demonstrations(split, corpus, features.num_demonstrations, seed)
    prompt = build_icl_prompt(cve, mapping_type, features, demonstrations, catalog_from_corpus(corpus))
    result = IclRunResult(ranked=RankedList.all_pad())
    trace_key = f"icl:{mapping_type.value}"
    attempt_prompt = prompt
    for attempt in (0, 1):
        key = trace_key if attempt == 0 else f"{trace_key}.retry"
        result.prompts[key] = attempt_prompt
        try:
            response = gateway.complete(defaults.request(attempt_prompt))
        except GatewayError as exc:
            result.errors.append(f"{trace_key}: gateway error: {exc}")
            return result
        result.responses[key] = response.text
        try:
            result.ranked = parse_ranked_response(response.text)
            return result
        except RankedResponseError as exc:
            result.errors.append(f"{trace_key}: {exc}")
            attempt_prompt = f"{prompt}\n{FORMAT_REMINDER}"
    return result
