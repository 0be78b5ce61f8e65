"""The five method mappers: build each method's prompt, parse the model's
answer, and convert it to techniques through the rule tables.

Each mapper is a compose of build -> complete -> parse -> table lookup. A
response that cannot be parsed is retried once with a clarification line
appended; a second failure counts as abstention and is recorded, never raised.
"""

from __future__ import annotations

import json
import logging
import random
import re
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from importlib import resources

from . import rules
from .corpus import DataSplit, EnrichedCorpus
from .gateway import ChatRequest, Gateway, GatewayError
from .types import CvemapError, CveRecord, MappingType

logger = logging.getLogger(__name__)


class Method(Enum):
    VULN_TYPE = "vulnerability_type"
    FUNCTIONALITY = "functionality"
    EXPLOITATION = "exploitation"
    AFFECTED_OBJECT = "affected_object"
    TACTIC = "tactic"

    @classmethod
    def parse(cls, label: str) -> "Method":
        normalized = label.strip().lower().replace(" ", "_").replace("-", "_")
        for member in cls:
            if member.value == normalized:
                return member
        raise ValueError(f"unknown method {label!r}")


#: The fixed order methods contribute to the aggregated list.
METHOD_ORDER = (
    Method.VULN_TYPE,
    Method.FUNCTIONALITY,
    Method.EXPLOITATION,
    Method.AFFECTED_OBJECT,
    Method.TACTIC,
)

#: Methods included in the hybrid by default; functionality and tactic stay
#: runnable for standalone evaluation but add too much noise to the merge.
DEFAULT_HYBRID_METHODS = (Method.VULN_TYPE, Method.EXPLOITATION, Method.AFFECTED_OBJECT)

#: Mapping types each method can structurally produce, per the table shapes.
METHOD_MAPPING_TYPES = {
    Method.VULN_TYPE.value: tuple(MappingType),
    Method.FUNCTIONALITY.value: (MappingType.PRIMARY_IMPACT, MappingType.SECONDARY_IMPACT),
    Method.EXPLOITATION.value: (MappingType.EXPLOITATION_TECHNIQUE,),
    Method.AFFECTED_OBJECT.value: (MappingType.EXPLOITATION_TECHNIQUE,),
    Method.TACTIC.value: (MappingType.EXPLOITATION_TECHNIQUE,),
}

CLARIFICATION_LINE = "Answer with exactly one option."


class MapperParseError(CvemapError):
    """The model response did not match the expected answer format."""


@dataclass(frozen=True)
class MethodAnswer:
    """Parsed model answer for one method.

    ``parsed`` is method-specific: a single name, a list of names, or the full
    question-answer map. ``abstained`` means the answer carries no affirmative
    content (N/A, nothing matched, or every question answered no); runners
    skip the table lookup entirely in that case.
    """

    method: Method
    raw_text: str
    parsed: object
    abstained: bool


@dataclass
class MethodPrediction:
    method: Method
    techniques: dict[MappingType, list[str]] = field(
        default_factory=lambda: {t: [] for t in MappingType}
    )


@dataclass
class MethodRunResult:
    prediction: MethodPrediction
    prompts: dict[str, str] = field(default_factory=dict)
    responses: dict[str, str] = field(default_factory=dict)
    errors: list[str] = field(default_factory=list)
    abstained: bool = False


@dataclass(frozen=True)
class RequestDefaults:
    model_name: str
    temperature: float = 0.0
    max_output_tokens: int = 1024
    system_text: str = ""

    def request(self, user_text: str) -> ChatRequest:
        return ChatRequest(
            system_text=self.system_text,
            user_text=user_text,
            model_name=self.model_name,
            temperature=self.temperature,
            max_output_tokens=self.max_output_tokens,
        )


@lru_cache(maxsize=None)
def load_template(name: str) -> str:
    return resources.files("cvemap").joinpath(f"templates/{name}.txt").read_text(encoding="utf-8")


def _dedup_keep_first(ids: list[str]) -> list[str]:
    seen: set[str] = set()
    out: list[str] = []
    for technique_id in ids:
        if technique_id not in seen:
            seen.add(technique_id)
            out.append(technique_id)
    return out


# ---------------------------------------------------------------------------
# Vulnerability type
# ---------------------------------------------------------------------------


def build_vuln_type_prompt(cve: CveRecord, tables: rules.RuleTables) -> str:
    lines = []
    last = len(tables.vulnerability_types) - 1
    for index, row in enumerate(tables.vulnerability_types):
        prefix = "{  " if index == 0 else "   "
        suffix = "" if index == last else ","
        lines.append(f"{prefix}'{row.name}': \"{row.description}\"{suffix}")
    lines.append("}")
    block = "\n".join(lines)
    template = load_template("vulnerability_type")
    return template.replace("<VULNERABILITY-TYPES>", block).replace(
        "<CVE-DESCRIPTION>", cve.description
    )


_QUOTES = "\"'`"


def _clean_choice(text: str) -> str:
    return text.strip().strip(_QUOTES).strip().rstrip(".").strip()


def parse_vuln_type_response(text: str, tables: rules.RuleTables) -> MethodAnswer:
    cleaned = _clean_choice(text)
    if cleaned.lower() in ("n/a", "na", "none"):
        return MethodAnswer(Method.VULN_TYPE, text, parsed=None, abstained=True)
    for row in tables.vulnerability_types:
        if row.name.lower() == cleaned.lower():
            return MethodAnswer(Method.VULN_TYPE, text, parsed=row.name, abstained=False)
    raise MapperParseError(f"response is not a known vulnerability type: {cleaned!r}")


# ---------------------------------------------------------------------------
# Functionality
# ---------------------------------------------------------------------------


def _functionality_positives(
    functionality: rules.FunctionalityEntry,
    corpus: EnrichedCorpus,
    train_ids: list[str],
) -> list[str]:
    row_techniques = {
        technique_id for ids in functionality.techniques.values() for technique_id in ids
    }
    truth_by_cve: dict[str, set[str]] = {}
    for m in corpus.mappings:
        truth_by_cve.setdefault(m.cve_id, set()).add(m.technique_id)
    return [cve_id for cve_id in train_ids if truth_by_cve.get(cve_id, set()) & row_techniques]


def _render_examples(descriptions: list[str]) -> str:
    if not descriptions:
        return "(no examples available)"
    return "\n".join(f"- {d}" for d in descriptions)


def build_functionality_prompts(
    cve: CveRecord,
    tables: rules.RuleTables,
    corpus: EnrichedCorpus,
    split: DataSplit,
    k_pos: int = 3,
    k_neg: int = 3,
    seed: int = 0,
) -> list[tuple[str, str]]:
    """One prompt per functionality, as (functionality name, prompt text).

    Positive examples are train CVEs whose ground truth includes any technique
    in that functionality's row; negatives come from the rest of the train
    split. Selection is seeded and excludes the target CVE.
    """
    template = load_template("functionality")
    train_ids = sorted(split.train_cve_ids - {cve.id})
    prompts: list[tuple[str, str]] = []
    for functionality in tables.functionalities:
        positives = _functionality_positives(functionality, corpus, train_ids)
        negatives = [cve_id for cve_id in train_ids if cve_id not in set(positives)]
        rng = random.Random(f"functionality:{functionality.name}:{seed}")
        if len(positives) <= k_pos:
            if len(positives) < k_pos and positives:
                logger.info(
                    "functionality %r has only %d positive example(s); using all",
                    functionality.name,
                    len(positives),
                )
            picked_pos = positives
        else:
            picked_pos = rng.sample(positives, k_pos)
        picked_neg = negatives if len(negatives) <= k_neg else rng.sample(negatives, k_neg)
        prompt = (
            template.replace("<FUNCTIONALITY-DESCRIPTION>", functionality.description)
            .replace("<CVE-DESCRIPTION>", cve.description)
            .replace(
                "<POSITIVE-EXAMPLES>",
                _render_examples([corpus.cves[c].description for c in picked_pos]),
            )
            .replace(
                "<NEGATIVE-EXAMPLES>",
                _render_examples([corpus.cves[c].description for c in picked_neg]),
            )
        )
        prompts.append((functionality.name, prompt))
    return prompts


_YES_NO_RE = re.compile(r"\b(yes|no)\b", re.IGNORECASE)


def parse_yes_no(text: str) -> str:
    """Extract the first standalone YES/NO token, tolerating surrounding prose."""
    match = _YES_NO_RE.search(text)
    if not match:
        raise MapperParseError(f"no YES/NO answer found in response: {text[:80]!r}")
    return match.group(1).lower()


# ---------------------------------------------------------------------------
# Exploitation technique
# ---------------------------------------------------------------------------


def build_exploitation_prompt(cve: CveRecord, tables: rules.RuleTables) -> str:
    questions = "\n".join(
        f"{index}. {question.text}"
        for index, question in enumerate(tables.exploitation_questions, start=1)
    )
    template = load_template("exploitation")
    return template.replace("<CVE-DESCRIPTION>", cve.description).replace(
        "<QUESTIONS>", questions
    )


def build_exploitation_sub_prompt(
    cve: CveRecord, question: rules.ExploitationQuestion
) -> str:
    assert question.sub_question is not None
    options = "[ " + ", ".join(f'"{option}"' for option in question.sub_question.options) + " ]"
    template = load_template("exploitation_sub")
    return (
        template.replace("<CVE-DESCRIPTION>", cve.description)
        .replace("<QUESTION>", question.text)
        .replace("<SUB-QUESTION>", question.sub_question.text)
        .replace("<OPTIONS>", options)
    )


_NUMBERED_ANSWER_RE = re.compile(r"^\s*(?:q(?:uestion)?\s*)?(\d+)\s*[).:\-]?\s*.*?\b(yes|no)\b", re.IGNORECASE)


def parse_exploitation_response(text: str, tables: rules.RuleTables) -> MethodAnswer:
    """Parse one yes/no answer per question, matched by question number."""
    count = len(tables.exploitation_questions)
    answers: dict[int, str] = {}
    for line in text.splitlines():
        match = _NUMBERED_ANSWER_RE.match(line)
        if match:
            number = int(match.group(1))
            if 1 <= number <= count and number not in answers:
                answers[number] = match.group(2).lower()
    if len(answers) < count:
        # Fall back to bare YES/NO tokens in question order.
        tokens = [m.group(1).lower() for m in _YES_NO_RE.finditer(text)]
        if len(tokens) == count:
            answers = {index: token for index, token in enumerate(tokens, start=1)}
    if len(answers) < count:
        missing = [str(i) for i in range(1, count + 1) if i not in answers]
        raise MapperParseError(f"no YES/NO answer found for question(s) {', '.join(missing)}")
    parsed = {
        question.id: answers[index]
        for index, question in enumerate(tables.exploitation_questions, start=1)
    }
    abstained = all(value == "no" for value in parsed.values())
    return MethodAnswer(Method.EXPLOITATION, text, parsed=parsed, abstained=abstained)


def parse_choice_response(text: str, options: tuple[str, ...]) -> str:
    cleaned = _clean_choice(text)
    for option in options:
        if option.lower() == cleaned.lower():
            return option
    lowered = text.lower()
    for option in options:
        if option.lower() in lowered:
            return option
    raise MapperParseError(f"response matches none of the closed options: {text[:80]!r}")


# ---------------------------------------------------------------------------
# Affected object
# ---------------------------------------------------------------------------


def build_affected_object_prompt(cve: CveRecord, tables: rules.RuleTables) -> str:
    objects = [
        {
            "affected_object": row.name,
            "description": row.description,
            "examples": list(row.examples),
            "exploitation_technique": list(row.techniques),
        }
        for row in tables.affected_objects
    ]
    names = json.dumps([row.name for row in tables.affected_objects])
    template = load_template("affected_object")
    return (
        template.replace("<CVE-DESCRIPTION>", cve.description)
        .replace("<AFFECTED-OBJECTS>", json.dumps(objects, indent=2))
        .replace("<OBJECT-NAMES>", names)
    )


def _scan_names(text: str, names: list[str]) -> list[str]:
    cleaned = _clean_choice(text)
    for name in names:
        if name.lower() == cleaned.lower():
            return [name]
    lowered = text.lower()
    return [name for name in names if name.lower() in lowered]


def parse_affected_object_response(text: str, tables: rules.RuleTables) -> MethodAnswer:
    if _clean_choice(text).lower() in ("n/a", "na", "none"):
        return MethodAnswer(Method.AFFECTED_OBJECT, text, parsed=[], abstained=True)
    found = _scan_names(text, [row.name for row in tables.affected_objects])
    if not found:
        raise MapperParseError(f"response names no known affected object: {text[:80]!r}")
    return MethodAnswer(Method.AFFECTED_OBJECT, text, parsed=found, abstained=False)


# ---------------------------------------------------------------------------
# Tactic
# ---------------------------------------------------------------------------


def build_tactic_prompt(cve: CveRecord, tables: rules.RuleTables) -> str:
    block = "\n".join(f"{row.name}: {row.description}" for row in tables.tactics)
    template = load_template("tactic")
    return template.replace("<CVE-DESCRIPTION>", cve.description).replace("<TACTICS>", block)


def parse_tactic_response(text: str, tables: rules.RuleTables) -> MethodAnswer:
    if _clean_choice(text).lower() in ("n/a", "na", "none"):
        return MethodAnswer(Method.TACTIC, text, parsed=[], abstained=True)
    found = _scan_names(text, [row.name for row in tables.tactics])
    if not found:
        raise MapperParseError(f"response names no known tactic: {text[:80]!r}")
    return MethodAnswer(Method.TACTIC, text, parsed=found, abstained=False)


# ---------------------------------------------------------------------------
# Runner
# ---------------------------------------------------------------------------


def _complete_with_parse_retry(
    gateway: Gateway,
    defaults: RequestDefaults,
    prompt: str,
    parse,
    result: MethodRunResult,
    trace_key: str,
):
    """complete -> parse, retrying once with a clarification line appended.

    Returns the parsed value, or None after recording the failure.
    """
    attempt_prompt = prompt
    for attempt in (0, 1):
        result.prompts[trace_key if attempt == 0 else f"{trace_key}.retry"] = attempt_prompt
        response = gateway.complete(defaults.request(attempt_prompt))
        result.responses[trace_key if attempt == 0 else f"{trace_key}.retry"] = response.text
        try:
            return parse(response.text)
        except MapperParseError as exc:
            result.errors.append(f"{trace_key}: {exc}")
            attempt_prompt = f"{prompt}\n{CLARIFICATION_LINE}"
    return None


def run_method(
    gateway: Gateway,
    method: Method,
    cve: CveRecord,
    tables: rules.RuleTables,
    defaults: RequestDefaults,
    corpus: EnrichedCorpus | None = None,
    split: DataSplit | None = None,
    k_pos: int = 3,
    k_neg: int = 3,
    seed: int = 0,
) -> MethodRunResult:
    """Run one method end to end for one CVE.

    Abstention and unrecoverable parse or gateway errors both yield an empty
    prediction; errors are recorded on the result, never raised.
    """
    result = MethodRunResult(prediction=MethodPrediction(method=method))
    try:
        if method is Method.VULN_TYPE:
            _run_vuln_type(gateway, cve, tables, defaults, result)
        elif method is Method.FUNCTIONALITY:
            if corpus is None or split is None:
                raise ValueError("functionality method needs corpus and split")
            _run_functionality(gateway, cve, tables, defaults, corpus, split, k_pos, k_neg, seed, result)
        elif method is Method.EXPLOITATION:
            _run_exploitation(gateway, cve, tables, defaults, result)
        elif method is Method.AFFECTED_OBJECT:
            _run_affected_object(gateway, cve, tables, defaults, result)
        elif method is Method.TACTIC:
            _run_tactic(gateway, cve, tables, defaults, result)
    except GatewayError as exc:
        result.errors.append(f"{method.value}: gateway error: {exc}")
        result.abstained = True
    for mapping_type in MappingType:
        result.prediction.techniques[mapping_type] = _dedup_keep_first(
            result.prediction.techniques[mapping_type]
        )
    return result


def _run_vuln_type(gateway, cve, tables, defaults, result) -> None:
    prompt = build_vuln_type_prompt(cve, tables)
    answer = _complete_with_parse_retry(
        gateway, defaults, prompt, lambda text: parse_vuln_type_response(text, tables),
        result, "vulnerability_type",
    )
    if answer is None or answer.abstained:
        result.abstained = True
        return
    looked_up = rules.techniques_for_vulnerability_type(tables, answer.parsed)
    for mapping_type, ids in looked_up.items():
        result.prediction.techniques[mapping_type].extend(ids)


def _run_functionality(
    gateway, cve, tables, defaults, corpus, split, k_pos, k_neg, seed, result
) -> None:
    prompts = build_functionality_prompts(cve, tables, corpus, split, k_pos, k_neg, seed)
    answered_yes: list[str] = []
    for name, prompt in prompts:
        verdict = _complete_with_parse_retry(
            gateway, defaults, prompt, parse_yes_no, result, f"functionality:{name}"
        )
        if verdict == "yes":
            answered_yes.append(name)
    if not answered_yes:
        result.abstained = True
        return
    for name in answered_yes:
        looked_up = rules.techniques_for_functionality(tables, name)
        for mapping_type, ids in looked_up.items():
            result.prediction.techniques[mapping_type].extend(ids)


def _run_exploitation(gateway, cve, tables, defaults, result) -> None:
    prompt = build_exploitation_prompt(cve, tables)
    answer = _complete_with_parse_retry(
        gateway, defaults, prompt, lambda text: parse_exploitation_response(text, tables),
        result, "exploitation",
    )
    if answer is None or answer.abstained:
        result.abstained = True
        return
    answers: dict[str, rules.Answer] = {}
    for question in tables.exploitation_questions:
        verdict = answer.parsed[question.id]
        if verdict == "yes" and question.sub_question is not None:
            sub_prompt = build_exploitation_sub_prompt(cve, question)
            choice = _complete_with_parse_retry(
                gateway, defaults, sub_prompt,
                lambda text: parse_choice_response(text, question.sub_question.options),
                result, f"exploitation:{question.id}.sub",
            )
            # An unparseable sub-answer keeps the top-level yes; "Other" adds nothing.
            answers[question.id] = ("yes", choice if choice is not None else "Other")
        else:
            answers[question.id] = verdict
    result.prediction.techniques[MappingType.EXPLOITATION_TECHNIQUE].extend(
        rules.techniques_for_exploitation_answers(tables, answers)
    )


def _run_affected_object(gateway, cve, tables, defaults, result) -> None:
    prompt = build_affected_object_prompt(cve, tables)
    answer = _complete_with_parse_retry(
        gateway, defaults, prompt,
        lambda text: parse_affected_object_response(text, tables),
        result, "affected_object",
    )
    if answer is None or answer.abstained:
        result.abstained = True
        return
    for name in answer.parsed:
        result.prediction.techniques[MappingType.EXPLOITATION_TECHNIQUE].extend(
            rules.techniques_for_affected_object(tables, name)
        )


def _run_tactic(gateway, cve, tables, defaults, result) -> None:
    prompt = build_tactic_prompt(cve, tables)
    answer = _complete_with_parse_retry(
        gateway, defaults, prompt, lambda text: parse_tactic_response(text, tables),
        result, "tactic",
    )
    if answer is None or answer.abstained:
        result.abstained = True
        return
    for name in answer.parsed:
        result.prediction.techniques[MappingType.EXPLOITATION_TECHNIQUE].extend(
            rules.techniques_for_tactic(tables, name)
        )


def aggregate_methodology(
    predictions: list[MethodPrediction],
    selected: tuple[Method, ...] = DEFAULT_HYBRID_METHODS,
) -> dict[MappingType, list[str]]:
    """Concatenate selected methods' lists per mapping type, in the fixed
    method order, de-duplicated keep-first. Arrival order does not matter."""
    by_method = {prediction.method: prediction for prediction in predictions}
    aggregated: dict[MappingType, list[str]] = {t: [] for t in MappingType}
    for method in METHOD_ORDER:
        if method not in selected or method not in by_method:
            continue
        for mapping_type in MappingType:
            aggregated[mapping_type].extend(by_method[method].techniques[mapping_type])
    return {t: _dedup_keep_first(ids) for t, ids in aggregated.items()}
