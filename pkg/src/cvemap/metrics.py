"""Ranked and unranked evaluation metrics.

Ranked lists are scored with precision@k, recall@k, average precision, and
their mean over all queries. Unranked multi-label predictions are scored with
micro-averaged precision/recall/F1, accumulating true/false positives across
all queries so every instance weighs equally. A CVE with no ground-truth
mapping of a type receives the NONE pseudo-label as its truth, which gives the
explicit empty prediction a scoring semantics and keeps |truth| >= 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from . import fusion
from .corpus import DataSplit, EnrichedCorpus
from .types import CvemapError, MappingType, NONE_LABEL, PAD_LABEL

LabelSet = frozenset


class MetricsError(CvemapError):
    pass


def make_truth(technique_ids: Iterable[str]) -> LabelSet:
    """Build a truth label set; empty input becomes the NONE pseudo-label."""
    ids = frozenset(technique_ids)
    if not ids:
        return frozenset({NONE_LABEL})
    if NONE_LABEL in ids:
        raise MetricsError("NONE cannot co-occur with technique ids in a truth set")
    return ids


@dataclass(frozen=True)
class RankedQuery:
    predicted: Sequence[str]
    truth: LabelSet
    cve_id: str = ""
    mapping_type: MappingType | None = None


def _is_hit(slot: str, truth: LabelSet) -> bool:
    if slot == PAD_LABEL:
        return False
    if slot == NONE_LABEL:
        return truth == frozenset({NONE_LABEL})
    return slot in truth


def precision_at_k(query: RankedQuery, k: int) -> float:
    if k < 1:
        raise MetricsError(f"k must be >= 1, got {k}")
    slots = list(query.predicted)[:k]
    return sum(1 for slot in slots if _is_hit(slot, query.truth)) / k


def recall_at_k(query: RankedQuery, k: int) -> float:
    if k < 1:
        raise MetricsError(f"k must be >= 1, got {k}")
    slots = list(query.predicted)[:k]
    return sum(1 for slot in slots if _is_hit(slot, query.truth)) / len(query.truth)


def average_precision(query: RankedQuery) -> float:
    """Mean of precision@i over the ranks i that hold a correct entry,
    normalized by the truth size."""
    n = len(query.truth)
    slots = list(query.predicted)
    total = 0.0
    hits = 0
    for index, slot in enumerate(slots, start=1):
        if _is_hit(slot, query.truth):
            hits += 1
            total += hits / index
    return total / n


def mean_average_precision(queries: Sequence[RankedQuery]) -> float:
    if not queries:
        raise MetricsError("mean average precision needs at least one query")
    return sum(average_precision(q) for q in queries) / len(queries)


def micro_prf(
    predictions: Sequence[Iterable[str]], truths: Sequence[LabelSet]
) -> tuple[float, float, float]:
    """Micro-averaged precision, recall, F1 over set-valued predictions.

    0/0 ratios resolve to 0.
    """
    if len(predictions) != len(truths):
        raise MetricsError("predictions and truths must align")
    tp = fp = fn = 0
    for predicted, truth in zip(predictions, truths):
        predicted_set = set(predicted)
        tp += len(predicted_set & truth)
        fp += len(predicted_set - truth)
        fn += len(truth - predicted_set)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


@dataclass
class ClasswiseEntry:
    technique_id: str
    frequency: int
    recall_at_k: float


def classwise_report(queries: Sequence[RankedQuery], k: int = 10) -> list[ClasswiseEntry]:
    """Per-technique recall@k over the queries whose truth contains the
    technique, with its occurrence frequency. NONE is not a class."""
    occurrences: dict[str, int] = {}
    found: dict[str, int] = {}
    for query in queries:
        top = set(list(query.predicted)[:k])
        for technique_id in query.truth:
            if technique_id == NONE_LABEL:
                continue
            occurrences[technique_id] = occurrences.get(technique_id, 0) + 1
            if technique_id in top:
                found[technique_id] = found.get(technique_id, 0) + 1
    entries = [
        ClasswiseEntry(technique_id, count, found.get(technique_id, 0) / count)
        for technique_id, count in occurrences.items()
    ]
    entries.sort(key=lambda e: (-e.frequency, e.technique_id))
    return entries


# ---------------------------------------------------------------------------
# Run evaluation
# ---------------------------------------------------------------------------

SPLIT_TRAIN = "train"
SPLIT_TEST = "test"


@dataclass
class RankedMetricsRow:
    mapping_type: str
    method: str
    split: str
    queries: int
    map_score: float
    recall_at_10: float
    recall_at_5: float


@dataclass
class UnrankedMetricsRow:
    mapping_type: str
    method: str
    split: str
    queries: int
    precision: float
    recall: float
    f1: float


@dataclass
class ClasswiseRow:
    technique_id: str
    mapping_type: str
    split: str
    frequency: int
    recall_at_10: float


@dataclass
class UncategorizedRow:
    method: str
    secondary_impacts: str
    split: str
    queries: int
    map_score: float
    recall_at_10: float
    recall_at_5: float


@dataclass
class EvalReport:
    ranked: list[RankedMetricsRow] = field(default_factory=list)
    unranked: list[UnrankedMetricsRow] = field(default_factory=list)
    classwise: list[ClasswiseRow] = field(default_factory=list)
    uncategorized: list[UncategorizedRow] = field(default_factory=list)


@dataclass(frozen=True)
class EvalOptions:
    exclude_secondary: bool = False
    uncategorized: bool = False


def _split_name(cve_id: str, split: DataSplit) -> str:
    return SPLIT_TRAIN if cve_id in split.train_cve_ids else SPLIT_TEST


def _ranked_rows(
    queries_by_key: dict[tuple[str, str], list[RankedQuery]], method: str
) -> list[RankedMetricsRow]:
    rows = []
    for (mapping_type, split_name), queries in sorted(queries_by_key.items()):
        rows.append(
            RankedMetricsRow(
                mapping_type=mapping_type,
                method=method,
                split=split_name,
                queries=len(queries),
                map_score=mean_average_precision(queries),
                recall_at_10=sum(recall_at_k(q, 10) for q in queries) / len(queries),
                recall_at_5=sum(recall_at_k(q, 5) for q in queries) / len(queries),
            )
        )
    return rows


def evaluate_run(
    artifact: dict,
    corpus: EnrichedCorpus,
    split: DataSplit,
    options: EvalOptions = EvalOptions(),
) -> EvalReport:
    """Score a run artifact against the corpus ground truth.

    Emits ranked metrics for the in-context lists and the merged lists, micro
    P/R/F1 for whatever method predictions the artifact holds, a classwise
    recall@10 table over merged lists, and (on request) the uncategorized
    comparison rows with secondary impacts included or excluded.
    """
    report = EvalReport()
    truth_index = corpus.mapping_index()
    mapping_types = [t for t in MappingType]
    if options.exclude_secondary:
        mapping_types = [t for t in mapping_types if t is not MappingType.SECONDARY_IMPACT]

    artifact_cves = artifact.get("cves", {})

    for method_key, lists_key in (("icl", "icl_lists"), ("combined", "merged_lists")):
        queries_by_key: dict[tuple[str, str], list[RankedQuery]] = {}
        for cve_id, body in artifact_cves.items():
            split_name = _split_name(cve_id, split)
            for mapping_type in mapping_types:
                slots = body.get(lists_key, {}).get(mapping_type.value)
                if slots is None:
                    continue
                truth = make_truth(truth_index.get((cve_id, mapping_type), set()))
                query = RankedQuery(
                    predicted=slots, truth=truth, cve_id=cve_id, mapping_type=mapping_type
                )
                queries_by_key.setdefault((mapping_type.value, split_name), []).append(query)
        report.ranked.extend(_ranked_rows(queries_by_key, method_key))

    # Unranked micro metrics over the method mappers, per method plus union.
    # Methods are only scored on mapping types their tables can produce.
    from .mappers import METHOD_MAPPING_TYPES

    method_names: list[str] = []
    for body in artifact_cves.values():
        for name in body.get("method_predictions", {}):
            if name not in method_names:
                method_names.append(name)
    for method_name in method_names + ["methodology-combined"]:
        relevant = METHOD_MAPPING_TYPES.get(method_name, tuple(MappingType))
        for mapping_type in mapping_types:
            if mapping_type not in relevant:
                continue
            grouped: dict[str, tuple[list, list]] = {}
            for cve_id, body in artifact_cves.items():
                split_name = _split_name(cve_id, split)
                if method_name == "methodology-combined":
                    predicted = body.get("methodology_aggregate", {}).get(mapping_type.value)
                else:
                    predicted = (
                        body.get("method_predictions", {})
                        .get(method_name, {})
                        .get(mapping_type.value)
                    )
                if predicted is None:
                    continue
                # An empty prediction means explicit abstention: score it as NONE.
                predicted_set = set(predicted) if predicted else {NONE_LABEL}
                truth = make_truth(truth_index.get((cve_id, mapping_type), set()))
                bucket = grouped.setdefault(split_name, ([], []))
                bucket[0].append(predicted_set)
                bucket[1].append(truth)
            for split_name, (predictions, truths) in sorted(grouped.items()):
                precision, recall, f1 = micro_prf(predictions, truths)
                report.unranked.append(
                    UnrankedMetricsRow(
                        mapping_type=mapping_type.value,
                        method=method_name,
                        split=split_name,
                        queries=len(predictions),
                        precision=precision,
                        recall=recall,
                        f1=f1,
                    )
                )

    # Classwise recall@10 over the merged lists.
    for mapping_type in mapping_types:
        for split_name in (SPLIT_TRAIN, SPLIT_TEST):
            queries = []
            for cve_id, body in artifact_cves.items():
                if _split_name(cve_id, split) != split_name:
                    continue
                slots = body.get("merged_lists", {}).get(mapping_type.value)
                if slots is None:
                    continue
                truth = make_truth(truth_index.get((cve_id, mapping_type), set()))
                queries.append(RankedQuery(predicted=slots, truth=truth))
            for entry in classwise_report(queries, k=10):
                report.classwise.append(
                    ClasswiseRow(
                        technique_id=entry.technique_id,
                        mapping_type=mapping_type.value,
                        split=split_name,
                        frequency=entry.frequency,
                        recall_at_10=entry.recall_at_k,
                    )
                )

    if options.uncategorized:
        for include_secondary in (True, False):
            rows = uncategorized_queries(artifact, corpus, split, include_secondary)
            report.uncategorized.extend(
                uncategorized_rows(rows, "pipeline", include_secondary)
            )

    return report


def uncategorized_queries(
    artifact: dict,
    corpus: EnrichedCorpus,
    split: DataSplit,
    include_secondary: bool,
) -> dict[str, list[RankedQuery]]:
    """Flatten each CVE's merged lists and pair them with the union truth.

    CVEs whose union truth is empty for the included mapping types are skipped;
    the uncategorized comparison has no NONE concept.
    """
    truth_index = corpus.mapping_index()
    included = [MappingType.EXPLOITATION_TECHNIQUE, MappingType.PRIMARY_IMPACT]
    if include_secondary:
        included.append(MappingType.SECONDARY_IMPACT)
    queries: dict[str, list[RankedQuery]] = {}
    for cve_id, body in artifact.get("cves", {}).items():
        lists = {
            mapping_type: body.get("merged_lists", {}).get(mapping_type.value, [])
            for mapping_type in MappingType
        }
        flattened = fusion.uncategorize(lists, include_secondary=include_secondary)
        truth_union: set[str] = set()
        for mapping_type in included:
            truth_union |= truth_index.get((cve_id, mapping_type), set())
        if not truth_union:
            continue
        queries.setdefault(_split_name(cve_id, split), []).append(
            RankedQuery(predicted=flattened, truth=frozenset(truth_union), cve_id=cve_id)
        )
    return queries


def uncategorized_rows(
    queries_by_split: dict[str, list[RankedQuery]], method: str, include_secondary: bool
) -> list[UncategorizedRow]:
    rows = []
    for split_name, queries in sorted(queries_by_split.items()):
        rows.append(
            UncategorizedRow(
                method=method,
                secondary_impacts="included" if include_secondary else "excluded",
                split=split_name,
                queries=len(queries),
                map_score=mean_average_precision(queries),
                recall_at_10=sum(recall_at_k(q, 10) for q in queries) / len(queries),
                recall_at_5=sum(recall_at_k(q, 5) for q in queries) / len(queries),
            )
        )
    return rows


def score_external_ranking(
    ranking_by_cve: dict[str, list[str]],
    artifact_cve_ids: Iterable[str],
    corpus: EnrichedCorpus,
    split: DataSplit,
    method: str,
) -> list[UncategorizedRow]:
    """Score an external tool's uncategorized per-CVE rankings under the same
    union ground truth, with and without secondary impacts."""
    truth_index = corpus.mapping_index()
    rows: list[UncategorizedRow] = []
    for include_secondary in (True, False):
        included = [MappingType.EXPLOITATION_TECHNIQUE, MappingType.PRIMARY_IMPACT]
        if include_secondary:
            included.append(MappingType.SECONDARY_IMPACT)
        queries: dict[str, list[RankedQuery]] = {}
        for cve_id in artifact_cve_ids:
            truth_union: set[str] = set()
            for mapping_type in included:
                truth_union |= truth_index.get((cve_id, mapping_type), set())
            if not truth_union:
                continue
            queries.setdefault(_split_name(cve_id, split), []).append(
                RankedQuery(
                    predicted=ranking_by_cve.get(cve_id, []),
                    truth=frozenset(truth_union),
                    cve_id=cve_id,
                )
            )
        rows.extend(uncategorized_rows(queries, method, include_secondary))
    return rows
