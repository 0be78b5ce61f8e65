"""Combine the method mappers' aggregate with the in-context ranked lists.

The merge walks the in-context list from the last position upward, overwriting
the lowest-ranked slots with novel table-derived techniques while never
touching a NONE slot, so high-ranked in-context predictions and explicit NONE
markers always survive. A flattening step interleaves the three per-type lists
into a single uncategorized ranking for cross-tool comparison.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import icl as icl_mod
from . import mappers as mappers_mod
from .corpus import DataSplit, EnrichedCorpus
from .gateway import Gateway
from .types import CveRecord, MappingType, NONE_LABEL, PAD_LABEL, RankedList

PROVENANCE_ICL = "ICL"
PROVENANCE_MM = "MM"
PROVENANCE_NONE = "NONE"
PROVENANCE_PAD = "PAD"


def merge_ranked(icl_list: RankedList, mm: list[str]) -> RankedList:
    """Merge table-derived predictions into an in-context ranked list.

    Novel entries (absent from the in-context technique slots) overwrite the
    lowest-ranked writable slots: positions are taken from the last index
    upward, skipping NONE slots, limited to the number of novel entries. Among
    the selected positions the first novel entry takes the best (lowest) index,
    preserving table-order priority. Leftover novel entries are dropped.
    """
    existing = set(icl_list.techniques())
    novel = [t for t in mm if t not in existing]
    slots = list(icl_list.slots)
    writable = [i for i in range(len(slots) - 1, -1, -1) if slots[i] != NONE_LABEL]
    positions = sorted(writable[: len(novel)])
    for technique_id, position in zip(novel, positions):
        slots[position] = technique_id
    return RankedList.of(slots)


def slot_provenance(merged: RankedList, icl_list: RankedList) -> list[str]:
    """Per-slot origin of a merged list: ICL, MM, NONE, or PAD."""
    icl_techniques = set(icl_list.techniques())
    provenance = []
    for slot in merged.slots:
        if slot == NONE_LABEL:
            provenance.append(PROVENANCE_NONE)
        elif slot == PAD_LABEL:
            provenance.append(PROVENANCE_PAD)
        elif slot in icl_techniques:
            provenance.append(PROVENANCE_ICL)
        else:
            provenance.append(PROVENANCE_MM)
    return provenance


@dataclass
class CombinedPrediction:
    """Final per-CVE prediction: one merged ranked list per mapping type."""

    cve_id: str
    lists: dict[MappingType, RankedList]
    provenance: dict[MappingType, list[str]]


@dataclass
class PredictionTrace:
    """Everything observed while predicting one CVE, for the run artifact."""

    prediction: CombinedPrediction
    prompts: dict[str, str] = field(default_factory=dict)
    responses: dict[str, str] = field(default_factory=dict)
    method_predictions: dict[str, dict[str, list[str]]] = field(default_factory=dict)
    methodology_aggregate: dict[str, list[str]] = field(default_factory=dict)
    icl_lists: dict[str, list[str]] = field(default_factory=dict)
    errors: list[str] = field(default_factory=list)


def predict_cve(
    gateway: Gateway,
    cve: CveRecord,
    tables,
    corpus: EnrichedCorpus,
    split: DataSplit,
    features: icl_mod.IclFeatures,
    defaults: mappers_mod.RequestDefaults,
    selected_methods: tuple[mappers_mod.Method, ...] = mappers_mod.DEFAULT_HYBRID_METHODS,
    seed: int = 0,
    demonstrations: list[icl_mod.Demonstration] | None = None,
    icl_defaults: mappers_mod.RequestDefaults | None = None,
) -> PredictionTrace:
    """Run the selected method mappers and the in-context route for one CVE
    and merge them per mapping type. Component failures are recorded and the
    failing component contributes nothing."""
    method_results = []
    trace_prompts: dict[str, str] = {}
    trace_responses: dict[str, str] = {}
    errors: list[str] = []
    method_predictions: dict[str, dict[str, list[str]]] = {}

    for method in mappers_mod.METHOD_ORDER:
        if method not in selected_methods:
            continue
        result = mappers_mod.run_method(
            gateway, method, cve, tables, defaults, corpus=corpus, split=split, seed=seed
        )
        method_results.append(result.prediction)
        trace_prompts.update(result.prompts)
        trace_responses.update(result.responses)
        errors.extend(result.errors)
        method_predictions[method.value] = {
            t.value: list(ids) for t, ids in result.prediction.techniques.items()
        }

    aggregate = mappers_mod.aggregate_methodology(method_results, selected_methods)

    if icl_defaults is None:
        icl_defaults = mappers_mod.RequestDefaults(
            model_name=defaults.model_name,
            temperature=defaults.temperature,
            max_output_tokens=defaults.max_output_tokens,
            system_text=icl_mod.icl_system_text(),
        )

    lists: dict[MappingType, RankedList] = {}
    provenance: dict[MappingType, list[str]] = {}
    icl_lists: dict[str, list[str]] = {}
    for mapping_type in MappingType:
        icl_result = icl_mod.run_icl(
            gateway, cve, mapping_type, features, split, corpus, icl_defaults,
            seed=seed, demonstrations=demonstrations,
        )
        trace_prompts.update(icl_result.prompts)
        trace_responses.update(icl_result.responses)
        errors.extend(icl_result.errors)
        icl_lists[mapping_type.value] = list(icl_result.ranked.slots)
        merged = merge_ranked(icl_result.ranked, aggregate[mapping_type])
        lists[mapping_type] = merged
        provenance[mapping_type] = slot_provenance(merged, icl_result.ranked)

    prediction = CombinedPrediction(cve_id=cve.id, lists=lists, provenance=provenance)
    return PredictionTrace(
        prediction=prediction,
        prompts=trace_prompts,
        responses=trace_responses,
        method_predictions=method_predictions,
        methodology_aggregate={t.value: list(ids) for t, ids in aggregate.items()},
        icl_lists=icl_lists,
        errors=errors,
    )


def uncategorize(
    lists: dict[MappingType, RankedList] | dict[MappingType, list[str]],
    include_secondary: bool = True,
) -> list[str]:
    """Flatten per-type ranked lists into one ranking by round-robin popping
    the top of each list (exploitation, primary, then secondary when included).
    NONE and PAD slots are discarded; duplicates keep their first position."""
    order = [MappingType.EXPLOITATION_TECHNIQUE, MappingType.PRIMARY_IMPACT]
    if include_secondary:
        order.append(MappingType.SECONDARY_IMPACT)
    queues = []
    for mapping_type in order:
        slots = lists.get(mapping_type)
        queues.append(list(slots) if slots is not None else [])

    flattened: list[str] = []
    seen: set[str] = set()
    while any(queues):
        for queue in queues:
            while queue:
                entry = queue.pop(0)
                if entry in (NONE_LABEL, PAD_LABEL):
                    continue
                if entry not in seen:
                    seen.add(entry)
                    flattened.append(entry)
                break
    return flattened


# ---------------------------------------------------------------------------
# Run artifact
# ---------------------------------------------------------------------------


def build_run_artifact(
    traces: dict[str, PredictionTrace],
    config_document: dict,
    config_digest: str,
    corpus_digest: str,
    usage: dict,
) -> dict:
    """Assemble the per-run JSON document. Key order is stable so reruns with
    the recorded backend are byte-identical."""
    cves = {}
    for cve_id in sorted(traces):
        trace = traces[cve_id]
        cves[cve_id] = {
            "prompts": trace.prompts,
            "responses": trace.responses,
            "method_predictions": trace.method_predictions,
            "methodology_aggregate": trace.methodology_aggregate,
            "icl_lists": trace.icl_lists,
            "merged_lists": {
                t.value: list(ranked.slots) for t, ranked in trace.prediction.lists.items()
            },
            "provenance": {
                t.value: list(p) for t, p in trace.prediction.provenance.items()
            },
            "errors": sorted(trace.errors),
        }
    return {
        "config": config_document,
        "config_digest": config_digest,
        "corpus_digest": corpus_digest,
        "cves": cves,
        "usage": usage,
    }


def dump_artifact(artifact: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(artifact, handle, indent=2, sort_keys=True, ensure_ascii=False)
        handle.write("\n")


def load_artifact(path) -> dict:
    with open(path, encoding="utf-8") as handle:
        return json.load(handle)
