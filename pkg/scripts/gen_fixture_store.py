#!/usr/bin/env python3
"""Record a deterministic response store for the demo pipeline.

Plays the model side of every request the demo run and the default ablation
plan will issue: builds the exact prompts the pipeline builds, derives a
plausible response for each from the corpus ground truth (with a pinch of
seeded noise so evaluation scores stay strictly between 0 and 1), and writes
them into data/fixtures keyed by request digest. Rerun after changing prompt
templates, the rule tables, the dataset, or the demo config.
"""

from __future__ import annotations

import hashlib
import json
import random
import shutil
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from cvemap import corpus as corpus_mod  # noqa: E402
from cvemap import gateway as gw  # noqa: E402
from cvemap import icl, mappers, rules  # noqa: E402
from cvemap.cli import ablation_sample, config_features  # noqa: E402
from cvemap.types import MappingType  # noqa: E402

DATA = ROOT / "data"
FIXTURES = DATA / "fixtures"
DEMO_CVE_COUNT = 20


def load_corpus_from_sources():
    kev = corpus_mod.parse_kev_mappings((DATA / "kev_mappings.csv").read_bytes(), "csv")
    nvd, _ = corpus_mod.parse_nvd_records((DATA / "nvd_feed.json").read_bytes())
    attack = corpus_mod.parse_attack_bundle((DATA / "attack_bundle.json").read_bytes())
    cwe = corpus_mod.parse_cwe_catalog((DATA / "cwe_catalog.csv").read_bytes())
    corpus, unresolved = corpus_mod.enrich(kev, nvd, attack, cwe)
    assert not unresolved
    return corpus


def stable_hash(label: str) -> int:
    return int(hashlib.sha256(label.encode("utf-8")).hexdigest(), 16)


class Recorder:
    def __init__(self, store: Path):
        self.store = store
        self.count = 0

    def record(self, request: gw.ChatRequest, text: str) -> None:
        digest = gw.request_digest(request)
        response = gw.ChatResponse(
            text=text,
            input_token_count=gw.estimate_token_count(request.system_text + request.user_text),
            output_token_count=gw.estimate_token_count(text),
            latency_s=0.0,
            backend_id="recorded:sample",
        )
        gw.write_stored_response(self.store, digest, response)
        self.count += 1


def vuln_type_answer(cve, tables) -> str:
    if cve.cwe_id:
        for row in tables.vulnerability_types:
            if cve.cwe_id in row.cwe_ids:
                return row.name
    return "N/A"


def exploitation_answers(cve_id, truth_et, tables):
    """Numbered YES/NO lines plus the sub-answers the runner will ask for."""
    lines = []
    subs: dict[str, str] = {}
    for index, question in enumerate(tables.exploitation_questions, start=1):
        yes = bool(set(question.answers["yes"]) & truth_et)
        lines.append(f"{index}. {'YES' if yes else 'NO'}")
        if yes and question.sub_question is not None:
            chosen = "Other"
            for option in question.sub_question.options:
                if option != "Other" and set(question.answers[option]) & truth_et:
                    chosen = option
                    break
            subs[question.id] = chosen
    return "\n".join(lines), subs


def affected_object_answer(truth_et, tables) -> str:
    for row in tables.affected_objects:
        if set(row.techniques) & truth_et:
            return row.name
    return "N/A"


def icl_answer(
    cve_id: str,
    mapping_type: MappingType,
    truth: set[str],
    catalog_ids: list[str],
    noise: int = 0,
) -> str:
    """Truth-informed ranked list with seeded imperfections.

    ``noise`` grows as demonstrations shrink: more fillers land ahead of the
    truth and more truth entries drop off, so ablation rows with fewer
    demonstrations evaluate strictly worse.
    """
    h = stable_hash(f"icl:{cve_id}:{mapping_type.value}")
    rng = random.Random(h)
    fillers = [t for t in catalog_ids if t not in truth]
    rng.shuffle(fillers)
    entries: list[str | None]
    if not truth:
        if noise >= 2 and h % 2 == 0:
            entries = list(fillers[:10])
        else:
            entries = list(fillers[:9])
            entries.insert(h % 3, None)
        return icl.render_ranked_list(entries)
    entries = sorted(truth)
    ahead = (1 if h % 4 == 0 else 0) + noise
    for _ in range(ahead):
        entries.insert(0, fillers.pop(0))
    if h % 5 == 0 and len(entries) > ahead + 1:
        entries.pop()
    if noise >= 1 and h % 3 == 0 and len(entries) > ahead + 1:
        entries.pop()
    while len(entries) < 10:
        entries.append(fillers.pop(0))
    return icl.render_ranked_list(entries[:10])


def tactic_answer(truth_et, tables) -> str:
    names = [row.name for row in tables.tactics if set(row.techniques) & truth_et]
    return ", ".join(names) if names else "N/A"


def record_cve_methods(recorder, cve, tables, truth_all, truth_et, corpus, split, seed, defaults):
    prompt = mappers.build_vuln_type_prompt(cve, tables)
    recorder.record(defaults.request(prompt), vuln_type_answer(cve, tables))

    top_prompt = mappers.build_exploitation_prompt(cve, tables)
    top_answer, subs = exploitation_answers(cve.id, truth_et, tables)
    recorder.record(defaults.request(top_prompt), top_answer)
    for question in tables.exploitation_questions:
        if question.id in subs:
            sub_prompt = mappers.build_exploitation_sub_prompt(cve, question)
            recorder.record(defaults.request(sub_prompt), subs[question.id])

    object_prompt = mappers.build_affected_object_prompt(cve, tables)
    recorder.record(defaults.request(object_prompt), affected_object_answer(truth_et, tables))

    # functionality and tactic stay out of the default hybrid but remain
    # runnable for standalone unranked evaluation; record their prompts too
    for name, prompt in mappers.build_functionality_prompts(
        cve, tables, corpus, split, k_pos=3, k_neg=3, seed=seed
    ):
        row = tables.functionality(name)
        row_techniques = {t for ids in row.techniques.values() for t in ids}
        verdict = "YES" if row_techniques & truth_all else "NO"
        recorder.record(defaults.request(prompt), verdict)

    tactic_prompt = mappers.build_tactic_prompt(cve, tables)
    recorder.record(defaults.request(tactic_prompt), tactic_answer(truth_et, tables))


def noise_for(num_demonstrations):
    if num_demonstrations is None or num_demonstrations >= 5:
        return 0
    return 1 if num_demonstrations >= 1 else 2


def record_icl(recorder, cve, mapping_type, features, demonstrations, corpus, truth, icl_defaults):
    prompt = icl.build_icl_prompt(
        cve, mapping_type, features, demonstrations, icl.catalog_from_corpus(corpus)
    )
    catalog_ids = [t.id for t in icl.catalog_from_corpus(corpus)]
    noise = noise_for(features.num_demonstrations)
    recorder.record(
        icl_defaults.request(prompt), icl_answer(cve.id, mapping_type, truth, catalog_ids, noise)
    )


def main() -> None:
    config = json.loads((DATA / "run_config.json").read_text(encoding="utf-8"))
    plan = json.loads((DATA / "ablation_plan.json").read_text(encoding="utf-8"))

    if FIXTURES.exists():
        shutil.rmtree(FIXTURES)
    FIXTURES.mkdir(parents=True)

    corpus = load_corpus_from_sources()
    tables = rules.load_default_tables()
    split = corpus_mod.split_corpus(corpus, config["split"]["ratio"], config["split"]["seed"])
    truth_index = corpus.mapping_index()

    defaults = mappers.RequestDefaults(
        model_name=config["model"],
        temperature=config["temperature"],
        max_output_tokens=config["max_output_tokens"],
    )
    icl_defaults = mappers.RequestDefaults(
        model_name=config["model"],
        temperature=config["temperature"],
        max_output_tokens=config["max_output_tokens"],
        system_text=icl.icl_system_text(),
    )

    recorder = Recorder(FIXTURES)

    # demo mapping run: first N test CVEs, demo feature set
    features = config_features(config)
    demonstrations = icl.select_demonstrations(
        split, corpus, features.num_demonstrations, config["seed"]
    )
    demo_cves = sorted(split.test_cve_ids)[:DEMO_CVE_COUNT]
    for cve_id in demo_cves:
        cve = corpus.cves[cve_id]
        truth_et = truth_index.get((cve_id, MappingType.EXPLOITATION_TECHNIQUE), set())
        truth_all = set()
        for mapping_type in MappingType:
            truth_all |= truth_index.get((cve_id, mapping_type), set())
        record_cve_methods(
            recorder, cve, tables, truth_all, truth_et, corpus, split, config["seed"], defaults
        )
        for mapping_type in MappingType:
            truth = truth_index.get((cve_id, mapping_type), set())
            record_icl(
                recorder, cve, mapping_type, features, demonstrations, corpus, truth, icl_defaults
            )

    # external comparison file: a noisier uncategorized ranking per demo CVE,
    # in the (cve_id, rank, technique_id) CSV bridge format
    catalog_ids = [t.id for t in icl.catalog_from_corpus(corpus)]
    with open(DATA / "external_predictions.csv", "w", encoding="utf-8", newline="") as handle:
        import csv as csv_mod

        writer = csv_mod.writer(handle, lineterminator="\n")
        writer.writerow(["cve_id", "rank", "technique_id"])
        for cve_id in demo_cves:
            truth_union: set[str] = set()
            for mapping_type in MappingType:
                truth_union |= truth_index.get((cve_id, mapping_type), set())
            rng = random.Random(stable_hash(f"external:{cve_id}"))
            fillers = [t for t in catalog_ids if t not in truth_union]
            rng.shuffle(fillers)
            found = [t for t in sorted(truth_union) if rng.random() < 0.6]
            ranking = fillers[:2] + found
            ranking += [t for t in fillers[2:] if t not in ranking]
            for rank, technique_id in enumerate(ranking[:10], start=1):
                writer.writerow([cve_id, rank, technique_id])

    # ablation plan rows over the plan's seeded sample
    sampled = ablation_sample(corpus, plan["sample_size"], plan["seed"])
    for row in plan["rows"]:
        row_features = icl.IclFeatures(
            include_attack_descriptions=row["features"].get("include_attack_descriptions", True),
            include_cvss=row["features"].get("include_cvss", True),
            include_cwe=row["features"].get("include_cwe", True),
            num_demonstrations=row.get("num_demonstrations"),
        )
        row_demos = icl.select_demonstrations(
            split, corpus, row_features.num_demonstrations, config["seed"]
        )
        for cve_id in sampled:
            cve = corpus.cves[cve_id]
            for mapping_type in MappingType:
                truth = truth_index.get((cve_id, mapping_type), set())
                record_icl(
                    recorder, cve, mapping_type, row_features, row_demos, corpus, truth, icl_defaults
                )

    print(f"recorded {recorder.count} response(s) into {FIXTURES}")


if __name__ == "__main__":
    main()
