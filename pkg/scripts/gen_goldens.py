#!/usr/bin/env python3
"""Assemble the golden prompt files under tests/goldens/.

Deliberately independent of the package's prompt builders: every block is
reconstructed here with plain string handling straight from the raw data files
(rule tables JSON, mini corpus JSON, template text). The tests compare builder
output to these files byte for byte, so a bug would have to be introduced
twice, in two different shapes, to slip through.
"""

from __future__ import annotations

import json
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
TABLES = json.loads((ROOT / "src/cvemap/data/cmm_tables.json").read_text(encoding="utf-8"))
MINI = json.loads((ROOT / "tests/fixtures/mini_corpus.json").read_text(encoding="utf-8"))
TEMPLATES = ROOT / "src/cvemap/templates"
GOLDENS = ROOT / "tests/goldens"

TARGET = "CVE-2021-21975"
DEMO_IDS = ["CVE-2018-5555", "CVE-2020-2222"]

ET, PI, SI = "exploitation_technique", "primary_impact", "secondary_impact"


def template(name: str) -> str:
    return (TEMPLATES / f"{name}.txt").read_text(encoding="utf-8")


def target_description() -> str:
    return MINI["cves"][TARGET]["description"]


def write(name: str, content: str) -> None:
    GOLDENS.mkdir(exist_ok=True)
    (GOLDENS / name).write_text(content, encoding="utf-8")
    print(f"wrote tests/goldens/{name}")


def golden_vulnerability_type() -> None:
    rows = TABLES["vulnerability_types"]
    lines = []
    for position, row in enumerate(rows):
        head = "{  " if position == 0 else "   "
        tail = "," if position < len(rows) - 1 else ""
        lines.append(head + "'" + row["name"] + "': \"" + row["description"] + "\"" + tail)
    lines.append("}")
    text = template("vulnerability_type")
    text = text.replace("<VULNERABILITY-TYPES>", "\n".join(lines))
    text = text.replace("<CVE-DESCRIPTION>", target_description())
    write("vulnerability_type.txt", text)


def golden_functionality_delete_files() -> None:
    row = next(r for r in TABLES["functionalities"] if r["name"] == "Delete Files")
    # positives: train CVEs whose truth intersects the row's techniques; with the
    # mini corpus and the seed-7 80/20 split that is exactly CVE-2019-2000.
    positive_ids = ["CVE-2019-2000"]
    negative_ids = ["CVE-2018-5555", "CVE-2020-1111", "CVE-2020-2222", "CVE-2021-3333", "CVE-2022-4444"]
    positives = "\n".join("- " + MINI["cves"][c]["description"] for c in positive_ids)
    negatives = "\n".join("- " + MINI["cves"][c]["description"] for c in negative_ids)
    text = template("functionality")
    text = text.replace("<FUNCTIONALITY-DESCRIPTION>", row["description"])
    text = text.replace("<CVE-DESCRIPTION>", target_description())
    text = text.replace("<POSITIVE-EXAMPLES>", positives)
    text = text.replace("<NEGATIVE-EXAMPLES>", negatives)
    write("functionality_delete_files.txt", text)


def golden_exploitation() -> None:
    lines = []
    for number, question in enumerate(TABLES["exploitation_questions"], start=1):
        lines.append(f"{number}. {question['text']}")
    text = template("exploitation")
    text = text.replace("<CVE-DESCRIPTION>", target_description())
    text = text.replace("<QUESTIONS>", "\n".join(lines))
    write("exploitation.txt", text)


def golden_exploitation_sub() -> None:
    question = TABLES["exploitation_questions"][0]
    options = "[ " + ", ".join('"' + o + '"' for o in question["sub_question"]["options"]) + " ]"
    text = template("exploitation_sub")
    text = text.replace("<CVE-DESCRIPTION>", target_description())
    text = text.replace("<QUESTION>", question["text"])
    text = text.replace("<SUB-QUESTION>", question["sub_question"]["text"])
    text = text.replace("<OPTIONS>", options)
    write("exploitation_q1_sub.txt", text)


def golden_affected_object() -> None:
    objects = [
        {
            "affected_object": row["affected_object"],
            "description": row["description"],
            "examples": row["examples"],
            "exploitation_technique": row["exploitation_technique"],
        }
        for row in TABLES["affected_objects"]
    ]
    names = json.dumps([row["affected_object"] for row in TABLES["affected_objects"]])
    text = template("affected_object")
    text = text.replace("<CVE-DESCRIPTION>", target_description())
    text = text.replace("<AFFECTED-OBJECTS>", json.dumps(objects, indent=2))
    text = text.replace("<OBJECT-NAMES>", names)
    write("affected_object.txt", text)


def golden_tactic() -> None:
    block = "\n".join(f"{row['name']}: {row['description']}" for row in TABLES["tactics"])
    text = template("tactic")
    text = text.replace("<CVE-DESCRIPTION>", target_description())
    text = text.replace("<TACTICS>", block)
    write("tactic.txt", text)


def csv_field(value: str) -> str:
    if any(ch in value for ch in ',"\r\n'):
        return '"' + value.replace('"', '""') + '"'
    return value


def mini_truth(cve_id: str) -> dict[str, list[str]]:
    by_type: dict[str, list[str]] = {ET: [], PI: [], SI: []}
    for mapping in MINI["mappings"]:
        if mapping["cve_id"] == cve_id:
            by_type[mapping["mapping_type"]].append(mapping["technique_id"])
    return {key: sorted(ids) for key, ids in by_type.items()}


def golden_icl() -> None:
    catalog_lines = ["attack_id,attack_name,attack_description"]
    for technique_id in sorted(MINI["techniques"]):
        body = MINI["techniques"][technique_id]
        catalog_lines.append(
            ",".join(
                csv_field(field)
                for field in (technique_id, body["name"], body["description"])
            )
        )
    catalog_csv = "\n".join(catalog_lines)

    demos: dict[str, dict] = {}
    for cve_id in DEMO_IDS:
        truth = mini_truth(cve_id)
        demos[cve_id] = {
            "description": MINI["cves"][cve_id]["description"],
            "attack_techniques": {
                mapping_type: [
                    f"{technique_id}: {MINI['techniques'][technique_id]['name']}"
                    for technique_id in truth[mapping_type]
                ]
                for mapping_type in (ET, PI, SI)
            },
        }
    demonstrations = json.dumps(demos, indent=2, ensure_ascii=False)

    target = MINI["cves"][TARGET]
    cwe_block = (
        "The following CWE applies to this vulnerability:\n"
        + target["cwe_id"] + ": " + target["cwe_description"] + "\n"
    )
    cvss_lines = "\n".join(f"- {key}: {value}" for key, value in target["cvss"].items())
    cvss_block = "The CVE has the following CVSS features:\n----\n" + cvss_lines + "\n----\n"

    for mapping_type in (ET, PI, SI):
        phrase = mapping_type.replace("_", " ")
        text = template("icl")
        text = text.replace("<MAPPING-TYPE>", phrase)
        text = text.replace("<CVE-DESCRIPTION>", target["description"])
        text = text.replace("<TECHNIQUE-CSV>", catalog_csv)
        text = text.replace("<CWE-BLOCK>", cwe_block)
        text = text.replace("<CVSS-BLOCK>", cvss_block)
        text = text.replace("<DEMONSTRATIONS>", demonstrations)
        write(f"icl_{mapping_type}.txt", text)


def main() -> None:
    golden_vulnerability_type()
    golden_functionality_delete_files()
    golden_exploitation()
    golden_exploitation_sub()
    golden_affected_object()
    golden_tactic()
    golden_icl()


if __name__ == "__main__":
    main()
