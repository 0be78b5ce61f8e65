#!/usr/bin/env python3
"""Generate the sample dataset under data/.

The generated corpus mirrors the published shape of the labeled KEV mapping
dataset: 296 CVEs, 806 mappings (306 exploitation / 256 primary / 244
secondary), with 14/34/58 mappings per type referring to techniques outside
the shipped method tables, and 11 of 15 / 16 of 24 / 14 of 18 table techniques
actually used. Four publicly analyzed CVEs are embedded verbatim. Everything
is seeded; rerunning the script reproduces the files byte for byte.
"""

from __future__ import annotations

import csv
import io
import json
import random
import sys
import uuid
from collections import Counter
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))
from technique_catalog import REVOKED, SUBTECHNIQUES, TECHNIQUES  # noqa: E402

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "data"
TABLES_PATH = ROOT / "src" / "cvemap" / "data" / "cmm_tables.json"

SEED = "sample-dataset-v1"

ET, PI, SI = "exploitation_technique", "primary_impact", "secondary_impact"

# Published dataset shape.
TOTALS = {ET: 306, PI: 256, SI: 244}
OUTSIDE = {ET: 14, PI: 34, SI: 58}
USED_DISTINCT = {ET: 11, PI: 16, SI: 14}
TOTAL_CVES = 296

PAPER_CVES = {
    "CVE-2018-4939": {
        "description": (
            "Adobe ColdFusion Update 5 and earlier versions, ColdFusion 11 Update 13 and earlier "
            "versions have an exploitable Deserialization of Untrusted Data vulnerability. "
            "Successful exploitation could lead to arbitrary code execution."
        ),
        "cwe": "CWE-502",
        "cvss": {"v2": ("NETWORK", 10.0), "v3": ("NETWORK", 9.8)},
        "mappings": {ET: ["T1203"], PI: ["T1190", "T1133"], SI: []},
    },
    "CVE-2021-40539": {
        "description": (
            "Zoho ManageEngine ADSelfService Plus version 6113 and prior is vulnerable to REST API "
            "authentication bypass with resultant remote code execution."
        ),
        "cwe": "CWE-287",
        "cvss": {"v2": ("NETWORK", 7.5), "v3": ("NETWORK", 9.8)},
        "mappings": {
            ET: ["T1190"],
            PI: ["T1505"],
            SI: [
                "T1573", "T1560", "T1087", "T1070", "T1047", "T1003",
                "T1136", "T1218", "T1140", "T1027", "T1505",
            ],
        },
    },
    "CVE-2022-34713": {
        "description": (
            "Microsoft Windows Support Diagnostic Tool (MSDT) Remote Code Execution Vulnerability"
        ),
        "cwe": None,
        "cvss": {"v3": ("LOCAL", 7.8)},
        "mappings": {ET: ["T1566"], PI: ["T1204"], SI: ["T1059"]},
    },
    "CVE-2021-21975": {
        "description": (
            "Server Side Request Forgery in vRealize Operations Manager API (CVE-2021-21975) prior "
            "to 8.4 may allow a malicious actor with network access to the vRealize Operations "
            "Manager API can perform a Server Side Request Forgery attack to steal administrative "
            "credentials."
        ),
        "cwe": "CWE-918",
        "cvss": {"v2": ("NETWORK", 7.5), "v3": ("NETWORK", 8.6)},
        "mappings": {ET: ["T1190"], PI: [], SI: []},
    },
}

# Techniques from the tables that the dataset actually uses, per mapping type.
USED_INSIDE = {
    ET: ["T1040", "T1059", "T1068", "T1078", "T1133", "T1189", "T1190", "T1203", "T1204", "T1210", "T1566"],
    PI: ["T1003", "T1005", "T1059", "T1068", "T1078", "T1136", "T1485", "T1489", "T1490", "T1496", "T1499", "T1505", "T1552", "T1554", "T1565", "T1574"],
    SI: ["T1003", "T1005", "T1059", "T1068", "T1070", "T1078", "T1098", "T1486", "T1489", "T1490", "T1499", "T1505", "T1552", "T1565"],
}

# Filler frequency targets for in-table techniques (paper CVEs come on top).
INSIDE_FILLER = {
    ET: {
        "T1190": 100, "T1204": 30, "T1203": 25, "T1566": 25, "T1078": 25,
        "T1133": 20, "T1189": 18, "T1059": 15, "T1210": 12, "T1040": 10, "T1068": 8,
    },
    PI: {
        "T1059": 60, "T1505": 35, "T1068": 25, "T1078": 20, "T1552": 15, "T1005": 14,
        "T1485": 10, "T1499": 10, "T1490": 6, "T1136": 5, "T1489": 5, "T1496": 4,
        "T1565": 4, "T1003": 4, "T1554": 2, "T1574": 2,
    },
    SI: {
        "T1059": 35, "T1078": 30, "T1005": 25, "T1552": 18, "T1486": 15, "T1499": 14,
        "T1490": 10, "T1489": 8, "T1003": 8, "T1070": 6, "T1068": 5, "T1505": 4,
        "T1098": 2, "T1565": 2,
    },
}

# Filler frequency targets for out-of-table techniques. The primary-impact
# numbers keep T1190 at three and T1204 at two total occurrences as primary
# impact (one each coming from the embedded CVEs), and T1133 at exactly one.
OUTSIDE_FILLER = {
    ET: {"T1195": 5, "T1199": 5, "T1557": 4},
    PI: {"T1190": 2, "T1204": 1, "T1021": 8, "T1105": 6, "T1027": 4, "T1219": 4, "T1140": 3, "T1573": 3},
    SI: {"T1573": 8, "T1087": 6, "T1136": 6, "T1027": 6, "T1560": 5, "T1218": 5, "T1047": 4, "T1140": 4, "T1113": 3, "T1557": 3},
}

# Per-CVE mapping-count histograms for the synthetic CVEs (paper CVEs fixed).
SYNTH_COUNT_BUCKETS = {
    ET: [(0, 4), (1, 276), (2, 10), (3, 2)],
    PI: [(0, 57), (1, 220), (2, 13), (3, 2)],
    SI: [(0, 168), (1, 79), (2, 30), (3, 12), (19, 3)],
}

PRODUCTS = [
    "Acme Gateway", "BlueFin CMS", "CortexDB", "DataBridge Server", "EdgeRouter X12",
    "FleetManager Pro", "GridWatch SCADA", "HelioMail", "InsightPortal", "JetStore",
    "KiteVPN", "LedgerWorks", "MetroHR Suite", "NimbusShare", "OrionBackup",
    "PulseMonitor", "QuantaPrint", "RelayChat", "StackForge CI", "TerraMap Viewer",
    "UnityDesk", "VaultKeeper", "WaveSync", "XenoCloud Manager", "YieldTrack",
    "ZephyrProxy", "AppTrack Agent", "BorderControl FW", "CacheGrid", "DocFlow",
]

FLAVORS = [
    ("SQL Injection", "CWE-89", "{product} {version} is vulnerable to SQL injection via the {param} parameter, allowing remote attackers to execute arbitrary SQL commands."),
    ("OS Command Injection", "CWE-78", "{product} {version} allows remote attackers to execute arbitrary OS commands via shell metacharacters in the {param} parameter."),
    ("Deserialization of Untrusted Data", "CWE-502", "{product} {version} deserializes untrusted data received on the management port, which allows remote attackers to execute arbitrary code."),
    ("Cross-site Scripting", "CWE-79", "A cross-site scripting vulnerability in {product} {version} allows remote attackers to inject arbitrary web script via the {param} field."),
    ("Path Traversal", "CWE-22", "A directory traversal vulnerability in {product} {version} allows remote attackers to read arbitrary files via a crafted {param} parameter."),
    ("Server Side Request Forgery", "CWE-918", "{product} {version} contains a server-side request forgery in the {param} endpoint that lets remote attackers reach internal services."),
    ("Buffer Overflow", "CWE-120", "A buffer overflow in {product} {version} allows remote attackers to execute arbitrary code via a crafted request to the {param} service."),
    ("Use After Free", "CWE-416", "A use-after-free flaw in {product} {version} could allow an attacker to execute arbitrary code when a user opens a crafted file."),
    ("Improper Authentication", "CWE-287", "{product} {version} is vulnerable to an authentication bypass in the REST API which can result in remote code execution."),
    ("Missing Authentication for Critical Function", "CWE-306", "The administrative interface of {product} {version} does not require authentication, allowing remote attackers to change the configuration."),
    ("Use of Default Credentials", "CWE-798", "{product} {version} ships with default credentials that allow remote attackers to log in as an administrator."),
    ("Unrestricted File Upload", "CWE-434", "{product} {version} allows authenticated users to upload files of arbitrary types, which can result in remote code execution via a crafted web shell."),
    ("Improper Privilege Management", "CWE-269", "A local privilege escalation vulnerability exists in {product} {version} due to improper privilege handling in the {param} service."),
    ("Untrusted Search Path", "CWE-426", "An untrusted search path in {product} {version} allows local attackers to execute arbitrary code via a malicious library planted in the application directory."),
    ("Cleartext Transmission of Sensitive Information", "CWE-319", "{product} {version} transmits credentials in cleartext, allowing a network attacker to capture them by sniffing traffic."),
    ("XML External Entity Processing", "CWE-611", "An XML external entity flaw in {product} {version} allows remote attackers to read local files via a crafted XML document sent to the {param} endpoint."),
    ("Improper Input Validation", "CWE-20", "Improper input validation in {product} {version} allows remote attackers to trigger memory corruption and execute code via the {param} interface."),
    ("Code Injection", "CWE-94", "A code injection vulnerability in the template engine of {product} {version} allows remote attackers to run arbitrary code."),
    ("Uncontrolled Resource Consumption", "CWE-400", "{product} {version} allows remote attackers to cause a denial of service through resource exhaustion in the {param} handler."),
    ("Incorrect Permission Assignment", "CWE-732", "{product} {version} sets world-writable permissions on its configuration directory, allowing local users to modify sensitive files."),
]

PARAMS = ["id", "search", "file", "path", "url", "name", "query", "callback", "page", "template"]


def rng_for(label: str) -> random.Random:
    return random.Random(f"{SEED}:{label}")


def synth_cve_ids() -> list[str]:
    rng = rng_for("cve-ids")
    ids: set[str] = set()
    years = list(range(2014, 2024))
    while len(ids) < TOTAL_CVES - len(PAPER_CVES):
        year = rng.choice(years)
        number = rng.randint(1000, 42000)
        cve_id = f"CVE-{year}-{number}"
        if cve_id not in PAPER_CVES:
            ids.add(cve_id)
    return sorted(ids)


def expand_counts(buckets: list[tuple[int, int]], rng: random.Random, cve_ids: list[str]) -> dict[str, int]:
    counts: list[int] = []
    for value, how_many in buckets:
        counts.extend([value] * how_many)
    assert len(counts) == len(cve_ids), (len(counts), len(cve_ids))
    rng.shuffle(counts)
    return dict(zip(cve_ids, counts))


def build_pool(mapping_type: str, rng: random.Random) -> list[str]:
    pool: list[str] = []
    for technique_id, count in sorted(INSIDE_FILLER[mapping_type].items()):
        pool.extend([technique_id] * count)
    for technique_id, count in sorted(OUTSIDE_FILLER[mapping_type].items()):
        pool.extend([technique_id] * count)
    rng.shuffle(pool)
    return pool


def assign_mappings() -> dict[str, dict[str, list[str]]]:
    """Assign techniques to every CVE per mapping type, honoring all totals."""
    synth_ids = synth_cve_ids()
    mappings: dict[str, dict[str, list[str]]] = {
        cve_id: {ET: [], PI: [], SI: []} for cve_id in list(PAPER_CVES) + synth_ids
    }
    for cve_id, spec in PAPER_CVES.items():
        for mapping_type, ids in spec["mappings"].items():
            mappings[cve_id][mapping_type] = list(dict.fromkeys(ids))

    counts_by_type = _assign_counts(synth_ids)
    for mapping_type in (ET, PI, SI):
        assigned = None
        for salt in range(50):
            assigned = _try_assign(mapping_type, synth_ids, counts_by_type[mapping_type], salt)
            if assigned is not None:
                break
        if assigned is None:
            raise AssertionError(f"could not place pool for {mapping_type}")
        for cve_id, picked in assigned.items():
            mappings[cve_id][mapping_type] = picked
    return mappings


def _assign_counts(synth_ids: list[str]) -> dict[str, dict[str, int]]:
    """Deal the per-type count histograms onto CVEs so that every CVE ends up
    with at least one mapping overall (otherwise it would vanish from the
    dataset file and the distinct-CVE total would drop)."""
    for salt in range(100):
        counts_by_type = {
            mapping_type: expand_counts(
                SYNTH_COUNT_BUCKETS[mapping_type],
                rng_for(f"counts:{mapping_type}:{salt}"),
                synth_ids,
            )
            for mapping_type in (ET, PI, SI)
        }
        if all(
            any(counts_by_type[mapping_type][cve_id] for mapping_type in (ET, PI, SI))
            for cve_id in synth_ids
        ):
            return counts_by_type
    raise AssertionError("could not find an all-covering count assignment")


def _try_assign(
    mapping_type: str, synth_ids: list[str], counts: dict[str, int], salt: int
) -> dict[str, list[str]] | None:
    """One seeded attempt at dealing the technique pool onto the CVE slots.

    CVEs with the largest needs draw first, while pool diversity is highest.
    Returns None when duplicate-avoidance strands leftover entries.
    """
    pool = build_pool(mapping_type, rng_for(f"pool:{mapping_type}:{salt}"))
    assigned: dict[str, list[str]] = {}
    for cve_id in sorted(synth_ids, key=lambda c: (-counts[c], c)):
        need = counts[cve_id]
        picked: list[str] = []
        index = 0
        while len(picked) < need:
            if index >= len(pool):
                return None
            candidate = pool[index]
            if candidate in picked:
                index += 1
                continue
            pool.pop(index)
            picked.append(candidate)
            index = 0
        assigned[cve_id] = picked
    return assigned if not pool else None


def validate(mappings: dict[str, dict[str, list[str]]], table_sets: dict[str, set[str]]) -> None:
    assert len(mappings) == TOTAL_CVES
    for mapping_type in (ET, PI, SI):
        rows = [
            (cve_id, technique_id)
            for cve_id, by_type in mappings.items()
            for technique_id in by_type[mapping_type]
        ]
        assert len(rows) == TOTALS[mapping_type], (mapping_type, len(rows))
        assert len(set(rows)) == len(rows), f"duplicate triple in {mapping_type}"
        outside = [r for r in rows if r[1] not in table_sets[mapping_type]]
        assert len(outside) == OUTSIDE[mapping_type], (mapping_type, len(outside))
        used = {r[1] for r in rows if r[1] in table_sets[mapping_type]}
        assert used == set(USED_INSIDE[mapping_type]), (
            mapping_type, sorted(used ^ set(USED_INSIDE[mapping_type]))
        )
        assert len(used) == USED_DISTINCT[mapping_type]
    pi_counts = Counter(
        technique_id for by_type in mappings.values() for technique_id in by_type[PI]
    )
    assert pi_counts["T1190"] == 3 and pi_counts["T1204"] == 2 and pi_counts["T1133"] == 1


def write_kev_csv(mappings: dict[str, dict[str, list[str]]]) -> None:
    sub_for = {"T1059": "T1059.001", "T1566": "T1566.001", "T1021": "T1021.001"}
    sub_seen: Counter = Counter()
    rows = []
    for cve_id in sorted(mappings):
        for mapping_type in (ET, PI, SI):
            for technique_id in mappings[cve_id][mapping_type]:
                raw_id = technique_id
                if technique_id in sub_for:
                    sub_seen[technique_id] += 1
                    if sub_seen[technique_id] % 3 == 0:
                        raw_id = sub_for[technique_id]
                if raw_id in SUBTECHNIQUES:
                    name = SUBTECHNIQUES[raw_id][0]
                else:
                    name = TECHNIQUES[raw_id][0]
                rows.append([cve_id, raw_id, name, mapping_type])
    rng_for("kev-rows").shuffle(rows)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["capability_id", "attack_object_id", "attack_object_name", "mapping_type"])
    writer.writerows(rows)
    (DATA / "kev_mappings.csv").write_text(buffer.getvalue(), encoding="utf-8")


def cvss_v2(access_vector: str, score: float) -> dict:
    return {
        "version": "2.0",
        "accessVector": access_vector,
        "accessComplexity": "LOW",
        "authentication": "NONE",
        "confidentialityImpact": "PARTIAL",
        "integrityImpact": "PARTIAL",
        "availabilityImpact": "PARTIAL",
        "baseScore": score,
    }


def cvss_v3(attack_vector: str, score: float) -> dict:
    return {
        "version": "3.1",
        "attackVector": attack_vector,
        "attackComplexity": "LOW",
        "privilegesRequired": "NONE",
        "userInteraction": "NONE",
        "scope": "UNCHANGED",
        "baseScore": score,
        "baseSeverity": "CRITICAL" if score >= 9.0 else "HIGH" if score >= 7.0 else "MEDIUM",
    }


def nvd_item(cve_id: str, description: str, cwe: str | None, v2, v3) -> dict:
    problemtype = {"problemtype_data": [{"description": []}]}
    if cwe:
        problemtype["problemtype_data"][0]["description"].append({"lang": "en", "value": cwe})
    impact = {}
    if v2:
        impact["baseMetricV2"] = {"cvssV2": cvss_v2(*v2), "severity": "HIGH"}
    if v3:
        impact["baseMetricV3"] = {"cvssV3": cvss_v3(*v3)}
    return {
        "cve": {
            "CVE_data_meta": {"ID": cve_id, "ASSIGNER": "cve@example.org"},
            "problemtype": problemtype,
            "description": {"description_data": [{"lang": "en", "value": description}]},
        },
        "impact": impact,
    }


def write_nvd_feed(mappings: dict[str, dict[str, list[str]]]) -> dict[str, dict]:
    """Write the feed and return per-CVE metadata (description, cwe)."""
    rng = rng_for("nvd")
    items = []
    meta: dict[str, dict] = {}
    for cve_id in sorted(mappings):
        if cve_id in PAPER_CVES:
            spec = PAPER_CVES[cve_id]
            v2 = spec["cvss"].get("v2")
            v3 = spec["cvss"].get("v3")
            items.append(nvd_item(cve_id, spec["description"], spec["cwe"], v2, v3))
            meta[cve_id] = {"description": spec["description"], "cwe": spec["cwe"]}
            continue
        flavor_name, cwe, template = rng.choice(FLAVORS)
        product = rng.choice(PRODUCTS)
        version = f"{rng.randint(1, 12)}.{rng.randint(0, 9)}"
        description = template.format(product=product, version=version, param=rng.choice(PARAMS))
        if rng.random() < 0.15:
            cwe = None
        network = "LOCAL" not in description.upper() and rng.random() > 0.1
        vector = "NETWORK" if network else "LOCAL"
        score = round(rng.uniform(4.0, 10.0), 1)
        v2 = (vector, min(score, 10.0)) if rng.random() > 0.25 else None
        v3 = (vector, min(score, 10.0)) if rng.random() > 0.1 else None
        items.append(nvd_item(cve_id, description, cwe, v2, v3))
        meta[cve_id] = {"description": description, "cwe": cwe}

    # Two records that are not in the labeled set, and one with no English
    # description (parsers must skip it with a warning).
    items.append(
        nvd_item("CVE-2016-99999", "Legacy FTP daemon in RetroServe 1.0 allows anonymous write access.", "CWE-306", ("NETWORK", 7.5), None)
    )
    items.append(
        nvd_item("CVE-2017-88888", "HeapTool 2.2 has a use-after-free that crashes the renderer.", "CWE-416", None, ("LOCAL", 5.5))
    )
    items.append(
        {
            "cve": {
                "CVE_data_meta": {"ID": "CVE-2015-77777", "ASSIGNER": "cve@example.org"},
                "problemtype": {"problemtype_data": [{"description": []}]},
                "description": {"description_data": [{"lang": "es", "value": "Vulnerabilidad sin descripción en inglés."}]},
            },
            "impact": {},
        }
    )
    document = {
        "CVE_data_type": "CVE",
        "CVE_data_format": "MITRE",
        "CVE_data_version": "4.0",
        "CVE_Items": items,
    }
    (DATA / "nvd_feed.json").write_text(
        json.dumps(document, indent=1, sort_keys=True) + "\n", encoding="utf-8"
    )
    return meta


def attack_pattern(technique_id: str, name: str, description: str, *, sub=False, revoked=False) -> dict:
    obj = {
        "type": "attack-pattern",
        "spec_version": "2.1",
        "id": f"attack-pattern--{uuid.uuid5(uuid.NAMESPACE_URL, 'attack/' + technique_id)}",
        "created": "2023-01-01T00:00:00.000Z",
        "modified": "2023-01-01T00:00:00.000Z",
        "name": name,
        "description": description,
        "external_references": [
            {
                "source_name": "mitre-attack",
                "external_id": technique_id,
                "url": f"https://attack.mitre.org/techniques/{technique_id.replace('.', '/')}",
            }
        ],
        "kill_chain_phases": [{"kill_chain_name": "mitre-attack", "phase_name": "impact"}],
        "x_mitre_is_subtechnique": sub,
    }
    if revoked:
        obj["revoked"] = True
    return obj


def write_attack_bundle() -> None:
    objects = [
        {
            "type": "x-mitre-tactic",
            "spec_version": "2.1",
            "id": f"x-mitre-tactic--{uuid.uuid5(uuid.NAMESPACE_URL, 'tactic/impact')}",
            "name": "Impact",
        }
    ]
    for technique_id, (name, description) in sorted(TECHNIQUES.items()):
        objects.append(attack_pattern(technique_id, name, description))
    for technique_id, (name, description) in sorted(SUBTECHNIQUES.items()):
        objects.append(attack_pattern(technique_id, name, description, sub=True))
    for technique_id, (name, description) in sorted(REVOKED.items()):
        objects.append(attack_pattern(technique_id, name, description, revoked=True))
    # one attack-pattern without a usable external id, which parsers must skip
    objects.append(
        {
            "type": "attack-pattern",
            "spec_version": "2.1",
            "id": f"attack-pattern--{uuid.uuid5(uuid.NAMESPACE_URL, 'attack/broken')}",
            "name": "Orphaned pattern",
            "description": "No external technique reference.",
            "external_references": [{"source_name": "other-source", "external_id": "X0001"}],
        }
    )
    bundle = {
        "type": "bundle",
        "id": f"bundle--{uuid.uuid5(uuid.NAMESPACE_URL, 'bundle/sample')}",
        "objects": objects,
    }
    (DATA / "attack_bundle.json").write_text(
        json.dumps(bundle, indent=1, sort_keys=True) + "\n", encoding="utf-8"
    )


CWE_NAMES = {
    "CWE-20": "Improper Input Validation",
    "CWE-22": "Improper Limitation of a Pathname to a Restricted Directory",
    "CWE-23": "Relative Path Traversal",
    "CWE-78": "Improper Neutralization of Special Elements used in an OS Command",
    "CWE-79": "Improper Neutralization of Input During Web Page Generation",
    "CWE-89": "Improper Neutralization of Special Elements used in an SQL Command",
    "CWE-94": "Improper Control of Generation of Code",
    "CWE-120": "Buffer Copy without Checking Size of Input",
    "CWE-121": "Stack-based Buffer Overflow",
    "CWE-122": "Heap-based Buffer Overflow",
    "CWE-125": "Out-of-bounds Read",
    "CWE-190": "Integer Overflow or Wraparound",
    "CWE-269": "Improper Privilege Management",
    "CWE-285": "Improper Authorization",
    "CWE-287": "Improper Authentication",
    "CWE-306": "Missing Authentication for Critical Function",
    "CWE-312": "Cleartext Storage of Sensitive Information",
    "CWE-313": "Cleartext Storage in a File or on Disk",
    "CWE-319": "Cleartext Transmission of Sensitive Information",
    "CWE-326": "Inadequate Encryption Strength",
    "CWE-327": "Use of a Broken or Risky Cryptographic Algorithm",
    "CWE-352": "Cross-Site Request Forgery",
    "CWE-362": "Concurrent Execution using Shared Resource with Improper Synchronization",
    "CWE-367": "Time-of-check Time-of-use Race Condition",
    "CWE-400": "Uncontrolled Resource Consumption",
    "CWE-416": "Use After Free",
    "CWE-426": "Untrusted Search Path",
    "CWE-427": "Uncontrolled Search Path Element",
    "CWE-434": "Unrestricted Upload of File with Dangerous Type",
    "CWE-502": "Deserialization of Untrusted Data",
    "CWE-522": "Insufficiently Protected Credentials",
    "CWE-611": "Improper Restriction of XML External Entity Reference",
    "CWE-732": "Incorrect Permission Assignment for Critical Resource",
    "CWE-787": "Out-of-bounds Write",
    "CWE-798": "Use of Hard-coded Credentials",
    "CWE-863": "Incorrect Authorization",
    "CWE-918": "Server-Side Request Forgery",
    "CWE-1392": "Use of Default Credentials",
}


def write_cwe_catalog() -> None:
    tables = json.loads(TABLES_PATH.read_text(encoding="utf-8"))
    description_by_cwe: dict[str, str] = {}
    for row in tables["vulnerability_types"]:
        for cwe_id in row["cwe_ids"]:
            description_by_cwe.setdefault(cwe_id, row["description"])
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["CWE-ID", "Name", "Description"])
    for cwe_id in sorted(CWE_NAMES, key=lambda c: int(c.split("-")[1])):
        description = description_by_cwe.get(
            cwe_id, f"Weakness class {cwe_id}: {CWE_NAMES[cwe_id]}."
        )
        writer.writerow([cwe_id.replace("CWE-", ""), CWE_NAMES[cwe_id], description])
    (DATA / "cwe_catalog.csv").write_text(buffer.getvalue(), encoding="utf-8")


def write_prices() -> None:
    prices = {
        "fixture-model": {"input": 0.15, "output": 0.60},
        "gpt-4o-mini": {"input": 0.15, "output": 0.60},
        "llama3.3-70b": {"input": 0.12, "output": 0.30},
    }
    (DATA / "prices.json").write_text(
        json.dumps(prices, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def table_technique_sets() -> dict[str, set[str]]:
    tables = json.loads(TABLES_PATH.read_text(encoding="utf-8"))
    sets: dict[str, set[str]] = {ET: set(), PI: set(), SI: set()}
    for row in tables["vulnerability_types"]:
        for mapping_type, ids in row.get("techniques", {}).items():
            sets[mapping_type].update(ids)
    for row in tables["functionalities"]:
        for mapping_type, ids in row.get("techniques", {}).items():
            sets[mapping_type].update(ids)
    for question in tables["exploitation_questions"]:
        for ids in question["answers"].values():
            sets[ET].update(ids)
    for row in tables["affected_objects"]:
        sets[ET].update(row["exploitation_technique"])
    for row in tables["tactics"]:
        sets[ET].update(row["techniques"])
    return sets


def main() -> None:
    DATA.mkdir(exist_ok=True)
    table_sets = table_technique_sets()
    assert {len(table_sets[ET]), len(table_sets[PI]), len(table_sets[SI])} == {15, 24, 18}

    mappings = assign_mappings()
    validate(mappings, table_sets)

    write_kev_csv(mappings)
    write_nvd_feed(mappings)
    write_attack_bundle()
    write_cwe_catalog()
    write_prices()

    total = sum(len(ids) for by_type in mappings.values() for ids in by_type.values())
    print(f"wrote dataset: {len(mappings)} CVEs, {total} mappings")
    for mapping_type in (ET, PI, SI):
        count = sum(len(by_type[mapping_type]) for by_type in mappings.values())
        print(f"  {mapping_type}: {count}")


if __name__ == "__main__":
    main()
