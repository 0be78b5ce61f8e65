"""Dataset ingestion and enrichment.

Builds the evaluation corpus from four sources: the labeled CVE-to-technique
mapping file (CSV or JSON), an NVD vulnerability feed, an enterprise ATT&CK
STIX 2.1 bundle, and a CWE catalog. Sub-technique IDs are lifted to their
top-level parent once, at ingestion; everything downstream assumes top-level
IDs.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import random
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field, replace

from .types import (
    CVE_ID_RE,
    TECHNIQUE_ID_RE,
    CvemapError,
    CveRecord,
    GroundTruthMapping,
    MappingType,
    TechniqueRef,
)

logger = logging.getLogger(__name__)

HISTOGRAM_BUCKETS = ("none", "one", "two", "three", ">three")


class CorpusError(CvemapError):
    """Raised for malformed ingestion inputs."""


def lift_subtechnique(technique_id: str) -> str:
    """Return the top-level parent of a technique ID (idempotent)."""
    if not TECHNIQUE_ID_RE.match(technique_id):
        raise CorpusError(f"not a technique id: {technique_id!r}")
    return technique_id.split(".", 1)[0]


@dataclass(frozen=True)
class KevMappingRow:
    """One raw row of the labeled mapping file, before lifting."""

    cve_id: str
    technique_id: str
    technique_name: str
    mapping_type: MappingType


@dataclass(frozen=True)
class CweEntry:
    id: str
    name: str
    description: str


@dataclass
class EnrichedCorpus:
    """The canonical evaluation corpus. Treated as immutable after construction."""

    cves: dict[str, CveRecord]
    techniques: dict[str, TechniqueRef]
    mappings: list[GroundTruthMapping]
    provenance: dict[str, str] = field(default_factory=dict)

    def truth(self, cve_id: str, mapping_type: MappingType) -> set[str]:
        """Ground-truth technique IDs for one (CVE, mapping type) pair."""
        return {
            m.technique_id
            for m in self.mappings
            if m.cve_id == cve_id and m.mapping_type == mapping_type
        }

    def mapping_index(self) -> dict[tuple[str, MappingType], set[str]]:
        index: dict[tuple[str, MappingType], set[str]] = {}
        for m in self.mappings:
            index.setdefault((m.cve_id, m.mapping_type), set()).add(m.technique_id)
        return index


@dataclass(frozen=True)
class DataSplit:
    train_cve_ids: frozenset[str]
    test_cve_ids: frozenset[str]
    seed: int


# ---------------------------------------------------------------------------
# Parsers
# ---------------------------------------------------------------------------

_CVE_COLUMNS = ("capability_id", "cve_id", "cve")
_TECHNIQUE_COLUMNS = ("attack_object_id", "technique_id", "attack_id")
_NAME_COLUMNS = ("attack_object_name", "technique_name", "attack_name")
_TYPE_COLUMNS = ("mapping_type",)


def _pick_column(available: list[str], candidates: tuple[str, ...], what: str) -> str:
    lowered = {name.strip().lower(): name for name in available}
    for candidate in candidates:
        if candidate in lowered:
            return lowered[candidate]
    raise CorpusError(f"no {what} column found; expected one of {', '.join(candidates)}")


def _kev_row(index: int, cve: str, technique: str, name: str, label: str) -> KevMappingRow:
    if not cve or not CVE_ID_RE.match(cve):
        raise CorpusError(f"row {index}: missing or malformed CVE id: {cve!r}")
    if not technique or not TECHNIQUE_ID_RE.match(technique):
        raise CorpusError(f"row {index}: missing or malformed technique id: {technique!r}")
    try:
        mapping_type = MappingType.parse(label)
    except ValueError as exc:
        raise CorpusError(f"row {index}: {exc}") from exc
    return KevMappingRow(cve, technique, name, mapping_type)


def parse_kev_mappings(raw: bytes, fmt: str) -> list[KevMappingRow]:
    """Parse the labeled mapping file. ``fmt`` is ``csv`` or ``json``.

    Row indices in error messages are 1-based over data rows.
    """
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise CorpusError(f"mapping file is not valid UTF-8: {exc}") from exc

    rows: list[KevMappingRow] = []
    if fmt == "csv":
        reader = csv.DictReader(io.StringIO(text))
        if reader.fieldnames is None:
            raise CorpusError("mapping file has no header row")
        cve_col = _pick_column(reader.fieldnames, _CVE_COLUMNS, "CVE id")
        tech_col = _pick_column(reader.fieldnames, _TECHNIQUE_COLUMNS, "technique id")
        name_col = _pick_column(reader.fieldnames, _NAME_COLUMNS, "technique name")
        type_col = _pick_column(reader.fieldnames, _TYPE_COLUMNS, "mapping type")
        for index, record in enumerate(reader, start=1):
            rows.append(
                _kev_row(
                    index,
                    (record.get(cve_col) or "").strip(),
                    (record.get(tech_col) or "").strip(),
                    (record.get(name_col) or "").strip(),
                    (record.get(type_col) or "").strip(),
                )
            )
    elif fmt == "json":
        try:
            document = json.loads(text)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"mapping file is not valid JSON: {exc}") from exc
        if isinstance(document, dict):
            document = document.get("mapping_objects", [])
        if not isinstance(document, list):
            raise CorpusError("JSON mapping file must be a list or carry 'mapping_objects'")
        for index, record in enumerate(document, start=1):
            if not isinstance(record, dict):
                raise CorpusError(f"row {index}: expected an object")
            lowered = {k.strip().lower(): v for k, v in record.items()}

            def pick(candidates: tuple[str, ...]) -> str:
                for candidate in candidates:
                    value = lowered.get(candidate)
                    if value is not None:
                        return str(value).strip()
                return ""

            rows.append(
                _kev_row(
                    index,
                    pick(_CVE_COLUMNS),
                    pick(_TECHNIQUE_COLUMNS),
                    pick(_NAME_COLUMNS),
                    pick(_TYPE_COLUMNS),
                )
            )
    else:
        raise CorpusError(f"unknown mapping file format: {fmt!r} (use csv or json)")
    return rows


def _flatten_cvss(prefix: str, metrics: dict) -> dict[str, str]:
    flat: dict[str, str] = {}
    for key, value in metrics.items():
        if isinstance(value, (str, int, float, bool)):
            flat[f"{prefix}.{key}"] = str(value)
    return flat


def _first_cwe(values: list[str]) -> str | None:
    for value in values:
        value = value.strip()
        if value.upper().startswith("CWE-") and value[4:].isdigit():
            return "CWE-" + value[4:]
    return None


def parse_nvd_records(raw: bytes) -> tuple[list[CveRecord], int]:
    """Parse an NVD JSON feed (legacy 1.1 feed or 2.0 API dump).

    Returns the parsed records and the number of records skipped because they
    carry no English description.
    """
    try:
        document = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorpusError(f"NVD feed is not valid UTF-8 JSON: {exc}") from exc

    records: list[CveRecord] = []
    skipped = 0

    if "CVE_Items" in document:
        for item in document["CVE_Items"]:
            cve = item.get("cve", {})
            cve_id = cve.get("CVE_data_meta", {}).get("ID", "")
            description = ""
            for entry in cve.get("description", {}).get("description_data", []):
                if entry.get("lang") == "en" and entry.get("value"):
                    description = entry["value"]
                    break
            if not description:
                skipped += 1
                logger.warning("NVD record %s has no English description; skipped", cve_id or "?")
                continue
            cwe_candidates = [
                d.get("value", "")
                for pt in cve.get("problemtype", {}).get("problemtype_data", [])
                for d in pt.get("description", [])
            ]
            cvss: dict[str, str] = {}
            impact = item.get("impact", {})
            if "baseMetricV2" in impact:
                cvss.update(_flatten_cvss("cvssV2", impact["baseMetricV2"].get("cvssV2", {})))
            if "baseMetricV3" in impact:
                cvss.update(_flatten_cvss("cvssV3", impact["baseMetricV3"].get("cvssV3", {})))
            records.append(
                CveRecord(id=cve_id, description=description, cvss=cvss, cwe_id=_first_cwe(cwe_candidates))
            )
    elif "vulnerabilities" in document:
        for wrapper in document["vulnerabilities"]:
            cve = wrapper.get("cve", {})
            cve_id = cve.get("id", "")
            description = ""
            for entry in cve.get("descriptions", []):
                if entry.get("lang") == "en" and entry.get("value"):
                    description = entry["value"]
                    break
            if not description:
                skipped += 1
                logger.warning("NVD record %s has no English description; skipped", cve_id or "?")
                continue
            cwe_candidates = [
                d.get("value", "")
                for weakness in cve.get("weaknesses", [])
                for d in weakness.get("description", [])
            ]
            cvss = {}
            metrics = cve.get("metrics", {})
            for metric_key, prefix in (
                ("cvssMetricV2", "cvssV2"),
                ("cvssMetricV30", "cvssV3"),
                ("cvssMetricV31", "cvssV3"),
            ):
                entries = metrics.get(metric_key)
                if entries:
                    cvss.update(_flatten_cvss(prefix, entries[0].get("cvssData", {})))
            records.append(
                CveRecord(id=cve_id, description=description, cvss=cvss, cwe_id=_first_cwe(cwe_candidates))
            )
    else:
        raise CorpusError("NVD feed has neither 'CVE_Items' nor 'vulnerabilities'")

    return records, skipped


def parse_attack_bundle(raw: bytes) -> list[TechniqueRef]:
    """Parse a STIX 2.1 enterprise ATT&CK bundle into technique references."""
    try:
        document = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorpusError(f"ATT&CK bundle is not valid UTF-8 JSON: {exc}") from exc
    objects = document.get("objects")
    if not isinstance(objects, list):
        raise CorpusError("ATT&CK bundle has no 'objects' list")

    techniques: list[TechniqueRef] = []
    for obj in objects:
        if obj.get("type") != "attack-pattern":
            continue
        external_id = ""
        for ref in obj.get("external_references", []):
            if ref.get("source_name") == "mitre-attack" and ref.get("external_id"):
                external_id = ref["external_id"]
                break
        if not TECHNIQUE_ID_RE.match(external_id):
            logger.warning(
                "attack-pattern %s has no usable external technique id; skipped",
                obj.get("id", "?"),
            )
            continue
        deprecated = bool(obj.get("x_mitre_deprecated", False))
        revoked = bool(obj.get("revoked", False))
        description = obj.get("description", "") or ""
        if not description and not (deprecated or revoked):
            logger.warning("attack-pattern %s has no description; skipped", external_id)
            continue
        techniques.append(
            TechniqueRef(
                id=external_id,
                name=obj.get("name", external_id),
                description=description,
                deprecated=deprecated,
                revoked=revoked,
            )
        )
    return techniques


def parse_cwe_catalog(raw: bytes) -> dict[str, CweEntry]:
    """Parse a CWE catalog (CSV export or XML subset) into id -> entry."""
    text = raw.decode("utf-8-sig")
    stripped = text.lstrip()
    entries: dict[str, CweEntry] = {}
    if stripped.startswith("<"):
        root = ET.fromstring(text)
        for weakness in root.iter():
            if not weakness.tag.endswith("Weakness"):
                continue
            raw_id = weakness.get("ID", "")
            if not raw_id.isdigit():
                continue
            description = ""
            for child in weakness:
                if child.tag.endswith("Description"):
                    description = (child.text or "").strip()
                    break
            cwe_id = f"CWE-{raw_id}"
            entries[cwe_id] = CweEntry(cwe_id, weakness.get("Name", ""), description)
    else:
        reader = csv.DictReader(io.StringIO(text))
        if reader.fieldnames is None:
            raise CorpusError("CWE catalog has no header row")
        lowered = {name.strip().lower(): name for name in reader.fieldnames}
        id_col = lowered.get("cwe-id") or lowered.get("cwe_id") or lowered.get("id")
        name_col = lowered.get("name")
        desc_col = lowered.get("description")
        if not (id_col and name_col and desc_col):
            raise CorpusError("CWE catalog needs id, name, and description columns")
        for record in reader:
            raw_id = (record.get(id_col) or "").strip()
            if raw_id.upper().startswith("CWE-"):
                raw_id = raw_id[4:]
            if not raw_id.isdigit():
                continue
            cwe_id = f"CWE-{raw_id}"
            entries[cwe_id] = CweEntry(
                cwe_id,
                (record.get(name_col) or "").strip(),
                (record.get(desc_col) or "").strip(),
            )
    return entries


# ---------------------------------------------------------------------------
# Enrichment
# ---------------------------------------------------------------------------


def enrich(
    kev_rows: list[KevMappingRow],
    nvd_records: list[CveRecord],
    attack_records: list[TechniqueRef],
    cwe_catalog: dict[str, CweEntry] | None = None,
) -> tuple[EnrichedCorpus, list[str]]:
    """Join the sources into an EnrichedCorpus.

    Mappings are lifted to top-level technique IDs; duplicate triples produced
    by lifting collapse to one. CVEs absent from the NVD input are excluded and
    returned as the unresolved list.
    """
    cwe_catalog = cwe_catalog or {}
    nvd_index = {record.id: record for record in nvd_records}
    catalog = {t.id: t for t in attack_records if not t.is_subtechnique}

    unresolved_set = {row.cve_id for row in kev_rows if row.cve_id not in nvd_index}
    unresolved = sorted(unresolved_set)
    if unresolved:
        logger.warning("%d CVE(s) in the mapping file are not in the NVD input", len(unresolved))

    mappings: list[GroundTruthMapping] = []
    seen: set[tuple[str, str, MappingType]] = set()
    used_cves: dict[str, None] = {}
    stub_names: dict[str, str] = {}
    for row in kev_rows:
        if row.cve_id in unresolved_set:
            continue
        lifted = lift_subtechnique(row.technique_id)
        key = (row.cve_id, lifted, row.mapping_type)
        if key in seen:
            continue
        seen.add(key)
        mappings.append(GroundTruthMapping(row.cve_id, lifted, row.mapping_type))
        used_cves.setdefault(row.cve_id)
        if lifted not in catalog and lifted not in stub_names:
            stub_names[lifted] = row.technique_name or lifted

    # Techniques referenced by mappings but missing from the bundle are retired
    # IDs; keep them as description-less deprecated stubs so lookups resolve.
    for technique_id, name in sorted(stub_names.items()):
        catalog[technique_id] = TechniqueRef(technique_id, name, "", deprecated=True)
        logger.warning("technique %s not in ATT&CK bundle; kept as deprecated stub", technique_id)

    cves: dict[str, CveRecord] = {}
    for cve_id in used_cves:
        record = nvd_index[cve_id]
        if record.cwe_id and record.cwe_id in cwe_catalog and not record.cwe_name:
            entry = cwe_catalog[record.cwe_id]
            record = replace(record, cwe_name=entry.name, cwe_description=entry.description)
        cves[cve_id] = record

    corpus = EnrichedCorpus(cves=cves, techniques=catalog, mappings=mappings)
    return corpus, unresolved


def split_corpus(corpus: EnrichedCorpus, ratio: float, seed: int) -> DataSplit:
    """Seeded uniform random split over CVE IDs (never over individual mappings)."""
    if not 0 < ratio < 1:
        raise CorpusError(f"split ratio must be in (0, 1), got {ratio}")
    ids = sorted(corpus.cves)
    test_size = round(ratio * len(ids))
    rng = random.Random(seed)
    test = frozenset(rng.sample(ids, test_size))
    train = frozenset(ids) - test
    return DataSplit(train_cve_ids=train, test_cve_ids=test, seed=seed)


# ---------------------------------------------------------------------------
# Stats
# ---------------------------------------------------------------------------


@dataclass
class CorpusStats:
    total_cves: int
    total_mappings: int
    mappings_per_type: dict[MappingType, int]
    #: (technique id, count) sorted by count descending, then id ascending.
    technique_frequency: list[tuple[str, int]]
    #: per mapping type: bucket name -> number of CVEs with that many mappings.
    type_histogram: dict[MappingType, dict[str, int]]


def _bucket(count: int) -> str:
    if count <= 3:
        return HISTOGRAM_BUCKETS[count]
    return ">three"


def corpus_stats(corpus: EnrichedCorpus) -> CorpusStats:
    if not corpus.cves:
        raise CorpusError("corpus is empty")

    per_type: dict[MappingType, int] = {t: 0 for t in MappingType}
    frequency: dict[str, int] = {}
    per_cve_type: dict[tuple[str, MappingType], int] = {}
    for m in corpus.mappings:
        per_type[m.mapping_type] += 1
        frequency[m.technique_id] = frequency.get(m.technique_id, 0) + 1
        per_cve_type[(m.cve_id, m.mapping_type)] = per_cve_type.get((m.cve_id, m.mapping_type), 0) + 1

    histogram: dict[MappingType, dict[str, int]] = {
        t: {bucket: 0 for bucket in HISTOGRAM_BUCKETS} for t in MappingType
    }
    for cve_id in corpus.cves:
        for mapping_type in MappingType:
            count = per_cve_type.get((cve_id, mapping_type), 0)
            histogram[mapping_type][_bucket(count)] += 1

    ranked = sorted(frequency.items(), key=lambda item: (-item[1], item[0]))
    return CorpusStats(
        total_cves=len(corpus.cves),
        total_mappings=len(corpus.mappings),
        mappings_per_type=per_type,
        technique_frequency=ranked,
        type_histogram=histogram,
    )


@dataclass
class CoverageRow:
    mapping_type: MappingType
    total_mappings: int
    outside_table_mappings: int
    distinct_used_in_tables: int
    table_technique_count: int


def table_coverage(
    corpus: EnrichedCorpus, table_techniques: dict[MappingType, set[str]]
) -> dict[MappingType, CoverageRow]:
    """Reconcile the corpus against the methodology tables' technique sets.

    For each mapping type, counts how many mappings refer to techniques outside
    the tables and how many distinct table techniques the dataset actually uses.
    """
    rows: dict[MappingType, CoverageRow] = {}
    for mapping_type in MappingType:
        table_set = table_techniques.get(mapping_type, set())
        relevant = [m for m in corpus.mappings if m.mapping_type == mapping_type]
        outside = sum(1 for m in relevant if m.technique_id not in table_set)
        used = {m.technique_id for m in relevant if m.technique_id in table_set}
        rows[mapping_type] = CoverageRow(
            mapping_type=mapping_type,
            total_mappings=len(relevant),
            outside_table_mappings=outside,
            distinct_used_in_tables=len(used),
            table_technique_count=len(table_set),
        )
    return rows


# ---------------------------------------------------------------------------
# Archive IO
# ---------------------------------------------------------------------------


def file_digest(raw: bytes) -> str:
    return hashlib.sha256(raw).hexdigest()


def corpus_to_dict(corpus: EnrichedCorpus) -> dict:
    return {
        "cves": {
            cve.id: {
                "description": cve.description,
                "cvss": cve.cvss,
                "cwe_id": cve.cwe_id,
                "cwe_name": cve.cwe_name,
                "cwe_description": cve.cwe_description,
            }
            for cve in corpus.cves.values()
        },
        "techniques": {
            t.id: {
                "name": t.name,
                "description": t.description,
                "deprecated": t.deprecated,
                "revoked": t.revoked,
            }
            for t in corpus.techniques.values()
        },
        "mappings": [
            {"cve_id": m.cve_id, "technique_id": m.technique_id, "mapping_type": m.mapping_type.value}
            for m in sorted(
                corpus.mappings, key=lambda m: (m.cve_id, m.mapping_type.value, m.technique_id)
            )
        ],
        "provenance": corpus.provenance,
    }


def corpus_from_dict(document: dict) -> EnrichedCorpus:
    cves = {
        cve_id: CveRecord(
            id=cve_id,
            description=body["description"],
            cvss=dict(body.get("cvss", {})),
            cwe_id=body.get("cwe_id"),
            cwe_name=body.get("cwe_name"),
            cwe_description=body.get("cwe_description"),
        )
        for cve_id, body in document["cves"].items()
    }
    techniques = {
        tech_id: TechniqueRef(
            id=tech_id,
            name=body["name"],
            description=body.get("description", ""),
            deprecated=body.get("deprecated", False),
            revoked=body.get("revoked", False),
        )
        for tech_id, body in document["techniques"].items()
    }
    mappings = [
        GroundTruthMapping(m["cve_id"], m["technique_id"], MappingType.parse(m["mapping_type"]))
        for m in document["mappings"]
    ]
    return EnrichedCorpus(
        cves=cves,
        techniques=techniques,
        mappings=mappings,
        provenance=dict(document.get("provenance", {})),
    )


def save_corpus(corpus: EnrichedCorpus, path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(corpus_to_dict(corpus), handle, indent=2, sort_keys=True, ensure_ascii=False)
        handle.write("\n")


def load_corpus(path) -> EnrichedCorpus:
    with open(path, encoding="utf-8") as handle:
        return corpus_from_dict(json.load(handle))
