import json
from importlib import resources

import pytest

from cvemap import rules
from cvemap.types import MappingType

ET = MappingType.EXPLOITATION_TECHNIQUE
PI = MappingType.PRIMARY_IMPACT
SI = MappingType.SECONDARY_IMPACT


def raw_tables() -> bytes:
    return resources.files("cvemap").joinpath("data/cmm_tables.json").read_bytes()


# ---------------------------------------------------------------------------
# exemplar lookups
# ---------------------------------------------------------------------------


def test_cleartext_transmission_row(tables):
    result = rules.techniques_for_vulnerability_type(
        tables, "Cleartext Transmission of Sensitive Information"
    )
    assert result[ET] == ["T1040"]
    assert result[PI] == ["T1552"]
    assert result[SI] == ["T1078"]


def test_delete_files_row(tables):
    result = rules.techniques_for_functionality(tables, "Delete Files")
    assert result[PI] == ["T1485"]
    assert result[SI] == ["T1499"]
    assert result[ET] == []


def test_malicious_website_question_yields_drive_by(tables):
    answers = {q.id: "no" for q in tables.exploitation_questions}
    answers["q1"] = "no"
    answers["q2"] = ("yes", "Other")
    result = rules.techniques_for_exploitation_answers(tables, answers)
    assert "T1189" in result


def test_network_based_application_row(tables):
    assert rules.techniques_for_affected_object(tables, "Network-based Application") == [
        "T1040",
        "T1059",
    ]


def test_lateral_movement_row(tables):
    assert rules.techniques_for_tactic(tables, "Lateral Movement") == ["T1210"]


# ---------------------------------------------------------------------------
# lookup behavior
# ---------------------------------------------------------------------------


def test_lookup_case_insensitive(tables):
    lower = rules.techniques_for_functionality(tables, "delete files")
    assert lower == rules.techniques_for_functionality(tables, "Delete Files")


def test_unknown_vulnerability_type_suggests(tables):
    with pytest.raises(rules.RuleLookupError) as excinfo:
        rules.techniques_for_vulnerability_type(tables, "SQL Injectionn")
    assert "SQL Injection" in str(excinfo.value)


def test_unknown_object_and_tactic_raise(tables):
    with pytest.raises(rules.RuleLookupError):
        rules.techniques_for_affected_object(tables, "Foo")
    with pytest.raises(rules.RuleLookupError):
        rules.techniques_for_tactic(tables, "Foo")


def test_all_no_answers_is_empty(tables):
    answers = {q.id: "no" for q in tables.exploitation_questions}
    assert rules.techniques_for_exploitation_answers(tables, answers) == []


def test_missing_sub_answer_errors(tables):
    answers = {q.id: "no" for q in tables.exploitation_questions}
    answers["q1"] = "yes"
    with pytest.raises(rules.RuleLookupError, match="sub-answer"):
        rules.techniques_for_exploitation_answers(tables, answers)


def test_missing_question_errors(tables):
    answers = {q.id: "no" for q in tables.exploitation_questions}
    del answers["q5"]
    with pytest.raises(rules.RuleLookupError, match="q5"):
        rules.techniques_for_exploitation_answers(tables, answers)


def test_overlapping_yes_answers_keep_first_position(tables):
    # q3 yields T1190; the Internet-exposed technique from a second yes answer
    # must not repeat. Brute-force oracle: ordered union over per-question lists.
    answers = {q.id: "no" for q in tables.exploitation_questions}
    answers["q3"] = "yes"
    answers["q7"] = "yes"
    result = rules.techniques_for_exploitation_answers(tables, answers)

    expected = []
    for question in tables.exploitation_questions:
        if answers[question.id] == "yes":
            for technique_id in question.answers["yes"]:
                if technique_id not in expected:
                    expected.append(technique_id)
    assert result == expected
    assert len(set(result)) == len(result)


def test_sub_answers_extend_base_list(tables):
    answers = {q.id: "no" for q in tables.exploitation_questions}
    answers["q1"] = ("yes", "An email")
    result = rules.techniques_for_exploitation_answers(tables, answers)
    assert result == ["T1204", "T1566"]
    answers["q1"] = ("yes", "Other")
    assert rules.techniques_for_exploitation_answers(tables, answers) == ["T1204"]


def test_invalid_sub_answer_rejected(tables):
    answers = {q.id: "no" for q in tables.exploitation_questions}
    answers["q1"] = ("yes", "A carrier pigeon")
    with pytest.raises(rules.RuleLookupError, match="closed options"):
        rules.techniques_for_exploitation_answers(tables, answers)


# ---------------------------------------------------------------------------
# table-level invariants
# ---------------------------------------------------------------------------


def test_every_row_round_trips_from_file(tables):
    document = json.loads(raw_tables())
    for row in document["vulnerability_types"]:
        looked_up = rules.techniques_for_vulnerability_type(tables, row["name"])
        for mapping_type in MappingType:
            assert looked_up[mapping_type] == row.get("techniques", {}).get(mapping_type.value, [])
    for row in document["functionalities"]:
        looked_up = rules.techniques_for_functionality(tables, row["name"])
        for mapping_type in (PI, SI):
            assert looked_up[mapping_type] == row.get("techniques", {}).get(mapping_type.value, [])
    for row in document["affected_objects"]:
        assert rules.techniques_for_affected_object(tables, row["affected_object"]) == row[
            "exploitation_technique"
        ]
    for row in document["tactics"]:
        assert rules.techniques_for_tactic(tables, row["name"]) == row["techniques"]


def test_functionality_rows_never_map_exploitation(tables):
    document = json.loads(raw_tables())
    assert len(document["functionalities"]) == 14
    for row in document["functionalities"]:
        assert row.get("techniques", {}).get("exploitation_technique", []) == []


def test_no_lookup_returns_subtechniques(tables):
    for sets in rules.technique_ids_by_mapping_type(tables).values():
        assert all("." not in technique_id for technique_id in sets)


def test_reserialization_is_semantically_identical(tables):
    document = rules.tables_to_dict(tables)
    reloaded = rules.load_rule_tables(json.dumps(document).encode())
    assert rules.tables_to_dict(reloaded) == document
    original = json.loads(raw_tables())
    assert document == original


def test_question_structure(tables):
    assert len(tables.exploitation_questions) == 8
    with_sub = [q for q in tables.exploitation_questions if q.sub_question]
    assert len(with_sub) == 2


def test_tables_resolve_against_sample_catalog(tables, sample_corpus):
    missing = rules.validate_against_catalog(tables, set(sample_corpus.techniques))
    assert missing == []


# ---------------------------------------------------------------------------
# load validation
# ---------------------------------------------------------------------------


def _mutate(transform) -> bytes:
    document = json.loads(raw_tables())
    transform(document)
    return json.dumps(document).encode()


def test_load_rejects_duplicate_names():
    def duplicate(document):
        document["vulnerability_types"][1]["name"] = document["vulnerability_types"][0]["name"]

    with pytest.raises(rules.RuleTableError, match="duplicate"):
        rules.load_rule_tables(_mutate(duplicate))


def test_load_rejects_wrong_question_count():
    def drop(document):
        document["exploitation_questions"].pop()

    with pytest.raises(rules.RuleTableError, match="expected 8"):
        rules.load_rule_tables(_mutate(drop))


def test_load_rejects_subtechnique_ids():
    def poison(document):
        document["tactics"][0]["techniques"] = ["T1190.001"]

    with pytest.raises(rules.RuleTableError, match="sub-technique"):
        rules.load_rule_tables(_mutate(poison))


def test_load_rejects_malformed_ids_and_reports_all():
    def poison(document):
        document["tactics"][0]["techniques"] = ["X9999"]
        document["functionalities"][0]["techniques"]["exploitation_technique"] = ["T1059"]

    with pytest.raises(rules.RuleTableError) as excinfo:
        rules.load_rule_tables(_mutate(poison))
    message = str(excinfo.value)
    assert "X9999" in message
    assert "exploitation" in message


def test_load_rejects_functionality_count():
    def drop(document):
        document["functionalities"].pop()

    with pytest.raises(rules.RuleTableError, match="expected 14"):
        rules.load_rule_tables(_mutate(drop))
