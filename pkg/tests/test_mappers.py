import random

import pytest

from cvemap import mappers
from cvemap.gateway import ChatResponse, FixtureMissingError
from cvemap.types import MappingType

ET = MappingType.EXPLOITATION_TECHNIQUE
PI = MappingType.PRIMARY_IMPACT
SI = MappingType.SECONDARY_IMPACT

DEFAULTS = mappers.RequestDefaults(model_name="test-model")


class StubGateway:
    """Duck-typed gateway: routes prompts to canned response text."""

    def __init__(self, responder):
        self.responder = responder
        self.requests = []

    def complete(self, request):
        self.requests.append(request)
        text = self.responder(request.user_text)
        if isinstance(text, Exception):
            raise text
        return ChatResponse(
            text=text, input_token_count=1, output_token_count=1, latency_s=0.0, backend_id="stub"
        )


def cve(mini_corpus, cve_id="CVE-2021-21975"):
    return mini_corpus.cves[cve_id]


# ---------------------------------------------------------------------------
# vulnerability type
# ---------------------------------------------------------------------------


def test_vuln_type_prompt_contains_abstain_instruction(tables, mini_corpus):
    prompt = mappers.build_vuln_type_prompt(cve(mini_corpus), tables)
    assert "answer with 'N/A'" in prompt
    assert "Which vulnerability type does this CVE map to?" in prompt
    for row in tables.vulnerability_types:
        assert f"'{row.name}'" in prompt


def test_vuln_type_prompts_differ_only_in_description(tables, mini_corpus):
    first = mappers.build_vuln_type_prompt(cve(mini_corpus, "CVE-2021-21975"), tables)
    second = mappers.build_vuln_type_prompt(cve(mini_corpus, "CVE-2018-5555"), tables)
    normalized_first = first.replace(mini_corpus.cves["CVE-2021-21975"].description, "<DESC>")
    normalized_second = second.replace(mini_corpus.cves["CVE-2018-5555"].description, "<DESC>")
    assert normalized_first == normalized_second


def test_parse_vuln_type_variants(tables):
    answer = mappers.parse_vuln_type_response("  sql injection.\n", tables)
    assert answer.parsed == "SQL Injection"
    assert not answer.abstained

    quoted = mappers.parse_vuln_type_response("'Buffer Overflow'", tables)
    assert quoted.parsed == "Buffer Overflow"

    abstained = mappers.parse_vuln_type_response("N/A", tables)
    assert abstained.abstained and abstained.parsed is None

    with pytest.raises(mappers.MapperParseError):
        mappers.parse_vuln_type_response("Quantum Entanglement", tables)


# ---------------------------------------------------------------------------
# functionality
# ---------------------------------------------------------------------------


def test_functionality_prompts_cover_all_rows(tables, mini_corpus, mini_split):
    prompts = mappers.build_functionality_prompts(
        cve(mini_corpus), tables, mini_corpus, mini_split, k_pos=2, k_neg=2, seed=3
    )
    assert len(prompts) == 14
    names = [name for name, _ in prompts]
    assert names == [row.name for row in tables.functionalities]
    for _, prompt in prompts:
        assert "Answer with 'YES' or 'NO'." in prompt
        assert cve(mini_corpus).description in prompt


def test_functionality_prompts_deterministic(tables, mini_corpus, mini_split):
    build = lambda: mappers.build_functionality_prompts(
        cve(mini_corpus), tables, mini_corpus, mini_split, seed=5
    )
    assert build() == build()


def test_functionality_positives_come_from_matching_train_cves(tables, mini_corpus, mini_split):
    prompts = dict(
        mappers.build_functionality_prompts(
            cve(mini_corpus), tables, mini_corpus, mini_split, k_pos=5, k_neg=0, seed=0
        )
    )
    delete_prompt = prompts["Delete Files"]
    # only CVE-2019-2000 maps to the Delete Files row (T1485/T1499)
    if "CVE-2019-2000" in mini_split.train_cve_ids:
        assert mini_corpus.cves["CVE-2019-2000"].description in delete_prompt
    else:
        assert "(no examples available)" in delete_prompt


def test_parse_yes_no_trivial_and_padded():
    assert mappers.parse_yes_no("YES") == "yes"
    assert mappers.parse_yes_no("No, because the exploit is local.") == "no"
    rng = random.Random(7)
    fillers = ["Surely", "it depends;", "considering the CVE,", "overall:", "verdict ->"]
    for _ in range(50):
        verdict = rng.choice(["YES", "yes", "No", "NO"])
        text = f"{rng.choice(fillers)} {verdict} {rng.choice(fillers)}"
        assert mappers.parse_yes_no(text) == verdict.lower()
    with pytest.raises(mappers.MapperParseError):
        mappers.parse_yes_no("maybe")


# ---------------------------------------------------------------------------
# exploitation
# ---------------------------------------------------------------------------


def test_exploitation_prompt_numbers_all_questions(tables, mini_corpus):
    prompt = mappers.build_exploitation_prompt(cve(mini_corpus), tables)
    for index, question in enumerate(tables.exploitation_questions, start=1):
        assert f"{index}. {question.text}" in prompt


def test_exploitation_sub_prompt_lists_options(tables, mini_corpus):
    question = next(q for q in tables.exploitation_questions if q.sub_question)
    prompt = mappers.build_exploitation_sub_prompt(cve(mini_corpus), question)
    assert "Answer with one of these alternatives:" in prompt
    for option in question.sub_question.options:
        assert f'"{option}"' in prompt


def test_parse_exploitation_numbered_lines(tables):
    text = "\n".join(
        f"{i}. {'YES' if i in (2, 8) else 'no'}" for i in range(1, 9)
    )
    answer = mappers.parse_exploitation_response(text, tables)
    assert answer.parsed["q2"] == "yes"
    assert answer.parsed["q8"] == "yes"
    assert answer.parsed["q1"] == "no"
    assert not answer.abstained


def test_parse_exploitation_bare_token_fallback(tables):
    text = "no no yes no no no no yes"
    answer = mappers.parse_exploitation_response(text, tables)
    assert answer.parsed["q3"] == "yes"


def test_parse_exploitation_missing_question_errors(tables):
    with pytest.raises(mappers.MapperParseError, match="question"):
        mappers.parse_exploitation_response("1. yes\n2. no", tables)


def test_parse_choice_exact_and_substring():
    options = ("A malicious link", "An email", "Other")
    assert mappers.parse_choice_response("an email", options) == "An email"
    assert mappers.parse_choice_response("It came via an email attachment.", options) == "An email"
    with pytest.raises(mappers.MapperParseError):
        mappers.parse_choice_response("carrier pigeon", options)


# ---------------------------------------------------------------------------
# affected object / tactic parsing
# ---------------------------------------------------------------------------


def test_parse_affected_object_single_and_multiple(tables):
    single = mappers.parse_affected_object_response("Network-based Application", tables)
    assert single.parsed == ["Network-based Application"]
    multiple = mappers.parse_affected_object_response(
        "Either the Operating System or an Internet-facing Host/System.", tables
    )
    assert set(multiple.parsed) == {"Operating System", "Internet-facing Host/System"}
    assert mappers.parse_affected_object_response("N/A", tables).abstained
    with pytest.raises(mappers.MapperParseError):
        mappers.parse_affected_object_response("a toaster", tables)


def test_parse_tactic_multiple(tables):
    answer = mappers.parse_tactic_response("Initial Access, then Lateral Movement", tables)
    assert answer.parsed == ["Initial Access", "Lateral Movement"]


# ---------------------------------------------------------------------------
# run_method
# ---------------------------------------------------------------------------


def test_run_vuln_type_maps_through_tables(tables, mini_corpus):
    gateway = StubGateway(lambda _: "Cleartext Transmission of Sensitive Information")
    result = mappers.run_method(gateway, mappers.Method.VULN_TYPE, cve(mini_corpus), tables, DEFAULTS)
    assert result.prediction.techniques[ET] == ["T1040"]
    assert result.prediction.techniques[PI] == ["T1552"]
    assert result.prediction.techniques[SI] == ["T1078"]
    assert not result.errors


def test_run_vuln_type_abstains_on_na(tables, mini_corpus):
    gateway = StubGateway(lambda _: "N/A")
    result = mappers.run_method(gateway, mappers.Method.VULN_TYPE, cve(mini_corpus), tables, DEFAULTS)
    assert result.abstained
    assert all(not ids for ids in result.prediction.techniques.values())


def test_run_affected_object_example(tables, mini_corpus):
    gateway = StubGateway(lambda _: "Network-based Application")
    result = mappers.run_method(
        gateway, mappers.Method.AFFECTED_OBJECT, cve(mini_corpus), tables, DEFAULTS
    )
    assert result.prediction.techniques[ET] == ["T1040", "T1059"]
    assert result.prediction.techniques[PI] == []


def test_run_method_retries_once_then_succeeds(tables, mini_corpus):
    responses = iter(["gibberish", "SQL Injection"])
    gateway = StubGateway(lambda _: next(responses))
    result = mappers.run_method(gateway, mappers.Method.VULN_TYPE, cve(mini_corpus), tables, DEFAULTS)
    assert result.prediction.techniques[PI] == ["T1059"]
    assert len(result.errors) == 1
    assert mappers.CLARIFICATION_LINE in gateway.requests[1].user_text


def test_run_method_double_parse_failure_abstains(tables, mini_corpus):
    gateway = StubGateway(lambda _: "gibberish")
    result = mappers.run_method(gateway, mappers.Method.VULN_TYPE, cve(mini_corpus), tables, DEFAULTS)
    assert result.abstained
    assert len(result.errors) == 2


def test_run_method_records_gateway_error(tables, mini_corpus):
    gateway = StubGateway(lambda _: FixtureMissingError("fixture missing for digest deadbeef"))
    result = mappers.run_method(gateway, mappers.Method.VULN_TYPE, cve(mini_corpus), tables, DEFAULTS)
    assert result.abstained
    assert any("gateway error" in e for e in result.errors)


def test_run_exploitation_with_sub_question(tables, mini_corpus):
    def responder(prompt):
        if "alternatives" in prompt:
            return "An email"
        return "1. YES\n2. no\n3. no\n4. no\n5. no\n6. no\n7. no\n8. no"

    gateway = StubGateway(responder)
    result = mappers.run_method(
        gateway, mappers.Method.EXPLOITATION, cve(mini_corpus), tables, DEFAULTS
    )
    assert result.prediction.techniques[ET] == ["T1204", "T1566"]
    assert "exploitation:q1.sub" in result.prompts


def test_run_functionality_unions_yes_rows(tables, mini_corpus, mini_split):
    def responder(prompt):
        return "YES" if "Remove files from the system." in prompt else "NO"

    gateway = StubGateway(responder)
    result = mappers.run_method(
        gateway, mappers.Method.FUNCTIONALITY, cve(mini_corpus), tables, DEFAULTS,
        corpus=mini_corpus, split=mini_split,
    )
    assert result.prediction.techniques[PI] == ["T1485"]
    assert result.prediction.techniques[SI] == ["T1499"]
    assert result.prediction.techniques[ET] == []
    assert len(result.prompts) == 14


# ---------------------------------------------------------------------------
# aggregation
# ---------------------------------------------------------------------------


def _prediction(method, et=(), pi=(), si=()):
    prediction = mappers.MethodPrediction(method=method)
    prediction.techniques[ET] = list(et)
    prediction.techniques[PI] = list(pi)
    prediction.techniques[SI] = list(si)
    return prediction


def test_aggregate_disjoint_concatenation():
    predictions = [
        _prediction(mappers.Method.VULN_TYPE, et=["T1040"], pi=["T1552"]),
        _prediction(mappers.Method.EXPLOITATION, et=["T1190"]),
        _prediction(mappers.Method.AFFECTED_OBJECT, et=["T1059"]),
    ]
    merged = mappers.aggregate_methodology(predictions)
    assert merged[ET] == ["T1040", "T1190", "T1059"]
    assert merged[PI] == ["T1552"]


def test_aggregate_keep_first_duplicate():
    predictions = [
        _prediction(mappers.Method.VULN_TYPE, et=["T1040", "T1190"]),
        _prediction(mappers.Method.EXPLOITATION, et=["T1190", "T1078"]),
    ]
    merged = mappers.aggregate_methodology(
        predictions, (mappers.Method.VULN_TYPE, mappers.Method.EXPLOITATION)
    )
    assert merged[ET] == ["T1040", "T1190", "T1078"]


def test_aggregate_invariant_to_arrival_order():
    a = _prediction(mappers.Method.VULN_TYPE, et=["T1040"])
    b = _prediction(mappers.Method.EXPLOITATION, et=["T1190"])
    c = _prediction(mappers.Method.AFFECTED_OBJECT, et=["T1059"])
    assert mappers.aggregate_methodology([c, a, b]) == mappers.aggregate_methodology([a, b, c])


def test_aggregate_matches_ordered_union_oracle():
    rng = random.Random(99)
    pool = [f"T1{n:03d}" for n in range(100, 140)]
    methods = [mappers.Method.VULN_TYPE, mappers.Method.EXPLOITATION, mappers.Method.AFFECTED_OBJECT]
    for _ in range(200):
        predictions = []
        for method in methods:
            predictions.append(
                _prediction(
                    method,
                    et=rng.sample(pool, rng.randint(0, 6)),
                    pi=rng.sample(pool, rng.randint(0, 6)),
                )
            )
        rng.shuffle(predictions)
        merged = mappers.aggregate_methodology(predictions, tuple(methods))

        by_method = {p.method: p for p in predictions}
        for mapping_type in (ET, PI):
            expected = []
            for method in mappers.METHOD_ORDER:
                if method not in by_method:
                    continue
                for technique_id in by_method[method].techniques[mapping_type]:
                    if technique_id not in expected:
                        expected.append(technique_id)
            assert merged[mapping_type] == expected


def test_run_method_output_never_leaves_table_rows(tables, mini_corpus):
    # every vulnerability-type answer maps to exactly its table row
    for row in tables.vulnerability_types:
        gateway = StubGateway(lambda _, name=row.name: name)
        result = mappers.run_method(
            gateway, mappers.Method.VULN_TYPE, cve(mini_corpus), tables, DEFAULTS
        )
        for mapping_type in (ET, PI, SI):
            assert result.prediction.techniques[mapping_type] == list(row.techniques[mapping_type])
    for row in tables.affected_objects:
        gateway = StubGateway(lambda _, name=row.name: name)
        result = mappers.run_method(
            gateway, mappers.Method.AFFECTED_OBJECT, cve(mini_corpus), tables, DEFAULTS
        )
        assert result.prediction.techniques[ET] == list(row.techniques)
    for row in tables.tactics:
        gateway = StubGateway(lambda _, name=row.name: name)
        result = mappers.run_method(
            gateway, mappers.Method.TACTIC, cve(mini_corpus), tables, DEFAULTS
        )
        assert result.prediction.techniques[ET] == list(row.techniques)


def test_functionality_shortfall_noted_in_log(tables, mini_corpus, mini_split, caplog):
    import logging

    with caplog.at_level(logging.INFO, logger="cvemap.mappers"):
        mappers.build_functionality_prompts(
            cve(mini_corpus), tables, mini_corpus, mini_split, k_pos=4, k_neg=2, seed=0
        )
    assert "positive example" in caplog.text


def test_run_tactic_multiple_names_union(tables, mini_corpus):
    gateway = StubGateway(lambda _: "Initial Access and also Lateral Movement")
    result = mappers.run_method(gateway, mappers.Method.TACTIC, cve(mini_corpus), tables, DEFAULTS)
    assert result.prediction.techniques[ET] == ["T1190", "T1133", "T1210"]
