import pytest
from support import perturbed_responses

from cvemap import icl
from cvemap.gateway import ChatResponse
from cvemap.mappers import RequestDefaults
from cvemap.types import MappingType, NONE_LABEL, PAD_LABEL, RankedList

ET = MappingType.EXPLOITATION_TECHNIQUE
PI = MappingType.PRIMARY_IMPACT
SI = MappingType.SECONDARY_IMPACT

APPENDIX_EXAMPLE = (
    "['T1068', None, 'T1168', 'T1290', 'T1078', 'T1180', 'T1010', 'T1435', 'T1320', 'T1100']"
)

DEFAULTS = RequestDefaults(model_name="test-model", system_text=icl.icl_system_text())


class StubGateway:
    def __init__(self, responder):
        self.responder = responder
        self.requests = []

    def complete(self, request):
        self.requests.append(request)
        return ChatResponse(
            text=self.responder(request.user_text),
            input_token_count=1,
            output_token_count=1,
            latency_s=0.0,
            backend_id="stub",
        )


# ---------------------------------------------------------------------------
# demonstrations
# ---------------------------------------------------------------------------


def test_full_train_demonstrations_in_ascending_order(mini_split, mini_corpus):
    demos = icl.select_demonstrations(mini_split, mini_corpus, n=None)
    assert [d.cve_id for d in demos] == sorted(mini_split.train_cve_ids)
    explicit = icl.select_demonstrations(mini_split, mini_corpus, n=len(mini_split.train_cve_ids))
    assert [d.cve_id for d in explicit] == [d.cve_id for d in demos]


def test_demonstrations_nested_prefix_property(mini_split, mini_corpus):
    two = icl.select_demonstrations(mini_split, mini_corpus, n=2, seed=11)
    four = icl.select_demonstrations(mini_split, mini_corpus, n=4, seed=11)
    assert [d.cve_id for d in four[:2]] == [d.cve_id for d in two]


def test_demonstrations_only_from_train(mini_split, mini_corpus):
    demos = icl.select_demonstrations(mini_split, mini_corpus, n=4, seed=3)
    assert all(d.cve_id in mini_split.train_cve_ids for d in demos)


def test_demonstrations_oversized_request_errors(mini_split, mini_corpus):
    with pytest.raises(ValueError):
        icl.select_demonstrations(mini_split, mini_corpus, n=100)


def test_demonstration_carries_id_and_name_pairs(mini_split, mini_corpus):
    demos = icl.select_demonstrations(mini_split, mini_corpus)
    by_id = {d.cve_id: d for d in demos}
    pairs = by_id["CVE-2020-2222"].techniques[SI]
    assert ("T1005", "Data from Local System") in pairs
    assert ("T1135", "Network Share Discovery") in pairs


# ---------------------------------------------------------------------------
# prompt construction
# ---------------------------------------------------------------------------


def _build(mini_corpus, mini_split, cve_id="CVE-2021-21975", mapping_type=ET, features=None, n=2):
    features = features or icl.IclFeatures(num_demonstrations=n)
    demos = icl.select_demonstrations(mini_split, mini_corpus, n=n, seed=0)
    return icl.build_icl_prompt(
        mini_corpus.cves[cve_id],
        mapping_type,
        features,
        demos,
        icl.catalog_from_corpus(mini_corpus),
    )


def test_prompt_contains_appendix_example_line(mini_corpus, mini_split):
    prompt = _build(mini_corpus, mini_split)
    assert "Here is an example of predicted output: ['T1068', None," in prompt


def test_prompt_cvss_toggle(mini_corpus, mini_split):
    on = _build(mini_corpus, mini_split)
    assert "cvssV2.accessVector: NETWORK" in on
    off = _build(
        mini_corpus, mini_split,
        features=icl.IclFeatures(include_cvss=False, num_demonstrations=2),
    )
    assert "cvssV2." not in off


def test_prompt_cwe_toggle(mini_corpus, mini_split):
    on = _build(mini_corpus, mini_split)
    assert "CWE-918:" in on
    off = _build(
        mini_corpus, mini_split,
        features=icl.IclFeatures(include_cwe=False, num_demonstrations=2),
    )
    assert "CWE-918" not in off


def test_prompt_description_toggle_changes_header(mini_corpus, mini_split):
    on = _build(mini_corpus, mini_split)
    assert "attack_id,attack_name,attack_description" in on
    off = _build(
        mini_corpus, mini_split,
        features=icl.IclFeatures(include_attack_descriptions=False, num_demonstrations=2),
    )
    assert "attack_id,attack_name\n" in off
    assert "attack_description" not in off


def test_prompt_names_target_mapping_type(mini_corpus, mini_split):
    for mapping_type, phrase in (
        (ET, "exploitation technique"),
        (PI, "primary impact"),
        (SI, "secondary impact"),
    ):
        prompt = _build(mini_corpus, mini_split, mapping_type=mapping_type)
        assert f"relevant attack techniques of type {phrase}" in prompt


def test_prompt_excludes_target_cve_from_demonstrations(mini_corpus, mini_split):
    demos = icl.select_demonstrations(mini_split, mini_corpus, n=None)
    target = sorted(mini_split.train_cve_ids)[0]
    prompt = icl.build_icl_prompt(
        mini_corpus.cves[target], ET, icl.IclFeatures(), demos,
        icl.catalog_from_corpus(mini_corpus),
    )
    assert f'"{target}"' not in prompt


def test_prompt_length_monotone_in_demonstration_count(mini_corpus, mini_split):
    lengths = []
    for n in range(0, len(mini_split.train_cve_ids) + 1):
        features = icl.IclFeatures(num_demonstrations=n)
        demos = icl.select_demonstrations(mini_split, mini_corpus, n=n, seed=4)
        prompt = icl.build_icl_prompt(
            mini_corpus.cves["CVE-2021-21975"], ET, features, demos,
            icl.catalog_from_corpus(mini_corpus),
        )
        lengths.append(len(prompt))
    assert lengths == sorted(lengths)


def test_prompt_deterministic(mini_corpus, mini_split):
    assert _build(mini_corpus, mini_split) == _build(mini_corpus, mini_split)


# ---------------------------------------------------------------------------
# ranked response parsing
# ---------------------------------------------------------------------------


def test_parse_appendix_example_round_trip():
    ranked = icl.parse_ranked_response(APPENDIX_EXAMPLE)
    assert ranked.slots == (
        "T1068", NONE_LABEL, "T1168", "T1290", "T1078", "T1180", "T1010", "T1435", "T1320", "T1100",
    )
    assert ranked.slots[1] == NONE_LABEL
    rendered = icl.render_ranked_list(
        [None if s == NONE_LABEL else s for s in ranked.slots]
    )
    assert rendered == APPENDIX_EXAMPLE
    assert icl.parse_ranked_response(rendered) == ranked


def test_parse_empty_list_errors():
    with pytest.raises(icl.RankedResponseError):
        icl.parse_ranked_response("[]")


def test_parse_no_list_errors():
    with pytest.raises(icl.RankedResponseError):
        icl.parse_ranked_response("I cannot answer that.")


def test_parse_lifts_and_dedups_subtechniques():
    text = "['T1059.001', 'T1190', 'T1040', 'T1059', 'T1078', 'T1133', 'T1189', 'T1210', 'T1068', 'T1204', 'T1485']"
    ranked = icl.parse_ranked_response(text)
    assert ranked.slots[0] == "T1059"
    assert ranked.slots.count("T1059") == 1
    # the duplicate slot freed room for the 11th entry
    assert "T1485" in ranked.slots


def test_parse_pads_short_lists():
    ranked = icl.parse_ranked_response("['T1190', None]")
    assert ranked.slots[:2] == ("T1190", NONE_LABEL)
    assert ranked.slots[2:] == tuple([PAD_LABEL] * 8)


def test_parse_truncates_long_lists():
    entries = ", ".join(f"'T1{n:03d}'" for n in range(100, 115))
    ranked = icl.parse_ranked_response(f"[{entries}]")
    assert len(ranked.slots) == 10
    assert ranked.slots[-1] == "T1109"


def test_parse_keeps_first_none_only():
    ranked = icl.parse_ranked_response("[None, 'T1190', none, 'NONE', 'T1059']")
    assert ranked.slots[0] == NONE_LABEL
    assert ranked.slots.count(NONE_LABEL) == 1


def test_parse_tolerates_prose_and_case():
    ranked = icl.parse_ranked_response(
        "Sure! The ranked list is: ['t1190', 'T1059', None] as requested."
    )
    assert ranked.slots[0] == "T1190"
    assert ranked.slots[1] == "T1059"


def test_parse_skips_unrecognized_tokens():
    ranked = icl.parse_ranked_response("['T1190', 'banana', 'T1059']")
    assert ranked.slots[0] == "T1190"
    assert ranked.slots[1] == "T1059"


def test_parse_robustness_corpus():
    parsed = 0
    errored = 0
    for text in perturbed_responses():
        try:
            ranked = icl.parse_ranked_response(text)
        except icl.RankedResponseError:
            errored += 1
            continue
        parsed += 1
        assert isinstance(ranked, RankedList)
        techniques = ranked.techniques()
        assert len(set(techniques)) == len(techniques)
        assert all("." not in t for t in techniques)
        assert ranked.slots.count(NONE_LABEL) <= 1
    assert parsed + errored == 100
    assert parsed >= 80  # only the deliberately listless variants fail


# ---------------------------------------------------------------------------
# run_icl
# ---------------------------------------------------------------------------


def test_run_icl_parses_and_returns(mini_corpus, mini_split):
    gateway = StubGateway(lambda _: "['T1190', 'T1133', None]")
    result = icl.run_icl(
        gateway, mini_corpus.cves["CVE-2021-21975"], ET, icl.IclFeatures(num_demonstrations=2),
        mini_split, mini_corpus, DEFAULTS,
    )
    assert result.ranked.slots[0] == "T1190"
    assert not result.errors
    assert gateway.requests[0].system_text.startswith("You are a cybersecurity analyst")


def test_run_icl_retry_appends_reminder_then_pads(mini_corpus, mini_split):
    gateway = StubGateway(lambda _: "no list")
    result = icl.run_icl(
        gateway, mini_corpus.cves["CVE-2021-21975"], PI, icl.IclFeatures(num_demonstrations=2),
        mini_split, mini_corpus, DEFAULTS,
    )
    assert result.ranked == RankedList.all_pad()
    assert len(result.errors) == 2
    assert icl.FORMAT_REMINDER in gateway.requests[1].user_text


@pytest.mark.parametrize("junk", ["", "   ", "[,,,]", "[''],['']", "[None]"])
def test_parse_degenerate_inputs(junk):
    try:
        ranked = icl.parse_ranked_response(junk)
    except icl.RankedResponseError:
        return
    assert isinstance(ranked, RankedList)


def test_parse_arbitrary_text_never_crashes():
    from hypothesis import given, settings, strategies as st

    @settings(max_examples=200, deadline=None)
    @given(st.text(max_size=120))
    def run(text):
        try:
            ranked = icl.parse_ranked_response(text)
        except icl.RankedResponseError:
            return
        assert isinstance(ranked, RankedList)

    run()


def test_catalog_excludes_retired_and_sub_techniques(mini_corpus):
    import dataclasses

    from cvemap.types import TechniqueRef

    corpus = dataclasses.replace(mini_corpus)
    corpus.techniques = dict(mini_corpus.techniques)
    corpus.techniques["T1100"] = TechniqueRef("T1100", "Web Shell (retired)", "", deprecated=True)
    corpus.techniques["T1059.001"] = TechniqueRef(
        "T1059.001", "PowerShell", "Adversaries may abuse PowerShell."
    )
    ids = [t.id for t in icl.catalog_from_corpus(corpus)]
    assert "T1100" not in ids
    assert "T1059.001" not in ids
    assert "T1059" in ids
