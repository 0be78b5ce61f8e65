import json
from pathlib import Path

import pytest

from cvemap import corpus as corpus_mod
from cvemap import rules

TESTS_DIR = Path(__file__).parent
FIXTURES = TESTS_DIR / "fixtures"
GOLDENS = TESTS_DIR / "goldens"
REPO_ROOT = TESTS_DIR.parent
DATA_DIR = REPO_ROOT / "data"


@pytest.fixture(scope="session")
def tables():
    return rules.load_default_tables()


@pytest.fixture(scope="session")
def mini_corpus():
    return corpus_mod.load_corpus(FIXTURES / "mini_corpus.json")


@pytest.fixture(scope="session")
def mini_split(mini_corpus):
    return corpus_mod.split_corpus(mini_corpus, 0.2, seed=7)


@pytest.fixture(scope="session")
def sample_sources():
    return {
        "kev": DATA_DIR / "kev_mappings.csv",
        "nvd": DATA_DIR / "nvd_feed.json",
        "attack": DATA_DIR / "attack_bundle.json",
        "cwe": DATA_DIR / "cwe_catalog.csv",
    }


@pytest.fixture(scope="session")
def sample_corpus(sample_sources):
    kev = corpus_mod.parse_kev_mappings(sample_sources["kev"].read_bytes(), "csv")
    nvd, _ = corpus_mod.parse_nvd_records(sample_sources["nvd"].read_bytes())
    attack = corpus_mod.parse_attack_bundle(sample_sources["attack"].read_bytes())
    cwe = corpus_mod.parse_cwe_catalog(sample_sources["cwe"].read_bytes())
    corpus, unresolved = corpus_mod.enrich(kev, nvd, attack, cwe)
    assert not unresolved
    return corpus


def load_json(path):
    with open(path, encoding="utf-8") as handle:
        return json.load(handle)
