import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from agreebench.conllu import read_treebank
from agreebench.lexgen import build_counterpart_index, build_lexicon
from agreebench.miner import extract_original_testset, mine_constructions
from agreebench.ngram import build_vocab

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"

MINI_TREEBANK = FIXTURES / "mini_treebank.conllu"
MINI_CORPUS = FIXTURES / "mini_corpus.txt"
MINI_CONFIG = FIXTURES / "mini_config.json"
STUB_SCORER = FIXTURES / "stub_scorer.py"


@pytest.fixture(scope="session")
def mini_treebank():
    return read_treebank(str(MINI_TREEBANK), enrich_en_verbs=True)


@pytest.fixture(scope="session")
def mini_treebank_raw():
    return read_treebank(str(MINI_TREEBANK))


@pytest.fixture(scope="session")
def mini_corpus():
    with open(MINI_CORPUS, encoding="utf-8") as handle:
        return [line.split() for line in handle if line.strip()]


@pytest.fixture(scope="session")
def mini_vocab(mini_corpus):
    return build_vocab(mini_corpus)


@pytest.fixture(scope="session")
def mini_constructions(mini_treebank):
    return mine_constructions(mini_treebank, min_per_number=2)


@pytest.fixture(scope="session")
def mini_lexicon(mini_treebank):
    return build_lexicon(mini_treebank)


@pytest.fixture(scope="session")
def mini_counterparts(mini_treebank):
    return build_counterpart_index(mini_treebank)


@pytest.fixture(scope="session")
def mini_items(mini_treebank, mini_constructions, mini_vocab, mini_counterparts):
    return extract_original_testset(
        mini_treebank, mini_constructions, mini_vocab, mini_counterparts
    )


@pytest.fixture(scope="session")
def mini_sentences_by_id(mini_treebank):
    return {s.sent_id: s for s in mini_treebank}
