import math
from collections import Counter

import pytest
import torch

from refscorer.model import (
    EOS,
    UNK,
    build_vocab,
    load_checkpoint,
    train,
)
from refscorer.serve import score_candidates

SMALL_CORPUS_LINES = [
    "the dax snibs .",
    "the daxes snib .",
    "the wug varks .",
    "the wugs vark .",
    "the dax near the wug snibs .",
] * 6


@pytest.fixture(scope="module")
def small_corpus(tmp_path_factory):
    path = tmp_path_factory.mktemp("corpus") / "small.txt"
    path.write_text("\n".join(SMALL_CORPUS_LINES) + "\n")
    return path


def unigram_holdout_perplexity(path, holdout_every=9):
    """Add-one unigram perplexity with the same accounting as the model:
    targets are real tokens plus the end symbol."""
    sentences = [l.split() for l in open(path) if l.split()]
    training = [s for i, s in enumerate(sentences) if i % holdout_every != holdout_every - 1]
    validation = [s for i, s in enumerate(sentences) if i % holdout_every == holdout_every - 1]
    counts = Counter(t for s in training for t in s)
    counts[EOS] = len(training)
    z = sum(counts.values()) + len(counts) + 1
    total = 0.0
    n = 0
    for sent in validation:
        for token in sent + [EOS]:
            total += math.log((counts.get(token, 0) + 1) / z)
            n += 1
    return math.exp(-total / n)


class TestTraining:
    def test_same_seed_same_perplexity(self, small_corpus):
        _, a = train(str(small_corpus), epochs=2, seed=5)
        _, b = train(str(small_corpus), epochs=2, seed=5)
        assert a == b

    def test_different_seed_differs(self, small_corpus):
        _, a = train(str(small_corpus), epochs=2, seed=5)
        _, b = train(str(small_corpus), epochs=2, seed=6)
        assert a != b

    def test_untrained_is_near_uniform(self, small_corpus):
        model, ppl = train(str(small_corpus), epochs=0, seed=1)
        vocab_size = len(model.vocab)
        assert 0.5 * vocab_size < ppl < 2.0 * vocab_size

    def test_beats_unigram_on_synthetic_grammar(self, synth_dir):
        corpus = synth_dir / "corpus.txt"
        _, lstm_ppl = train(str(corpus), epochs=3, seed=0)
        unigram_ppl = unigram_holdout_perplexity(corpus)
        assert lstm_ppl < unigram_ppl

    def test_empty_corpus_rejected(self, tmp_path):
        empty = tmp_path / "empty.txt"
        empty.write_text("")
        with pytest.raises(ValueError):
            train(str(empty), epochs=1, seed=0)

    def test_unknowns_excluded_from_validation(self, tmp_path):
        # A tiny vocabulary forces unknowns into the validation split.
        path = tmp_path / "c.txt"
        path.write_text("\n".join(SMALL_CORPUS_LINES) + "\n")
        model, ppl = train(str(path), epochs=0, seed=0, vocab_size=3)
        assert UNK in model.vocab
        assert math.isfinite(ppl)


class TestScoring:
    def test_softmax_rows_sum_to_one(self, small_corpus):
        model, _ = train(str(small_corpus), epochs=1, seed=2)
        ids = torch.tensor([[model.stoi["<s>"], model.token_id("the"), model.token_id("dax")]])
        probs = torch.softmax(model.forward(ids), dim=-1)
        sums = probs.sum(dim=-1)
        assert torch.allclose(sums, torch.ones_like(sums), atol=1e-5)

    def test_logprobs_finite_and_nonpositive(self, small_corpus):
        model, _ = train(str(small_corpus), epochs=1, seed=2)
        logprobs = model.next_token_logprobs(["the", "dax"])
        assert torch.isfinite(logprobs).all()
        assert (logprobs <= 0).all()

    def test_scoring_is_deterministic(self, small_corpus):
        model, _ = train(str(small_corpus), epochs=1, seed=2)
        a = model.next_token_logprobs(["the", "dax", "near", "the", "wugs"])
        b = model.next_token_logprobs(["the", "dax", "near", "the", "wugs"])
        assert torch.equal(a, b)

    def test_unknown_candidate_flagged_and_scored_as_unk(self, small_corpus, capsys):
        model, _ = train(str(small_corpus), epochs=1, seed=2)
        scores = score_candidates(model, ["the"], ["dax", "xylophone"])
        err = capsys.readouterr().err
        assert "xylophone" in err
        unk_score = model.next_token_logprobs(["the"])[model.stoi[UNK]].item()
        assert scores[1] == unk_score

    def test_checkpoint_round_trip(self, small_corpus, tmp_path):
        from refscorer.model import save_checkpoint

        model, ppl = train(str(small_corpus), epochs=1, seed=3)
        path = tmp_path / "m.pt"
        save_checkpoint(str(path), model, ppl, seed=3)
        again, ppl_again = load_checkpoint(str(path))
        assert ppl_again == ppl
        x = model.next_token_logprobs(["the", "wug"])
        y = again.next_token_logprobs(["the", "wug"])
        assert torch.equal(x, y)


class TestVocab:
    def test_reserved_symbols_lead(self):
        vocab = build_vocab([["b", "a", "b"]])
        assert vocab[:4] == ["<pad>", "<unk>", "<s>", "</s>"]
        assert vocab[4:] == ["b", "a"]

    def test_size_cap(self):
        vocab = build_vocab([["a", "b", "c", "a"]], size=2)
        assert vocab[4:] == ["a", "b"]
