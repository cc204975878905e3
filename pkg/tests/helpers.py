"""Mock scorers and small factories shared across test modules."""

import hashlib

from agreebench.conllu import MorphFeatures, Sentence, Token
from agreebench.harness import Scorer


class OracleScorer(Scorer):
    """Always prefers the first (correct) candidate."""

    def score(self, prefix, candidates):
        return (-0.5, -1.0)

    def metadata(self):
        return ("oracle", None)


class InvertedOracleScorer(Scorer):
    def score(self, prefix, candidates):
        return (-1.0, -0.5)

    def metadata(self):
        return ("inverted", None)


class ConstantScorer(Scorer):
    def score(self, prefix, candidates):
        return (-0.7, -0.7)

    def metadata(self):
        return ("constant", None)


class CoinFlipScorer(Scorer):
    """Deterministic pseudo-random preference derived from the inputs."""

    def __init__(self, seed: int):
        self.seed = seed

    def score(self, prefix, candidates):
        key = f"{self.seed}|{' '.join(prefix)}|{candidates[0]}|{candidates[1]}"
        digest = hashlib.sha256(key.encode()).digest()
        if digest[0] % 2 == 0:
            return (-0.5, -1.0)
        return (-1.0, -0.5)

    def metadata(self):
        return (f"coinflip-{self.seed}", None)


class RecordingScorer(Scorer):
    def __init__(self):
        self.calls = []

    def score(self, prefix, candidates):
        self.calls.append((tuple(prefix), tuple(candidates)))
        return (-0.5, -1.0)

    def metadata(self):
        return ("recording", None)


class FlakyScorer(Scorer):
    """Raises on item prefixes containing the poison token."""

    def __init__(self, poison="POISON"):
        self.poison = poison

    def score(self, prefix, candidates):
        if self.poison in prefix:
            raise RuntimeError("poisoned prefix")
        return (-0.5, -1.0)

    def metadata(self):
        return ("flaky", None)


def make_token(index, form, upos, feats="_", head=0, deprel="dep", lemma=None):
    return Token(
        index=index,
        form=form,
        lemma=lemma if lemma is not None else form,
        upos=upos,
        feats=MorphFeatures.parse(feats),
        head=head,
        deprel=deprel,
    )


def make_sentence(sent_id, specs):
    """specs: sequence of (form, upos, feats, head) or full token tuples."""
    tokens = []
    for i, spec in enumerate(specs, start=1):
        form, upos, feats, head = spec[:4]
        lemma = spec[4] if len(spec) > 4 else form
        tokens.append(make_token(i, form, upos, feats, head, lemma=lemma))
    return Sentence(sent_id, tuple(tokens))
