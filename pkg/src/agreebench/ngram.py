"""Vocabulary construction, corpus filtering, the unigram baseline, and an
interpolated modified Kneser-Ney n-gram language model.

Model accounting conventions:
  * each sentence is padded with order-1 start symbols and one end symbol;
    start symbols are never predicted, the end symbol is
  * the top order uses raw counts, lower orders use continuation counts
  * three per-order discounts (for counts 1, 2, 3+) estimated from that
    order's counts-of-counts; a zero denominator falls back to 0.5*k, and
    discounts are clamped into [1e-9, k - 1e-9] so every observed history
    keeps strictly positive backoff mass
  * the recursion bottoms out at a uniform distribution over the prediction
    space: vocabulary words, the unknown marker, and the end symbol
"""

from __future__ import annotations

import gzip
import json
import math
from collections import Counter, defaultdict
from typing import Callable, Iterable, Mapping, Sequence

UNK = "<unk>"
BOS = "<s>"
EOS = "</s>"
RESERVED = (UNK, BOS, EOS)

_DISCOUNT_EPS = 1e-9
MODEL_FORMAT = "agreebench-kn"
MODEL_FORMAT_VERSION = 1
MODEL_VARIANT = "interpolated modified Kneser-Ney, three discounts per order"


class Vocabulary:
    """Frequency-ranked word list with reserved markers outside the budget."""

    def __init__(self, ranked: Sequence[tuple[str, int]]):
        self.ranked = tuple(ranked)
        self._index = {w: i for i, (w, _) in enumerate(self.ranked)}

    def __contains__(self, word: str) -> bool:
        return word in self._index

    def __len__(self) -> int:
        return len(self.ranked)

    @property
    def words(self) -> tuple[str, ...]:
        return tuple(w for w, _ in self.ranked)

    def frequency(self, word: str) -> int:
        i = self._index.get(word)
        return 0 if i is None else self.ranked[i][1]

    def frequencies(self) -> dict[str, int]:
        return dict(self.ranked)

    def map_token(self, token: str) -> str:
        if token in self._index or token in RESERVED:
            return token
        return UNK

    def map_sentence(self, tokens: Iterable[str]) -> list[str]:
        return [self.map_token(t) for t in tokens]

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            for word, freq in self.ranked:
                handle.write(f"{word}\t{freq}\n")

    @classmethod
    def load(cls, path: str) -> "Vocabulary":
        ranked = []
        with open(path, encoding="utf-8") as handle:
            for line in handle:
                line = line.rstrip("\n")
                if not line:
                    continue
                word, _, freq = line.partition("\t")
                ranked.append((word, int(freq) if freq else 0))
        return cls(ranked)


def build_vocab(sentences: Iterable[Sequence[str]], size: int = 50000) -> Vocabulary:
    """Top `size` corpus words by frequency, ties broken alphabetically."""
    counts: Counter = Counter()
    for sent in sentences:
        counts.update(sent)
    for symbol in RESERVED:
        counts.pop(symbol, None)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:size]
    return Vocabulary(ranked)


def filter_corpus(
    sentences: Iterable,
    known,
    max_unknown_ratio: float = 0.05,
    key: Callable | None = None,
):
    """Drop sentences whose unknown-token ratio strictly exceeds the limit.

    `key` extracts the token sequence checked against `known`; by default the
    sentence itself is the token sequence. Empty sentences are kept.
    """
    for sentence in sentences:
        tokens = key(sentence) if key is not None else sentence
        total = len(tokens)
        if total == 0:
            yield sentence
            continue
        unknown = sum(1 for t in tokens if t not in known)
        if unknown / total > max_unknown_ratio:
            continue
        yield sentence


def unigram_choose(frequencies: Mapping[str, int], form_a: str, form_b: str) -> str:
    """Most frequent of the two forms; ties go to the alphabetically smaller."""
    freq_a = frequencies.get(form_a, 0)
    freq_b = frequencies.get(form_b, 0)
    if freq_a != freq_b:
        return form_a if freq_a > freq_b else form_b
    return min(form_a, form_b)


def _order_discounts(used: Mapping[tuple, int], bucket_count: int = 3) -> tuple[float, ...]:
    counts_of_counts = Counter(used.values())
    n = [counts_of_counts[i] for i in range(1, bucket_count + 2)]
    y = n[0] / (n[0] + 2 * n[1]) if (n[0] + 2 * n[1]) > 0 else 0.0
    discounts = []
    for k in range(1, bucket_count + 1):
        denominator = n[k - 1]
        if denominator == 0:
            d = 0.5 * k
        else:
            d = k - (k + 1) * y * n[k] / denominator
        discounts.append(min(max(d, _DISCOUNT_EPS), k - _DISCOUNT_EPS))
    return tuple(discounts)


class KNModel:
    """Trained interpolated modified Kneser-Ney model.

    Immutable after construction; safe to query from multiple threads.
    """

    def __init__(
        self,
        order: int,
        vocab: Vocabulary,
        used_counts: Sequence[Mapping[tuple, int]],
        discounts: Sequence[Sequence[float]] | None = None,
    ):
        # used_counts[k-1] holds the count table actually used at order k.
        self.order = order
        self.vocab = vocab
        self.counts: list[dict[tuple, int]] = [dict(t) for t in used_counts]
        self.uniform = 1.0 / (len(vocab) + 2)
        if discounts is None:
            self.discounts = [_order_discounts(t) for t in self.counts]
        else:
            self.discounts = [tuple(d) for d in discounts]
        self._totals: list[dict[tuple, int]] = []
        self._buckets: list[dict[tuple, tuple[int, int, int]]] = []
        for table in self.counts:
            totals: dict[tuple, int] = defaultdict(int)
            buckets: dict[tuple, list[int]] = defaultdict(lambda: [0, 0, 0])
            for gram, count in table.items():
                history = gram[:-1]
                totals[history] += count
                buckets[history][min(count, 3) - 1] += 1
            self._totals.append(dict(totals))
            self._buckets.append({h: tuple(b) for h, b in buckets.items()})

    @classmethod
    def uniform_model(cls, vocab: Vocabulary, order: int = 5) -> "KNModel":
        """Untrained model: every query falls through to the uniform base."""
        return cls(order, vocab, [{} for _ in range(order)])

    def prob(self, history: Sequence[str], word: str) -> float:
        h = tuple(self.vocab.map_token(t) for t in history)
        if len(h) > self.order - 1:
            h = h[len(h) - (self.order - 1) :]
        return self._p(h, self.vocab.map_token(word))

    def logprob(self, history: Sequence[str], word: str) -> float:
        return math.log(self.prob(history, word))

    def _p(self, h: tuple, w: str) -> float:
        k = len(h) + 1
        lower = self._p(h[1:], w) if k > 1 else self.uniform
        total = self._totals[k - 1].get(h)
        if not total:
            return lower
        d1, d2, d3 = self.discounts[k - 1]
        n1, n2, n3p = self._buckets[k - 1][h]
        gamma = (d1 * n1 + d2 * n2 + d3 * n3p) / total
        c = self.counts[k - 1].get(h + (w,), 0)
        if c == 0:
            discounted = 0.0
        else:
            discounted = c - (d1 if c == 1 else d2 if c == 2 else d3)
        return max(discounted, 0.0) / total + gamma * lower

    def prediction_space(self) -> tuple[str, ...]:
        return self.vocab.words + (UNK, EOS)

    def save(self, path: str) -> None:
        payload = {
            "format": MODEL_FORMAT,
            "format_version": MODEL_FORMAT_VERSION,
            "variant": MODEL_VARIANT,
            "order": self.order,
            "vocab": [[w, f] for w, f in self.vocab.ranked],
            "discounts": [list(d) for d in self.discounts],
            "counts": [
                sorted((" ".join(g), c) for g, c in table.items())
                for table in self.counts
            ],
        }
        with gzip.open(path, "wt", encoding="utf-8") as handle:
            json.dump(payload, handle, ensure_ascii=False)

    @classmethod
    def load(cls, path: str) -> "KNModel":
        with gzip.open(path, "rt", encoding="utf-8") as handle:
            payload = json.load(handle)
        if payload.get("format") != MODEL_FORMAT:
            raise ValueError(f"{path}: not a {MODEL_FORMAT} file")
        if payload.get("format_version") != MODEL_FORMAT_VERSION:
            raise ValueError(
                f"{path}: unsupported format version {payload.get('format_version')}"
            )
        vocab = Vocabulary([(w, f) for w, f in payload["vocab"]])
        used = [
            {tuple(g.split(" ")): c for g, c in table} for table in payload["counts"]
        ]
        return cls(payload["order"], vocab, used)

    def dump_counts(self, path: str) -> None:
        """Plain-text count dump: order, space-joined gram, count."""
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(f"# {MODEL_VARIANT}\n")
            for k, table in enumerate(self.counts, start=1):
                d1, d2, d3 = self.discounts[k - 1]
                handle.write(f"# order {k} discounts {d1:.12g} {d2:.12g} {d3:.12g}\n")
                for gram in sorted(table):
                    handle.write(f"{k}\t{' '.join(gram)}\t{table[gram]}\n")


def train_kn(
    sentences: Iterable[Sequence[str]], vocabulary: Vocabulary, order: int = 5
) -> KNModel:
    """Count n-grams over the padded, vocabulary-mapped corpus and build the
    smoothed model. Raises on a corpus with no predictable positions."""
    raw: list[dict[tuple, int]] = [defaultdict(int) for _ in range(order)]
    positions = 0
    for sent in sentences:
        mapped = vocabulary.map_sentence(sent)
        padded = [BOS] * (order - 1) + mapped + [EOS]
        for i in range(order - 1, len(padded)):
            positions += 1
            for k in range(1, order + 1):
                raw[k - 1][tuple(padded[i - k + 1 : i + 1])] += 1
    if positions == 0:
        raise ValueError("empty corpus: nothing to train on")

    used: list[dict[tuple, int]] = [dict() for _ in range(order)]
    used[order - 1] = dict(raw[order - 1])
    for k in range(order - 1, 0, -1):
        continuation: dict[tuple, int] = defaultdict(int)
        for gram in raw[k]:
            continuation[gram[1:]] += 1
        used[k - 1] = dict(continuation)
    return KNModel(order, vocabulary, used)


def kn_logprob(model: KNModel, history: Sequence[str], word: str) -> float:
    return model.logprob(history, word)


def perplexity(
    model: KNModel, sentences: Iterable[Sequence[str]], exclude_unknown: bool = True
) -> float:
    """exp of the average negative log probability per predicted position.

    Positions whose target maps to the unknown marker are excluded from both
    the sum and the count when exclude_unknown is set; unknown tokens still
    condition later positions through the history.
    """
    total = 0.0
    n = 0
    for sent in sentences:
        mapped = model.vocab.map_sentence(sent)
        padded = [BOS] * (model.order - 1) + mapped + [EOS]
        for i in range(model.order - 1, len(padded)):
            target = padded[i]
            if exclude_unknown and target == UNK:
                continue
            total += model.logprob(padded[:i], target)
            n += 1
    if n == 0:
        raise ValueError("no predictable positions after exclusions")
    return math.exp(-total / n)
