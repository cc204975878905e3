"""Substitution lexicon, counterpart index, and nonce/filler generation.

Randomness contract: all sampling uses CPython's Mersenne Twister
(random.Random). Each item draws from its own generator seeded with the low
64 bits of SHA-256("<master seed>:<item_id>"), so output depends only on
(seed, inputs) and not on processing order.
"""

from __future__ import annotations

import hashlib
import random
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Container, Sequence

from .conllu import MorphFeatures, Sentence, Token
from .miner import OPPOSITE_NUMBER, TestItem, count_attractors, token_number

CONTENT_POS = frozenset({"NOUN", "VERB", "ADJ", "PROPN", "NUM", "ADV"})


def item_seed(master_seed: int, item_id: str) -> int:
    digest = hashlib.sha256(f"{master_seed}:{item_id}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass(frozen=True)
class LexEntry:
    form: str
    lemma: str
    frequency: int


@dataclass
class SubstitutionLexicon:
    """Content-word forms keyed by (POS, full canonical feature bundle).

    Forms that show up under a different POS more than `ambiguity_threshold`
    of the time are excluded everywhere. Candidate lists are sorted by
    descending frequency, then form.
    """

    entries: dict[tuple[str, MorphFeatures], tuple[LexEntry, ...]]
    ambiguity_threshold: float = 0.1

    def candidates(self, upos: str, feats: MorphFeatures) -> tuple[LexEntry, ...]:
        return self.entries.get((upos, feats), ())


def build_lexicon(
    treebank: Sequence[Sentence], ambiguity_threshold: float = 0.1
) -> SubstitutionLexicon:
    pos_of_form: dict[str, Counter] = defaultdict(Counter)
    triple_counts: dict[tuple[str, MorphFeatures, str], Counter] = defaultdict(Counter)
    for sentence in treebank:
        for tok in sentence.tokens:
            pos_of_form[tok.form][tok.upos] += 1
            if tok.upos in CONTENT_POS:
                triple_counts[(tok.upos, tok.feats, tok.form)][tok.lemma] += 1

    def ambiguous(form: str, upos: str) -> bool:
        counts = pos_of_form[form]
        total = sum(counts.values())
        other = total - counts[upos]
        return other > ambiguity_threshold * total

    grouped: dict[tuple[str, MorphFeatures], list[LexEntry]] = defaultdict(list)
    for (upos, feats, form), lemmas in triple_counts.items():
        if ambiguous(form, upos):
            continue
        frequency = sum(lemmas.values())
        lemma = min(lemmas, key=lambda l: (-lemmas[l], l))
        grouped[(upos, feats)].append(LexEntry(form, lemma, frequency))

    entries = {
        key: tuple(sorted(forms, key=lambda e: (-e.frequency, e.form)))
        for key, forms in grouped.items()
    }
    return SubstitutionLexicon(entries=entries, ambiguity_threshold=ambiguity_threshold)


@dataclass
class CounterpartIndex:
    """Form lookup keyed by (lemma, POS, features minus Number, Number)."""

    entries: dict[tuple[str, str, MorphFeatures, str], str]

    def lookup(
        self, lemma: str, upos: str, feats: MorphFeatures, number: str
    ) -> str | None:
        return self.entries.get((lemma, upos, feats.without("Number"), number))


def build_counterpart_index(treebank: Sequence[Sentence]) -> CounterpartIndex:
    counts: dict[tuple, Counter] = defaultdict(Counter)
    for sentence in treebank:
        for tok in sentence.tokens:
            number = token_number(tok)
            if number is None:
                continue
            key = (tok.lemma, tok.upos, tok.feats.without("Number"), number)
            counts[key][tok.form] += 1
    entries = {
        key: min(forms, key=lambda f: (-forms[f], f)) for key, forms in counts.items()
    }
    return CounterpartIndex(entries=entries)


def _target_pool(
    target: Token,
    lexicon: SubstitutionLexicon,
    counterpart_index: CounterpartIndex,
    vocabulary: Container[str] | None,
) -> list[tuple[str, str]]:
    """(correct, wrong) replacement pairs for the target slot."""
    number = token_number(target)
    pool = []
    for entry in lexicon.candidates(target.upos, target.feats):
        if entry.form == target.form:
            continue
        wrong = counterpart_index.lookup(
            entry.lemma, target.upos, target.feats, OPPOSITE_NUMBER[number]
        )
        if wrong is None or wrong == entry.form:
            continue
        if vocabulary is not None and (
            entry.form not in vocabulary or wrong not in vocabulary
        ):
            continue
        pool.append((entry.form, wrong))
    return pool


def generate_nonce(
    item: TestItem,
    sentence: Sentence,
    lexicon: SubstitutionLexicon,
    counterpart_index: CounterpartIndex,
    vocabulary: Container[str] | None,
    n_variants: int = 9,
    seed: int = 0,
) -> list[TestItem]:
    """Morphology-preserving random variants of an original item.

    Every content word in the prefix and the target is replaced by a
    different form sharing its POS and full feature bundle; function words
    and punctuation stay put. Target replacements must have an in-vocabulary
    opposite-number counterpart. Slots with no usable replacement keep the
    original form and are listed in fallback_slots.
    """
    if item.kind != "original":
        raise ValueError("nonce variants are generated from original items only")
    rng = random.Random(item_seed(seed, item.item_id))
    prefix_tokens = sentence.tokens[: len(item.prefix)]
    target = sentence.token(item.target_index)
    cue = sentence.token(item.cue_index)
    cue_number = token_number(cue)
    target_pool = _target_pool(target, lexicon, counterpart_index, vocabulary)

    variants = []
    for variant_index in range(1, n_variants + 1):
        fallback: list[int] = []
        new_prefix: list[str] = []
        for offset, tok in enumerate(prefix_tokens):
            if tok.upos not in CONTENT_POS:
                new_prefix.append(tok.form)
                continue
            pool = [
                entry.form
                for entry in lexicon.candidates(tok.upos, tok.feats)
                if entry.form != tok.form
            ]
            if pool:
                new_prefix.append(pool[rng.randrange(len(pool))])
            else:
                new_prefix.append(tok.form)
                fallback.append(offset)
        if target.upos in CONTENT_POS and target_pool:
            correct, wrong = target_pool[rng.randrange(len(target_pool))]
        else:
            correct, wrong = item.correct_form, item.wrong_form
            fallback.append(len(item.prefix))
        if cue_number is not None:
            n_attractors = count_attractors(
                sentence, item.cue_index, item.target_index, cue.upos, cue_number
            )
        else:
            n_attractors = item.n_attractors
        variants.append(
            TestItem(
                item_id=f"{item.item_id.rsplit(':', 1)[0]}:{variant_index}",
                construction_id=item.construction_id,
                kind="nonce",
                source_sent_id=item.source_sent_id,
                variant_index=variant_index,
                prefix=tuple(new_prefix),
                correct_form=correct,
                wrong_form=wrong,
                cue_offset=item.cue_offset,
                n_attractors=n_attractors,
                fallback_slots=tuple(fallback),
            )
        )
    return variants


def generate_fillers(
    treebank: Sequence[Sentence],
    lexicon: SubstitutionLexicon,
    counterpart_index: CounterpartIndex,
    n: int,
    seed: int,
    vocabulary: Container[str] | None = None,
    n_variants: int = 9,
) -> list[TestItem]:
    """Original fillers plus their nonce counterparts.

    Each filler truncates a sampled sentence at a random content word that
    carries Number and has a known opposite-number counterpart; sentences
    with no such word are resampled.
    """
    rng = random.Random(seed)
    items: list[TestItem] = []
    usable: list[tuple[Sentence, list[int]]] = []
    for sentence in treebank:
        slots = []
        for tok in sentence.tokens:
            number = token_number(tok)
            if tok.index < 2 or tok.upos not in CONTENT_POS or number is None:
                continue
            wrong = counterpart_index.lookup(
                tok.lemma, tok.upos, tok.feats, OPPOSITE_NUMBER[number]
            )
            if wrong is None or wrong == tok.form:
                continue
            if vocabulary is not None and (
                tok.form not in vocabulary or wrong not in vocabulary
            ):
                continue
            slots.append(tok.index)
        if slots:
            usable.append((sentence, slots))
    if n > 0 and not usable:
        raise ValueError("treebank has no sentences with a substitutable target")

    for k in range(n):
        sentence, slots = usable[rng.randrange(len(usable))]
        target_index = slots[rng.randrange(len(slots))]
        target = sentence.token(target_index)
        wrong = counterpart_index.lookup(
            target.lemma,
            target.upos,
            target.feats,
            OPPOSITE_NUMBER[token_number(target)],
        )
        original = TestItem(
            item_id=f"filler-{k}:{sentence.sent_id}:{target_index}:0",
            construction_id="filler",
            kind="original",
            source_sent_id=sentence.sent_id,
            variant_index=0,
            prefix=tuple(t.form for t in sentence.tokens[: target_index - 1]),
            correct_form=target.form,
            wrong_form=wrong,
            cue_offset=0,
            n_attractors=0,
        )
        items.append(original)
        items.extend(
            generate_nonce(
                original,
                sentence,
                lexicon,
                counterpart_index,
                vocabulary,
                n_variants=n_variants,
                seed=seed,
            )
        )
    return items
