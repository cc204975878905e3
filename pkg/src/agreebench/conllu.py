"""CoNLL-U reading, validation, serialization, and verb-number enrichment."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Iterable

log = logging.getLogger(__name__)


class ConlluError(ValueError):
    """Malformed CoNLL-U input. The message names the offending line."""


@dataclass(frozen=True)
class MorphFeatures:
    """Morphological feature bundle, kept in canonical (name-sorted) order."""

    pairs: tuple[tuple[str, str], ...] = ()

    @classmethod
    def of(cls, **features: str) -> "MorphFeatures":
        return cls(tuple(sorted(features.items())))

    @classmethod
    def parse(cls, text: str) -> "MorphFeatures":
        if text == "_" or text == "":
            return cls(())
        pairs = []
        seen = set()
        for chunk in text.split("|"):
            name, sep, value = chunk.partition("=")
            if not sep or not name:
                raise ConlluError(f"feature pair without '=': {chunk!r}")
            if name in seen:
                raise ConlluError(f"duplicate feature name: {name!r}")
            seen.add(name)
            pairs.append((name, value))
        return cls(tuple(sorted(pairs)))

    def __str__(self) -> str:
        if not self.pairs:
            return "_"
        return "|".join(f"{n}={v}" for n, v in self.pairs)

    def __contains__(self, name: str) -> bool:
        return any(n == name for n, _ in self.pairs)

    def get(self, name: str, default: str | None = None) -> str | None:
        for n, v in self.pairs:
            if n == name:
                return v
        return default

    def without(self, name: str) -> "MorphFeatures":
        return MorphFeatures(tuple(p for p in self.pairs if p[0] != name))

    def updated(self, name: str, value: str) -> "MorphFeatures":
        kept = [p for p in self.pairs if p[0] != name]
        kept.append((name, value))
        return MorphFeatures(tuple(sorted(kept)))

    def items(self) -> tuple[tuple[str, str], ...]:
        return self.pairs


def parse_feats(text: str) -> MorphFeatures:
    return MorphFeatures.parse(text)


@dataclass(frozen=True)
class Token:
    index: int
    form: str
    lemma: str
    upos: str
    feats: MorphFeatures
    head: int
    deprel: str
    # Columns kept only for lossless round-tripping.
    xpos: str = "_"
    deps: str = "_"
    misc: str = "_"


@dataclass(frozen=True)
class Sentence:
    sent_id: str
    tokens: tuple[Token, ...]
    comments: tuple[str, ...] = field(default=(), compare=False)

    def __len__(self) -> int:
        return len(self.tokens)

    def token(self, index: int) -> Token:
        """1-based access matching CoNLL-U token ids."""
        return self.tokens[index - 1]


def _parse_token_line(line: str, lineno: int) -> Token:
    cols = line.split("\t")
    if len(cols) != 10:
        raise ConlluError(f"line {lineno}: expected 10 columns, got {len(cols)}")
    try:
        index = int(cols[0])
    except ValueError:
        raise ConlluError(f"line {lineno}: non-integer token id {cols[0]!r}") from None
    try:
        head = int(cols[6])
    except ValueError:
        raise ConlluError(f"line {lineno}: non-integer head {cols[6]!r}") from None
    if head < 0:
        raise ConlluError(f"line {lineno}: negative head {head}")
    return Token(
        index=index,
        form=cols[1],
        lemma=cols[2],
        upos=cols[3],
        feats=MorphFeatures.parse(cols[5]),
        head=head,
        deprel=cols[7],
        xpos=cols[4],
        deps=cols[8],
        misc=cols[9],
    )


def _tree_violation(tokens: list[Token]) -> str | None:
    n = len(tokens)
    for pos, tok in enumerate(tokens, start=1):
        if tok.index != pos:
            return f"token ids not contiguous (saw {tok.index} at position {pos})"
    for tok in tokens:
        if tok.head > n:
            return f"token {tok.index}: head {tok.head} out of range"
        if tok.head == tok.index:
            return f"token {tok.index}: self-headed"
    for tok in tokens:
        seen = set()
        cur = tok.index
        while cur != 0:
            if cur in seen:
                return f"cyclic head chain through token {tok.index}"
            seen.add(cur)
            cur = tokens[cur - 1].head
    return None


def _is_word_id(col0: str) -> bool:
    # Multiword ranges ("3-4") and empty nodes ("5.1") are not syntactic words.
    return col0.isdigit()


def parse_conllu(source: str | Iterable[str]) -> list[Sentence]:
    """Parse CoNLL-U text into sentences.

    Multiword-token range lines and empty-node lines are skipped. Sentences
    that violate the tree well-formedness rules (contiguous 1..n ids, heads
    in range, acyclic head chains) are dropped with a warning; malformed
    lines raise ConlluError naming the line.
    """
    if isinstance(source, str):
        lines: Iterable[str] = source.split("\n")
    else:
        lines = source

    sentences: list[Sentence] = []
    tokens: list[Token] = []
    comments: list[str] = []
    sent_id: str | None = None

    def flush(end_lineno: int) -> None:
        nonlocal tokens, comments, sent_id
        if not tokens:
            if comments:
                log.warning("dropping comment-only block ending at line %d", end_lineno)
            comments = []
            sent_id = None
            return
        sid = sent_id if sent_id is not None else f"s{len(sentences) + 1}"
        problem = _tree_violation(tokens)
        if problem is None:
            sentences.append(Sentence(sid, tuple(tokens), tuple(comments)))
        else:
            log.warning(
                "skipping sentence %s (ends at line %d): %s", sid, end_lineno, problem
            )
        tokens = []
        comments = []
        sent_id = None

    lineno = 0
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n").rstrip("\r")
        if line == "":
            flush(lineno)
            continue
        if line.startswith("#"):
            comments.append(line)
            body = line[1:].strip()
            if body.startswith("sent_id"):
                _, sep, value = body.partition("=")
                if sep:
                    sent_id = value.strip()
            continue
        col0 = line.split("\t", 1)[0]
        if not _is_word_id(col0):
            continue
        tokens.append(_parse_token_line(line, lineno))
    flush(lineno + 1)
    return sentences


def serialize_conllu(sentences: Iterable[Sentence]) -> str:
    out: list[str] = []
    for sent in sentences:
        has_sent_id = any(c[1:].strip().startswith("sent_id") for c in sent.comments)
        if not has_sent_id:
            out.append(f"# sent_id = {sent.sent_id}")
        out.extend(sent.comments)
        for tok in sent.tokens:
            out.append(
                "\t".join(
                    (
                        str(tok.index),
                        tok.form,
                        tok.lemma,
                        tok.upos,
                        tok.xpos,
                        str(tok.feats),
                        str(tok.head),
                        tok.deprel,
                        tok.deps,
                        tok.misc,
                    )
                )
            )
        out.append("")
    return "\n".join(out) + ("\n" if out else "")


def read_treebank(path: str, enrich_en_verbs: bool = False) -> list[Sentence]:
    with open(path, encoding="utf-8") as handle:
        sentences = parse_conllu(handle)
    if enrich_en_verbs:
        sentences = [enrich_english_verb_number(s) for s in sentences]
    return sentences


def enrich_english_verb_number(sentence: Sentence) -> Sentence:
    """Mark bare finite present-tense verbs and auxiliaries as plural.

    English treebanks carry an explicit Number only on third-person singular
    present forms; the remaining finite present forms are plural in every
    context that matters for number agreement, so they get Number=Plur.
    """
    changed = False
    new_tokens = []
    for tok in sentence.tokens:
        if (
            tok.upos in ("VERB", "AUX")
            and tok.feats.get("VerbForm") == "Fin"
            and tok.feats.get("Tense") == "Pres"
            and "Number" not in tok.feats
        ):
            new_tokens.append(replace(tok, feats=tok.feats.updated("Number", "Plur")))
            changed = True
        else:
            new_tokens.append(tok)
    if not changed:
        return sentence
    return Sentence(sentence.sent_id, tuple(new_tokens), sentence.comments)
