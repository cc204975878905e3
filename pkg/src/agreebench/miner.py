"""Mining long-distance agreement constructions and the original test set."""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Container, Iterable, Sequence

from .conllu import Sentence

NUMBER_VALUES = ("Sing", "Plur")
OPPOSITE_NUMBER = {"Sing": "Plur", "Plur": "Sing"}


def token_number(token) -> str | None:
    """Number feature restricted to the singular/plural opposition."""
    value = token.feats.get("Number")
    return value if value in NUMBER_VALUES else None


@dataclass(frozen=True)
class Instance:
    sent_id: str
    cue_index: int
    target_index: int
    cue_number: str | None
    target_number: str | None
    context_top_indices: tuple[int, ...]

    def to_json_obj(self, construction_id: str) -> dict:
        return {
            "construction_id": construction_id,
            "sent_id": self.sent_id,
            "cue_index": self.cue_index,
            "target_index": self.target_index,
            "cue_number": self.cue_number,
            "target_number": self.target_number,
            "context_top_indices": list(self.context_top_indices),
        }


@dataclass(frozen=True)
class Construction:
    id: str
    cue_pos: str
    target_pos: str
    context_pos: tuple[str, ...]
    instance_count_sing: int
    instance_count_plur: int
    instances: tuple[Instance, ...] = field(default=(), repr=False)

    def to_json_obj(self) -> dict:
        return {
            "id": self.id,
            "cue_pos": self.cue_pos,
            "target_pos": self.target_pos,
            "context_pos": list(self.context_pos),
            "instance_count_sing": self.instance_count_sing,
            "instance_count_plur": self.instance_count_plur,
        }


@dataclass(frozen=True)
class TestItem:
    item_id: str
    construction_id: str
    kind: str  # "original" | "nonce"
    source_sent_id: str
    variant_index: int  # 0 for original, 1..n for nonce variants
    prefix: tuple[str, ...]
    correct_form: str
    wrong_form: str
    cue_offset: int  # 0-based position of the cue within the prefix
    n_attractors: int
    fallback_slots: tuple[int, ...] = ()

    @property
    def target_index(self) -> int:
        """1-based position of the target in the source sentence."""
        return len(self.prefix) + 1

    @property
    def cue_index(self) -> int:
        return self.cue_offset + 1

    def to_json_obj(self) -> dict:
        obj = {
            "item_id": self.item_id,
            "construction_id": self.construction_id,
            "kind": self.kind,
            "source_sent_id": self.source_sent_id,
            "variant_index": self.variant_index,
            "prefix": list(self.prefix),
            "correct_form": self.correct_form,
            "wrong_form": self.wrong_form,
            "cue_offset": self.cue_offset,
            "n_attractors": self.n_attractors,
        }
        if self.kind == "nonce":
            obj["fallback_slots"] = list(self.fallback_slots)
        return obj

    @classmethod
    def from_json_obj(cls, obj: dict) -> "TestItem":
        return cls(
            item_id=obj["item_id"],
            construction_id=obj["construction_id"],
            kind=obj["kind"],
            source_sent_id=obj["source_sent_id"],
            variant_index=obj["variant_index"],
            prefix=tuple(obj["prefix"]),
            correct_form=obj["correct_form"],
            wrong_form=obj["wrong_form"],
            cue_offset=obj["cue_offset"],
            n_attractors=obj["n_attractors"],
            fallback_slots=tuple(obj.get("fallback_slots", ())),
        )


def extract_arcs(sentence: Sentence) -> list[tuple[int, int]]:
    """All dependency arcs as (cue_index, target_index) pairs in surface order.

    The linearly first element is the cue regardless of which side heads the
    relation. Adjacent pairs are included here; distance filtering happens
    during construction mining.
    """
    arcs = []
    for tok in sentence.tokens:
        if tok.head == 0:
            continue
        arcs.append((min(tok.head, tok.index), max(tok.head, tok.index)))
    arcs.sort()
    return arcs


def context_of(sentence: Sentence, cue_index: int, target_index: int) -> list[str]:
    """POS tags of the top-level tokens strictly between cue and target.

    A token is top-level when its head lies outside the open interval
    (cue_index, target_index): on the cue, on the target, or beyond the span.
    """
    if cue_index >= target_index:
        raise ValueError("cue_index must precede target_index")
    tags = []
    for idx in range(cue_index + 1, target_index):
        head = sentence.token(idx).head
        if not (cue_index < head < target_index):
            tags.append(sentence.token(idx).upos)
    return tags


def _context_top_indices(sentence: Sentence, cue_index: int, target_index: int) -> tuple[int, ...]:
    return tuple(
        idx
        for idx in range(cue_index + 1, target_index)
        if not (cue_index < sentence.token(idx).head < target_index)
    )


def mine_constructions(
    treebank: Sequence[Sentence],
    min_context_tokens: int = 3,
    min_per_number: int = 10,
) -> list[Construction]:
    """Group arc instances into POS-pattern constructions and filter them.

    An instance qualifies when at least `min_context_tokens` tokens intervene
    between cue and target. A group is dropped when any instance with both
    sides annotated for Number disagrees, or when fewer than `min_per_number`
    fully-annotated instances exist for either number. Instances missing a
    Number annotation on either side neither veto a group nor count toward
    the thresholds.
    """
    groups: dict[tuple, list[Instance]] = defaultdict(list)
    for sentence in treebank:
        for cue_index, target_index in extract_arcs(sentence):
            if target_index - cue_index - 1 < min_context_tokens:
                continue
            cue = sentence.token(cue_index)
            target = sentence.token(target_index)
            top_indices = _context_top_indices(sentence, cue_index, target_index)
            context = tuple(sentence.token(i).upos for i in top_indices)
            key = (cue.upos, context, target.upos)
            groups[key].append(
                Instance(
                    sent_id=sentence.sent_id,
                    cue_index=cue_index,
                    target_index=target_index,
                    cue_number=token_number(cue),
                    target_number=token_number(target),
                    context_top_indices=top_indices,
                )
            )

    retained = []
    for (cue_pos, context, target_pos), instances in groups.items():
        mismatch = any(
            inst.cue_number is not None
            and inst.target_number is not None
            and inst.cue_number != inst.target_number
            for inst in instances
        )
        if mismatch:
            continue
        n_sing = sum(
            1 for i in instances if i.cue_number == "Sing" and i.target_number == "Sing"
        )
        n_plur = sum(
            1 for i in instances if i.cue_number == "Plur" and i.target_number == "Plur"
        )
        if n_sing < min_per_number or n_plur < min_per_number:
            continue
        # Canonical instance order keeps the output independent of the
        # sentence order of the treebank.
        ordered = sorted(instances, key=lambda i: (i.sent_id, i.cue_index, i.target_index))
        retained.append(
            Construction(
                id=" ".join((cue_pos,) + context + (target_pos,)),
                cue_pos=cue_pos,
                target_pos=target_pos,
                context_pos=context,
                instance_count_sing=n_sing,
                instance_count_plur=n_plur,
                instances=tuple(ordered),
            )
        )
    retained.sort(key=lambda c: c.id)
    return retained


def count_attractors(
    sentence: Sentence,
    cue_index: int,
    target_index: int,
    cue_pos: str,
    cue_number: str,
) -> int:
    """Intervening tokens with the cue's POS and the opposite number."""
    if cue_number not in NUMBER_VALUES:
        raise ValueError(f"cue_number must be Sing or Plur, got {cue_number!r}")
    opposite = OPPOSITE_NUMBER[cue_number]
    count = 0
    for idx in range(cue_index + 1, target_index):
        tok = sentence.token(idx)
        if tok.upos == cue_pos and token_number(tok) == opposite:
            count += 1
    return count


def extract_original_testset(
    treebank: Sequence[Sentence],
    constructions: Sequence[Construction],
    vocabulary: Container[str],
    counterpart_index,
) -> list[TestItem]:
    """One test item per instance whose target has a usable counterpart.

    Requirements: both cue and target annotated for Number, every form from
    the cue through the target present in the vocabulary, and the target's
    opposite-number counterpart present in both the counterpart index and the
    vocabulary.
    """
    by_id = {s.sent_id: s for s in treebank}
    items = []
    for construction in constructions:
        for inst in construction.instances:
            if inst.cue_number is None or inst.target_number is None:
                continue
            sentence = by_id.get(inst.sent_id)
            if sentence is None:
                continue
            target = sentence.token(inst.target_index)
            span = sentence.tokens[inst.cue_index - 1 : inst.target_index]
            if any(tok.form not in vocabulary for tok in span):
                continue
            wrong = counterpart_index.lookup(
                target.lemma,
                target.upos,
                target.feats,
                OPPOSITE_NUMBER[inst.target_number],
            )
            if wrong is None or wrong == target.form or wrong not in vocabulary:
                continue
            prefix = tuple(t.form for t in sentence.tokens[: inst.target_index - 1])
            items.append(
                TestItem(
                    item_id=f"{inst.sent_id}:{inst.cue_index}-{inst.target_index}:0",
                    construction_id=construction.id,
                    kind="original",
                    source_sent_id=inst.sent_id,
                    variant_index=0,
                    prefix=prefix,
                    correct_form=target.form,
                    wrong_form=wrong,
                    cue_offset=inst.cue_index - 1,
                    n_attractors=count_attractors(
                        sentence,
                        inst.cue_index,
                        inst.target_index,
                        sentence.token(inst.cue_index).upos,
                        inst.cue_number,
                    ),
                )
            )
    return items


def write_jsonl(path: str, objs: Iterable[dict]) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for obj in objs:
            handle.write(json.dumps(obj, ensure_ascii=False))
            handle.write("\n")


def read_items(path: str) -> list[TestItem]:
    items = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                items.append(TestItem.from_json_obj(json.loads(line)))
    return items
