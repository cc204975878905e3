#!/usr/bin/env python3
"""Deterministic synthetic agreement grammar.

Sentences follow "the N1 (P the N2){1,2} V ." where the verb agrees in
number with N1 and every noun inside a prepositional phrase is an agreement
irrelevancy (and an attractor when its number is opposite). Emits a plain
tokenized training corpus and a dependency-annotated treebank so that the
full benchmark pipeline runs end to end on data a small language model can
actually learn.

Verb number is sampled uniformly, so corpus frequencies carry no usable
signal about the correct form.
"""

import argparse
import random
from pathlib import Path

NOUN_LEMMAS = [
    "dax", "blick", "wug", "toma", "fep", "gorp",
    "zup", "kiki", "bouba", "lirp", "mip", "tupa",
]
VERB_LEMMAS = [
    "snib", "vark", "plim", "grell", "quem",
    "dorf", "yib", "zast", "crun", "welf",
]
PREPOSITIONS = ["near", "behind", "above", "beside"]


def noun_form(lemma: str, number: str) -> str:
    return lemma + ("s" if number == "Plur" else "")


def verb_form(lemma: str, number: str) -> str:
    return lemma + ("s" if number == "Sing" else "")


def sample_sentence(rng: random.Random):
    """Returns (tokens, conllu_rows). Rows: form, lemma, upos, feats, head, deprel."""
    subject_number = rng.choice(["Sing", "Plur"])
    n_pps = 1 if rng.random() < 0.6 else 2
    subject = rng.choice(NOUN_LEMMAS)
    verb = rng.choice(VERB_LEMMAS)

    rows = []
    verb_index = 2 + 3 * n_pps + 1
    rows.append(("the", "the", "DET", "Definite=Def|PronType=Art", 2, "det"))
    rows.append(
        (
            noun_form(subject, subject_number),
            subject,
            "NOUN",
            f"Number={subject_number}",
            verb_index,
            "nsubj",
        )
    )
    attach_to = 2  # PPs chain: each noun modifies the previous noun
    for _ in range(n_pps):
        prep = rng.choice(PREPOSITIONS)
        inner_number = rng.choice(["Sing", "Plur"])
        inner = rng.choice(NOUN_LEMMAS)
        base = len(rows)
        rows.append((prep, prep, "ADP", "_", base + 3, "case"))
        rows.append(("the", "the", "DET", "Definite=Def|PronType=Art", base + 3, "det"))
        rows.append(
            (
                noun_form(inner, inner_number),
                inner,
                "NOUN",
                f"Number={inner_number}",
                attach_to,
                "nmod",
            )
        )
        attach_to = base + 3
    rows.append(
        (
            verb_form(verb, subject_number),
            verb,
            "VERB",
            f"Number={subject_number}|Tense=Pres|VerbForm=Fin",
            0,
            "root",
        )
    )
    rows.append((".", ".", "PUNCT", "_", verb_index, "punct"))
    return [row[0] for row in rows], rows


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--corpus-size", type=int, default=5000)
    parser.add_argument("--treebank-size", type=int, default=600)
    parser.add_argument("--seed", type=int, default=1234)
    args = parser.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    rng = random.Random(args.seed)
    with open(out / "corpus.txt", "w", encoding="utf-8") as handle:
        for _ in range(args.corpus_size):
            tokens, _ = sample_sentence(rng)
            handle.write(" ".join(tokens) + "\n")

    rng = random.Random(args.seed + 1)
    with open(out / "treebank.conllu", "w", encoding="utf-8") as handle:
        for i in range(args.treebank_size):
            _, rows = sample_sentence(rng)
            handle.write(f"# sent_id = synth-{i:04d}\n")
            for idx, (form, lemma, upos, feats, head, deprel) in enumerate(rows, 1):
                handle.write(
                    f"{idx}\t{form}\t{lemma}\t{upos}\t_\t{feats}\t{head}\t{deprel}\t_\t_\n"
                )
            handle.write("\n")
    print(f"wrote corpus.txt ({args.corpus_size}) and treebank.conllu "
          f"({args.treebank_size}) to {out}")


if __name__ == "__main__":
    main()
