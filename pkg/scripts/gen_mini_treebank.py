#!/usr/bin/env python3
"""Regenerate the mini treebank fixture, its LM corpus, and the run config.

The treebank is 60 sentences with fully hand-specified dependency structure.
Mining it (with --enrich-en-verbs, min_per_number=2) must retain exactly:

  NOUN VERB ADV VERB   13 instances (7 Sing, 6 Plur); attractors 0/1/2
  NOUN VERB VERB        6 instances (3 Sing, 3 Plur); 1 attractor each

while three candidate patterns are dropped:

  VERB DET ADJ NOUN     verb-object; one number mismatch vetoes the group
  NOUN NOUN VERB        inner relative arcs; mismatch via the 2-attractor
                        sentences ("the girl ... like") vetoes the group
  VERB NOUN CCONJ VERB  agreeing but only 1 instance per number

tests/test_miner.py and tests/test_acceptance.py freeze these expectations;
regenerate with care.
"""

import json
import random
from pathlib import Path

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

DET = ("the", "the", "DET", "Definite=Def|PronType=Art")
PUNCT = (".", ".", "PUNCT", "_")

SING_NOUNS = [
    "girl", "boy", "dog", "cat", "bird", "horse",
    "teacher", "student", "farmer", "doctor", "yesterday",
    "bread", "cheese",
]
PLUR_NOUNS = {
    "girls": "girl", "boys": "boy", "dogs": "dog", "cats": "cat",
    "birds": "bird", "horses": "horse", "teachers": "teacher",
    "students": "student", "farmers": "farmer", "doctors": "doctor",
    "apples": "apple", "books": "book",
}
SING_VERBS = {
    "goes": "go", "runs": "run", "sings": "sing", "sleeps": "sleep",
    "smiles": "smile", "waits": "wait", "likes": "like", "sees": "see",
    "loves": "love", "knows": "know", "meets": "meet", "chases": "chase",
}
PLUR_VERBS = {
    "go": "go", "run": "run", "sing": "sing", "sleep": "sleep",
    "smile": "smile", "wait": "wait", "like": "like", "see": "see",
    "love": "love", "know": "know", "meet": "meet", "chase": "chase",
}
PAST_VERBS = {"met": "meet", "saw": "see"}
ADVS = ["often", "quickly", "quietly", "happily", "really"]
ADJS = ["old", "young", "small", "happy"]


def noun(form, head, deprel):
    if form in PLUR_NOUNS:
        return (form, PLUR_NOUNS[form], "NOUN", "Number=Plur", head, deprel)
    assert form in SING_NOUNS, form
    return (form, form, "NOUN", "Number=Sing", head, deprel)


def verb(form, head, deprel):
    if form in SING_VERBS:
        feats = "Number=Sing|Tense=Pres|VerbForm=Fin"
        lemma = SING_VERBS[form]
    elif form in PLUR_VERBS:
        # Bare feats: the enrichment pass is what adds Number=Plur.
        feats = "Tense=Pres|VerbForm=Fin"
        lemma = PLUR_VERBS[form]
    else:
        feats = "Tense=Past|VerbForm=Fin"
        lemma = PAST_VERBS[form]
    return (form, lemma, "VERB", feats, head, deprel)


def adv(form, head, deprel="advmod"):
    return (form, form, "ADV", "_", head, deprel)


def adj(form, head):
    return (form, form, "ADJ", "Degree=Pos", head, "amod")


def det(head):
    return DET + (head, "det")


def punct(head):
    return PUNCT + (head, "punct")


def t1_relative_adv(n1, n2, vt, ad, v):
    """the N1 the N2 VT ADV V .  -> NOUN VERB ADV VERB at (2, 7)"""
    return [
        det(2), noun(n1, 7, "nsubj"),
        det(4), noun(n2, 5, "nsubj"), verb(vt, 2, "acl:relcl"),
        adv(ad, 7), verb(v, 0, "root"), punct(7),
    ]


def t2_you_past(n1, vpast, ad, v):
    """the N1 you VPAST yesterday ADV V .  -> NOUN VERB ADV VERB at (2, 7)"""
    return [
        det(2), noun(n1, 7, "nsubj"),
        ("you", "you", "PRON", "Case=Nom|Person=2|PronType=Prs", 4, "nsubj"),
        verb(vpast, 2, "acl:relcl"), noun("yesterday", 4, "obl:tmod"),
        adv(ad, 7), verb(v, 0, "root"), punct(7),
    ]


def t3_relative(n1, n2, vt, v):
    """the N1 the N2 VT V .  -> NOUN VERB VERB at (2, 6)"""
    return [
        det(2), noun(n1, 6, "nsubj"),
        det(4), noun(n2, 5, "nsubj"), verb(vt, 2, "acl:relcl"),
        verb(v, 0, "root"), punct(6),
    ]


def t4_deep_relative(n1, n2, n3, vt, ad, v):
    """the N1 the N2 of the N3 VT ADV V .  -> NOUN VERB ADV VERB at (2, 10)"""
    return [
        det(2), noun(n1, 10, "nsubj"),
        det(4), noun(n2, 8, "nsubj"),
        ("of", "of", "ADP", "_", 7, "case"), det(7), noun(n3, 4, "nmod"),
        verb(vt, 2, "acl:relcl"), adv(ad, 10), verb(v, 0, "root"), punct(10),
    ]


def t5_verb_object(n0, vt, ad, a, nobj):
    """the N0 VT the ADV ADJ NOBJ .  -> VERB DET ADJ NOUN at (3, 7)"""
    return [
        det(2), noun(n0, 3, "nsubj"), verb(vt, 0, "root"),
        det(7), adv(ad, 6), adj(a, 7), noun(nobj, 3, "obj"), punct(3),
    ]


def t6_conjoined(subj, vt, a, nobj, v):
    """SUBJ VT ADJ NOBJ and V .  -> VERB NOUN CCONJ VERB at (2, 6)"""
    if subj == "they":
        first = ("they", "they", "PRON", "Case=Nom|Number=Plur|Person=3|PronType=Prs", 2, "nsubj")
    else:
        first = (subj, subj, "PROPN", "Number=Sing", 2, "nsubj")
    return [
        first, verb(vt, 0, "root"),
        adj(a, 4), noun(nobj, 2, "obj"),
        ("and", "and", "CCONJ", "_", 6, "cc"), verb(v, 2, "conj"), punct(2),
    ]


def t7_intrans(n, v, ad):
    """the N V ADV ."""
    return [det(2), noun(n, 3, "nsubj"), verb(v, 0, "root"), adv(ad, 3), punct(3)]


def t7_trans(n, vt, n2):
    """the N VT the N2 ."""
    return [
        det(2), noun(n, 3, "nsubj"), verb(vt, 0, "root"),
        det(5), noun(n2, 3, "obj"), punct(3),
    ]


def t7_adj(a, n, v, ad):
    """the ADJ N V ADV ."""
    return [
        det(3), adj(a, 3), noun(n, 4, "nsubj"), verb(v, 0, "root"),
        adv(ad, 4), punct(4),
    ]


def t7_propn_num(name, vt, n2):
    """NAME VT two N2 ."""
    return [
        (name, name, "PROPN", "Number=Sing", 2, "nsubj"), verb(vt, 0, "root"),
        ("two", "two", "NUM", "NumType=Card", 4, "nummod"),
        noun(n2, 2, "obj"), punct(2),
    ]


def t7_duck_noun(v, ad):
    """the duck V ADV .   ('duck' tagged NOUN)"""
    return [
        det(2), ("duck", "duck", "NOUN", "Number=Sing", 3, "nsubj"),
        verb(v, 0, "root"), adv(ad, 3), punct(3),
    ]


def t7_duck_verb(n, ad):
    """the N duck ADV .   ('duck' tagged VERB: ambiguous form)"""
    return [
        det(2), noun(n, 3, "nsubj"),
        ("duck", "duck", "VERB", "Tense=Pres|VerbForm=Fin", 0, "root"),
        adv(ad, 3), punct(3),
    ]


def t7_you_past(vpast, n):
    """you VPAST the N yesterday ."""
    return [
        ("you", "you", "PRON", "Case=Nom|Person=2|PronType=Prs", 2, "nsubj"),
        verb(vpast, 0, "root"), det(4), noun(n, 2, "obj"),
        noun("yesterday", 2, "obl:tmod"), punct(2),
    ]


SENTENCES = [
    # T1: NOUN VERB ADV VERB, one attractor each (3 Sing + 3 Plur cues).
    t1_relative_adv("girl", "boys", "like", "often", "goes"),  # Fig-style case
    t1_relative_adv("dog", "cats", "see", "quickly", "runs"),
    t1_relative_adv("teacher", "students", "know", "quietly", "smiles"),
    t1_relative_adv("boys", "girl", "likes", "often", "go"),
    t1_relative_adv("cats", "dog", "sees", "quickly", "run"),
    t1_relative_adv("students", "teacher", "knows", "quietly", "smile"),
    # T2: same construction, no plural attractor for singular cues.
    t2_you_past("bird", "met", "often", "sings"),
    t2_you_past("horse", "saw", "quietly", "waits"),
    t2_you_past("birds", "met", "often", "sing"),
    # T3: NOUN VERB VERB, one attractor each.
    t3_relative("cat", "dogs", "chase", "runs"),
    t3_relative("student", "teachers", "meet", "waits"),
    t3_relative("horse", "birds", "see", "sleeps"),
    t3_relative("dogs", "cat", "chases", "run"),
    t3_relative("teachers", "student", "meets", "wait"),
    t3_relative("birds", "horse", "sees", "sleep"),
    # T4: NOUN VERB ADV VERB with an embedded PP (2 attractors when the cue
    # is singular); inner arcs feed the vetoed NOUN NOUN VERB group.
    t4_deep_relative("girl", "boys", "farmers", "like", "often", "goes"),
    t4_deep_relative("doctor", "students", "teachers", "know", "quietly", "smiles"),
    t4_deep_relative("girls", "boys", "farmers", "like", "often", "go"),
    t4_deep_relative("doctors", "students", "teachers", "know", "quietly", "smile"),
    # T5: verb-object candidate; the last instance mismatches and vetoes it.
    t5_verb_object("dog", "likes", "really", "old", "bread"),
    t5_verb_object("cat", "sees", "really", "small", "cheese"),
    t5_verb_object("dogs", "like", "really", "old", "books"),
    t5_verb_object("cats", "see", "really", "small", "apples"),
    t5_verb_object("girl", "loves", "really", "old", "apples"),  # Sing cue, Plur target
    # T6: conjoined-verb candidate, agreeing but below the per-number floor.
    t6_conjoined("Mary", "likes", "old", "books", "smiles"),
    t6_conjoined("they", "like", "old", "books", "smile"),
    # T7: simple fillers giving every verb both numbers and feeding the
    # substitution lexicon. None contains an arc with 3+ intervening tokens.
    t7_intrans("boy", "sleeps", "quietly"),
    t7_intrans("dogs", "sleep", "happily"),
    t7_intrans("farmer", "waits", "often"),
    t7_intrans("farmers", "wait", "quietly"),
    t7_intrans("doctor", "sings", "happily"),
    t7_intrans("doctors", "sing", "often"),
    t7_intrans("girls", "go", "quickly"),
    t7_intrans("boys", "run", "often"),
    t7_intrans("girl", "smiles", "happily"),
    t7_intrans("student", "runs", "quickly"),
    t7_intrans("teachers", "smile", "often"),
    t7_trans("boy", "loves", "dog"),
    t7_trans("girls", "love", "cats"),
    t7_trans("farmer", "meets", "doctor"),
    t7_trans("students", "meet", "teachers"),
    t7_trans("dog", "chases", "cat"),
    t7_trans("cats", "chase", "birds"),
    t7_trans("teacher", "knows", "student"),
    t7_trans("doctors", "know", "farmers"),
    t7_trans("horse", "sees", "bird"),
    t7_trans("boys", "see", "horses"),
    t7_trans("girl", "likes", "bread"),
    t7_trans("students", "like", "apples"),
    t7_adj("old", "farmer", "smiles", "quietly"),
    t7_adj("young", "girls", "sing", "happily"),
    t7_adj("small", "bird", "waits", "often"),
    t7_adj("happy", "dogs", "run", "quickly"),
    t7_propn_num("Mary", "meets", "boys"),
    t7_propn_num("John", "sees", "birds"),
    t7_duck_noun("sleeps", "quietly"),
    t7_duck_noun("waits", "often"),
    t7_duck_noun("runs", "quickly"),
    t7_duck_verb("birds", "quickly"),
    t7_duck_verb("dogs", "often"),
]

EXTRA_CORPUS_LINES = [
    "the girl goes often .",
    "the boys go quickly .",
    "the teacher smiles .",
    "the students know the teacher .",
    "the dog runs and the cats run .",
    "the farmer likes the bread .",
    "Mary knows the doctor .",
    "John meets the farmers often .",
    "you saw the horses yesterday .",
    "the old dog sleeps .",
    "the young birds sing happily .",
    "the doctors wait quietly .",
    "the cat chases the bird quickly .",
    "the happy student sees the books .",
    "they love the small cheese .",
]


def main() -> None:
    assert len(SENTENCES) == 60, len(SENTENCES)
    FIXTURES.mkdir(parents=True, exist_ok=True)

    lines = []
    for i, sent in enumerate(SENTENCES, start=1):
        lines.append(f"# sent_id = mini-{i:03d}")
        lines.append("# text = " + " ".join(tok[0] for tok in sent))
        for idx, (form, lemma, upos, feats, head, deprel) in enumerate(sent, start=1):
            lines.append(
                f"{idx}\t{form}\t{lemma}\t{upos}\t_\t{feats}\t{head}\t{deprel}\t_\t_"
            )
        lines.append("")
    (FIXTURES / "mini_treebank.conllu").write_text("\n".join(lines) + "\n", "utf-8")

    rng = random.Random(2024)
    corpus = [" ".join(tok[0] for tok in sent) for sent in SENTENCES]
    corpus += EXTRA_CORPUS_LINES
    corpus += [rng.choice(EXTRA_CORPUS_LINES) for _ in range(25)]
    (FIXTURES / "mini_corpus.txt").write_text("\n".join(corpus) + "\n", "utf-8")

    config = {
        "treebank": "mini_treebank.conllu",
        "corpus": "mini_corpus.txt",
        "out_dir": "out",
        "enrich_en_verbs": True,
        "min_context_tokens": 3,
        "min_per_number": 2,
        "seed": 17,
        "variants": 9,
        "scorers": [
            {"name": "kn", "spec": "kn"},
            {"name": "unigram", "spec": "unigram"},
        ],
    }
    (FIXTURES / "mini_config.json").write_text(
        json.dumps(config, indent=2) + "\n", "utf-8"
    )
    print(f"wrote fixtures to {FIXTURES}")


if __name__ == "__main__":
    main()
