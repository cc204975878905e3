#!/usr/bin/env python3
"""End-to-end toy study on the synthetic agreement grammar.

Generates the synthetic corpus and treebank, builds the benchmark (original
and nonce items), scores it with the unigram baseline, the smoothed 5-gram
model (full-history and window-5), and, if the refscorer package is
installed, the toy LSTM over the wire protocol. Prints accuracy by item kind
and by attractor count.

Usage: python scripts/toy_study.py --out /tmp/toy_study [--skip-lstm]
"""

import argparse
import shlex
import shutil
import subprocess
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def run(*args):
    subprocess.run([sys.executable, *map(str, args)], check=True)


def bench(*args):
    run("-m", "agreebench.cli", *args)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True)
    parser.add_argument("--seed", type=int, default=1234)
    parser.add_argument("--epochs", type=int, default=20)
    parser.add_argument("--skip-lstm", action="store_true")
    args = parser.parse_args()

    out = Path(args.out)
    if out.exists():
        shutil.rmtree(out)
    out.mkdir(parents=True)

    run(REPO / "scripts" / "gen_synthetic.py", "--out", out, "--seed", args.seed)
    model = out / "model.knm.gz"
    bench("train-ngram", "--corpus", out / "corpus.txt", "--out", model)
    bench(
        "extract",
        "--treebank", out / "treebank.conllu",
        "--vocab", f"{model}.vocab.tsv",
        "--out", out,
    )
    bench(
        "nonce",
        "--items", out / "items_original.jsonl",
        "--treebank", out / "treebank.conllu",
        "--vocab", f"{model}.vocab.tsv",
        "--seed", args.seed,
        "--out", out / "items_nonce.jsonl",
    )
    items = out / "items_all.jsonl"
    items.write_bytes(
        (out / "items_original.jsonl").read_bytes()
        + (out / "items_nonce.jsonl").read_bytes()
    )

    scorers = {
        "unigram": f"unigram:{model}.vocab.tsv",
        "kn5": f"kn:{model}",
    }
    records = {}
    for name, spec in scorers.items():
        path = out / f"records_{name}.jsonl"
        bench("evaluate", "--items", items, "--scorer", spec, "--out", path)
        records[name] = path

    if not args.skip_lstm:
        try:
            import refscorer  # noqa: F401
        except ImportError:
            print("refscorer not installed; skipping the LSTM conditions", file=sys.stderr)
        else:
            checkpoint = out / "tiny.pt"
            run(
                "-m", "refscorer", "train",
                "--corpus", out / "corpus.txt",
                "--out", checkpoint,
                "--epochs", args.epochs,
                "--seed", args.seed,
            )
            serve = " ".join(
                shlex.quote(p)
                for p in (sys.executable, "-m", "refscorer", "serve", str(checkpoint))
            )
            path = out / "records_lstm.jsonl"
            bench("evaluate", "--items", items, "--scorer", f"ext:{serve}", "--out", path)
            records["lstm"] = path
            # The window-5 condition: the same model sees only the last 4
            # prefix tokens, so agreement beyond that span is out of reach.
            path = out / "records_lstm-window5.jsonl"
            bench(
                "evaluate",
                "--items", items,
                "--scorer", f"ext:{serve}",
                "--window", "5",
                "--out", path,
            )
            records["lstm-window5"] = path

    bench("report", "--records", *records.values(), "--out", out / "report")

    from agreebench.harness import read_records
    from agreebench.stats import accuracy_by

    print(f"\n{'scorer':<14} {'original':>9} {'nonce':>9} {'0-attr':>9} {'1-attr':>9} {'2-attr':>9}")
    for name, path in records.items():
        recs = read_records(str(path))
        by_kind = {c.group: c.mean for c in accuracy_by({name: recs}, "kind")}
        by_attr = {c.group: c.mean for c in accuracy_by({name: recs}, "attractors")}
        print(
            f"{name:<14} {by_kind.get('original', float('nan')):>9.3f} "
            f"{by_kind.get('nonce', float('nan')):>9.3f} "
            f"{by_attr.get('0', float('nan')):>9.3f} "
            f"{by_attr.get('1', float('nan')):>9.3f} "
            f"{by_attr.get('2', float('nan')):>9.3f}"
        )
    print(f"\nreport tables and plot data: {out / 'report'}")


if __name__ == "__main__":
    main()
