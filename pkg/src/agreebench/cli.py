"""Command-line entry point wiring the pipeline stages.

Subcommands: extract, nonce, train-ngram, evaluate, report, run.
Exit codes: 0 success, 1 internal error, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
import time
from pathlib import Path

from . import __version__
from .conllu import read_treebank
from .harness import (
    ExternalScorer,
    KNScorer,
    Scorer,
    UnigramScorer,
    evaluate as run_evaluation,
    read_records,
    write_records,
)
from .lexgen import build_counterpart_index, build_lexicon, generate_nonce
from .miner import (
    extract_original_testset,
    mine_constructions,
    read_items,
    write_jsonl,
)
from .ngram import KNModel, Vocabulary, build_vocab, train_kn
from .stats import (
    accuracy_by,
    attractor_plot_data,
    filter_subjects,
    human_accuracy,
    human_model_alignment,
    pooled_attractor_plot_data,
    read_judgments,
    write_accuracy_csv,
    write_plot_json,
)

log = logging.getLogger("agreebench")


class UsageError(Exception):
    """Bad flags, config keys, or missing input files."""


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _require_file(path: str | None, what: str) -> Path:
    if not path:
        raise UsageError(f"missing required input: {what}")
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"{what} not found: {path}")
    return p


def _read_corpus(path: Path) -> list[list[str]]:
    sentences = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            tokens = line.split()
            if tokens:
                sentences.append(tokens)
    return sentences


def write_manifest(
    out_dir: Path,
    inputs: dict[str, Path],
    seeds: dict[str, int],
    parameters: dict,
    stages: list[str],
    started: float,
) -> None:
    manifest = {
        "tool": "agreebench",
        "version": __version__,
        "inputs": {name: _sha256(path) for name, path in sorted(inputs.items())},
        "seeds": seeds,
        "parameters": parameters,
        "stages": stages,
        "timestamps": {
            "start": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(started)),
            "end": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        },
    }
    with open(out_dir / "manifest.json", "w", encoding="utf-8") as handle:
        json.dump(manifest, handle, ensure_ascii=False, indent=2, sort_keys=True)
        handle.write("\n")


def stage_extract(
    treebank_path: Path,
    vocab_path: Path,
    out_dir: Path,
    min_context: int,
    min_per_number: int,
    enrich: bool,
) -> dict[str, Path]:
    treebank = read_treebank(str(treebank_path), enrich_en_verbs=enrich)
    vocabulary = Vocabulary.load(str(vocab_path))
    constructions = mine_constructions(
        treebank, min_context_tokens=min_context, min_per_number=min_per_number
    )
    counterparts = build_counterpart_index(treebank)
    items = extract_original_testset(treebank, constructions, vocabulary, counterparts)

    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "constructions": out_dir / "constructions.jsonl",
        "instances": out_dir / "instances.jsonl",
        "items_original": out_dir / "items_original.jsonl",
    }
    write_jsonl(str(paths["constructions"]), (c.to_json_obj() for c in constructions))
    write_jsonl(
        str(paths["instances"]),
        (i.to_json_obj(c.id) for c in constructions for i in c.instances),
    )
    write_jsonl(str(paths["items_original"]), (i.to_json_obj() for i in items))
    log.info(
        "extract: %d constructions, %d original items", len(constructions), len(items)
    )
    return paths


def stage_nonce(
    items_path: Path,
    treebank_path: Path,
    vocab_path: Path,
    out_path: Path,
    seed: int,
    variants: int,
    enrich: bool,
) -> Path:
    treebank = read_treebank(str(treebank_path), enrich_en_verbs=enrich)
    vocabulary = Vocabulary.load(str(vocab_path))
    lexicon = build_lexicon(treebank)
    counterparts = build_counterpart_index(treebank)
    by_id = {s.sent_id: s for s in treebank}
    items = [i for i in read_items(str(items_path)) if i.kind == "original"]
    out = []
    for item in items:
        sentence = by_id.get(item.source_sent_id)
        if sentence is None:
            raise UsageError(
                f"source sentence {item.source_sent_id!r} not in treebank"
            )
        out.extend(
            generate_nonce(
                item,
                sentence,
                lexicon,
                counterparts,
                vocabulary,
                n_variants=variants,
                seed=seed,
            )
        )
    write_jsonl(str(out_path), (i.to_json_obj() for i in out))
    log.info("nonce: %d variants from %d originals", len(out), len(items))
    return out_path


def stage_train_ngram(
    corpus_path: Path, out_path: Path, vocab_size: int, order: int
) -> dict[str, Path]:
    corpus = _read_corpus(corpus_path)
    if not corpus:
        raise UsageError(f"corpus is empty: {corpus_path}")
    vocabulary = build_vocab(corpus, size=vocab_size)
    model = train_kn(corpus, vocabulary, order=order)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    model.save(str(out_path))
    paths = {
        "model": out_path,
        "counts": Path(str(out_path) + ".counts.txt"),
        "vocab": Path(str(out_path) + ".vocab.tsv"),
    }
    model.dump_counts(str(paths["counts"]))
    vocabulary.save(str(paths["vocab"]))
    log.info(
        "train-ngram: order %d, %d vocabulary words, %d top-order grams",
        order,
        len(vocabulary),
        len(model.counts[-1]),
    )
    return paths


def make_scorer(spec: str) -> Scorer:
    kind, sep, rest = spec.partition(":")
    if not sep:
        raise UsageError(f"scorer spec needs a kind prefix: {spec!r}")
    if kind == "kn":
        path = _require_file(rest, "kn model")
        return KNScorer(KNModel.load(str(path)), name=f"kn:{path.stem}")
    if kind == "unigram":
        path = _require_file(rest, "unigram counts")
        return UnigramScorer(Vocabulary.load(str(path)).frequencies())
    if kind == "ext":
        if not rest:
            raise UsageError("ext scorer needs a command")
        return ExternalScorer(rest)
    raise UsageError(f"unknown scorer kind {kind!r} (expected kn, unigram, or ext)")


def stage_evaluate(
    items_path: Path, scorer_spec: str, out_path: Path, window: int | None
) -> Path:
    items = read_items(str(items_path))
    with make_scorer(scorer_spec) as scorer:
        records = run_evaluation(items, scorer, window=window)
    write_records(str(out_path), records)
    log.info("evaluate: %d records from %s", len(records), scorer.metadata()[0])
    return out_path


def stage_report(
    record_paths: dict[str, Path],
    out_dir: Path,
    judgments_path: Path | None,
    control_path: Path | None,
) -> None:
    record_sets = {name: read_records(str(p)) for name, p in record_paths.items()}
    out_dir.mkdir(parents=True, exist_ok=True)
    for grouping in ("overall", "kind", "construction", "attractors"):
        cells = accuracy_by(record_sets, grouping)
        write_accuracy_csv(str(out_dir / f"accuracy_by_{grouping}.csv"), cells, grouping)
    for kind in ("original", "nonce"):
        if len(record_sets) > 1:
            payload = pooled_attractor_plot_data(record_sets, kind=kind)
        else:
            payload = attractor_plot_data(record_sets, kind=kind)
        write_plot_json(str(out_dir / f"plot_attractors_{kind}.json"), payload)

    if judgments_path is not None:
        judgments = read_judgments(str(judgments_path))
        control_items = None
        if control_path is not None:
            control_items = [
                line.strip()
                for line in open(control_path, encoding="utf-8")
                if line.strip()
            ]
        result = filter_subjects(judgments, control_items)
        if result.removed_subjects:
            log.info("filtered %d subjects: %s", len(result.removed_subjects), ", ".join(result.removed_subjects))
        if result.unchecked_subjects:
            log.warning(
                "%d subjects had no control-filler judgments: %s",
                len(result.unchecked_subjects),
                ", ".join(result.unchecked_subjects),
            )
        test_rows = [row for row in result.judgments if not row.is_filler]
        cells = human_accuracy(test_rows)
        write_accuracy_csv(str(out_dir / "human_accuracy.csv"), cells, "overall")
        alignment = {}
        for name, records in record_sets.items():
            try:
                result_a = human_model_alignment(test_rows, records)
            except ValueError:
                continue
            alignment[name] = result_a.by_kind
        with open(out_dir / "alignment.json", "w", encoding="utf-8") as handle:
            json.dump(alignment, handle, ensure_ascii=False, indent=2, sort_keys=True)
            handle.write("\n")


DEFAULT_CONFIG = {
    "enrich_en_verbs": False,
    "vocab_size": 50000,
    "order": 5,
    "min_context_tokens": 3,
    "min_per_number": 10,
    "seed": 0,
    "variants": 9,
    "window": None,
    "scorers": [
        {"name": "kn", "spec": "kn"},
        {"name": "unigram", "spec": "unigram"},
    ],
    "judgments": None,
    "control_fillers": None,
    "threads": 1,
}

REQUIRED_CONFIG_KEYS = ("treebank", "corpus", "out_dir")


def run_pipeline(config_path: Path, overrides: dict) -> int:
    started = time.time()
    with open(config_path, encoding="utf-8") as handle:
        user_config = json.load(handle)
    unknown = set(user_config) - set(DEFAULT_CONFIG) - set(REQUIRED_CONFIG_KEYS)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    config = dict(DEFAULT_CONFIG)
    config.update(user_config)
    config.update({k: v for k, v in overrides.items() if v is not None})
    for key in REQUIRED_CONFIG_KEYS:
        if not config.get(key):
            raise UsageError(f"config is missing required key: {key}")

    base = config_path.parent

    def resolve(value: str) -> Path:
        p = Path(value)
        return p if p.is_absolute() else base / p

    treebank_path = _require_file(str(resolve(config["treebank"])), "treebank")
    corpus_path = _require_file(str(resolve(config["corpus"])), "corpus")
    out_dir = Path(overrides.get("out_dir") or resolve(config["out_dir"]))
    out_dir.mkdir(parents=True, exist_ok=True)
    stages: list[str] = []

    # The vocabulary comes out of n-gram training, so that stage runs first.
    ngram_paths = stage_train_ngram(
        corpus_path, out_dir / "model.knm.gz", config["vocab_size"], config["order"]
    )
    stages.append("train-ngram")

    extract_paths = stage_extract(
        treebank_path,
        ngram_paths["vocab"],
        out_dir,
        config["min_context_tokens"],
        config["min_per_number"],
        config["enrich_en_verbs"],
    )
    stages.append("extract")

    nonce_path = stage_nonce(
        extract_paths["items_original"],
        treebank_path,
        ngram_paths["vocab"],
        out_dir / "items_nonce.jsonl",
        config["seed"],
        config["variants"],
        config["enrich_en_verbs"],
    )
    stages.append("nonce")

    items_all = out_dir / "items_all.jsonl"
    with open(items_all, "w", encoding="utf-8") as sink:
        for source in (extract_paths["items_original"], nonce_path):
            with open(source, encoding="utf-8") as handle:
                sink.write(handle.read())

    record_paths: dict[str, Path] = {}
    for entry in config["scorers"]:
        name, spec = entry["name"], entry["spec"]
        if spec == "kn":
            spec = f"kn:{ngram_paths['model']}"
        elif spec == "unigram":
            spec = f"unigram:{ngram_paths['vocab']}"
        out_path = out_dir / f"records_{name}.jsonl"
        stage_evaluate(items_all, spec, out_path, config["window"])
        record_paths[name] = out_path
    stages.append("evaluate")

    judgments_path = (
        _require_file(str(resolve(config["judgments"])), "judgments")
        if config["judgments"]
        else None
    )
    control_path = (
        _require_file(str(resolve(config["control_fillers"])), "control fillers")
        if config["control_fillers"]
        else None
    )
    stage_report(record_paths, out_dir / "report", judgments_path, control_path)
    stages.append("report")

    inputs = {"config": config_path, "treebank": treebank_path, "corpus": corpus_path}
    if judgments_path:
        inputs["judgments"] = judgments_path
    parameters = {
        k: config[k]
        for k in (
            "vocab_size",
            "order",
            "min_context_tokens",
            "min_per_number",
            "variants",
            "window",
            "enrich_en_verbs",
            "threads",
        )
    }
    write_manifest(
        out_dir, inputs, {"nonce": config["seed"]}, parameters, stages, started
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="agreebench",
        description="Build and score long-distance number-agreement benchmarks.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="mine constructions and the original test set")
    p.add_argument("--treebank", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--min-context", type=int, default=3)
    p.add_argument("--min-per-number", type=int, default=10)
    p.add_argument("--enrich-en-verbs", action="store_true")

    p = sub.add_parser("nonce", help="generate nonce variants of original items")
    p.add_argument("--items", required=True)
    p.add_argument("--treebank", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--variants", type=int, default=9)
    p.add_argument("--out", required=True, help="output items file")
    p.add_argument("--enrich-en-verbs", action="store_true")

    p = sub.add_parser("train-ngram", help="train the smoothed n-gram model")
    p.add_argument("--corpus", required=True)
    p.add_argument("--vocab-size", type=int, default=50000)
    p.add_argument("--order", type=int, default=5)
    p.add_argument("--out", required=True, help="model output path")

    p = sub.add_parser("evaluate", help="score a test set with one scorer")
    p.add_argument("--items", required=True)
    p.add_argument(
        "--scorer",
        required=True,
        help='kn:<model-path> | unigram:<counts-path> | ext:"<command>"',
    )
    p.add_argument("--window", type=int, default=None)
    p.add_argument("--out", required=True, help="records output file")

    p = sub.add_parser("report", help="aggregate records into tables and plot data")
    p.add_argument("--records", required=True, nargs="+")
    p.add_argument("--judgments", default=None)
    p.add_argument("--control-fillers", default=None)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("run", help="run the full pipeline from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None, help="override the configured out_dir")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=None, help="worker cap per stage")

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    started = time.time()
    try:
        if args.command == "extract":
            treebank = _require_file(args.treebank, "treebank")
            vocab = _require_file(args.vocab, "vocabulary")
            out_dir = Path(args.out)
            stage_extract(
                treebank,
                vocab,
                out_dir,
                args.min_context,
                args.min_per_number,
                args.enrich_en_verbs,
            )
            write_manifest(
                out_dir,
                {"treebank": treebank, "vocab": vocab},
                {},
                {
                    "min_context_tokens": args.min_context,
                    "min_per_number": args.min_per_number,
                    "enrich_en_verbs": args.enrich_en_verbs,
                },
                ["extract"],
                started,
            )
        elif args.command == "nonce":
            stage_nonce(
                _require_file(args.items, "items"),
                _require_file(args.treebank, "treebank"),
                _require_file(args.vocab, "vocabulary"),
                Path(args.out),
                args.seed,
                args.variants,
                args.enrich_en_verbs,
            )
        elif args.command == "train-ngram":
            stage_train_ngram(
                _require_file(args.corpus, "corpus"),
                Path(args.out),
                args.vocab_size,
                args.order,
            )
        elif args.command == "evaluate":
            stage_evaluate(
                _require_file(args.items, "items"),
                args.scorer,
                Path(args.out),
                args.window,
            )
        elif args.command == "report":
            record_paths = {}
            for path in args.records:
                p = _require_file(path, "records")
                record_paths[p.stem] = p
            out_dir = Path(args.out)
            stage_report(
                record_paths,
                out_dir,
                _require_file(args.judgments, "judgments") if args.judgments else None,
                _require_file(args.control_fillers, "control fillers")
                if args.control_fillers
                else None,
            )
            write_manifest(
                out_dir,
                {p.stem: p for p in map(Path, args.records)},
                {},
                {},
                ["report"],
                started,
            )
        elif args.command == "run":
            return run_pipeline(
                _require_file(args.config, "config"),
                {"out_dir": args.out, "seed": args.seed, "threads": args.threads},
            )
    except UsageError as err:
        print(f"agreebench {args.command}: {err}", file=sys.stderr)
        return 2
    except Exception as err:  # noqa: BLE001 - stage-named diagnostic wanted
        print(f"agreebench {args.command}: internal error: {err}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
