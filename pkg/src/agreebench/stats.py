"""Aggregation of evaluation records, correlations, and human-judgment
analysis.

Accuracy aggregation policy: per-scorer accuracy counts ties and errored
items as incorrect; cells report the mean and the population standard
deviation across scorers. Human accuracies are computed within each item
first, then averaged across items; their std is the population standard
deviation across per-item accuracies.
"""

from __future__ import annotations

import csv
import json
import math
import random
from collections import defaultdict
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

from .harness import OUTCOME_CORRECT, EvalRecord

GROUPINGS = ("overall", "kind", "construction", "attractors")
PLOT_BUCKETS = ("0", "1", "2")


@dataclass(frozen=True)
class AccuracyCell:
    group: str
    mean: float
    std: float
    n_items: int


def _attractor_bucket(n: int) -> str:
    return str(n) if n <= 2 else "3+"


def _group_key(record: EvalRecord, grouping: str) -> str:
    if grouping == "overall":
        return "overall"
    if grouping == "kind":
        return record.kind
    if grouping == "construction":
        return record.construction_id
    if grouping == "attractors":
        return _attractor_bucket(record.n_attractors)
    raise ValueError(f"unknown grouping {grouping!r}; expected one of {GROUPINGS}")


def _population_std(values: Sequence[float]) -> float:
    mean = sum(values) / len(values)
    return math.sqrt(sum((v - mean) ** 2 for v in values) / len(values))


def accuracy_by(
    record_sets: Mapping[str, Sequence[EvalRecord]] | Sequence[Sequence[EvalRecord]],
    grouping: str = "overall",
) -> list[AccuracyCell]:
    """Per-group accuracy, averaged across scorers.

    All record sets must cover the same test set. Accuracy is computed per
    scorer within each group, then the mean and population std are taken
    across scorers.
    """
    if isinstance(record_sets, Mapping):
        sets = list(record_sets.values())
    else:
        sets = list(record_sets)
    if not sets:
        raise ValueError("no record sets given")

    per_group: dict[str, list[float]] = defaultdict(list)
    group_sizes: dict[str, int] = {}
    for records in sets:
        correct: dict[str, int] = defaultdict(int)
        total: dict[str, int] = defaultdict(int)
        for record in records:
            key = _group_key(record, grouping)
            total[key] += 1
            if record.outcome == OUTCOME_CORRECT:
                correct[key] += 1
        for key in total:
            per_group[key].append(correct[key] / total[key])
            group_sizes[key] = total[key]

    cells = []
    for key in sorted(per_group):
        values = per_group[key]
        cells.append(
            AccuracyCell(
                group=key,
                mean=sum(values) / len(values),
                std=_population_std(values),
                n_items=group_sizes[key],
            )
        )
    return cells


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    if len(xs) != len(ys):
        raise ValueError("pearson requires sequences of equal length")
    n = len(xs)
    if n < 2:
        raise ValueError("pearson requires at least two points")
    mean_x = sum(xs) / n
    mean_y = sum(ys) / n
    dx = [x - mean_x for x in xs]
    dy = [y - mean_y for y in ys]
    var_x = sum(d * d for d in dx)
    var_y = sum(d * d for d in dy)
    if var_x == 0 or var_y == 0:
        raise ValueError("pearson is undefined for zero-variance input")
    return sum(a * b for a, b in zip(dx, dy)) / math.sqrt(var_x * var_y)


def _midranks(values: Sequence[float]) -> list[float]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        rank = (i + j) / 2 + 1  # average of 1-based ranks i+1..j+1
        for k in range(i, j + 1):
            ranks[order[k]] = rank
        i = j + 1
    return ranks


def spearman(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Pearson correlation of mid-ranks (ties get averaged ranks)."""
    return pearson(_midranks(xs), _midranks(ys))


def permutation_pvalue(
    xs: Sequence[float],
    ys: Sequence[float],
    statistic: Callable[[Sequence[float], Sequence[float]], float] = spearman,
    n_permutations: int = 10000,
    seed: int = 0,
) -> float:
    """Two-sided permutation p-value for a correlation statistic."""
    observed = abs(statistic(xs, ys))
    rng = random.Random(seed)
    ys = list(ys)
    hits = 0
    for _ in range(n_permutations):
        shuffled = ys[:]
        rng.shuffle(shuffled)
        try:
            if abs(statistic(xs, shuffled)) >= observed - 1e-12:
                hits += 1
        except ValueError:
            # degenerate permutation (zero variance after ranking); count it
            hits += 1
    return (hits + 1) / (n_permutations + 1)


@dataclass(frozen=True)
class Judgment:
    subject_id: str
    item_id: str
    is_filler: bool
    chose_correct: bool


def read_judgments(path: str) -> list[Judgment]:
    """CSV with header subject_id,item_id,is_filler,chose_correct (0/1)."""
    rows = []
    with open(path, encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        for row in reader:
            rows.append(
                Judgment(
                    subject_id=row["subject_id"],
                    item_id=row["item_id"],
                    is_filler=row["is_filler"].strip() in ("1", "true", "True"),
                    chose_correct=row["chose_correct"].strip() in ("1", "true", "True"),
                )
            )
    return rows


@dataclass
class SubjectFilterResult:
    judgments: list[Judgment]
    removed_subjects: list[str]
    unchecked_subjects: list[str]  # retained without any control-filler judgment


def filter_subjects(
    judgments: Sequence[Judgment],
    control_items: Iterable[str] | None = None,
) -> SubjectFilterResult:
    """Drop every row of subjects wrong on strictly more than 20% of the
    control fillers. Subjects with no control judgments are retained and
    reported. `control_items` defaults to all items flagged as fillers."""
    control: set[str] | None = set(control_items) if control_items is not None else None

    def is_control(row: Judgment) -> bool:
        if control is not None:
            return row.item_id in control
        return row.is_filler

    errors: dict[str, int] = defaultdict(int)
    totals: dict[str, int] = defaultdict(int)
    subjects = []
    for row in judgments:
        if row.subject_id not in totals:
            subjects.append(row.subject_id)
            totals[row.subject_id] = 0
        if is_control(row):
            totals[row.subject_id] += 1
            if not row.chose_correct:
                errors[row.subject_id] += 1

    removed = {
        s for s in subjects if totals[s] > 0 and errors[s] / totals[s] > 0.20
    }
    unchecked = [s for s in subjects if totals[s] == 0]
    kept = [row for row in judgments if row.subject_id not in removed]
    return SubjectFilterResult(
        judgments=kept,
        removed_subjects=sorted(removed),
        unchecked_subjects=unchecked,
    )


def human_accuracy(
    judgments: Sequence[Judgment],
    grouping: str = "overall",
    item_groups: Mapping[str, str] | None = None,
) -> list[AccuracyCell]:
    """Accuracy per item first, then the unweighted mean across items.

    Grouping beyond "overall" needs `item_groups` mapping item ids to group
    keys; items without a mapping are skipped.
    """
    per_item: dict[str, list[bool]] = defaultdict(list)
    for row in judgments:
        per_item[row.item_id].append(row.chose_correct)

    grouped: dict[str, list[float]] = defaultdict(list)
    for item_id, choices in per_item.items():
        if grouping == "overall":
            key = "overall"
        else:
            if item_groups is None:
                raise ValueError("item_groups is required for non-overall groupings")
            if item_id not in item_groups:
                continue
            key = item_groups[item_id]
        grouped[key].append(sum(choices) / len(choices))

    cells = []
    for key in sorted(grouped):
        values = grouped[key]
        cells.append(
            AccuracyCell(
                group=key,
                mean=sum(values) / len(values),
                std=_population_std(values),
                n_items=len(values),
            )
        )
    return cells


@dataclass
class AlignmentResult:
    by_kind: dict[str, dict]  # kind -> {"rho": .., "p_value": .., "n": ..}
    table: list[dict]  # item_id, kind, human_margin, model_margin


def human_model_alignment(
    judgments: Sequence[Judgment],
    records: Sequence[EvalRecord],
    n_permutations: int = 10000,
    seed: int = 0,
) -> AlignmentResult:
    """Spearman correlation between human choice margins and model log-prob
    differences, computed separately for original and nonce items."""
    margins: dict[str, int] = defaultdict(int)
    seen: set[str] = set()
    for row in judgments:
        seen.add(row.item_id)
        margins[row.item_id] += 1 if row.chose_correct else -1

    table = []
    for record in records:
        if record.item_id not in seen or record.logprob_correct is None:
            continue
        table.append(
            {
                "item_id": record.item_id,
                "kind": record.kind,
                "human_margin": margins[record.item_id],
                "model_margin": record.logprob_correct - record.logprob_wrong,
            }
        )
    if not table:
        raise ValueError("no items shared between judgments and records")

    by_kind: dict[str, dict] = {}
    for kind in sorted({row["kind"] for row in table}):
        rows = [row for row in table if row["kind"] == kind]
        if len(rows) < 2:
            continue
        xs = [row["human_margin"] for row in rows]
        ys = [row["model_margin"] for row in rows]
        try:
            rho = spearman(xs, ys)
        except ValueError:
            continue
        by_kind[kind] = {
            "rho": rho,
            "p_value": permutation_pvalue(
                xs, ys, n_permutations=n_permutations, seed=seed
            ),
            "n": len(rows),
        }
    return AlignmentResult(by_kind=by_kind, table=table)


def attractor_plot_data(
    record_sets: Mapping[str, Sequence[EvalRecord]],
    kind: str | None = None,
    human_judgments: Sequence[Judgment] | None = None,
) -> dict:
    """Accuracy-by-attractor plot data, restricted to buckets 0, 1, and 2.

    Model series: mean across scorers with standard error std/sqrt(#scorers).
    Human series (when judgments are given): mean across per-item accuracies
    with standard error std/sqrt(#items).
    """
    series = []
    for name, records in record_sets.items():
        subset = [r for r in records if kind is None or r.kind == kind]
        cells = {c.group: c for c in accuracy_by({name: subset}, "attractors")}
        n_scorers = 1
        means = []
        stderrs = []
        for bucket in PLOT_BUCKETS:
            cell = cells.get(bucket)
            means.append(cell.mean if cell else None)
            stderrs.append((cell.std / math.sqrt(n_scorers)) if cell else None)
        series.append(
            {"name": name, "means": means, "stderrs": stderrs, "source": "model"}
        )
    payload = {
        "x_buckets": list(PLOT_BUCKETS),
        "kind": kind or "all",
        "error_bars": "standard error (population std / sqrt(n))",
        "series": series,
    }
    return payload


def pooled_attractor_plot_data(
    record_sets: Mapping[str, Sequence[EvalRecord]], kind: str | None = None
) -> dict:
    """Like attractor_plot_data but pooling scorers into one series whose
    error bars reflect the spread across scorers."""
    filtered = {
        name: [r for r in records if kind is None or r.kind == kind]
        for name, records in record_sets.items()
    }
    cells = {c.group: c for c in accuracy_by(filtered, "attractors")}
    n = len(filtered)
    means = []
    stderrs = []
    for bucket in PLOT_BUCKETS:
        cell = cells.get(bucket)
        means.append(cell.mean if cell else None)
        stderrs.append((cell.std / math.sqrt(n)) if cell else None)
    return {
        "x_buckets": list(PLOT_BUCKETS),
        "kind": kind or "all",
        "error_bars": "standard error (population std across scorers / sqrt(n))",
        "series": [{"name": "pooled", "means": means, "stderrs": stderrs, "source": "model"}],
    }


def write_accuracy_csv(path: str, cells: Sequence[AccuracyCell], grouping: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow([grouping, "mean_accuracy", "std", "n_items"])
        for cell in cells:
            writer.writerow([cell.group, f"{cell.mean:.6f}", f"{cell.std:.6f}", cell.n_items])


def write_plot_json(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, ensure_ascii=False, indent=2, sort_keys=True)
        handle.write("\n")
