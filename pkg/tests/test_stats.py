import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as scipy_stats

from agreebench.harness import EvalRecord
from agreebench.stats import (
    AccuracyCell,
    Judgment,
    accuracy_by,
    attractor_plot_data,
    filter_subjects,
    human_accuracy,
    human_model_alignment,
    pearson,
    permutation_pvalue,
    pooled_attractor_plot_data,
    spearman,
)


def record(item_id, outcome, kind="original", construction="NOUN VERB VERB", attractors=0, margin=1.0):
    lc, lw = (-1.0, -1.0 - margin) if outcome == "correct" else (-1.0 - margin, -1.0)
    if outcome == "tie":
        lc = lw = -1.0
    return EvalRecord(
        item_id=item_id,
        construction_id=construction,
        kind=kind,
        n_attractors=attractors,
        logprob_correct=lc,
        logprob_wrong=lw,
        outcome=outcome,
    )


class TestAccuracyBy:
    def test_single_scorer_proportion(self):
        records = [record(f"i{k}", "correct") for k in range(3)]
        records.append(record("i3", "incorrect"))
        cells = accuracy_by({"m": records}, "overall")
        assert cells == [AccuracyCell("overall", 0.75, 0.0, 4)]

    def test_mean_and_population_std_across_scorers(self):
        set_a = [record("i0", "correct"), record("i1", "incorrect")]
        set_b = [record("i0", "correct"), record("i1", "correct")]
        cells = accuracy_by({"a": set_a, "b": set_b}, "overall")
        assert cells == [AccuracyCell("overall", 0.75, 0.25, 2)]

    def test_ties_and_errors_count_as_incorrect(self):
        records = [record("i0", "correct"), record("i1", "tie"), record("i2", "error")]
        cells = accuracy_by({"m": records}, "overall")
        assert math.isclose(cells[0].mean, 1 / 3)

    def test_group_by_kind(self):
        records = [
            record("i0", "correct", kind="original"),
            record("i1", "incorrect", kind="nonce"),
        ]
        cells = accuracy_by({"m": records}, "kind")
        assert [c.group for c in cells] == ["nonce", "original"]
        assert [c.mean for c in cells] == [0.0, 1.0]

    def test_group_by_attractors_includes_three_plus(self):
        records = [
            record("i0", "correct", attractors=0),
            record("i1", "correct", attractors=1),
            record("i2", "incorrect", attractors=2),
            record("i3", "incorrect", attractors=5),
        ]
        cells = accuracy_by({"m": records}, "attractors")
        assert [c.group for c in cells] == ["0", "1", "2", "3+"]

    def test_empty_group_omitted(self):
        records = [record("i0", "correct", kind="original")]
        cells = accuracy_by({"m": records}, "kind")
        assert [c.group for c in cells] == ["original"]

    def test_unknown_grouping_rejected(self):
        with pytest.raises(ValueError):
            accuracy_by({"m": [record("i", "correct")]}, "bogus")


class TestPearson:
    def test_identity(self):
        xs = [1.0, 2.0, 5.0, 9.0]
        assert math.isclose(pearson(xs, xs), 1.0)

    def test_negation(self):
        xs = [1.0, 2.0, 5.0, 9.0]
        assert math.isclose(pearson(xs, [-x for x in xs]), -1.0)

    def test_fixture_matches_independent_computation(self):
        ppl = [45.2, 52.1, 62.6, 71.6, 147.8, 122.0, 166.6, 168.9, 59.9, 61.1]
        acc = [0.921, 0.810, 0.818, 0.702, 0.639, 0.721, 0.735, 0.634, 0.909, 0.915]
        assert math.isclose(pearson(ppl, acc), -0.8037308783993576, abs_tol=1e-12)
        assert math.isclose(
            pearson(ppl, acc), scipy_stats.pearsonr(ppl, acc).statistic, abs_tol=1e-12
        )

    def test_zero_variance_rejected(self):
        with pytest.raises(ValueError):
            pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            pearson([1.0], [1.0, 2.0])

    def test_too_short_rejected(self):
        with pytest.raises(ValueError):
            pearson([1.0], [2.0])

    @settings(max_examples=50, deadline=None)
    @given(
        st.lists(st.floats(-50, 50), min_size=3, max_size=20),
        st.floats(0.1, 10),
        st.floats(-5, 5),
    )
    def test_invariant_under_positive_affine_transform(self, xs, scale, shift):
        ys = [2.0 * x + 1.0 for x in xs]
        if len(set(xs)) < 2 or len(set(ys)) < 2:
            return
        transformed = [scale * x + shift for x in xs]
        if len(set(transformed)) < 2:
            return
        assert math.isclose(pearson(xs, ys), pearson(transformed, ys), abs_tol=1e-9)


class TestSpearman:
    def test_monotone_transform_gives_one(self):
        xs = [1.0, 3.0, 9.0, 27.0]
        ys = [math.log(x) for x in xs]
        assert math.isclose(spearman(xs, ys), 1.0)

    def test_reversed_ranks_give_minus_one(self):
        xs = [1.0, 2.0, 3.0, 4.0]
        assert math.isclose(spearman(xs, list(reversed(xs))), -1.0)

    def test_tied_fixture_matches_hand_midranks(self):
        xs = [1, 2, 2, 3, 5, 5, 5, 7]
        ys = [3, 1, 4, 4, 6, 8, 7, 9]
        # mid-ranks: xs -> [1, 2.5, 2.5, 4, 6, 6, 6, 8], ys -> [2, 1, 3.5, 3.5, 5, 7, 6, 8]
        assert math.isclose(spearman(xs, ys), 0.9200335844703181, abs_tol=1e-12)
        assert math.isclose(
            spearman(xs, ys), scipy_stats.spearmanr(xs, ys).statistic, abs_tol=1e-12
        )

    def test_all_equal_rejected(self):
        with pytest.raises(ValueError):
            spearman([2, 2, 2], [1, 2, 3])

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.integers(-100, 100), min_size=3, max_size=15, unique=True))
    def test_invariant_under_strictly_monotone_transform(self, xs):
        ys = [float(i) for i in range(len(xs))]
        random.Random(0).shuffle(ys)
        transformed = [math.exp(x / 50.0) for x in xs]
        assert math.isclose(spearman(xs, ys), spearman(transformed, ys), abs_tol=1e-12)


class TestPermutationPvalue:
    def test_strong_correlation_has_small_p(self):
        xs = list(range(20))
        ys = [x * 2.0 for x in xs]
        assert permutation_pvalue(xs, ys, n_permutations=2000, seed=1) < 0.01

    def test_independent_data_has_large_p(self):
        rng = random.Random(4)
        xs = [rng.random() for _ in range(30)]
        ys = [rng.random() for _ in range(30)]
        assert permutation_pvalue(xs, ys, n_permutations=2000, seed=1) > 0.05

    def test_seeded_determinism(self):
        xs = [1, 2, 3, 4, 5]
        ys = [2, 1, 4, 3, 5]
        a = permutation_pvalue(xs, ys, n_permutations=500, seed=7)
        b = permutation_pvalue(xs, ys, n_permutations=500, seed=7)
        assert a == b


def judgment(subject, item, is_filler=False, correct=True):
    return Judgment(subject, item, is_filler, correct)


class TestFilterSubjects:
    def make_subject(self, subject, filler_errors, filler_total=10):
        rows = []
        for i in range(filler_total):
            rows.append(judgment(subject, f"f{i}", True, correct=i >= filler_errors))
        rows.append(judgment(subject, "t0", False, True))
        return rows

    def test_exactly_twenty_percent_retained(self):
        rows = self.make_subject("s1", 2)
        result = filter_subjects(rows)
        assert result.judgments == rows
        assert result.removed_subjects == []

    def test_above_twenty_percent_removed(self):
        rows = self.make_subject("s1", 3)
        result = filter_subjects(rows)
        assert result.judgments == []
        assert result.removed_subjects == ["s1"]

    def test_empty_input(self):
        result = filter_subjects([])
        assert result.judgments == []

    def test_subject_without_controls_retained_and_flagged(self):
        rows = [judgment("s2", "t0", False, True)]
        result = filter_subjects(rows)
        assert result.judgments == rows
        assert result.unchecked_subjects == ["s2"]

    def test_explicit_control_set(self):
        rows = [
            judgment("s1", "f0", True, False),
            judgment("s1", "f1", True, False),
            judgment("s1", "c0", True, True),
            judgment("s1", "t0", False, True),
        ]
        # Only c0 is a control: zero errors there, so the subject stays.
        result = filter_subjects(rows, control_items={"c0"})
        assert result.judgments == rows

    def test_idempotent(self):
        rows = self.make_subject("good", 1) + self.make_subject("bad", 9)
        once = filter_subjects(rows)
        twice = filter_subjects(once.judgments)
        assert once.judgments == twice.judgments


class TestHumanAccuracy:
    def test_two_item_average(self):
        rows = [judgment("s", "a", correct=i < 9) for i in range(10)]
        rows += [judgment("s", "b", correct=i < 5) for i in range(10)]
        cells = human_accuracy(rows)
        assert len(cells) == 1
        assert math.isclose(cells[0].mean, 0.70)
        assert cells[0].n_items == 2

    def test_single_judgment_is_plain_proportion(self):
        rows = [judgment("s", "a", correct=True), judgment("s", "b", correct=False)]
        cells = human_accuracy(rows)
        assert math.isclose(cells[0].mean, 0.5)

    def test_duplicating_rows_does_not_change_means(self):
        rows = [judgment("s", "a", correct=i < 7) for i in range(10)]
        rows += [judgment("s", "b", correct=i < 2) for i in range(4)]
        once = human_accuracy(rows)
        doubled = human_accuracy(rows + rows)
        assert [c.mean for c in once] == [c.mean for c in doubled]

    def test_grouping_requires_item_groups(self):
        rows = [judgment("s", "a")]
        with pytest.raises(ValueError):
            human_accuracy(rows, grouping="kind")

    def test_grouping_by_mapping(self):
        rows = [judgment("s", "a", correct=True), judgment("s", "b", correct=False)]
        cells = human_accuracy(rows, "kind", {"a": "original", "b": "nonce"})
        assert {c.group: c.mean for c in cells} == {"original": 1.0, "nonce": 0.0}


class TestHumanModelAlignment:
    def test_proportional_margins_give_rho_one(self):
        judgments = []
        records = []
        for i, margin in enumerate([5, 3, 1, -2, -4]):
            for k in range(abs(margin)):
                judgments.append(judgment("s", f"i{i}", correct=margin > 0))
            records.append(record(f"i{i}", "correct", margin=float(margin)))
        result = human_model_alignment(judgments, records, n_permutations=200)
        assert math.isclose(result.by_kind["original"]["rho"], 1.0)

    def test_random_margins_give_small_rho(self):
        rng = random.Random(11)
        judgments = []
        records = []
        for i in range(40):
            votes = rng.choice([-3, -1, 1, 3])
            for _ in range(abs(votes)):
                judgments.append(judgment("s", f"i{i}", correct=votes > 0))
            records.append(record(f"i{i}", "correct", margin=rng.random() * 4 - 2))
        result = human_model_alignment(judgments, records, n_permutations=500, seed=3)
        stats = result.by_kind["original"]
        assert abs(stats["rho"]) < 0.35
        assert stats["p_value"] > 0.01

    def test_split_by_kind(self):
        judgments = [
            judgment("s", "o1", correct=True),
            judgment("s", "o2", correct=False),
            judgment("s", "n1", correct=True),
            judgment("s", "n2", correct=False),
        ]
        records = [
            record("o1", "correct", kind="original", margin=2.0),
            record("o2", "incorrect", kind="original", margin=1.0),
            record("n1", "correct", kind="nonce", margin=3.0),
            record("n2", "incorrect", kind="nonce", margin=0.5),
        ]
        result = human_model_alignment(judgments, records, n_permutations=100)
        assert set(result.by_kind) == {"original", "nonce"}
        assert result.by_kind["original"]["rho"] == 1.0

    def test_no_overlap_rejected(self):
        with pytest.raises(ValueError):
            human_model_alignment(
                [judgment("s", "a")], [record("b", "correct")]
            )


class TestPlotData:
    def test_buckets_limited_to_two_attractors(self):
        records = [
            record("i0", "correct", attractors=0),
            record("i1", "correct", attractors=1),
            record("i2", "correct", attractors=2),
            record("i3", "correct", attractors=3),
            record("i4", "correct", attractors=7),
        ]
        payload = attractor_plot_data({"m": records})
        assert payload["x_buckets"] == ["0", "1", "2"]
        for series in payload["series"]:
            assert len(series["means"]) == 3

    def test_pooled_spread_across_scorers(self):
        set_a = [record("i0", "correct", attractors=0), record("i1", "correct", attractors=1)]
        set_b = [record("i0", "incorrect", attractors=0), record("i1", "correct", attractors=1)]
        payload = pooled_attractor_plot_data({"a": set_a, "b": set_b})
        means = payload["series"][0]["means"]
        assert means[0] == 0.5
        assert means[1] == 1.0
        assert means[2] is None
