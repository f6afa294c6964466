import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gaborset.errors import DegenerateCounts, MissingLabel
from gaborset.metrics import (
    REFERENCE_COUNTS,
    REFERENCE_METRICS,
    ConfusionCounts,
    compute,
    confusion_from_run,
    reference_consistency,
)

counts_st = st.tuples(
    st.integers(0, 2000), st.integers(0, 2000), st.integers(0, 2000), st.integers(0, 2000)
).filter(lambda t: sum(t) > 0)


class TestCompute:
    def test_coliseum_row(self):
        rep = compute(ConfusionCounts(tp=532, fn=301, fp=412, tn=188))
        assert rep.precision == pytest.approx(0.563559322, abs=1e-6)
        assert rep.recall == pytest.approx(0.638655462, abs=1e-6)
        assert rep.accuracy == pytest.approx(0.502442428, abs=1e-6)
        assert rep.f1 == pytest.approx(0.598761958, abs=1e-6)

    def test_eiffel_row(self):
        rep = compute(ConfusionCounts(tp=805, fn=325, fp=236, tn=129))
        assert rep.precision == pytest.approx(0.773294909, abs=1e-6)
        assert rep.recall == pytest.approx(0.712389381, abs=1e-6)
        assert rep.accuracy == pytest.approx(0.624749164, abs=1e-6)
        assert rep.f1 == pytest.approx(0.741593736, abs=1e-6)

    def test_statue_f1_formula_true_value(self):
        # 2*1569 / (2*1569 + 216 + 331) = 3138/3685
        rep = compute(ConfusionCounts(tp=1569, fn=331, fp=216, tn=103))
        assert rep.f1 == pytest.approx(3138 / 3685, abs=1e-12)
        assert rep.f1 == pytest.approx(0.851561, abs=1e-6)
        assert rep.f1 <= 1.0

    def test_degenerate_precision(self):
        rep = compute(ConfusionCounts(tp=0, fn=5, fp=0, tn=5))
        assert rep.precision == 0.0
        assert "precision" in rep.degenerate
        assert rep.recall == 0.0
        assert rep.accuracy == 0.5
        assert rep.f1 == 0.0

    def test_all_zero_counts(self):
        with pytest.raises(DegenerateCounts):
            ConfusionCounts(tp=0, fn=0, fp=0, tn=0)

    def test_negative_counts(self):
        with pytest.raises(ValueError):
            ConfusionCounts(tp=-1, fn=0, fp=0, tn=1)

    def test_perfect_run(self):
        rep = compute(ConfusionCounts(tp=10, fn=0, fp=0, tn=10))
        assert (rep.precision, rep.recall, rep.accuracy, rep.f1) == (1.0, 1.0, 1.0, 1.0)

    @given(counts_st)
    @settings(max_examples=150)
    def test_bounds_and_harmonic_identity(self, t):
        tp, fn, fp, tn = t
        rep = compute(ConfusionCounts(tp=tp, fn=fn, fp=fp, tn=tn))
        for v in (rep.precision, rep.recall, rep.accuracy, rep.f1):
            assert 0.0 <= v <= 1.0
        p, r = rep.precision, rep.recall
        if p + r > 0:
            assert rep.f1 == pytest.approx(2 * p * r / (p + r), abs=1e-12)
        assert min(p, r) - 1e-12 <= rep.f1 <= max(p, r) + 1e-12

    @given(counts_st, counts_st)
    @settings(max_examples=60)
    def test_aggregation_linearity(self, a, b):
        ca = ConfusionCounts(*a)
        cb = ConfusionCounts(*b)
        cs = ca + cb
        assert (cs.tp, cs.fn, cs.fp, cs.tn) == tuple(x + y for x, y in zip(a, b))


class TestReferenceTables:
    def test_every_row_metrics(self):
        for name, (_, tp, fn, fp, tn) in REFERENCE_COUNTS.items():
            rep = compute(ConfusionCounts(tp=tp, fn=fn, fp=fp, tn=tn))
            stated = REFERENCE_METRICS[name]
            assert rep.precision == pytest.approx(stated[0], abs=1e-6), name
            assert rep.recall == pytest.approx(stated[1], abs=1e-6), name
            assert rep.accuracy == pytest.approx(stated[2], abs=1e-6), name

    def test_one_feature_row_is_sum_of_table1(self):
        coliseum = ConfusionCounts(tp=532, fn=301, fp=412, tn=188)
        dome = ConfusionCounts(tp=491, fn=333, fp=407, tn=169)
        s = coliseum + dome
        _, tp, fn, fp, tn = REFERENCE_COUNTS["One Feature"]
        assert (s.tp, s.fn, s.fp, s.tn) == (tp, fn, fp, tn)

    def test_consistency_report_flags_bad_f1(self):
        rows = reference_consistency()
        assert not rows["Statue"]["consistent"]
        assert not rows["Two Features"]["consistent"]
        assert not rows["Three Features"]["consistent"]
        for name in ("Coliseum", "Dome", "Eiffel", "Pyramid", "One Feature"):
            assert rows[name]["consistent"], name

    def test_published_totals_disagree_with_count_sums(self):
        # the published "total images" columns do not equal tp+fn+fp+tn;
        # the report must surface both numbers
        rows = reference_consistency()
        assert rows["Coliseum"]["published_total"] == 1520
        assert rows["Coliseum"]["count_sum"] == 532 + 301 + 412 + 188


class TestConfusionFromRun:
    def test_all_correct(self):
        decisions = [(f"l{i}.png", True) for i in range(10)] + [
            (f"n{i}.png", False) for i in range(10)
        ]
        labels = {f"l{i}.png": "landmark" for i in range(10)}
        labels.update({f"n{i}.png": "non-landmark" for i in range(10)})
        c = confusion_from_run(decisions, labels)
        assert (c.tp, c.fn, c.fp, c.tn) == (10, 0, 0, 10)

    def test_inverted_labels_swap_cells(self):
        decisions = [("a", True), ("b", False)]
        c1 = confusion_from_run(decisions, {"a": "landmark", "b": "non-landmark"})
        c2 = confusion_from_run(decisions, {"a": "non-landmark", "b": "landmark"})
        assert (c1.tp, c1.tn) == (c2.fp, c2.fn)

    def test_verdict_strings(self):
        c = confusion_from_run(
            [("a", "Matched"), ("b", "Unmatched")],
            {"a": "landmark", "b": "landmark"},
        )
        assert (c.tp, c.fn) == (1, 1)

    def test_missing_label(self):
        with pytest.raises(MissingLabel):
            confusion_from_run([("mystery.png", True)], {"other.png": "landmark"})

    def test_basename_fallback(self):
        c = confusion_from_run(
            [("/abs/path/img.png", True)], {"img.png": "landmark"}
        )
        assert c.tp == 1

    def test_bool_labels(self):
        c = confusion_from_run([("a", True), ("b", False)], {"a": True, "b": False})
        assert (c.tp, c.tn) == (1, 1)

    def test_bad_label_string(self):
        with pytest.raises(MissingLabel):
            confusion_from_run([("a", True)], {"a": "maybe"})
