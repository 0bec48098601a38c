import numpy as np
import pytest

from emofuse.errors import DataError
from emofuse.metrics import (
    accuracy,
    confusion,
    confusion_from_indices,
    macro_f1,
    parse_report_csv,
    render_report,
    weighted_f1,
)


class TestConfusion:
    def test_rows_are_gold(self):
        cm = confusion(["angry", "angry", "sad"], ["angry", "sad", "sad"], "iemocap4")
        assert cm.counts[0, 0] == 1  # angry correctly predicted
        assert cm.counts[0, 1] == 1  # angry predicted as sad
        assert cm.counts[1, 1] == 1
        assert cm.total == 3

    def test_accepts_integer_indices(self):
        cm = confusion([0, 1], [0, 1], "iemocap4")
        assert np.trace(cm.counts) == 2

    def test_invalid_label(self):
        with pytest.raises(DataError):
            confusion(["joy"], ["joy"], "iemocap4")

    def test_length_mismatch(self):
        with pytest.raises(DataError):
            confusion(["angry"], [], "iemocap4")

    def test_from_indices(self):
        cm = confusion_from_indices([0, 0, 1], [0, 1, 1], 2)
        np.testing.assert_array_equal(cm.counts, [[1, 1], [0, 1]])


class TestScores:
    def _two_class_fixture(self):
        # golds [A,A,B], preds [A,B,B]:
        #   acc = 2/3
        #   F1_A: P=1, R=1/2 -> 2/3; F1_B: P=1/2, R=1 -> 2/3
        #   weighted F1 = (2*(2/3) + 1*(2/3)) / 3 = 2/3
        return confusion(
            ["angry", "angry", "sad"], ["angry", "sad", "sad"], "iemocap4"
        )

    def test_hand_fixture_accuracy(self):
        assert accuracy(self._two_class_fixture()) == pytest.approx(2 / 3)

    def test_hand_fixture_weighted_f1(self):
        assert weighted_f1(self._two_class_fixture()) == pytest.approx(2 / 3)

    def test_perfect_predictions(self):
        cm = confusion_from_indices([0, 1, 2, 1], [0, 1, 2, 1], 4)
        assert accuracy(cm) == 1.0
        assert weighted_f1(cm) == pytest.approx(1.0)
        assert macro_f1(cm) < 1.0  # the absent fourth class contributes F1=0

    def test_diagonal_weighted_f1_equals_accuracy(self):
        rng = np.random.default_rng(0)
        golds = rng.integers(0, 4, size=200)
        cm = confusion_from_indices(golds, golds, 4)
        assert weighted_f1(cm) == pytest.approx(accuracy(cm))

    def test_absent_class_f1_zero_not_nan(self):
        # class 2 never appears in gold or pred
        cm = confusion_from_indices([0, 1], [1, 0], 3)
        assert np.isfinite(weighted_f1(cm))
        assert np.isfinite(macro_f1(cm))
        assert weighted_f1(cm) == 0.0

    def test_permutation_invariance(self):
        rng = np.random.default_rng(1)
        golds = rng.integers(0, 3, size=60)
        preds = rng.integers(0, 3, size=60)
        cm1 = confusion_from_indices(golds, preds, 3)
        perm = rng.permutation(60)
        cm2 = confusion_from_indices(golds[perm], preds[perm], 3)
        assert accuracy(cm1) == accuracy(cm2)
        assert weighted_f1(cm1) == weighted_f1(cm2)

    def test_empty_matrix_rejected(self):
        cm = confusion_from_indices([], [], 3)
        with pytest.raises(DataError):
            accuracy(cm)
        with pytest.raises(DataError):
            weighted_f1(cm)


class TestReport:
    def _cm(self):
        rng = np.random.default_rng(2)
        golds = rng.integers(0, 7, size=300)
        preds = np.where(rng.random(300) < 0.7, golds, rng.integers(0, 7, size=300))
        from emofuse.data import scheme_labels

        labels = scheme_labels("meld7")
        return confusion([labels[g] for g in golds], [labels[p] for p in preds], "meld7")

    def test_text_contains_row_percentages(self):
        cm = self._cm()
        text, _ = render_report(cm, "meld7")
        # diagonal of the first row, computed independently
        row = cm.counts[0]
        expect = f"{100.0 * row[0] / row.sum():.1f}"
        assert expect in text
        assert "overall accuracy" in text
        assert "weighted F1" in text

    def test_csv_round_trip(self):
        cm = self._cm()
        _, csv_text = render_report(cm, "meld7")
        per_class, acc, wf1 = parse_report_csv(csv_text)
        assert len(per_class) == 7
        assert acc == pytest.approx(accuracy(cm), abs=1e-6)
        assert wf1 == pytest.approx(weighted_f1(cm), abs=1e-6)
        supports = cm.supports()
        for i, row in enumerate(per_class):
            assert row["support"] == supports[i]
            assert row["per_class_accuracy"] == pytest.approx(row["recall"])

    def test_diagonal_matrix_reports_100s(self):
        cm = confusion_from_indices([0, 1, 2] * 5, [0, 1, 2] * 5, 3)
        text, csv_text = render_report(cm)
        assert "acc=100.0%" in text
        _, acc, wf1 = parse_report_csv(csv_text)
        assert acc == 1.0
        assert wf1 == 1.0

    def test_bad_header_rejected(self):
        with pytest.raises(DataError):
            parse_report_csv("a,b,c\n1,2,3\n")
