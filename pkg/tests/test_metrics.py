import numpy as np
import pytest

from zeroleaf.errors import (
    DegenerateLabels,
    LabelOutOfRange,
    LengthMismatch,
    MalformedCurve,
)
from zeroleaf.metrics import (
    ConfusionMatrix,
    auc,
    compute_metrics_report,
    confusion_matrix,
    macro_prf,
    mcc_binary,
    mcc_multiclass,
    mcc_one_vs_rest_macro,
    one_vs_rest_auc,
    roc_curve,
)

import oracles


def random_labels(rng, n, c):
    return [rng.randrange(c) for _ in range(n)]


class TestConfusionMatrix:
    def test_perfect_predictions_are_diagonal(self):
        y = [0] * 5 + [1] * 3 + [2] * 2
        m = confusion_matrix(y, y, 3)
        np.testing.assert_array_equal(m.counts, np.diag([5, 3, 2]))

    def test_direct_counting(self):
        m = confusion_matrix([0, 0, 1, 2], [0, 1, 1, 2], 3)
        np.testing.assert_array_equal(
            m.counts, [[1, 1, 0], [0, 1, 0], [0, 0, 1]]
        )

    def test_label_out_of_range(self):
        with pytest.raises(LabelOutOfRange):
            confusion_matrix([0, 1, 2], [0, 1, 3], 3)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            confusion_matrix([0, 1], [0], 2)

    def test_empty_rejected(self):
        with pytest.raises(LengthMismatch):
            confusion_matrix([], [], 2)

    def test_count_conservation(self, rng):
        for _ in range(100):
            c = rng.randint(2, 5)
            n = rng.randint(1, 50)
            m = confusion_matrix(random_labels(rng, n, c), random_labels(rng, n, c), c)
            assert m.total == n
            for k in range(c):
                assert m.tp(k) + m.fp(k) + m.fn(k) + m.tn(k) == n
                assert m.tp(k) + m.fn(k) == int(m.row_sums()[k])
                assert m.tp(k) + m.fp(k) == int(m.col_sums()[k])


class TestMacroPrf:
    def test_perfect_classifier(self):
        result = macro_prf(ConfusionMatrix(np.diag([5, 5, 5])))
        assert result.precision == result.recall == result.f1 == (1.0, 1.0, 1.0)
        assert result.p_macro == result.r_macro == result.f1_macro == 1.0
        assert result.flags == ()

    def test_worked_example(self):
        result = macro_prf(ConfusionMatrix([[1, 1, 0], [0, 1, 0], [0, 0, 1]]))
        np.testing.assert_allclose(result.f1, (2 / 3, 2 / 3, 1.0), atol=1e-15)
        assert result.f1_macro == pytest.approx(7 / 9, abs=1e-15)

    def test_never_predicted_class_flagged(self):
        # column 2 is all zeros: class 2 never predicted
        result = macro_prf(ConfusionMatrix([[2, 0, 0], [0, 2, 0], [1, 1, 0]]))
        assert result.precision[2] == 0.0
        assert (2, "precision denominator zero") in result.flags

    def test_matches_plain_counting_oracle(self, rng):
        for _ in range(200):
            c = rng.randint(2, 5)
            n = rng.randint(1, 50)
            y_true = random_labels(rng, n, c)
            y_pred = random_labels(rng, n, c)
            result = macro_prf(confusion_matrix(y_true, y_pred, c))
            p, r, f = oracles.per_class_prf_plain(y_true, y_pred, c)
            np.testing.assert_allclose(result.precision, p, atol=1e-12, rtol=0)
            np.testing.assert_allclose(result.recall, r, atol=1e-12, rtol=0)
            np.testing.assert_allclose(result.f1, f, atol=1e-12, rtol=0)
            assert result.p_macro == pytest.approx(sum(p) / c, abs=1e-12)

    def test_f1_between_min_and_max_of_p_r(self, rng):
        for _ in range(200):
            c = rng.randint(2, 4)
            n = rng.randint(2, 40)
            result = macro_prf(confusion_matrix(
                random_labels(rng, n, c), random_labels(rng, n, c), c
            ))
            for p, r, f in zip(result.precision, result.recall, result.f1):
                assert f <= min(1.0, 2 * min(p, r)) + 1e-12
                if p > 0 and r > 0:
                    assert min(p, r) - 1e-12 <= f <= max(p, r) + 1e-12


class TestMcc:
    def test_perfect_diagonal(self):
        value, flags = mcc_multiclass(ConfusionMatrix(np.diag([4, 7, 9])))
        assert value == 1.0
        assert flags == ()

    def test_single_predicted_class_degenerate(self):
        value, flags = mcc_multiclass(ConfusionMatrix([[5, 0], [7, 0]]))
        assert value == 0.0
        assert flags and flags[0].reason == "mcc denominator zero"

    def test_binary_example_matches_classic_formula(self):
        value, _ = mcc_multiclass(ConfusionMatrix([[45, 5], [10, 40]]))
        want = oracles.binary_mcc_plain(tp=45, fn=5, fp=10, tn=40)
        assert value == pytest.approx(want, abs=1e-12)

    def test_equals_binary_formula_for_all_random_binary_matrices(self, rng):
        checked = 0
        while checked < 300:
            m = np.asarray([[rng.randint(0, 30) for _ in range(2)] for _ in range(2)])
            if m.sum() == 0:
                continue
            tp, fn, fp, tn = int(m[0, 0]), int(m[0, 1]), int(m[1, 0]), int(m[1, 1])
            if (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn) == 0:
                continue
            value, flags = mcc_multiclass(ConfusionMatrix(m))
            assert flags == ()
            assert value == pytest.approx(
                oracles.binary_mcc_plain(tp, fp, fn, tn), abs=1e-12
            )
            checked += 1

    def test_transpose_symmetry(self, rng):
        for _ in range(200):
            c = rng.randint(2, 5)
            m = np.asarray(
                [[rng.randint(0, 20) for _ in range(c)] for _ in range(c)]
            )
            if m.sum() == 0:
                continue
            a, _ = mcc_multiclass(ConfusionMatrix(m))
            b, _ = mcc_multiclass(ConfusionMatrix(m.T))
            assert a == pytest.approx(b, abs=1e-12)

    def test_one_vs_rest_macro_variant(self):
        m = ConfusionMatrix([[45, 5], [10, 40]])
        value, flags = mcc_one_vs_rest_macro(m)
        # at C = 2 both one-vs-rest problems are the same binary problem
        assert value == pytest.approx(oracles.binary_mcc_plain(45, 10, 5, 40), abs=1e-12)
        assert flags == ()
        assert mcc_binary(45, 10, 5, 40) == pytest.approx(value, abs=1e-15)


class TestRocCurve:
    def test_perfect_separation_passes_through_top_left(self):
        curve = roc_curve([0.9, 0.8, 0.2, 0.1], [True, True, False, False])
        assert (0.0, 1.0) in curve
        assert curve[0] == (0.0, 0.0) and curve[-1] == (1.0, 1.0)

    def test_all_scores_equal_is_two_point_diagonal(self):
        curve = roc_curve([0.5, 0.5, 0.5, 0.5], [True, False, True, False])
        assert curve == [(0.0, 0.0), (1.0, 1.0)]

    def test_worked_example_area(self):
        curve = roc_curve([0.9, 0.8, 0.4, 0.2], [True, False, True, False])
        assert auc(curve) == pytest.approx(0.75, abs=1e-15)

    def test_degenerate_labels(self):
        with pytest.raises(DegenerateLabels):
            roc_curve([0.1, 0.2], [True, True])
        with pytest.raises(DegenerateLabels):
            roc_curve([0.1, 0.2], [False, False])

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            roc_curve([0.1], [True, False])


class TestAuc:
    def test_perfect_curve(self):
        assert auc([(0.0, 0.0), (0.0, 1.0), (1.0, 1.0)]) == 1.0

    def test_chance_diagonal(self):
        assert auc([(0.0, 0.0), (1.0, 1.0)]) == 0.5

    def test_malformed_curves(self):
        with pytest.raises(MalformedCurve):
            auc([(0.0, 0.0)])
        with pytest.raises(MalformedCurve):
            auc([(0.1, 0.0), (1.0, 1.0)])
        with pytest.raises(MalformedCurve):
            auc([(0.0, 0.0), (1.0, 0.9)])
        with pytest.raises(MalformedCurve):
            auc([(0.0, 0.0), (0.7, 0.5), (0.3, 0.6), (1.0, 1.0)])

    def test_matches_pair_count_oracle(self, rng):
        for _ in range(400):
            n = rng.randint(2, 50)
            scores = [rng.choice([0.1, 0.25, 0.5, 0.75, 0.9]) for _ in range(n)]
            labels = [rng.random() < 0.5 for _ in range(n)]
            if all(labels) or not any(labels):
                continue
            got = auc(roc_curve(scores, labels))
            want = oracles.pairwise_auc_plain(scores, labels)
            assert got == pytest.approx(want, abs=1e-12)

    def test_label_flip_complement(self, rng):
        for _ in range(150):
            n = rng.randint(2, 40)
            scores = [rng.random() for _ in range(n)]
            labels = [rng.random() < 0.4 for _ in range(n)]
            if all(labels) or not any(labels):
                continue
            a = auc(roc_curve(scores, labels))
            b = auc(roc_curve(scores, [not x for x in labels]))
            assert a + b == pytest.approx(1.0, abs=1e-12)


class TestOneVsRest:
    def test_one_hot_scores_are_perfect(self):
        y = [0, 1, 2, 1, 0, 2]
        scores = np.eye(3)[y]
        result = one_vs_rest_auc(scores, y)
        assert result.per_class == (1.0, 1.0, 1.0)
        assert result.macro == 1.0
        assert result.flags == ()

    def test_absent_class_flagged_and_excluded(self):
        y = [0, 0, 1, 1]
        scores = np.asarray([[0.9, 0.1, 0.3], [0.8, 0.2, 0.1],
                             [0.1, 0.9, 0.5], [0.2, 0.7, 0.2]])
        result = one_vs_rest_auc(scores, y)
        assert result.per_class[2] is None
        assert result.macro == pytest.approx(
            (result.per_class[0] + result.per_class[1]) / 2
        )
        assert any(f.class_id == 2 for f in result.flags)

    def test_matches_per_class_binary_oracle(self, rng):
        for _ in range(60):
            n, c = 30, 3
            y = random_labels(rng, n, c)
            scores = np.asarray(
                [[rng.random() for _ in range(c)] for _ in range(n)]
            )
            result = one_vs_rest_auc(scores, y)
            for k in range(c):
                positives = [t == k for t in y]
                if all(positives) or not any(positives):
                    assert result.per_class[k] is None
                    continue
                want = oracles.pairwise_auc_plain(scores[:, k], positives)
                assert result.per_class[k] == pytest.approx(want, abs=1e-12)


class TestJointShuffleInvariance:
    def test_metrics_unchanged_under_joint_permutation(self, rng):
        for _ in range(100):
            n, c = rng.randint(3, 40), rng.randint(2, 4)
            y_true = random_labels(rng, n, c)
            y_pred = random_labels(rng, n, c)
            scores = np.asarray([[rng.random() for _ in range(c)] for _ in range(n)])
            perm = list(range(n))
            rng.shuffle(perm)
            a = compute_metrics_report(y_true, y_pred, scores, c)
            b = compute_metrics_report(
                [y_true[i] for i in perm],
                [y_pred[i] for i in perm],
                scores[perm],
                c,
            )
            assert a.per_class_precision == b.per_class_precision
            assert a.per_class_recall == b.per_class_recall
            assert a.per_class_f1 == b.per_class_f1
            assert a.mcc == b.mcc
            assert a.per_class_auc == b.per_class_auc
            assert a.macro_auc == b.macro_auc
            np.testing.assert_array_equal(a.confusion.counts, b.confusion.counts)


class TestReportAssembly:
    def test_report_fields_consistent(self, rng):
        n, c = 25, 3
        y_true = random_labels(rng, n, c)
        y_pred = random_labels(rng, n, c)
        scores = np.asarray([[rng.random() for _ in range(c)] for _ in range(n)])
        report = compute_metrics_report(y_true, y_pred, scores, c, include_ovr_mcc=True)
        assert report.n_items == n
        assert report.p_macro == pytest.approx(
            sum(report.per_class_precision) / c, abs=1e-12
        )
        assert report.f1_macro == pytest.approx(
            sum(report.per_class_f1) / c, abs=1e-12
        )
        defined = [v for v in report.per_class_auc if v is not None]
        assert report.macro_auc == pytest.approx(sum(defined) / len(defined), abs=1e-12)
        assert report.mcc_ovr_macro is not None

    def test_macro_over_present_only(self):
        y_true = [0, 0, 1, 1]  # class 2 absent
        y_pred = [0, 2, 1, 1]
        scores = np.asarray([[0.8, 0.1, 0.1], [0.2, 0.1, 0.7],
                             [0.1, 0.8, 0.1], [0.0, 0.9, 0.1]])
        report = compute_metrics_report(y_true, y_pred, scores, 3,
                                        macro_over_present_only=True)
        assert report.present_classes == (0, 1)
        p = report.per_class_precision
        assert report.p_macro == pytest.approx((p[0] + p[1]) / 2, abs=1e-15)
        assert any(
            f.class_id == 2 and "excluded" in f.reason for f in report.degenerate_flags
        )

    def test_round_trip_dict(self, rng):
        y_true = [0, 1, 2, 1]
        y_pred = [0, 1, 1, 1]
        scores = np.asarray([[0.7, 0.2, 0.1], [0.1, 0.8, 0.1],
                             [0.2, 0.5, 0.3], [0.1, 0.6, 0.3]])
        report = compute_metrics_report(y_true, y_pred, scores, 3)
        from zeroleaf.metrics import MetricsReport
        again = MetricsReport.from_dict(report.to_dict())
        assert again.to_dict() == report.to_dict()
