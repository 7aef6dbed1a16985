"""Confusion counting and the five derived metrics."""

import math

import numpy as np
import pytest

from chromoscore.centromere import DC, MC
from chromoscore.errors import LengthMismatch
from chromoscore.metrics import (
    ConfusionMatrix,
    accumulate,
    accuracy,
    all_metrics,
    mcc,
    precision,
    recall,
    specificity,
)

FIXTURE = ConfusionMatrix(tp=1350, tn=1480, fp=20, fn=150)


class TestConfusionMatrix:
    def test_validation(self):
        with pytest.raises(ValueError):
            ConfusionMatrix(tp=-1)
        with pytest.raises(ValueError):
            ConfusionMatrix(fp=2.5)

    def test_merge_is_componentwise_sum(self):
        a = ConfusionMatrix(tp=1, tn=2, fp=3, fn=4)
        b = ConfusionMatrix(tp=10, tn=20, fp=30, fn=40)
        m = a.merge(b)
        assert (m.tp, m.tn, m.fp, m.fn) == (11, 22, 33, 44)

    def test_merge_associative(self):
        rng = np.random.default_rng(17)
        for _ in range(50):
            a, b, c = (
                ConfusionMatrix(*(int(v) for v in rng.integers(0, 100, size=4)))
                for _ in range(3)
            )
            assert a.merge(b).merge(c) == a.merge(b.merge(c))


class TestAccumulate:
    def test_all_correct(self):
        cm = accumulate([DC, MC, DC], [DC, MC, DC])
        assert cm.fp == 0 and cm.fn == 0 and cm.tp == 2 and cm.tn == 1

    def test_inverted_predictions_swap_counts(self):
        truths = [DC, DC, MC, MC, MC]
        calls = [DC, MC, DC, MC, MC]
        cm = accumulate(calls, truths)
        flipped = accumulate([MC if c == DC else DC for c in calls], truths)
        assert (flipped.tp, flipped.fn) == (cm.fn, cm.tp)
        assert (flipped.tn, flipped.fp) == (cm.fp, cm.tn)

    def test_against_counting_oracle(self):
        rng = np.random.default_rng(18)
        labels = np.array([MC, DC])
        calls = list(labels[rng.integers(0, 2, size=1000)])
        truths = list(labels[rng.integers(0, 2, size=1000)])
        cm = accumulate(calls, truths)
        assert cm.tp == sum(1 for c, t in zip(calls, truths) if t == DC and c == DC)
        assert cm.tn == sum(1 for c, t in zip(calls, truths) if t == MC and c != DC)
        assert cm.fp == sum(1 for c, t in zip(calls, truths) if t == MC and c == DC)
        assert cm.fn == sum(1 for c, t in zip(calls, truths) if t == DC and c != DC)
        assert cm.total == 1000

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            accumulate([DC], [DC, MC])

    def test_bad_truth_label(self):
        with pytest.raises(ValueError):
            accumulate([DC], ["weird"])


class TestReportedValues:
    def test_fixture_reproduces_published_figures(self):
        assert accuracy(FIXTURE) * 100 == pytest.approx(94.3333, abs=5e-4)
        assert precision(FIXTURE) * 100 == pytest.approx(98.5401, abs=5e-4)
        assert recall(FIXTURE) * 100 == pytest.approx(90.0, abs=5e-4)
        assert specificity(FIXTURE) * 100 == pytest.approx(98.6667, abs=5e-4)
        assert mcc(FIXTURE) == pytest.approx(0.8900, abs=5e-4)

    def test_fixture_exact_fractions(self):
        assert accuracy(FIXTURE) == 2830 / 3000
        assert precision(FIXTURE) == 1350 / 1370
        assert recall(FIXTURE) == 0.9
        assert specificity(FIXTURE) == 1480 / 1500
        num = 1350 * 1480 - 20 * 150
        den = math.sqrt(1370) * math.sqrt(1500) * math.sqrt(1500) * math.sqrt(1630)
        assert mcc(FIXTURE) == pytest.approx(num / den, rel=1e-12)

    def test_perfect_classifier(self):
        cm = ConfusionMatrix(tp=10, tn=10)
        vals = all_metrics(cm)
        assert all(v == pytest.approx(1.0, abs=1e-12) for v in vals.values())

    def test_always_positive_on_balanced_set(self):
        cm = ConfusionMatrix(tp=50, fp=50)
        assert accuracy(cm) == 0.5
        assert recall(cm) == 1.0
        assert specificity(cm) == 0.0
        assert mcc(cm) == 0.0


class TestEdgeCases:
    def test_empty_matrix_is_undefined(self):
        cm = ConfusionMatrix()
        assert all(v is None for v in all_metrics(cm).values())

    def test_zero_denominators_are_none_not_nan(self):
        cm = ConfusionMatrix(tn=5, fn=5)  # nothing ever called positive
        assert precision(cm) is None
        assert recall(cm) == 0.0
        assert specificity(cm) == 1.0
        assert mcc(cm) == 0.0
        assert accuracy(cm) == 0.5

    def test_mcc_one_iff_perfect(self):
        assert mcc(ConfusionMatrix(tp=3, tn=7)) == pytest.approx(1.0)
        assert mcc(ConfusionMatrix(tp=3, tn=7, fp=1)) < 1.0
        rng = np.random.default_rng(19)
        for _ in range(200):
            tp, tn, fp, fn = (int(v) for v in rng.integers(0, 30, size=4))
            cm = ConfusionMatrix(tp=tp, tn=tn, fp=fp, fn=fn)
            v = mcc(cm)
            if v is None:
                assert cm.total == 0
            else:
                assert -1.0 - 1e-12 <= v <= 1.0 + 1e-12
                if v == pytest.approx(1.0) and cm.total > 0:
                    assert fp == 0 and fn == 0

    def test_class_swap_symmetry(self):
        rng = np.random.default_rng(20)
        for _ in range(100):
            tp, tn, fp, fn = (int(v) for v in rng.integers(1, 50, size=4))
            cm = ConfusionMatrix(tp=tp, tn=tn, fp=fp, fn=fn)
            sw = ConfusionMatrix(tp=tn, tn=tp, fp=fn, fn=fp)
            assert accuracy(sw) == pytest.approx(accuracy(cm))
            assert precision(sw) == pytest.approx(tn / (tn + fn))
            assert recall(sw) == pytest.approx(specificity(cm))
            assert specificity(sw) == pytest.approx(recall(cm))
            assert abs(mcc(sw)) == pytest.approx(abs(mcc(cm)))
