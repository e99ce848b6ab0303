import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gestureforge.embedder import EmbeddingModel
from gestureforge.errors import InvalidArgument, LabelMismatch
from gestureforge.gesture import GestureHeadConfig, Regime, TrainSpec, kshot_sample, train
from gestureforge.metrics import (
    ConfusionMatrix,
    evaluate,
    report_from_confusion,
    run_ablation,
    sensitivity,
    specificity,
    ss_f1,
    write_reports_jsonl,
    write_summary_csv,
)
from gestureforge.synth import GenSpec, gen_gesture_dataset


def cm(counts, labels=None):
    counts = np.asarray(counts)
    labels = labels or ["background"] + [f"g{i}" for i in range(1, counts.shape[0])]
    return ConfusionMatrix(counts=counts, labels=labels)


class TestFormulas:
    def test_specificity_formula(self):
        matrix = cm([[9, 1, 0], [0, 5, 0], [0, 0, 5]])
        value, flagged = specificity(matrix)
        assert value == pytest.approx(0.9)
        assert not flagged

    def test_perfect_classifier(self):
        matrix = cm([[4, 0, 0], [0, 6, 0], [0, 0, 5]])
        assert sensitivity(matrix)[0] == 1.0
        assert specificity(matrix)[0] == 1.0

    def test_everything_background(self):
        matrix = cm([[7, 0, 0], [3, 0, 0], [4, 0, 0]])
        assert sensitivity(matrix)[0] == 0.0
        assert specificity(matrix)[0] == 1.0

    def test_cross_gesture_confusion_counts_as_fn(self):
        # gesture g1 predicted as g2 is a false negative for sensitivity
        matrix = cm([[5, 0, 0], [0, 2, 2], [0, 0, 4]])
        assert sensitivity(matrix)[0] == pytest.approx(6 / 8)

    def test_zero_denominator_convention(self):
        matrix = cm([[0, 0], [2, 3]])
        value, flagged = specificity(matrix)
        assert value == 1.0 and flagged

    def test_ss_f1_values(self):
        assert ss_f1(1.0, 1.0) == 1.0
        assert ss_f1(0.0, 0.7) == 0.0
        assert ss_f1(0.8, 0.9) == pytest.approx(0.8470588, abs=1e-7)

    def test_ss_f1_range_check(self):
        with pytest.raises(InvalidArgument):
            ss_f1(1.2, 0.5)

    @given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
    @settings(max_examples=200, deadline=None)
    def test_ss_f1_bounded_by_arithmetic_mean(self, a, b):
        f1 = ss_f1(a, b)
        assert 0.0 <= f1 <= (a + b) / 2 + 1e-12
        # zero iff either input is zero; count-ratio metrics are never so
        # small that 2ab underflows, so restrict the iff accordingly
        if a == 0.0 or b == 0.0:
            assert f1 == 0.0
        elif min(a, b) >= 1e-9:
            assert f1 > 0.0

    def test_complementary_identity_exact(self):
        for counts in ([[3, 1], [2, 6]], [[9, 0], [0, 9]], [[1, 5], [5, 1]]):
            report = report_from_confusion(cm(counts))
            assert report.complementary_ss_f1 + report.ss_f1 == 1.0


class TestConfusionProperties:
    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=120, deadline=None)
    def test_total_equals_sample_count(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 9))
        counts = rng.integers(0, 50, size=(n, n))
        matrix = cm(counts)
        assert matrix.total == int(counts.sum())

    def test_negative_counts_rejected(self):
        with pytest.raises(InvalidArgument):
            cm([[1, -1], [0, 2]])


@pytest.fixture(scope="module")
def trained_setup():
    data = gen_gesture_dataset(["fist", "open_palm", "victory"], per_class=40,
                               background_count=40, gen=GenSpec(seed=50, noise_sigma=0.01))
    embedder = EmbeddingModel.create(seed=1)
    train_split, eval_split = kshot_sample(data, k=15, seed=0)
    model = train(embedder, train_split, GestureHeadConfig(num_gestures=3),
                  TrainSpec(regime=Regime.FINE_TUNED, k=15, seed=0, epochs=15))
    return data, embedder, model, eval_split


class TestEvaluate:
    def test_confusion_total_and_fields(self, trained_setup):
        _, _, model, eval_split = trained_setup
        report = evaluate(model, eval_split, regime=Regime.FINE_TUNED, k=15, seed=0)
        assert report.confusion.total == len(eval_split)
        assert report.complementary_ss_f1 + report.ss_f1 == 1.0
        assert report.k == 15

    def test_permutation_invariance(self, trained_setup):
        _, _, model, eval_split = trained_setup
        a = evaluate(model, eval_split)
        rng = np.random.default_rng(0)
        shuffled = [eval_split[i] for i in rng.permutation(len(eval_split))]
        b = evaluate(model, shuffled)
        assert np.array_equal(a.confusion.counts, b.confusion.counts)

    def test_label_mismatch(self, trained_setup, rng):
        _, _, model, eval_split = trained_setup
        bad = [(eval_split[0][0], "not_a_class")]
        with pytest.raises(LabelMismatch):
            evaluate(model, bad)

    def test_hand_built_confusion(self):
        # 10 samples with known predictions -> hand-computed report
        counts = np.array([[3, 1, 0], [0, 2, 1], [1, 0, 2]])
        report = report_from_confusion(cm(counts))
        # sens: TP=4 of 6 gesture samples; spec: TN=3 of 4 background samples
        assert report.sensitivity == pytest.approx(4 / 6)
        assert report.specificity == pytest.approx(3 / 4)
        expected_f1 = 2 * (4 / 6) * (3 / 4) / ((4 / 6) + (3 / 4))
        assert report.ss_f1 == pytest.approx(expected_f1)


class TestAblation:
    def test_cell_counts_and_outputs(self, trained_setup, tmp_path):
        data, embedder, _, _ = trained_setup
        cells, summary = run_ablation(
            data, embedder, ks=[10], regimes=[Regime.FROZEN], seeds=[1, 2],
            train_overrides={"epochs": 2})
        assert len(cells) == 2
        assert all(c.report is not None for c in cells)
        assert len(summary) == 1
        assert summary[0].n_seeds == 2
        write_reports_jsonl(tmp_path / "reports.jsonl", cells)
        write_summary_csv(tmp_path / "summary.csv", summary)
        lines = (tmp_path / "reports.jsonl").read_text().splitlines()
        assert len(lines) == 2
        header = (tmp_path / "summary.csv").read_text().splitlines()[0]
        assert header == "K,regime,mean_comp_ssf1,stddev,n_seeds"

    def test_insufficient_data_recorded_not_fatal(self, trained_setup):
        data, embedder, _, _ = trained_setup
        cells, summary = run_ablation(
            data, embedder, ks=[10_000], regimes=[Regime.FROZEN], seeds=[0],
            train_overrides={"epochs": 1})
        assert len(cells) == 1
        assert cells[0].report is None
        assert "10000" in cells[0].error or "need" in cells[0].error
        assert summary == []

    def test_summary_invariant_to_seed_order(self, trained_setup):
        data, embedder, _, _ = trained_setup
        _, s1 = run_ablation(data, embedder, ks=[10], regimes=[Regime.FROZEN],
                             seeds=[1, 2], train_overrides={"epochs": 2})
        _, s2 = run_ablation(data, embedder, ks=[10], regimes=[Regime.FROZEN],
                             seeds=[2, 1], train_overrides={"epochs": 2})
        assert s1[0].mean_comp_ssf1 == pytest.approx(s2[0].mean_comp_ssf1, abs=1e-12)
