import csv
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import make_post
from postimpact.corpus import Impact, LabeledPost, ProblemKind
from postimpact.errors import EmptyReport, TooFewInstances, UnwritablePath
from postimpact.evaluation import (CellResult, EvalReport, ExperimentPlan,
                                   FoldOutcome, derive_seed, emit_report,
                                   f_score, figure_set1_plan, figure_set2_plan,
                                   run, split_folds)
from postimpact.features import FeatureConfig
from postimpact.learners import LearnerKind

HIGH, LOW = Impact.HIGH, Impact.LOW
R = ProblemKind.TOTAL_REACTIONS


def quick_labeled(flags) -> list[LabeledPost]:
    """LabeledPosts with the R problem labeled per `flags`, all else LOW."""
    out = []
    for i, flag in enumerate(flags):
        labels = {k: LOW for k in ProblemKind}
        labels[R] = HIGH if flag else LOW
        out.append(LabeledPost(post=make_post(id=str(i), text=f"t{i}"), labels=labels))
    return out


class TestFScore:
    def test_direct_formula(self):
        s = f_score(tp=2, fp=1, fn=1, tn=0)
        assert s.high_precision == pytest.approx(2 / 3)
        assert s.high_recall == pytest.approx(2 / 3)
        assert s.high_f1 == pytest.approx(2 / 3)

    def test_perfect_classifier(self):
        s = f_score(tp=5, fp=0, fn=0, tn=5)
        assert s.macro_f1 == 1.0

    def test_all_low_on_imbalanced_set(self):
        # 1 high / 9 low, predicting only low:
        # high F1 = 0; low: P=9/10, R=1, F1=18/19; macro = 9/19
        s = f_score(tp=0, fp=0, fn=1, tn=9)
        assert s.high_f1 == 0.0
        assert s.low_f1 == pytest.approx(18 / 19)
        assert s.macro_f1 == pytest.approx(9 / 19)

    def test_zero_over_zero_is_zero(self):
        s = f_score(tp=0, fp=0, fn=0, tn=0)
        assert s.macro_f1 == 0.0


class TestSplitFolds:
    def test_corpus_scale_fold_sizes(self):
        # 13,651 posts (2,836 high): nine folds of one size, one of the other
        flags = [i < 2836 for i in range(13651)]
        folds = split_folds(quick_labeled(flags), R, k=10, seed=1)
        sizes = sorted(len(f) for f in folds)
        assert sum(sizes) == 13651
        assert set(sizes) == {1365, 1366}
        assert sizes.count(1365) == 9 and sizes.count(1366) == 1

    def test_perfect_stratification(self):
        labeled = quick_labeled([True] * 5 + [False] * 5)
        folds = split_folds(labeled, R, k=5, seed=3)
        for fold in folds:
            labels = [labeled[i].labels[R] for i in fold]
            assert labels.count(HIGH) == 1 and labels.count(LOW) == 1

    def test_same_seed_identical(self):
        labeled = quick_labeled([i % 3 == 0 for i in range(40)])
        a = split_folds(labeled, R, 4, seed=7)
        b = split_folds(labeled, R, 4, seed=7)
        assert all(np.array_equal(x, y) for x, y in zip(a, b))

    def test_different_seed_differs(self):
        labeled = quick_labeled([i % 3 == 0 for i in range(40)])
        a = split_folds(labeled, R, 4, seed=7)
        b = split_folds(labeled, R, 4, seed=8)
        assert any(not np.array_equal(x, y) for x, y in zip(a, b))

    def test_too_many_folds(self):
        with pytest.raises(TooFewInstances):
            split_folds(quick_labeled([True, False]), R, k=3, seed=0)

    def test_single_class_rejected(self):
        with pytest.raises(TooFewInstances):
            split_folds(quick_labeled([False] * 10), R, k=2, seed=0)

    @settings(max_examples=60)
    @given(st.integers(min_value=2, max_value=8),
           st.lists(st.booleans(), min_size=20, max_size=120),
           st.integers(min_value=0, max_value=99))
    def test_partition_and_stratification(self, k, flags, seed):
        if not (any(flags) and not all(flags)):
            flags = flags[:-2] + [True, False]
        labeled = quick_labeled(flags)
        folds = split_folds(labeled, R, k, seed)
        # exact partition
        combined = sorted(i for fold in folds for i in fold)
        assert combined == list(range(len(labeled)))
        # fold sizes within 1 of each other
        sizes = [len(f) for f in folds]
        assert max(sizes) - min(sizes) <= 1
        # per-class counts within 1
        for cls in (HIGH, LOW):
            counts = [sum(1 for i in fold if labeled[i].labels[R] is cls)
                      for fold in folds]
            assert max(counts) - min(counts) <= 1


def tiny_corpus(n=20, seed=5):
    """Both classes on every problem, text correlated with the labels."""
    rng = np.random.default_rng(seed)
    posts = []
    for i in range(n):
        hot = i % 3 == 0
        r = 50 if hot else 2
        posts.append(make_post(
            id=str(i),
            text=("gran sorteo hoy" if hot else "foto del dia") + f" x{rng.integers(0, 3)}",
            like=r, love=max(1, r // 5), haha=i % 2, sad=(i + 1) % 2,
            comments=r // 2, shares=r // 3,
        ))
    from postimpact.corpus import label_posts
    return label_posts(posts)


class TestRun:
    def test_minimal_plan_one_cell_ten_folds(self):
        plan = ExperimentPlan(problems=(R,),
                              configs=(FeatureConfig.parse("s"),),
                              learners=(LearnerKind.DECISION_TREE,),
                              folds=10, seed=1)
        report = run(plan, tiny_corpus())
        assert len(report.cells) == 1
        cell = report.cells[0]
        assert not cell.skipped
        assert len(cell.fold_outcomes) == 10
        assert all(0.0 <= f.macro_f1 <= 1.0 for f in cell.fold_outcomes)

    def test_fold_confusions_sum_to_fold_sizes(self):
        plan = ExperimentPlan(problems=(R,), configs=(FeatureConfig.parse("s"),),
                              learners=(LearnerKind.NAIVE_BAYES,), folds=5, seed=2)
        labeled = tiny_corpus()
        report = run(plan, labeled)
        folds = split_folds(labeled, R, 5, seed=2)
        for outcome, fold in zip(report.cells[0].fold_outcomes, folds):
            assert outcome.tp + outcome.fp + outcome.fn + outcome.tn == len(fold)

    def test_single_class_problem_recorded_as_skipped(self):
        labeled = tiny_corpus()
        # force single class on one problem
        for lp in labeled:
            lp.labels[ProblemKind.SHARES] = LOW
        plan = ExperimentPlan(problems=(ProblemKind.SHARES,),
                              configs=(FeatureConfig.parse("s"),),
                              learners=(LearnerKind.NAIVE_BAYES,), folds=5, seed=2)
        report = run(plan, labeled)
        assert report.cells[0].skipped
        assert "single class" in report.cells[0].skip_reason

    def test_majority_baseline_high_f1_zero(self):
        report = run(ExperimentPlan(problems=(R,),
                                    configs=(FeatureConfig.parse("s"),),
                                    learners=(LearnerKind.NAIVE_BAYES,),
                                    folds=5, seed=2), tiny_corpus())
        baseline = report.baselines[0]
        assert baseline.learner == "majority"
        assert baseline.aggregate.high_f1 == 0.0

    def test_reproducible(self):
        plan = ExperimentPlan(problems=(R, ProblemKind.COMMENTS),
                              configs=(FeatureConfig.parse("s"), FeatureConfig.parse("b,s")),
                              learners=(LearnerKind.DECISION_TREE, LearnerKind.LINEAR_SVM),
                              folds=5, seed=9)
        labeled = tiny_corpus(30)
        a = run(plan, labeled).to_dict(include_timing=False)
        b = run(plan, labeled).to_dict(include_timing=False)
        assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)

    def test_workers_match_sequential(self):
        plan = ExperimentPlan(problems=(R,),
                              configs=(FeatureConfig.parse("s"), FeatureConfig.parse("b")),
                              learners=(LearnerKind.NAIVE_BAYES,), folds=5, seed=4)
        labeled = tiny_corpus(30)
        seq = run(plan, labeled, max_workers=1).to_dict(include_timing=False)
        par = run(plan, labeled, max_workers=4).to_dict(include_timing=False)
        assert json.dumps(seq, sort_keys=True) == json.dumps(par, sort_keys=True)


class TestEmitReport:
    def _report_with_cells(self, n):
        plan = ExperimentPlan(problems=(R,), configs=(FeatureConfig.parse("s"),),
                              learners=(LearnerKind.NAIVE_BAYES,), folds=2, seed=0)
        report = EvalReport(plan=plan, dataset_fingerprint="x", hyperparameters={})
        for i in range(n):
            cell = CellResult(problem=R, config_key=f"cfg{i}", learner="nb")
            cell.fold_outcomes = [FoldOutcome(0, 1, 0, 0, 1, 1.0)]
            cell.mean_macro_f1 = 1.0
            cell.aggregate = f_score(1, 0, 0, 1)
            report.cells.append(cell)
        return report

    def test_two_cells_two_rows(self, tmp_path):
        emit_report(self._report_with_cells(2), tmp_path)
        with open(tmp_path / "results.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        assert len(rows) == 3  # header + 2 cells

    def test_figures_grouped_by_problem(self, tmp_path):
        plan = figure_set1_plan(seed=1)
        plan = ExperimentPlan(problems=plan.problems,
                              configs=(FeatureConfig.parse("s"),),
                              learners=(LearnerKind.DECISION_TREE,),
                              folds=5, seed=1)
        report = run(plan, tiny_corpus(30))
        emit_report(report, tmp_path)
        figures = json.loads((tmp_path / "figures.json").read_text())
        assert set(figures) == {k.value for k in ProblemKind}  # six panels
        for panel in figures.values():
            assert "configs" in panel and "baseline" in panel

    def test_empty_report_refused(self, tmp_path):
        plan = ExperimentPlan(problems=(R,), configs=(FeatureConfig.parse("s"),),
                              learners=(LearnerKind.NAIVE_BAYES,), folds=2, seed=0)
        report = EvalReport(plan=plan, dataset_fingerprint="x", hyperparameters={})
        with pytest.raises(EmptyReport):
            emit_report(report, tmp_path)
        assert not (tmp_path / "results.csv").exists()

    def test_unwritable_path(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        with pytest.raises(UnwritablePath):
            emit_report(self._report_with_cells(1), blocker / "sub")


class TestPlans:
    def test_set1_configs(self):
        plan = figure_set1_plan()
        assert [c.key for c in plan.configs] == ["b", "s", "i", "t", "b+s+i+t"]
        assert len(plan.problems) == 6 and len(plan.learners) == 4

    def test_set2_excludes_bare_metadata(self):
        plan = figure_set2_plan()
        keys = [c.key for c in plan.configs]
        assert "i" not in keys and "t" not in keys
        assert all("c" in k.split("+") for k in keys)

    def test_plan_round_trips_through_dict(self):
        plan = figure_set1_plan(seed=42)
        assert ExperimentPlan.from_dict(plan.to_dict()) == plan

    def test_plan_validation(self):
        with pytest.raises(ValueError):
            ExperimentPlan(problems=(), configs=(FeatureConfig.parse("s"),),
                           learners=(LearnerKind.KNN,))
        with pytest.raises(ValueError):
            ExperimentPlan(problems=(R,), configs=(FeatureConfig.parse("s"),),
                           learners=(LearnerKind.KNN,), folds=1)


def test_derive_seed_stable_and_distinct():
    assert derive_seed(1, "R", "c", "nb", 0) == derive_seed(1, "R", "c", "nb", 0)
    assert derive_seed(1, "R", "c", "nb", 0) != derive_seed(1, "R", "c", "nb", 1)
    assert derive_seed(1, "R", "c", "nb", 0) != derive_seed(2, "R", "c", "nb", 0)
