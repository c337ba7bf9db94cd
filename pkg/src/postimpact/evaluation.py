"""Cross-validated evaluation: problems x feature configs x learners.

Folds are stratified (the class ratio per fold stays within one instance of
the global ratio) because several problems are heavily imbalanced and plain
random folds can produce untrainable single-class training sets. Vocabulary,
time profile, and normalizer are refitted on the training folds of every
split so no test-fold statistics leak into the pipeline.
"""

from __future__ import annotations

import csv
import hashlib
import json
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import Impact, LabeledPost, ProblemKind
from .errors import EmptyReport, TooFewInstances, UnwritablePath
from .features import (FeatureConfig, PreparedPost, fit_pipeline,
                       prepare_post, stack, transform)
from .learners import (DEFAULT_HYPERPARAMETERS, LearnerKind, predict_scores,
                       train)
from .learners.model import _labels_to_y

MAJORITY_BASELINE = "majority"


@dataclass(frozen=True)
class ExperimentPlan:
    problems: tuple[ProblemKind, ...]
    configs: tuple[FeatureConfig, ...]
    learners: tuple[LearnerKind, ...]
    folds: int = 10
    seed: int = 0
    balanced: bool = False

    def __post_init__(self):
        if self.folds < 2:
            raise ValueError("folds must be >= 2")
        if not (self.problems and self.configs and self.learners):
            raise ValueError("plan needs at least one problem, config, and learner")

    @classmethod
    def from_dict(cls, obj: dict) -> "ExperimentPlan":
        return cls(
            problems=tuple(ProblemKind(p) for p in obj["problems"]),
            configs=tuple(FeatureConfig.parse(c, vocab_size_cap=obj.get("vocab_size_cap", 10_000))
                          for c in obj["configs"]),
            learners=tuple(LearnerKind(l) for l in obj["learners"]),
            folds=obj.get("folds", 10),
            seed=obj.get("seed", 0),
            balanced=obj.get("balanced", False),
        )

    def to_dict(self) -> dict:
        return {
            "problems": [p.value for p in self.problems],
            "configs": [c.key for c in self.configs],
            "learners": [l.value for l in self.learners],
            "folds": self.folds,
            "seed": self.seed,
            "balanced": self.balanced,
        }


def figure_set1_plan(seed: int = 0, folds: int = 10) -> ExperimentPlan:
    """Single feature types plus their combination, no text."""
    return ExperimentPlan(
        problems=tuple(ProblemKind),
        configs=tuple(FeatureConfig.parse(c) for c in ("b", "s", "i", "t", "b+s+i+t")),
        learners=tuple(LearnerKind),
        folds=folds, seed=seed,
    )


def figure_set2_plan(seed: int = 0, folds: int = 10) -> ExperimentPlan:
    """Content-bearing configs; interaction/time only in the full combination."""
    return ExperimentPlan(
        problems=tuple(ProblemKind),
        configs=tuple(FeatureConfig.parse(c)
                      for c in ("c", "c+b", "c+s", "c+b+s", "c+b+s+i+t")),
        learners=tuple(LearnerKind),
        folds=folds, seed=seed,
    )


@dataclass
class FScores:
    high_precision: float
    high_recall: float
    high_f1: float
    low_precision: float
    low_recall: float
    low_f1: float
    macro_f1: float


def f_score(tp: int, fp: int, fn: int, tn: int) -> FScores:
    """Per-class F1 and their unweighted mean; every 0/0 ratio is 0."""

    def prf(tp_, fp_, fn_):
        p = tp_ / (tp_ + fp_) if tp_ + fp_ else 0.0
        r = tp_ / (tp_ + fn_) if tp_ + fn_ else 0.0
        f1 = 2 * p * r / (p + r) if p + r else 0.0
        return p, r, f1

    hp, hr, hf = prf(tp, fp, fn)
    lp, lr, lf = prf(tn, fn, fp)  # low class: swap roles
    return FScores(high_precision=hp, high_recall=hr, high_f1=hf,
                   low_precision=lp, low_recall=lr, low_f1=lf,
                   macro_f1=(hf + lf) / 2.0)


def split_folds(labeled: Sequence[LabeledPost], problem: ProblemKind,
                k: int, seed: int) -> list[np.ndarray]:
    """Seeded stratified partition into k index folds.

    Each class is shuffled and dealt round-robin with a cursor shared across
    classes, so per-fold class counts stay within one of each other and fold
    sizes differ by at most one overall.
    """
    n = len(labeled)
    if k > n:
        raise TooFewInstances(f"cannot split {n} posts into {k} folds")
    y = np.fromiter((1 if lp.labels[problem] is Impact.HIGH else 0 for lp in labeled),
                    dtype=np.int64, count=n)
    if y.min() == y.max():
        raise TooFewInstances(f"problem {problem.value} has a single class")

    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    cursor = 0
    for cls in (1, 0):  # high first, then low
        idx = np.flatnonzero(y == cls)
        rng.shuffle(idx)
        for i in idx:
            folds[cursor].append(int(i))
            cursor = (cursor + 1) % k
    return [np.asarray(sorted(f), dtype=np.int64) for f in folds]


@dataclass
class FoldOutcome:
    fold: int
    tp: int
    fp: int
    fn: int
    tn: int
    macro_f1: float


@dataclass
class CellResult:
    problem: ProblemKind
    config_key: str
    learner: str
    fold_outcomes: list[FoldOutcome] = field(default_factory=list)
    mean_macro_f1: float = 0.0
    aggregate: FScores | None = None
    wall_clock: float = 0.0
    skipped: bool = False
    skip_reason: str | None = None

    def confusion_totals(self) -> tuple[int, int, int, int]:
        tp = sum(f.tp for f in self.fold_outcomes)
        fp = sum(f.fp for f in self.fold_outcomes)
        fn = sum(f.fn for f in self.fold_outcomes)
        tn = sum(f.tn for f in self.fold_outcomes)
        return tp, fp, fn, tn


@dataclass
class EvalReport:
    plan: ExperimentPlan
    dataset_fingerprint: str
    hyperparameters: dict
    cells: list[CellResult] = field(default_factory=list)
    baselines: list[CellResult] = field(default_factory=list)
    stratified: bool = True
    std_note: str = "population standard deviation (divide by N)"

    def cell(self, problem: ProblemKind, config_key: str, learner: str) -> CellResult:
        for c in self.cells:
            if c.problem is problem and c.config_key == config_key and c.learner == learner:
                return c
        raise KeyError((problem, config_key, learner))

    def to_dict(self, include_timing: bool = True) -> dict:
        def cell_dict(c: CellResult) -> dict:
            tp, fp, fn, tn = c.confusion_totals()
            d = {
                "problem": c.problem.value,
                "config": c.config_key,
                "learner": c.learner,
                "mean_macro_f1": c.mean_macro_f1,
                "fold_macro_f1": [f.macro_f1 for f in c.fold_outcomes],
                "fold_confusions": [[f.tp, f.fp, f.fn, f.tn] for f in c.fold_outcomes],
                "confusion": {"tp": tp, "fp": fp, "fn": fn, "tn": tn},
                "per_class": None if c.aggregate is None else vars(c.aggregate),
                "skipped": c.skipped,
                "skip_reason": c.skip_reason,
            }
            if include_timing:
                d["wall_clock_s"] = c.wall_clock
            return d

        return {
            "plan": self.plan.to_dict(),
            "dataset_fingerprint": self.dataset_fingerprint,
            "hyperparameters": self.hyperparameters,
            "stratified": self.stratified,
            "std_note": self.std_note,
            "cells": [cell_dict(c) for c in self.cells],
            "baselines": [cell_dict(c) for c in self.baselines],
        }


def dataset_fingerprint(labeled: Sequence[LabeledPost]) -> str:
    h = hashlib.sha256()
    for lp in labeled:
        h.update(lp.post.id.encode("utf-8"))
        for kind in ProblemKind:
            h.update(lp.labels[kind].value.encode("ascii"))
    return h.hexdigest()


def derive_seed(base: int, *parts) -> int:
    """Stable per-cell/per-fold seed (crc32 of the joined identifiers)."""
    key = ":".join(str(p) for p in parts)
    return (base * 1_000_003 + zlib.crc32(key.encode("utf-8"))) % (2 ** 32)


def _confusion(y_true: np.ndarray, y_pred: np.ndarray) -> tuple[int, int, int, int]:
    tp = int(((y_pred == 1) & (y_true == 1)).sum())
    fp = int(((y_pred == 1) & (y_true == 0)).sum())
    fn = int(((y_pred == 0) & (y_true == 1)).sum())
    tn = int(((y_pred == 0) & (y_true == 0)).sum())
    return tp, fp, fn, tn


def _finish_cell(cell: CellResult) -> None:
    scores = [f.macro_f1 for f in cell.fold_outcomes]
    cell.mean_macro_f1 = float(np.mean(scores)) if scores else 0.0
    cell.aggregate = f_score(*cell.confusion_totals())


def _run_cell(cell: CellResult, plan: ExperimentPlan, kind: LearnerKind,
              config: FeatureConfig, prepared: list[PreparedPost],
              labels: list[Impact], folds: list[np.ndarray]) -> None:
    started = time.perf_counter()
    y_all = _labels_to_y(labels)
    try:
        for fold_i, test_idx in enumerate(folds):
            test_set = set(test_idx.tolist())
            train_idx = [i for i in range(len(prepared)) if i not in test_set]

            state, train_vectors = fit_pipeline([prepared[i] for i in train_idx], config)
            test_vectors = [transform(prepared[i], config, state) for i in test_idx]

            model = train(
                kind, cell.problem, train_vectors,
                [labels[i] for i in train_idx],
                config=config, normalizer=state.normalizer,
                vocabulary=state.vocabulary, time_profile=state.time_profile,
                seed=derive_seed(plan.seed, cell.problem.value, config.key,
                                 kind.value, fold_i),
                balanced=plan.balanced,
            )
            scores = predict_scores(model, stack(test_vectors))
            y_pred = (scores >= 0.5).astype(np.int64)
            tp, fp, fn, tn = _confusion(y_all[test_idx], y_pred)
            cell.fold_outcomes.append(
                FoldOutcome(fold=fold_i, tp=tp, fp=fp, fn=fn, tn=tn,
                            macro_f1=f_score(tp, fp, fn, tn).macro_f1))
    except TooFewInstances as exc:
        cell.skipped = True
        cell.skip_reason = str(exc)
        cell.fold_outcomes.clear()
    except Exception as exc:  # degenerate cells must not abort the run
        cell.skipped = True
        cell.skip_reason = f"{type(exc).__name__}: {exc}"
        cell.fold_outcomes.clear()
    _finish_cell(cell)
    cell.wall_clock = time.perf_counter() - started


def _majority_cell(problem: ProblemKind, labels: list[Impact],
                   folds: list[np.ndarray]) -> CellResult:
    """Predict the training-fold majority class everywhere; ties go low."""
    cell = CellResult(problem=problem, config_key="-", learner=MAJORITY_BASELINE)
    y_all = _labels_to_y(labels)
    n = len(labels)
    for fold_i, test_idx in enumerate(folds):
        test_set = set(test_idx.tolist())
        train_mask = np.asarray([i not in test_set for i in range(n)])
        n_high = int(y_all[train_mask].sum())
        majority = 1 if n_high > train_mask.sum() - n_high else 0
        y_pred = np.full(len(test_idx), majority, dtype=np.int64)
        tp, fp, fn, tn = _confusion(y_all[test_idx], y_pred)
        cell.fold_outcomes.append(
            FoldOutcome(fold=fold_i, tp=tp, fp=fp, fn=fn, tn=tn,
                        macro_f1=f_score(tp, fp, fn, tn).macro_f1))
    _finish_cell(cell)
    return cell


def run(plan: ExperimentPlan, labeled: Sequence[LabeledPost],
        max_workers: int = 1) -> EvalReport:
    """Execute the full plan. Per-cell failures (e.g. a single-class problem)
    are recorded as skipped cells, never raised."""
    labeled = list(labeled)
    prepared = [prepare_post(lp.post) for lp in labeled]
    hyper = {k.value: dict(v) for k, v in DEFAULT_HYPERPARAMETERS.items()}
    report = EvalReport(plan=plan,
                        dataset_fingerprint=dataset_fingerprint(labeled),
                        hyperparameters=hyper)

    for problem in plan.problems:
        labels = [lp.labels[problem] for lp in labeled]
        try:
            folds = split_folds(labeled, problem, plan.folds, plan.seed)
        except TooFewInstances as exc:
            for config in plan.configs:
                for kind in plan.learners:
                    report.cells.append(CellResult(
                        problem=problem, config_key=config.key, learner=kind.value,
                        skipped=True, skip_reason=str(exc)))
            report.baselines.append(CellResult(
                problem=problem, config_key="-", learner=MAJORITY_BASELINE,
                skipped=True, skip_reason=str(exc)))
            continue

        report.baselines.append(_majority_cell(problem, labels, folds))

        cells = []
        for config in plan.configs:
            for kind in plan.learners:
                cell = CellResult(problem=problem, config_key=config.key,
                                  learner=kind.value)
                cells.append((cell, kind, config))
                report.cells.append(cell)

        if max_workers > 1:
            with ThreadPoolExecutor(max_workers=max_workers) as pool:
                futures = [pool.submit(_run_cell, cell, plan, kind, config,
                                       prepared, labels, folds)
                           for cell, kind, config in cells]
                for f in futures:
                    f.result()
        else:
            for cell, kind, config in cells:
                _run_cell(cell, plan, kind, config, prepared, labels, folds)

    return report


def emit_report(report: EvalReport, out_dir) -> list[Path]:
    """Write results.csv (one row per cell), figures.json (per-problem
    grouped bar data), and report.json (everything)."""
    if not report.cells:
        raise EmptyReport("refusing to write an empty report")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise UnwritablePath(f"cannot write to {out}: {exc}")

    csv_path = out / "results.csv"
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([
            "problem", "config", "learner", "mean_macro_f1",
            "high_precision", "high_recall", "high_f1",
            "low_precision", "low_recall", "low_f1",
            "tp", "fp", "fn", "tn", "wall_clock_s", "skipped", "skip_reason",
        ])
        for cell in report.cells + report.baselines:
            agg = cell.aggregate or f_score(0, 0, 0, 0)
            tp, fp, fn, tn = cell.confusion_totals()
            writer.writerow([
                cell.problem.value, cell.config_key, cell.learner,
                f"{cell.mean_macro_f1:.6f}",
                f"{agg.high_precision:.6f}", f"{agg.high_recall:.6f}", f"{agg.high_f1:.6f}",
                f"{agg.low_precision:.6f}", f"{agg.low_recall:.6f}", f"{agg.low_f1:.6f}",
                tp, fp, fn, tn, f"{cell.wall_clock:.3f}",
                cell.skipped, cell.skip_reason or "",
            ])

    figures: dict = {}
    for cell in report.cells:
        panel = figures.setdefault(cell.problem.value, {"configs": {}, "baseline": None})
        panel["configs"].setdefault(cell.config_key, {})[cell.learner] = cell.mean_macro_f1
    for base in report.baselines:
        if base.problem.value in figures:
            figures[base.problem.value]["baseline"] = base.mean_macro_f1

    figures_path = out / "figures.json"
    figures_path.write_text(json.dumps(figures, indent=2, sort_keys=True),
                            encoding="utf-8")

    report_path = out / "report.json"
    report_path.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True),
                           encoding="utf-8")
    return [csv_path, figures_path, report_path]
