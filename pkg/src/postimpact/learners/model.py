"""Trained model container: uniform train/predict surface plus persistence.

A model file is a zip archive with two entries:

  manifest.json  format version, learner kind, problem, feature config,
                 vocabulary, time profile, hyperparameters, scalar params
  arrays.npz     numeric blobs (normalizer bounds, weights, tree arrays,
                 stored K-NN training matrix, ...)

Entries are written with a fixed timestamp so saving the same model twice
produces identical bytes.
"""

from __future__ import annotations

import hashlib
import io
import json
import zipfile
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np
from scipy import sparse

from ..corpus import Impact, ProblemKind
from ..errors import (CorruptModelFile, DimensionMismatch, NotSupported,
                      SingleClassTraining, VersionMismatch)
from ..features import (FeatureConfig, FeatureType, FeatureVector, Normalizer,
                        TimeProfile, Vocabulary, stack)
from . import decision_tree, knn, naive_bayes, svm

MODEL_FORMAT_VERSION = 1

_ZIP_DATE = (1980, 1, 1, 0, 0, 0)


class LearnerKind(str, Enum):
    NAIVE_BAYES = "nb"
    DECISION_TREE = "dt"
    LINEAR_SVM = "svm"
    KNN = "knn"


DEFAULT_HYPERPARAMETERS = {
    LearnerKind.NAIVE_BAYES: {"alpha": naive_bayes.DEFAULT_ALPHA},
    LearnerKind.DECISION_TREE: {
        "max_depth": decision_tree.DEFAULT_MAX_DEPTH,
        "min_samples_split": decision_tree.DEFAULT_MIN_SAMPLES_SPLIT,
    },
    LearnerKind.LINEAR_SVM: {"lambda": svm.DEFAULT_LAMBDA, "epochs": svm.DEFAULT_EPOCHS},
    LearnerKind.KNN: {"k": knn.DEFAULT_K, "similarity": "cosine"},
}


@dataclass(frozen=True)
class Prediction:
    label: Impact
    score: float  # confidence for the high-impact class

    @classmethod
    def from_score(cls, score: float) -> "Prediction":
        score = float(score)
        return cls(label=Impact.HIGH if score >= 0.5 else Impact.LOW, score=score)


@dataclass
class Model:
    kind: LearnerKind
    problem: ProblemKind
    config: FeatureConfig
    normalizer: Normalizer
    params: object
    vocabulary: Vocabulary | None = None
    time_profile: TimeProfile | None = None
    seed: int = 0
    balanced: bool = False
    hyperparams: dict | None = None
    version: int = MODEL_FORMAT_VERSION

    @property
    def dim(self) -> int:
        return self.normalizer.dim


def _labels_to_y(labels: Sequence[Impact]) -> np.ndarray:
    return np.fromiter((1 if lab is Impact.HIGH else 0 for lab in labels),
                       dtype=np.int64, count=len(labels))


def train(kind: LearnerKind, problem: ProblemKind,
          vectors: Sequence[FeatureVector], labels: Sequence[Impact], *,
          config: FeatureConfig, normalizer: Normalizer,
          vocabulary: Vocabulary | None = None,
          time_profile: TimeProfile | None = None,
          seed: int = 0, balanced: bool = False,
          hyperparams: dict | None = None) -> Model:
    """Fit one learner. The feature pipeline state (config, vocabulary,
    profile, normalizer) is stored on the returned model so it can reproduce
    the same vectors at prediction time.
    """
    if len(vectors) < 2:
        raise SingleClassTraining("need at least 2 training examples")
    if len(vectors) != len(labels):
        raise ValueError("vectors and labels differ in length")
    dims = {v.dim for v in vectors}
    if len(dims) != 1:
        raise DimensionMismatch(vectors[0].dim, dims.difference({vectors[0].dim}).pop())
    dim = vectors[0].dim
    if dim != normalizer.dim:
        raise DimensionMismatch(normalizer.dim, dim)

    y = _labels_to_y(labels)
    if y.min() == y.max():
        raise SingleClassTraining("training data contains a single class")

    hp = dict(DEFAULT_HYPERPARAMETERS[kind])
    hp.pop("similarity", None)
    if hyperparams:
        hp.update(hyperparams)

    X = stack(vectors)
    if kind is LearnerKind.NAIVE_BAYES:
        params = naive_bayes.fit(X, y, alpha=hp["alpha"], balanced=balanced)
    elif kind is LearnerKind.DECISION_TREE:
        params = decision_tree.fit(X, y, max_depth=hp["max_depth"],
                                   min_samples_split=hp["min_samples_split"],
                                   balanced=balanced)
    elif kind is LearnerKind.LINEAR_SVM:
        params = svm.fit(X, y, rng=np.random.default_rng(seed),
                         lambda_=hp["lambda"], epochs=hp["epochs"],
                         balanced=balanced)
    else:
        params = knn.fit(X, y, k=hp["k"], balanced=balanced)

    return Model(kind=kind, problem=problem, config=config,
                 normalizer=normalizer, params=params, vocabulary=vocabulary,
                 time_profile=time_profile, seed=seed, balanced=balanced,
                 hyperparams=hp)


def predict_scores(model: Model, X: sparse.csr_matrix) -> np.ndarray:
    if X.shape[1] != model.dim:
        raise DimensionMismatch(model.dim, X.shape[1])
    if model.kind is LearnerKind.NAIVE_BAYES:
        return naive_bayes.score(model.params, X)
    if model.kind is LearnerKind.DECISION_TREE:
        return decision_tree.score(model.params, X)
    if model.kind is LearnerKind.LINEAR_SVM:
        return svm.score(model.params, X)
    return knn.score(model.params, X)


def predict(model: Model, vector: FeatureVector) -> Prediction:
    if vector.dim != model.dim:
        raise DimensionMismatch(model.dim, vector.dim)
    return Prediction.from_score(predict_scores(model, stack([vector]))[0])


def predict_many(model: Model, vectors: Sequence[FeatureVector]) -> list[Prediction]:
    scores = predict_scores(model, stack(vectors))
    return [Prediction.from_score(s) for s in scores]


def explain(model: Model, top_n: int = 20) -> dict[str, list[tuple[str, float]]]:
    """Vocabulary tokens most indicative of each class, ranked by the
    log-odds log P(token|high) - log P(token|low). Naive Bayes only, and
    only when the content block is enabled.
    """
    if model.kind is not LearnerKind.NAIVE_BAYES:
        raise NotSupported(f"explain requires a Naive Bayes model, got {model.kind.value}")
    if not model.config.uses_content or model.vocabulary is None or len(model.vocabulary) == 0:
        raise NotSupported("explain requires the content block and a fitted vocabulary")

    n_tokens = len(model.vocabulary)
    flp = model.params.feature_log_prob
    log_odds = flp[1, :n_tokens] - flp[0, :n_tokens]  # content block sits first
    order = np.argsort(-log_odds, kind="stable")
    tokens = model.vocabulary.tokens
    high = [(tokens[i], float(log_odds[i])) for i in order[:top_n]]
    low = [(tokens[i], float(log_odds[i])) for i in order[::-1][:top_n]]
    return {"high": high, "low": low}


# --- persistence -------------------------------------------------------------

def _manifest(model: Model) -> dict:
    vocab = None
    if model.vocabulary is not None:
        vocab = {"tokens": list(model.vocabulary.tokens),
                 "frequencies": model.vocabulary.frequencies}
    profile = None
    if model.time_profile is not None:
        profile = {
            "hour": {str(k): v for k, v in model.time_profile.hour.items()},
            "weekday": {str(k): v for k, v in model.time_profile.weekday.items()},
            "month": {str(k): v for k, v in model.time_profile.month.items()},
            "year": {str(k): v for k, v in model.time_profile.year.items()},
        }
    manifest = {
        "format_version": model.version,
        "kind": model.kind.value,
        "problem": model.problem.value,
        "config": {"enabled": model.config.key,
                   "vocab_size_cap": model.config.vocab_size_cap},
        "seed": model.seed,
        "balanced": model.balanced,
        "hyperparams": model.hyperparams or {},
        "vocabulary": vocab,
        "time_profile": profile,
    }
    p = model.params
    if model.kind is LearnerKind.NAIVE_BAYES:
        manifest["nb"] = {"alpha": p.alpha}
    elif model.kind is LearnerKind.DECISION_TREE:
        manifest["dt"] = {"max_depth": p.max_depth,
                          "min_samples_split": p.min_samples_split,
                          "dim": p.dim}
    elif model.kind is LearnerKind.LINEAR_SVM:
        manifest["svm"] = {"bias": p.bias, "lambda": p.lambda_, "epochs": p.epochs,
                           "objective_per_epoch": p.objective_per_epoch}
    else:
        manifest["knn"] = {"k": p.k}
    return manifest


def _arrays(model: Model) -> dict[str, np.ndarray]:
    arrays = {"norm_mins": model.normalizer.mins, "norm_maxs": model.normalizer.maxs}
    p = model.params
    if model.kind is LearnerKind.NAIVE_BAYES:
        arrays["nb_class_log_prior"] = p.class_log_prior
        arrays["nb_feature_log_prob"] = p.feature_log_prob
    elif model.kind is LearnerKind.DECISION_TREE:
        arrays.update(decision_tree.to_arrays(p))
    elif model.kind is LearnerKind.LINEAR_SVM:
        arrays["svm_weights"] = p.weights
    else:
        arrays["knn_data"] = p.train.data
        arrays["knn_indices"] = p.train.indices
        arrays["knn_indptr"] = p.train.indptr
        arrays["knn_shape"] = np.asarray(p.train.shape, dtype=np.int64)
        arrays["knn_labels"] = p.labels
        arrays["knn_vote_weight"] = p.vote_weight
    return arrays


def save(model: Model, path) -> None:
    manifest_bytes = json.dumps(_manifest(model), ensure_ascii=False,
                                sort_keys=True).encode("utf-8")
    buf = io.BytesIO()
    np.savez(buf, **_arrays(model))
    with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_DEFLATED) as zf:
        zf.writestr(zipfile.ZipInfo("manifest.json", date_time=_ZIP_DATE), manifest_bytes)
        zf.writestr(zipfile.ZipInfo("arrays.npz", date_time=_ZIP_DATE), buf.getvalue())


def load(path) -> Model:
    try:
        with zipfile.ZipFile(path, "r") as zf:
            manifest = json.loads(zf.read("manifest.json").decode("utf-8"))
            arrays = dict(np.load(io.BytesIO(zf.read("arrays.npz"))))
    except (zipfile.BadZipFile, KeyError, OSError, ValueError, json.JSONDecodeError) as exc:
        raise CorruptModelFile(f"cannot read model file {path}: {exc}")

    version = manifest.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise VersionMismatch(MODEL_FORMAT_VERSION, version)

    try:
        kind = LearnerKind(manifest["kind"])
        problem = ProblemKind(manifest["problem"])
        config = FeatureConfig.parse(manifest["config"]["enabled"],
                                     vocab_size_cap=manifest["config"]["vocab_size_cap"])
        normalizer = Normalizer(mins=arrays["norm_mins"], maxs=arrays["norm_maxs"])

        vocabulary = None
        if manifest["vocabulary"] is not None:
            vocabulary = Vocabulary(tokens=tuple(manifest["vocabulary"]["tokens"]),
                                    frequencies=manifest["vocabulary"]["frequencies"])
        profile = None
        if manifest["time_profile"] is not None:
            tp = manifest["time_profile"]
            profile = TimeProfile(
                hour={int(k): v for k, v in tp["hour"].items()},
                weekday={int(k): v for k, v in tp["weekday"].items()},
                month={int(k): v for k, v in tp["month"].items()},
                year={int(k): v for k, v in tp["year"].items()},
            )

        if kind is LearnerKind.NAIVE_BAYES:
            params = naive_bayes.NaiveBayesParams(
                alpha=manifest["nb"]["alpha"],
                class_log_prior=arrays["nb_class_log_prior"],
                feature_log_prob=arrays["nb_feature_log_prob"],
            )
        elif kind is LearnerKind.DECISION_TREE:
            meta = manifest["dt"]
            params = decision_tree.from_arrays(arrays, dim=meta["dim"],
                                               max_depth=meta["max_depth"],
                                               min_samples_split=meta["min_samples_split"])
        elif kind is LearnerKind.LINEAR_SVM:
            meta = manifest["svm"]
            params = svm.SVMParams(weights=arrays["svm_weights"], bias=meta["bias"],
                                   lambda_=meta["lambda"], epochs=meta["epochs"],
                                   objective_per_epoch=list(meta["objective_per_epoch"]))
        else:
            train_matrix = sparse.csr_matrix(
                (arrays["knn_data"], arrays["knn_indices"], arrays["knn_indptr"]),
                shape=tuple(arrays["knn_shape"]),
            )
            params = knn.KNNParams(k=manifest["knn"]["k"], train=train_matrix,
                                   labels=arrays["knn_labels"],
                                   vote_weight=arrays["knn_vote_weight"],
                                   normalized=knn._row_normalize(train_matrix))
    except (KeyError, ValueError, TypeError) as exc:
        raise CorruptModelFile(f"model file {path} is missing fields: {exc}")

    return Model(kind=kind, problem=problem, config=config, normalizer=normalizer,
                 params=params, vocabulary=vocabulary, time_profile=profile,
                 seed=manifest["seed"], balanced=manifest["balanced"],
                 hyperparams=manifest["hyperparams"], version=version)


def checksum(model: Model) -> str:
    """SHA-256 over the model's canonical serialized state."""
    h = hashlib.sha256()
    h.update(json.dumps(_manifest(model), ensure_ascii=False, sort_keys=True).encode("utf-8"))
    for name in sorted(_arrays(model)):
        h.update(name.encode("utf-8"))
        h.update(np.ascontiguousarray(_arrays(model)[name]).tobytes())
    return h.hexdigest()
