"""Model bundles: one trained model per classification problem, plus the
draft-scoring pipeline they share.

A bundle is a directory with a `manifest.json` mapping each problem token to
a model file, its learner, feature config, and format version.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from . import learners
from .corpus import LinkKind, ProblemKind
from .errors import EmptyDraft, ModelMissing
from .features import extract_behavioral, extract_style, prepare_fields, transform
from .features import PipelineState
from .learners import Model, Prediction

MANIFEST_NAME = "manifest.json"


@dataclass(frozen=True)
class DraftPost:
    """A not-yet-published post to score. Time defaults to "now" at the call
    site so what-if posting times stay overridable."""

    text: str
    link_kind: LinkKind = LinkKind.NONE
    published_at: datetime | None = None

    def __post_init__(self):
        if not self.text.strip():
            raise EmptyDraft("draft text is empty")


@dataclass(frozen=True)
class ImpactForecast:
    predictions: dict[ProblemKind, Prediction]
    model_versions: dict[ProblemKind, str]
    style_echo: dict[str, int]
    behavioral_echo: dict[str, int]


@dataclass
class ModelBundle:
    models: dict[ProblemKind, Model]

    def __post_init__(self):
        for kind in ProblemKind:
            if kind not in self.models:
                raise ModelMissing(kind.value)

    def versions(self) -> dict[ProblemKind, str]:
        return {
            kind: f"{model.kind.value}/{model.config.key}/v{model.version}"
            for kind, model in self.models.items()
        }

    def checksums(self) -> dict[str, str]:
        return {kind.value: learners.checksum(m) for kind, m in self.models.items()}


def save_bundle(models: dict[ProblemKind, Model], out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries = {}
    for kind, model in models.items():
        filename = f"model_{kind.value.replace('+', 'p').replace('-', 'm')}.zip"
        learners.save(model, out / filename)
        entries[kind.value] = {
            "path": filename,
            "learner": model.kind.value,
            "config": model.config.key,
            "format_version": model.version,
        }
    manifest = {
        "problems": entries,
        "created": datetime.now(timezone.utc).isoformat(),
    }
    (out / MANIFEST_NAME).write_text(json.dumps(manifest, indent=2, sort_keys=True),
                                     encoding="utf-8")
    return out


def load_bundle(bundle_dir) -> ModelBundle:
    """Load all six models named by the bundle manifest.

    Raises ModelMissing for any absent problem and propagates model-file
    errors (CorruptModelFile, VersionMismatch) as-is.
    """
    root = Path(bundle_dir)
    manifest_path = root / MANIFEST_NAME
    if not manifest_path.exists():
        raise FileNotFoundError(f"no {MANIFEST_NAME} in {root}")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    entries = manifest.get("problems", {})

    models: dict[ProblemKind, Model] = {}
    for kind in ProblemKind:
        entry = entries.get(kind.value)
        if entry is None:
            raise ModelMissing(kind.value)
        model_path = root / entry["path"]
        if not model_path.exists():
            raise ModelMissing(kind.value)
        models[kind] = learners.load(model_path)
    return ModelBundle(models=models)


def forecast(draft: DraftPost, bundle: ModelBundle,
             now: datetime | None = None) -> ImpactForecast:
    """Score a draft across all six problems.

    Pure given (draft, bundle): the only clock read happens when the draft
    omits published_at, and callers can pin it with `now`.
    """
    published_at = draft.published_at or now or datetime.now()
    prep = prepare_fields(draft.text, draft.link_kind, published_at)

    predictions: dict[ProblemKind, Prediction] = {}
    for kind, model in bundle.models.items():
        state = PipelineState(vocabulary=model.vocabulary,
                              time_profile=model.time_profile,
                              normalizer=model.normalizer)
        vector = transform(prep, model.config, state)
        predictions[kind] = learners.predict(model, vector)

    words, upper, lower, digits, symbols = extract_style(draft.text)
    emojis, hashtags, mentions, links = extract_behavioral(prep.normalized)
    return ImpactForecast(
        predictions=predictions,
        model_versions=bundle.versions(),
        style_echo={"words": words, "uppercase": upper, "lowercase": lower,
                    "numerals": digits, "symbols": symbols},
        behavioral_echo={"emojis": emojis, "hashtags": hashtags,
                         "mentions": mentions, "links": links},
    )
