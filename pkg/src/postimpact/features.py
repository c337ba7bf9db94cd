"""Feature extraction: turn a post into a sparse numeric vector.

Five feature blocks in fixed order [content | behavioral | style |
interaction | time], restricted to the enabled set of a FeatureConfig.
Vocabulary, time profile, and min-max normalizer are fitted on training
data only and travel with a trained model.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse

from .corpus import LinkKind, Post
from .errors import MissingTimeProfile, MissingVocabulary
from .textprep import NormalizedText, normalize, tokenize


class FeatureType(str, Enum):
    CONTENT = "c"
    BEHAVIORAL = "b"
    STYLE = "s"
    INTERACTION = "i"
    TIME = "t"


BLOCK_ORDER = (
    FeatureType.CONTENT,
    FeatureType.BEHAVIORAL,
    FeatureType.STYLE,
    FeatureType.INTERACTION,
    FeatureType.TIME,
)

# Content block size is the vocabulary size; the rest are fixed.
FIXED_BLOCK_SIZES = {
    FeatureType.BEHAVIORAL: 4,
    FeatureType.STYLE: 5,
    FeatureType.INTERACTION: 4,
    FeatureType.TIME: 4,
}

DEFAULT_VOCAB_CAP = 10_000


@dataclass(frozen=True)
class FeatureConfig:
    enabled: frozenset[FeatureType]
    vocab_size_cap: int = DEFAULT_VOCAB_CAP

    def __post_init__(self):
        if not self.enabled:
            raise ValueError("feature config must enable at least one block")
        if self.vocab_size_cap < 1:
            raise ValueError("vocab_size_cap must be >= 1")

    @classmethod
    def parse(cls, spec: str, vocab_size_cap: int = DEFAULT_VOCAB_CAP) -> "FeatureConfig":
        """Parse "c,b,s" or "c+b+s" into a config."""
        parts = [p.strip() for p in spec.replace("+", ",").split(",") if p.strip()]
        return cls(enabled=frozenset(FeatureType(p) for p in parts),
                   vocab_size_cap=vocab_size_cap)

    @property
    def key(self) -> str:
        """Canonical "c+b+s" form, in fixed block order."""
        return "+".join(ft.value for ft in BLOCK_ORDER if ft in self.enabled)

    @property
    def uses_content(self) -> bool:
        return FeatureType.CONTENT in self.enabled

    @property
    def uses_time(self) -> bool:
        return FeatureType.TIME in self.enabled


@dataclass(frozen=True)
class Vocabulary:
    """The cap most frequent training tokens, ties broken lexicographically."""

    tokens: tuple[str, ...]
    frequencies: dict[str, int]
    index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "index", {t: i for i, t in enumerate(self.tokens)})

    def __len__(self) -> int:
        return len(self.tokens)


def build_vocabulary(token_streams: Iterable[Sequence[str]], cap: int) -> Vocabulary:
    """Rank tokens by total training occurrence (desc), then lexicographically
    ascending, and keep the first `cap`. Deterministic by construction."""
    if cap < 1:
        raise ValueError("cap must be >= 1")
    freq: Counter[str] = Counter()
    for stream in token_streams:
        freq.update(stream)
    ranked = sorted(freq.items(), key=lambda kv: (-kv[1], kv[0]))[:cap]
    return Vocabulary(tokens=tuple(t for t, _ in ranked),
                      frequencies={t: c for t, c in ranked})


@dataclass(frozen=True)
class TimeProfile:
    """Fraction of training posts per hour-of-day, weekday, month, and year."""

    hour: dict[int, float]
    weekday: dict[int, float]
    month: dict[int, float]
    year: dict[int, float]


def build_time_profile(timestamps: Sequence[datetime]) -> TimeProfile:
    if not timestamps:
        raise ValueError("cannot build a time profile from zero timestamps")
    n = len(timestamps)

    def frac(counter: Counter) -> dict[int, float]:
        return {bucket: count / n for bucket, count in counter.items()}

    return TimeProfile(
        hour=frac(Counter(ts.hour for ts in timestamps)),
        weekday=frac(Counter(ts.weekday() for ts in timestamps)),
        month=frac(Counter(ts.month for ts in timestamps)),
        year=frac(Counter(ts.year for ts in timestamps)),
    )


@dataclass(frozen=True)
class Normalizer:
    """Per-dimension training (min, max) for min-max scaling into [0, 1]."""

    mins: np.ndarray
    maxs: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.mins)


@dataclass(frozen=True)
class FeatureVector:
    """Sparse vector: parallel (indices, values) arrays over `dim` dimensions."""

    dim: int
    indices: np.ndarray  # int32, strictly increasing
    values: np.ndarray   # float64

    @classmethod
    def from_pairs(cls, dim: int, pairs: dict[int, float]) -> "FeatureVector":
        items = sorted((i, v) for i, v in pairs.items() if v != 0.0)
        idx = np.fromiter((i for i, _ in items), dtype=np.int32, count=len(items))
        vals = np.fromiter((v for _, v in items), dtype=np.float64, count=len(items))
        return cls(dim=dim, indices=idx, values=vals)

    def to_dense(self) -> np.ndarray:
        dense = np.zeros(self.dim, dtype=np.float64)
        dense[self.indices] = self.values
        return dense

    def to_dict(self) -> dict[int, float]:
        return {int(i): float(v) for i, v in zip(self.indices, self.values)}


def stack(vectors: Sequence[FeatureVector]) -> sparse.csr_matrix:
    """Stack sparse vectors into one CSR matrix (rows in input order)."""
    if not vectors:
        raise ValueError("cannot stack zero vectors")
    dim = vectors[0].dim
    indptr = np.zeros(len(vectors) + 1, dtype=np.int64)
    for row, v in enumerate(vectors):
        if v.dim != dim:
            raise ValueError("vectors differ in dimensionality")
        indptr[row + 1] = indptr[row] + len(v.indices)
    indices = np.concatenate([v.indices for v in vectors]) if vectors else np.array([])
    data = np.concatenate([v.values for v in vectors]) if vectors else np.array([])
    return sparse.csr_matrix((data, indices, indptr), shape=(len(vectors), dim))


# --- block extractors -------------------------------------------------------

def extract_style(raw_text: str) -> tuple[int, int, int, int, int]:
    """[word_count, uppercase, lowercase, numerals, symbols] on the raw text.

    Words are whitespace-separated chunks; symbols are characters that are
    neither letters, digits, nor whitespace.
    """
    words = len(raw_text.split())
    upper = lower = digits = symbols = 0
    for ch in raw_text:
        if ch.isalpha():
            if ch.isupper():
                upper += 1
            elif ch.islower():
                lower += 1
        elif ch.isdigit():
            digits += 1
        elif not ch.isspace():
            symbols += 1
    return (words, upper, lower, digits, symbols)


def extract_behavioral(normalized: NormalizedText) -> tuple[int, int, int, int]:
    """[emojis, hashtags, mentions, links] read off the normalization tags."""
    c = normalized.counts
    return (c.emojis, c.hashtags, c.mentions, c.urls)


_INTERACTION_SLOT = {
    LinkKind.IMAGE: 0,
    LinkKind.ALBUM: 1,
    LinkKind.VIDEO: 2,
    LinkKind.OTHER: 3,
}


def extract_interaction(link_kind: LinkKind) -> tuple[int, int, int, int]:
    """One-hot [images, albums, videos, other]; `none` maps to all zeros."""
    counts = [0, 0, 0, 0]
    slot = _INTERACTION_SLOT.get(link_kind)
    if slot is not None:
        counts[slot] = 1
    return tuple(counts)


def extract_time(published_at: datetime, profile: TimeProfile) -> tuple[float, float, float, float]:
    """Fractions of training posts sharing the post's hour/weekday/month/year
    buckets; an unseen bucket yields 0."""
    return (
        profile.hour.get(published_at.hour, 0.0),
        profile.weekday.get(published_at.weekday(), 0.0),
        profile.month.get(published_at.month, 0.0),
        profile.year.get(published_at.year, 0.0),
    )


# --- vector assembly --------------------------------------------------------

@dataclass(frozen=True)
class PreparedPost:
    """Text preprocessing done once per post, reusable across configs/folds."""

    raw_text: str
    normalized: NormalizedText
    tokens: tuple[str, ...]
    token_counts: Counter
    link_kind: LinkKind
    published_at: datetime


def prepare_fields(text: str, link_kind: LinkKind, published_at: datetime) -> PreparedPost:
    norm = normalize(text)
    tokens = tokenize(norm).tokens
    return PreparedPost(
        raw_text=text,
        normalized=norm,
        tokens=tokens,
        token_counts=Counter(tokens),
        link_kind=link_kind,
        published_at=published_at,
    )


def prepare_post(post: Post) -> PreparedPost:
    return prepare_fields(post.text, post.link_kind, post.published_at)


def block_sizes(config: FeatureConfig, vocabulary: Vocabulary | None) -> dict[FeatureType, int]:
    sizes = {}
    for ft in BLOCK_ORDER:
        if ft not in config.enabled:
            continue
        if ft is FeatureType.CONTENT:
            if vocabulary is None:
                raise MissingVocabulary("content block enabled but no vocabulary fitted")
            sizes[ft] = len(vocabulary)
        else:
            sizes[ft] = FIXED_BLOCK_SIZES[ft]
    return sizes


def dimensionality(config: FeatureConfig, vocabulary: Vocabulary | None) -> int:
    return sum(block_sizes(config, vocabulary).values())


def vectorize_prepared(
    prep: PreparedPost,
    config: FeatureConfig,
    vocabulary: Vocabulary | None = None,
    profile: TimeProfile | None = None,
) -> FeatureVector:
    """Raw (pre-normalization) feature vector for a prepared post."""
    sizes = block_sizes(config, vocabulary)
    if config.uses_time and profile is None:
        raise MissingTimeProfile("time block enabled but no time profile fitted")

    pairs: dict[int, float] = {}
    offset = 0
    for ft in BLOCK_ORDER:
        if ft not in sizes:
            continue
        if ft is FeatureType.CONTENT:
            index = vocabulary.index
            for token, count in prep.token_counts.items():
                pos = index.get(token)
                if pos is not None:
                    pairs[offset + pos] = float(count)
        elif ft is FeatureType.BEHAVIORAL:
            for j, v in enumerate(extract_behavioral(prep.normalized)):
                if v:
                    pairs[offset + j] = float(v)
        elif ft is FeatureType.STYLE:
            for j, v in enumerate(extract_style(prep.raw_text)):
                if v:
                    pairs[offset + j] = float(v)
        elif ft is FeatureType.INTERACTION:
            for j, v in enumerate(extract_interaction(prep.link_kind)):
                if v:
                    pairs[offset + j] = float(v)
        else:
            for j, v in enumerate(extract_time(prep.published_at, profile)):
                if v:
                    pairs[offset + j] = float(v)
        offset += sizes[ft]

    return FeatureVector.from_pairs(dim=offset, pairs=pairs)


def vectorize(
    post: Post,
    config: FeatureConfig,
    vocabulary: Vocabulary | None = None,
    profile: TimeProfile | None = None,
) -> FeatureVector:
    return vectorize_prepared(prepare_post(post), config, vocabulary, profile)


@dataclass(frozen=True)
class PipelineState:
    """Everything fitted on training data that a model needs at predict time."""

    vocabulary: Vocabulary | None
    time_profile: TimeProfile | None
    normalizer: Normalizer


def fit_pipeline(prepared: Sequence[PreparedPost], config: FeatureConfig,
                 ) -> tuple[PipelineState, list[FeatureVector]]:
    """Fit vocabulary/time profile/normalizer on `prepared` (training data
    only) and return the state plus the normalized training vectors."""
    vocabulary = None
    if config.uses_content:
        vocabulary = build_vocabulary((p.tokens for p in prepared), config.vocab_size_cap)
    profile = None
    if config.uses_time:
        profile = build_time_profile([p.published_at for p in prepared])
    raw = [vectorize_prepared(p, config, vocabulary, profile) for p in prepared]
    normalizer = fit_normalizer(raw)
    state = PipelineState(vocabulary=vocabulary, time_profile=profile,
                          normalizer=normalizer)
    return state, [apply_normalizer(v, normalizer) for v in raw]


def transform(prep: PreparedPost, config: FeatureConfig,
              state: PipelineState) -> FeatureVector:
    """Vectorize one post under an already-fitted pipeline state."""
    raw = vectorize_prepared(prep, config, state.vocabulary, state.time_profile)
    return apply_normalizer(raw, state.normalizer)


def fit_normalizer(training_vectors: Sequence[FeatureVector]) -> Normalizer:
    """Per-dimension (min, max) over the training vectors, counting implicit
    zeros of the sparse representation."""
    matrix = stack(training_vectors)
    mins = np.asarray(matrix.min(axis=0).todense()).ravel()
    maxs = np.asarray(matrix.max(axis=0).todense()).ravel()
    return Normalizer(mins=mins, maxs=maxs)


def apply_normalizer(vector: FeatureVector, normalizer: Normalizer) -> FeatureVector:
    """Min-max scale into [0, 1]: (v - min) / (max - min), degenerate
    dimensions (min == max) collapse to 0, out-of-range values clamp.

    All extractors emit non-negative values, so implicit zeros scale to
    <= 0 and clamp back to 0; only stored entries need transforming.
    """
    if vector.dim != normalizer.dim:
        raise ValueError(f"vector dim {vector.dim} != normalizer dim {normalizer.dim}")
    if len(vector.indices) == 0:
        return vector
    mins = normalizer.mins[vector.indices]
    maxs = normalizer.maxs[vector.indices]
    span = maxs - mins
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = np.where(span > 0, (vector.values - mins) / span, 0.0)
    scaled = np.clip(scaled, 0.0, 1.0)
    keep = scaled != 0.0
    return FeatureVector(dim=vector.dim,
                         indices=vector.indices[keep],
                         values=scaled[keep])
