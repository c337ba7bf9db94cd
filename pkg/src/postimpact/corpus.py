"""Post records: ingestion, filtering, impact labeling, and corpus statistics.

The corpus file format is UTF-8 JSON Lines, one post object per line:

    {"id": "...", "brand": "...", "text": "...", "published_at": "2019-01-07T18:30:00",
     "link_kind": "image", "like": 0, "love": 0, "haha": 0, "wow": 0, "sad": 0,
     "angry": 0, "comments": 0, "shares": 0}
"""

from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from typing import Callable, Iterable, Iterator, TextIO

from .errors import DuplicateId, EmptyBrand, EmptyCorpus, MalformedRecord


class LinkKind(str, Enum):
    IMAGE = "image"
    ALBUM = "album"
    VIDEO = "video"
    OTHER = "other"
    NONE = "none"


@dataclass(frozen=True)
class ReactionCounts:
    like: int = 0
    love: int = 0
    haha: int = 0
    wow: int = 0
    sad: int = 0
    angry: int = 0

    def __post_init__(self):
        for name in ("like", "love", "haha", "wow", "sad", "angry"):
            if getattr(self, name) < 0:
                raise ValueError(f"reaction count {name} must be >= 0")

    def total(self) -> int:
        return self.like + self.love + self.haha + self.wow + self.sad + self.angry

    def positive(self) -> int:
        return self.like + self.love

    def negative(self) -> int:
        return self.sad + self.angry

    def neutral(self) -> int:
        return self.wow + self.haha


@dataclass(frozen=True)
class Post:
    id: str
    brand: str
    text: str
    published_at: datetime
    link_kind: LinkKind
    reactions: ReactionCounts
    comments: int
    shares: int

    def __post_init__(self):
        if self.comments < 0 or self.shares < 0:
            raise ValueError("comment/share counts must be >= 0")


class ProblemKind(str, Enum):
    """The six binary high/low-impact classification problems."""

    TOTAL_REACTIONS = "R"
    POSITIVE_REACTIONS = "R+"
    NEGATIVE_REACTIONS = "R-"
    NEUTRAL_REACTIONS = "R0"
    COMMENTS = "C"
    SHARES = "S"

    def metric(self, post: Post) -> int:
        """The integer engagement count this problem predicts for a post."""
        if self is ProblemKind.TOTAL_REACTIONS:
            return post.reactions.total()
        if self is ProblemKind.POSITIVE_REACTIONS:
            return post.reactions.positive()
        if self is ProblemKind.NEGATIVE_REACTIONS:
            return post.reactions.negative()
        if self is ProblemKind.NEUTRAL_REACTIONS:
            return post.reactions.neutral()
        if self is ProblemKind.COMMENTS:
            return post.comments
        return post.shares


class Impact(str, Enum):
    HIGH = "high"
    LOW = "low"


@dataclass(frozen=True)
class LabeledPost:
    post: Post
    labels: dict[ProblemKind, Impact]

    def __post_init__(self):
        if set(self.labels) != set(ProblemKind):
            raise ValueError("labels must contain exactly one entry per problem")


class FilterReason(str, Enum):
    NO_TEXT = "no_text"
    NO_REACTIONS = "no_reactions"
    ONLY_LIKE = "only_like"


@dataclass
class BrandStats:
    brand: str
    post_count: int
    token_count: int
    vocabulary_size: int
    lexical_richness: float
    avg_tokens_per_post: float
    std_tokens_per_post: float
    avg_chars_per_post: float
    std_chars_per_post: float


@dataclass
class CorpusStats:
    """Per-brand totals and per-post averages (population standard deviation)."""

    brands: dict[str, BrandStats] = field(default_factory=dict)


REQUIRED_FIELDS = (
    "id", "brand", "text", "published_at", "link_kind",
    "like", "love", "haha", "wow", "sad", "angry", "comments", "shares",
)

_COUNT_FIELDS = ("like", "love", "haha", "wow", "sad", "angry", "comments", "shares")


def _parse_record(obj: dict, line: int) -> Post:
    missing = [f for f in REQUIRED_FIELDS if f not in obj]
    if missing:
        raise MalformedRecord(line, f"missing field(s): {', '.join(missing)}")

    for f in _COUNT_FIELDS:
        v = obj[f]
        if not isinstance(v, int) or isinstance(v, bool) or v < 0:
            raise MalformedRecord(line, f"field {f!r} must be a non-negative integer")

    try:
        published_at = datetime.fromisoformat(str(obj["published_at"]))
    except ValueError:
        raise MalformedRecord(line, f"published_at {obj['published_at']!r} is not ISO-8601")

    try:
        link_kind = LinkKind(obj["link_kind"])
    except ValueError:
        raise MalformedRecord(
            line,
            f"link_kind {obj['link_kind']!r} not one of "
            f"{[k.value for k in LinkKind]}",
        )

    return Post(
        id=str(obj["id"]),
        brand=str(obj["brand"]),
        text=str(obj["text"]),
        published_at=published_at,
        link_kind=link_kind,
        reactions=ReactionCounts(
            like=obj["like"], love=obj["love"], haha=obj["haha"],
            wow=obj["wow"], sad=obj["sad"], angry=obj["angry"],
        ),
        comments=obj["comments"],
        shares=obj["shares"],
    )


def ingest(source: Iterable[str] | TextIO) -> list[Post]:
    """Parse a JSONL record stream into posts.

    Raises MalformedRecord (with the 1-based line number) on the first bad
    record and DuplicateId if an id repeats. Blank lines are skipped.
    """
    posts: list[Post] = []
    seen: set[str] = set()
    for line_no, raw in enumerate(source, start=1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise MalformedRecord(line_no, f"invalid JSON: {exc.msg}")
        if not isinstance(obj, dict):
            raise MalformedRecord(line_no, "record is not an object")
        post = _parse_record(obj, line_no)
        if post.id in seen:
            raise DuplicateId(post.id, line_no)
        seen.add(post.id)
        posts.append(post)
    return posts


def ingest_path(path) -> list[Post]:
    with open(path, "r", encoding="utf-8") as fh:
        return ingest(fh)


def post_to_record(post: Post) -> dict:
    """Inverse of ingest for one post: the JSONL object form."""
    return {
        "id": post.id,
        "brand": post.brand,
        "text": post.text,
        "published_at": post.published_at.isoformat(),
        "link_kind": post.link_kind.value,
        "like": post.reactions.like,
        "love": post.reactions.love,
        "haha": post.reactions.haha,
        "wow": post.reactions.wow,
        "sad": post.reactions.sad,
        "angry": post.reactions.angry,
        "comments": post.comments,
        "shares": post.shares,
    }


def filter_reason(post: Post) -> FilterReason | None:
    """The first removal condition a post matches, or None if it is kept."""
    if not post.text.strip():
        return FilterReason.NO_TEXT
    total = post.reactions.total()
    if total == 0:
        return FilterReason.NO_REACTIONS
    # "only like": at least one like and nothing else
    if total == post.reactions.like:
        return FilterReason.ONLY_LIKE
    return None


def filter_posts(posts: list[Post]) -> tuple[list[Post], list[tuple[Post, FilterReason]]]:
    """Drop useless posts: empty text, zero reactions, or like-only reactions.

    Returns (kept, removed) with input order preserved in both lists.
    """
    kept: list[Post] = []
    removed: list[tuple[Post, FilterReason]] = []
    for post in posts:
        reason = filter_reason(post)
        if reason is None:
            kept.append(post)
        else:
            removed.append((post, reason))
    return kept, removed


def label_posts(posts: list[Post]) -> list[LabeledPost]:
    """Assign high/low-impact labels for all six problems.

    For each problem the mean of its metric is taken over every input post
    (brands pooled); a post is HIGH iff its value is strictly greater than
    that mean. A value exactly at the mean is LOW.
    """
    if not posts:
        raise EmptyCorpus("cannot label an empty corpus")
    means = {
        kind: sum(kind.metric(p) for p in posts) / len(posts)
        for kind in ProblemKind
    }
    labeled = []
    for post in posts:
        labels = {
            kind: Impact.HIGH if kind.metric(post) > means[kind] else Impact.LOW
            for kind in ProblemKind
        }
        labeled.append(LabeledPost(post=post, labels=labels))
    return labeled


def label_counts(labeled: list[LabeledPost]) -> dict[str, dict[ProblemKind, tuple[int, int]]]:
    """Per-brand (high, low) counts for each problem."""
    counts: dict[str, dict[ProblemKind, list[int]]] = defaultdict(
        lambda: {k: [0, 0] for k in ProblemKind}
    )
    for lp in labeled:
        for kind, impact in lp.labels.items():
            counts[lp.post.brand][kind][0 if impact is Impact.HIGH else 1] += 1
    return {
        brand: {k: (hi, lo) for k, (hi, lo) in per.items()}
        for brand, per in counts.items()
    }


def compute_stats(posts: list[Post], tokenizer: Callable[[str], list[str]]) -> CorpusStats:
    """Per-brand token/vocabulary totals and per-post averages.

    `tokenizer` maps raw post text to a token list (normally the textprep
    normalize+tokenize pipeline). Standard deviations are population
    (divide by N). A brand with zero total tokens gets lexical_richness 0.
    """
    if not posts:
        raise EmptyCorpus("cannot compute stats for an empty corpus")

    by_brand: dict[str, list[Post]] = defaultdict(list)
    for post in posts:
        by_brand[post.brand].append(post)

    stats = CorpusStats()
    for brand, brand_posts in by_brand.items():
        if not brand_posts:
            raise EmptyBrand(brand)
        token_lists = [tokenizer(p.text) for p in brand_posts]
        token_counts = [len(ts) for ts in token_lists]
        char_counts = [len(p.text) for p in brand_posts]
        total_tokens = sum(token_counts)
        vocab = set()
        for ts in token_lists:
            vocab.update(ts)
        stats.brands[brand] = BrandStats(
            brand=brand,
            post_count=len(brand_posts),
            token_count=total_tokens,
            vocabulary_size=len(vocab),
            lexical_richness=(len(vocab) / total_tokens) if total_tokens else 0.0,
            avg_tokens_per_post=_mean(token_counts),
            std_tokens_per_post=_pstd(token_counts),
            avg_chars_per_post=_mean(char_counts),
            std_chars_per_post=_pstd(char_counts),
        )
    return stats


def _mean(values: list[int]) -> float:
    return sum(values) / len(values)


def _pstd(values: list[int]) -> float:
    m = _mean(values)
    return math.sqrt(sum((v - m) ** 2 for v in values) / len(values))


def iter_labeled_records(labeled: list[LabeledPost]) -> Iterator[dict]:
    """JSONL object form of labeled posts (`labels` keyed by problem token)."""
    for lp in labeled:
        rec = post_to_record(lp.post)
        rec["labels"] = {k.value: v.value for k, v in lp.labels.items()}
        yield rec


def read_labeled(path) -> list[LabeledPost]:
    """Load a labeled corpus written by `iter_labeled_records`."""
    labeled = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            obj = json.loads(raw)
            label_map = obj.pop("labels", None)
            if label_map is None:
                raise MalformedRecord(line_no, "missing field(s): labels")
            post = _parse_record(obj, line_no)
            labels = {ProblemKind(k): Impact(v) for k, v in label_map.items()}
            labeled.append(LabeledPost(post=post, labels=labels))
    return labeled
