"""Text normalization (url/hashtag/emoji/mention tags) and tokenization.

Normalization collapses variable surface forms into four canonical tags:
`<url>`, `<hashtag>`, `<emoji>`, `<mentions>`. Tokenization lowercases and
splits on whitespace/punctuation, keeping the four tags intact as single
tokens. Case-sensitive style counting always happens on the raw text, so
lowercasing is deferred to tokenization.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

URL_TAG = "<url>"
HASHTAG_TAG = "<hashtag>"
EMOJI_TAG = "<emoji>"
MENTION_TAG = "<mentions>"

TAGS = (URL_TAG, HASHTAG_TAG, EMOJI_TAG, MENTION_TAG)

# Scheme-prefixed and bare-www URLs, greedy to the next whitespace.
_URL_RE = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)

# '#'/'@' followed by at least one word character (letter, digit, underscore).
_HASHTAG_RE = re.compile(r"#\w+")
_MENTION_RE = re.compile(r"@\w+")

# Emoji approximation: the Emoticons, Misc Symbols & Pictographs,
# Transport & Map, and Supplemental Symbols & Pictographs blocks, plus
# regional indicators (paired into flags where possible). Trailing
# variation selectors belong to the preceding emoji.
_EMOJI_BASE = (
    "\U0001F300-\U0001F5FF"
    "\U0001F600-\U0001F64F"
    "\U0001F680-\U0001F6FF"
    "\U0001F900-\U0001F9FF"
)
_REGIONAL = "\U0001F1E6-\U0001F1FF"
_EMOJI_RE = re.compile(
    f"(?:[{_REGIONAL}]{{2}}|[{_REGIONAL}]|[{_EMOJI_BASE}])[︀-️]*"
)

_TOKEN_RE = re.compile(r"<url>|<hashtag>|<emoji>|<mentions>|\w+")

# Adjacent canonical tags are separated by one space ("😀😀" becomes
# "<emoji> <emoji>", not "<emoji><emoji>").
_TAG_ALT = "|".join(re.escape(t) for t in (URL_TAG, HASHTAG_TAG, EMOJI_TAG, MENTION_TAG))
_ADJACENT_TAGS_RE = re.compile(f"({_TAG_ALT})(?={_TAG_ALT})")


@dataclass(frozen=True)
class TagCounts:
    urls: int = 0
    hashtags: int = 0
    emojis: int = 0
    mentions: int = 0


@dataclass(frozen=True)
class NormalizedText:
    text: str
    counts: TagCounts


@dataclass(frozen=True)
class TokenStream:
    tokens: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.tokens)


def normalize(text: str) -> NormalizedText:
    """Replace every URL, hashtag, mention, and emoji with its canonical tag.

    Counts report tag occurrences in the returned text, so normalizing an
    already-normalized text reproduces it exactly (idempotence).
    """
    out = _URL_RE.sub(URL_TAG, text)
    out = _HASHTAG_RE.sub(HASHTAG_TAG, out)
    out = _MENTION_RE.sub(MENTION_TAG, out)
    out = _EMOJI_RE.sub(EMOJI_TAG, out)
    out = _ADJACENT_TAGS_RE.sub(r"\1 ", out)
    counts = TagCounts(
        urls=out.count(URL_TAG),
        hashtags=out.count(HASHTAG_TAG),
        emojis=out.count(EMOJI_TAG),
        mentions=out.count(MENTION_TAG),
    )
    return NormalizedText(text=out, counts=counts)


def tokenize(normalized: NormalizedText) -> TokenStream:
    """Lowercased word tokens; canonical tags survive as single tokens.

    Punctuation acts as a boundary and is dropped (style features count it
    separately, on the raw text).
    """
    return TokenStream(tokens=tuple(_TOKEN_RE.findall(normalized.text.lower())))


def pipeline_tokens(raw_text: str) -> list[str]:
    """normalize + tokenize in one call; the corpus-wide default tokenizer."""
    return list(tokenize(normalize(raw_text)).tokens)
