"""Tweet tokenization, distant labeling, lexicons, vocabularies and context windows."""
from __future__ import annotations

import logging
import re
import string
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

logger = logging.getLogger(__name__)

POSITIVE = 0
NEGATIVE = 1
LABEL_NAMES = {POSITIVE: "positive", NEGATIVE: "negative"}

UNK = "<unk>"
USER = "<user>"
URL = "<url>"
SPECIAL = {UNK, USER, URL}

DEFAULT_MARKERS = {
    POSITIVE: ["#happy", "#joy", "#happyness", ":)", ":-)", ": )", ":D"],
    NEGATIVE: ["#sadness", "#angry", "#frustrated", ":(", ":-(", ": ("],
}

_PUNCT = set(string.punctuation)
_EMOTICON = re.compile(r"^(?:[:;=][-o^']?[)(\]\[dDpP/\\|*@3oO]+|[)(\]\[dDpP/\\|]+[-o^']?[:;=]|<3+|\^_?\^)$")
_HASHTAG = re.compile(r"^#\w+$")
_URL_PREFIX = ("http://", "https://", "www.")
# second half of an emoticon typed with an inner space, e.g. ": )"
_EMOTICON_MOUTH = re.compile(r"^[-o^']?[)(\]\[]+$")


class CorpusError(ValueError):
    pass


def _is_punct(tok: str) -> bool:
    return all(c in _PUNCT for c in tok)


def _split_token(raw: str) -> list[str]:
    if raw in SPECIAL or _EMOTICON.match(raw):
        return [raw]
    low = raw.lower()
    if low.startswith(_URL_PREFIX):
        return [URL]
    if low.startswith("@") and len(low) > 1:
        return [USER]
    if _is_punct(raw):
        return [raw]
    lead, trail = [], []
    start, end = 0, len(raw)
    while start < end and raw[start] in _PUNCT and raw[start] != "#":
        lead.append(raw[start])
        start += 1
    while end > start and raw[end - 1] in _PUNCT:
        trail.append(raw[end - 1])
        end -= 1
    core = raw[start:end]
    # "#" alone at the front of a hashtag stays attached; a bare "#" is punctuation
    out = lead
    if core:
        core_low = core.lower()
        if core_low.startswith(_URL_PREFIX):
            out.append(URL)
        elif core_low.startswith("@") and len(core_low) > 1:
            out.append(USER)
        else:
            out.append(core_low)
    out.extend(reversed(trail))
    return out


def tokenize(text: str) -> list[str]:
    """Lowercase and split a tweet; mentions/URLs become placeholder tokens.

    Emoticons keep their case and are never split; hashtags are lowercased but
    keep their ``#``.

    >>> tokenize("I LOVE this!")
    ['i', 'love', 'this', '!']
    >>> tokenize("@bob check www.x.com :)")
    ['<user>', 'check', '<url>', ':)']
    """
    tokens: list[str] = []
    for raw in text.split():
        for tok in _split_token(raw):
            if tokens and tokens[-1] in (":", ";", "=") and _EMOTICON_MOUTH.match(tok):
                tokens[-1] += tok
            else:
                tokens.append(tok)
    return tokens


@dataclass
class MarkerSet:
    positive: frozenset
    negative: frozenset

    @classmethod
    def from_lists(cls, positive: Iterable[str], negative: Iterable[str]) -> "MarkerSet":
        def norm(ms):
            out = set()
            for m in ms:
                toks = tokenize(m)
                if len(toks) != 1:
                    raise CorpusError(f"marker {m!r} does not tokenize to a single token")
                out.add(toks[0])
            return frozenset(out)

        return cls(norm(positive), norm(negative))

    @classmethod
    def default(cls) -> "MarkerSet":
        return cls.from_lists(DEFAULT_MARKERS[POSITIVE], DEFAULT_MARKERS[NEGATIVE])

    @classmethod
    def load(cls, path) -> "MarkerSet":
        """Read ``[positive]`` / ``[negative]`` sections, one marker per line."""
        lists = {"positive": [], "negative": []}
        section = None
        try:
            lines = Path(path).read_text(encoding="utf-8").splitlines()
        except OSError as e:
            raise CorpusError(f"cannot read marker file {path}: {e}") from e
        for lineno, line in enumerate(lines, 1):
            s = line.strip()
            if not s or s.startswith(("#", ";")) and not _HASHTAG.match(s):
                continue
            if s.startswith("[") and s.endswith("]") and s[1:-1].strip().lower() in lists:
                section = s[1:-1].strip().lower()
                continue
            if section is None:
                raise CorpusError(f"{path}:{lineno}: marker outside a [positive]/[negative] section")
            lists[section].append(line.strip("\n").strip())
        return cls.from_lists(lists["positive"], lists["negative"])

    def dump(self) -> str:
        return ("[positive]\n" + "\n".join(sorted(self.positive))
                + "\n\n[negative]\n" + "\n".join(sorted(self.negative)) + "\n")


def distant_label(tokens: Sequence[str], markers: MarkerSet | None = None):
    """Label a tokenized tweet from its hashtags/emoticons.

    Returns ``(label, tokens_without_markers)`` when markers of exactly one
    polarity occur, otherwise ``None``.
    """
    markers = markers or MarkerSet.default()
    has_pos = any(t in markers.positive for t in tokens)
    has_neg = any(t in markers.negative for t in tokens)
    if has_pos == has_neg:
        return None
    every = markers.positive | markers.negative
    cleaned = [t for t in tokens if t not in every]
    return (POSITIVE if has_pos else NEGATIVE), cleaned


@dataclass
class LabeledTweet:
    tokens: list[str]
    label: int
    provenance: str = "gold"  # hashtag | emoticon | gold

    def __post_init__(self):
        if self.label not in (POSITIVE, NEGATIVE):
            raise CorpusError(f"bad label {self.label!r}")


@dataclass
class PrepareStats:
    lines: int = 0
    labeled: int = 0
    unlabeled: int = 0
    conflicts: int = 0
    duplicates: int = 0
    too_short: int = 0
    kept: int = 0
    by_label: Counter = field(default_factory=Counter)


def _provenance(tokens, markers: MarkerSet, label: int) -> str:
    marks = markers.positive if label == POSITIVE else markers.negative
    return "hashtag" if any(t in marks and t.startswith("#") for t in tokens) else "emoticon"


def dedupe_and_filter(tweets: Iterable[LabeledTweet], t: int, stats: PrepareStats | None = None):
    """Drop exact duplicate token sequences (first kept) and tweets shorter than ``t``."""
    seen = set()
    out = []
    for tw in tweets:
        key = tuple(tw.tokens)
        if key in seen:
            if stats is not None:
                stats.duplicates += 1
            continue
        seen.add(key)
        if len(tw.tokens) < t:
            if stats is not None:
                stats.too_short += 1
            continue
        out.append(tw)
    return out


def prepare(lines: Iterable[str], markers: MarkerSet | None = None, t: int = 3):
    """Raw tweet lines -> distant-labeled, deduplicated tweets plus counts."""
    markers = markers or MarkerSet.default()
    stats = PrepareStats()
    labeled = []
    for line in lines:
        stats.lines += 1
        toks = tokenize(line)
        has_pos = any(x in markers.positive for x in toks)
        has_neg = any(x in markers.negative for x in toks)
        if has_pos and has_neg:
            stats.conflicts += 1
            continue
        res = distant_label(toks, markers)
        if res is None:
            stats.unlabeled += 1
            continue
        stats.labeled += 1
        label, cleaned = res
        labeled.append(LabeledTweet(cleaned, label, _provenance(toks, markers, label)))
    kept = dedupe_and_filter(labeled, t, stats)
    stats.kept = len(kept)
    stats.by_label = Counter(LABEL_NAMES[tw.label] for tw in kept)
    return kept, stats


class Vocabulary:
    """Word <-> id map with id 0 reserved for unknown words."""

    def __init__(self, words: Sequence[str], counts: Sequence[int] | None = None):
        words = list(words)
        if not words or words[0] != UNK:
            words = [UNK] + [w for w in words if w != UNK]
            if counts is not None:
                counts = [0] + list(counts)
        self.itos = words
        self.stoi = {w: i for i, w in enumerate(words)}
        if len(self.stoi) != len(words):
            raise CorpusError("duplicate word in vocabulary")
        self.counts = list(counts) if counts is not None else [0] * len(words)

    def __len__(self):
        return len(self.itos)

    def __contains__(self, word):
        return word in self.stoi and word != UNK

    def id(self, word: str) -> int:
        return self.stoi.get(word, 0)

    def word(self, idx: int) -> str:
        return self.itos[idx]

    def encode(self, tokens: Sequence[str]) -> np.ndarray:
        return np.array([self.stoi.get(w, 0) for w in tokens], dtype=np.int64)

    def __eq__(self, other):
        return isinstance(other, Vocabulary) and self.itos == other.itos


def build_vocab(tweets: Iterable, min_count: int = 1) -> Vocabulary:
    """Ids ordered by descending frequency, ties lexicographic; rare words map to UNK."""
    freq = Counter()
    for tw in tweets:
        freq.update(tw.tokens if isinstance(tw, LabeledTweet) else tw)
    freq.pop(UNK, None)
    if not freq:
        raise CorpusError("cannot build a vocabulary from an empty corpus")
    kept = sorted((w for w, c in freq.items() if c >= min_count), key=lambda w: (-freq[w], w))
    return Vocabulary([UNK] + kept, [0] + [freq[w] for w in kept])


class SentimentLexicon(dict):
    """word -> POSITIVE/NEGATIVE; ``conflicts`` counts words listed under both."""

    conflicts: int = 0

    def label_array(self, vocab: Vocabulary) -> np.ndarray:
        """Per vocabulary id: polarity, or -1 for non-lexicon words (and UNK)."""
        out = np.full(len(vocab), -1, dtype=np.int64)
        for w, pol in self.items():
            i = vocab.stoi.get(w)
            if i:
                out[i] = pol
        return out


def _read_word_list(path) -> list[str]:
    try:
        text = Path(path).read_bytes().decode("utf-8", errors="replace")
    except OSError as e:
        raise CorpusError(f"cannot read lexicon file {path}: {e}") from e
    words = []
    for line in text.splitlines():
        s = line.strip()
        if s and not s.startswith(";"):
            words.append(s.lower())
    return words


def load_lexicon(positive_path, negative_path) -> SentimentLexicon:
    """Read a pair of Hu-Liu style word lists (``;`` starts a comment line)."""
    pos = set(_read_word_list(positive_path))
    neg = set(_read_word_list(negative_path))
    both = pos & neg
    lex = SentimentLexicon()
    for w in sorted(pos - both):
        lex[w] = POSITIVE
    for w in sorted(neg - both):
        lex[w] = NEGATIVE
    lex.conflicts = len(both)
    if both:
        logger.info("lexicon: dropped %d words listed with both polarities", len(both))
    if not lex:
        logger.warning("lexicon is empty (%s, %s)", positive_path, negative_path)
    return lex


@dataclass(frozen=True)
class ContextWindow:
    ids: tuple
    tweet_index: int = -1

    @property
    def center(self) -> int:
        return len(self.ids) // 2


def extract_windows(ids: Sequence[int], t: int) -> np.ndarray:
    """All full windows of width ``t`` over ``ids`` as an (n, t) array; no padding."""
    if t < 1 or t % 2 == 0:
        raise ValueError(f"window size must be odd and >= 1, got {t}")
    arr = np.asarray(ids, dtype=np.int64)
    if len(arr) < t:
        return np.empty((0, t), dtype=np.int64)
    return np.lib.stride_tricks.sliding_window_view(arr, t).copy()


def corrupt_centers(centers: np.ndarray, vocab_size: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform replacement for each center id among non-UNK ids other than itself."""
    centers = np.asarray(centers, dtype=np.int64)
    if vocab_size < 3:
        # only one real word (or none): no valid different replacement
        raise CorpusError("corruption needs at least two non-UNK words")
    draw = rng.integers(1, vocab_size - 1, size=centers.shape)
    # shift past the original so it is never chosen; UNK centers use the full range
    shift = (centers >= 1) & (draw >= centers)
    draw = draw + shift
    unk = centers < 1
    if unk.any():
        draw[unk] = rng.integers(1, vocab_size, size=int(unk.sum()))
    return draw


def corrupt_window(window: Sequence[int], vocab_size: int, rng: np.random.Generator) -> np.ndarray:
    w = np.array(window, dtype=np.int64)
    c = len(w) // 2
    w[c] = corrupt_centers(w[c:c + 1], vocab_size, rng)[0]
    return w


def read_labeled(path) -> list[LabeledTweet]:
    """Read ``label<TAB>text`` lines (label 0 = positive, 1 = negative)."""
    out = []
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise CorpusError(f"cannot read {path}: {e}") from e
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        lab, sep, text = line.partition("\t")
        if not sep or lab.strip() not in ("0", "1"):
            raise CorpusError(f"{path}:{lineno}: expected 'label<TAB>text' with label 0 or 1")
        out.append(LabeledTweet(tokenize(text), int(lab), "gold"))
    return out


def write_labeled(tweets: Iterable[LabeledTweet], path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for tw in tweets:
            f.write(f"{tw.label}\t{' '.join(tw.tokens)}\n")
