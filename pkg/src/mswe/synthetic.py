"""Self-contained synthetic tweet corpus with a planted sentiment lexicon.

Each tweet mixes neutral filler words with one to three planted polarity
words; its clean label is the majority polarity of those words. A distant
marker (hashtag or emoticon) agreeing with the clean label is appended, except
for a ``noise`` fraction of tweets whose marker is flipped. Clean labels play
the role of gold annotation, marker labels the role of distant supervision.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import nn
from .corpus import (DEFAULT_MARKERS, NEGATIVE, POSITIVE, LabeledTweet, SentimentLexicon,
                     tokenize)


@dataclass
class SyntheticCorpus:
    lines: list            # raw text, marker included
    tweets: list           # LabeledTweet with the (noisy) distant label, marker removed
    gold: list             # clean labels, aligned with tweets
    positive_words: list
    negative_words: list
    neutral_words: list

    def lexicon(self) -> SentimentLexicon:
        lex = SentimentLexicon()
        for w in self.positive_words:
            lex[w] = POSITIVE
        for w in self.negative_words:
            lex[w] = NEGATIVE
        return lex

    def gold_tweets(self, idx=None) -> list:
        idx = range(len(self.tweets)) if idx is None else idx
        return [LabeledTweet(list(self.tweets[i].tokens), self.gold[i], "gold") for i in idx]

    def split(self, n_dev: int, n_test: int):
        """(train distant tweets, dev gold tweets, test gold tweets); order-preserving."""
        n = len(self.tweets)
        tr = self.tweets[: n - n_dev - n_test]
        dev = self.gold_tweets(range(n - n_dev - n_test, n - n_test))
        test = self.gold_tweets(range(n - n_test, n))
        return tr, dev, test


def _words(prefix: str, n: int) -> list:
    return [f"{prefix}{i:02d}" for i in range(n)]


def make_corpus(n_tweets: int = 2000, n_lexicon: int = 40, n_neutral: int = 60,
                noise: float = 0.1, min_len: int = 6, max_len: int = 12,
                mixed_rate: float = 0.3, seed: int = 0) -> SyntheticCorpus:
    """Generate ``n_tweets`` distinct tweets. ``n_lexicon`` is split evenly by polarity."""
    rng = nn.make_rng(seed)
    pos = _words("good", n_lexicon // 2)
    neg = _words("bad", n_lexicon - n_lexicon // 2)
    neutral = _words("w", n_neutral)
    markers = {lab: [m for m in DEFAULT_MARKERS[lab] if " " not in m] for lab in (POSITIVE, NEGATIVE)}

    lines, tweets, gold, seen = [], [], [], set()
    while len(tweets) < n_tweets:
        label = int(rng.integers(2))
        k = int(rng.integers(1, 4))
        polar = [label] * k
        if k == 3 and rng.random() < mixed_rate:
            polar[int(rng.integers(3))] = 1 - label
        length = int(rng.integers(min_len, max_len + 1))
        toks = [neutral[i] for i in rng.integers(len(neutral), size=length)]
        slots = rng.choice(length, size=k, replace=False)
        for s, p in zip(slots, polar):
            pool = pos if p == POSITIVE else neg
            toks[s] = pool[int(rng.integers(len(pool)))]
        clean = POSITIVE if polar.count(POSITIVE) > polar.count(NEGATIVE) else NEGATIVE
        distant = 1 - clean if rng.random() < noise else clean
        marker = markers[distant][int(rng.integers(len(markers[distant])))]
        key = tuple(toks)
        if key in seen:
            continue
        seen.add(key)
        lines.append(" ".join(toks) + " " + marker)
        prov = "hashtag" if marker.startswith("#") else "emoticon"
        tweets.append(LabeledTweet(tokenize(" ".join(toks)), distant, prov))
        gold.append(clean)
    return SyntheticCorpus(lines, tweets, gold, pos, neg, neutral)


def write_bundle(corpus: SyntheticCorpus, out_dir, n_dev: int = 200, n_test: int = 200) -> dict:
    """Write raw corpus, lexicon files and gold splits; returns the written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    n = len(corpus.lines)
    n_train = n - n_dev - n_test
    paths = {
        "raw": out / "raw.txt", "lexicon_pos": out / "lexicon-pos.txt",
        "lexicon_neg": out / "lexicon-neg.txt", "train_data": out / "train.tsv",
        "dev_data": out / "dev.tsv", "test_data": out / "test.tsv",
    }
    paths["raw"].write_text("\n".join(corpus.lines[:n_train]) + "\n", encoding="utf-8")
    header = "; synthetic planted lexicon\n"
    paths["lexicon_pos"].write_text(header + "\n".join(corpus.positive_words) + "\n", encoding="utf-8")
    paths["lexicon_neg"].write_text(header + "\n".join(corpus.negative_words) + "\n", encoding="utf-8")
    splits = {"train_data": range(0, n_train), "dev_data": range(n_train, n - n_test),
              "test_data": range(n - n_test, n)}
    for key, idx in splits.items():
        with open(paths[key], "w", encoding="utf-8") as f:
            for i in idx:
                f.write(f"{corpus.gold[i]}\t{' '.join(corpus.tweets[i].tokens)}\n")
    return {k: str(v) for k, v in paths.items()}
