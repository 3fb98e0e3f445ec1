"""Macro-F1, stratified folds, the end-to-end pipeline and the beta sweep."""
from __future__ import annotations

import csv
import dataclasses
import io
import logging
from dataclasses import dataclass, field

import numpy as np

from . import nn
from .classifier import ClassifierConfig, predict, train_classifier
from .corpus import NEGATIVE, POSITIVE, LabeledTweet, SentimentLexicon, build_vocab
from .trainer import TrainConfig, TrainingError, train

logger = logging.getLogger(__name__)

SWEEP_HEADER = ("beta", "seed", "macro_f1")
DEFAULT_BETAS = (0.0, 0.2, 0.4, 0.5, 0.6, 0.8, 1.0)


@dataclass
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0


def confusion(gold, pred) -> dict:
    """One-vs-rest counts for each class, keyed by label."""
    gold = np.asarray(gold)
    pred = np.asarray(pred)
    if gold.shape != pred.shape:
        raise ValueError(f"gold and predictions differ in length: {len(gold)} vs {len(pred)}")
    if len(gold) == 0:
        raise ValueError("need at least one item")
    out = {}
    for c in (POSITIVE, NEGATIVE):
        out[c] = ConfusionCounts(
            tp=int(((gold == c) & (pred == c)).sum()),
            fp=int(((gold != c) & (pred == c)).sum()),
            fn=int(((gold == c) & (pred != c)).sum()),
            tn=int(((gold != c) & (pred != c)).sum()),
        )
    return out


def macro_f1(gold, pred) -> float:
    counts = confusion(gold, pred)
    return (counts[POSITIVE].f1 + counts[NEGATIVE].f1) / 2


def kfold_split(labels, k: int, seed: int = 0):
    """Stratified k-fold: list of ``(train_idx, test_idx)`` pairs.

    Items of each class are shuffled and dealt round-robin, so per-class fold
    sizes differ by at most one.
    """
    labels = np.asarray(labels)
    if k < 2:
        raise ValueError("k must be >= 2")
    if len(labels) < k:
        raise ValueError(f"dataset of {len(labels)} items cannot be split into {k} folds")
    rng = nn.make_rng(seed)
    folds = [[] for _ in range(k)]
    for c in np.unique(labels):
        members = np.flatnonzero(labels == c)
        if len(members) < k:
            raise ValueError(f"class {c} has {len(members)} members, fewer than k={k}")
        members = members[rng.permutation(len(members))]
        for j, i in enumerate(members):
            folds[j % k].append(int(i))
    everything = np.arange(len(labels))
    out = []
    for f in folds:
        test = np.sort(np.array(f, dtype=np.int64))
        out.append((np.setdiff1d(everything, test), test))
    return out


@dataclass
class PipelineResult:
    macro_f1: float
    params: object
    vocab: object
    report: object
    classifier: object
    history: list = field(default_factory=list)


def run_pipeline(corpus: list[LabeledTweet], lexicon: SentimentLexicon,
                 clf_train: list[LabeledTweet], eval_set: list[LabeledTweet],
                 train_config: TrainConfig, clf_config: ClassifierConfig) -> PipelineResult:
    """Train embeddings, train the classifier on them, score macro-F1 on ``eval_set``."""
    vocab = build_vocab(corpus, train_config.min_count)
    params, report = train(corpus, vocab, lexicon, train_config)
    seqs = [vocab.encode(tw.tokens) for tw in clf_train]
    clf, hist = train_classifier(seqs, [tw.label for tw in clf_train], params.embeddings, clf_config)
    pred = predict([vocab.encode(tw.tokens) for tw in eval_set], params.embeddings, clf)
    f1 = macro_f1([tw.label for tw in eval_set], pred)
    return PipelineResult(f1, params, vocab, report, clf, hist)


@dataclass
class SweepResult:
    rows: list = field(default_factory=list)  # (beta, seed, macro_f1)

    def best(self):
        return max(self.rows, key=lambda r: (r[2], -r[0]))

    def score(self, beta: float, seed: int | None = None) -> float:
        vals = [r[2] for r in self.rows if r[0] == beta and (seed is None or r[1] == seed)]
        if not vals:
            raise KeyError(beta)
        return float(np.mean(vals))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SWEEP_HEADER)
        for beta, seed, f1 in self.rows:
            w.writerow((repr(float(beta)), int(seed), repr(float(f1))))
        return buf.getvalue()

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(self.to_csv())


def sweep_beta(corpus, lexicon, clf_train, dev_set, betas, train_config: TrainConfig,
               clf_config: ClassifierConfig, seeds=None) -> SweepResult:
    """Full pipeline once per (beta, seed); every other setting is shared."""
    betas = sorted(float(b) for b in betas)
    if any(not 0.0 <= b <= 1.0 for b in betas):
        raise ValueError(f"betas must lie in [0, 1]: {betas}")
    if len(set(betas)) != len(betas):
        raise ValueError("duplicate beta values")
    seeds = [train_config.seed] if seeds is None else list(seeds)
    result = SweepResult()
    for beta in betas:
        for seed in seeds:
            cfg = dataclasses.replace(train_config, beta=beta, seed=seed)
            try:
                res = run_pipeline(corpus, lexicon, clf_train, dev_set, cfg, clf_config)
            except TrainingError as e:
                raise TrainingError(f"beta={beta}: {e}") from e
            logger.info("beta=%g seed=%d macro_f1=%.4f", beta, seed, res.macro_f1)
            result.rows.append((beta, seed, res.macro_f1))
    return result


def check_sweep_csv(text: str) -> list:
    """Validate sweep CSV text for plotting; returns the parsed rows.

    Requires the exact header, numeric fields, betas in [0, 1] that are
    non-decreasing, and macro-F1 in [0, 1].
    """
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != SWEEP_HEADER:
        raise ValueError(f"sweep CSV must start with header {','.join(SWEEP_HEADER)}")
    out = []
    prev = -1.0
    for i, r in enumerate(rows[1:], 2):
        if len(r) != 3:
            raise ValueError(f"line {i}: expected 3 fields")
        beta, seed, f1 = float(r[0]), int(r[1]), float(r[2])
        if not 0 <= beta <= 1 or not 0 <= f1 <= 1:
            raise ValueError(f"line {i}: value out of range")
        if beta < prev:
            raise ValueError(f"line {i}: betas not in increasing order")
        prev = beta
        out.append((beta, seed, f1))
    return out


def summary_table(rows) -> str:
    """Fixed-width (model, dataset, macro-F1) table; F1 shown in percent."""
    lines = [f"{'Model':<24}{'Dataset':<16}{'Macro-F1':>10}", "-" * 50]
    for model, dataset, f1 in rows:
        lines.append(f"{model:<24}{dataset:<16}{100 * f1:>10.2f}")
    return "\n".join(lines)
