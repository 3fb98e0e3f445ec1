"""SGD training of the embedding model with tweet-level main batches.

Each main batch holds ``batch`` tweets. Inside a tweet every context window is
scored (the word-level batch size therefore varies with tweet length), the
per-tweet joint loss gradients are averaged over the main batch and one SGD
step is taken.
"""
from __future__ import annotations

import dataclasses
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from . import nn
from .corpus import LabeledTweet, SentimentLexicon, Vocabulary, extract_windows
from .model import TENSORS, MsweParams, load_checkpoint, mswe_loss, save_checkpoint

logger = logging.getLogger(__name__)


class TrainingError(RuntimeError):
    pass


@dataclass
class TrainConfig:
    window: int = 3
    dim: int = 50
    hidden: int = 20
    batch: int = 32
    lr: float = 0.01
    alpha: float = 0.5
    beta: float = 0.8
    epochs: int = 5
    seed: int = 0
    min_count: int = 1
    checkpoint_every: int = 0
    init_scale: float = 0.01

    def __post_init__(self):
        if self.window < 1 or self.window % 2 == 0:
            raise ValueError(f"window must be odd and >= 1, got {self.window}")
        if self.batch < 1:
            raise ValueError("batch must be >= 1")
        if self.lr <= 0:
            raise ValueError("lr must be positive")
        if not (0 <= self.alpha <= 1 and 0 <= self.beta <= 1):
            raise ValueError("alpha and beta must lie in [0, 1]")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")


@dataclass
class TrainReport:
    epochs: list = field(default_factory=list)  # dicts: epoch, loss, loss_w, loss_t, windows, steps
    tweets: int = 0
    tweets_skipped: int = 0
    windows_per_epoch: int = 0
    untouched_words: int = 0
    wall_time: float = 0.0

    def losses(self):
        return [e["loss"] for e in self.epochs]

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainReport":
        return cls(**d)


def _rng_state(rng: np.random.Generator) -> dict:
    return rng.bit_generator.state


def _rng_from_state(state: dict) -> np.random.Generator:
    bg = np.random.PCG64()
    bg.state = state
    return np.random.Generator(bg)


def prepare_windows(tweets, vocab: Vocabulary, t: int):
    """Encode tweets; returns (kept windows, kept labels, skipped count)."""
    wins, labels, skipped = [], [], 0
    for tw in tweets:
        w = extract_windows(vocab.encode(tw.tokens), t)
        if len(w) == 0:
            skipped += 1
            continue
        wins.append(w)
        labels.append(tw.label)
    return wins, labels, skipped


def train(tweets: list[LabeledTweet], vocab: Vocabulary, lexicon: SentimentLexicon,
          config: TrainConfig, checkpoint_path=None, resume_from=None):
    """Train embeddings on distant-labeled tweets. Returns ``(params, report)``."""
    t0 = time.perf_counter()
    cfg = config
    wins, labels, skipped = prepare_windows(tweets, vocab, cfg.window)
    if not wins:
        raise TrainingError("no tweet yields a context window; corpus empty after filtering")
    lex = lexicon.label_array(vocab)
    V = len(vocab)

    if resume_from is not None:
        params, extra = load_checkpoint(resume_from)
        if params.embeddings.shape[0] != V or params.t != cfg.window:
            raise TrainingError("checkpoint does not match vocabulary or window size")
        rng = _rng_from_state(extra["rng"])
        report = TrainReport.from_dict(extra["report"])
        start = extra["epoch"]
    else:
        rng = nn.make_rng(cfg.seed)
        params = MsweParams.init(V, cfg.window, cfg.dim, cfg.hidden, cfg.alpha, cfg.beta,
                                 rng, cfg.init_scale)
        seen = np.zeros(V, dtype=bool)
        for w in wins:
            seen[w.reshape(-1)] = True
        report = TrainReport(tweets=len(tweets), tweets_skipped=skipped,
                             windows_per_epoch=int(sum(len(w) for w in wins)),
                             untouched_words=int((~seen[1:]).sum()))
        start = 0

    tensors = params.tensors()
    dense_names = [n for n in TENSORS if n != "embeddings"]
    emb_buf = np.zeros_like(params.embeddings)
    n = len(wins)
    for epoch in range(start + 1, cfg.epochs + 1):
        order = rng.permutation(n)
        tot = tot_w = tot_t = 0.0
        windows = steps = 0
        for bi, b0 in enumerate(range(0, n, cfg.batch)):
            idx = order[b0:b0 + cfg.batch]
            acc = {name: np.zeros_like(tensors[name]) for name in dense_names}
            touched = []
            for i in idx:
                r = mswe_loss(wins[i], labels[i], lex, params, rng=rng)
                if not np.isfinite(r.loss):
                    raise TrainingError(f"non-finite loss at epoch {epoch} batch {bi}")
                for name in dense_names:
                    acc[name] += r.grads[name]
                np.add.at(emb_buf, r.emb_ids, r.emb_grads)
                touched.append(r.emb_ids)
                tot += r.loss
                tot_w += r.loss_word
                tot_t += r.loss_tweet
                windows += len(wins[i])
            scale = 1.0 / len(idx)
            try:
                for name in dense_names:
                    nn.sgd_step(tensors[name], acc[name] * scale, cfg.lr)
                rows = np.unique(np.concatenate(touched))
                g = emb_buf[rows] * scale
                nn._check_finite(g)
                params.embeddings[rows] -= cfg.lr * g
            except nn.NonFiniteError as e:
                raise TrainingError(f"epoch {epoch} batch {bi}: {e}") from e
            emb_buf[rows] = 0.0
            steps += 1
        rec = {"epoch": epoch, "loss": tot / n, "loss_w": tot_w / n, "loss_t": tot_t / n,
               "windows": windows, "steps": steps}
        report.epochs.append(rec)
        logger.info("epoch=%d loss=%.6f loss_w=%.6f loss_t=%.6f",
                    epoch, rec["loss"], rec["loss_w"], rec["loss_t"])
        if checkpoint_path and cfg.checkpoint_every and epoch % cfg.checkpoint_every == 0:
            save_checkpoint(params, checkpoint_path, _trainer_state(rng, epoch, report, cfg))
    if checkpoint_path:
        save_checkpoint(params, checkpoint_path, _trainer_state(rng, cfg.epochs, report, cfg))
    report.wall_time += time.perf_counter() - t0
    return params, report


def _trainer_state(rng, epoch, report, cfg) -> dict:
    rep = report.to_dict()
    rep["wall_time"] = 0.0  # keeps checkpoint bytes independent of timing
    return {"rng": _rng_state(rng), "epoch": epoch, "report": rep,
            "config": dataclasses.asdict(cfg)}


def checkpoint(params: MsweParams, path, rng=None, epoch=None, report=None, config=None) -> None:
    """Write params (and optional trainer state for resuming) to ``path``."""
    extra = {}
    if rng is not None:
        extra = _trainer_state(rng, epoch or 0, report or TrainReport(), config or TrainConfig())
    save_checkpoint(params, path, extra)


def resume(path):
    """Load a checkpoint; returns ``(params, trainer_state_dict)``."""
    return load_checkpoint(path)
