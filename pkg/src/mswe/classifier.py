"""CNN sentiment classifier over frozen word embeddings.

Convolution filters of several widths slide over the token axis (stride 1,
valid positions only), each filter is max-pooled over positions, the pooled
features go through a ReLU hidden layer and a 2-way softmax. Dropout with
inverted scaling is applied to the input embeddings and to the hidden layer at
train time. Training uses AdaGrad and never touches the embedding table.
"""
from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field

import numpy as np

from . import nn
from .corpus import NEGATIVE, POSITIVE
from .persist import CheckpointError, read_archive, write_archive

logger = logging.getLogger(__name__)


@dataclass
class ClassifierConfig:
    widths: tuple = (2, 3, 4, 5)
    filters: int = 30
    hidden: int = 200
    keep_input: float = 0.8
    keep_hidden: float = 0.7
    lr: float = 0.01
    epochs: int = 20
    batch: int = 32
    seed: int = 0
    init_scale: float = 0.01

    def __post_init__(self):
        self.widths = tuple(int(s) for s in self.widths)
        if not self.widths or min(self.widths) < 1:
            raise ValueError("filter widths must be positive")
        for k in (self.keep_input, self.keep_hidden):
            if not 0 < k <= 1:
                raise ValueError("keep probabilities must lie in (0, 1]")
        if self.lr <= 0 or self.batch < 1 or self.epochs < 0:
            raise ValueError("bad lr/batch/epochs")


@dataclass
class ClassifierParams:
    widths: tuple
    tensors: dict  # conv{s}_W (N, s, d), conv{s}_b (N,), W_hidden, b_hidden, W_out, b_out

    @classmethod
    def init(cls, d: int, config: ClassifierConfig, rng: np.random.Generator):
        N, H = config.filters, config.hidden
        u = lambda *shape: nn.uniform_init(rng, shape, config.init_scale)  # noqa: E731
        t = {}
        for s in config.widths:
            t[f"conv{s}_W"] = u(N, s, d)
            t[f"conv{s}_b"] = np.zeros(N)
        t["W_hidden"] = u(H, N * len(config.widths))
        t["b_hidden"] = np.zeros(H)
        t["W_out"] = u(2, H)
        t["b_out"] = np.zeros(2)
        return cls(tuple(config.widths), t)

    @property
    def d(self) -> int:
        return self.tensors[f"conv{self.widths[0]}_W"].shape[2]

    def copy(self) -> "ClassifierParams":
        return ClassifierParams(self.widths, {k: v.copy() for k, v in self.tensors.items()})


@dataclass
class _Cache:
    x: np.ndarray
    windows: dict = field(default_factory=dict)
    argmax: dict = field(default_factory=dict)
    feats: np.ndarray | None = None
    pre: np.ndarray | None = None
    hmask: np.ndarray | None = None
    hidden: np.ndarray | None = None
    probs: np.ndarray | None = None


def pad_batch(seqs, table: np.ndarray, min_len: int):
    """Look up id sequences and right-pad with zero vectors.

    Returns ``(x, eff_len)``: x has shape (B, L, d) where L covers the longest
    sequence and at least ``min_len``; eff_len is each sequence's length after
    padding short ones up to ``min_len``.
    """
    lens = np.array([len(s) for s in seqs], dtype=np.int64)
    eff = np.maximum(lens, min_len)
    L = int(eff.max()) if len(seqs) else min_len
    x = np.zeros((len(seqs), L, table.shape[1]), dtype=nn.DTYPE)
    for i, s in enumerate(seqs):
        if len(s):
            x[i, : len(s)] = table[np.asarray(s, dtype=np.int64)]
    return x, eff


def _forward(x, eff, params: ClassifierParams, train: bool, rng, keep_in: float, keep_h: float):
    T = params.tensors
    cache = _Cache(x=x)
    if train and keep_in < 1.0:
        x = x * ((rng.random(x.shape) < keep_in) / keep_in)
    B, L, d = x.shape
    feats = []
    for s in params.widths:
        W, b = T[f"conv{s}_W"], T[f"conv{s}_b"]
        N = W.shape[0]
        P = L - s + 1
        win = np.lib.stride_tricks.sliding_window_view(x, s, axis=1)  # (B, P, d, s)
        win = win.transpose(0, 1, 3, 2).reshape(B, P, s * d)
        conv = win @ W.reshape(N, s * d).T + b  # (B, P, N)
        valid = np.arange(P)[None, :] <= (eff - s)[:, None]
        conv = np.where(valid[:, :, None], conv, -np.inf)
        am = conv.argmax(axis=1)  # (B, N)
        feats.append(np.take_along_axis(conv, am[:, None, :], axis=1)[:, 0, :])
        cache.windows[s] = win
        cache.argmax[s] = am
    f = np.concatenate(feats, axis=1)
    pre = f @ T["W_hidden"].T + T["b_hidden"]
    hid = nn.relu(pre)
    hmask = None
    if train and keep_h < 1.0:
        hmask = (rng.random(hid.shape) < keep_h) / keep_h
        hid = hid * hmask
    probs = nn.softmax(hid @ T["W_out"].T + T["b_out"], axis=1)
    cache.feats, cache.pre, cache.hmask, cache.hidden, cache.probs = f, pre, hmask, hid, probs
    return probs, cache


def _backward(cache: _Cache, gold: np.ndarray, params: ClassifierParams) -> dict:
    T = params.tensors
    B = len(gold)
    g = np.zeros_like(cache.probs)
    g[np.arange(B), gold] = 1.0
    dz = (cache.probs - g) / B
    grads = {"W_out": dz.T @ cache.hidden, "b_out": dz.sum(axis=0)}
    dh = dz @ T["W_out"]
    if cache.hmask is not None:
        dh = dh * cache.hmask
    dpre = dh * nn.relu_grad(cache.pre)
    grads["W_hidden"] = dpre.T @ cache.feats
    grads["b_hidden"] = dpre.sum(axis=0)
    df = dpre @ T["W_hidden"]
    off = 0
    for s in params.widths:
        W = T[f"conv{s}_W"]
        N = W.shape[0]
        dfs = df[:, off: off + N]
        off += N
        sel = np.take_along_axis(cache.windows[s], cache.argmax[s][:, :, None], axis=1)  # (B, N, s*d)
        grads[f"conv{s}_W"] = np.einsum("bn,bnk->nk", dfs, sel).reshape(W.shape)
        grads[f"conv{s}_b"] = dfs.sum(axis=0)
    return grads


def classify_forward(seqs, table: np.ndarray, params: ClassifierParams, mode: str = "infer",
                     rng: np.random.Generator | None = None, keep_input: float = 1.0,
                     keep_hidden: float = 1.0) -> np.ndarray:
    """Class distributions (B, 2) for id sequences ``seqs`` looked up in ``table``."""
    if mode not in ("train", "infer"):
        raise ValueError(f"mode must be 'train' or 'infer', got {mode!r}")
    train = mode == "train"
    if train and rng is None and (keep_input < 1 or keep_hidden < 1):
        raise ValueError("train mode with dropout needs an rng")
    x, eff = pad_batch(seqs, table, max(params.widths))
    probs, _ = _forward(x, eff, params, train, rng, keep_input, keep_hidden)
    return probs


def loss_and_grads(seqs, gold, table, params: ClassifierParams, train: bool = False,
                   rng=None, keep_input: float = 1.0, keep_hidden: float = 1.0):
    """Mean cross-entropy over the batch and its gradients w.r.t. every classifier tensor."""
    gold = np.asarray(gold, dtype=np.int64)
    x, eff = pad_batch(seqs, table, max(params.widths))
    probs, cache = _forward(x, eff, params, train, rng, keep_input, keep_hidden)
    p = np.maximum(probs[np.arange(len(gold)), gold], nn.PROB_FLOOR)
    loss = float(-np.log(p).mean())
    return loss, _backward(cache, gold, params)


def predict_proba(seqs, table, params: ClassifierParams, batch: int = 256) -> np.ndarray:
    if len(seqs) == 0:
        return np.zeros((0, 2))
    out = [classify_forward(seqs[i:i + batch], table, params) for i in range(0, len(seqs), batch)]
    return np.concatenate(out)


def predict(seqs, table, params: ClassifierParams) -> np.ndarray:
    """Labels by argmax; an exact tie goes to positive."""
    p = predict_proba(seqs, table, params)
    return np.where(p[:, POSITIVE] >= p[:, NEGATIVE], POSITIVE, NEGATIVE).astype(np.int64)


class ClassifierError(RuntimeError):
    pass


def train_classifier(seqs, labels, table: np.ndarray, config: ClassifierConfig):
    """AdaGrad mini-batch training. Returns ``(params, history)``."""
    if len(seqs) == 0:
        raise ClassifierError("empty training set")
    labels = np.asarray(labels, dtype=np.int64)
    rng = nn.make_rng(config.seed)
    params = ClassifierParams.init(table.shape[1], config, rng)
    state = nn.AdaGradState()
    history = []
    n = len(seqs)
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n)
        total = 0.0
        for bi, b0 in enumerate(range(0, n, config.batch)):
            idx = order[b0:b0 + config.batch]
            loss, grads = loss_and_grads([seqs[i] for i in idx], labels[idx], table, params,
                                         True, rng, config.keep_input, config.keep_hidden)
            if not np.isfinite(loss):
                raise ClassifierError(f"non-finite loss at epoch {epoch} batch {bi}")
            try:
                for name, g in grads.items():
                    state.step(name, params.tensors[name], g, config.lr)
            except nn.NonFiniteError as e:
                raise ClassifierError(f"epoch {epoch} batch {bi}: {e}") from e
            total += loss * len(idx)
        acc = float((predict(seqs, table, params) == labels).mean())
        history.append({"epoch": epoch, "loss": total / n, "train_acc": acc})
        logger.info("clf epoch=%d loss=%.6f acc=%.4f", epoch, total / n, acc)
    return params, history


def save_classifier(params: ClassifierParams, path, config: ClassifierConfig | None = None) -> None:
    meta = {"widths": list(params.widths),
            "config": dataclasses.asdict(config) if config else None}
    write_archive(path, "classifier", meta, params.tensors)


def load_classifier(path) -> ClassifierParams:
    meta, tensors = read_archive(path, kind="classifier")
    widths = tuple(meta["widths"])
    need = {f"conv{s}_{p}" for s in widths for p in "Wb"} | {"W_hidden", "b_hidden", "W_out", "b_out"}
    if set(tensors) != need:
        raise CheckpointError(f"{path}: tensor set does not match widths {widths}")
    return ClassifierParams(widths, tensors)
