"""Multi-level sentiment-enriched word embedding network.

A tweet is cut into context windows. Each window passes through a shared unit
(embedding lookup + linear layer). The word-level side scores every window for
n-gram plausibility and for the lexicon polarity of its center word; the
tweet-level side max/avg/min-pools the shared outputs over the whole tweet and
predicts the tweet polarity with a softmax.

Index conventions:

* tweet labels and the tweet softmax use index 0 = positive, 1 = negative;
* the word-sentiment head uses the two-slot gold vector negative=[1,0],
  positive=[0,1], i.e. slot 1 holds the positive score.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import nn
from .corpus import NEGATIVE, POSITIVE, UNK, Vocabulary, corrupt_centers
from .persist import CheckpointError, read_archive, write_archive

TENSORS = ("embeddings", "W_shared", "b_shared", "W_ngram", "W_ws",
           "W_tweet", "b_tweet", "W_proj", "b_proj")
WORD_HEADS = ("W_ngram", "W_ws")
TWEET_HEADS = ("W_tweet", "b_tweet", "W_proj", "b_proj")
N_POOL = 3  # max, avg, min


def ws_true_index(label):
    """Slot of the word-sentiment head holding the score for ``label``."""
    return 1 - np.asarray(label)


@dataclass
class MsweParams:
    embeddings: np.ndarray  # (|V|, d)
    W_shared: np.ndarray    # (t*d, h)
    b_shared: np.ndarray    # (h,)
    W_ngram: np.ndarray     # (1, h)
    W_ws: np.ndarray        # (2, h)
    W_tweet: np.ndarray     # (h, 3h)
    b_tweet: np.ndarray     # (h,)
    W_proj: np.ndarray      # (2, h)
    b_proj: np.ndarray      # (2,)
    alpha: float = 0.5
    beta: float = 0.8
    t: int = 3

    def __post_init__(self):
        self.validate()

    @property
    def d(self) -> int:
        return self.embeddings.shape[1]

    @property
    def h(self) -> int:
        return self.b_shared.shape[0]

    @classmethod
    def init(cls, vocab_size: int, t: int = 3, d: int = 50, h: int = 20, alpha: float = 0.5,
             beta: float = 0.8, rng: np.random.Generator | None = None, scale: float = 0.01):
        rng = rng if rng is not None else nn.make_rng(0)
        u = lambda *shape: nn.uniform_init(rng, shape, scale)  # noqa: E731
        z = lambda *shape: np.zeros(shape, dtype=nn.DTYPE)  # noqa: E731
        return cls(
            embeddings=u(vocab_size, d),
            W_shared=u(t * d, h), b_shared=z(h),
            W_ngram=u(1, h), W_ws=u(2, h),
            W_tweet=u(h, N_POOL * h), b_tweet=z(h),
            W_proj=u(2, h), b_proj=z(2),
            alpha=alpha, beta=beta, t=t,
        )

    def validate(self):
        d, h, t = self.d, self.h, self.t
        want = {
            "W_shared": (t * d, h), "b_shared": (h,), "W_ngram": (1, h), "W_ws": (2, h),
            "W_tweet": (h, N_POOL * h), "b_tweet": (h,), "W_proj": (2, h), "b_proj": (2,),
        }
        for name, shape in want.items():
            got = getattr(self, name).shape
            if got != shape:
                raise nn.ShapeError(f"{name}: expected {shape}, got {got}")
        if t < 1 or t % 2 == 0:
            raise ValueError(f"window size must be odd, got {t}")
        if not (0.0 <= self.alpha <= 1.0 and 0.0 <= self.beta <= 1.0):
            raise ValueError("alpha and beta must lie in [0, 1]")

    def tensors(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in TENSORS}

    def copy(self) -> "MsweParams":
        return MsweParams(**{k: v.copy() for k, v in self.tensors().items()},
                          alpha=self.alpha, beta=self.beta, t=self.t)

    def hyper(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta, "t": self.t, "d": self.d, "h": self.h}


@dataclass
class WordLevelOutput:
    e: np.ndarray        # (n, h) shared-unit outputs
    a1: np.ndarray       # (n, h)
    f_ngram: np.ndarray  # (n,)
    f_ws: np.ndarray     # (n, 2)


@dataclass
class TweetLevelOutput:
    pooled: np.ndarray  # (3h,)
    a2: np.ndarray      # (h,)
    f_ds: np.ndarray    # (2,)


@dataclass
class LossResult:
    loss: float
    loss_word: float
    loss_tweet: float
    grads: dict = field(default_factory=dict)  # dense grads for all tensors but embeddings
    emb_ids: np.ndarray | None = None          # (m,) row ids, may repeat
    emb_grads: np.ndarray | None = None        # (m, d)

    def embedding_grad(self, vocab_size: int) -> np.ndarray:
        g = np.zeros((vocab_size, self.emb_grads.shape[1]), dtype=nn.DTYPE)
        np.add.at(g, self.emb_ids, self.emb_grads)
        return g


def _as_windows(windows, t: int) -> np.ndarray:
    w = np.asarray(windows, dtype=np.int64)
    if w.ndim == 1:
        w = w[None, :]
    if w.shape[1] != t:
        raise nn.ShapeError(f"windows have width {w.shape[1]}, model expects {t}")
    return w


def shared_forward(windows, params: MsweParams) -> np.ndarray:
    """Shared unit: concatenated window embeddings through one linear layer (no nonlinearity)."""
    w = _as_windows(windows, params.t)
    x = params.embeddings[w].reshape(len(w), -1)
    e = x @ params.W_shared + params.b_shared
    return e[0] if np.ndim(windows) == 1 else e


def word_level_forward(windows, params: MsweParams) -> WordLevelOutput:
    e = np.atleast_2d(shared_forward(_as_windows(windows, params.t), params))
    a1 = nn.htanh(e)
    return WordLevelOutput(e, a1, a1 @ params.W_ngram[0], a1 @ params.W_ws.T)


def word_level_loss(window, corrupted, lexicon_label, params: MsweParams) -> float:
    """Word-level loss of one window against its corruption.

    ``lexicon_label`` is POSITIVE/NEGATIVE for lexicon centers, None (or -1)
    otherwise; then only the n-gram ranking term is used.
    """
    out = word_level_forward(window, params)
    out_c = word_level_forward(corrupted, params)
    ngm = float(nn.hinge_rank_loss(out.f_ngram[0], out_c.f_ngram[0]))
    if lexicon_label is None or lexicon_label < 0:
        return ngm
    ti = ws_true_index(lexicon_label)
    ws = float(nn.hinge_rank_loss(out.f_ws[0, ti], out.f_ws[0, 1 - ti]))
    return params.alpha * ngm + (1 - params.alpha) * ws


def _pool(e: np.ndarray):
    return np.concatenate([e.max(axis=0), e.mean(axis=0), e.min(axis=0)])


def tweet_level_forward(windows, params: MsweParams) -> TweetLevelOutput:
    e = np.atleast_2d(shared_forward(_as_windows(windows, params.t), params))
    pooled = _pool(e)
    a2 = params.W_tweet @ pooled + params.b_tweet
    return TweetLevelOutput(pooled, a2, nn.softmax(params.W_proj @ a2 + params.b_proj))


def gold_distribution(label: int) -> np.ndarray:
    g = np.zeros(2, dtype=nn.DTYPE)
    g[label] = 1.0
    return g


def tweet_level_loss(windows, gold, params: MsweParams) -> float:
    return nn.cross_entropy(gold, tweet_level_forward(windows, params).f_ds)


def mswe_loss(windows, label: int, lex_labels: np.ndarray, params: MsweParams,
              rng: np.random.Generator | None = None, corrupt=None) -> LossResult:
    """Joint loss of one tweet and its exact (sub)gradients.

    ``windows`` is the (n, t) id array of the tweet's windows, ``lex_labels``
    maps every vocabulary id to its lexicon polarity or -1. Corrupted centers
    are drawn from ``rng`` unless given explicitly in ``corrupt``.
    """
    P = params
    w = _as_windows(windows, P.t)
    n, t, d, h = len(w), P.t, P.d, P.h
    if n == 0:
        raise ValueError("tweet has no context windows")
    alpha, beta = P.alpha, P.beta
    c = t // 2
    centers = w[:, c]
    if corrupt is None:
        if rng is None:
            raise ValueError("need an rng or explicit corruptions")
        corrupt = corrupt_centers(centers, len(P.embeddings), rng)
    wc = w.copy()
    wc[:, c] = corrupt

    # forward, word level
    x = P.embeddings[w].reshape(n, t * d)
    xc = P.embeddings[wc].reshape(n, t * d)
    e = x @ P.W_shared + P.b_shared
    ec = xc @ P.W_shared + P.b_shared
    a1, a1c = nn.htanh(e), nn.htanh(ec)
    fn, fnc = a1 @ P.W_ngram[0], a1c @ P.W_ngram[0]
    fws = a1 @ P.W_ws.T

    lab = lex_labels[centers]
    has = lab >= 0
    ti = np.where(has, ws_true_index(np.where(has, lab, 0)), 0)
    fi = 1 - ti
    rows = np.arange(n)
    ngm = nn.hinge_rank_loss(fn, fnc)
    ws = np.where(has, nn.hinge_rank_loss(fws[rows, ti], fws[rows, fi]), 0.0)
    l1 = np.where(has, alpha * ngm + (1 - alpha) * ws, ngm)
    loss_word = float(l1.mean())

    # forward, tweet level
    pooled = _pool(e)
    a2 = P.W_tweet @ pooled + P.b_tweet
    p = nn.softmax(P.W_proj @ a2 + P.b_proj)
    g = gold_distribution(label)
    loss_tweet = nn.cross_entropy(g, p)
    loss = beta * loss_word + (1 - beta) * loss_tweet

    # backward, word level
    dl1 = beta / n
    cn = dl1 * np.where(has, alpha, 1.0) * nn.hinge_active(fn, fnc)
    cw = dl1 * (1 - alpha) * has * nn.hinge_active(fws[rows, ti], fws[rows, fi])
    dfws = np.zeros((n, 2))
    dfws[rows, ti] = -cw
    dfws[rows, fi] = cw
    grads = {
        "W_ngram": ((-cn) @ a1 + cn @ a1c)[None, :],
        "W_ws": dfws.T @ a1,
    }
    de = (np.outer(-cn, P.W_ngram[0]) + dfws @ P.W_ws) * nn.htanh_grad(e)
    dec = np.outer(cn, P.W_ngram[0]) * nn.htanh_grad(ec)

    # backward, tweet level
    dz = (1 - beta) * (p - g)
    da2 = P.W_proj.T @ dz
    grads["W_proj"] = np.outer(dz, a2)
    grads["b_proj"] = dz
    grads["W_tweet"] = np.outer(da2, pooled)
    grads["b_tweet"] = da2
    dpool = P.W_tweet.T @ da2
    cols = np.arange(h)
    de[e.argmax(axis=0), cols] += dpool[:h]
    de += dpool[h:2 * h] / n
    de[e.argmin(axis=0), cols] += dpool[2 * h:]

    # backward, shared unit and embeddings
    grads["W_shared"] = x.T @ de + xc.T @ dec
    grads["b_shared"] = de.sum(axis=0) + dec.sum(axis=0)
    dx = (de @ P.W_shared.T).reshape(n * t, d)
    dxc = (dec @ P.W_shared.T).reshape(n * t, d)
    return LossResult(
        loss=float(loss), loss_word=loss_word, loss_tweet=loss_tweet, grads=grads,
        emb_ids=np.concatenate([w.reshape(-1), wc.reshape(-1)]),
        emb_grads=np.concatenate([dx, dxc]),
    )


def cosine_matrix(table: np.ndarray, query: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(table, axis=1)
    qn = np.linalg.norm(query)
    denom = norms * qn
    with np.errstate(invalid="ignore", divide="ignore"):
        cos = np.where(denom > 0, (table @ query) / np.where(denom > 0, denom, 1.0), 0.0)
    return cos


def nearest_neighbors(word: str, k: int, table: np.ndarray, vocab: Vocabulary):
    """Top-``k`` ``(word, cosine)`` pairs, skipping the query itself and UNK."""
    if word not in vocab:
        raise KeyError(f"word not in vocabulary: {word!r}")
    if k < 0 or k >= len(vocab):
        raise ValueError(f"k must be in [0, {len(vocab) - 1}), got {k}")
    q = vocab.id(word)
    cos = cosine_matrix(table, table[q])
    ids = np.arange(len(vocab))
    keep = (ids != q) & (ids != 0)
    ids, cos = ids[keep], cos[keep]
    order = np.lexsort((ids, -cos))[:k]
    return [(vocab.word(int(i)), float(cos[j])) for j, i in zip(order, ids[order])]


class EmbeddingFormatError(ValueError):
    pass


def save_embeddings(table: np.ndarray, vocab: Vocabulary, path) -> None:
    """Plain-text vectors: ``|V| d`` header, then ``word v1 ... vd`` per row."""
    table = np.asarray(table, dtype=nn.DTYPE)
    if table.shape[0] != len(vocab):
        raise nn.ShapeError(f"table has {table.shape[0]} rows, vocabulary {len(vocab)} words")
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"{table.shape[0]} {table.shape[1]}\n")
        for i, row in enumerate(table):
            f.write(vocab.word(i) + " " + " ".join(f"{v:.17g}" for v in row) + "\n")


def load_embeddings(path):
    """Inverse of :func:`save_embeddings`; returns ``(table, vocab)``."""
    try:
        lines = open(path, encoding="utf-8").read().splitlines()
    except OSError as e:
        raise EmbeddingFormatError(f"cannot read {path}: {e}") from e
    if not lines:
        raise EmbeddingFormatError(f"{path}:1: empty file")
    head = lines[0].split()
    try:
        nv, d = (int(v) for v in head)
    except ValueError:
        raise EmbeddingFormatError(f"{path}:1: header must be '<vocab size> <dim>'") from None
    if nv < 1 or d < 1:
        raise EmbeddingFormatError(f"{path}:1: vocab size and dimension must be positive")
    body = lines[1:]
    if len(body) != nv:
        lineno = min(len(body), nv) + 2 if len(body) > nv else len(lines) + 1
        raise EmbeddingFormatError(
            f"{path}:{lineno}: header announces {nv} rows, file has {len(body)}")
    table = np.empty((nv, d), dtype=nn.DTYPE)
    words = []
    for i, line in enumerate(body):
        parts = line.split(" ")
        if len(parts) != d + 1:
            raise EmbeddingFormatError(
                f"{path}:{i + 2}: expected word and {d} values, got {len(parts) - 1} values")
        try:
            table[i] = [float(v) for v in parts[1:]]
        except ValueError:
            raise EmbeddingFormatError(f"{path}:{i + 2}: non-numeric value") from None
        words.append(parts[0])
    if words[0] != UNK:
        raise EmbeddingFormatError(f"{path}:2: first row must be {UNK}")
    try:
        vocab = Vocabulary(words)
    except ValueError as e:
        raise EmbeddingFormatError(f"{path}: {e}") from None
    return table, vocab


def save_checkpoint(params: MsweParams, path, extra: dict | None = None) -> None:
    meta = {"hyper": params.hyper(), "extra": extra or {}}
    write_archive(path, "mswe", meta, params.tensors())


def load_checkpoint(path):
    """Return ``(params, extra)`` where ``extra`` holds trainer state if any."""
    meta, tensors = read_archive(path, kind="mswe")
    hy = meta["hyper"]
    missing = set(TENSORS) - set(tensors)
    if missing:
        raise CheckpointError(f"{path}: missing tensors {sorted(missing)}")
    params = MsweParams(**{k: tensors[k] for k in TENSORS},
                        alpha=hy["alpha"], beta=hy["beta"], t=hy["t"])
    return params, meta.get("extra", {})


__all__ = [
    "MsweParams", "WordLevelOutput", "TweetLevelOutput", "LossResult", "shared_forward",
    "word_level_forward", "word_level_loss", "tweet_level_forward", "tweet_level_loss",
    "mswe_loss", "nearest_neighbors", "save_embeddings", "load_embeddings",
    "save_checkpoint", "load_checkpoint", "POSITIVE", "NEGATIVE",
]
