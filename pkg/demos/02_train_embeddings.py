"""Train sentiment-enriched embeddings on the bundled synthetic corpus.

The corpus has 2000 distant-labeled tweets built from filler words (w00...),
planted positive words (good00...) and planted negative words (bad00...). The
word-level objective ranks real windows above corrupted ones and pushes
lexicon words toward their polarity; the tweet-level objective predicts the
distant label from pooled window features. beta mixes the two.
"""
import logging
from pathlib import Path

from mswe.cli import DESK_PRESET
from mswe.corpus import build_vocab, load_lexicon, read_labeled
from mswe.model import nearest_neighbors
from mswe.trainer import TrainConfig, train

logging.basicConfig(level=logging.INFO, format="%(message)s")

data = Path(__file__).resolve().parent.parent / "data" / "synthetic"
corpus = read_labeled(data / "corpus.tsv")
lexicon = load_lexicon(data / "lexicon-pos.txt", data / "lexicon-neg.txt")
vocab = build_vocab(corpus, 1)
print(f"{len(corpus)} tweets, {len(vocab)} word types, {len(lexicon)} lexicon words")

# the default lr (0.01) needs millions of tweets; the desk preset uses a larger step
config = TrainConfig(beta=0.8, lr=DESK_PRESET["lr"], init_scale=DESK_PRESET["init_scale"])
params, report = train(corpus, vocab, lexicon, config)
print(f"{report.windows_per_epoch} windows per epoch, {report.wall_time:.1f}s")

# neighbours of a planted word should be planted words of the same polarity,
# even though "good03" and "bad03" occur in exactly the same kind of contexts
for word in ("good03", "bad03", "w10"):
    nbrs = nearest_neighbors(word, 5, params.embeddings, vocab)
    print(f"{word:>7}: " + "  ".join(f"{w} {c:.2f}" for w, c in nbrs))
