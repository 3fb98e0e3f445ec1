"""Sweep the word/tweet trade-off beta.

beta = 1 keeps only the word-level objective, beta = 0 only the tweet-level
one. On the synthetic corpus the mixed setting should match or beat both
endpoints on the dev set. Pass --quick for three betas instead of seven.
"""
import sys
from pathlib import Path

from mswe.classifier import ClassifierConfig
from mswe.cli import DESK_PRESET
from mswe.corpus import load_lexicon, read_labeled
from mswe.evaluation import DEFAULT_BETAS, sweep_beta
from mswe.trainer import TrainConfig

data = Path(__file__).resolve().parent.parent / "data" / "synthetic"
corpus = read_labeled(data / "corpus.tsv")
lexicon = load_lexicon(data / "lexicon-pos.txt", data / "lexicon-neg.txt")
clf_train = read_labeled(data / "train.tsv")
dev = read_labeled(data / "dev.tsv")

betas = (0.0, 0.8, 1.0) if "--quick" in sys.argv else DEFAULT_BETAS
tc = TrainConfig(lr=DESK_PRESET["lr"], init_scale=DESK_PRESET["init_scale"])
cc = ClassifierConfig(epochs=DESK_PRESET["clf_epochs"])
result = sweep_beta(corpus, lexicon, clf_train, dev, betas, tc, cc)

print(result.to_csv(), end="")
top = max(r[2] for r in result.rows)
for beta, _, f1 in result.rows:
    bar = "#" * int(round(200 * (f1 - 0.9))) if f1 > 0.9 else ""
    print(f"beta={beta:.1f}  {f1:.4f}  {bar}{'  <- best' if f1 == top else ''}")
