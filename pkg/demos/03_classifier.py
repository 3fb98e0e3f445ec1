"""CNN classifier on top of frozen embeddings.

Same hyperparameters as the reference setup: filter widths 2-5, 30 filters
each, 200 hidden units, keep probabilities 0.8 (input) and 0.7 (hidden),
AdaGrad with step 0.01.
"""
from pathlib import Path

import numpy as np

from mswe.classifier import ClassifierConfig, predict, train_classifier
from mswe.cli import DESK_PRESET
from mswe.corpus import build_vocab, load_lexicon, read_labeled
from mswe.evaluation import confusion, macro_f1
from mswe.trainer import TrainConfig, train

data = Path(__file__).resolve().parent.parent / "data" / "synthetic"
corpus = read_labeled(data / "corpus.tsv")
lexicon = load_lexicon(data / "lexicon-pos.txt", data / "lexicon-neg.txt")
vocab = build_vocab(corpus, 1)
params, _ = train(corpus, vocab, lexicon,
                  TrainConfig(lr=DESK_PRESET["lr"], init_scale=DESK_PRESET["init_scale"]))

train_set = read_labeled(data / "train.tsv")  # same tweets, clean labels
test_set = read_labeled(data / "test.tsv")
seqs = [vocab.encode(tw.tokens) for tw in train_set]
labels = np.array([tw.label for tw in train_set])

table = params.embeddings.copy()
clf, history = train_classifier(seqs, labels, table, ClassifierConfig(epochs=10))
for h in history[::3]:
    print(f"epoch {h['epoch']:2d}  loss {h['loss']:.4f}  train acc {h['train_acc']:.3f}")
assert np.array_equal(table, params.embeddings)  # embeddings stay frozen

gold = [tw.label for tw in test_set]
pred = predict([vocab.encode(tw.tokens) for tw in test_set], table, clf)
for label, c in zip(("positive", "negative"), confusion(gold, pred).values()):
    print(f"{label:>8}: P={c.precision:.3f} R={c.recall:.3f} F1={c.f1:.3f}")
print(f"macro-F1 on {len(gold)} held-out tweets: {macro_f1(gold, pred):.4f}")
