"""End-to-end acceptance checks, one test per criterion.

Each test prints a ``criterion N [PASS|FAIL] ...`` line; the lines are
repeated in the pytest terminal summary.
"""
import dataclasses
import itertools
import time

import numpy as np
import pytest

from mswe import nn
from mswe.classifier import (ClassifierConfig, classify_forward, load_classifier,
                             loss_and_grads, predict, save_classifier, train_classifier)
from mswe.cli import DESK_PRESET, main
from mswe.config import CLF_PREFIX
from mswe.corpus import build_vocab
from mswe.evaluation import macro_f1, run_pipeline
from mswe.model import (TENSORS, load_checkpoint, load_embeddings, mswe_loss, nearest_neighbors,
                        save_checkpoint, save_embeddings)
from mswe.synthetic import make_corpus
from mswe.trainer import TrainConfig, train

from gradcheck import check_case, random_case

GRID = list(itertools.product([0.0, 0.5, 1.0], [0.0, 0.5, 1.0], [True, False, "mixed"]))


def desk_configs(beta, seed=0):
    tc = TrainConfig(beta=beta, seed=seed, **{k: v for k, v in DESK_PRESET.items()
                                              if not k.startswith(CLF_PREFIX)})
    cc = ClassifierConfig(seed=seed, **{k[len(CLF_PREFIX):]: v for k, v in DESK_PRESET.items()
                                        if k.startswith(CLF_PREFIX)})
    return tc, cc


@pytest.fixture(scope="module")
def separability():
    """Shared runs for criteria 3 and 4: beta in {0, 0.8, 1} on the 2000-tweet corpus."""
    t0 = time.perf_counter()
    C = make_corpus(n_tweets=3000, n_lexicon=40, noise=0.1, seed=0)
    distant, dev, test = C.split(500, 500)
    clf_train = C.gold_tweets(range(len(distant)))
    lex = C.lexicon()
    runs = {}
    for beta in (0.0, 0.8, 1.0):
        tc, cc = desk_configs(beta)
        runs[beta] = run_pipeline(distant, lex, clf_train, dev, tc, cc)
    best = runs[0.8]
    test_pred = predict([best.vocab.encode(tw.tokens) for tw in test], best.params.embeddings,
                        best.classifier)
    test_f1 = macro_f1([tw.label for tw in test], test_pred)
    return {"corpus": C, "n_distant": len(distant), "runs": runs, "test_f1": test_f1,
            "elapsed": time.perf_counter() - t0}


def test_criterion_1_gradient_correctness(criterion):
    with criterion(1, "analytic gradients match finite differences") as c:
        t0 = time.perf_counter()
        worst = 0.0
        n = 0
        for seed, (alpha, beta, lexc) in enumerate(GRID):
            errors, _ = check_case(*random_case(seed, alpha, beta, lexc))
            worst = max(worst, max(errors.values()))
            n += 1
        elapsed = time.perf_counter() - t0
        c.note(f"{n} configs, max rel err {worst:.2e}, {elapsed:.1f}s")
        assert n >= 20
        assert worst < 1e-4
        assert elapsed < 60


def test_criterion_2_ablation_degeneracy(criterion):
    with criterion(2, "beta endpoints leave the other level's heads untouched") as c:
        C = make_corpus(n_tweets=300, n_lexicon=20, n_neutral=30, seed=1)
        vocab = build_vocab(C.tweets, 1)
        base_cfg = TrainConfig(dim=10, hidden=6, epochs=2, lr=0.5, init_scale=0.1, seed=2)
        init, _ = train(C.tweets, vocab, C.lexicon(), dataclasses.replace(base_cfg, epochs=0))
        p1, _ = train(C.tweets, vocab, C.lexicon(), dataclasses.replace(base_cfg, beta=1.0))
        p0, _ = train(C.tweets, vocab, C.lexicon(), dataclasses.replace(base_cfg, beta=0.0))
        frozen1 = [n for n in ("W_tweet", "b_tweet", "W_proj", "b_proj")
                   if getattr(p1, n).tobytes() == getattr(init, n).tobytes()]
        frozen0 = [n for n in ("W_ngram", "W_ws")
                   if getattr(p0, n).tobytes() == getattr(init, n).tobytes()]
        c.note(f"beta=1 frozen {frozen1}; beta=0 frozen {frozen0}")
        assert len(frozen1) == 4 and len(frozen0) == 2
        assert not np.array_equal(p1.W_shared, init.W_shared)
        assert not np.array_equal(p0.W_shared, init.W_shared)


def test_criterion_3_synthetic_separability(criterion, separability):
    with criterion(3, "pipeline separates the synthetic corpus") as c:
        runs = separability["runs"]
        dev = {b: r.macro_f1 for b, r in runs.items()}
        c.note(f"test F1 (beta=0.8) {separability['test_f1']:.4f}")
        c.note("dev F1 " + ", ".join(f"beta={b}: {f:.4f}" for b, f in dev.items()))
        c.note(f"{separability['elapsed']:.0f}s")
        assert separability["n_distant"] == 2000
        assert all(len(r.report.epochs) == 5 for r in runs.values())
        assert separability["test_f1"] >= 0.90
        assert dev[0.8] >= max(dev[0.0], dev[1.0]) - 0.02
        assert separability["elapsed"] < 300


def test_criterion_4_polarity_purity(criterion, separability):
    with criterion(4, "nearest neighbours of planted seed words share polarity") as c:
        C = separability["corpus"]
        res = separability["runs"][0.8]
        worst = {}
        for label, seeds, same in (("positive", C.positive_words[:10], set(C.positive_words)),
                                   ("negative", C.negative_words[:10], set(C.negative_words))):
            purities = []
            for w in seeds:
                nbrs = nearest_neighbors(w, 5, res.params.embeddings, res.vocab)
                purities.append(sum(n in same for n, _ in nbrs) / 5)
            worst[label] = min(purities)
        c.note(f"min purity pos {worst['positive']:.2f}, neg {worst['negative']:.2f}")
        assert worst["positive"] >= 0.8 and worst["negative"] >= 0.8


def test_criterion_5_lexicon_gating(criterion):
    with criterion(5, "non-lexicon centers give the sentiment head zero gradient") as c:
        checked = 0
        for seed in range(30):
            for alpha, beta in ((0.0, 1.0), (0.5, 0.5), (0.5, 1.0)):
                P, w, label, lex, corrupt = random_case(500 + seed, alpha, beta, False)
                res = mswe_loss(w, label, lex, P, corrupt=corrupt)
                assert not res.grads["W_ws"].any()
                checked += 1
        # contrast: a lexicon center with the margin unmet does move the head
        P, w, label, lex, corrupt = random_case(7, 0.0, 1.0, True)
        P.W_ws[:] = 0.0
        res = mswe_loss(w, label, lex, P, corrupt=corrupt)
        assert res.grads["W_ws"].any()
        c.note(f"{checked} non-lexicon tweets, W_ws grad exactly zero")


def _end_to_end(d):
    fast = ["--set", "epochs=2", "--set", "dim=10", "--set", "hidden=6", "--set", "clf_epochs=2",
            "--set", "clf_filters=4", "--set", "clf_hidden=10"]
    conf = str(d / "mswe.conf")
    steps = [["make-synthetic", str(d), "--tweets", "300", "--dev", "60", "--test", "60"],
             ["train-embeddings", "-c", conf, *fast],
             ["train-classifier", "-c", conf, *fast],
             ["predict", "-c", conf],
             ["eval", "-c", conf],
             ["sweep-beta", "-c", conf, *fast, "--betas", "0,0.8,1", "--set", f"csv={d / 'sweep.csv'}"]]
    for argv in steps:
        assert main(argv) == 0, argv


def test_criterion_6_determinism(criterion, tmp_path):
    with criterion(6, "identical config and seed give identical files") as c:
        a, b = tmp_path / "a", tmp_path / "b"
        _end_to_end(a)
        _end_to_end(b)
        names = ["embeddings.txt", "mswe.ckpt", "classifier.ckpt", "predictions.tsv",
                 "results.csv", "sweep.csv"]
        same = [n for n in names if (a / n).read_bytes() == (b / n).read_bytes()]
        c.note(f"{len(same)}/{len(names)} artifacts identical")
        assert same == names


def test_criterion_7_classifier_sanity(criterion):
    with criterion(7, "classifier fits 50 tweets; keep=1 dropout is a no-op") as c:
        C = make_corpus(n_tweets=50, seed=7)
        data = C.gold_tweets()
        vocab = build_vocab(data, 1)
        table = nn.make_rng(7).normal(size=(len(vocab), 50))
        seqs = [vocab.encode(tw.tokens) for tw in data]
        labels = [tw.label for tw in data]
        cfg = ClassifierConfig(epochs=200)
        assert (cfg.widths, cfg.filters, cfg.hidden, cfg.keep_input, cfg.keep_hidden, cfg.lr) == \
            ((2, 3, 4, 5), 30, 200, 0.8, 0.7, 0.01)
        params, hist = train_classifier(seqs, labels, table, cfg)
        first = next((h["epoch"] for h in hist if h["train_acc"] == 1.0), None)
        c.note(f"100% train accuracy first at epoch {first}")
        assert first is not None and first <= 200

        plain = classify_forward(seqs, table, params)
        kept = classify_forward(seqs, table, params, "train", nn.make_rng(1), 1.0, 1.0)
        l0, g0 = loss_and_grads(seqs, labels, table, params)
        l1, g1 = loss_and_grads(seqs, labels, table, params, True, nn.make_rng(2), 1.0, 1.0)
        assert plain.tobytes() == kept.tobytes()
        assert l0 == l1 and all(g0[k].tobytes() == g1[k].tobytes() for k in g0)


def test_criterion_8_metric_oracle(criterion):
    with criterion(8, "macro-F1 worked examples") as c:
        got = [macro_f1([0, 1, 0, 1], [0, 1, 0, 1]),
               macro_f1([0, 0, 1, 1], [0, 1, 0, 1]),
               macro_f1([0, 1], [0, 0])]
        c.note(f"{got[0]}, {got[1]}, {got[2]}")
        # hand confusion matrices: perfect; P=R=1/2 per class; F1_pos = 2/3, F1_neg = 0
        assert got == [1.0, 0.5, (2 / 3 + 0.0) / 2]


def test_criterion_9_persistence(criterion, tmp_path):
    with criterion(9, "save/load round trips are bitwise exact") as c:
        rng = nn.make_rng(9)
        C = make_corpus(n_tweets=120, seed=9)
        vocab = build_vocab(C.tweets, 1)
        params, _ = train(C.tweets, vocab, C.lexicon(),
                          TrainConfig(dim=7, hidden=5, epochs=1, lr=0.5, init_scale=0.1))
        params.embeddings[1] = rng.normal(size=7) * 1e-300  # subnormal-range values survive too
        save_embeddings(params.embeddings, vocab, tmp_path / "e.txt")
        table, v2 = load_embeddings(tmp_path / "e.txt")
        emb_ok = table.tobytes() == params.embeddings.tobytes() and v2 == vocab

        save_checkpoint(params, tmp_path / "m.ckpt")
        back, _ = load_checkpoint(tmp_path / "m.ckpt")
        ck_ok = all(getattr(back, n).tobytes() == getattr(params, n).tobytes() for n in TENSORS)

        seqs = [vocab.encode(tw.tokens) for tw in C.tweets[:40]]
        clf, _ = train_classifier(seqs, [tw.label for tw in C.tweets[:40]], params.embeddings,
                                  ClassifierConfig(epochs=1, filters=4, hidden=8))
        save_classifier(clf, tmp_path / "c.ckpt")
        cback = load_classifier(tmp_path / "c.ckpt")
        clf_ok = all(cback.tensors[k].tobytes() == clf.tensors[k].tobytes() for k in clf.tensors)
        c.note(f"embeddings {emb_ok}, model checkpoint {ck_ok}, classifier checkpoint {clf_ok}")
        assert emb_ok and ck_ok and clf_ok
