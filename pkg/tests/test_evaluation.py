import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mswe.classifier import ClassifierConfig
from mswe.corpus import NEGATIVE as N
from mswe.corpus import POSITIVE as P
from mswe.evaluation import (DEFAULT_BETAS, SweepResult, check_sweep_csv, confusion, kfold_split,
                             macro_f1, summary_table, sweep_beta)
from mswe.synthetic import make_corpus
from mswe.trainer import TrainConfig, TrainingError


def test_macro_f1_worked_examples():
    assert macro_f1([P, N, P], [P, N, P]) == 1.0
    assert macro_f1([P, P, N, N], [P, N, P, N]) == 0.5
    assert macro_f1([P, N], [P, P]) == 1 / 3


def test_confusion_counts():
    c = confusion([P, P, N, N], [P, N, P, N])
    assert (c[P].tp, c[P].fp, c[P].fn, c[P].tn) == (1, 1, 1, 1)
    assert c[P].precision == c[P].recall == c[P].f1 == 0.5


def test_zero_over_zero_is_zero():
    c = confusion([P, P], [P, P])
    assert c[N].precision == 0 and c[N].recall == 0 and c[N].f1 == 0
    assert macro_f1([P, P], [P, P]) == 0.5


def test_macro_f1_errors():
    with pytest.raises(ValueError, match="length"):
        macro_f1([P, N], [P])
    with pytest.raises(ValueError):
        macro_f1([], [])


labels = st.lists(st.sampled_from([P, N]), min_size=1, max_size=40)


@given(labels.flatmap(lambda g: st.tuples(st.just(g), st.lists(st.sampled_from([P, N]),
                                                               min_size=len(g), max_size=len(g)))))
def test_macro_f1_properties(pair):
    gold, pred = np.array(pair[0]), np.array(pair[1])
    f = macro_f1(gold, pred)
    assert 0.0 <= f <= 1.0
    assert macro_f1(1 - gold, 1 - pred) == pytest.approx(f, abs=1e-15)
    counts = confusion(gold, pred)
    for c in counts.values():
        assert c.tp + c.fp + c.fn + c.tn == len(gold)


def test_kfold_balanced_example():
    y = np.array([P] * 10 + [N] * 10)
    folds = kfold_split(y, 10, seed=0)
    assert len(folds) == 10
    for _, test in folds:
        assert sorted(y[test].tolist()) == [P, N]


@given(st.lists(st.sampled_from([P, N]), min_size=12, max_size=60), st.integers(2, 5),
       st.integers(0, 100))
def test_kfold_partition(ys, k, seed):
    y = np.array(ys)
    if min(np.bincount(y)[np.unique(y)]) < k:  # only classes that occur count
        with pytest.raises(ValueError):
            kfold_split(y, k, seed)
        return
    folds = kfold_split(y, k, seed)
    tests = np.concatenate([t for _, t in folds])
    assert sorted(tests.tolist()) == list(range(len(y)))
    for train, test in folds:
        assert not set(train) & set(test)
        assert len(train) + len(test) == len(y)
    for c in (P, N):
        sizes = [int((y[t] == c).sum()) for _, t in folds]
        assert max(sizes) - min(sizes) <= 1
    again = kfold_split(y, k, seed)
    assert all(np.array_equal(a[1], b[1]) for a, b in zip(folds, again))


def test_kfold_errors():
    with pytest.raises(ValueError):
        kfold_split([P, N], 1)
    with pytest.raises(ValueError):
        kfold_split([P, N, P], 4)
    with pytest.raises(ValueError):
        kfold_split([P, P, P, N], 2)


@pytest.fixture(scope="module")
def tiny_sweep_inputs():
    C = make_corpus(n_tweets=160, n_lexicon=10, n_neutral=15, seed=4)
    tr, dev, _ = C.split(40, 0)
    return tr, C.lexicon(), C.gold_tweets(range(len(tr))), dev


def _cfgs():
    return (TrainConfig(dim=6, hidden=4, epochs=1, lr=0.5, init_scale=0.1, seed=3),
            ClassifierConfig(filters=3, hidden=8, epochs=2, seed=3))


def test_sweep_rows_endpoints_and_determinism(tiny_sweep_inputs):
    tr, lex, clf_train, dev = tiny_sweep_inputs
    tc, cc = _cfgs()
    a = sweep_beta(tr, lex, clf_train, dev, [1.0, 0.0, 0.5], tc, cc, seeds=[3, 4])
    assert len(a.rows) == 3 * 2
    assert [r[0] for r in a.rows] == [0.0, 0.0, 0.5, 0.5, 1.0, 1.0]
    b = sweep_beta(tr, lex, clf_train, dev, [1.0, 0.0, 0.5], tc, cc, seeds=[3, 4])
    assert a.to_csv() == b.to_csv()
    parsed = check_sweep_csv(a.to_csv())
    assert parsed == [(float(x), int(s), float(f)) for x, s, f in a.rows]
    assert a.to_csv().splitlines()[0] == "beta,seed,macro_f1"


def test_sweep_rejects_bad_betas(tiny_sweep_inputs):
    tr, lex, clf_train, dev = tiny_sweep_inputs
    tc, cc = _cfgs()
    with pytest.raises(ValueError):
        sweep_beta(tr, lex, clf_train, dev, [0.0, 1.2], tc, cc)
    with pytest.raises(ValueError):
        sweep_beta(tr, lex, clf_train, dev, [0.5, 0.5], tc, cc)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_sweep_names_failing_beta(tiny_sweep_inputs):
    tr, lex, clf_train, dev = tiny_sweep_inputs
    tc, cc = _cfgs()
    tc.lr, tc.init_scale = 1e300, 1.0
    with pytest.raises(TrainingError, match="beta=0.0"):
        sweep_beta(tr, lex, clf_train, dev, [0.0], tc, cc)


def test_default_betas():
    assert DEFAULT_BETAS == (0.0, 0.2, 0.4, 0.5, 0.6, 0.8, 1.0)


def test_check_sweep_csv_rejects_garbage():
    with pytest.raises(ValueError):
        check_sweep_csv("b,s,f\n0,0,0.5\n")
    with pytest.raises(ValueError):
        check_sweep_csv("beta,seed,macro_f1\n0.5,0,1.5\n")
    with pytest.raises(ValueError):
        check_sweep_csv("beta,seed,macro_f1\n0.5,0,0.5\n0.2,0,0.5\n")


def test_sweep_result_best_and_score():
    r = SweepResult([(0.0, 0, 0.7), (0.5, 0, 0.9), (1.0, 0, 0.9)])
    assert r.best() == (0.5, 0, 0.9)
    assert r.score(1.0) == 0.9
    with pytest.raises(KeyError):
        r.score(0.3)


def test_summary_table():
    out = summary_table([("MSWE", "synthetic", 0.8575)])
    assert "MSWE" in out and "85.75" in out and "Macro-F1" in out
