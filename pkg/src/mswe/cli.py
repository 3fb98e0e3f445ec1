"""Command-line entry point: ``mswe <command> ...``.

Exit codes: 0 success, 2 usage/config/input error, 3 numerical abort,
4 query error (unknown word).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import classifier as clf
from .config import CLF_PREFIX, ConfigError, dump_config, load_config
from .corpus import (UNK, CorpusError, MarkerSet, build_vocab, load_lexicon,
                     prepare, read_labeled, tokenize, write_labeled)
from .evaluation import check_sweep_csv, macro_f1, summary_table, sweep_beta
from .model import EmbeddingFormatError, load_embeddings, nearest_neighbors, save_embeddings
from .nn import NonFiniteError
from .persist import CheckpointError
from .synthetic import make_corpus, write_bundle
from .trainer import TrainingError, train

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_QUERY = 0, 2, 3, 4
log = logging.getLogger("mswe")


class QueryError(LookupError):
    pass


def _config(args):
    return load_config(getattr(args, "config", None), getattr(args, "set", None) or ())


def cmd_prepare(args) -> int:
    try:
        lines = Path(args.input).read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise CorpusError(f"cannot read {args.input}: {e}") from e
    markers = MarkerSet.load(args.markers) if args.markers else MarkerSet.default()
    tweets, st = prepare(lines, markers, args.window)
    write_labeled(tweets, args.out)
    print(f"{'':<12}{'Positive':>10}{'Negative':>10}{'Total':>10}")
    print(f"{'Kept':<12}{st.by_label['positive']:>10}{st.by_label['negative']:>10}{st.kept:>10}")
    print(f"lines={st.lines} labeled={st.labeled} unlabeled={st.unlabeled} "
          f"conflicts={st.conflicts} duplicates={st.duplicates} too_short={st.too_short} "
          f"kept={st.kept} dropped={st.lines - st.kept}")
    return EXIT_OK


def cmd_train_embeddings(args) -> int:
    cfg = _config(args)
    tc = cfg.train_config()
    corpus = read_labeled(cfg.path("corpus", must_exist=True))
    lex = load_lexicon(cfg.path("lexicon_pos", must_exist=True), cfg.path("lexicon_neg", must_exist=True))
    vocab = build_vocab(corpus, tc.min_count)
    ckpt = cfg.path("checkpoint") if cfg.get("checkpoint") else None
    params, report = train(corpus, vocab, lex, tc, checkpoint_path=ckpt)
    save_embeddings(params.embeddings, vocab, cfg.path("embeddings"))
    if cfg.get("report"):
        rep = report.to_dict()
        rep.pop("wall_time")
        cfg.path("report").write_text(json.dumps(rep, indent=2, sort_keys=True) + "\n")
    print(f"tweets={report.tweets} skipped={report.tweets_skipped} "
          f"windows/epoch={report.windows_per_epoch} vocab={len(vocab)} "
          f"final_loss={report.losses()[-1] if report.epochs else float('nan'):.6f} "
          f"time={report.wall_time:.1f}s")
    return EXIT_OK


def _load_table(cfg):
    table, vocab = load_embeddings(cfg.path("embeddings", must_exist=True))
    dim = cfg.get("dim")
    if dim is not None and dim != table.shape[1]:
        raise ConfigError(f"embeddings file has dimension {table.shape[1]}, config says dim={dim}")
    return table, vocab


def cmd_train_classifier(args) -> int:
    cfg = _config(args)
    cc = cfg.classifier_config()
    table, vocab = _load_table(cfg)
    data = read_labeled(cfg.path("train_data", must_exist=True))
    seqs = [vocab.encode(tw.tokens) for tw in data]
    params, hist = clf.train_classifier(seqs, [tw.label for tw in data], table, cc)
    clf.save_classifier(params, cfg.path("classifier"), cc)
    last = hist[-1] if hist else {"loss": float("nan"), "train_acc": float("nan")}
    print(f"examples={len(data)} epochs={cc.epochs} loss={last['loss']:.6f} "
          f"train_acc={last['train_acc']:.4f}")
    return EXIT_OK


def _read_predict_input(path):
    texts = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        lab, sep, rest = line.partition("\t")
        texts.append(rest if sep and lab.strip() in ("0", "1") else line)
    return texts


def cmd_predict(args) -> int:
    cfg = _config(args)
    table, vocab = _load_table(cfg)
    params = clf.load_classifier(cfg.path("classifier", must_exist=True))
    if params.d != table.shape[1]:
        raise ConfigError(f"classifier expects dimension {params.d}, embeddings have {table.shape[1]}")
    src = cfg.path("predict_input") if cfg.get("predict_input") else cfg.path("test_data")
    if not src.exists():
        raise ConfigError(f"prediction input does not exist: {src}")
    seqs = [vocab.encode(tokenize(t)) for t in _read_predict_input(src)]
    probs = clf.predict_proba(seqs, table, params)
    labels = clf.predict(seqs, table, params) if seqs else []
    with open(cfg.path("predictions"), "w", encoding="utf-8") as f:
        for i, (lab, p) in enumerate(zip(labels, probs)):
            f.write(f"{i}\t{lab}\t{p[0]:.17g}\n")
    print(f"predicted={len(seqs)}")
    return EXIT_OK


def _read_predictions(path):
    out = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3 or parts[1] not in ("0", "1"):
            raise ConfigError(f"{path}:{lineno}: expected 'id<TAB>label<TAB>p_pos'")
        out.append(int(parts[1]))
    return out


def cmd_eval(args) -> int:
    cfg = _config(args)
    gold = [tw.label for tw in read_labeled(cfg.path("test_data", must_exist=True))]
    pred = _read_predictions(cfg.path("predictions", must_exist=True))
    if len(gold) != len(pred):
        raise ConfigError(f"gold has {len(gold)} items, predictions {len(pred)}")
    f1 = macro_f1(gold, pred)
    model = cfg.get("model_name", "MSWE")
    dataset = cfg.get("dataset", Path(cfg.path("test_data")).stem)
    print(f"macro_f1={f1:.6f}")
    print(summary_table([(model, dataset, f1)]))
    if cfg.get("csv"):
        with open(cfg.path("csv"), "w", encoding="utf-8") as f:
            f.write("model,dataset,macro_f1\n")
            f.write(f"{model},{dataset},{f1!r}\n")
    return EXIT_OK


def cmd_sweep_beta(args) -> int:
    cfg = _config(args)
    if args.betas is not None:
        try:
            betas = tuple(float(b) for b in args.betas.split(",") if b.strip())
        except ValueError:
            raise ConfigError(f"bad beta list {args.betas!r}") from None
    else:
        betas = cfg.betas()
    if any(not 0.0 <= b <= 1.0 for b in betas):
        raise ConfigError(f"betas must lie in [0, 1], got {betas}")
    corpus = read_labeled(cfg.path("corpus", must_exist=True))
    lex = load_lexicon(cfg.path("lexicon_pos", must_exist=True), cfg.path("lexicon_neg", must_exist=True))
    clf_train = read_labeled(cfg.path("train_data", must_exist=True))
    dev = read_labeled(cfg.path("dev_data", must_exist=True))
    res = sweep_beta(corpus, lex, clf_train, dev, betas, cfg.train_config(),
                     cfg.classifier_config(), cfg.get("seeds"))
    text = res.to_csv()
    check_sweep_csv(text)
    cfg.path("csv").write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return EXIT_OK


def cmd_neighbors(args) -> int:
    table, vocab = load_embeddings(args.embeddings)
    if args.word == UNK or args.word not in vocab:
        raise QueryError(f"word not in vocabulary: {args.word!r}")
    if args.k < 0:
        raise ConfigError("k must be >= 0")
    for w, c in nearest_neighbors(args.word, min(args.k, len(vocab) - 2), table, vocab):
        print(f"{w}\t{c:.6f}")
    return EXIT_OK


SYNTH_CONFIG = {
    "corpus": "corpus.tsv", "lexicon_pos": "lexicon-pos.txt", "lexicon_neg": "lexicon-neg.txt",
    "markers": "markers.ini", "embeddings": "embeddings.txt", "checkpoint": "mswe.ckpt",
    "report": "train-report.json", "classifier": "classifier.ckpt", "train_data": "train.tsv",
    "dev_data": "dev.tsv", "test_data": "test.tsv", "predictions": "predictions.tsv",
    "csv": "results.csv",
}


def cmd_make_synthetic(args) -> int:
    corpus = make_corpus(args.tweets + args.dev + args.test, noise=args.noise, seed=args.seed)
    out = Path(args.out)
    paths = write_bundle(corpus, out, args.dev, args.test)
    (out / "markers.ini").write_text(MarkerSet.default().dump(), encoding="utf-8")
    tweets, st = prepare(Path(paths["raw"]).read_text(encoding="utf-8").splitlines(),
                         MarkerSet.default(), 3)
    write_labeled(tweets, out / "corpus.tsv")
    values = dict(SYNTH_CONFIG)
    values.update(DESK_PRESET)
    (out / "mswe.conf").write_text(
        "# desk-scale run on the synthetic corpus\n" + dump_config(values), encoding="utf-8")
    print(f"wrote {out} ({st.kept} distant-labeled tweets, {args.dev} dev, {args.test} test)")
    return EXIT_OK


# learning rate and init scale that leave the small-init plateau within 5 epochs
# of a 2000-tweet corpus; everything else stays at the defaults
DESK_PRESET = {"lr": 0.7, "init_scale": 0.1, "epochs": 5, CLF_PREFIX + "epochs": 10}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mswe", description="Sentiment-enriched word embeddings.")
    p.add_argument("-v", "--verbose", action="store_true", help="progress logs on stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def with_config(sp):
        sp.add_argument("-c", "--config", help="key = value config file")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
        return sp

    sp = sub.add_parser("prepare", help="distant-label, clean and deduplicate raw tweets")
    sp.add_argument("input")
    sp.add_argument("--markers")
    sp.add_argument("--out", required=True)
    sp.add_argument("--window", type=int, default=3)
    sp.set_defaults(func=cmd_prepare)

    with_config(sub.add_parser("train-embeddings")).set_defaults(func=cmd_train_embeddings)
    with_config(sub.add_parser("train-classifier")).set_defaults(func=cmd_train_classifier)
    with_config(sub.add_parser("predict")).set_defaults(func=cmd_predict)
    with_config(sub.add_parser("eval")).set_defaults(func=cmd_eval)
    sp = with_config(sub.add_parser("sweep-beta"))
    sp.add_argument("--betas", help="comma list, default 0.0,0.2,0.4,0.5,0.6,0.8,1.0")
    sp.set_defaults(func=cmd_sweep_beta)

    sp = sub.add_parser("neighbors")
    sp.add_argument("embeddings")
    sp.add_argument("word")
    sp.add_argument("-k", type=int, default=10)
    sp.set_defaults(func=cmd_neighbors)

    sp = sub.add_parser("make-synthetic", help="write the synthetic corpus bundle and config")
    sp.add_argument("out")
    sp.add_argument("--tweets", type=int, default=2000)
    sp.add_argument("--dev", type=int, default=500)
    sp.add_argument("--test", type=int, default=500)
    sp.add_argument("--noise", type=float, default=0.1)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_make_synthetic)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s", stream=sys.stderr)
    if args.command == "train-embeddings":
        logging.getLogger("mswe.trainer").setLevel(logging.INFO)
    try:
        return args.func(args)
    except QueryError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_QUERY
    except (TrainingError, clf.ClassifierError, NonFiniteError) as e:
        print(f"error: numerical abort: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, CorpusError, EmbeddingFormatError, CheckpointError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
