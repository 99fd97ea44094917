"""Command-line entry point: ``drugscreen <command> ...``.

Every option may also come from an INI file given with ``--config``. The
section is named after the command (``[train]``, ``[mine]`` ...), with
shared file locations under ``[paths]`` and the seed under ``[global]``.
Command-line values win over the file, which wins over built-in defaults.

Exit codes
----------
0 success, 2 usage error, 3 configuration error, 4 invalid input data,
5 file system error, 6 training failure.
"""

import argparse
import configparser
import csv
import logging
import sys
import time
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from . import corpus, evaluation, rulemine
from .baselines import MeanEmbeddingVectorizer, load_baseline, save_baseline, train_linear, train_tree
from .cnn import TextCNNClassifier, TrainingError
from .cnn.training import CHECKPOINT_MAGIC
from .container import ContainerError
from .embed import EmbeddingError, load_vectors
from .lexicon import LexiconError, default_lexicon, load_lexicon
from .synthgen import LabeledText, SynthConfig, balance_report, generate_synthetic

logger = logging.getLogger("drugscreen")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_DATA = 4
EXIT_IO = 5
EXIT_TRAINING = 6


class ConfigError(Exception):
    pass


def _int_tuple(s):
    return tuple(int(x) for x in str(s).replace(" ", "").split(",") if x)


def _float_list(s):
    return [float(x) for x in str(s).replace(" ", "").split(",") if x]


def _bool(s):
    if isinstance(s, bool):
        return s
    v = str(s).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _weight(s):
    return s if s == "balanced" else float(s)


# (flag, converter, default, help); dest is derived from the flag
_PATHS = {
    "lexicon": ("--lexicon", str, None, "lexicon CSV (default: shipped file)"),
    "vectors": ("--vectors", str, None, "word-vector text file"),
    "stopwords": ("--stopwords", str, None, "stopword list (default: shipped file)"),
    "contractions": ("--contractions", str, None, "contraction table (default: shipped file)"),
}

_OPTIONS = {
    "clean": [("--funnel", str, None, "write the funnel CSV here"),
              "lexicon", "stopwords", "contractions"],
    "attrs": ["lexicon"],
    "sets": [("--sample-size", int, 1000, "size of the random third set"), "lexicon"],
    "synth": [("--m", int, 4, "variants per source"),
              ("--balance", str, None, "write class balance CSV here"), "lexicon"],
    "train": [("--epochs", int, 10, None), ("--learning-rate", float, 1e-4, None),
              ("--batch-size", int, 64, None), ("--window-length", int, 50, None),
              ("--filter-heights", _int_tuple, (3, 4, 5, 6, 7), "comma-separated"),
              ("--n-filters", int, 64, "filters per height"),
              ("--pos-weight", _weight, "balanced", "positive-class weight or 'balanced'"),
              ("--stride", int, 25, None), ("--pad", str, "zero", "zero or random"),
              ("--threshold", float, 0.5, None),
              ("--validation-fraction", float, 0.0, None),
              ("--dtype", str, "float64", "float64 or float32"),
              ("--trace", str, None, "write per-epoch CSV here"), "vectors"],
    "predict": ["vectors"],
    "baseline": [("--kind", str, "svm", "svm, logistic or tree"),
                 ("--pca-dim", int, 100, "PCA dimension"),
                 ("--pooling", str, "mean", "mean or flatten"),
                 ("--alpha", float, 1e-3, "L2 strength for linear models"),
                 ("--max-depth", int, None, "tree depth limit"),
                 ("--min-leaf", int, 1, "tree minimum leaf size"), "vectors"],
    "eval": [("--name", str, "model", "row name in the metrics CSV"),
             ("--roc", str, None, "write ROC points CSV here"),
             ("--confusion", str, None, "write the confusion table CSV here")],
    "mine": [("--min-support", float, 0.0003, None), ("--min-confidence", float, 0.3, None),
             ("--max-len", int, 5, None), ("--weighted", _bool, False, "weight HITS edges by count"),
             ("--input-format", str, "auto", "records, transactions or auto"), "lexicon"],
    "sweep": [("--supports", _float_list, [0.0003, 0.001, 0.003, 0.01], "comma-separated grid"),
              ("--confidences", _float_list, [0.3, 0.5, 0.7, 0.9], "comma-separated grid"),
              ("--max-len", int, 5, None),
              ("--input-format", str, "auto", "records, transactions or auto"), "lexicon"],
    "kappa": [],
    "report": [],
}

_POSITIONAL = {
    "clean": [("input", "raw JSONL"), ("output", "cleaned, filtered JSONL")],
    "attrs": [("input", "cleaned JSONL"), ("output", "JSONL with keyword counts")],
    "sets": [("input", "attributed JSONL"), ("outdir", "directory for set1/2/3.jsonl")],
    "synth": [("input", "labelled JSONL"), ("output", "originals plus synthetic JSONL")],
    "train": [("input", "labelled JSONL"), ("checkpoint", "output checkpoint")],
    "predict": [("model", "CNN checkpoint or baseline model"), ("input", "JSONL with cleaned text"),
                ("output", "JSONL with classification and score")],
    "baseline": [("input", "labelled JSONL"), ("model", "output model file")],
    "eval": [("input", "JSONL with label and score"), ("output", "metrics CSV")],
    "mine": [("input", "classified JSONL or transactions file"), ("outdir", "output directory")],
    "sweep": [("input", "classified JSONL or transactions file"), ("output", "sweep CSV")],
    "kappa": [("input", "ratings CSV: item column then one column per rater"),
              ("output", "kappa CSV")],
    "report": [("inputs", "metrics CSVs"), ("output", "combined CSV")],
}

_HELP = {
    "clean": "clean raw records and apply the row filters",
    "attrs": "add keyword-count attributes",
    "sets": "split records into the three labelling candidate sets",
    "synth": "add keyword-substituted synthetic texts",
    "train": "train the convolutional classifier",
    "predict": "classify records with a CNN checkpoint or baseline model",
    "baseline": "fit a PCA + SVM/logistic/tree baseline",
    "eval": "confusion matrix, metrics and ROC from scored records",
    "mine": "association rules and HITS scores from classified records",
    "sweep": "rule counts over a support x confidence grid",
    "kappa": "Fleiss' kappa for a ratings table",
    "report": "merge metrics CSVs into one comparison table",
}


def _spec(item):
    return _PATHS[item] if isinstance(item, str) else item


def _dest(flag):
    return flag.lstrip("-").replace("-", "_")


def build_parser():
    p = argparse.ArgumentParser(prog="drugscreen", description=__doc__.split("\n")[0])
    p.add_argument("--config", help="INI configuration file")
    p.add_argument("--seed", type=int, default=None, help="global random seed (default 0)")
    p.add_argument("--threads", type=int, default=None,
                   help="BLAS/OpenMP thread limit (default 1, for reproducibility)")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True, metavar="command")
    for cmd, opts in _OPTIONS.items():
        sp = sub.add_parser(cmd, help=_HELP[cmd])
        for name, help_ in _POSITIONAL[cmd]:
            sp.add_argument(name, nargs="+" if name == "inputs" else None, help=help_)
        for item in opts:
            flag, conv, default, help_ = _spec(item)
            suffix = f" (default: {default})" if default is not None else ""
            sp.add_argument(flag, type=conv, default=None, help=(help_ or "") + suffix)
    return p


def _load_config(path):
    cfg = configparser.ConfigParser()
    if path is None:
        return cfg
    try:
        with open(path, encoding="utf-8") as fh:
            cfg.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from None
    return cfg


def resolve(args, cfg):
    """Fill unset options from the config file, then from defaults."""
    for item in _OPTIONS[args.command]:
        flag, conv, default, _ = _spec(item)
        dest = _dest(flag)
        if getattr(args, dest) is not None:
            continue
        section = "paths" if isinstance(item, str) else args.command
        raw = cfg.get(section, dest, fallback=None)
        if raw is None:
            raw = cfg.get(section, dest.replace("_", "-"), fallback=None)
        if raw is None:
            setattr(args, dest, default)
            continue
        try:
            setattr(args, dest, conv(raw))
        except ValueError as exc:
            raise ConfigError(f"[{section}] {dest}: {exc}") from None
    for name, default in (("seed", 0), ("threads", 1)):
        if getattr(args, name) is None:
            raw = cfg.get("global", name, fallback=None)
            try:
                setattr(args, name, default if raw is None else int(raw))
            except ValueError:
                raise ConfigError(f"[global] {name}: not an integer: {raw!r}") from None
    return args


def _lexicon(args):
    return default_lexicon() if args.lexicon is None else load_lexicon(args.lexicon)


def _vectors(args):
    if args.vectors is None:
        raise ConfigError("a word-vector file is required (--vectors or [paths] vectors)")
    return load_vectors(args.vectors)


def _read_dicts(path):
    def check(d):
        if not isinstance(d, dict):
            raise corpus.CorpusError("expected a JSON object")
        return d
    return list(corpus.read_jsonl(path, check))


def _write_csv(path, header, rows):
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def cmd_clean(args):
    cleaner = corpus.TextCleaner(
        stopwords=None if args.stopwords is None else corpus.load_stopwords(args.stopwords),
        contractions=None if args.contractions is None else corpus.load_contractions(args.contractions),
    ).fit()
    lexicon = _lexicon(args)
    start = time.perf_counter()

    def cleaned():
        for rec in corpus.read_jsonl(args.input):
            rec.text = cleaner.clean(rec.original_text)
            yield rec

    kept, report = corpus.filter_rows(cleaned(), lexicon)
    n = corpus.write_jsonl(args.output, kept)
    elapsed = time.perf_counter() - start
    logger.info("clean: %d in, %d kept, %.0f records/sec", report.input, n,
                report.input / elapsed if elapsed > 0 else float("inf"))
    if args.funnel:
        report.write_csv(args.funnel)


def cmd_attrs(args):
    lexicon = _lexicon(args)
    recs = (corpus.derive_attributes(r, lexicon) for r in corpus.read_jsonl(args.input))
    n = corpus.write_jsonl(args.output, recs)
    logger.info("attrs: %d records", n)


def cmd_sets(args):
    recs = list(corpus.read_jsonl(args.input))
    lexicon = _lexicon(args)
    recs = [r if r.hits is not None else corpus.derive_attributes(r, lexicon) for r in recs]
    sets = corpus.build_candidate_sets(recs, args.sample_size, seed=args.seed)
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    for name in ("set1", "set2", "set3"):
        n = corpus.write_jsonl(out / f"{name}.jsonl", getattr(sets, name))
        logger.info("sets: %s has %d records", name, n)


def cmd_synth(args):
    sources = list(corpus.read_jsonl(args.input, LabeledText.from_dict))
    batch = generate_synthetic(sources, SynthConfig(m=args.m, seed=args.seed), _lexicon(args))
    corpus.write_jsonl(args.output, batch.combined)
    report = balance_report(batch)
    for name, b in report.items():
        logger.info("synth: %s positive=%d negative=%d ratio=%s", name, b.positive, b.negative, b.ratio)
    if args.balance:
        _write_csv(args.balance, ("set", "positive", "negative", "total", "ratio"),
                   [(k, b.positive, b.negative, b.total, "" if b.ratio is None else repr(b.ratio))
                    for k, b in report.items()])


def _labelled(path):
    items = list(corpus.read_jsonl(path, LabeledText.from_dict))
    if not items:
        raise corpus.CorpusError(f"{path}: no labelled records")
    return [t.tokens for t in items], np.array([t.label for t in items])


def cmd_train(args):
    texts, labels = _labelled(args.input)
    est = TextCNNClassifier(
        vectors=_vectors(args), window_length=args.window_length,
        filter_heights=args.filter_heights, n_filters=args.n_filters,
        pos_weight=args.pos_weight, learning_rate=args.learning_rate,
        batch_size=args.batch_size, epochs=args.epochs, threshold=args.threshold,
        stride=args.stride, pad=args.pad, validation_fraction=args.validation_fraction,
        dtype=args.dtype, random_state=args.seed,
    ).fit(texts, labels)
    est.save(args.checkpoint)
    if args.trace:
        _write_csv(args.trace, ("epoch", "loss", "accuracy", "val_accuracy"),
                   [(s.epoch, repr(s.loss), repr(s.accuracy),
                     "" if s.val_accuracy is None else repr(s.val_accuracy)) for s in est.trace_])
    logger.info("train: %d texts, final loss %s", len(texts),
                est.trace_[-1].loss if est.trace_ else "n/a")


def _magic(path):
    with open(path, "rb") as fh:
        return fh.readline().rstrip(b"\n").decode("utf-8", "replace")


def cmd_predict(args):
    table = _vectors(args)
    rows = _read_dicts(args.input)
    texts = [(d.get("text") or "").split() for d in rows]
    if _magic(args.model) == CHECKPOINT_MAGIC:
        est = TextCNNClassifier.load(args.model, table)
        scores = est.decision_function(texts)
        labels = (scores >= est.config_.threshold).astype(int)
    else:
        vec, model, kind = load_baseline(args.model, table)
        feats = vec.transform(texts)
        labels = model.predict(feats)
        scores = (model.predict_proba(feats)[:, 1] if hasattr(model, "predict_proba")
                  else model.decision_function(feats))
    for d, lab, s in zip(rows, labels, scores):
        d["classification"] = (corpus.Classification.POSITIVE if lab else
                               corpus.Classification.NEGATIVE).value
        d["score"] = float(s)
    corpus.write_jsonl(args.output, rows)
    logger.info("predict: %d records, %d positive", len(rows), int(np.sum(labels)))


def cmd_baseline(args):
    texts, labels = _labelled(args.input)
    vec = MeanEmbeddingVectorizer(_vectors(args), n_components=args.pca_dim,
                                  pooling=args.pooling, random_state=args.seed).fit()
    feats = vec.transform(texts)
    if args.kind in ("svm", "logistic"):
        model = train_linear(feats, labels, args.kind, alpha=args.alpha)
    elif args.kind == "tree":
        model = train_tree(feats, labels, max_depth=args.max_depth, min_leaf=args.min_leaf)
    else:
        raise ConfigError(f"--kind must be svm, logistic or tree, got {args.kind!r}")
    save_baseline(args.model, vec, model)
    acc = float(np.mean(model.predict(feats) == labels))
    logger.info("baseline: %s on %d texts, training accuracy %.4f", args.kind, len(texts), acc)


def cmd_eval(args):
    rows = _read_dicts(args.input)
    try:
        labels = [int(d["label"]) for d in rows]
        preds = [int(d["classification"] == corpus.Classification.POSITIVE.value) for d in rows]
        scores = [float(d["score"]) for d in rows]
    except (KeyError, TypeError, ValueError) as exc:
        raise corpus.CorpusError(f"{args.input}: records need label, classification and score ({exc})") from None
    cm = evaluation.confusion_from_predictions(labels, preds)
    m = evaluation.metrics(cm)
    if len(set(labels)) == 2:
        curve, m["auc"] = evaluation.roc_auc(scores, labels)
        if args.roc:
            evaluation.write_roc_csv(args.roc, curve)
    else:
        logger.warning("eval: single-class labels, AUC left blank")
        m["auc"] = None
    evaluation.write_metrics_csv(args.output, [(args.name, m)])
    if args.confusion:
        pc = cm.per_class()
        _write_csv(args.confusion, ("class", "correct", "mislabelled"),
                   [(k, v["correct"], v["mislabelled"]) for k, v in pc.items()])
    logger.info("eval: %s", {k: v for k, v in m.items()})


def _transactions(args):
    fmt = args.input_format
    if fmt == "auto":
        fmt = "records" if args.input.endswith(".jsonl") else "transactions"
    if fmt == "transactions":
        tx = rulemine.read_transactions(args.input)
        return tx, rulemine.tag_stats(tx)
    if fmt != "records":
        raise ConfigError(f"--input-format must be records, transactions or auto, got {fmt!r}")
    return rulemine.build_transactions(corpus.read_jsonl(args.input), _lexicon(args))


def cmd_mine(args):
    tx, stats = _transactions(args)
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    rulemine.write_transactions(out / "transactions.txt", tx)
    rulemine.write_tag_stats_csv(out / "tag_stats.csv", stats)
    rules = rulemine.mine_rules(tx, args.min_support, args.min_confidence, args.max_len)
    rulemine.write_rules_csv(out / "rules.csv", rules)
    if rules:
        rulemine.write_hits_csv(out / "hits.csv", rulemine.hits(rules, weighted=args.weighted))
    else:
        logger.warning("mine: no rules at these thresholds; hits.csv not written")
    logger.info("mine: %d transactions, %d rules", len(tx), len(rules))


def cmd_sweep(args):
    tx, _ = _transactions(args)
    sweep = rulemine.sensitivity_sweep(tx, args.supports, args.confidences, args.max_len)
    rulemine.write_sweep_csv(args.output, sweep)


def cmd_kappa(args):
    with open(args.input, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if len(rows) < 2 or len(rows[0]) < 3:
        raise corpus.CorpusError(f"{args.input}: need a header and item + >=2 rater columns")
    width = len(rows[0])
    bad = [i + 2 for i, r in enumerate(rows[1:]) if len(r) != width]
    if bad:
        raise corpus.CorpusError(f"{args.input}: wrong column count on line(s) {bad[:5]}")
    ratings = [[x.strip() for x in r[1:]] for r in rows[1:]]
    res = evaluation.fleiss_kappa(evaluation.rating_counts(ratings))
    _write_csv(args.output, ("kappa", "p_bar", "p_e", "items", "raters"),
               [(repr(res.kappa), repr(res.p_bar), repr(res.p_e), len(ratings), width - 1)])
    logger.info("kappa: %.4f", res.kappa)


def cmd_report(args):
    rows = []
    for path in args.inputs:
        rows.extend(evaluation.read_metrics_csv(path))
    evaluation.write_metrics_csv(args.output, rows)


_COMMANDS = {name[4:]: fn for name, fn in globals().items() if name.startswith("cmd_")}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose + 1, 2)
    logging.basicConfig(level=level, stream=sys.stderr,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        resolve(args, _load_config(args.config))
        with threadpool_limits(limits=args.threads):
            _COMMANDS[args.command](args)
    except ConfigError as exc:
        logger.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except TrainingError as exc:
        logger.error("training failed: %s", exc)
        return EXIT_TRAINING
    except (corpus.CorpusError, LexiconError, EmbeddingError, ContainerError, ValueError) as exc:
        logger.error("invalid input: %s", exc)
        return EXIT_DATA
    except OSError as exc:
        logger.error("file error: %s", exc)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
