"""Command-line entry point.

Every analysis command writes its tables through :func:`emit_report`, along
with a ``manifest.json`` that ``report`` can replay to regenerate the same
files byte for byte.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from pathlib import Path

from . import __version__
from .corpstats import (
    DEFAULT_FRACTIONS,
    discriminativeness_table,
    hashtag_table,
    length_summary,
    length_t_test,
    pos_by_length,
    pos_proportions,
    pos_t_test,
    rank_frequency,
    read_pos_annotations,
    term_table,
    zipf_fit,
)
from .errors import ConfigError, DataError, TweetMineError
from .experiments import (
    ConfoundParams,
    ConfoundResult,
    ExperimentConfig,
    TableResult,
    _csv,
    _datasets,
    _strip_all,
    _vocab,
    apparent_specificity,
    build_manifest,
    emit_report,
    fit_classifier,
    read_config_file,
    run_basic_classification,
    run_condition_experiment,
    run_lasso_sweep,
    run_loko,
    sha256_file,
    simulate_apparent_specificity,
    split_train_test,
)
from .features import CONTROL, TOPIC, IdfTable, Vocabulary, featurize_corpus
from .ingest import (
    KeywordSet,
    Label,
    iter_records,
    matched_keywords,
    open_source,
    read_corpus_dir,
    split_corpus,
    write_corpus_dir,
)
from .models import evaluate, load_model, save_model
from .textprep import DEFAULT_STOPWORDS, PipelineConfig, load_stopwords, preprocess_all, read_token_docs, write_token_docs

log = logging.getLogger("tweetmine")

TOKEN_FILES = {Label.TOPIC: "topic.tok", Label.CONTROL: "control.tok"}
CONFIG_FLAGS = {
    "seed": "seed",
    "keywords": "keywords",
    "policy": "vocab_policy",
    "size": "vocab_size",
    "scheme": "scheme",
    "schemes": "schemes",
    "classifiers": "classifiers",
    "alpha": "alpha",
    "nb_event": "nb_event",
    "C": "C",
    "solver": "solver",
    "lam": "lam",
    "lambdas": "lambdas",
    "lasso_C": "lasso_C",
    "fraction": "split_fraction",
    "split_mode": "split_mode",
    "idf_mode": "idf_mode",
    "tol": "tol",
    "top_k": "top_k",
    "other_keywords": "other_keywords",
}


# -- helpers -----------------------------------------------------------------


def resolve_config(args) -> ExperimentConfig:
    values = read_config_file(args.config) if getattr(args, "config", None) else {}
    for flag, key in CONFIG_FLAGS.items():
        v = getattr(args, flag, None)
        if v is not None:
            values[key] = v
    if getattr(args, "classifier", None):
        values["classifiers"] = args.classifier
    return ExperimentConfig.from_mapping(values)


def _token_path(prep_dir, label) -> Path:
    p = Path(prep_dir) / TOKEN_FILES[Label(label)]
    if not p.exists():
        raise DataError(f"missing token file {p}")
    return p


def _load_tokens(prep_dir, inputs: dict):
    out = []
    for label in (Label.TOPIC, Label.CONTROL):
        p = _token_path(prep_dir, label)
        inputs[f"{label.value}_tokens"] = p
        out.append(read_token_docs(p))
    return out


def _load_corpus(corpus_dir, inputs: dict):
    out = []
    for label in (Label.TOPIC, Label.CONTROL):
        c = read_corpus_dir(corpus_dir, label)
        inputs[f"{label.value}_records"] = c.provenance
        out.append(c)
    return out


def _timestamps(corpus_dir, docs, inputs):
    """Creation times aligned with token docs, for the chronological split."""
    times = []
    for label, group in zip((Label.TOPIC, Label.CONTROL), docs):
        recs = {r.id: r.created_at for r in read_corpus_dir(corpus_dir, label)}
        inputs[f"{label.value}_records"] = Path(corpus_dir) / f"{label.value}.ndjson"
        missing = [d.tweet_id for d in group if recs.get(d.tweet_id) is None]
        if missing:
            raise DataError(f"no timestamp for tweet {missing[0]}")
        times.append([recs[d.tweet_id].timestamp() for d in group])
    return times


def _emit(args, result, cfg, inputs, experiment) -> None:
    skip = {"func", "out", "config", "verbose"}
    if cfg is not None:
        # already captured, fully resolved, under "config"
        skip |= set(CONFIG_FLAGS) | {"classifier"}
    params = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    manifest = build_manifest(experiment, cfg, inputs, params, seed=getattr(args, "seed", None))
    written = emit_report(result, args.out, manifest)
    for p in written:
        print(p)


# -- commands ----------------------------------------------------------------


def cmd_ingest(args) -> None:
    ks = KeywordSet.parse(args.keywords)
    with open_source(args.input) as stream:
        records = list(iter_records(stream, lang=args.lang or None))
    topic, control = split_corpus(records, ks, args.input)
    stats = write_corpus_dir(args.out, topic, control)
    print(json.dumps(stats, indent=2, sort_keys=True))


def cmd_prep(args) -> None:
    stop = load_stopwords(args.stopwords) if args.stopwords else DEFAULT_STOPWORDS
    pcfg = PipelineConfig(stop, min_token_len=args.min_len, stem_enabled=not args.no_stem)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for label in (Label.TOPIC, Label.CONTROL):
        corpus = read_corpus_dir(args.input, label)
        docs = preprocess_all(corpus.records, pcfg)
        write_token_docs(out / TOKEN_FILES[label], docs)
        print(f"{label.value}: {len(docs)} docs, {sum(1 for d in docs if not d.tokens)} empty")


def _labels(which: str):
    return (Label.TOPIC, Label.CONTROL) if which == "both" else (Label(which),)


def cmd_zipf(args) -> None:
    inputs: dict = {}
    files = {}
    fit_rows = []
    window_rows = []
    fits = {}
    for label in _labels(args.label):
        p = _token_path(args.input, label)
        inputs[f"{label.value}_tokens"] = p
        table = rank_frequency(read_token_docs(p))
        fit = zipf_fit(table, args.fractions or DEFAULT_FRACTIONS)
        fits[label.value] = {
            "exponent": fit.exponent,
            "intercept": fit.intercept,
            "fit_fraction": fit.fit_fraction,
            "pearson_by_window": {repr(f): r for f, r in fit.pearson_by_window.items()},
        }
        fit_rows.append((label.value, len(table), table.total, fit.exponent, fit.intercept, fit.fit_fraction))
        window_rows += [(label.value, f, r) for f, r in fit.pearson_by_window.items()]
        lnr, lnf = table.log_points()
        files[f"zipf_{label.value}.dat"] = "".join(f"{x!r} {y!r}\n" for x, y in zip(lnr.tolist(), lnf.tolist()))
    files["zipf_fit.csv"] = _csv(("label", "n_terms", "n_tokens", "exponent", "intercept", "fit_fraction"), fit_rows)
    files["zipf_fit.json"] = json.dumps(fits, indent=2, sort_keys=True) + "\n"
    files["zipf_pearson.csv"] = _csv(("label", "window_fraction", "pearson_r"), window_rows)
    _emit(args, TableResult(files), None, inputs, "zipf")


def cmd_lengths(args) -> None:
    inputs: dict = {}
    topic, control = _load_tokens(args.input, inputs)
    files = {}
    rows = []
    for label, docs in ((Label.TOPIC, topic), (Label.CONTROL, control)):
        s = length_summary(docs)
        rows.append((label.value, s.n_docs, s.n_empty, s.log_mean, s.log_sd))
        files[f"lengths_{label.value}.dat"] = "".join(f"{k} {v}\n" for k, v in s.histogram.items())
    t = length_t_test(topic, control, equal_var=args.equal_var)
    files["lengths.csv"] = _csv(("label", "n_docs", "n_empty", "log_mean", "log_sd"), rows)
    files["lengths_ttest.csv"] = _csv(("t", "df", "p", "mean_topic", "mean_control"), [(t.t, t.df, t.p, t.mean_a, t.mean_b)])
    _emit(args, TableResult(files), None, inputs, "lengths")


def cmd_freq(args) -> None:
    inputs: dict = {}
    topic, control = _load_tokens(args.input, inputs)
    ks = KeywordSet.parse(args.exclude) if args.exclude else None
    files = {
        f"freq_{name}.csv": _csv(("term", "count"), term_table(docs, args.top, ks))
        for name, docs in (("topic", topic), ("control", control))
    }
    disc = discriminativeness_table(topic, control)
    disc.sort(key=lambda r: (-r[2], r[0]))
    files["discriminativeness.csv"] = _csv(("term", "log_ratio", "score"), disc[: args.top])
    _emit(args, TableResult(files), None, inputs, "freq")


def cmd_hashtags(args) -> None:
    inputs: dict = {}
    topic, control = _load_corpus(args.input, inputs)
    ks = KeywordSet.parse(args.exclude) if args.exclude else None
    files = {
        f"hashtags_{c.label.value}.csv": _csv(("hashtag", "count"), hashtag_table(c, args.top, ks))
        for c in (topic, control)
    }
    _emit(args, TableResult(files), None, inputs, "hashtags")


def cmd_pos_stats(args) -> None:
    inputs = {"topic_pos": Path(args.topic), "control_pos": Path(args.control)}
    groups = []
    for p in (args.topic, args.control):
        with open(p, encoding="utf-8") as fh:
            groups.append(read_pos_annotations(fh))
    files = {}
    rows = []
    for tag in args.tags.split(","):
        t = pos_t_test(groups[0], groups[1], tag, equal_var=args.equal_var)
        rows.append((tag, t.mean_a, t.mean_b, t.t, t.df, t.p))
        for name, docs in zip(("topic", "control"), groups):
            bins = pos_by_length(docs, tag)
            files[f"pos_{tag_name(tag)}_{name}_by_length.csv"] = _csv(
                ("length", "n", "mean", "sd", "se"), [(b.length, b.n, b.mean, b.sd, b.se) for b in bins]
            )
            props = pos_proportions(docs, tag)
            files[f"pos_{tag_name(tag)}_{name}.dat"] = "".join(f"{len(d)} {p!r}\n" for d, p in zip(docs, props))
    files["pos_ttest.csv"] = _csv(("tag", "mean_topic", "mean_control", "t", "df", "p"), rows)
    _emit(args, TableResult(files), None, inputs, "pos-stats")


def tag_name(tag: str) -> str:
    # file-name-safe spelling of single-character tags
    return tag if tag.isalnum() else f"x{ord(tag):02x}"


def cmd_vocab(args) -> None:
    cfg = resolve_config(args)
    inputs: dict = {}
    topic, control = _load_tokens(args.input, inputs)
    train, _ = split_train_test(_strip_all(topic, cfg.keywords), _strip_all(control, cfg.keywords), cfg.split_fraction, cfg.seed)
    vocab = _vocab(train, cfg.keywords, cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    vocab.save(out / "vocab.txt")
    print(f"{len(vocab)} terms -> {out / 'vocab.txt'}")


def cmd_train(args) -> None:
    cfg = resolve_config(args)
    inputs: dict = {}
    topic, control = _load_tokens(args.input, inputs)
    ks = cfg.keywords
    train, test = split_train_test(_strip_all(topic, ks), _strip_all(control, ks), cfg.split_fraction, cfg.seed)
    vocab = Vocabulary.load(args.vocab, excluded=ks) if args.vocab else _vocab(train, ks, cfg)
    ds_train, _ = _datasets(train, test, vocab, cfg.scheme, cfg)
    model = fit_classifier(cfg.classifiers[0], ds_train, cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    vocab.save(out / "vocab.txt")
    save_model(model, out / "model.json")
    idf = ds_train.idf
    meta = {"scheme": cfg.scheme, "idf": {"n_docs": idf.n_docs, "df": list(idf.df), "mode": idf.mode}}
    (out / "features.json").write_text(json.dumps(meta) + "\n", encoding="utf-8")
    write_token_docs(out / "test_topic.tok", test.topic)
    write_token_docs(out / "test_control.tok", test.control)
    manifest = build_manifest("train", cfg, inputs, {"classifier": cfg.classifiers[0]})
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"trained {model.kind} on {len(ds_train)} tweets, {len(vocab)} terms -> {out}")


def cmd_evaluate(args) -> None:
    mdir = Path(args.model)
    inputs = {"model": mdir / "model.json", "vocab": mdir / "vocab.txt"}
    vocab = Vocabulary.load(mdir / "vocab.txt")
    model = load_model(mdir / "model.json", vocab)
    meta = json.loads((mdir / "features.json").read_text(encoding="utf-8"))
    idf = IdfTable(meta["idf"]["n_docs"], tuple(meta["idf"]["df"]), meta["idf"]["mode"])
    if args.input:
        topic, control = _load_tokens(args.input, inputs)
        ks = KeywordSet.parse(args.keywords) if args.keywords else resolve_config(args).keywords
        topic, control = _strip_all(topic, ks), _strip_all(control, ks)
    else:
        topic = read_token_docs(mdir / "test_topic.tok")
        control = read_token_docs(mdir / "test_control.tok")
        inputs["test_topic"] = mdir / "test_topic.tok"
        inputs["test_control"] = mdir / "test_control.tok"
    docs = list(topic) + list(control)
    labels = [TOPIC] * len(topic) + [CONTROL] * len(control)
    ds = featurize_corpus(docs, labels, vocab, meta["scheme"], idf=idf)
    cm = evaluate(model, ds)
    files = {"confusion.csv": cm.to_csv()}
    _emit(args, TableResult(files), None, inputs, "evaluate")


def cmd_classify(args) -> None:
    cfg = resolve_config(args)
    inputs: dict = {}
    topic, control = _load_tokens(args.input, inputs)
    times = (None, None)
    if cfg.split_mode == "chronological":
        if not args.corpus:
            raise ConfigError("chronological split needs --corpus for timestamps")
        times = _timestamps(args.corpus, (topic, control), inputs)
    result = run_basic_classification(topic, control, cfg, *times)
    _emit(args, result, cfg, inputs, "classify")


def cmd_condition(args) -> None:
    cfg = resolve_config(args)
    inputs: dict = {}
    topic, _ = _load_tokens(args.input, inputs)
    other_path = _token_path(args.other, Label.TOPIC)
    inputs["other_tokens"] = other_path
    other = read_token_docs(other_path)
    result = run_condition_experiment(topic, other, cfg)
    _emit(args, result, cfg, inputs, "condition")


def cmd_lasso_sweep(args) -> None:
    cfg = resolve_config(args)
    inputs: dict = {}
    topic, control = _load_tokens(args.input, inputs)
    _emit(args, run_lasso_sweep(topic, control, cfg), cfg, inputs, "lasso-sweep")


def cmd_loko(args) -> None:
    cfg = resolve_config(args)
    inputs: dict = {}
    topic_c, control_c = _load_corpus(args.corpus, inputs)
    if args.input:
        topic, control = _load_tokens(args.input, inputs)
        by_id = {r.id: r for r in topic_c}
        if set(by_id) != {d.tweet_id for d in topic}:
            raise DataError("token docs and corpus records disagree on tweet ids")
        matches = [matched_keywords(by_id[d.tweet_id].text, cfg.keywords) for d in topic]
    else:
        topic = preprocess_all(topic_c.records)
        control = preprocess_all(control_c.records)
        matches = [matched_keywords(r.text, cfg.keywords) for r in topic_c]
    _emit(args, run_loko(topic, matches, control, cfg), cfg, inputs, "loko")


def cmd_confound(args) -> None:
    p = ConfoundParams(args.p_m, args.p_n, args.rho_m)
    sim = simulate_apparent_specificity(p, args.draws, args.seed or 0) if args.draws else None
    result = ConfoundResult(p, apparent_specificity(p), sim, args.draws)
    print(f"apparent specificity: {result.value!r}")
    if sim is not None:
        print(f"simulated ({args.draws} draws): {sim!r}")
    if args.out:
        _emit(args, result, None, {}, "confound")


def cmd_report(args) -> None:
    manifest = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
    for name, entry in manifest.get("inputs", {}).items():
        if sha256_file(entry["path"]) != entry["sha256"]:
            raise DataError(f"input {name} ({entry['path']}) changed since the manifest was written")
    command = manifest["experiment"]
    if command not in REPLAYABLE:
        raise ConfigError(f"experiment {command!r} cannot be replayed")
    ns = argparse.Namespace(**manifest.get("params", {}))
    ns.out = args.out
    ns.config = None
    cfg = manifest.get("config")
    if cfg is not None:
        # the manifest's resolved config wins over anything on the command line
        for flag, key in CONFIG_FLAGS.items():
            setattr(ns, flag, cfg.get(key))
        ns.classifier = None
    REPLAYABLE[command](ns)


REPLAYABLE = {
    "zipf": cmd_zipf,
    "lengths": cmd_lengths,
    "freq": cmd_freq,
    "hashtags": cmd_hashtags,
    "pos-stats": cmd_pos_stats,
    "evaluate": cmd_evaluate,
    "classify": cmd_classify,
    "condition": cmd_condition,
    "lasso-sweep": cmd_lasso_sweep,
    "loko": cmd_loko,
    "confound": cmd_confound,
}


# -- parser ------------------------------------------------------------------


def _model_flags(p: argparse.ArgumentParser, many_schemes: bool = False) -> None:
    p.add_argument("--keywords", help="comma-separated seed keywords to strip")
    p.add_argument("--policy", help="vocabulary policy (freq_overall, disc_topic, union, ...)")
    p.add_argument("--size", type=int, help="vocabulary size")
    p.add_argument("--fraction", type=float, help="training fraction of each corpus")
    p.add_argument("--split-mode", choices=("random", "chronological"))
    p.add_argument("--scheme", choices=("binary", "count", "tfidf"))
    if many_schemes:
        p.add_argument("--schemes", help="comma-separated representation schemes")
        p.add_argument("--classifiers", help="comma-separated classifiers (nb, logreg, lasso)")
    else:
        p.add_argument("--classifier", choices=("nb", "logreg", "lasso"))
    p.add_argument("--alpha", type=float, help="naive Bayes smoothing")
    p.add_argument("--nb-event", choices=("multinomial", "bernoulli"))
    p.add_argument("-C", "--C", dest="C", type=float, help="logistic loss weight")
    p.add_argument("--solver", choices=("newton", "cd"))
    p.add_argument("--lam", type=float, help="L1 penalty for a single lasso fit")
    p.add_argument("--lasso-C", type=float, help="lasso loss weight (default 1/n)")
    p.add_argument("--idf-mode", choices=("log", "inverse"))
    p.add_argument("--tol", type=float)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="random seed (default 0)")
    common.add_argument("--config", help="key = value configuration file")
    common.add_argument("--out", help="output directory")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="tweetmine", description="Keyword-bootstrapped tweet corpus analysis.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], help="split an NDJSON stream into topic/control corpora")
    p.add_argument("--in", dest="input", required=True, help="file, '-' for stdin, or tcp://host:port")
    p.add_argument("--keywords", default="autism,adhd,asperger,aspie")
    p.add_argument("--lang", default="en", help="keep only this language ('' keeps all)")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("prep", parents=[common], help="tokenize, filter stop words and stem")
    p.add_argument("--in", dest="input", required=True, help="corpus directory from ingest")
    p.add_argument("--stopwords", help="stop-word file, one word per line")
    p.add_argument("--min-len", type=int, default=2)
    p.add_argument("--no-stem", action="store_true")
    p.set_defaults(func=cmd_prep)

    p = sub.add_parser("zipf", parents=[common], help="rank-frequency fit and windowed Pearson r")
    p.add_argument("--in", dest="input", required=True, help="token directory from prep")
    p.add_argument("--label", choices=("topic", "control", "both"), default="both")
    p.add_argument("--fractions", type=lambda s: [float(x) for x in s.split(",")])
    p.set_defaults(func=cmd_zipf)

    p = sub.add_parser("lengths", parents=[common], help="tweet length distributions and t-test")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--equal-var", action="store_true", help="pooled Student test instead of Welch")
    p.set_defaults(func=cmd_lengths)

    p = sub.add_parser("freq", parents=[common], help="top terms and discriminativeness")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--top", type=int, default=100)
    p.add_argument("--exclude", help="keywords whose prefixed terms are left out")
    p.set_defaults(func=cmd_freq)

    p = sub.add_parser("hashtags", parents=[common], help="top hashtags per corpus")
    p.add_argument("--in", dest="input", required=True, help="corpus directory from ingest")
    p.add_argument("--top", type=int, default=100)
    p.add_argument("--exclude")
    p.set_defaults(func=cmd_hashtags)

    p = sub.add_parser("pos-stats", parents=[common], help="part-of-speech proportions and t-tests")
    p.add_argument("--topic", required=True, help="tagged topic tweets (id<TAB>token<TAB>tag per line, blank line between tweets)")
    p.add_argument("--control", required=True)
    p.add_argument("--tags", default="N,V,A,R,^,!")
    p.add_argument("--equal-var", action="store_true")
    p.set_defaults(func=cmd_pos_stats)

    p = sub.add_parser("vocab", parents=[common], help="build a vocabulary on the training split")
    p.add_argument("--in", dest="input", required=True)
    _model_flags(p)
    p.set_defaults(func=cmd_vocab)

    p = sub.add_parser("train", parents=[common], help="train one classifier")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--vocab", help="use this vocabulary file instead of building one")
    _model_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", parents=[common], help="confusion matrix of a trained model")
    p.add_argument("--model", required=True, help="directory written by train")
    p.add_argument("--in", dest="input", help="token directory to score (default: the held-out split)")
    p.add_argument("--keywords")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("classify", parents=[common], help="full classifier x representation grid")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--corpus", help="corpus directory (timestamps for the chronological split)")
    _model_flags(p, many_schemes=True)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("condition", parents=[common], help="condition vs condition classification")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--other", required=True, help="token directory of the second condition (its topic.tok)")
    p.add_argument("--other-keywords", required=True)
    _model_flags(p, many_schemes=True)
    p.set_defaults(func=cmd_condition)

    p = sub.add_parser("lasso-sweep", parents=[common], help="L1 logistic regression over a lambda grid")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--lambdas", help="comma-separated lambda values")
    p.add_argument("--top-k", type=int)
    _model_flags(p)
    p.set_defaults(func=cmd_lasso_sweep)

    p = sub.add_parser("loko", parents=[common], help="leave-one-keyword-out analysis")
    p.add_argument("--corpus", required=True, help="corpus directory from ingest")
    p.add_argument("--in", dest="input", help="token directory (default: preprocess the corpus)")
    _model_flags(p)
    p.set_defaults(func=cmd_loko)

    p = sub.add_parser("confound", parents=[common], help="apparent specificity under a contaminated control")
    p.add_argument("--p-m", type=float, required=True)
    p.add_argument("--p-n", type=float, required=True)
    p.add_argument("--rho-m", type=float, required=True)
    p.add_argument("--draws", type=int, default=0, help="also simulate with this many draws")
    p.set_defaults(func=cmd_confound)

    p = sub.add_parser("report", parents=[common], help="replay a manifest into a new directory")
    p.add_argument("--manifest", required=True)
    p.set_defaults(func=cmd_report)
    return parser


NEEDS_OUT = {"ingest", "prep", "zipf", "lengths", "freq", "hashtags", "pos-stats", "vocab", "train",
             "evaluate", "classify", "condition", "lasso-sweep", "loko", "report"}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command in NEEDS_OUT and not args.out:
        print("error: --out is required", file=sys.stderr)
        return 2
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            args.func(args)
    except ConfigError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return 2
    except DataError as e:
        print(f"data error: {e}", file=sys.stderr)
        return 3
    except TweetMineError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
