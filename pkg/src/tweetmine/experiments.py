"""Experiment protocols: train/test splitting, classification grids, the
condition-vs-condition comparison, the medical-confound calculator,
leave-one-keyword-out analysis and report emission."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import platform
from fractions import Fraction
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import ConfigError, DataError, DomainError, EmptyInputError, SchemaError
from .features import (
    CONTROL,
    TOPIC,
    KeywordMatcher,
    LabeledDataset,
    Policy,
    Scheme,
    Vocabulary,
    build_vocabulary,
    featurize_corpus,
)
from .ingest import DEFAULT_KEYWORDS, KeywordSet, TweetRecord, serialize_record
from .models import (
    DEFAULT_LAMBDAS,
    ConfusionMatrix2,
    Model,
    evaluate,
    lasso_sweep,
    top_coefficients,
    train_lasso,
    train_logreg,
    train_nb,
)
from .textprep import TokenDoc

CLASSIFIERS = ("nb", "logreg", "lasso")


# -- configuration -----------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int = 0
    split_fraction: float = 0.5
    split_mode: str = "random"
    keywords: KeywordSet = DEFAULT_KEYWORDS
    other_keywords: Optional[KeywordSet] = None
    vocab_policy: str = "freq_overall"
    vocab_size: int = 1500
    scheme: str = "count"
    schemes: tuple[str, ...] = ("binary", "count", "tfidf")
    classifiers: tuple[str, ...] = ("nb", "logreg")
    alpha: float = 1.0
    nb_event: str = "multinomial"
    C: float = 1.0
    solver: str = "newton"
    lasso_C: Optional[float] = None
    lam: float = 1e-4
    lambdas: tuple[float, ...] = DEFAULT_LAMBDAS
    tol: float = 1e-8
    idf_mode: str = "log"
    fit_bias: bool = True
    top_k: int = 20

    def __post_init__(self):
        if not 0.0 < self.split_fraction < 1.0:
            raise ConfigError("split_fraction must lie in (0, 1)")
        if self.split_mode not in ("random", "chronological"):
            raise ConfigError(f"unknown split mode {self.split_mode!r}")
        for s in (self.scheme, *self.schemes):
            if s not in Scheme._value2member_map_:
                raise ConfigError(f"unknown scheme {s!r}")
        if self.vocab_policy not in Policy._value2member_map_:
            raise ConfigError(f"unknown vocabulary policy {self.vocab_policy!r}")
        choices = {"nb_event": ("multinomial", "bernoulli"), "solver": ("newton", "cd"), "idf_mode": ("log", "inverse")}
        for name, allowed in choices.items():
            if getattr(self, name) not in allowed:
                raise ConfigError(f"{name} must be one of {allowed}")
        if self.vocab_size < 1:
            raise ConfigError("vocab_size must be >= 1")
        if not self.classifiers:
            raise ConfigError("no classifier selected")
        for c in self.classifiers:
            if c not in CLASSIFIERS:
                raise ConfigError(f"unknown classifier {c!r}")

    def to_dict(self) -> dict:
        out = {}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, KeywordSet):
                v = str(v)
            elif isinstance(v, tuple):
                v = list(v)
            out[f.name] = v
        return out

    @classmethod
    def from_mapping(cls, values: dict) -> "ExperimentConfig":
        kwargs = {}
        names = {f.name: f for f in dataclasses.fields(cls)}
        defaults = cls()
        for key, raw in values.items():
            key = key.replace("-", "_")
            if key not in names:
                raise ConfigError(f"unknown config key {key!r}")
            kwargs[key] = _coerce(raw, getattr(defaults, key), key)
        try:
            return cls(**kwargs)
        except (TypeError, ValueError) as e:
            if isinstance(e, ConfigError):
                raise
            raise ConfigError(str(e)) from None

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


def _coerce(raw, default, key):
    if key in ("keywords", "other_keywords"):
        if raw is None or raw == "":
            return None
        return raw if isinstance(raw, KeywordSet) else KeywordSet.parse(str(raw))
    if key == "lasso_C":
        return None if raw in (None, "", "none", "None") else float(raw)
    if isinstance(default, bool):
        if isinstance(raw, bool):
            return raw
        return str(raw).strip().lower() in ("1", "true", "yes", "on")
    if isinstance(default, tuple):
        items = raw if isinstance(raw, (list, tuple)) else [x.strip() for x in str(raw).split(",") if x.strip()]
        if default and isinstance(default[0], float):
            return tuple(float(x) for x in items)
        return tuple(str(x) for x in items)
    try:
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r}") from None
    return str(raw)


def read_config_file(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        values[key.strip()] = value.strip()
    return values


# -- splitting and keyword stripping -----------------------------------------


@dataclass(frozen=True)
class CorpusPair:
    topic: tuple[TokenDoc, ...]
    control: tuple[TokenDoc, ...]

    def docs_and_labels(self) -> tuple[list[TokenDoc], list[int]]:
        return list(self.topic) + list(self.control), [TOPIC] * len(self.topic) + [CONTROL] * len(self.control)


def _split_indices(n: int, fraction: float, rng: np.random.Generator, order: Optional[Sequence] = None):
    n_train = int(math.floor(fraction * n + 0.5))
    perm = rng.permutation(n) if order is None else np.argsort(np.asarray(order), kind="stable")
    return np.sort(perm[:n_train]), np.sort(perm[n_train:])


def split_indices(
    n_topic: int,
    n_control: int,
    fraction: float = 0.5,
    seed: int = 0,
    topic_times: Optional[Sequence] = None,
    control_times: Optional[Sequence] = None,
):
    """Train/test index arrays for each corpus.

    Each corpus is shuffled with its own stream derived from ``seed`` and cut
    at ``round(fraction * n)``. Passing timestamps switches to a
    chronological cut (earliest part trains).
    """
    if n_topic == 0 or n_control == 0:
        raise EmptyInputError("both corpora must be non-empty")
    if not 0.0 < fraction < 1.0:
        raise ConfigError("fraction must lie in (0, 1)")
    rt, rc = (np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(2))
    return _split_indices(n_topic, fraction, rt, topic_times), _split_indices(n_control, fraction, rc, control_times)


def split_train_test(
    topic: Sequence[TokenDoc],
    control: Sequence[TokenDoc],
    fraction: float = 0.5,
    seed: int = 0,
    topic_times: Optional[Sequence] = None,
    control_times: Optional[Sequence] = None,
) -> tuple[CorpusPair, CorpusPair]:
    (tt, te), (ct, ce) = split_indices(len(topic), len(control), fraction, seed, topic_times, control_times)
    return (
        CorpusPair(tuple(topic[i] for i in tt), tuple(control[i] for i in ct)),
        CorpusPair(tuple(topic[i] for i in te), tuple(control[i] for i in ce)),
    )


def strip_keywords(doc: TokenDoc, ks: KeywordSet) -> TokenDoc:
    """Drop every keyword-derived token (prefix match or stemmed keyword)."""
    match = KeywordMatcher(ks)
    return TokenDoc(doc.tweet_id, tuple(t for t in doc.tokens if not match(t)))


def _strip_all(docs: Iterable[TokenDoc], ks: KeywordSet) -> list[TokenDoc]:
    match = KeywordMatcher(ks)
    return [TokenDoc(d.tweet_id, tuple(t for t in d.tokens if not match(t))) for d in docs]


def _assert_clean(vocab: Vocabulary, ks: KeywordSet) -> None:
    match = KeywordMatcher(ks)
    leaked = [t for t in vocab.terms if match(t)]
    if leaked:
        raise AssertionError(f"keyword-derived terms reached the vocabulary: {leaked[:5]}")


# -- model fitting -----------------------------------------------------------


def fit_classifier(kind: str, ds: LabeledDataset, cfg: ExperimentConfig) -> Model:
    if kind == "nb":
        return train_nb(ds, cfg.alpha, cfg.nb_event)
    if kind == "logreg":
        return train_logreg(ds, C=cfg.C, tol=cfg.tol, fit_bias=cfg.fit_bias, solver=cfg.solver)
    if kind == "lasso":
        return train_lasso(ds, cfg.lam, C=cfg.lasso_C, tol=cfg.tol, fit_bias=cfg.fit_bias)
    raise ConfigError(f"unknown classifier {kind!r}")


def _datasets(train: CorpusPair, test: CorpusPair, vocab: Vocabulary, scheme, cfg: ExperimentConfig):
    docs, labels = train.docs_and_labels()
    ds_train = featurize_corpus(docs, labels, vocab, scheme, idf_mode=cfg.idf_mode)
    docs, labels = test.docs_and_labels()
    ds_test = featurize_corpus(docs, labels, vocab, scheme, idf=ds_train.idf)
    return ds_train, ds_test


def _vocab(train: CorpusPair, ks: KeywordSet, cfg: ExperimentConfig) -> Vocabulary:
    vocab = build_vocabulary(train.topic, train.control, cfg.vocab_policy, cfg.vocab_size, excluded=ks)
    _assert_clean(vocab, ks)
    return vocab


# -- result containers -------------------------------------------------------


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ClassificationResult:
    """Confusion matrices keyed by (classifier, scheme)."""

    grid: dict
    vocab_size: int
    n_train: tuple[int, int]
    n_test: tuple[int, int]
    name: str = "classification"

    def tables(self) -> dict[str, str]:
        rows = []
        for (clf, scheme), cm in sorted(self.grid.items()):
            r = cm.rates
            for t, label in enumerate(("control", "topic")):
                rows.append((clf, scheme, label, cm.counts[t][0], cm.counts[t][1], r[t][0], r[t][1]))
        header = ("classifier", "scheme", "true", "pred_control", "pred_topic", "rate_control", "rate_topic")
        return {f"{self.name}.csv": _csv(header, rows)}


def run_basic_classification(
    topic_docs: Sequence[TokenDoc],
    control_docs: Sequence[TokenDoc],
    cfg: ExperimentConfig = ExperimentConfig(),
    topic_times: Optional[Sequence] = None,
    control_times: Optional[Sequence] = None,
    schemes: Optional[Sequence[str]] = None,
    name: str = "classification",
) -> ClassificationResult:
    """Strip keywords, split, build the vocabulary on the training half,
    featurize and evaluate every (classifier, scheme) pair."""
    ks = cfg.keywords if cfg.other_keywords is None else cfg.keywords.union(cfg.other_keywords)
    topic = _strip_all(topic_docs, ks)
    control = _strip_all(control_docs, ks)
    if cfg.split_mode == "chronological":
        if topic_times is None or control_times is None:
            raise ConfigError("chronological split needs timestamps")
    else:
        topic_times = control_times = None
    train, test = split_train_test(topic, control, cfg.split_fraction, cfg.seed, topic_times, control_times)
    if not test.topic and not test.control:
        raise EmptyInputError("empty test set")
    vocab = _vocab(train, ks, cfg)
    grid = {}
    for scheme in schemes or cfg.schemes:
        ds_train, ds_test = _datasets(train, test, vocab, scheme, cfg)
        for clf in cfg.classifiers:
            grid[(clf, Scheme(scheme).value)] = evaluate(fit_classifier(clf, ds_train, cfg), ds_test)
    return ClassificationResult(
        grid, len(vocab), (len(train.topic), len(train.control)), (len(test.topic), len(test.control)), name
    )


def run_condition_experiment(
    topic_docs: Sequence[TokenDoc],
    other_docs: Sequence[TokenDoc],
    cfg: ExperimentConfig = ExperimentConfig(),
    other_keywords: Optional[KeywordSet] = None,
) -> ClassificationResult:
    """Same protocol with a second condition's corpus in the control role.

    Uses ``cfg.scheme`` alone (term counts by default). Keywords of both
    conditions are stripped.
    """
    if other_keywords is not None:
        cfg = cfg.replace(other_keywords=other_keywords)
    return run_basic_classification(topic_docs, other_docs, cfg, schemes=(cfg.scheme,), name="condition")


# -- lasso sweep -------------------------------------------------------------


@dataclass(frozen=True)
class SweepResult:
    points: tuple
    top_terms: tuple[tuple[str, float], ...]

    def tables(self) -> dict[str, str]:
        rows = []
        for p in self.points:
            r = p.confusion.rates
            rows.append((p.lam, p.nnz, r[0][0], r[0][1], r[1][0], r[1][1], p.diagnostics.final_objective, p.diagnostics.violation))
        header = ("lambda", "nnz", "cc", "ct", "tc", "tt", "objective", "kkt_violation")
        nnz = "".join(f"{p.lam!r} {p.nnz}\n" for p in self.points)
        return {
            "lasso_sweep.csv": _csv(header, rows),
            "lasso_top_terms.csv": _csv(("term", "weight"), self.top_terms),
            "lasso_nnz.dat": nnz,
        }


def run_lasso_sweep(
    topic_docs: Sequence[TokenDoc], control_docs: Sequence[TokenDoc], cfg: ExperimentConfig = ExperimentConfig()
) -> SweepResult:
    ks = cfg.keywords
    train, test = split_train_test(_strip_all(topic_docs, ks), _strip_all(control_docs, ks), cfg.split_fraction, cfg.seed)
    vocab = _vocab(train, ks, cfg)
    ds_train, ds_test = _datasets(train, test, vocab, cfg.scheme, cfg)
    points = lasso_sweep(ds_train, ds_test, cfg.lambdas, C=cfg.lasso_C, tol=cfg.tol)
    smallest = train_lasso(ds_train, min(cfg.lambdas), C=cfg.lasso_C, tol=cfg.tol)
    return SweepResult(tuple(points), tuple(top_coefficients(smallest, cfg.top_k)))


# -- medical confound --------------------------------------------------------


@dataclass(frozen=True)
class ConfoundParams:
    """p_m: hit rate on condition tweets; p_n: correct-reject rate on other
    tweets; rho_m: share of condition-related tweets among controls."""

    p_m: float
    p_n: float
    rho_m: float

    def __post_init__(self):
        for name in ("p_m", "p_n", "rho_m"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0) or math.isnan(v):
                raise DomainError(f"{name} must lie in [0, 1], got {v}")


def apparent_specificity(p: ConfoundParams) -> float:
    """Control-class accuracy of a condition-vs-rest classifier whose
    control pool contains a share ``rho_m`` of condition tweets.

    Evaluated exactly on the shortest decimal form of each input and rounded
    once, so decimal inputs give the correctly rounded decimal answer.
    """
    pm, pn, rho = (Fraction(repr(float(v))) for v in (p.p_m, p.p_n, p.rho_m))
    return float(pn + (1 - pm - pn) * rho)


def simulate_apparent_specificity(p: ConfoundParams, n_draws: int = 1_000_000, seed: int = 0) -> float:
    """Monte-Carlo estimate: draw a control tweet, then the classifier's output."""
    rng = np.random.default_rng(seed)
    medical = rng.random(n_draws) < p.rho_m
    u = rng.random(n_draws)
    says_control = np.where(medical, u >= p.p_m, u < p.p_n)
    return float(says_control.mean())


@dataclass(frozen=True)
class ConfoundResult:
    params: ConfoundParams
    value: float
    simulated: Optional[float] = None
    n_draws: int = 0

    def tables(self) -> dict[str, str]:
        row = (self.params.p_m, self.params.p_n, self.params.rho_m, self.value, self.simulated, self.n_draws)
        return {"confound.csv": _csv(("p_m", "p_n", "rho_m", "apparent_specificity", "simulated", "n_draws"), [row])}


# -- leave one keyword out ---------------------------------------------------


@dataclass(frozen=True)
class LokoRow:
    keyword: str
    acc_control_test: float
    acc_topic_test: float
    acc_heldout_keyword: Optional[float]
    n_train_topic: int
    n_heldout: int


@dataclass(frozen=True)
class LokoReport:
    rows: tuple[LokoRow, ...]
    baseline: LokoRow

    def row(self, keyword: str) -> LokoRow:
        for r in self.rows:
            if r.keyword == keyword:
                return r
        raise KeyError(keyword)

    def tables(self) -> dict[str, str]:
        header = ("left_out", "acc_control_test", "acc_topic_test", "acc_heldout_keyword", "n_train_topic", "n_heldout")
        rows = [dataclasses.astuple(r) for r in (self.baseline, *self.rows)]
        return {"loko.csv": _csv(header, rows)}


def _accuracy(model: Model, docs: Sequence[TokenDoc], label: int, vocab: Vocabulary, scheme, idf) -> Optional[float]:
    if not docs:
        return None
    ds = featurize_corpus(list(docs), [label] * len(docs), vocab, scheme, idf=idf)
    cm = evaluate(model, ds)
    return cm.topic_accuracy if label == TOPIC else cm.control_accuracy


def run_loko(
    topic_docs: Sequence[TokenDoc],
    topic_matches: Sequence[frozenset],
    control_docs: Sequence[TokenDoc],
    cfg: ExperimentConfig = ExperimentConfig(),
) -> LokoReport:
    """Retrain with each keyword left out of the training topic set.

    ``topic_matches[i]`` is the set of keywords matched by topic tweet ``i``.
    For each keyword ``k`` the classifier (first of ``cfg.classifiers``,
    scheme ``cfg.scheme``) is trained on training-half topic tweets matched
    by some other keyword. It is scored on both test halves and on every
    tweet (from either half) matched by ``k`` alone.
    """
    ks = cfg.keywords
    if len(ks) < 2:
        raise ConfigError("leave-one-keyword-out needs at least two keywords")
    if len(topic_matches) != len(topic_docs):
        raise SchemaError("topic_matches", "must align with topic_docs")
    topic = _strip_all(topic_docs, ks)
    control = _strip_all(control_docs, ks)
    (t_train, t_test), (c_train, c_test) = split_indices(len(topic), len(control), cfg.split_fraction, cfg.seed)
    clf = cfg.classifiers[0]
    test_control = [control[i] for i in c_test]
    test_topic = [topic[i] for i in t_test]
    train_control = tuple(control[i] for i in c_train)

    def run(train_idx: list[int], heldout_idx: list[int], name: str) -> LokoRow:
        if set(train_idx) & set(heldout_idx):
            raise AssertionError("held-out keyword tweets leaked into training")
        train = CorpusPair(tuple(topic[i] for i in train_idx), train_control)
        vocab = _vocab(train, ks, cfg)
        docs, labels = train.docs_and_labels()
        ds = featurize_corpus(docs, labels, vocab, cfg.scheme, idf_mode=cfg.idf_mode)
        model = fit_classifier(clf, ds, cfg)
        heldout = [topic[i] for i in heldout_idx]
        return LokoRow(
            name,
            _accuracy(model, test_control, CONTROL, vocab, cfg.scheme, ds.idf),
            _accuracy(model, test_topic, TOPIC, vocab, cfg.scheme, ds.idf),
            _accuracy(model, heldout, TOPIC, vocab, cfg.scheme, ds.idf),
            len(train_idx),
            len(heldout),
        )

    baseline = run([int(i) for i in t_train], [], "(none)")
    rows = []
    for k in ks:
        others = set(ks) - {k}
        train_idx = [int(i) for i in t_train if topic_matches[i] & others]
        heldout_idx = [i for i, m in enumerate(topic_matches) if m == {k}]
        rows.append(run(train_idx, heldout_idx, k))
    return LokoReport(tuple(rows), baseline)


# -- corpus statistics results -----------------------------------------------


@dataclass(frozen=True)
class TableResult:
    """Ready-made CSV/plot files, for the descriptive statistics commands."""

    files: dict = field(default_factory=dict)

    def tables(self) -> dict[str, str]:
        return dict(self.files)


# -- reports and manifests ---------------------------------------------------


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def hash_records(records: Iterable[TweetRecord]) -> str:
    h = hashlib.sha256()
    for r in records:
        h.update(serialize_record(r).encode("utf-8") + b"\n")
    return h.hexdigest()


def hash_token_docs(docs: Iterable[TokenDoc]) -> str:
    h = hashlib.sha256()
    for d in docs:
        h.update(f"{d.tweet_id}\t{' '.join(d.tokens)}\n".encode("utf-8"))
    return h.hexdigest()


def software_versions() -> dict:
    from importlib.metadata import PackageNotFoundError, version

    out = {"python": platform.python_version()}
    for pkg in ("artifact", "numpy", "scipy", "nltk", "numba"):
        try:
            out[pkg] = version(pkg)
        except PackageNotFoundError:
            out[pkg] = None
    return out


def build_manifest(
    experiment: str, cfg: Optional[ExperimentConfig], inputs: dict, params: Optional[dict] = None, seed: Optional[int] = None
) -> dict:
    """``inputs`` maps a role name to a file path; each is hashed."""
    return {
        "experiment": experiment,
        "seed": seed if cfg is None else cfg.seed,
        "config": None if cfg is None else cfg.to_dict(),
        "params": params or {},
        "inputs": {name: {"path": str(p), "sha256": sha256_file(p)} for name, p in sorted(inputs.items())},
        "versions": software_versions(),
    }


def emit_report(results, path, manifest: dict) -> list[Path]:
    """Write each result's tables plus ``manifest.json`` into directory ``path``.

    ``results`` may be a single result, a list of them, or ``None``.
    """
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OSError(f"cannot create report directory {out}: {e}") from e
    if results is None:
        results = []
    elif not isinstance(results, (list, tuple)):
        results = [results]
    written = []
    files: dict[str, str] = {}
    for r in results:
        for name, text in r.tables().items():
            if name in files:
                raise DataError(f"two results both produce {name}")
            files[name] = text
    for name in sorted(files):
        p = out / name
        with open(p, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(files[name])
        written.append(p)
    m = dict(manifest)
    m["outputs"] = sorted(files)
    mp = out / "manifest.json"
    mp.write_text(json.dumps(m, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    written.append(mp)
    return written
