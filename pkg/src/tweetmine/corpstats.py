"""Corpus statistics: Zipf rank-frequency analysis, tweet lengths, term and
hashtag tables, per-term discriminativeness and part-of-speech proportions."""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np
from scipy import stats

from .errors import (
    ConfigError,
    DataError,
    EmptyInputError,
    InsufficientDataError,
    SchemaError,
    UndefinedCorrelationError,
    VocabularyError,
    ZeroVarianceError,
)
from .ingest import KeywordSet, TweetRecord
from .textprep import TokenDoc

DEFAULT_FRACTIONS = tuple(round(0.2 + 0.1 * i, 1) for i in range(9))
FIT_FRACTION = 0.6


# -- rank/frequency ----------------------------------------------------------


@dataclass(frozen=True)
class RankEntry:
    term: str
    count: float
    rank: int


@dataclass(frozen=True)
class RankFrequencyTable:
    """Terms ordered by descending count, ties broken by term.

    Counts are integers when built from documents; synthetic tables built with
    :meth:`from_counts` may carry real-valued weights.
    """

    entries: tuple[RankEntry, ...]

    @classmethod
    def from_counts(cls, counts: Mapping[str, float]) -> "RankFrequencyTable":
        for term, c in counts.items():
            if not c > 0:
                raise DataError(f"count for {term!r} must be positive, got {c}")
        ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
        return cls(tuple(RankEntry(t, c, i) for i, (t, c) in enumerate(ordered, 1)))

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def total(self) -> float:
        return sum(e.count for e in self.entries)

    def log_points(self) -> tuple[np.ndarray, np.ndarray]:
        """(ln rank, ln count) arrays."""
        ranks = np.arange(1, len(self.entries) + 1, dtype=float)
        counts = np.array([e.count for e in self.entries], dtype=float)
        return np.log(ranks), np.log(counts)


def term_counts(docs: Iterable[TokenDoc]) -> Counter:
    c: Counter = Counter()
    for d in docs:
        c.update(d.tokens)
    return c


def rank_frequency(docs: Iterable[TokenDoc]) -> RankFrequencyTable:
    counts = term_counts(docs)
    if not counts:
        raise EmptyInputError("rank_frequency needs at least one non-empty document")
    return RankFrequencyTable.from_counts(counts)


def pearson_r(x: np.ndarray, y: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 3:
        raise InsufficientDataError(f"need at least 3 points, got {len(x)}")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise UndefinedCorrelationError("zero variance in one coordinate")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def log_window(table: RankFrequencyTable, fraction: float) -> np.ndarray:
    """Boolean mask of entries whose ln rank lies in the centred window.

    The window spans ``fraction`` of [0, ln V] and is centred on its midpoint;
    bounds are inclusive.
    """
    if not 0.0 < fraction <= 1.0:
        raise ConfigError(f"window fraction must be in (0, 1], got {fraction}")
    lnr, _ = table.log_points()
    top = math.log(len(table)) if len(table) else 0.0
    centre = top / 2.0
    half = fraction * top / 2.0
    eps = 1e-12 * max(1.0, top)
    return (lnr >= centre - half - eps) & (lnr <= centre + half + eps)


def windowed_pearson(table: RankFrequencyTable, fraction: float) -> float:
    mask = log_window(table, fraction)
    lnr, lnf = table.log_points()
    return pearson_r(lnr[mask], lnf[mask])


@dataclass(frozen=True)
class ZipfFit:
    exponent: float
    intercept: float
    pearson_by_window: dict[float, float]
    fit_fraction: float = FIT_FRACTION


def zipf_fit(table: RankFrequencyTable, fractions: Sequence[float] = DEFAULT_FRACTIONS) -> ZipfFit:
    """Least-squares power law on the central 60% window, plus windowed Pearson r."""
    for f in fractions:
        if not 0.0 < f <= 1.0:
            raise ConfigError(f"window fraction must be in (0, 1], got {f}")
    mask = log_window(table, FIT_FRACTION)
    lnr, lnf = table.log_points()
    x, y = lnr[mask], lnf[mask]
    if len(x) < 3:
        raise InsufficientDataError(f"need at least 3 points in the fit window, got {len(x)}")
    dx = x - x.mean()
    sxx = float(dx @ dx)
    if sxx == 0.0:
        raise UndefinedCorrelationError("zero rank variance in fit window")
    slope = float(dx @ (y - y.mean())) / sxx
    intercept = float(y.mean() - slope * x.mean())
    by_window = {float(f): windowed_pearson(table, f) for f in sorted(fractions)}
    return ZipfFit(slope, intercept, by_window)


# -- lengths and t-tests -----------------------------------------------------


@dataclass(frozen=True)
class LengthSummary:
    histogram: dict[int, int]
    log_mean: float
    log_sd: float
    n_docs: int
    n_empty: int


@dataclass(frozen=True)
class TTestResult:
    t: float
    df: float
    p: float
    mean_a: float
    mean_b: float


def log_lengths(docs: Iterable[TokenDoc]) -> np.ndarray:
    return np.array([math.log(len(d)) for d in docs if len(d) > 0], dtype=float)


def length_summary(docs: Sequence[TokenDoc]) -> LengthSummary:
    hist = Counter(len(d) for d in docs)
    logs = log_lengths(docs)
    mean = float(logs.mean()) if len(logs) else float("nan")
    sd = float(logs.std(ddof=1)) if len(logs) > 1 else float("nan")
    return LengthSummary(dict(sorted(hist.items())), mean, sd, len(docs), hist.get(0, 0))


def t_test(a: Sequence[float], b: Sequence[float], equal_var: bool = False) -> TTestResult:
    """Two-sample two-sided t-test; Welch by default, pooled Student with ``equal_var``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    na, nb = len(a), len(b)
    if na < 2 or nb < 2:
        raise InsufficientDataError(f"each group needs >= 2 observations, got {na} and {nb}")
    ma, mb = float(a.mean()), float(b.mean())
    va, vb = float(a.var(ddof=1)), float(b.var(ddof=1))
    if va == 0.0 and vb == 0.0:
        raise ZeroVarianceError("both samples have zero variance")
    if equal_var:
        df = na + nb - 2.0
        pooled = ((na - 1) * va + (nb - 1) * vb) / df
        se = math.sqrt(pooled * (1.0 / na + 1.0 / nb))
    else:
        qa, qb = va / na, vb / nb
        se = math.sqrt(qa + qb)
        # Welch-Satterthwaite on ratios, so tiny variances do not underflow
        ra, rb = qa / max(qa, qb), qb / max(qa, qb)
        df = (ra + rb) ** 2 / (ra**2 / (na - 1) + rb**2 / (nb - 1))
    t = (ma - mb) / se
    p = float(min(1.0, 2.0 * stats.t.sf(abs(t), df)))
    return TTestResult(t, df, p, ma, mb)


def length_t_test(docs_a: Sequence[TokenDoc], docs_b: Sequence[TokenDoc], equal_var: bool = False) -> TTestResult:
    if not docs_a or not docs_b:
        raise EmptyInputError("both corpora must be non-empty")
    return t_test(log_lengths(docs_a), log_lengths(docs_b), equal_var=equal_var)


# -- frequency tables --------------------------------------------------------


def _excluded(term: str, exclude: Optional[KeywordSet]) -> bool:
    return exclude is not None and exclude.match_token(term) is not None


def top_counts(counts: Mapping[str, int], top_k: int, exclude: Optional[KeywordSet] = None) -> list[tuple[str, int]]:
    if top_k <= 0:
        return []
    items = [(t, c) for t, c in counts.items() if not _excluded(t, exclude)]
    items.sort(key=lambda kv: (-kv[1], kv[0]))
    return items[:top_k]


def term_table(docs: Iterable[TokenDoc], top_k: int = 100, exclude: Optional[KeywordSet] = None) -> list[tuple[str, int]]:
    return top_counts(term_counts(docs), top_k, exclude)


def hashtag_table(
    corpus: Iterable[TweetRecord], top_k: int = 100, exclude: Optional[KeywordSet] = None
) -> list[tuple[str, int]]:
    counts: Counter = Counter()
    for rec in corpus:
        counts.update(rec.hashtags)
    return top_counts(counts, top_k, exclude)


# -- discriminativeness ------------------------------------------------------


@dataclass(frozen=True)
class TermContrast:
    """Smoothed per-class term probabilities over a shared vocabulary."""

    topic_counts: Counter
    control_counts: Counter
    alpha: float = 1.0

    def __post_init__(self):
        if self.alpha <= 0:
            raise ConfigError("alpha must be positive")
        vocab = set(self.topic_counts) | set(self.control_counts)
        object.__setattr__(self, "_vocab", vocab)
        object.__setattr__(self, "_n_topic", sum(self.topic_counts.values()))
        object.__setattr__(self, "_n_control", sum(self.control_counts.values()))

    @classmethod
    def from_docs(cls, topic_docs, control_docs, alpha: float = 1.0) -> "TermContrast":
        return cls(term_counts(topic_docs), term_counts(control_docs), alpha)

    @property
    def vocabulary(self) -> set[str]:
        return self._vocab

    def log_ratio(self, term: str) -> float:
        """ln p(term|topic) - ln p(term|control); positive favours topic."""
        if term not in self._vocab:
            raise VocabularyError(f"term {term!r} not in the combined vocabulary")
        v = len(self._vocab)
        a = self.alpha
        pt = (self.topic_counts.get(term, 0) + a) / (self._n_topic + a * v)
        pc = (self.control_counts.get(term, 0) + a) / (self._n_control + a * v)
        return math.log(pt) - math.log(pc)

    def score(self, term: str) -> float:
        return abs(self.log_ratio(term))


def discriminativeness(topic_docs, control_docs, term: str, alpha: float = 1.0) -> float:
    return TermContrast.from_docs(topic_docs, control_docs, alpha).score(term)


def discriminativeness_table(topic_docs, control_docs, alpha: float = 1.0) -> list[tuple[str, float, float]]:
    """(term, signed log ratio, score) for every term, highest score first."""
    tc = TermContrast.from_docs(topic_docs, control_docs, alpha)
    rows = [(t, tc.log_ratio(t)) for t in tc.vocabulary]
    rows.sort(key=lambda r: (-abs(r[1]), r[0]))
    return [(t, lr, abs(lr)) for t, lr in rows]


# -- part of speech ----------------------------------------------------------

# Coarse tagset of the Twitter POS tagger (Owoputi et al. style dumps).
TWEET_TAGSET = frozenset("N O ^ S Z V A R ! D P & T X Y # @ ~ U E $ , G L M".split())


@dataclass(frozen=True)
class PosAnnotatedDoc:
    tweet_id: str
    tagged: tuple[tuple[str, str], ...]
    tagset: frozenset[str] = TWEET_TAGSET

    def __post_init__(self):
        object.__setattr__(self, "tagged", tuple((str(t), str(g)) for t, g in self.tagged))
        for tok, tag in self.tagged:
            if tag not in self.tagset:
                raise SchemaError("tag", f"{tag!r} (token {tok!r}) not in the declared tagset")

    def __len__(self):
        return len(self.tagged)


def read_pos_annotations(lines: Iterable[str], tagset: frozenset[str] = TWEET_TAGSET) -> list[PosAnnotatedDoc]:
    """Parse ``tweet_id<TAB>token<TAB>tag`` lines, blank line between tweets."""
    docs = []
    current_id: Optional[str] = None
    current: list[tuple[str, str]] = []

    def flush():
        if current_id is not None and current:
            docs.append(PosAnnotatedDoc(current_id, tuple(current), tagset))

    for lineno, raw in enumerate(lines, 1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            flush()
            current_id, current = None, []
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise SchemaError("pos", f"line {lineno}: expected 3 tab-separated fields")
        tid, tok, tag = parts
        if current_id is not None and tid != current_id:
            flush()
            current = []
        current_id = tid
        current.append((tok, tag))
    flush()
    return docs


def _check_tag(docs: Sequence[PosAnnotatedDoc], tag: str) -> frozenset[str]:
    tagsets = {d.tagset for d in docs}
    if len(tagsets) > 1:
        raise SchemaError("tagset", "documents use different tagsets")
    tagset = next(iter(tagsets)) if tagsets else TWEET_TAGSET
    if tag not in tagset:
        raise SchemaError("tag", f"{tag!r} not in tagset")
    return tagset


def pos_proportions(docs: Sequence[PosAnnotatedDoc], tag: str) -> list[float]:
    _check_tag(docs, tag)
    out = []
    for d in docs:
        if len(d) == 0:
            raise EmptyInputError(f"doc {d.tweet_id} has no tokens")
        out.append(sum(1 for _, g in d.tagged if g == tag) / len(d))
    return out


def pos_t_test(a: Sequence[PosAnnotatedDoc], b: Sequence[PosAnnotatedDoc], tag: str, equal_var: bool = False) -> TTestResult:
    if {d.tagset for d in a} != {d.tagset for d in b}:
        raise SchemaError("tagset", "groups use different tagsets")
    return t_test(pos_proportions(a, tag), pos_proportions(b, tag), equal_var=equal_var)


@dataclass(frozen=True)
class LengthBin:
    length: int
    n: int
    mean: float
    sd: float
    se: float


def pos_by_length(docs: Sequence[PosAnnotatedDoc], tag: str) -> list[LengthBin]:
    """Mean tag proportion per tweet length, with both SD and SE."""
    props = pos_proportions(docs, tag)
    groups: dict[int, list[float]] = defaultdict(list)
    for d, p in zip(docs, props):
        groups[len(d)].append(p)
    bins = []
    for length in sorted(groups):
        vals = np.array(groups[length])
        sd = float(vals.std(ddof=1)) if len(vals) > 1 else 0.0
        bins.append(LengthBin(length, len(vals), float(vals.mean()), sd, sd / math.sqrt(len(vals))))
    return bins
