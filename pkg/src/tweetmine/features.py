"""Vocabulary construction and sparse tweet representations."""

from __future__ import annotations

import enum
import hashlib
import math
import warnings
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .corpstats import TermContrast, term_counts
from .errors import ConfigError, DataError, SchemaError
from .ingest import KeywordSet
from .textprep import TokenDoc, stem

TOPIC, CONTROL = 1, -1


class Policy(str, enum.Enum):
    FREQ_OVERALL = "freq_overall"
    FREQ_TOPIC = "freq_topic"
    FREQ_CONTROL = "freq_control"
    DISC_TOPIC = "disc_topic"
    DISC_CONTROL = "disc_control"
    UNION = "union"
    INTERSECTION = "intersection"


class Scheme(str, enum.Enum):
    BINARY = "binary"
    COUNT = "count"
    TFIDF = "tfidf"


class KeywordMatcher:
    """Recognise keyword-derived terms in preprocessed token streams.

    A term matches when it starts with a keyword, or when it equals the
    stemmed keyword (``aspergers`` stems to ``asperg``, which no longer has
    ``asperger`` as a prefix).
    """

    def __init__(self, ks: Optional[KeywordSet]):
        self.ks = ks
        self.stems = frozenset(stem(k) for k in ks) if ks else frozenset()

    def __call__(self, term: str) -> bool:
        if self.ks is None:
            return False
        return term in self.stems or self.ks.match_token(term) is not None


@dataclass(frozen=True)
class Vocabulary:
    terms: tuple[str, ...]
    policy: Policy = Policy.FREQ_OVERALL
    excluded: Optional[KeywordSet] = None
    requested_size: Optional[int] = None
    index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        terms = tuple(self.terms)
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "policy", Policy(self.policy))
        index = {t: i for i, t in enumerate(terms)}
        if len(index) != len(terms):
            raise DataError("vocabulary terms must be unique")
        object.__setattr__(self, "index", index)
        matcher = KeywordMatcher(self.excluded)
        bad = [t for t in terms if matcher(t)]
        if bad:
            raise DataError(f"vocabulary contains excluded terms: {bad[:5]}")

    def __len__(self):
        return len(self.terms)

    def __contains__(self, term):
        return term in self.index

    @property
    def is_short(self) -> bool:
        """True when fewer terms were available than requested."""
        return self.requested_size is not None and len(self.terms) < self.requested_size

    @property
    def hash(self) -> str:
        return hashlib.sha256("\n".join(self.terms).encode("utf-8")).hexdigest()

    def save(self, path) -> None:
        Path(path).write_text("".join(t + "\n" for t in self.terms), encoding="utf-8")

    @classmethod
    def load(cls, path, policy=Policy.FREQ_OVERALL, excluded=None) -> "Vocabulary":
        terms = [ln.strip() for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln.strip()]
        return cls(tuple(terms), policy, excluded)


# -- vocabulary policies -----------------------------------------------------


def _by_count(counts: Counter) -> list[str]:
    return [t for t, _ in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))]


def _by_log_ratio(contrast: TermContrast, combined: Counter, sign: int) -> list[str]:
    # strongest evidence for the requested class first; frequency then term break ties
    rows = [(t, sign * contrast.log_ratio(t)) for t in contrast.vocabulary]
    rows.sort(key=lambda r: (-r[1], -combined[r[0]], r[0]))
    return [t for t, _ in rows]


def build_vocabulary(
    topic_docs: Sequence[TokenDoc],
    control_docs: Sequence[TokenDoc],
    policy=Policy.FREQ_OVERALL,
    size: int = 1500,
    excluded: Optional[KeywordSet] = None,
    pair: Optional[str] = None,
    alpha: float = 1.0,
) -> Vocabulary:
    """Pick ``size`` terms according to ``policy``.

    ``union`` and ``intersection`` combine a topic list with a control list;
    ``pair`` selects whether those are the discriminative (``"disc"``) or the
    frequency (``"freq"``) lists. The default is ``disc`` for union and
    ``freq`` for intersection, because the top discriminative lists of the two
    classes are disjoint by construction. Union takes ``ceil(size/2)`` terms
    from each list; intersection intersects the full ``size``-long lists. Both
    are then re-ranked by combined frequency.
    """
    policy = Policy(policy)
    if size < 1:
        raise ConfigError("vocabulary size must be >= 1")
    keep = KeywordMatcher(excluded)

    def strip(counts: Counter) -> Counter:
        return Counter({t: c for t, c in counts.items() if not keep(t)})

    topic = strip(term_counts(topic_docs))
    control = strip(term_counts(control_docs))
    combined = topic + control
    needs_topic = policy in (Policy.FREQ_TOPIC, Policy.DISC_TOPIC, Policy.DISC_CONTROL, Policy.UNION, Policy.INTERSECTION)
    needs_control = policy in (Policy.FREQ_CONTROL, Policy.DISC_TOPIC, Policy.DISC_CONTROL, Policy.UNION, Policy.INTERSECTION)
    if (needs_topic and not topic) or (needs_control and not control) or not combined:
        raise DataError(f"policy {policy.value} needs non-empty corpora")

    contrast = TermContrast(topic, control, alpha)

    def ranked(which: str, cls: int) -> list[str]:
        if which == "freq":
            return _by_count(topic if cls == TOPIC else control)
        return _by_log_ratio(contrast, combined, cls)

    if policy is Policy.FREQ_OVERALL:
        terms = _by_count(combined)
    elif policy is Policy.FREQ_TOPIC:
        terms = _by_count(topic)
    elif policy is Policy.FREQ_CONTROL:
        terms = _by_count(control)
    elif policy is Policy.DISC_TOPIC:
        terms = ranked("disc", TOPIC)
    elif policy is Policy.DISC_CONTROL:
        terms = ranked("disc", CONTROL)
    else:
        which = pair or ("disc" if policy is Policy.UNION else "freq")
        if which not in ("disc", "freq"):
            raise ConfigError(f"pair must be 'disc' or 'freq', got {which!r}")
        if policy is Policy.UNION:
            half = math.ceil(size / 2)
            chosen = set(ranked(which, TOPIC)[:half]) | set(ranked(which, CONTROL)[:half])
        else:
            chosen = set(ranked(which, TOPIC)[:size]) & set(ranked(which, CONTROL)[:size])
        terms = [t for t in _by_count(combined) if t in chosen]

    terms = terms[:size]
    if len(terms) < size:
        warnings.warn(f"only {len(terms)} terms available for a vocabulary of {size}", stacklevel=2)
    return Vocabulary(tuple(terms), policy, excluded, size)


# -- vectors -----------------------------------------------------------------


@dataclass(frozen=True)
class IdfTable:
    """Document frequencies from a training corpus.

    ``mode="log"`` weights by ln(N/df); ``mode="inverse"`` weights by 1/df.
    """

    n_docs: int
    df: tuple[int, ...]
    mode: str = "log"

    def __post_init__(self):
        if self.mode not in ("log", "inverse"):
            raise ConfigError(f"unknown idf mode {self.mode!r}")

    @classmethod
    def fit(cls, docs: Sequence[TokenDoc], vocab: Vocabulary, mode: str = "log") -> "IdfTable":
        df = [0] * len(vocab)
        for d in docs:
            for t in set(d.tokens):
                j = vocab.index.get(t)
                if j is not None:
                    df[j] += 1
        return cls(len(docs), tuple(df), mode)

    def weight(self, j: int) -> float:
        d = self.df[j]
        if d == 0:
            return 0.0
        if self.mode == "log":
            return math.log(self.n_docs / d)
        return 1.0 / d


@dataclass(frozen=True)
class SparseVector:
    scheme: Scheme
    indices: tuple[int, ...]
    values: tuple[float, ...]
    dim: int

    def __post_init__(self):
        if len(self.indices) != len(self.values):
            raise DataError("indices and values differ in length")
        if any(b <= a for a, b in zip(self.indices, self.indices[1:])):
            raise DataError("indices must be strictly increasing")
        if self.indices and not (0 <= self.indices[0] and self.indices[-1] < self.dim):
            raise DataError("index out of range")
        scheme = Scheme(self.scheme)
        object.__setattr__(self, "scheme", scheme)
        for v in self.values:
            if scheme is Scheme.BINARY and v != 1.0:
                raise DataError(f"binary vector value {v} != 1")
            if scheme is Scheme.COUNT and (v <= 0 or v != int(v)):
                raise DataError(f"count vector value {v} is not a positive integer")
            if scheme is Scheme.TFIDF and not v > 0:
                raise DataError(f"tfidf vector value {v} is not positive")

    def __len__(self):
        return len(self.indices)

    def as_dict(self) -> dict[int, float]:
        return dict(zip(self.indices, self.values))

    def dense(self) -> np.ndarray:
        out = np.zeros(self.dim)
        out[list(self.indices)] = self.values
        return out


def vectorize(doc: TokenDoc, vocab: Vocabulary, scheme=Scheme.COUNT, idf: Optional[IdfTable] = None) -> SparseVector:
    scheme = Scheme(scheme)
    if scheme is Scheme.TFIDF and idf is None:
        raise ConfigError("tfidf needs an idf table from the training corpus")
    if idf is not None and len(idf.df) != len(vocab):
        raise SchemaError("idf", "table size does not match the vocabulary")
    counts: Counter = Counter()
    for t in doc.tokens:
        j = vocab.index.get(t)
        if j is not None:
            counts[j] += 1
    idx, vals = [], []
    for j in sorted(counts):
        if scheme is Scheme.BINARY:
            v = 1.0
        elif scheme is Scheme.COUNT:
            v = float(counts[j])
        else:
            v = counts[j] * idf.weight(j)
            if v <= 0.0:
                continue
        idx.append(j)
        vals.append(v)
    return SparseVector(scheme, tuple(idx), tuple(vals), len(vocab))


@dataclass(frozen=True)
class LabeledDataset:
    vectors: tuple[SparseVector, ...]
    labels: tuple[int, ...]
    vocab: Vocabulary
    scheme: Scheme
    idf: Optional[IdfTable] = None
    ids: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "vectors", tuple(self.vectors))
        object.__setattr__(self, "labels", tuple(int(y) for y in self.labels))
        if len(self.vectors) != len(self.labels):
            raise SchemaError("labels", f"{len(self.vectors)} vectors but {len(self.labels)} labels")
        if any(y not in (TOPIC, CONTROL) for y in self.labels):
            raise SchemaError("labels", "labels must be +1 or -1")
        for v in self.vectors:
            if v.scheme != self.scheme or v.dim != len(self.vocab):
                raise SchemaError("vectors", "all vectors must share the scheme and vocabulary")

    def __len__(self):
        return len(self.vectors)

    @property
    def y(self) -> np.ndarray:
        return np.array(self.labels, dtype=float)

    def matrix(self) -> sp.csr_matrix:
        indptr = [0]
        indices: list[int] = []
        data: list[float] = []
        for v in self.vectors:
            indices.extend(v.indices)
            data.extend(v.values)
            indptr.append(len(indices))
        return sp.csr_matrix(
            (np.array(data, dtype=float), np.array(indices, dtype=np.int64), np.array(indptr, dtype=np.int64)),
            shape=(len(self.vectors), len(self.vocab)),
        )

    def to_text(self) -> str:
        """Sparse text format: ``label idx:val idx:val ...`` one row per vector."""
        lines = []
        for y, v in zip(self.labels, self.vectors):
            cells = " ".join(f"{j}:{x!r}" for j, x in zip(v.indices, v.values))
            lines.append(f"{y:+d} {cells}".rstrip())
        return "".join(ln + "\n" for ln in lines)

    @classmethod
    def from_text(cls, text: str, vocab: Vocabulary, scheme=Scheme.COUNT, idf: Optional[IdfTable] = None) -> "LabeledDataset":
        scheme = Scheme(scheme)
        vectors, labels = [], []
        for line in text.splitlines():
            if not line.strip():
                continue
            head, *cells = line.split()
            pairs = [c.split(":") for c in cells]
            vectors.append(
                SparseVector(scheme, tuple(int(j) for j, _ in pairs), tuple(float(x) for _, x in pairs), len(vocab))
            )
            labels.append(int(head))
        return cls(tuple(vectors), tuple(labels), vocab, scheme, idf)


def featurize_corpus(
    docs: Sequence[TokenDoc],
    labels: Sequence[int],
    vocab: Vocabulary,
    scheme=Scheme.COUNT,
    idf: Optional[IdfTable] = None,
    idf_mode: str = "log",
) -> LabeledDataset:
    """Vectorize ``docs``.

    Without ``idf`` the document frequencies are fitted on ``docs`` themselves,
    which is right for a training set; test sets must pass the training table.
    """
    scheme = Scheme(scheme)
    if len(docs) != len(labels):
        raise SchemaError("labels", f"{len(docs)} docs but {len(labels)} labels")
    if idf is None:
        idf = IdfTable.fit(docs, vocab, idf_mode)
    vectors = tuple(vectorize(d, vocab, scheme, idf) for d in docs)
    return LabeledDataset(vectors, tuple(labels), vocab, scheme, idf, tuple(d.tweet_id for d in docs))
