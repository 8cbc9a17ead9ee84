"""Seeded synthetic tweet corpora with known generative structure.

Used by the test-suite and the acceptance checks, and handy for trying the
CLI without real data. Words are made-up CV-syllable strings that survive
preprocessing unchanged, so the generating lexicons can be read straight off
the token output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from typing import Optional, Sequence

import numpy as np

from .ingest import KeywordSet, TweetRecord
from .textprep import DEFAULT_STOPWORDS, stem

CONSONANTS = "bdfgklmnprtvz"
VOWELS = "aeiou"
FINAL_VOWELS = "ao"
EPOCH = datetime(2013, 8, 26, tzinfo=timezone.utc)


def make_lexicon(n: int, rng: np.random.Generator, avoid: Sequence[str] = (), taken: Optional[set] = None) -> list[str]:
    """``n`` distinct pseudo-words that are their own stems."""
    taken = set() if taken is None else taken
    words: list[str] = []
    while len(words) < n:
        syll = int(rng.integers(2, 4))
        parts = [rng.choice(list(CONSONANTS)) + rng.choice(list(VOWELS)) for _ in range(syll - 1)]
        parts.append(rng.choice(list(CONSONANTS)) + rng.choice(list(FINAL_VOWELS)))
        w = "".join(parts)
        if w in taken or w in DEFAULT_STOPWORDS or stem(w) != w:
            continue
        if any(w.startswith(a) or a.startswith(w) for a in avoid):
            continue
        taken.add(w)
        words.append(w)
    return words


def zipf_probs(n: int, exponent: float = -1.0) -> np.ndarray:
    p = np.arange(1, n + 1, dtype=float) ** exponent
    return p / p.sum()


@dataclass
class TopicModel:
    """Mixture of an own lexicon and a lexicon shared with other topics."""

    own: list[str]
    shared: list[str]
    p_own: float = 0.6
    exponent: float = -1.0

    def sample_tokens(self, n: int, rng: np.random.Generator) -> list[str]:
        own_p = zipf_probs(len(self.own), self.exponent)
        shared_p = zipf_probs(len(self.shared), self.exponent)
        out = []
        for _ in range(n):
            if rng.random() < self.p_own:
                out.append(self.own[rng.choice(len(self.own), p=own_p)])
            else:
                out.append(self.shared[rng.choice(len(self.shared), p=shared_p)])
        return out


def _length(rng: np.random.Generator, log_mean: float, log_sd: float) -> int:
    return max(1, int(round(math.exp(rng.normal(log_mean, log_sd)))))


def _keyword_form(k: str, rng: np.random.Generator) -> str:
    u = rng.random()
    if u < 0.5:
        return k
    if u < 0.75:
        return "#" + k
    return k + rng.choice(["awareness", "speaks", "s", "life"])


@dataclass
class SyntheticCorpus:
    records: list[TweetRecord]
    topic_model: TopicModel
    control_model: TopicModel
    keywords: KeywordSet
    # tweet id -> keyword inserted (topic tweets only)
    keyword_of: dict[str, str]


def two_topic_corpus(
    n_topic: int = 5000,
    n_control: int = 5000,
    seed: int = 0,
    keywords: KeywordSet = KeywordSet(("autism", "adhd", "asperger", "aspie")),
    polysemous: Optional[str] = None,
    polysemous_control_share: float = 0.5,
    lexicon_size: int = 400,
    shared_size: int = 600,
    p_own: float = 0.6,
    topic_log_length: float = 2.3,
    control_log_length: float = 2.1,
    log_sd: float = 0.35,
) -> SyntheticCorpus:
    """Topic tweets each carry exactly one keyword; control tweets carry none.

    If ``polysemous`` names a keyword, that share of its tweets is drawn from
    the control topic model instead (the keyword is used loosely).
    """
    rng = np.random.default_rng(seed)
    taken: set = set()
    avoid = tuple(keywords)
    shared = make_lexicon(shared_size, rng, avoid, taken)
    topic = TopicModel(make_lexicon(lexicon_size, rng, avoid, taken), shared, p_own)
    control = TopicModel(make_lexicon(lexicon_size, rng, avoid, taken), shared, p_own)
    kws = list(keywords)
    records = []
    keyword_of = {}
    for i in range(n_topic):
        k = kws[i % len(kws)]
        model = topic
        if k == polysemous and rng.random() < polysemous_control_share:
            model = control
        words = model.sample_tokens(_length(rng, topic_log_length, log_sd), rng)
        words.insert(int(rng.integers(0, len(words) + 1)), _keyword_form(k, rng))
        tid = f"t{i:06d}"
        keyword_of[tid] = k
        records.append(_record(tid, words, i, rng))
    for i in range(n_control):
        words = control.sample_tokens(_length(rng, control_log_length, log_sd), rng)
        records.append(_record(f"c{i:06d}", words, n_topic + i, rng))
    order = rng.permutation(len(records))
    return SyntheticCorpus([records[j] for j in order], topic, control, keywords, keyword_of)


def condition_corpora(n_each: int = 2000, seed: int = 0, p_own: float = 0.6):
    """Two condition corpora with distinct lexicons (e.g. autism vs alzheimer).

    Returns ``(records_a, records_b, keywords_a, keywords_b)``.
    """
    rng = np.random.default_rng(seed)
    ka = KeywordSet(("autism", "adhd", "asperger", "aspie"))
    kb = KeywordSet(("alzheimer",))
    taken: set = set()
    avoid = tuple(ka) + tuple(kb)
    shared = make_lexicon(600, rng, avoid, taken)
    models = [TopicModel(make_lexicon(400, rng, avoid, taken), shared, p_own) for _ in range(2)]
    out = []
    for which, (model, ks, prefix) in enumerate(((models[0], ka, "a"), (models[1], kb, "z"))):
        kws = list(ks)
        recs = []
        for i in range(n_each):
            words = model.sample_tokens(_length(rng, 2.3, 0.35), rng)
            words.insert(int(rng.integers(0, len(words) + 1)), _keyword_form(kws[i % len(kws)], rng))
            recs.append(_record(f"{prefix}{i:06d}", words, which * n_each + i, rng))
        out.append(recs)
    return out[0], out[1], ka, kb


def _record(tid: str, words: list[str], i: int, rng: np.random.Generator) -> TweetRecord:
    return TweetRecord(
        id=tid,
        text=" ".join(words),
        created_at=EPOCH + timedelta(minutes=int(i)),
        author_id=f"u{int(rng.integers(0, 10_000))}",
        lang="en",
        hashtags=tuple(w[1:] for w in words if w.startswith("#")),
    )


def power_law_counts(n_terms: int, exponent: float, scale: float = 1e6) -> dict[str, float]:
    """Noiseless rank/count pairs: count = scale * rank**exponent."""
    return {f"w{r:06d}": scale * r**exponent for r in range(1, n_terms + 1)}


def multinomial_power_law_sample(n_tokens: int, n_terms: int, exponent: float, seed: int) -> dict[str, int]:
    rng = np.random.default_rng(seed)
    draws = rng.multinomial(n_tokens, zipf_probs(n_terms, exponent))
    return {f"w{r:06d}": int(c) for r, c in enumerate(draws, 1) if c > 0}


def pos_groups(n: int, noun_rate: float, seed: int, tag_other: str = "V"):
    """Tagged docs whose tokens are nouns with probability ``noun_rate``."""
    from .corpstats import PosAnnotatedDoc

    rng = np.random.default_rng(seed)
    docs = []
    for i in range(n):
        length = int(rng.integers(5, 25))
        tags = ["N" if rng.random() < noun_rate else tag_other for _ in range(length)]
        docs.append(PosAnnotatedDoc(f"p{seed}_{i}", tuple((f"w{j}", t) for j, t in enumerate(tags))))
    return docs
