"""Tweet normalization, tokenization, stop-word removal and stemming."""

from __future__ import annotations

import html
import re
import unicodedata
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator, Optional, Union

from nltk.stem.porter import PorterStemmer

from .errors import ConfigError, DataError
from .ingest import URL_RE, TweetRecord


def load_stopwords(path: Union[str, Path, None] = None) -> frozenset[str]:
    """Read a stop-word list (one word per line, ``#`` comments).

    With no path, the bundled English list is used.
    """
    if path is None:
        text = resources.files("tweetmine").joinpath("data/stopwords_en.txt").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    words = set()
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip().lower()
        if line:
            words.add(line)
    return frozenset(words)


DEFAULT_STOPWORDS = load_stopwords()

_VALID_TOKEN = re.compile(r"[a-z0-9]+")


@dataclass(frozen=True)
class PipelineConfig:
    stopword_list: frozenset[str] = field(default=DEFAULT_STOPWORDS)
    min_token_len: int = 2
    url_token: str = "url"
    mention_token: str = "atus"
    stem_enabled: bool = True

    def __post_init__(self):
        object.__setattr__(self, "stopword_list", frozenset(self.stopword_list))
        if self.min_token_len < 1:
            raise ConfigError("min_token_len must be >= 1")
        for tok in (self.url_token, self.mention_token):
            if not _VALID_TOKEN.fullmatch(tok) or tok in self.stopword_list or len(tok) < self.min_token_len:
                raise ConfigError(f"placeholder token {tok!r} would not survive preprocessing")


@dataclass(frozen=True)
class TokenDoc:
    tweet_id: str
    tokens: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        for t in self.tokens:
            if not t or t != t.lower() or any(ch.isspace() for ch in t):
                raise DataError(f"invalid token {t!r} in doc {self.tweet_id}")

    def __len__(self):
        return len(self.tokens)


# -- normalization -----------------------------------------------------------

MENTION_RE = re.compile(r"(?<!\w)\.?@\w+")
EMOTICON_RE = re.compile(
    r"(?<!\w)(?:[:;=8][\-o*'^]?[)\](\[dpb/\\|3*>]+|x-?d+|<3+|\^_?\^|-_-|o_o)(?!\w)"
)
APOSTROPHES = "'’ʼ`"


def _is_droppable(ch: str) -> bool:
    cat = unicodedata.category(ch)
    return cat[0] in "PSC" and not ch.isspace()


def normalize(text: str, cfg: Optional[PipelineConfig] = None) -> str:
    cfg = cfg or DEFAULT_CONFIG
    s = unicodedata.normalize("NFC", text)
    s = html.unescape(s).lower()
    s = URL_RE.sub(f" {cfg.url_token} ", s)
    s = MENTION_RE.sub(f" {cfg.mention_token} ", s)
    s = EMOTICON_RE.sub(" ", s)
    for a in APOSTROPHES:
        s = s.replace(a, "")
    # hashtag sigils, hyphens, other punctuation, symbols and emoji all become separators
    s = "".join(" " if _is_droppable(ch) else ch for ch in s)
    return " ".join(s.split())


# -- stemming ----------------------------------------------------------------

IRREGULAR_PLURALS = {
    "children": "child",
    "men": "man",
    "women": "woman",
    "mice": "mouse",
    "feet": "foot",
    "teeth": "tooth",
    "geese": "goose",
    "oxen": "ox",
    "lice": "louse",
}

_porter = PorterStemmer(mode=PorterStemmer.NLTK_EXTENSIONS)
_ALPHA = re.compile(r"[a-z]+")


@lru_cache(maxsize=1 << 18)
def stem(term: str) -> str:
    """Porter stem with irregular plurals lemmatized first.

    Anything that is not plain lowercase ASCII letters (digits, mixed tokens,
    other scripts) is returned untouched.
    """
    if not _ALPHA.fullmatch(term):
        return term
    return _porter.stem(IRREGULAR_PLURALS.get(term, term), to_lowercase=False)


# -- full pipeline -----------------------------------------------------------


def _keep(tok: str, cfg: PipelineConfig) -> bool:
    if tok in cfg.stopword_list:
        return False
    return tok.isdigit() or len(tok) >= cfg.min_token_len


def tokenize(text: str, cfg: Optional[PipelineConfig] = None) -> list[str]:
    cfg = cfg or DEFAULT_CONFIG
    tokens = [t for t in normalize(text, cfg).split() if _keep(t, cfg)]
    if cfg.stem_enabled:
        fixed = (cfg.url_token, cfg.mention_token)
        tokens = [t if t in fixed else stem(t) for t in tokens]
        # a stem can land on a stop word or fall under the length floor
        tokens = [t for t in tokens if _keep(t, cfg)]
    return tokens


def preprocess(rec: Union[TweetRecord, str], cfg: Optional[PipelineConfig] = None, tweet_id: str = "") -> TokenDoc:
    if isinstance(rec, TweetRecord):
        return TokenDoc(rec.id, tuple(tokenize(rec.text, cfg)))
    return TokenDoc(tweet_id, tuple(tokenize(rec, cfg)))


def preprocess_all(records: Iterable[TweetRecord], cfg: Optional[PipelineConfig] = None) -> list[TokenDoc]:
    return [preprocess(r, cfg) for r in records]


# -- token doc files ---------------------------------------------------------


def write_token_docs(path, docs: Iterable[TokenDoc]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for d in docs:
            fh.write(f"{d.tweet_id}\t{' '.join(d.tokens)}\n")


def iter_token_docs(path) -> Iterator[TokenDoc]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            tid, sep, rest = line.partition("\t")
            if not sep:
                raise DataError(f"{path}:{lineno}: expected 'id<TAB>tokens'")
            yield TokenDoc(tid, tuple(rest.split()))


def read_token_docs(path) -> list[TokenDoc]:
    return list(iter_token_docs(path))


DEFAULT_CONFIG = PipelineConfig()
