"""Tweet record parsing, keyword-based corpus splitting and metadata counts."""

from __future__ import annotations

import enum
import io
import json
import re
import socket
import sys
import unicodedata
from collections.abc import Iterable, Iterator
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import BinaryIO, Optional

from .errors import ConfigError, DuplicateIdError, ParseError, SchemaError

URL_RE = re.compile(r"https?://\S+|www\.\S+", re.IGNORECASE)
HASHTAG_RE = re.compile(r"(?<![\w&])#(\w+)")
MENTION_RE = re.compile(r"(?<!\w)@(\w+)")
KEYWORD_TOKEN_RE = re.compile(r"[a-z0-9]+")

TWITTER_TIME_FORMAT = "%a %b %d %H:%M:%S %z %Y"


class Label(str, enum.Enum):
    TOPIC = "topic"
    CONTROL = "control"


@dataclass(frozen=True)
class Geo:
    lat: float
    lon: float

    def __post_init__(self):
        if not (-90.0 <= self.lat <= 90.0) or not (-180.0 <= self.lon <= 180.0):
            raise SchemaError("geo", f"coordinates out of range ({self.lat}, {self.lon})")


@dataclass(frozen=True)
class TweetRecord:
    id: str
    text: str
    created_at: Optional[datetime] = None
    author_id: Optional[str] = None
    is_retweet: bool = False
    lang: Optional[str] = None
    hashtags: tuple[str, ...] = ()
    mentions: tuple[str, ...] = ()
    urls: tuple[str, ...] = ()
    geo: Optional[Geo] = None
    in_reply_to: Optional[str] = None

    def __post_init__(self):
        if not self.text.strip():
            raise SchemaError("text", "empty after normalization")
        for tag in self.hashtags:
            if "#" in tag or tag != tag.lower():
                raise SchemaError("hashtags", f"not canonical: {tag!r}")


@dataclass(frozen=True)
class KeywordSet:
    keywords: tuple[str, ...]

    def __post_init__(self):
        kws = tuple(self.keywords)
        object.__setattr__(self, "keywords", kws)
        if len(set(kws)) != len(kws):
            raise ConfigError(f"duplicate keywords in {kws}")
        for k in kws:
            if not k or not KEYWORD_TOKEN_RE.fullmatch(k):
                raise ConfigError(f"keyword must be non-empty lowercase alphanumeric: {k!r}")
        for a in kws:
            for b in kws:
                if a != b and b.startswith(a):
                    raise ConfigError(f"keyword {a!r} is a prefix of {b!r}")

    @classmethod
    def parse(cls, spec: str) -> "KeywordSet":
        return cls(tuple(k.strip().lower() for k in spec.split(",") if k.strip()))

    def __iter__(self):
        return iter(self.keywords)

    def __len__(self):
        return len(self.keywords)

    def __contains__(self, item):
        return item in self.keywords

    def without(self, keyword: str) -> "KeywordSet":
        return KeywordSet(tuple(k for k in self.keywords if k != keyword))

    def union(self, other: "KeywordSet") -> "KeywordSet":
        return KeywordSet(self.keywords + tuple(k for k in other if k not in self.keywords))

    def match_token(self, token: str) -> Optional[str]:
        """Return the keyword that ``token`` is a suffixed form of, if any."""
        for k in self.keywords:
            if token.startswith(k):
                return k
        return None

    def __str__(self):
        return ",".join(self.keywords)


DEFAULT_KEYWORDS = KeywordSet(("autism", "adhd", "asperger", "aspie"))


@dataclass(frozen=True)
class LabeledCorpus:
    records: tuple[TweetRecord, ...]
    label: Label
    provenance: str = ""

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        object.__setattr__(self, "label", Label(self.label))
        seen = set()
        for r in self.records:
            if r.id in seen:
                raise DuplicateIdError(r.id)
            seen.add(r.id)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)


@dataclass(frozen=True)
class CorpusStats:
    n_total: int = 0
    n_original: int = 0
    n_retweets: int = 0
    n_with_hashtags: int = 0
    n_geo: int = 0
    n_with_urls: int = 0
    n_replies: int = 0
    n_with_mentions: int = 0
    n_unique_users: int = 0

    def as_dict(self) -> dict:
        return asdict(self)


# -- parsing -----------------------------------------------------------------


def _parse_time(value) -> Optional[datetime]:
    if value is None or value == "":
        return None
    if isinstance(value, (int, float)):
        return datetime.fromtimestamp(value / 1000.0 if value > 1e11 else value, tz=timezone.utc)
    s = str(value)
    try:
        dt = datetime.strptime(s, TWITTER_TIME_FORMAT)
    except ValueError:
        try:
            dt = datetime.fromisoformat(s.replace("Z", "+00:00"))
        except ValueError:
            raise SchemaError("created_at", f"unrecognised timestamp {s!r}") from None
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def _format_time(dt: Optional[datetime]) -> Optional[str]:
    if dt is None:
        return None
    return dt.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


def _as_id(value) -> Optional[str]:
    if value is None or value == "":
        return None
    return str(value)


def _entity_list(entities, key: str, subkeys: tuple[str, ...]):
    items = entities.get(key)
    if items is None:
        return None
    out = []
    for item in items:
        if isinstance(item, dict):
            for sk in subkeys:
                if item.get(sk):
                    out.append(str(item[sk]))
                    break
        else:
            out.append(str(item))
    return out


def _parse_geo(obj: dict) -> Optional[Geo]:
    geo = obj.get("geo")
    if isinstance(geo, dict):
        if "lat" in geo and "lon" in geo:
            return Geo(float(geo["lat"]), float(geo["lon"]))
        if "coordinates" in geo:
            lat, lon = geo["coordinates"][:2]
            return Geo(float(lat), float(lon))
    coords = obj.get("coordinates")
    if isinstance(coords, dict) and "coordinates" in coords:
        # GeoJSON order is (lon, lat)
        lon, lat = coords["coordinates"][:2]
        return Geo(float(lat), float(lon))
    return None


def extract_entities(text: str) -> tuple[list[str], list[str], list[str]]:
    """Pull hashtags, mentions and URLs out of raw text."""
    urls = URL_RE.findall(text)
    rest = URL_RE.sub(" ", text)
    hashtags = [h.lower() for h in HASHTAG_RE.findall(rest)]
    mentions = MENTION_RE.findall(rest)
    return hashtags, mentions, urls


def record_from_dict(obj: dict) -> TweetRecord:
    if not isinstance(obj, dict):
        raise SchemaError("record", "expected a JSON object")
    rid = _as_id(obj.get("id_str", obj.get("id")))
    if rid is None:
        raise SchemaError("id")
    raw_text = obj.get("full_text", obj.get("text"))
    if raw_text is None:
        raise SchemaError("text")
    text = unicodedata.normalize("NFC", str(raw_text))

    user = obj.get("user")
    author = None
    if isinstance(user, dict):
        author = _as_id(user.get("id_str", user.get("id")))
    if author is None:
        author = _as_id(obj.get("author_id"))

    is_rt = bool(obj.get("retweeted")) or "retweeted_status" in obj or text.startswith("RT @")

    tags, ments, urls = extract_entities(text)
    entities = obj.get("entities")
    if isinstance(entities, dict):
        found = _entity_list(entities, "hashtags", ("text", "tag"))
        if found is not None:
            tags = [t.lstrip("#").lower() for t in found]
        found = _entity_list(entities, "user_mentions", ("screen_name", "username"))
        if found is None:
            found = _entity_list(entities, "mentions", ("screen_name", "username"))
        if found is not None:
            ments = [m.lstrip("@") for m in found]
        found = _entity_list(entities, "urls", ("expanded_url", "url"))
        if found is not None:
            urls = found

    reply = _as_id(
        obj.get("in_reply_to_status_id_str", obj.get("in_reply_to_status_id", obj.get("in_reply_to")))
    )
    return TweetRecord(
        id=rid,
        text=text,
        created_at=_parse_time(obj.get("created_at")),
        author_id=author,
        is_retweet=is_rt,
        lang=obj.get("lang"),
        hashtags=tuple(tags),
        mentions=tuple(ments),
        urls=tuple(urls),
        geo=_parse_geo(obj),
        in_reply_to=reply,
    )


def parse_record(line, offset: int = 0) -> TweetRecord:
    """Parse one NDJSON line. ``offset`` is the byte position of the line in its source."""
    if isinstance(line, bytes):
        line = line.decode("utf-8")
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, offset + len(line[: e.pos].encode("utf-8"))) from None
    return record_from_dict(obj)


def record_to_dict(rec: TweetRecord) -> dict:
    return {
        "id": rec.id,
        "text": rec.text,
        "created_at": _format_time(rec.created_at),
        "user": {"id": rec.author_id},
        "retweeted": rec.is_retweet,
        "lang": rec.lang,
        "entities": {
            "hashtags": [{"text": h} for h in rec.hashtags],
            "user_mentions": [{"screen_name": m} for m in rec.mentions],
            "urls": [{"expanded_url": u} for u in rec.urls],
        },
        "geo": None if rec.geo is None else {"lat": rec.geo.lat, "lon": rec.geo.lon},
        "in_reply_to_status_id": rec.in_reply_to,
    }


def serialize_record(rec: TweetRecord) -> str:
    return json.dumps(record_to_dict(rec), ensure_ascii=False, separators=(",", ":"))


def _keep_language(rec: TweetRecord, lang: Optional[str]) -> bool:
    if lang is None or rec.lang is None:
        return True
    return rec.lang.split("-")[0].lower() == lang


def iter_records(stream: BinaryIO, lang: Optional[str] = "en") -> Iterator[TweetRecord]:
    """Yield records from a binary NDJSON stream, skipping blank lines.

    Records whose ``lang`` field is present and not ``lang`` are dropped;
    pass ``lang=None`` to keep everything.
    """
    offset = 0
    for raw in stream:
        start = offset
        offset += len(raw)
        if not raw.strip():
            continue
        rec = parse_record(raw, start)
        if _keep_language(rec, lang):
            yield rec


def open_source(source: str) -> BinaryIO:
    """Open a file path, ``-`` (stdin) or ``tcp://host:port`` as a binary stream."""
    if source == "-":
        return sys.stdin.buffer
    if source.startswith("tcp://"):
        host, _, port = source[len("tcp://"):].rpartition(":")
        if not host or not port.isdigit():
            raise ConfigError(f"bad TCP address {source!r}")
        sock = socket.create_connection((host, int(port)))
        return sock.makefile("rb")
    return open(source, "rb")


def read_records(source: str, lang: Optional[str] = "en") -> list[TweetRecord]:
    with open_source(source) as fh:
        return list(iter_records(fh, lang=lang))


def write_records(path, records: Iterable[TweetRecord]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(serialize_record(rec) + "\n")


# -- keyword matching and splitting ----------------------------------------


def keyword_tokens(text: str) -> list[str]:
    """Lowercased alphanumeric runs of ``text`` with URLs removed.

    Sigils (``#``, ``@``) fall away because they are not alphanumeric.
    """
    return KEYWORD_TOKEN_RE.findall(URL_RE.sub(" ", text.casefold()))


def matched_keywords(text: str, ks: KeywordSet) -> frozenset[str]:
    hits = set()
    for tok in keyword_tokens(text):
        k = ks.match_token(tok)
        if k is not None:
            hits.add(k)
    return frozenset(hits)


def matches_keywords(text: str, ks: KeywordSet) -> bool:
    return any(ks.match_token(tok) is not None for tok in keyword_tokens(text))


def split_corpus(
    records: Iterable[TweetRecord], ks: KeywordSet, provenance: str = ""
) -> tuple[LabeledCorpus, LabeledCorpus]:
    seen: set[str] = set()
    topic, control = [], []
    for rec in records:
        if rec.id in seen:
            raise DuplicateIdError(rec.id)
        seen.add(rec.id)
        (topic if matches_keywords(rec.text, ks) else control).append(rec)
    note = f"{provenance}; keywords={ks}" if provenance else f"keywords={ks}"
    return (
        LabeledCorpus(tuple(topic), Label.TOPIC, note),
        LabeledCorpus(tuple(control), Label.CONTROL, note),
    )


def corpus_stats(c: Iterable[TweetRecord]) -> CorpusStats:
    n = rt = tags = geo = urls = replies = ments = 0
    users = set()
    for r in c:
        n += 1
        rt += r.is_retweet
        tags += bool(r.hashtags)
        geo += r.geo is not None
        urls += bool(r.urls)
        replies += r.in_reply_to is not None
        ments += bool(r.mentions)
        if r.author_id is not None:
            users.add(r.author_id)
    return CorpusStats(
        n_total=n,
        n_original=n - rt,
        n_retweets=rt,
        n_with_hashtags=tags,
        n_geo=geo,
        n_with_urls=urls,
        n_replies=replies,
        n_with_mentions=ments,
        n_unique_users=len(users),
    )


# -- corpus cache directory -------------------------------------------------

CORPUS_FILES = {Label.TOPIC: "topic.ndjson", Label.CONTROL: "control.ndjson"}


def write_corpus_dir(out_dir, topic: LabeledCorpus, control: LabeledCorpus) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stats = {}
    for corpus in (topic, control):
        write_records(out / CORPUS_FILES[corpus.label], corpus.records)
        stats[corpus.label.value] = corpus_stats(corpus).as_dict()
    stats["provenance"] = topic.provenance
    (out / "stats.json").write_text(json.dumps(stats, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return stats


def read_corpus_dir(in_dir, label) -> LabeledCorpus:
    label = Label(label)
    path = Path(in_dir) / CORPUS_FILES[label]
    with open(path, "rb") as fh:
        records = list(iter_records(fh, lang=None))
    return LabeledCorpus(tuple(records), label, str(path))


def load_text_stream(text: str) -> io.BytesIO:
    """Wrap NDJSON text as a binary stream (handy for tests and pipes)."""
    return io.BytesIO(text.encode("utf-8"))


__all__ = [
    "CorpusStats",
    "DEFAULT_KEYWORDS",
    "Geo",
    "KeywordSet",
    "Label",
    "LabeledCorpus",
    "TweetRecord",
    "corpus_stats",
    "extract_entities",
    "iter_records",
    "matched_keywords",
    "matches_keywords",
    "open_source",
    "parse_record",
    "read_corpus_dir",
    "read_records",
    "record_from_dict",
    "record_to_dict",
    "serialize_record",
    "split_corpus",
    "write_corpus_dir",
    "write_records",
]
