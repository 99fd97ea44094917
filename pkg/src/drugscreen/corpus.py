"""Record ingestion, text cleaning and the row-filter funnel."""

import csv
import dataclasses
import enum
import functools
import io
import json
import logging
import re
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ._text import normalize_tokens
from .lexicon import DRUG_CATEGORIES, USE_ATTRIBUTES, KeywordHits, match_keywords

__all__ = [
    "Classification",
    "PostRecord",
    "CorpusError",
    "TextCleaner",
    "clean_text",
    "load_stopwords",
    "load_contractions",
    "FunnelReport",
    "filter_rows",
    "derive_attributes",
    "CandidateSets",
    "build_candidate_sets",
    "read_jsonl",
    "write_jsonl",
]

logger = logging.getLogger(__name__)

# URLs, hashtags (whole token), mentions and reserved words, in one pass.
# Alternation is tried left to right at each position, so a URL swallows any
# '#' or '@' it contains before the hashtag/mention branches see it. The
# leading lookahead only skips positions that cannot start a match.
_MARKUP = re.compile(
    r"(?=[hw#@rRfF])(?:https?://\S+|www\.\S+|#\S*|@\w+|(?i:\b(?:RT|FAV)\b))",
)

_CATEGORY_FIELDS = DRUG_CATEGORIES + USE_ATTRIBUTES


class CorpusError(ValueError):
    """Raised when an input record violates the record schema."""


class Classification(str, enum.Enum):
    UNLABELED = "UNLABELED"
    POSITIVE = "POSITIVE"
    NEGATIVE = "NEGATIVE"


def _data_text(name):
    return resources.files("drugscreen.data").joinpath(name).read_text(encoding="utf-8")


def load_stopwords(path=None):
    """Read a stopword list (one word per line, ``#`` comments)."""
    text = _data_text("stopwords.txt") if path is None else Path(path).read_text(encoding="utf-8")
    words = set()
    for line in text.splitlines():
        line = line.strip().lower()
        if line and not line.startswith("#"):
            words.add(line)
    return frozenset(words)


def load_contractions(path=None):
    """Read a ``contraction,expansion`` table into a dict of token tuples."""
    text = _data_text("contractions.csv") if path is None else Path(path).read_text(encoding="utf-8")
    reader = csv.reader(io.StringIO(text))
    next(reader, None)
    table = {}
    for row in reader:
        if len(row) != 2:
            continue
        table[row[0].strip().lower()] = tuple(row[1].lower().split())
    return table


class TextCleaner(BaseEstimator, TransformerMixin):
    """Turn raw post text into a list of lowercase word tokens.

    Removes newlines, hashtags, emoji and smileys, the reserved words RT and
    FAV, URLs, mentions, punctuation and digits; lowercases; expands
    contractions; drops stopwords; collapses whitespace.

    Parameters
    ----------
    stopwords : collection of str, optional
        Defaults to the shipped list.
    contractions : dict, optional
        Maps an apostrophe-free contraction (``dont``) to its expansion.
        Defaults to the shipped table.
    """

    def __init__(self, stopwords=None, contractions=None):
        self.stopwords = stopwords
        self.contractions = contractions

    def _tables(self):
        sw = self.stopwords
        ct = self.contractions
        sw = load_stopwords() if sw is None else frozenset(w.lower() for w in sw)
        ct = load_contractions() if ct is None else {k: tuple(v.split()) if isinstance(v, str) else tuple(v)
                                                     for k, v in ct.items()}
        return sw, ct

    def fit(self, X=None, y=None):
        self.stopwords_, self.contractions_ = self._tables()
        return self

    def clean(self, raw):
        if not hasattr(self, "stopwords_"):
            self.fit()
        if not raw:
            return []
        tokens = normalize_tokens(_MARKUP.sub(" ", raw))
        ct = self.contractions_
        sw = self.stopwords_
        if ct.keys().isdisjoint(tokens):
            return [t for t in tokens if t not in sw]
        out = []
        for t in tokens:
            exp = ct.get(t)
            if exp is None:
                if t not in sw:
                    out.append(t)
            else:
                out.extend(w for w in exp if w not in sw)
        return out

    __call__ = clean

    def transform(self, X):
        return [self.clean(x) for x in X]


@functools.lru_cache(maxsize=1)
def _default_cleaner():
    return TextCleaner().fit()


def clean_text(raw, stopwords=None, contractions=None):
    """Clean one raw text with the default (or given) word tables."""
    if stopwords is None and contractions is None:
        return _default_cleaner().clean(raw)
    return TextCleaner(stopwords, contractions).fit().clean(raw)


@dataclass
class PostRecord:
    """One ingested post.

    ``text`` holds cleaned tokens, or ``None`` before cleaning.
    Unknown input fields are kept in ``extra`` and written back unchanged.
    """

    id_str: str
    original_text: str = ""
    text: list = None
    lang: str = None
    possibly_sensitive: bool = False
    timestamp_ms: int = 0
    user_followers_count: int = 0
    user_friends_count: int = 0
    hits: KeywordHits = None
    classification: Classification = Classification.UNLABELED
    label: int = None
    score: float = None
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise CorpusError(f"record must be a JSON object, got {type(d).__name__}")
        if "id_str" not in d or d["id_str"] is None:
            raise CorpusError("record is missing 'id_str'")
        known = {
            "id_str", "text", "original_text", "lang", "possibly_sensitive", "timestamp_ms",
            "user_followers_count", "user_friends_count", "classification", "label", "score",
            "alpha", "beta", "both",
        }
        text = d.get("text")
        if text is not None and not isinstance(text, str):
            raise CorpusError(f"record {d['id_str']}: 'text' must be a string or null")
        if "original_text" in d:
            original = d.get("original_text") or ""
            tokens = text.split() if text else []
        else:
            original = text or ""
            tokens = None
        try:
            rec = cls(
                id_str=str(d["id_str"]),
                original_text=original,
                text=tokens,
                lang=d.get("lang"),
                possibly_sensitive=bool(d.get("possibly_sensitive") or False),
                timestamp_ms=int(d.get("timestamp_ms") or 0),
                user_followers_count=int(d.get("user_followers_count") or 0),
                user_friends_count=int(d.get("user_friends_count") or 0),
                classification=Classification(d.get("classification") or "UNLABELED"),
                label=None if d.get("label") is None else int(d["label"]),
                score=None if d.get("score") is None else float(d["score"]),
            )
        except (TypeError, ValueError) as exc:
            raise CorpusError(f"record {d['id_str']}: {exc}") from None
        if rec.user_followers_count < 0 or rec.user_friends_count < 0:
            raise CorpusError(f"record {rec.id_str}: negative follower/friend count")
        if "alpha" in d:
            counts = {k: int(d[k]) for k in _CATEGORY_FIELDS if k in d}
            rec.hits = KeywordHits(counts, int(d["alpha"]), int(d.get("beta", 0)))
            known |= set(counts)
        rec.extra = {k: v for k, v in d.items() if k not in known}
        return rec

    def to_dict(self):
        d = {
            "id_str": self.id_str,
            "text": " ".join(self.text) if self.text is not None else self.original_text,
            "original_text": self.original_text,
            "lang": self.lang,
            "possibly_sensitive": self.possibly_sensitive,
            "timestamp_ms": self.timestamp_ms,
            "user_followers_count": self.user_followers_count,
            "user_friends_count": self.user_friends_count,
        }
        if self.text is None:
            del d["original_text"]
        if self.hits is not None:
            d.update(self.hits.as_dict())
        d["classification"] = self.classification.value
        if self.label is not None:
            d["label"] = self.label
        if self.score is not None:
            d["score"] = self.score
        d.update(self.extra)
        return d


def read_jsonl(path, factory=PostRecord.from_dict):
    """Yield parsed objects from a JSON Lines file, one per non-blank line."""
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from None
            try:
                yield factory(obj)
            except CorpusError as exc:
                raise CorpusError(f"{path}:{lineno}: {exc}") from None


def write_jsonl(path, items):
    """Write records (or plain dicts) as JSON Lines; returns the count."""
    n = 0
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        for item in items:
            d = item.to_dict() if hasattr(item, "to_dict") else item
            fh.write(json.dumps(d, ensure_ascii=False, sort_keys=False))
            fh.write("\n")
            n += 1
    return n


@dataclass
class FunnelReport:
    """Record counts through the row filters, in filter order."""

    input: int = 0
    null_or_empty: int = 0
    non_english: int = 0
    no_keyword: int = 0

    STAGES = ("null_or_empty", "non_english", "no_keyword")

    @property
    def kept(self):
        return self.input - self.null_or_empty - self.non_english - self.no_keyword

    def __add__(self, other):
        return FunnelReport(*(getattr(self, f.name) + getattr(other, f.name)
                              for f in dataclasses.fields(self)))

    def rows(self):
        """``(stage, kept, dropped)`` rows; the first row is the input size."""
        out = [("input", self.input, 0)]
        remaining = self.input
        for stage in self.STAGES:
            dropped = getattr(self, stage)
            remaining -= dropped
            out.append((stage, remaining, dropped))
        return out

    def write_csv(self, path):
        with Path(path).open("w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["stage", "kept", "dropped"])
            w.writerows(self.rows())


def filter_rows(records, lexicon, report=None):
    """Drop empty, non-English and keyword-free records.

    Returns ``(kept, report)`` where ``kept`` is a lazy iterator; the report
    counters are complete once the iterator is exhausted.
    """
    report = FunnelReport() if report is None else report

    def _gen():
        for rec in records:
            if rec.text is None:
                raise ValueError(f"record {rec.id_str} has not been cleaned")
            report.input += 1
            if not rec.text:
                report.null_or_empty += 1
                continue
            if rec.lang != "en":
                report.non_english += 1
                continue
            hits, _ = match_keywords(rec.text, lexicon)
            if hits.alpha + hits.beta == 0:
                report.no_keyword += 1
                continue
            yield rec

    return _gen(), report


def derive_attributes(record, lexicon):
    """Return a copy of *record* with keyword counts filled in."""
    if record.text is None:
        raise ValueError(f"record {record.id_str} has not been cleaned")
    hits, _ = match_keywords(record.text, lexicon)
    return dataclasses.replace(record, hits=hits)


@dataclass
class CandidateSets:
    set1: list
    set2: list
    set3: list


def build_candidate_sets(records, sample_size, seed=0):
    """Split attributed records into the three disjoint labelling pools.

    ``set1`` holds records with both a drug and a use keyword; ``set2`` the
    remaining records where some category occurs at least twice; ``set3`` a
    seeded uniform sample (without replacement) of everything else.
    """
    set1, set2, rest = [], [], []
    seen = set()
    for rec in records:
        if rec.hits is None:
            raise ValueError(f"record {rec.id_str} has no derived attributes")
        if rec.id_str in seen:
            warnings.warn(f"duplicate id_str {rec.id_str!r} skipped", stacklevel=2)
            continue
        seen.add(rec.id_str)
        if rec.hits.both:
            set1.append(rec)
        elif any(c >= 2 for c in rec.hits.counts.values()):
            set2.append(rec)
        else:
            rest.append(rec)
    if sample_size > len(rest):
        warnings.warn(
            f"sample_size={sample_size} exceeds the {len(rest)} remaining records; using all",
            stacklevel=2,
        )
        sample_size = len(rest)
    rng = np.random.default_rng(seed)
    picked = np.sort(rng.choice(len(rest), size=sample_size, replace=False)) if sample_size else []
    return CandidateSets(set1, set2, [rest[i] for i in picked])
