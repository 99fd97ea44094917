"""Drug and use keyword vocabulary with category attribution.

The shipped ``data/lexicon.csv`` lists every drug keyword by category plus
the consumption-method ("use") keywords grouped under their attribute name.
Matching is exact on cleaned tokens, longest phrase first, without reusing
tokens across overlapping matches.
"""

import csv
import enum
import functools
import io
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from ._text import APOSTROPHES

__all__ = [
    "DRUG_CATEGORIES",
    "USE_ATTRIBUTES",
    "Kind",
    "Entry",
    "Lexicon",
    "KeywordHits",
    "Span",
    "LexiconError",
    "load_lexicon",
    "default_lexicon",
    "match_keywords",
]

DRUG_CATEGORIES = (
    "Amphetamine", "Cocaine", "DMT", "General", "GHB", "Heroin", "Hydrocodone",
    "Ketamine", "Klonopin", "LSD", "Marijuana", "MDMA", "Mescaline",
    "Methamphetamine", "Mushrooms", "Nitrous_Oxide", "Opioid", "PCP", "Peyote",
    "Ritalin", "Steroids", "Synthetic_Cathinones", "Xanax",
)

USE_ATTRIBUTES = (
    "snort", "blotter", "inject", "ingest", "smoke", "chew", "vaporize", "vape",
    "inhale", "hitter", "shoot", "tabs", "patches", "pills", "bong", "pipe",
    "joint", "needle", "hookah", "grinder", "sinker", "popper",
)

_PHRASE_PUNCT = re.compile(r"[^\w\s]|_")


class LexiconError(ValueError):
    """Raised for malformed or inconsistent lexicon files."""


class Kind(str, enum.Enum):
    DRUG = "DRUG"
    USE = "USE"


@dataclass(frozen=True)
class Entry:
    phrase: tuple
    category: str
    kind: Kind

    @property
    def text(self):
        return " ".join(self.phrase)

    @property
    def alphabetic(self):
        """True when every token is purely alphabetic.

        Keywords carrying digits (``420``, ``cloud 9``) are kept for fidelity
        but can never survive digit removal during cleaning.
        """
        return all(t.isalpha() for t in self.phrase)


@dataclass(frozen=True)
class Span:
    """A matched phrase occurrence: ``tokens[start:start + length]``."""

    start: int
    length: int
    entries: tuple

    @property
    def kinds(self):
        return frozenset(e.kind for e in self.entries)

    @property
    def phrase(self):
        return self.entries[0].phrase


@dataclass
class KeywordHits:
    """Per-category keyword occurrence counts for one text."""

    counts: dict = field(default_factory=dict)
    alpha: int = 0
    beta: int = 0

    @property
    def both(self):
        return int(self.alpha > 0 and self.beta > 0)

    def __getitem__(self, category):
        return self.counts.get(category, 0)

    def as_dict(self):
        out = {"alpha": self.alpha, "beta": self.beta, "both": self.both}
        out.update(self.counts)
        return out


def normalize_phrase(text):
    """Lowercase a keyword and split it the way cleaned text is split.

    Punctuation inside a keyword (``k-pin``) turns into a token boundary,
    mirroring the cleaner; digits are left alone.
    """
    text = APOSTROPHES.sub("", text.strip().lower())
    return tuple(_PHRASE_PUNCT.sub(" ", text).split())


class Lexicon:
    """Immutable keyword vocabulary.

    Parameters
    ----------
    entries : iterable of Entry
        Keyword entries. ``(phrase, kind)`` pairs must be unique.
    """

    def __init__(self, entries):
        entries = tuple(entries)
        seen = set()
        drug_cats, use_cats = [], []
        by_phrase = {}
        for e in entries:
            if not e.phrase or any(t != t.lower() or not t for t in e.phrase):
                raise LexiconError(f"invalid phrase {e.phrase!r}")
            key = (e.phrase, e.kind)
            if key in seen:
                raise LexiconError(f"duplicate keyword {e.text!r} for kind {e.kind.value}")
            seen.add(key)
            cats = drug_cats if e.kind is Kind.DRUG else use_cats
            if e.category not in cats:
                cats.append(e.category)
            by_phrase.setdefault(e.phrase, []).append(e)
        self.entries = entries
        self.drug_categories = tuple(drug_cats)
        self.use_categories = tuple(use_cats)
        self.categories = self.drug_categories + self.use_categories
        self._by_phrase = {p: tuple(es) for p, es in by_phrase.items()}
        # candidates per first token, longest phrase first
        index = {}
        for p in self._by_phrase:
            index.setdefault(p[0], []).append(p)
        self._index = {k: sorted(v, key=lambda p: (-len(p), p)) for k, v in index.items()}

    def __len__(self):
        return len(self.entries)

    def __repr__(self):
        return (f"Lexicon({len(self.entries)} entries, {len(self.drug_categories)} drug "
                f"categories, {len(self.use_categories)} use categories)")

    def phrases(self, kind, alphabetic_only=False):
        """Sorted tuple of phrases of the given kind."""
        kind = Kind(kind)
        return tuple(sorted(
            e.phrase for e in self.entries
            if e.kind is kind and (e.alphabetic or not alphabetic_only)
        ))

    def lookup(self, phrase):
        """Entries for an exact phrase (tuple of tokens), or ``()``."""
        if isinstance(phrase, str):
            phrase = normalize_phrase(phrase)
        return self._by_phrase.get(tuple(phrase), ())

    def kind_of(self, category):
        if category in self.drug_categories:
            return Kind.DRUG
        if category in self.use_categories:
            return Kind.USE
        raise KeyError(category)

    def _candidates(self, token):
        return self._index.get(token, ())


def _read_rows(handle, source):
    reader = csv.reader(handle)
    header = next(reader, None)
    if header is None:
        raise LexiconError(f"{source}: empty file, expected header 'category,keyword,kind'")
    if [h.strip().lower() for h in header] != ["category", "keyword", "kind"]:
        raise LexiconError(f"{source}:1: bad header {header!r}")
    entries = []
    seen = {}
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 3:
            raise LexiconError(f"{source}:{lineno}: expected 3 fields, got {len(row)}")
        category, keyword, kind = (c.strip() for c in row)
        if not category:
            raise LexiconError(f"{source}:{lineno}: empty category")
        try:
            kind = Kind(kind.upper())
        except ValueError:
            raise LexiconError(f"{source}:{lineno}: kind must be DRUG or USE, got {kind!r}") from None
        phrase = normalize_phrase(keyword)
        if not phrase:
            raise LexiconError(f"{source}:{lineno}: empty keyword")
        if (phrase, kind) in seen:
            raise LexiconError(
                f"{source}:{lineno}: duplicate keyword {' '.join(phrase)!r} "
                f"(first seen on line {seen[phrase, kind]})"
            )
        seen[phrase, kind] = lineno
        entries.append(Entry(phrase, category, kind))
    return Lexicon(entries)


def load_lexicon(path):
    """Load a ``category,keyword,kind`` CSV file into a :class:`Lexicon`."""
    path = Path(path)
    with path.open(encoding="utf-8", newline="") as fh:
        return _read_rows(fh, str(path))


@functools.lru_cache(maxsize=1)
def default_lexicon():
    """The shipped keyword lexicon."""
    text = resources.files("drugscreen.data").joinpath("lexicon.csv").read_text(encoding="utf-8")
    return _read_rows(io.StringIO(text), "lexicon.csv")


def match_keywords(tokens, lexicon):
    """Count keyword occurrences in a cleaned token sequence.

    Returns ``(hits, spans)``. At each position the longest phrase starting
    there wins; its tokens are consumed. A phrase listed under both kinds
    (``tabs``) counts once for each of its entries.
    """
    counts = dict.fromkeys(lexicon.categories, 0)
    spans = []
    alpha = beta = 0
    i, n = 0, len(tokens)
    while i < n:
        matched = None
        for phrase in lexicon._candidates(tokens[i]):
            k = len(phrase)
            if k == 1 or tuple(tokens[i:i + k]) == phrase:
                matched = phrase
                break
        if matched is None:
            i += 1
            continue
        entries = lexicon._by_phrase[matched]
        for e in entries:
            counts[e.category] += 1
            if e.kind is Kind.DRUG:
                alpha += 1
            else:
                beta += 1
        spans.append(Span(i, len(matched), entries))
        i += len(matched)
    return KeywordHits(counts, alpha, beta), spans
