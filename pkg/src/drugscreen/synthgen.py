"""Label-preserving synthetic texts by same-kind keyword substitution.

Each labelled source text yields ``m`` variants. In every variant each
matched use keyword is swapped for a different use keyword drawn uniformly
at random, then each matched drug keyword for a different drug keyword.
Everything that is not a keyword is copied through untouched.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .corpus import CorpusError
from .lexicon import Kind, match_keywords, normalize_phrase

__all__ = [
    "LabeledText",
    "Replacement",
    "SynthConfig",
    "SynthBatch",
    "ClassBalance",
    "generate_synthetic",
    "balance_report",
]


@dataclass(frozen=True)
class Replacement:
    """One substituted span, positioned in the synthetic token sequence."""

    start: int
    length: int
    original: tuple
    replacement: tuple
    kind: Kind

    def to_dict(self):
        return {
            "start": self.start,
            "length": self.length,
            "original": " ".join(self.original),
            "replacement": " ".join(self.replacement),
            "kind": self.kind.value,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(int(d["start"]), int(d["length"]), tuple(d["original"].split()),
                   tuple(d["replacement"].split()), Kind(d["kind"]))


@dataclass
class LabeledText:
    id_str: str
    tokens: list
    label: int
    source_id: str = None
    replacements: tuple = ()

    @classmethod
    def from_dict(cls, d):
        if "id_str" not in d or "label" not in d:
            raise CorpusError("labelled record needs 'id_str' and 'label'")
        reps = tuple(Replacement.from_dict(r) for r in d.get("replacements") or ())
        return cls(str(d["id_str"]), (d.get("text") or "").split(), int(d["label"]),
                   d.get("source_id"), reps)

    def to_dict(self):
        d = {"id_str": self.id_str, "text": " ".join(self.tokens), "label": self.label}
        if self.source_id is not None:
            d["source_id"] = self.source_id
            d["replacements"] = [r.to_dict() for r in self.replacements]
        return d


@dataclass
class SynthConfig:
    """Generation settings.

    ``use_pool``/``drug_pool`` default to the lexicon's purely alphabetic
    phrases of each kind; phrases with digits could never occur in cleaned
    text, so inserting them would produce impossible inputs.
    """

    m: int = 4
    seed: int = 0
    use_pool: tuple = None
    drug_pool: tuple = None

    def __post_init__(self):
        if self.m < 0:
            raise ValueError(f"m must be >= 0, got {self.m}")


@dataclass
class SynthBatch:
    originals: list
    synthetics: list = field(default_factory=list)

    @property
    def combined(self):
        return list(self.originals) + list(self.synthetics)


def _as_labeled(src):
    if isinstance(src, LabeledText):
        return src
    if getattr(src, "label", None) is None:
        raise ValueError(f"source {getattr(src, 'id_str', src)!r} carries no label")
    return LabeledText(src.id_str, list(src.text), int(src.label))


def _pool(given, lexicon, kind):
    if given is None:
        return lexicon.phrases(kind, alphabetic_only=True)
    return tuple(normalize_phrase(p) if isinstance(p, str) else tuple(p) for p in given)


def _draw_other(rng, pool, index, original):
    """Uniform draw from *pool* excluding *original*."""
    skip = index.get(original)
    n = len(pool) - (skip is not None)
    if n <= 0:
        raise ValueError(f"no alternative to {' '.join(original)!r} in the replacement pool")
    k = int(rng.integers(n))
    if skip is not None and k >= skip:
        k += 1
    return pool[k]


def _variant(tokens, spans, plan, rng, pools, indexes):
    chosen = {}
    # use keywords first, then drug keywords, as two sequential passes
    for kind in (Kind.USE, Kind.DRUG):
        for i, span in enumerate(spans):
            if plan[i] is kind:
                chosen[i] = _draw_other(rng, pools[kind], indexes[kind], span.phrase)
    out = []
    reps = []
    pos = 0
    for i, span in enumerate(spans):
        out.extend(tokens[pos:span.start])
        new = chosen[i]
        reps.append(Replacement(len(out), len(new), span.phrase, new, plan[i]))
        out.extend(new)
        pos = span.start + span.length
    out.extend(tokens[pos:])
    return out, tuple(reps)


def generate_synthetic(sources, config, lexicon):
    """Create ``config.m`` substituted variants per labelled source.

    Sources may be :class:`LabeledText` or any record with ``id_str``,
    ``text`` (tokens) and ``label``. Source *i* draws from its own RNG
    stream seeded by ``(config.seed, i)``, so the output does not depend on
    how the work is scheduled.
    """
    use_pool = _pool(config.use_pool, lexicon, Kind.USE)
    drug_pool = _pool(config.drug_pool, lexicon, Kind.DRUG)
    pools = {Kind.USE: use_pool, Kind.DRUG: drug_pool}
    indexes = {k: {p: i for i, p in enumerate(pool)} for k, pool in pools.items()}

    originals = [_as_labeled(s) for s in sources]
    synthetics = []
    for i, src in enumerate(originals):
        _, spans = match_keywords(src.tokens, lexicon)
        if not spans:
            if config.m:
                warnings.warn(f"source {src.id_str!r} has no keywords; copied unchanged",
                              stacklevel=2)
            for j in range(config.m):
                synthetics.append(LabeledText(f"{src.id_str}-s{j}", list(src.tokens), src.label,
                                              src.id_str, ()))
            continue
        plan = [Kind.USE if Kind.USE in s.kinds else Kind.DRUG for s in spans]
        for kind in set(plan):
            if not pools[kind]:
                raise ValueError(f"empty {kind.value} replacement pool")
        rng = np.random.default_rng([config.seed, i])
        for j in range(config.m):
            toks, reps = _variant(src.tokens, spans, plan, rng, pools, indexes)
            synthetics.append(LabeledText(f"{src.id_str}-s{j}", toks, src.label, src.id_str, reps))
    return SynthBatch(originals, synthetics)


@dataclass(frozen=True)
class ClassBalance:
    positive: int
    negative: int

    @property
    def total(self):
        return self.positive + self.negative

    @property
    def ratio(self):
        """positive / negative, or ``None`` without negatives."""
        return self.positive / self.negative if self.negative else None


def _count(items):
    pos = sum(1 for t in items if t.label == 1)
    return ClassBalance(pos, len(items) - pos)


def balance_report(batch):
    """Class counts for the originals and for originals plus synthetics."""
    return {"original": _count(batch.originals), "combined": _count(batch.combined)}
