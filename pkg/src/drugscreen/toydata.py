"""Small synthetic corpora for smoke tests and demos.

The shipped ``toy_vectors.txt`` holds 50 words with 8-dimensional vectors:
18 keywords, 16 words typical of drug-positive posts and 16 typical of
news or opposition posts. The two context groups are offset along the
first component so a classifier has something to find.
"""

from importlib import resources

import numpy as np

from .embed import load_vectors

__all__ = [
    "load_toy_vectors",
    "make_benchmark_texts",
    "make_toy_records",
    "make_toy_texts",
    "toy_vectors_path",
]

USE_WORDS = ("smoke", "snort", "inject", "vape", "pills")
DRUG_WORDS = ("weed", "cocaine", "coke", "heroin", "blunt", "meth", "molly", "xanax", "acid",
              "shrooms", "drugs")
POSITIVE_WORDS = ("everyday", "tonight", "getting", "high", "lit", "party", "rolling", "stoned",
                  "wasted", "finally", "need", "some", "good", "yes", "vibes", "weekend")
NEGATIVE_WORDS = ("police", "arrested", "news", "report", "illegal", "ban", "study", "says",
                  "government", "kids", "warning", "dangerous", "crisis", "health", "dealer",
                  "seized")
OOV_WORDS = ("lol", "omg", "bro", "fr", "ngl")
FILLER_WORDS = ("the", "and", "is", "to", "I'm", "don't", "can't", "really", "just", "so")


def toy_vectors_path():
    return resources.files("drugscreen.data").joinpath("toy_vectors.txt")


def load_toy_vectors():
    with resources.as_file(toy_vectors_path()) as p:
        return load_vectors(p)


def _positive(rng):
    u, d = rng.choice(USE_WORDS), rng.choice(DRUG_WORDS)
    p1, p2 = rng.choice(POSITIVE_WORDS, size=2)
    shape = rng.integers(3)
    toks = [[u, d, p1], [p1, p2, u, d], [p1, u, d, p2]][shape]
    return [str(t) for t in toks]


def _negative(rng):
    d = rng.choice(DRUG_WORDS)
    n1, n2, n3 = rng.choice(NEGATIVE_WORDS, size=3)
    shape = rng.integers(3)
    toks = [[n1, n2, d, n3], [n1, n2, n3], [d, n1, n2]][shape]
    return [str(t) for t in toks]


def make_toy_texts(n_pos, n_neg, seed=0, oov_rate=0.2):
    """Token lists and labels from drug-positive vs neutral templates.

    Positives pair a use keyword and a drug keyword with positive context
    words; negatives use news/opposition context, sometimes naming a drug.
    A fraction ``oov_rate`` of texts gets an out-of-vocabulary filler word.
    Output is shuffled.
    """
    rng = np.random.default_rng(seed)
    texts = [_positive(rng) for _ in range(n_pos)] + [_negative(rng) for _ in range(n_neg)]
    labels = [1] * n_pos + [0] * n_neg
    for t in texts:
        if rng.random() < oov_rate:
            t.insert(int(rng.integers(len(t) + 1)), str(rng.choice(OOV_WORDS)))
    order = rng.permutation(len(texts))
    return [texts[i] for i in order], np.asarray(labels)[order]


def _decorate(tokens, rng):
    words = [w.upper() if rng.random() < 0.1 else w.capitalize() if rng.random() < 0.1 else w
             for w in tokens]
    if rng.random() < 0.3:
        words.append("#" + str(rng.choice(("blessed", "420life", "friday"))))
    if rng.random() < 0.3:
        words.insert(0, "@" + str(rng.choice(("friend", "user_1", "dude"))))
    if rng.random() < 0.2:
        words.append("https://t.co/" + "".join(rng.choice(list("abcdefgh"), size=6)))
    if rng.random() < 0.2:
        words.append(str(rng.choice(("🔥", "😂", ":)", "!!!"))))
    if rng.random() < 0.1:
        words.insert(0, "RT")
    return " ".join(words)


def make_toy_records(n=500, seed=0):
    """Raw post dicts in the ingest schema, plus a ``label`` field.

    About 2% have empty text, 5% are non-English and some negatives carry no
    keyword at all, so every row filter has work to do.
    """
    rng = np.random.default_rng(seed)
    records = []
    for i in range(n):
        label = int(rng.random() < 0.4)
        tokens = _positive(rng) if label else _negative(rng)
        r = rng.random()
        text = "" if r < 0.02 else _decorate(tokens, rng)
        lang = "en" if rng.random() >= 0.05 else str(rng.choice(("fr", "es", "de")))
        records.append({
            "id_str": str(1054000000000000000 + i),
            "text": text,
            "lang": lang,
            "possibly_sensitive": bool(rng.random() < 0.3),
            "timestamp_ms": 1540166400000 + 37000 * i,
            "user_followers_count": int(rng.integers(0, 5000)),
            "user_friends_count": int(rng.integers(0, 2000)),
            "label": label,
        })
    return records


def make_benchmark_texts(n, length=200, seed=0):
    """Raw texts of exactly ``length`` characters for throughput tests.

    Each is a run of decorated toy posts joined with filler words (stopwords
    and contractions), cut to ``length``.
    """
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        parts, size = [], 0
        while size <= length:
            toks = _positive(rng) if rng.random() < 0.5 else _negative(rng)
            toks += [str(w) for w in rng.choice(FILLER_WORDS, size=2)]
            part = _decorate(toks, rng)
            parts.append(part)
            size += len(part) + 1
        out.append(" ".join(parts)[:length])
    return out
