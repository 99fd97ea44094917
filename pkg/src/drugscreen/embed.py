"""Word-vector lookup and fixed-size window embedding of token sequences."""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "EmbeddingError",
    "EmbeddingTable",
    "EmbeddedWindow",
    "load_vectors",
    "save_vectors",
    "window_starts",
    "embed_tokens",
    "embed_batch",
    "OOV_LOW",
    "OOV_HIGH",
]

OOV_LOW, OOV_HIGH = -0.5, 0.5


class EmbeddingError(ValueError):
    """Raised for unreadable or inconsistent vector files."""


class EmbeddingTable:
    """Read-only mapping from word to a K-dimensional vector."""

    def __init__(self, words, vectors):
        vectors = np.asarray(vectors, dtype=np.float64)
        words = list(words)
        if vectors.ndim != 2 or vectors.shape[0] != len(words):
            raise EmbeddingError(f"expected {len(words)} vectors, got array of shape {vectors.shape}")
        self.words = words
        self.index = {}
        for i, w in enumerate(words):
            if w in self.index:
                raise EmbeddingError(f"duplicate word {w!r}")
            self.index[w] = i
        self.vectors = vectors
        self.vectors.setflags(write=False)

    @property
    def dim(self):
        return self.vectors.shape[1]

    def __len__(self):
        return len(self.words)

    def __contains__(self, word):
        return word in self.index

    def __getitem__(self, word):
        return self.vectors[self.index[word]]

    def get(self, word, default=None):
        i = self.index.get(word)
        return default if i is None else self.vectors[i]

    def __repr__(self):
        return f"EmbeddingTable({len(self)} words, K={self.dim})"


def load_vectors(path, dim=None):
    """Parse a word2vec text file: ``vocab_size K`` then ``word v1 ... vK`` lines.

    ``dim``, when given, must equal the header's K.
    """
    path = Path(path)
    try:
        fh = path.open(encoding="utf-8")
    except OSError as exc:
        raise EmbeddingError(f"cannot read {path}: {exc}") from None
    with fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise EmbeddingError(f"{path}:1: header must be 'vocab_size K'")
        try:
            n, k = int(header[0]), int(header[1])
        except ValueError:
            raise EmbeddingError(f"{path}:1: non-integer header {header!r}") from None
        if dim is not None and dim != k:
            raise EmbeddingError(f"{path}: file has K={k} but dim={dim} was requested")
        words = []
        vectors = np.empty((n, k), dtype=np.float64)
        seen = set()
        for lineno, line in enumerate(fh, start=2):
            parts = line.rstrip("\n").rstrip(" ").split(" ")
            if parts == [""]:
                continue
            if len(parts) != k + 1:
                raise EmbeddingError(f"{path}:{lineno}: expected {k + 1} fields, got {len(parts)}")
            if len(words) >= n:
                raise EmbeddingError(f"{path}:{lineno}: more rows than the declared {n}")
            word = parts[0]
            if word in seen:
                raise EmbeddingError(f"{path}:{lineno}: duplicate word {word!r}")
            try:
                vectors[len(words)] = [float(v) for v in parts[1:]]
            except ValueError:
                raise EmbeddingError(f"{path}:{lineno}: non-numeric component") from None
            seen.add(word)
            words.append(word)
    if len(words) != n:
        raise EmbeddingError(f"{path}: header declares {n} words, found {len(words)}")
    return EmbeddingTable(words, vectors)


def save_vectors(path, table, fmt="%.6g"):
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{len(table)} {table.dim}\n")
        for w, v in zip(table.words, table.vectors):
            fh.write(w + " " + " ".join(fmt % x for x in v) + "\n")


@dataclass
class EmbeddedWindow:
    """An ``L x K`` slice of an embedded text.

    ``mask[i]`` is True where row ``i`` holds a real token; ``start`` is the
    index of the window's first token in the full sequence.
    """

    matrix: np.ndarray
    mask: np.ndarray
    start: int = 0

    @property
    def n_tokens(self):
        return int(self.mask.sum())


def window_starts(n, length, stride):
    """Start offsets of sliding windows covering ``n`` tokens.

    Sequences no longer than ``length`` give a single window at 0. Longer ones
    step by ``stride``, with a final window flush against the end.
    """
    if length < 1 or stride < 1:
        raise ValueError("window length and stride must be positive")
    if stride > length:
        raise ValueError(f"stride {stride} > window length {length} would skip tokens")
    if n <= length:
        return [0]
    starts = list(range(0, n - length, stride))
    starts.append(n - length)
    return starts


def _token_rows(tokens, table, rng, oov_cache, dtype):
    rows = np.empty((len(tokens), table.dim), dtype=dtype)
    oov = []
    for i, t in enumerate(tokens):
        j = table.index.get(t)
        if j is not None:
            rows[i] = table.vectors[j]
        elif oov_cache is not None and t in oov_cache:
            rows[i] = oov_cache[t]
        else:
            oov.append(i)
    if oov:
        if rng is None:
            raise ValueError("out-of-vocabulary tokens need an rng")
        if oov_cache is None:
            rows[oov] = rng.uniform(OOV_LOW, OOV_HIGH, size=(len(oov), table.dim))
        else:
            for i in oov:
                t = tokens[i]
                if t not in oov_cache:
                    oov_cache[t] = rng.uniform(OOV_LOW, OOV_HIGH, size=table.dim)
                rows[i] = oov_cache[t]
    return rows


def embed_tokens(tokens, table, length=50, rng=None, stride=None, pad="zero",
                 oov_cache=None, dtype=np.float64):
    """Embed *tokens* into one or more ``length x K`` windows.

    Out-of-vocabulary tokens get a fresh uniform [-0.5, 0.5] vector per
    occurrence, unless ``oov_cache`` (a dict) is given, in which case the
    first draw for a word is reused. Short sequences are padded with zero
    rows (``pad="zero"``) or uniform random rows (``pad="random"``). Longer
    ones are cut into windows every ``stride`` tokens (default: half a window).
    """
    if pad not in ("zero", "random"):
        raise ValueError(f"pad must be 'zero' or 'random', got {pad!r}")
    if stride is None:
        stride = max(1, length // 2)
    rows = _token_rows(tokens, table, rng, oov_cache, dtype)
    windows = []
    for s in window_starts(len(tokens), length, stride):
        part = rows[s:s + length]
        m = np.zeros((length, table.dim), dtype=dtype)
        m[:len(part)] = part
        if pad == "random" and len(part) < length:
            if rng is None:
                raise ValueError("random padding needs an rng")
            m[len(part):] = rng.uniform(OOV_LOW, OOV_HIGH, size=(length - len(part), table.dim))
        mask = np.zeros(length, dtype=bool)
        mask[:len(part)] = True
        windows.append(EmbeddedWindow(m, mask, s))
    return windows


def embed_batch(texts, table, length=50, rng=None, pad="zero", oov_cache=None,
                dtype=np.float64):
    """Stack the first window of each text into a ``(B, length, K)`` array.

    Tokens past ``length`` are dropped; this is the training-time view.
    """
    out = np.zeros((len(texts), length, table.dim), dtype=dtype)
    for b, tokens in enumerate(texts):
        tokens = tokens[:length]
        if tokens:
            out[b, :len(tokens)] = _token_rows(tokens, table, rng, oov_cache, dtype)
        if pad == "random" and len(tokens) < length:
            out[b, len(tokens):] = rng.uniform(OOV_LOW, OOV_HIGH,
                                               size=(length - len(tokens), table.dim))
    return out
