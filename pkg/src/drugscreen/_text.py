"""Character-level normalisation shared by the cleaner and the lexicon loader.

Both sides must agree on how punctuation is treated, otherwise a keyword such
as ``k-pin`` could never match the cleaned form of the text that contains it.
"""

import re

# apostrophes are deleted so "don't" becomes "dont" and can be expanded later
APOSTROPHES = re.compile(r"['’‘`]")

# byte table for the ASCII part: a-z kept, other ASCII becomes a space, bytes
# of multi-byte UTF-8 sequences pass through untouched
_ASCII_MAP = bytes(c if 97 <= c <= 122 or c >= 128 else 32 for c in range(256))


def _letter_runs(token):
    return "".join(c if c.isalpha() else " " for c in token).split()


def normalize_tokens(text):
    """Lowercase *text* and split it into runs of letters.

    Apostrophes are deleted; any other character that is not alphabetic
    (punctuation, digits, symbols, emoji, underscores) separates tokens.
    """
    text = text.lower()
    ascii_only = text.isascii()
    if not ascii_only:
        text = text.replace("’", "").replace("‘", "")
    tokens = text.encode("utf-8").translate(_ASCII_MAP, b"'`").decode("utf-8").split()
    if ascii_only or "".join(tokens).isalpha():
        return tokens
    # only tokens holding non-ASCII non-letters need a second look
    out = []
    for t in tokens:
        if t.isalpha():
            out.append(t)
        else:
            out.extend(_letter_runs(t))
    return out
