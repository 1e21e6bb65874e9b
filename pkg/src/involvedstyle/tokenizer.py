"""Deterministic tokenizer for abstract text.

Tokens are classified as WORD, NUMBER or PUNCT. Hyphenated compounds and
abbreviations with internal periods stay whole; currency symbols and
sentence punctuation are split off.
"""

from __future__ import annotations

import enum
import re
import unicodedata
from typing import Iterable, List, NamedTuple, Sequence

__all__ = ["TokenKind", "Token", "tokenize", "word_count", "normalize_text", "is_cardinal_literal"]


class TokenKind(str, enum.Enum):
    WORD = "WORD"
    NUMBER = "NUMBER"
    PUNCT = "PUNCT"


class Token(NamedTuple):
    surface: str
    index: int
    kind: TokenKind

    def __str__(self) -> str:
        return self.surface


_QUOTE_MAP = str.maketrans({
    "‘": "'", "’": "'", "‚": "'", "‛": "'",
    "′": "'", "“": '"', "”": '"', "„": '"',
    "‟": '"', "″": '"', "«": '"', "»": '"',
})

# letter class without digits/underscore
_L = r"[^\W\d_]"
# one compound segment: word chars joined by "'", by '.' before a lowercase
# letter or digit, or by ',' between digits ("end.Next" stays split)
_SEG = r"\w+(?:(?:'|\.(?=[a-z0-9])|(?<=\d),(?=\d))\w+)*"

_TOKEN_RE = re.compile(
    rf"""
    (?P<abbr>{_L}(?:\.{_L})+(?:\.|(?!\w)))      # i.e.  U.S.  e.g
    |(?P<amp>{_L}+&{_L}+(?!\w))                  # S&P  AT&T
    |(?P<word>{_SEG}(?:-{_SEG})*)                # scrip-dividend  5.5  1,000
    |(?P<punct>\S)
    """,
    re.VERBOSE,
)

_CARDINAL_RE = re.compile(r"(?:[0-9]{1,3}(?:,[0-9]{3})+|[0-9]+)(?:\.[0-9]+)?")


_DIGITS = frozenset("0123456789")
_PUNCT, _NUMBER, _WORD = TokenKind.PUNCT, TokenKind.NUMBER, TokenKind.WORD


def normalize_text(text: str) -> str:
    """NFC-normalize and fold typographic quotes to ASCII quotes."""
    return unicodedata.normalize("NFC", text).translate(_QUOTE_MAP)


def is_cardinal_literal(surface: str) -> bool:
    return _CARDINAL_RE.fullmatch(surface) is not None


def tokenize(text: str) -> List[Token]:
    """Split ``text`` into tokens.

    >>> [(t.surface, t.kind.value) for t in tokenize("I counted 5 cats.")]
    [('I', 'WORD'), ('counted', 'WORD'), ('5', 'NUMBER'), ('cats', 'WORD'), ('.', 'PUNCT')]
    """
    tokens: List[Token] = []
    append = tokens.append
    for i, m in enumerate(_TOKEN_RE.finditer(normalize_text(text))):
        surface = m.group()
        if m.lastgroup == "punct":
            kind = _PUNCT
        elif surface[0] in _DIGITS and _CARDINAL_RE.fullmatch(surface):
            kind = _NUMBER
        else:
            kind = _WORD
        append(Token(surface, i, kind))
    return tokens


def word_count(tokens: Iterable[Token]) -> int:
    """Number of WORD and NUMBER tokens (punctuation excluded)."""
    return sum(1 for t in tokens if t.kind is not TokenKind.PUNCT)


def surfaces(tokens: Sequence[Token]) -> List[str]:
    return [t.surface for t in tokens]
