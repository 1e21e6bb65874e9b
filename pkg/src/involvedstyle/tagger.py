"""Rule-based tagging of tokens into the six style feature classes.

Closed classes (pronouns, determiners, number words, irregular past forms)
come from a plain-text lexicon; open-class past participles are found by
``-ed`` morphology. A handful of ambiguous function words are resolved from
the neighbouring tokens.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .tokenizer import Token, TokenKind, is_cardinal_literal

__all__ = [
    "FeatureTag",
    "Lexicon",
    "LexiconError",
    "load_lexicon",
    "default_lexicon",
    "tag_token",
    "tag_document",
    "CORE_CLASSES",
]


class FeatureTag(str, enum.Enum):
    PRONOUN = "PRONOUN"
    AND_COORD = "AND_COORD"
    QUESTION = "QUESTION"
    DETERMINER = "DETERMINER"
    PAST_VERB = "PAST_VERB"
    CARDINAL = "CARDINAL"
    OTHER = "OTHER"


# Penn Treebank tags folded into each feature class.
PTB_MAP: Dict[str, FeatureTag] = {
    "PRP": FeatureTag.PRONOUN,
    "PRP$": FeatureTag.PRONOUN,
    "WP": FeatureTag.PRONOUN,
    "WP$": FeatureTag.PRONOUN,
    "DT": FeatureTag.DETERMINER,
    "PDT": FeatureTag.DETERMINER,
    "WDT": FeatureTag.DETERMINER,
    "VBD": FeatureTag.PAST_VERB,
    "VBN": FeatureTag.PAST_VERB,
    "CD": FeatureTag.CARDINAL,
    "AND": FeatureTag.AND_COORD,
    "Q": FeatureTag.QUESTION,
}

CORE_CLASSES = ("pronoun", "determiner", "predeterminer", "irregular_past", "number")
# context lists used by the disambiguation rules; may overlap anything
AUX_CLASSES = ("aux", "comp_verb", "function", "not_past")
KNOWN_CLASSES = CORE_CLASSES + AUX_CLASSES + ("ambiguous",)

_AMBIGUOUS_RULES = frozenset({
    "that", "which", "what", "whatever", "whichever", "her", "all", "both", "such", "i", "us",
})


class LexiconError(ValueError):
    pass


@dataclass(frozen=True)
class Lexicon:
    pronouns: FrozenSet[str]
    determiners: FrozenSet[str]
    predeterminers: FrozenSet[str]
    irregular_past: FrozenSet[str]
    number_words: FrozenSet[str]
    ambiguous: Mapping[str, str]
    aux: FrozenSet[str] = frozenset()
    comp_verbs: FrozenSet[str] = frozenset()
    function_words: FrozenSet[str] = frozenset()
    not_past: FrozenSet[str] = frozenset()
    version: str = ""
    _all_determiners: FrozenSet[str] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        core = {
            "pronoun": self.pronouns,
            "determiner": self.determiners,
            "predeterminer": self.predeterminers,
            "irregular_past": self.irregular_past,
            "number": self.number_words,
        }
        names = list(core)
        for i, a in enumerate(names):
            for b in names[i + 1:]:
                clash = (core[a] & core[b]) - set(self.ambiguous)
                if clash:
                    raise LexiconError(f"{a} and {b} overlap: {sorted(clash)}")
        for cls, words in core.items():
            bad = [w for w in words if w != w.lower()]
            if bad:
                raise LexiconError(f"{cls} entries must be lowercase: {bad}")
        unknown = set(self.ambiguous) - _AMBIGUOUS_RULES
        if unknown:
            raise LexiconError(f"no disambiguation rule for {sorted(unknown)}")
        object.__setattr__(
            self, "_all_determiners",
            self.determiners | self.predeterminers | {"that", "which", "what", "all", "both", "such", "her"},
        )


def _parse_lexicon(lines: Iterable[str], source: str) -> Lexicon:
    buckets: Dict[str, set] = {c: set() for c in KNOWN_CLASSES}
    version = ""
    for lineno, raw in enumerate(lines, 1):
        line = raw.rstrip("\n")
        stripped = line.strip()
        if stripped.startswith("#") and "version:" in stripped:
            version = stripped.split("version:", 1)[1].strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0] or not parts[1]:
            raise LexiconError(f"{source}:{lineno}: expected 'word<TAB>class', got {line!r}")
        word, cls = parts[0].strip().lower(), parts[1].strip()
        if cls not in buckets:
            raise LexiconError(f"{source}:{lineno}: unknown class {cls!r}")
        buckets[cls].add(word)
    return Lexicon(
        pronouns=frozenset(buckets["pronoun"]),
        determiners=frozenset(buckets["determiner"]),
        predeterminers=frozenset(buckets["predeterminer"]),
        irregular_past=frozenset(buckets["irregular_past"]),
        number_words=frozenset(buckets["number"]),
        ambiguous={w: w for w in sorted(buckets["ambiguous"])},
        aux=frozenset(buckets["aux"]),
        comp_verbs=frozenset(buckets["comp_verb"]),
        function_words=frozenset(buckets["function"]),
        not_past=frozenset(buckets["not_past"]),
        version=version,
    )


def load_lexicon(path: Union[str, Path, None] = None) -> Lexicon:
    """Load a lexicon file; ``None`` loads the bundled one."""
    if path is None:
        return default_lexicon()
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        return _parse_lexicon(fh, str(path))


@lru_cache(maxsize=1)
def default_lexicon() -> Lexicon:
    text = resources.files("involvedstyle").joinpath("data/lexicon.tsv").read_text(encoding="utf-8")
    return _parse_lexicon(text.splitlines(), "lexicon.tsv")


# --- rules -----------------------------------------------------------------

_SENTENCE_END = frozenset({".", "?", "!", ":", ";"})
_OPENERS = frozenset({'"', "(", "[", "'"})


def _ed_form(word: str, lex: Lexicon) -> bool:
    return len(word) >= 4 and word.endswith("ed") and word.isalpha() and word not in lex.not_past


def _past_form(word: str, lex: Lexicon) -> bool:
    return word in lex.irregular_past or _ed_form(word, lex)


def _sentence_initial(tokens: Sequence[Token], i: int) -> bool:
    j = i - 1
    while j >= 0 and tokens[j].surface in _OPENERS:
        j -= 1
    return j < 0 or tokens[j].surface in _SENTENCE_END


def _lower(tokens: Sequence[Token], i: int) -> Optional[str]:
    if 0 <= i < len(tokens):
        return tokens[i].surface.lower()
    return None


def _verb_like(tokens: Sequence[Token], i: int, lex: Lexicon) -> bool:
    if not (0 <= i < len(tokens)) or tokens[i].kind is not TokenKind.WORD:
        return False
    w = tokens[i].surface.lower()
    if w in lex.aux or _past_form(w, lex):
        return True
    # "what explains this", "which includes the": -s verb before a noun phrase
    if w.endswith("s") and len(w) > 3:
        after = _lower(tokens, i + 1)
        if after is not None and (after in lex._all_determiners or after in lex.pronouns
                                  or tokens[i + 1].kind is TokenKind.NUMBER):
            return True
    return False


def _starts_noun_phrase(tokens: Sequence[Token], i: int, lex: Lexicon) -> bool:
    """True when token ``i`` looks like a noun/adjective head."""
    if not (0 <= i < len(tokens)) or tokens[i].kind is not TokenKind.WORD:
        return False
    w = tokens[i].surface.lower()
    if w in lex.pronouns or w in lex._all_determiners or w in lex.function_words or w == "and":
        return False
    return not _verb_like(tokens, i, lex)


def _rule_that(tokens: Sequence[Token], i: int, lex: Lexicon) -> FeatureTag:
    prev = _lower(tokens, i - 1)
    if prev in lex.comp_verbs:
        return FeatureTag.OTHER
    if i + 1 >= len(tokens) or tokens[i + 1].kind is TokenKind.PUNCT:
        return FeatureTag.DETERMINER
    if tokens[i + 1].kind is TokenKind.NUMBER:
        return FeatureTag.OTHER
    return FeatureTag.DETERMINER if _starts_noun_phrase(tokens, i + 1, lex) else FeatureTag.OTHER


def _rule_wh(tokens: Sequence[Token], i: int, lex: Lexicon) -> FeatureTag:
    if _starts_noun_phrase(tokens, i + 1, lex):
        return FeatureTag.DETERMINER
    return FeatureTag.PRONOUN


def _rule_both(tokens: Sequence[Token], i: int, lex: Lexicon) -> FeatureTag:
    # correlative "both X and Y" is a conjunction
    for j in range(i + 1, min(i + 7, len(tokens))):
        if tokens[j].kind is TokenKind.PUNCT:
            break
        if tokens[j].surface.lower() == "and":
            return FeatureTag.OTHER
    return FeatureTag.DETERMINER


def _rule_such(tokens: Sequence[Token], i: int, lex: Lexicon) -> FeatureTag:
    return FeatureTag.DETERMINER if _lower(tokens, i + 1) in ("a", "an") else FeatureTag.OTHER


def _rule_i(tokens: Sequence[Token], i: int, lex: Lexicon) -> FeatureTag:
    # enumerator "(i)"
    if _lower(tokens, i + 1) == ")":
        return FeatureTag.OTHER
    return FeatureTag.PRONOUN


def _rule_us(tokens: Sequence[Token], i: int, lex: Lexicon) -> FeatureTag:
    return FeatureTag.OTHER if tokens[i].surface == "US" else FeatureTag.PRONOUN


_RULES = {
    "that": _rule_that,
    "which": _rule_wh,
    "what": _rule_wh,
    "whatever": _rule_wh,
    "whichever": _rule_wh,
    "her": lambda tokens, i, lex: FeatureTag.PRONOUN,
    "all": lambda tokens, i, lex: FeatureTag.DETERMINER,
    "both": _rule_both,
    "such": _rule_such,
    "i": _rule_i,
    "us": _rule_us,
}


def _tag(tokens: Sequence[Token], i: int, lex: Lexicon) -> FeatureTag:
    tok = tokens[i]
    if tok.kind is TokenKind.PUNCT:
        return FeatureTag.QUESTION if tok.surface == "?" else FeatureTag.OTHER
    if tok.kind is TokenKind.NUMBER:
        return FeatureTag.CARDINAL
    w = tok.surface.lower()
    if w == "and":
        return FeatureTag.AND_COORD
    if "-" in w:
        parts = w.split("-")
        if all(p in lex.number_words or is_cardinal_literal(p) for p in parts):
            return FeatureTag.CARDINAL
        if _past_form(parts[-1], lex):
            return FeatureTag.PAST_VERB
        return FeatureTag.OTHER
    if "'" in w:
        base = w.split("'", 1)[0]
        return FeatureTag.PRONOUN if base in lex.pronouns else FeatureTag.OTHER
    rule = lex.ambiguous.get(w)
    if rule is not None:
        return _RULES[rule](tokens, i, lex)
    if w in lex.pronouns:
        return FeatureTag.PRONOUN
    if w in lex.determiners or w in lex.predeterminers:
        return FeatureTag.DETERMINER
    if w in lex.number_words:
        return FeatureTag.CARDINAL
    if w in lex.irregular_past:
        return FeatureTag.PAST_VERB
    if _ed_form(w, lex):
        # capitalised mid-sentence: proper name ("United Kingdom")
        if tok.surface[0].isupper() and not _sentence_initial(tokens, i):
            return FeatureTag.OTHER
        return FeatureTag.PAST_VERB
    return FeatureTag.OTHER


def tag_token(tokens: Sequence[Token], index: int, lexicon: Optional[Lexicon] = None) -> FeatureTag:
    """Feature class of ``tokens[index]`` given its neighbours."""
    if not 0 <= index < len(tokens):
        raise IndexError(f"token index {index} out of range for {len(tokens)} tokens")
    return _tag(tokens, index, lexicon or default_lexicon())


def tag_document(tokens: Sequence[Token], lexicon: Optional[Lexicon] = None) -> List[Tuple[Token, FeatureTag]]:
    lex = lexicon or default_lexicon()
    return [(tok, _tag(tokens, i, lex)) for i, tok in enumerate(tokens)]
