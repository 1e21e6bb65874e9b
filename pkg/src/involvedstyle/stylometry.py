"""Feature counts and the involved / informational style scores."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import check_text_array
from .tagger import FeatureTag, Lexicon, default_lexicon, load_lexicon, tag_document
from .tokenizer import Token, tokenize

__all__ = [
    "FeatureCounts",
    "StyleScores",
    "EmptyDocumentError",
    "count_features",
    "compute_scores",
    "analyze_text",
    "StyleVectorizer",
    "DENOMINATOR_RULE",
]

# recorded in run metadata: rates are per 100 tokens, punctuation included
DENOMINATOR_RULE = "all-tokens"

COUNT_FIELDS = ("n_pron", "n_and", "n_q", "n_det", "n_past", "n_num", "n_tokens")
SCORE_FIELDS = ("involved_rate", "informational_rate", "ratio")


class EmptyDocumentError(ValueError):
    def __init__(self, msg: str = "empty document") -> None:
        super().__init__(msg)


@dataclass(frozen=True)
class FeatureCounts:
    n_pron: int = 0
    n_and: int = 0
    n_q: int = 0
    n_det: int = 0
    n_past: int = 0
    n_num: int = 0
    n_tokens: int = 0

    def __post_init__(self) -> None:
        values = [getattr(self, f) for f in COUNT_FIELDS]
        if any(v < 0 for v in values):
            raise ValueError(f"counts must be non-negative: {self}")
        if sum(values[:-1]) > self.n_tokens:
            raise ValueError(f"feature counts exceed n_tokens: {self}")

    @property
    def involved(self) -> int:
        return self.n_pron + self.n_and + self.n_q

    @property
    def informational(self) -> int:
        return self.n_det + self.n_past + self.n_num

    def as_tuple(self) -> Tuple[int, ...]:
        return tuple(getattr(self, f) for f in COUNT_FIELDS)

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class StyleScores:
    involved_rate: float
    informational_rate: float
    ratio: Optional[float]
    """``None`` when the informational rate is zero."""

    @property
    def undefined(self) -> bool:
        return self.ratio is None

    def as_dict(self) -> dict:
        return {"involved_rate": self.involved_rate,
                "informational_rate": self.informational_rate,
                "ratio": self.ratio,
                "ratio_undefined": self.undefined}


_TAG_FIELD = {
    FeatureTag.PRONOUN: "n_pron",
    FeatureTag.AND_COORD: "n_and",
    FeatureTag.QUESTION: "n_q",
    FeatureTag.DETERMINER: "n_det",
    FeatureTag.PAST_VERB: "n_past",
    FeatureTag.CARDINAL: "n_num",
}


def count_features(tagged: Iterable[Tuple[Token, FeatureTag]]) -> FeatureCounts:
    counts = dict.fromkeys(COUNT_FIELDS, 0)
    n = 0
    for _, tag in tagged:
        n += 1
        name = _TAG_FIELD.get(tag)
        if name is not None:
            counts[name] += 1
    counts["n_tokens"] = n
    return FeatureCounts(**counts)


def compute_scores(counts: FeatureCounts) -> StyleScores:
    """Involved rate, informational rate (both per 100 tokens) and their ratio.

    The ratio is taken as ``involved / informational`` on the raw counts,
    which equals the ratio of the two rates and avoids a second rounding.
    """
    n = counts.n_tokens
    if n <= 0:
        raise EmptyDocumentError()
    inv, inf = counts.involved, counts.informational
    return StyleScores(
        involved_rate=100 * inv / n,
        informational_rate=100 * inf / n,
        ratio=inv / inf if inf > 0 else None,
    )


def analyze_text(text: str, lexicon: Optional[Lexicon] = None) -> Tuple[FeatureCounts, Optional[StyleScores]]:
    """Tokenize, tag and score one text. Scores are ``None`` for empty text."""
    counts = count_features(tag_document(tokenize(text), lexicon))
    scores = compute_scores(counts) if counts.n_tokens else None
    return counts, scores


class StyleVectorizer(BaseEstimator, TransformerMixin):
    """Map raw texts to style features.

    Parameters
    ----------
    lexicon_path : str or None
        Lexicon file; ``None`` uses the bundled lexicon.
    output : {"scores", "counts", "all"}
        ``scores`` gives (involved_rate, informational_rate, ratio);
        ``counts`` gives the six feature counts plus n_tokens; ``all``
        concatenates both.

    Undefined ratios and empty texts come out as NaN.
    """

    def __init__(self, lexicon_path=None, output="scores"):
        self.lexicon_path = lexicon_path
        self.output = output

    def fit(self, X, y=None):
        if self.output not in ("scores", "counts", "all"):
            raise ValueError(f"output must be 'scores', 'counts' or 'all', got {self.output!r}")
        check_text_array(X)
        self.lexicon_ = load_lexicon(self.lexicon_path)
        self.n_features_out_ = len(self.get_feature_names_out())
        return self

    def get_feature_names_out(self, input_features=None):
        names: List[str] = []
        if self.output in ("counts", "all"):
            names += COUNT_FIELDS
        if self.output in ("scores", "all"):
            names += SCORE_FIELDS
        return np.asarray(names, dtype=object)

    def transform(self, X):
        from sklearn.utils.validation import check_is_fitted

        check_is_fitted(self, "lexicon_")
        texts = check_text_array(X)
        out = np.full((len(texts), self.n_features_out_), np.nan)
        for row, text in enumerate(texts):
            counts, scores = analyze_text(text, self.lexicon_)
            values: List[float] = []
            if self.output in ("counts", "all"):
                values += counts.as_tuple()
            if self.output in ("scores", "all"):
                if scores is None:
                    values += [np.nan] * 3
                else:
                    values += [scores.involved_rate, scores.informational_rate,
                               np.nan if scores.ratio is None else scores.ratio]
            out[row] = values
        return out
