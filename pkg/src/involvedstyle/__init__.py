"""Involved vs. informational writing style in abstract corpora.

Tokenize and tag abstracts, score them on the involved/informational
dimension, build gender-matched samples, decompose citations by citing
author gender and fit fixed-effects regressions with robust errors.
"""

__version__ = "0.1.0"

from .tokenizer import Token, TokenKind, tokenize, word_count  # noqa: E402
from .tagger import FeatureTag, Lexicon, load_lexicon, tag_document, tag_token  # noqa: E402
from .stylometry import (  # noqa: E402
    FeatureCounts,
    StyleScores,
    StyleVectorizer,
    analyze_text,
    compute_scores,
    count_features,
)
from .stats import FixedEffectsOLS, ModelSpec, fit_ols, margins, vif  # noqa: E402

__all__ = [
    "__version__",
    "Token",
    "TokenKind",
    "tokenize",
    "word_count",
    "FeatureTag",
    "Lexicon",
    "load_lexicon",
    "tag_document",
    "tag_token",
    "FeatureCounts",
    "StyleScores",
    "StyleVectorizer",
    "analyze_text",
    "compute_scores",
    "count_features",
    "FixedEffectsOLS",
    "ModelSpec",
    "fit_ols",
    "margins",
    "vif",
]
