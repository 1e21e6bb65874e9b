"""Synthetic corpora with known style parameters and gender effects.

Each document is an i.i.d. draw of ``n_tokens`` feature classes, rendered
through disjoint per-class vocabularies so that tokenizing and tagging the
text recovers the drawn counts exactly. When ``effect_beta`` is set, the
female involved-feature probability in every stratum is solved so that the
exact expected ratio difference (female minus male) equals ``effect_beta``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import optimize
from scipy.special import gammaln

from .corpus import CitingRecord, DocKind, Document
from .gender import Gender, PersonName
from .stylometry import COUNT_FIELDS

__all__ = [
    "GeneratorConfig",
    "ConfigError",
    "SyntheticCorpus",
    "generate",
    "generate_counts",
    "expected_ratio",
    "MALE_RATES",
    "FEMALE_RATES",
    "VOCAB",
]

CLASSES = ("pron", "and", "q", "det", "past", "num", "other")
INVOLVED = (0, 1, 2)
INFORMATIONAL = (3, 4, 5)

# mean rates per 100 tokens in matched paper abstracts: male and female
# feature breakdowns, female rescaled to the combined involved 4.78 and
# informational 15.96 means
MALE_RATES: Dict[str, float] = {"pron": 1.58, "and": 2.94, "q": 0.03, "det": 10.14, "past": 4.45, "num": 1.54}
_F_RAW = {"pron": 1.60, "and": 3.16, "q": 0.03, "det": 9.93, "past": 4.50, "num": 1.52}
FEMALE_RATES: Dict[str, float] = {
    **{k: _F_RAW[k] * 4.78 / 4.79 for k in ("pron", "and", "q")},
    **{k: _F_RAW[k] * 15.96 / 15.95 for k in ("det", "past", "num")},
}

VOCAB: Dict[str, Tuple[str, ...]] = {
    "pron": ("it", "they", "we", "he", "she", "them", "their", "its", "our", "his", "you", "theirs", "whose"),
    "and": ("and",),
    "q": ("?",),
    "det": ("the", "a", "an", "this", "these", "those", "each", "every", "some", "no", "another", "any"),
    "past": ("reported", "measured", "observed", "estimated", "found", "shown", "taken", "derived",
             "collected", "written", "tested", "compared"),
    "num": ("12", "3.5", "1,200", "250", "42", "0.05", "1991", "two", "three", "seven", "twenty", "million"),
    "other": ("model", "data", "market", "study", "result", "firm", "effect", "policy", "growth", "sample",
              "value", "method", "analysis", "network", "price", "theory", "risk", "trade", "income", "labor",
              "capital", "school", "health", "patent", "design", "signal", "system", "structure", "demand",
              "supply", "of", "in", "for", "on", "with", "is", "are", "to", "by", "from", "we", "as"),
}
# "we" is a pronoun: keep it out of the filler list
VOCAB["other"] = tuple(w for w in VOCAB["other"] if w != "we")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class GeneratorConfig:
    """Synthetic corpus parameters.

    ``base_rates`` are male per-100-token rates by class. ``gender_shift``
    is added (in per-100 units) to the female involved rate, split across
    pronouns / "and" / questions in proportion to their base rates.
    ``effect_beta``, when given, replaces ``gender_shift`` by a per-stratum
    shift solved to make the expected ratio gap exactly ``effect_beta``.
    ``homophily`` is the chance that a citer shares the cited author's
    gender. ``field_involved_scale`` multiplies the involved base rates per
    field so that field fixed effects matter.
    """

    n_docs: int = 1000
    strata: Tuple[Tuple[str, int, float], ...] = (
        ("Economics", 1995, 0.5), ("Economics", 2005, 0.5), ("Sociology", 1995, 0.5),
        ("Sociology", 2005, 0.5), ("Mathematics", 1995, 0.5), ("Mathematics", 2005, 0.5),
    )
    base_rates: Mapping[str, float] = field(default_factory=lambda: dict(MALE_RATES))
    gender_shift: float = 0.0
    effect_beta: Optional[float] = None
    homophily: float = 0.5
    n_tokens: int = 150
    min_words: int = 100
    mean_citations: float = 3.0
    self_citation_rate: float = 0.05
    field_involved_scale: Mapping[str, float] = field(default_factory=dict)
    seed: int = 0

    def validate(self) -> None:
        if self.n_docs <= 0:
            raise ConfigError("n_docs must be positive")
        if not self.strata:
            raise ConfigError("at least one stratum is required")
        for f, y, share in self.strata:
            if not 0 <= share <= 1:
                raise ConfigError(f"female_share of stratum ({f}, {y}) must be in [0, 1]")
        unknown = set(self.base_rates) - set(CLASSES[:-1])
        if unknown:
            raise ConfigError(f"unknown feature classes: {sorted(unknown)}")
        if not 0 <= self.homophily <= 1:
            raise ConfigError("homophily must be in [0, 1]")
        if self.n_tokens - self.min_words < 1:
            raise ConfigError("n_tokens must exceed min_words")
        if self.mean_citations < 0 or not 0 <= self.self_citation_rate <= 1:
            raise ConfigError("invalid citation parameters")
        for f, _, _ in self.strata:
            for g in (Gender.M, Gender.F):
                _probabilities(self, f, g, 0.0 if self.effect_beta is not None else self.gender_shift)

    def to_dict(self) -> dict:
        return {
            "n_docs": self.n_docs,
            "strata": [list(s) for s in self.strata],
            "base_rates": dict(self.base_rates),
            "gender_shift": self.gender_shift,
            "effect_beta": self.effect_beta,
            "homophily": self.homophily,
            "n_tokens": self.n_tokens,
            "min_words": self.min_words,
            "mean_citations": self.mean_citations,
            "self_citation_rate": self.self_citation_rate,
            "field_involved_scale": dict(self.field_involved_scale),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "GeneratorConfig":
        d = dict(d)
        if "strata" in d:
            d["strata"] = tuple((str(f), int(y), float(s)) for f, y, s in d["strata"])
        return cls(**d)


def _probabilities(cfg: GeneratorConfig, field_name: str, gender: Gender, shift: float) -> np.ndarray:
    """Per-token class probabilities (7 classes) for one field and gender."""
    rates = np.array([float(cfg.base_rates.get(c, 0.0)) for c in CLASSES[:-1]])
    scale = float(cfg.field_involved_scale.get(field_name, 1.0))
    rates[list(INVOLVED)] *= scale
    if gender is Gender.F and shift:
        inv = rates[list(INVOLVED)]
        total = inv.sum()
        weights = inv / total if total > 0 else np.full(3, 1 / 3)
        rates[list(INVOLVED)] = inv + shift * weights
    p = rates / 100.0
    if np.any(p < 0) or p.sum() > 1:
        raise ConfigError(f"infeasible class probabilities {p.round(6).tolist()} (field {field_name!r})")
    return np.append(p, 1.0 - p.sum())


@lru_cache(maxsize=64)
def _log_multinomial_grid(n: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    x = np.arange(n + 1)[:, None]
    y = np.arange(n + 1)[None, :]
    valid = (x + y) <= n
    rest = np.where(valid, n - x - y, 0)
    logc = gammaln(n + 1) - gammaln(x + 1) - gammaln(y + 1) - gammaln(rest + 1)
    return np.where(valid, logc, -np.inf), x * np.ones_like(y), y * np.ones_like(x)


def expected_ratio(p_involved: float, p_informational: float, n_tokens: int) -> float:
    """Exact E[involved / informational | informational > 0] for one document.

    Counts are Multinomial(n_tokens; p_involved, p_informational, rest);
    the expectation is a full enumeration over the (x, y) grid.
    """
    a, b = float(p_involved), float(p_informational)
    c = 1.0 - a - b
    if b <= 0:
        raise ConfigError("informational probability must be positive")
    logc, X, Y = _log_multinomial_grid(int(n_tokens))
    with np.errstate(divide="ignore", invalid="ignore"):
        logp = logc + X * np.log(a) + Y * np.log(b) + (n_tokens - X - Y) * np.log(c) if a > 0 and c > 0 else None
    if logp is None:
        # boundary probabilities: fall back to masked powers
        P = np.exp(logc) * np.power(a, X) * np.power(b, Y) * np.power(max(c, 0.0), n_tokens - X - Y)
    else:
        P = np.exp(np.where(np.isfinite(logc), logp, -np.inf))
    P = np.where(Y > 0, P, 0.0)
    mass = P.sum()
    ratio = np.divide(X, Y, out=np.zeros(X.shape, dtype=float), where=Y > 0)
    return float((P * ratio).sum() / mass)


def _solve_shift(cfg: GeneratorConfig, field_name: str, beta: float) -> float:
    pm = _probabilities(cfg, field_name, Gender.M, 0.0)
    inf = pm[list(INFORMATIONAL)].sum()
    inv_m = pm[list(INVOLVED)].sum()
    target = expected_ratio(inv_m, inf, cfg.n_tokens) + beta
    hi_inv = 1.0 - inf - 1e-9

    def gap(shift100: float) -> float:
        inv_f = _probabilities(cfg, field_name, Gender.F, shift100)[list(INVOLVED)].sum()
        return expected_ratio(inv_f, inf, cfg.n_tokens) - target

    lo, hi = -inv_m * 100.0 + 1e-9, (hi_inv - inv_m) * 100.0
    if beta == 0:
        return 0.0
    if gap(lo) > 0 or gap(hi) < 0:
        raise ConfigError(f"effect_beta={beta} not attainable in field {field_name!r}")
    return float(optimize.brentq(gap, lo, hi, xtol=1e-14, rtol=1e-15, maxiter=200))


def _shifts(cfg: GeneratorConfig) -> Dict[str, float]:
    fields = sorted({f for f, _, _ in cfg.strata})
    if cfg.effect_beta is None:
        return {f: cfg.gender_shift for f in fields}
    return {f: _solve_shift(cfg, f, cfg.effect_beta) for f in fields}


def generate_counts(config: GeneratorConfig) -> pd.DataFrame:
    """Draw per-document metadata and feature counts without rendering text.

    Columns: id, field, year, female, the seven count columns and
    ``expected_ratio`` (the exact conditional expectation for that
    document's class probabilities). Uses the same random stream as
    :func:`generate`, so both produce identical counts for one seed.
    """
    config.validate()
    rng = np.random.default_rng(config.seed)
    n = config.n_docs
    shifts = _shifts(config)
    s_idx = rng.integers(0, len(config.strata), size=n)
    shares = np.array([s[2] for s in config.strata])
    female = rng.random(n) < shares[s_idx]

    probs = {}
    exp_ratio = {}
    for f in shifts:
        for g in (Gender.M, Gender.F):
            p = _probabilities(config, f, g, shifts[f] if g is Gender.F else 0.0)
            probs[(f, g)] = p
            exp_ratio[(f, g)] = expected_ratio(p[list(INVOLVED)].sum(), p[list(INFORMATIONAL)].sum(), config.n_tokens)
    fields = [config.strata[i][0] for i in s_idx]
    P = np.array([probs[(f, Gender.F if fe else Gender.M)] for f, fe in zip(fields, female)])
    counts = rng.multinomial(config.n_tokens, P)
    # redraw the (practically impossible) documents short of min_words
    while True:
        short = np.flatnonzero(config.n_tokens - counts[:, 2] <= config.min_words)
        if not short.size:
            break
        counts[short] = rng.multinomial(config.n_tokens, P[short])

    width = len(str(n - 1))
    df = pd.DataFrame({
        "id": [f"syn{i:0{width}d}" for i in range(n)],
        "field": fields,
        "year": [config.strata[i][1] for i in s_idx],
        "female": female.astype(int),
    })
    for j, name in enumerate(COUNT_FIELDS[:-1]):
        df[name] = counts[:, j]
    df["n_tokens"] = config.n_tokens
    df["expected_ratio"] = [exp_ratio[(f, Gender.F if fe else Gender.M)] for f, fe in zip(fields, female)]
    return df


@dataclass
class SyntheticCorpus:
    documents: List[Document]
    truth: List[dict]
    config: GeneratorConfig
    shifts: Dict[str, float]

    def truth_jsonl(self) -> str:
        return "".join(json.dumps(t, sort_keys=True) + "\n" for t in self.truth)


_FIRST = {Gender.F: ("Maria", "Sarah", "Elena", "Anna", "Julia", "Emily", "Olga", "Priya"),
          Gender.M: ("John", "David", "Peter", "Carlos", "Hans", "James", "Omar", "Ivan")}


def _render(counts_row: np.ndarray, rng: np.random.Generator) -> str:
    labels = np.repeat(np.arange(len(CLASSES)), counts_row)
    rng.shuffle(labels)
    words = []
    for lab in labels:
        vocab = VOCAB[CLASSES[lab]]
        words.append(vocab[rng.integers(len(vocab))])
    return " ".join(words)


def generate(config: GeneratorConfig) -> SyntheticCorpus:
    """Generate documents plus a truth sidecar keyed by document id."""
    frame = generate_counts(config)
    shifts = _shifts(config)
    # rendering and citations use a stream independent of the count draws
    ss = np.random.SeedSequence([config.seed, 1])
    doc_seeds = ss.spawn(len(frame))
    count_cols = list(COUNT_FIELDS[:-1]) + ["other"]
    counts = frame[list(COUNT_FIELDS[:-1])].to_numpy()
    other = config.n_tokens - counts.sum(axis=1)
    all_counts = np.column_stack([counts, other])

    docs: List[Document] = []
    truth: List[dict] = []
    n = len(frame)
    for i, row in enumerate(frame.itertuples(index=False)):
        rng = np.random.default_rng(doc_seeds[i])
        g = Gender.F if row.female else Gender.M
        text = _render(all_counts[i], rng)
        author = PersonName(first=_FIRST[g][rng.integers(len(_FIRST[g]))], last=f"Author{i}", id=f"A{i}")
        cites = []
        for c in range(rng.poisson(config.mean_citations)):
            def draw() -> Gender:
                same = rng.random() < config.homophily
                return g if same else (Gender.M if g is Gender.F else Gender.F)

            first_g, last_g = draw(), draw()
            if rng.random() < config.self_citation_rate:
                ids: Tuple[str, ...] = (author.id, f"C{i}_{c}")
            else:
                ids = (f"C{i}_{c}",)
            cites.append(CitingRecord(f"cite{i}_{c}", first_g, last_g, ids))
        docs.append(Document(
            id=row.id, kind=DocKind.PAPER, text=text, field=row.field, year=int(row.year),
            authors=(author,), language="en", cited_by=tuple(cites), author_gender=g,
        ))
        truth.append({
            "id": row.id,
            "author_gender": g.value,
            "field": row.field,
            "year": int(row.year),
            "counts": {name: int(v) for name, v in zip(COUNT_FIELDS[:-1], counts[i])} | {"n_tokens": config.n_tokens},
            "expected_ratio": row.expected_ratio,
        })
    return SyntheticCorpus(docs, truth, config, shifts)
