import json

import numpy as np
import pytest

from involvedstyle.citation import decompose
from involvedstyle.corpus import dumps_jsonl
from involvedstyle.gender import Gender
from involvedstyle.stats import fit_ols, parse_formula
from involvedstyle.stylometry import COUNT_FIELDS, analyze_text
from involvedstyle.synth import (
    FEMALE_RATES,
    MALE_RATES,
    VOCAB,
    ConfigError,
    GeneratorConfig,
    expected_ratio,
    generate,
    generate_counts,
)
from involvedstyle.tagger import default_lexicon
from involvedstyle.tokenizer import tokenize, word_count


@pytest.fixture(scope="module")
def corpus():
    return generate(GeneratorConfig(n_docs=300, effect_beta=0.02, seed=11))


def test_oracle_agreement(corpus):
    truth = {t["id"]: t["counts"] for t in corpus.truth}
    lex = default_lexicon()
    for d in corpus.documents:
        counts, _ = analyze_text(d.text, lex)
        assert counts.as_dict() == truth[d.id], d.id


def test_documents_long_enough(corpus):
    assert all(word_count(tokenize(d.text)) > 100 for d in corpus.documents)


def test_vocabularies_disjoint():
    seen = {}
    for cls, words in VOCAB.items():
        for w in words:
            assert w not in seen, (w, cls, seen.get(w))
            seen[w] = cls


def test_deterministic():
    cfg = GeneratorConfig(n_docs=50, seed=5, gender_shift=1.0)
    a, b = generate(cfg), generate(cfg)
    assert dumps_jsonl(a.documents) == dumps_jsonl(b.documents)
    assert a.truth_jsonl() == b.truth_jsonl()
    assert dumps_jsonl(generate(GeneratorConfig(n_docs=50, seed=6)).documents) != dumps_jsonl(a.documents)


def test_counts_fast_path_matches_rendered(corpus):
    frame = generate_counts(corpus.config)
    truth = {t["id"]: t["counts"] for t in corpus.truth}
    for row in frame.itertuples(index=False):
        assert {c: int(getattr(row, c)) for c in COUNT_FIELDS} == truth[row.id]


def test_truth_sidecar_keys(corpus):
    line = json.loads(corpus.truth_jsonl().splitlines()[0])
    assert set(line) == {"id", "author_gender", "field", "year", "counts", "expected_ratio"}


def test_effect_beta_sets_exact_expected_gap():
    frame = generate_counts(GeneratorConfig(n_docs=2000, effect_beta=0.02, seed=1,
                                            field_involved_scale={"Economics": 1.3}))
    for _, g in frame.groupby("field"):
        f = g.loc[g.female == 1, "expected_ratio"].iloc[0]
        m = g.loc[g.female == 0, "expected_ratio"].iloc[0]
        assert f - m == pytest.approx(0.02, abs=1e-10)


def test_expected_ratio_against_monte_carlo():
    rng = np.random.default_rng(0)
    p_inv, p_inf, n = 0.05, 0.16, 150
    draws = rng.multinomial(n, [p_inv, p_inf, 1 - p_inv - p_inf], size=200_000)
    keep = draws[:, 1] > 0
    mc = (draws[keep, 0] / draws[keep, 1]).mean()
    assert expected_ratio(p_inv, p_inf, n) == pytest.approx(mc, rel=5e-3)


def test_expected_ratio_small_exact():
    # n = 2, enumerate by hand: only outcomes with y > 0 count
    a, b = 0.2, 0.3
    c = 1 - a - b
    outcomes = {(1, 1): 2 * a * b, (0, 1): 2 * b * c, (0, 2): b * b}
    mass = sum(outcomes.values())
    exact = sum(p * x / y for (x, y), p in outcomes.items()) / mass
    assert expected_ratio(a, b, 2) == pytest.approx(exact, rel=1e-12)


def test_female_calibration_means():
    cfg = GeneratorConfig(n_docs=2000, seed=21, base_rates=FEMALE_RATES,
                          strata=(("Economics", 2000, 1.0), ("Sociology", 2000, 1.0)))
    corpus = generate(cfg)
    lex = default_lexicon()
    inv, inf = [], []
    for d in corpus.documents:
        _, s = analyze_text(d.text, lex)
        inv.append(s.involved_rate)
        inf.append(s.informational_rate)
    for values, target in ((inv, 4.78), (inf, 15.96)):
        values = np.asarray(values)
        se = values.std(ddof=1) / np.sqrt(len(values))
        assert abs(values.mean() - target) < 2 * se


def test_full_homophily():
    cfg = GeneratorConfig(n_docs=200, seed=3, homophily=1.0, self_citation_rate=0.0)
    corpus = generate(cfg)
    seen = 0
    for d in corpus.documents:
        p = decompose(d)
        if p.imputed_zero:
            continue
        seen += 1
        if d.author_gender is Gender.F:
            assert p.rate_female_first == 100.0 and p.rate_female_last == 100.0
        else:
            assert p.rate_male_first == 100.0 and p.rate_male_last == 100.0
    assert seen > 100


def test_self_citations_marked():
    corpus = generate(GeneratorConfig(n_docs=200, seed=4, self_citation_rate=1.0))
    assert all(decompose(d).total_cites == 0 for d in corpus.documents)


def test_small_null_run_not_significant():
    frame = generate_counts(GeneratorConfig(n_docs=5000, seed=8))
    frame["ratio"] = (frame.n_pron + frame.n_and + frame.n_q) / (frame.n_det + frame.n_past + frame.n_num)
    res = fit_ols(frame, parse_formula("ratio ~ female | field + year"))
    assert res.p_values["female"] > 0.05


@pytest.mark.parametrize("kw", [
    {"n_docs": 0},
    {"strata": ()},
    {"strata": (("A", 2000, 1.5),)},
    {"base_rates": {"verbs": 1.0}},
    {"base_rates": {"det": 90.0, "past": 20.0}},
    {"homophily": 2.0},
    {"n_tokens": 100},
    {"self_citation_rate": -0.1},
    {"gender_shift": 90.0},
])
def test_config_errors(kw):
    with pytest.raises(ConfigError):
        GeneratorConfig(**kw).validate()


def test_unattainable_effect():
    with pytest.raises(ConfigError):
        generate_counts(GeneratorConfig(n_docs=10, effect_beta=50.0))


def test_config_round_trip():
    cfg = GeneratorConfig(n_docs=7, effect_beta=0.01, field_involved_scale={"Economics": 1.2})
    assert GeneratorConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg


def test_rate_tables():
    assert sum(FEMALE_RATES[k] for k in ("pron", "and", "q")) == pytest.approx(4.78)
    assert sum(FEMALE_RATES[k] for k in ("det", "past", "num")) == pytest.approx(15.96)
    assert set(MALE_RATES) == set(FEMALE_RATES)
