import json
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from involvedstyle.corpus import (
    CitingRecord,
    DocKind,
    Document,
    DropReason,
    FilterPolicy,
    export_jsonl,
    filter_corpus,
    ingest,
    match_sample,
    pairs_to_csv,
    read_pairs_csv,
    write_pairs_csv,
)
from involvedstyle.gender import Gender, PersonName


def words(n):
    return " ".join(["word"] * n) + "."


def doc(i, gender=Gender.F, field="Econ", year=2000, n_words=150, authors=1, kind=DocKind.PAPER,
        language="en", lawyers=0):
    return Document(
        id=f"d{i}", kind=kind, text=words(n_words), field=field, year=year,
        authors=tuple(PersonName("Ann", f"Last{i}_{k}") for k in range(authors)),
        lawyers=tuple(PersonName("Lee", f"Law{k}") for k in range(lawyers)),
        language=language, author_gender=gender,
    )


def record(i, **kw):
    rec = {"id": f"r{i}", "kind": "PAPER", "text": "some text", "field": "Econ", "year": 2001,
           "authors": [{"first": "Ann", "last": "Lee"}]}
    rec.update(kw)
    return rec


def write_jsonl(path, records):
    path.write_text("".join(json.dumps(r) + "\n" for r in records), encoding="utf-8")


# --- ingest ---------------------------------------------------------------

def test_missing_year_rejected(tmp_path):
    p = tmp_path / "c.jsonl"
    bad = record(2)
    del bad["year"]
    write_jsonl(p, [record(1), bad, record(3)])
    res = ingest(p)
    assert [d.id for d in res.documents] == ["r1", "r3"]
    assert len(res.rejects) == 1
    assert res.rejects[0].line == 2 and res.rejects[0].reason == "missing year"
    assert res.rejects[0].record_id == "r2"


def test_empty_file(tmp_path):
    p = tmp_path / "e.jsonl"
    p.write_text("", encoding="utf-8")
    assert ingest(p) == ([], [])


def test_unreadable_file(tmp_path):
    with pytest.raises(OSError):
        ingest(tmp_path / "nope.jsonl")


def test_other_rejects(tmp_path):
    p = tmp_path / "c.jsonl"
    p.write_text("\n".join([
        json.dumps(record(1)),
        "{not json",
        json.dumps(record(1)),
        json.dumps(record(4, kind="BOOK")),
        json.dumps(record(5, year="19x9")),
        json.dumps(record(6, authors=[])),
        json.dumps([1, 2]),
    ]) + "\n", encoding="utf-8")
    res = ingest(p)
    assert len(res.documents) == 1
    reasons = [r.reason for r in res.rejects]
    assert reasons[0].startswith("invalid JSON")
    assert reasons[1] == "duplicate id"
    assert "invalid kind" in reasons[2]
    assert "invalid year" in reasons[3]
    assert reasons[4] == "missing authors"
    assert reasons[5] == "record is not an object"
    assert [r.line for r in res.rejects] == [2, 3, 4, 5, 6, 7]


def test_unknown_field_warns_once(tmp_path, caplog):
    p = tmp_path / "c.jsonl"
    write_jsonl(p, [record(1, extra=1), record(2, extra=2)])
    with caplog.at_level("WARNING"):
        res = ingest(p)
    assert len(res.documents) == 2
    assert sum("extra" in m for m in caplog.messages) == 1


def test_round_trip(tmp_path):
    docs = [
        Document("a", DocKind.PAPER, "Text one.", "Econ", 1999, (PersonName("Ann", "Lee", "B", id="A1"),),
                 language="en", author_gender=Gender.F,
                 cited_by=(CitingRecord("c1", Gender.F, Gender.M, ("x", "y")), CitingRecord("c2"))),
        Document("b", DocKind.PATENT, "Text two ?", "Chem", 1980, (PersonName("Bo", "Kim"),),
                 lawyers=(PersonName("Cy", "Day"),), lawyer_gender=Gender.M),
        Document("c", DocKind.PATENT, "x", "Chem", 1980, (PersonName("Bo", "Kim"),),
                 lawyers=(PersonName("Cy", "Day"), PersonName("Di", "Eve"))),
    ]
    p = tmp_path / "rt.jsonl"
    export_jsonl(docs, p)
    res = ingest(p)
    assert res.rejects == []
    assert res.documents == docs
    export_jsonl(res.documents, tmp_path / "rt2.jsonl")
    assert (tmp_path / "rt2.jsonl").read_bytes() == p.read_bytes()


def test_csv_ingest(tmp_path):
    p = tmp_path / "c.csv"
    p.write_text(
        "id,kind,text,field,year,authors,lawyer,language\n"
        "p1,PATENT,hello world,Chem,1990,Ann||Lee;Bob|Q|Ray,Cy|Day,en\n"
        "p2,PAPER,hi,Econ,,Ann|Lee,,\n"
        "p3,PAPER,hi,Econ,2000,bad-name,,\n",
        encoding="utf-8")
    res = ingest(p)
    assert [d.id for d in res.documents] == ["p1"]
    d = res.documents[0]
    assert [a.last for a in d.authors] == ["Lee", "Ray"] and d.authors[1].middle == "Q"
    assert d.lawyer.last == "Day"
    assert [r.reason for r in res.rejects][0] == "missing year"
    assert "bad name" in res.rejects[1].reason


# --- filtering ------------------------------------------------------------

@pytest.mark.parametrize("d,reason", [
    (doc(1, n_words=99), DropReason.WORDCOUNT),
    (doc(2, n_words=100), DropReason.WORDCOUNT),
    (doc(3, n_words=101), None),
    (doc(4, authors=2), DropReason.TEAM),
    (doc(5, n_words=150), None),
    (doc(6, language="de"), DropReason.LANGUAGE),
    (doc(7, language=None), None),
    (doc(8, kind=DocKind.PATENT, lawyers=2), DropReason.LAWYER),
    (doc(9, kind=DocKind.PATENT, lawyers=1), None),
    (doc(10, year=1990), DropReason.YEAR),
    (doc(11, kind=DocKind.PATENT, year=1975, lawyers=1), DropReason.YEAR),
    (doc(12, kind=DocKind.PATENT, year=1976, lawyers=1), None),
])
def test_paper_default_filter(d, reason):
    assert FilterPolicy.paper_defaults().drop_reason(d) == reason


def test_default_policy_is_lenient():
    pol = FilterPolicy()
    assert pol.drop_reason(doc(1, authors=3, year=1900)) is None
    assert FilterPolicy(allow_missing_language=False).drop_reason(doc(2, language=None)) is DropReason.LANGUAGE


def test_filter_funnel_and_idempotence():
    docs = [doc(1), doc(2, n_words=50), doc(3, authors=2), doc(4, language="fr"), doc(5)]
    pol = FilterPolicy.paper_defaults()
    res = filter_corpus(docs, pol)
    assert [d.id for d in res.kept] == ["d1", "d5"]
    assert res.funnel() == {"YEAR": 0, "LANGUAGE": 1, "TEAM": 1, "LAWYER": 0, "WORDCOUNT": 1, "kept": 2}
    again = filter_corpus(res.kept, pol)
    assert again.kept == res.kept and again.dropped == []
    assert filter_corpus(docs, pol, threads=4).kept == res.kept


# --- matching -------------------------------------------------------------

def stratum_docs(n_f, n_m, field="Econ", year=2000, start=0):
    out = [doc(start + i, Gender.F, field, year) for i in range(n_f)]
    out += [doc(start + n_f + i, Gender.M, field, year) for i in range(n_m)]
    return out


def test_three_female_five_male():
    res = match_sample(stratum_docs(3, 5), seed=1)
    assert len(res.pairs) == 3 and res.unmatched_female == []
    males = {p.male_id for p in res.pairs}
    assert len(males) == 3


def test_four_female_two_male():
    res = match_sample(stratum_docs(4, 2), seed=1)
    assert len(res.pairs) == 2
    assert len(res.unmatched_female) == 2


def test_empty_stratum_and_unknown():
    docs = stratum_docs(0, 3) + [doc(99, Gender.UNKNOWN), doc(98, None)]
    res = match_sample(docs, seed=0)
    assert res.pairs == [] and res.excluded_unknown == 2


def test_pairs_share_stratum():
    docs = stratum_docs(3, 2, "Econ", 2000) + stratum_docs(2, 4, "Econ", 2001, start=10) \
        + stratum_docs(5, 5, "Math", 2000, start=20)
    by_id = {d.id: d for d in docs}
    res = match_sample(docs, seed=5)
    for p in res.pairs:
        assert by_id[p.female_id].stratum == by_id[p.male_id].stratum == p.stratum
    assert len(res.pairs) == 2 + 2 + 5


def test_gender_override():
    docs = stratum_docs(2, 2)
    flipped = {d.id: (Gender.M if d.author_gender is Gender.F else Gender.F) for d in docs}
    res = match_sample(docs, seed=0, gender_of=flipped)
    assert {p.female_id for p in res.pairs} == {"d2", "d3"}


def test_seed_matters_and_is_stable():
    docs = stratum_docs(20, 20)
    a = pairs_to_csv(match_sample(docs, seed=42).pairs)
    assert a == pairs_to_csv(match_sample(list(reversed(docs)), seed=42).pairs)
    assert a != pairs_to_csv(match_sample(docs, seed=43).pairs)


def test_adding_a_stratum_leaves_others_alone():
    base = stratum_docs(6, 9)
    extra = stratum_docs(3, 3, "Zoo", 1999, start=100)
    a = [p for p in match_sample(base, seed=3).pairs]
    b = [p for p in match_sample(base + extra, seed=3).pairs if p.stratum[0] == "Econ"]
    assert a == b


def test_pairs_csv_round_trip(tmp_path):
    res = match_sample(stratum_docs(4, 4) + stratum_docs(2, 3, "Math", 1999, start=10), seed=9)
    p = tmp_path / "pairs.csv"
    write_pairs_csv(res.pairs, p)
    assert read_pairs_csv(p) == res.pairs


strata = st.lists(st.tuples(st.sampled_from(["A", "B", "C"]), st.integers(1990, 1993),
                            st.sampled_from([Gender.F, Gender.M, Gender.UNKNOWN])), max_size=80)


@settings(max_examples=60, deadline=None)
@given(strata, st.integers(0, 2**32 - 1))
def test_balance_invariants(spec, seed):
    docs = [doc(i, g, f, y) for i, (f, y, g) in enumerate(spec)]
    res = match_sample(docs, seed)
    nf = Counter((f, y) for f, y, g in spec if g is Gender.F)
    nm = Counter((f, y) for f, y, g in spec if g is Gender.M)
    assert len(res.pairs) == sum(min(nf[s], nm[s]) for s in nf)
    ids = [p.female_id for p in res.pairs] + [p.male_id for p in res.pairs]
    assert len(ids) == len(set(ids))
    per = Counter(p.stratum for p in res.pairs)
    for s, k in per.items():
        assert k == min(nf[s], nm[s])
    assert len(res.unmatched_female) == sum(max(0, nf[s] - nm[s]) for s in nf)
    assert pairs_to_csv(match_sample(docs, seed, threads=8).pairs) == pairs_to_csv(res.pairs)
