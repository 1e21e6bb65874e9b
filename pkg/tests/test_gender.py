import threading

import pytest
import requests

from involvedstyle.gender import (
    Gender,
    GenderAssignment,
    GenderCache,
    GenderizeClient,
    LocalLexiconProvider,
    PersonName,
    ProviderError,
    ProviderResponse,
    Source,
    assign,
    assign_many,
    author_key,
    is_initial,
    normalize_name_key,
    propagate,
)


class StubProvider:
    source = Source.EXTERNAL_API

    def __init__(self, table, fail=()):
        self.table = table
        self.fail = set(fail)
        self.calls = []
        self._lock = threading.Lock()

    def lookup(self, key):
        with self._lock:
            self.calls.append(key)
        if key in self.fail:
            raise ProviderError("down")
        g, p = self.table.get(key, (Gender.UNKNOWN, 0.0))
        return ProviderResponse(g, p)


TABLE = {"maria": (Gender.F, 0.98), "robin": (Gender.F, 0.62), "john": (Gender.M, 0.99),
         "jan": (Gender.F, 0.95), "alex": (Gender.M, 1.0)}


def test_above_cutoff():
    a = assign(PersonName("Maria", "Rossi"), provider=StubProvider(TABLE))
    assert (a.gender, a.probability, a.source) == (Gender.F, 0.98, Source.EXTERNAL_API)


def test_below_cutoff():
    a = assign(PersonName("Robin", "Hood"), provider=StubProvider(TABLE))
    assert a.gender is Gender.UNKNOWN and a.source is Source.CUTOFF_REJECTED
    assert a.probability == 0.62


def test_initials_skip_lookup():
    prov = StubProvider(TABLE)
    for first in ("J.", "J", "J.-P.", "J. R."):
        a = assign(PersonName(first, "Smith"), provider=prov)
        assert a.gender is Gender.UNKNOWN
    assert prov.calls == []


def test_cutoff_one():
    prov = StubProvider(TABLE)
    assert assign(PersonName("Alex", "X"), cutoff=1.0, provider=prov).gender is Gender.M
    assert assign(PersonName("John", "X"), cutoff=1.0, provider=prov).gender is Gender.UNKNOWN


def test_invalid_cutoff():
    with pytest.raises(ValueError):
        assign(PersonName("Maria", "X"), cutoff=0.0, provider=StubProvider(TABLE))
    with pytest.raises(ValueError):
        assign(PersonName("Maria", "X"), cutoff=1.5, provider=StubProvider(TABLE))


def test_provider_failure_is_retryable_and_uncached(tmp_path):
    cache = GenderCache(tmp_path / "c.tsv")
    prov = StubProvider(TABLE, fail={"maria"})
    a = assign(PersonName("Maria", "X"), provider=prov, cache=cache)
    assert a.gender is Gender.UNKNOWN and a.retryable
    assert "maria" not in cache


def test_cache_hit_is_identical_and_skips_provider(tmp_path):
    path = tmp_path / "c.tsv"
    prov = StubProvider({"maria": (Gender.F, 0.1 + 0.2 + 0.6)})
    first = assign(PersonName("Maria", "X"), cutoff=0.5, provider=prov, cache=GenderCache(path))
    prov2 = StubProvider({})
    second = assign(PersonName("Maria", "Y"), cutoff=0.5, provider=prov2, cache=GenderCache(path))
    assert second == first
    assert prov2.calls == []


def test_cache_keeps_pre_cutoff_answer(tmp_path):
    path = tmp_path / "c.tsv"
    assign(PersonName("Robin", "X"), provider=StubProvider(TABLE), cache=GenderCache(path))
    again = assign(PersonName("Robin", "X"), cutoff=0.6, provider=StubProvider({}), cache=GenderCache(path))
    assert again.gender is Gender.F


def test_refresh_requeries_and_later_line_wins(tmp_path):
    path = tmp_path / "c.tsv"
    assign(PersonName("Maria", "X"), provider=StubProvider(TABLE), cache=GenderCache(path))
    newer = StubProvider({"maria": (Gender.M, 0.97)})
    a = assign(PersonName("Maria", "X"), provider=newer, cache=GenderCache(path), refresh=True)
    assert a.gender is Gender.M and newer.calls == ["maria"]
    lines = path.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 2 and lines[0].split("\t") == ["maria", "F", "0.98", "EXTERNAL_API"]
    assert GenderCache(path).get("maria") == (Gender.M, 0.97, Source.EXTERNAL_API)


def test_cache_skips_malformed_lines(tmp_path):
    path = tmp_path / "c.tsv"
    path.write_text("maria\tF\t0.98\tEXTERNAL_API\ngarbage\nbob\tX\t1\tLOCAL_LEXICON\n", encoding="utf-8")
    cache = GenderCache(path)
    assert len(cache) == 1


def test_name_keys():
    assert normalize_name_key("José", "María") == "jose maria"
    assert normalize_name_key("  Anne-Marie ") == "anne-marie"
    assert is_initial("J.") and is_initial("J.-P.") and not is_initial("Jo")
    assert author_key(PersonName("John", "Smith")) == author_key(PersonName("J.", "Smith")) == "smith|j"
    assert author_key(PersonName("John", "Smith", id="42")) == "id:42"


def test_local_provider():
    prov = LocalLexiconProvider()
    assert prov.lookup("maria").gender is Gender.F
    assert prov.lookup("maria elena").gender is Gender.F
    assert prov.lookup("zzyzx").gender is Gender.UNKNOWN
    a = assign(PersonName("Robin", "X"))
    assert a.source is Source.CUTOFF_REJECTED


def test_assign_many_dedupes():
    prov = StubProvider(TABLE)
    names = [PersonName("Maria", "A"), PersonName("maria", "B"), PersonName("John", "C"), PersonName("J.", "D")]
    out = assign_many(names, provider=prov, max_workers=3)
    assert [a.gender for a in out] == [Gender.F, Gender.F, Gender.M, Gender.UNKNOWN]
    assert sorted(prov.calls) == ["john", "maria"]


# --- propagation ----------------------------------------------------------

def _run(names, table=TABLE):
    assigned = [assign(n, provider=StubProvider(table)) for n in names]
    return propagate(names, assigned)


def test_propagate_smith():
    res = _run([PersonName("J.", "Smith"), PersonName("John", "Smith")])
    assert [a.gender for a in res.assignments] == [Gender.M, Gender.M]
    assert res.assignments[0].source is Source.PROPAGATED
    assert res.assignments[0].donor == "john"
    assert res.conflicts == set()


def test_conflict_blocks_propagation():
    res = _run([PersonName("J.", "Smith"), PersonName("Jan", "Smith"), PersonName("John", "Smith")])
    assert res.assignments[0].gender is Gender.UNKNOWN
    assert res.conflicts == {"smith|j"}
    assert [a.gender for a in res.assignments[1:]] == [Gender.F, Gender.M]


def test_initials_only_group_unchanged():
    res = _run([PersonName("J.", "Smith"), PersonName("J", "Smith")])
    assert all(a.gender is Gender.UNKNOWN and a.source is not Source.PROPAGATED for a in res.assignments)


def test_propagation_never_flips():
    names = [PersonName("J.", "Smith"), PersonName("John", "Smith"), PersonName("Maria", "Jones"),
             PersonName("M.", "Jones"), PersonName("Robin", "Jones")]
    before = [assign(n, provider=StubProvider(TABLE)) for n in names]
    after = propagate(names, before).assignments
    for b, a in zip(before, after):
        if b.gender is not Gender.UNKNOWN:
            assert a == b
        if a.source is Source.PROPAGATED:
            assert a.donor is not None


def test_propagate_length_mismatch():
    with pytest.raises(ValueError):
        propagate([PersonName("A", "B")], [])


def test_assignment_probability_range():
    with pytest.raises(ValueError):
        GenderAssignment("x", Gender.F, 1.2, Source.LOCAL_LEXICON)


# --- http client ----------------------------------------------------------

class FakeResponse:
    def __init__(self, payload, status=200):
        self.payload = payload
        self.status = status

    def raise_for_status(self):
        if self.status >= 400:
            raise requests.HTTPError(f"{self.status}")

    def json(self):
        if isinstance(self.payload, Exception):
            raise self.payload
        return self.payload


class FakeSession:
    def __init__(self, response=None, exc=None):
        self.response = response
        self.exc = exc
        self.requests = []

    def get(self, url, params=None, timeout=None):
        self.requests.append((url, dict(params), timeout))
        if self.exc:
            raise self.exc
        return self.response


def test_client_parses_response():
    s = FakeSession(FakeResponse({"name": "maria", "gender": "female", "probability": 0.98, "count": 10}))
    client = GenderizeClient(url="http://x", api_key="k", session=s, timeout=3)
    assert client.lookup("maria") == ProviderResponse(Gender.F, 0.98)
    assert s.requests == [("http://x", {"name": "maria", "apikey": "k"}, 3)]


def test_client_null_gender():
    s = FakeSession(FakeResponse({"gender": None, "probability": 0.0}))
    assert GenderizeClient(session=s).lookup("zz").gender is Gender.UNKNOWN


@pytest.mark.parametrize("session", [
    FakeSession(exc=requests.ConnectionError("refused")),
    FakeSession(FakeResponse({}, status=429)),
    FakeSession(FakeResponse(ValueError("not json"))),
    FakeSession(FakeResponse(["list"])),
])
def test_client_failures_raise_provider_error(session):
    with pytest.raises(ProviderError):
        GenderizeClient(session=session).lookup("maria")


def test_client_failure_through_assign():
    client = GenderizeClient(session=FakeSession(exc=requests.Timeout("slow")))
    a = assign(PersonName("Maria", "X"), provider=client)
    assert a.gender is Gender.UNKNOWN and a.retryable
