"""Name-based gender coding.

Assignments come from a lookup provider (an HTTP client for a
genderize-style service, or the bundled offline name table), pass through a
probability cutoff, and are cached in an append-only TSV file. Authors seen
under both an initial and a full first name can have the full-name gender
propagated to the initial-only records.
"""

from __future__ import annotations

import enum
import logging
import math
import threading
import unicodedata
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Protocol, Sequence, Set, Tuple, Union

from ._validation import check_probability

log = logging.getLogger(__name__)

__all__ = [
    "Gender",
    "Source",
    "PersonName",
    "GenderAssignment",
    "ProviderResponse",
    "ProviderError",
    "GenderProvider",
    "LocalLexiconProvider",
    "GenderizeClient",
    "GenderCache",
    "assign",
    "assign_many",
    "propagate",
    "PropagationResult",
    "normalize_name_key",
    "author_key",
    "is_initial",
    "DEFAULT_CUTOFF",
]

DEFAULT_CUTOFF = 0.9


class Gender(str, enum.Enum):
    F = "F"
    M = "M"
    UNKNOWN = "UNKNOWN"

    @classmethod
    def parse(cls, value) -> "Gender":
        if value is None or value == "":
            return cls.UNKNOWN
        if isinstance(value, Gender):
            return value
        v = str(value).strip().lower()
        if v in ("f", "female", "w", "woman"):
            return cls.F
        if v in ("m", "male", "man"):
            return cls.M
        if v in ("unknown", "u", "none", "null", "?"):
            return cls.UNKNOWN
        raise ValueError(f"unrecognised gender {value!r}")


class Source(str, enum.Enum):
    EXTERNAL_API = "EXTERNAL_API"
    LOCAL_LEXICON = "LOCAL_LEXICON"
    PROPAGATED = "PROPAGATED"
    CUTOFF_REJECTED = "CUTOFF_REJECTED"


@dataclass(frozen=True)
class PersonName:
    first: str
    last: str
    middle: Optional[str] = None
    id: Optional[str] = None

    def display(self) -> str:
        return " ".join(p for p in (self.first, self.middle, self.last) if p)


@dataclass(frozen=True)
class GenderAssignment:
    name_key: str
    gender: Gender
    probability: float
    source: Source
    donor: Optional[str] = None
    retryable: bool = False

    def __post_init__(self) -> None:
        if not 0.0 <= self.probability <= 1.0 or math.isnan(self.probability):
            raise ValueError(f"probability out of range: {self.probability}")


@dataclass(frozen=True)
class ProviderResponse:
    gender: Gender
    probability: float


class ProviderError(RuntimeError):
    """Transient lookup failure (network down, rate limited, bad payload)."""


class GenderProvider(Protocol):
    source: Source

    def lookup(self, name_key: str) -> ProviderResponse: ...


# --- name handling ---------------------------------------------------------

def _strip_accents(s: str) -> str:
    return "".join(c for c in unicodedata.normalize("NFKD", s) if not unicodedata.combining(c))


def normalize_name_key(first: str, middle: Optional[str] = None) -> str:
    """Lookup key from first (+ middle) name: accent-folded, lowercase, single-spaced."""
    parts = [p for p in (first, middle) if p]
    text = _strip_accents(" ".join(parts)).lower().replace(".", ". ")
    return " ".join(text.split())


def is_initial(first: Optional[str]) -> bool:
    """True for initials-only first names: "J.", "J", "J.-P.", "J. R."."""
    if not first:
        return True
    letters = [p for p in first.replace("-", " ").replace(".", " ").split() if p]
    return all(len(p) == 1 for p in letters)


def author_key(name: PersonName) -> str:
    """Identity key for propagation: explicit id, else (last name, first initial)."""
    if name.id:
        return f"id:{name.id}"
    last = " ".join(_strip_accents(name.last).lower().split())
    initial = _strip_accents(name.first or "").strip()[:1].lower()
    return f"{last}|{initial}"


# --- providers -------------------------------------------------------------

class LocalLexiconProvider:
    """Offline provider backed by a ``name<TAB>gender<TAB>probability`` table."""

    source = Source.LOCAL_LEXICON

    def __init__(self, table: Optional[Mapping[str, Tuple[Gender, float]]] = None):
        self.table = dict(table) if table is not None else _bundled_names()

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "LocalLexiconProvider":
        with open(path, encoding="utf-8") as fh:
            return cls(_parse_name_table(fh))

    def lookup(self, name_key: str) -> ProviderResponse:
        hit = self.table.get(name_key)
        if hit is None:
            # first token alone: "mary ann" -> "mary"
            hit = self.table.get(name_key.split(" ", 1)[0])
        if hit is None:
            return ProviderResponse(Gender.UNKNOWN, 0.0)
        return ProviderResponse(*hit)


def _parse_name_table(lines: Iterable[str]) -> Dict[str, Tuple[Gender, float]]:
    table = {}
    for line in lines:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        name, g, p = line.split("\t")
        table[normalize_name_key(name)] = (Gender.parse(g), float(p))
    return table


_NAMES_LOCK = threading.Lock()
_NAMES: Optional[Dict[str, Tuple[Gender, float]]] = None


def _bundled_names() -> Dict[str, Tuple[Gender, float]]:
    global _NAMES
    with _NAMES_LOCK:
        if _NAMES is None:
            text = resources.files("involvedstyle").joinpath("data/names.tsv").read_text(encoding="utf-8")
            _NAMES = _parse_name_table(text.splitlines())
        return _NAMES


class GenderizeClient:
    """Client for a genderize.io-compatible endpoint.

    The request carries the name as the ``name`` query parameter; the JSON
    response must carry ``gender`` ("female"/"male"/null) and
    ``probability``. ``session`` is anything with a requests-style
    ``get(url, params=..., timeout=...)``.
    """

    source = Source.EXTERNAL_API

    def __init__(self, url: str = "https://api.genderize.io", api_key: Optional[str] = None,
                 session=None, timeout: float = 10.0):
        if session is None:
            import requests

            session = requests.Session()
        self.url = url
        self.api_key = api_key
        self.session = session
        self.timeout = timeout

    def lookup(self, name_key: str) -> ProviderResponse:
        params = {"name": name_key}
        if self.api_key:
            params["apikey"] = self.api_key
        try:
            resp = self.session.get(self.url, params=params, timeout=self.timeout)
            resp.raise_for_status()
            payload = resp.json()
        except Exception as exc:  # any transport/HTTP/JSON failure is transient
            raise ProviderError(f"lookup of {name_key!r} failed: {exc}") from exc
        try:
            gender = Gender.parse(payload.get("gender"))
            probability = float(payload.get("probability") or 0.0)
        except (AttributeError, TypeError, ValueError) as exc:
            raise ProviderError(f"malformed response for {name_key!r}: {payload!r}") from exc
        return ProviderResponse(gender, probability)


# --- cache -----------------------------------------------------------------

class GenderCache:
    """Append-only ``name_key<TAB>gender<TAB>probability<TAB>source`` file.

    Holds raw provider answers (before the cutoff), so one cache serves any
    cutoff. Later lines win when a key repeats (``refresh`` re-queries).
    """

    def __init__(self, path: Union[str, Path, None] = None):
        self.path = Path(path) if path is not None else None
        self._entries: Dict[str, Tuple[Gender, float, Source]] = {}
        self._lock = threading.Lock()
        if self.path is not None and self.path.exists():
            with self.path.open(encoding="utf-8") as fh:
                for lineno, line in enumerate(fh, 1):
                    line = line.rstrip("\n")
                    if not line:
                        continue
                    try:
                        key, g, p, src = line.split("\t")
                        self._entries[key] = (Gender(g), float(p), Source(src))
                    except ValueError:
                        log.warning("%s:%d: skipping malformed cache line", self.path, lineno)

    def __contains__(self, key: str) -> bool:
        return key in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def get(self, key: str) -> Optional[Tuple[Gender, float, Source]]:
        return self._entries.get(key)

    def put(self, key: str, gender: Gender, probability: float, source: Source) -> None:
        with self._lock:
            self._entries[key] = (gender, probability, source)
            if self.path is not None:
                with self.path.open("a", encoding="utf-8", newline="\n") as fh:
                    # repr round-trips the float exactly
                    fh.write(f"{key}\t{gender.value}\t{probability!r}\t{source.value}\n")


# --- assignment ------------------------------------------------------------

def _apply_cutoff(key: str, gender: Gender, probability: float, source: Source, cutoff: float) -> GenderAssignment:
    if gender is Gender.UNKNOWN:
        return GenderAssignment(key, Gender.UNKNOWN, probability, source)
    if probability < cutoff:
        return GenderAssignment(key, Gender.UNKNOWN, probability, Source.CUTOFF_REJECTED)
    return GenderAssignment(key, gender, probability, source)


def assign(name: PersonName, cutoff: float = DEFAULT_CUTOFF, provider: Optional[GenderProvider] = None,
           cache: Optional[GenderCache] = None, refresh: bool = False) -> GenderAssignment:
    """Gender of one person from first (+ middle) name.

    Initials-only names are UNKNOWN without a lookup. Provider answers below
    ``cutoff`` become UNKNOWN with source CUTOFF_REJECTED. A provider failure
    yields UNKNOWN with ``retryable=True`` and is not cached.
    """
    if not (0 < cutoff <= 1):
        raise ValueError(f"cutoff must be in (0, 1], got {cutoff}")
    provider = provider if provider is not None else LocalLexiconProvider()
    key = normalize_name_key(name.first, name.middle)
    if is_initial(name.first):
        return GenderAssignment(key, Gender.UNKNOWN, 0.0, provider.source)
    hit = None if (cache is None or refresh) else cache.get(key)
    if hit is not None:
        return _apply_cutoff(key, *hit, cutoff)
    try:
        resp = provider.lookup(key)
    except ProviderError as exc:
        log.warning("%s", exc)
        return GenderAssignment(key, Gender.UNKNOWN, 0.0, provider.source, retryable=True)
    probability = check_probability(resp.probability, "provider probability")
    if cache is not None:
        cache.put(key, resp.gender, probability, provider.source)
    return _apply_cutoff(key, resp.gender, probability, provider.source, cutoff)


def assign_many(names: Sequence[PersonName], cutoff: float = DEFAULT_CUTOFF,
                provider: Optional[GenderProvider] = None, cache: Optional[GenderCache] = None,
                max_workers: int = 4, refresh: bool = False) -> List[GenderAssignment]:
    """Assign many names, querying each distinct key once with bounded concurrency."""
    provider = provider if provider is not None else LocalLexiconProvider()
    by_key: Dict[str, PersonName] = {}
    for n in names:
        by_key.setdefault(normalize_name_key(n.first, n.middle), n)
    keys = sorted(by_key)
    with ThreadPoolExecutor(max_workers=max(1, max_workers)) as pool:
        results = list(pool.map(lambda k: assign(by_key[k], cutoff, provider, cache, refresh), keys))
    resolved = dict(zip(keys, results))
    return [resolved[normalize_name_key(n.first, n.middle)] for n in names]


# --- propagation -----------------------------------------------------------

@dataclass
class PropagationResult:
    assignments: List[GenderAssignment]
    conflicts: Set[str]
    """Author keys whose full-name records disagree on gender."""


def propagate(names: Sequence[PersonName], assignments: Sequence[GenderAssignment]) -> PropagationResult:
    """Copy a full-name gender onto initials-only records of the same author.

    ``names[i]`` is the author of record ``i`` and ``assignments[i]`` its
    current assignment. Groups are formed by :func:`author_key`. A group with
    conflicting full-name genders is left untouched and reported.
    """
    if len(names) != len(assignments):
        raise ValueError("names and assignments must have equal length")
    groups: Dict[str, List[int]] = defaultdict(list)
    for i, n in enumerate(names):
        groups[author_key(n)].append(i)
    out = list(assignments)
    conflicts: Set[str] = set()
    for key, idx in groups.items():
        donors = [assignments[i] for i in idx
                  if not is_initial(names[i].first) and assignments[i].gender is not Gender.UNKNOWN
                  and assignments[i].source is not Source.PROPAGATED]
        if not donors:
            continue
        if len({d.gender for d in donors}) > 1:
            conflicts.add(key)
            continue
        donor = max(donors, key=lambda d: (d.probability, d.name_key))
        for i in idx:
            if is_initial(names[i].first) and assignments[i].gender is Gender.UNKNOWN:
                out[i] = GenderAssignment(assignments[i].name_key, donor.gender, donor.probability,
                                          Source.PROPAGATED, donor=donor.name_key)
    return PropagationResult(out, conflicts)
