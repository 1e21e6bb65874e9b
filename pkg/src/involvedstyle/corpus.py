"""Document collections: ingestion, export, filtering and gender matching."""

from __future__ import annotations

import csv
import enum
import hashlib
import io
import json
import logging
from collections import Counter, defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from .gender import Gender, PersonName
from .tokenizer import tokenize, word_count

log = logging.getLogger(__name__)

__all__ = [
    "DocKind",
    "CitingRecord",
    "Document",
    "Reject",
    "IngestResult",
    "ingest",
    "parse_records",
    "export_jsonl",
    "document_to_record",
    "document_from_record",
    "DropReason",
    "FilterPolicy",
    "FilterResult",
    "filter_corpus",
    "MatchedPair",
    "MatchResult",
    "match_sample",
    "write_pairs_csv",
    "read_pairs_csv",
    "RecordError",
]


class DocKind(str, enum.Enum):
    PAPER = "PAPER"
    PATENT = "PATENT"


@dataclass(frozen=True)
class CitingRecord:
    citing_doc_id: str
    first_author_gender: Gender = Gender.UNKNOWN
    last_author_gender: Gender = Gender.UNKNOWN
    citing_author_ids: Tuple[str, ...] = ()


@dataclass(frozen=True)
class Document:
    id: str
    kind: DocKind
    text: str
    field: str
    year: int
    authors: Tuple[PersonName, ...]
    lawyers: Tuple[PersonName, ...] = ()
    language: Optional[str] = None
    cited_by: Tuple[CitingRecord, ...] = ()
    author_gender: Optional[Gender] = None
    lawyer_gender: Optional[Gender] = None

    @property
    def lawyer(self) -> Optional[PersonName]:
        return self.lawyers[0] if len(self.lawyers) == 1 else None

    @property
    def stratum(self) -> Tuple[str, int]:
        return (self.field, self.year)

    def author_ids(self) -> Tuple[str, ...]:
        from .gender import author_key

        return tuple(a.id if a.id else author_key(a) for a in self.authors)


# --- records <-> documents -------------------------------------------------

_TOP_FIELDS = {"id", "kind", "text", "field", "year", "authors", "lawyer", "language", "cited_by",
               "author_gender", "lawyer_gender"}
_REQUIRED = ("id", "kind", "text", "field", "year", "authors")
_NAME_FIELDS = {"first", "middle", "last", "id"}
_CITE_FIELDS = {"id", "first_author_gender", "last_author_gender", "citing_author_ids"}


class RecordError(ValueError):
    """A record that cannot be turned into a Document; message is the reject reason."""


def _name_from(obj, where: str) -> PersonName:
    if not isinstance(obj, Mapping):
        raise RecordError(f"{where} must be an object")
    if not obj.get("last"):
        raise RecordError(f"missing {where}.last")
    return PersonName(first=str(obj.get("first") or ""), last=str(obj["last"]),
                      middle=obj.get("middle") or None, id=obj.get("id") or None)


def _name_to(n: PersonName) -> dict:
    out = {"first": n.first, "middle": n.middle, "last": n.last}
    if n.id is not None:
        out["id"] = n.id
    return out


def _gender_or_none(value, where: str) -> Optional[Gender]:
    if value is None:
        return None
    try:
        return Gender.parse(value)
    except ValueError:
        raise RecordError(f"invalid {where} {value!r}") from None


def document_from_record(rec: Mapping, warned: Optional[set] = None) -> Document:
    """Validate one decoded JSON record. Raises RecordError with the reject reason."""
    if not isinstance(rec, Mapping):
        raise RecordError("record is not an object")
    for name in _REQUIRED:
        if rec.get(name) is None or (name != "authors" and rec.get(name) == ""):
            raise RecordError(f"missing {name}")
    unknown = set(rec) - _TOP_FIELDS
    for name in sorted(unknown):
        if warned is None or name not in warned:
            log.warning("ignoring unknown field %r", name)
            if warned is not None:
                warned.add(name)
    try:
        kind = DocKind(str(rec["kind"]).upper())
    except ValueError:
        raise RecordError(f"invalid kind {rec['kind']!r}") from None
    year = rec["year"]
    if isinstance(year, bool) or not isinstance(year, (int, str)):
        raise RecordError(f"invalid year {year!r}")
    try:
        year = int(year)
    except ValueError:
        raise RecordError(f"invalid year {year!r}") from None
    if not isinstance(rec["text"], str):
        raise RecordError("text must be a string")
    authors_raw = rec["authors"]
    if not isinstance(authors_raw, list) or not authors_raw:
        raise RecordError("missing authors")
    authors = tuple(_name_from(a, "authors[]") for a in authors_raw)
    lawyer_raw = rec.get("lawyer")
    if lawyer_raw is None:
        lawyers: Tuple[PersonName, ...] = ()
    elif isinstance(lawyer_raw, list):
        lawyers = tuple(_name_from(a, "lawyer[]") for a in lawyer_raw)
    else:
        lawyers = (_name_from(lawyer_raw, "lawyer"),)
    cites = []
    for c in rec.get("cited_by") or []:
        if not isinstance(c, Mapping) or not c.get("id"):
            raise RecordError("missing cited_by[].id")
        cites.append(CitingRecord(
            citing_doc_id=str(c["id"]),
            first_author_gender=_gender_or_none(c.get("first_author_gender"), "first_author_gender") or Gender.UNKNOWN,
            last_author_gender=_gender_or_none(c.get("last_author_gender"), "last_author_gender") or Gender.UNKNOWN,
            citing_author_ids=tuple(str(x) for x in (c.get("citing_author_ids") or ())),
        ))
    language = rec.get("language")
    return Document(
        id=str(rec["id"]),
        kind=kind,
        text=rec["text"],
        field=str(rec["field"]),
        year=year,
        authors=authors,
        lawyers=lawyers,
        language=str(language).lower() if language else None,
        cited_by=tuple(cites),
        author_gender=_gender_or_none(rec.get("author_gender"), "author_gender"),
        lawyer_gender=_gender_or_none(rec.get("lawyer_gender"), "lawyer_gender"),
    )


def document_to_record(doc: Document) -> dict:
    rec: dict = {
        "id": doc.id,
        "kind": doc.kind.value,
        "text": doc.text,
        "field": doc.field,
        "year": doc.year,
        "authors": [_name_to(a) for a in doc.authors],
    }
    if len(doc.lawyers) == 1:
        rec["lawyer"] = _name_to(doc.lawyers[0])
    elif doc.lawyers:
        rec["lawyer"] = [_name_to(a) for a in doc.lawyers]
    if doc.language is not None:
        rec["language"] = doc.language
    if doc.cited_by:
        rec["cited_by"] = [
            {"id": c.citing_doc_id,
             "first_author_gender": c.first_author_gender.value,
             "last_author_gender": c.last_author_gender.value,
             "citing_author_ids": list(c.citing_author_ids)}
            for c in doc.cited_by
        ]
    if doc.author_gender is not None:
        rec["author_gender"] = doc.author_gender.value
    if doc.lawyer_gender is not None:
        rec["lawyer_gender"] = doc.lawyer_gender.value
    return rec


# --- ingest / export -------------------------------------------------------

@dataclass(frozen=True)
class Reject:
    line: int
    reason: str
    record_id: Optional[str] = None


class IngestResult(NamedTuple):
    documents: List[Document]
    rejects: List[Reject]


def _split_name(text: str) -> dict:
    # CSV names are "first|middle|last" or "first|last"
    parts = [p.strip() for p in text.split("|")]
    if len(parts) == 2:
        return {"first": parts[0], "last": parts[1]}
    if len(parts) == 3:
        return {"first": parts[0], "middle": parts[1] or None, "last": parts[2]}
    raise RecordError(f"bad name {text!r}; expected first|middle|last")


def _csv_records(fh) -> Iterable[Tuple[int, object]]:
    reader = csv.DictReader(fh)
    for row in reader:
        line = reader.line_num
        try:
            rec: dict = {k: v for k, v in row.items() if k is not None and v not in (None, "")}
            if "authors" in rec:
                rec["authors"] = [_split_name(a) for a in rec["authors"].split(";") if a.strip()]
            if "lawyer" in rec:
                lawyers = [_split_name(a) for a in rec["lawyer"].split(";") if a.strip()]
                rec["lawyer"] = lawyers[0] if len(lawyers) == 1 else lawyers
            yield line, rec
        except RecordError as exc:
            yield line, exc


def _jsonl_records(fh) -> Iterable[Tuple[int, object]]:
    for lineno, line in enumerate(fh, 1):
        if not line.strip():
            continue
        try:
            yield lineno, json.loads(line)
        except json.JSONDecodeError as exc:
            yield lineno, RecordError(f"invalid JSON: {exc.msg}")


def parse_records(records: Iterable[Tuple[int, object]]) -> IngestResult:
    docs: List[Document] = []
    rejects: List[Reject] = []
    seen: set = set()
    warned: set = set()
    for lineno, rec in records:
        rid = rec.get("id") if isinstance(rec, Mapping) else None
        if isinstance(rec, RecordError):
            rejects.append(Reject(lineno, str(rec)))
            continue
        try:
            doc = document_from_record(rec, warned)
        except RecordError as exc:
            rejects.append(Reject(lineno, str(exc), None if rid is None else str(rid)))
            continue
        if doc.id in seen:
            rejects.append(Reject(lineno, "duplicate id", doc.id))
            continue
        seen.add(doc.id)
        docs.append(doc)
    return IngestResult(docs, rejects)


def ingest(path: Union[str, Path], schema: Optional[str] = None) -> IngestResult:
    """Read a JSONL or CSV corpus file.

    ``schema`` is ``"jsonl"`` or ``"csv"``; by default it is taken from the
    file extension. Malformed records are returned as rejects with their
    line numbers. Raises OSError when the file cannot be read.
    """
    path = Path(path)
    schema = (schema or ("csv" if path.suffix.lower() == ".csv" else "jsonl")).lower()
    if schema not in ("jsonl", "csv"):
        raise ValueError(f"unknown schema {schema!r}")
    with path.open(encoding="utf-8", newline="" if schema == "csv" else None) as fh:
        records = _csv_records(fh) if schema == "csv" else _jsonl_records(fh)
        return parse_records(records)


def dumps_jsonl(docs: Iterable[Document]) -> str:
    return "".join(json.dumps(document_to_record(d), ensure_ascii=False, sort_keys=True) + "\n" for d in docs)


def export_jsonl(docs: Iterable[Document], path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_jsonl(docs))


# --- filtering -------------------------------------------------------------

class DropReason(str, enum.Enum):
    YEAR = "YEAR"
    LANGUAGE = "LANGUAGE"
    TEAM = "TEAM"
    LAWYER = "LAWYER"
    WORDCOUNT = "WORDCOUNT"


@dataclass(frozen=True)
class FilterPolicy:
    """Corpus inclusion rules.

    ``min_words`` is strict: a document needs more than ``min_words`` words.
    Documents without a declared language pass only if ``allow_missing_language``.
    """

    min_words: int = 100
    solo_only: bool = False
    require_single_lawyer: bool = False
    languages: Tuple[str, ...] = ("en",)
    allow_missing_language: bool = True
    min_year: Mapping[DocKind, int] = field(default_factory=dict)

    @classmethod
    def paper_defaults(cls) -> "FilterPolicy":
        return cls(min_words=100, solo_only=True, require_single_lawyer=True,
                   min_year={DocKind.PAPER: 1991, DocKind.PATENT: 1976})

    def drop_reason(self, doc: Document, n_words: Optional[int] = None) -> Optional[DropReason]:
        """First failing check, or None. ``n_words`` skips re-tokenizing when known."""
        floor = self.min_year.get(doc.kind)
        if floor is not None and doc.year < floor:
            return DropReason.YEAR
        if doc.language is None:
            if not self.allow_missing_language:
                return DropReason.LANGUAGE
        elif doc.language not in self.languages:
            return DropReason.LANGUAGE
        if self.solo_only and len(doc.authors) != 1:
            return DropReason.TEAM
        if self.require_single_lawyer and doc.kind is DocKind.PATENT and len(doc.lawyers) != 1:
            return DropReason.LAWYER
        if (word_count(tokenize(doc.text)) if n_words is None else n_words) <= self.min_words:
            return DropReason.WORDCOUNT
        return None


@dataclass
class FilterResult:
    kept: List[Document]
    dropped: List[Tuple[Document, DropReason]]

    def funnel(self) -> Dict[str, int]:
        """Exclusion counts per reason, in check order, plus the kept total."""
        counts = Counter(r for _, r in self.dropped)
        out = {r.value: counts.get(r, 0) for r in DropReason}
        out["kept"] = len(self.kept)
        return out


def filter_corpus(docs: Sequence[Document], policy: Optional[FilterPolicy] = None,
                  threads: int = 1) -> FilterResult:
    policy = policy or FilterPolicy()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            reasons = list(pool.map(policy.drop_reason, docs))
    else:
        reasons = [policy.drop_reason(d) for d in docs]
    kept = [d for d, r in zip(docs, reasons) if r is None]
    dropped = [(d, r) for d, r in zip(docs, reasons) if r is not None]
    return FilterResult(kept, dropped)


# --- matching --------------------------------------------------------------

@dataclass(frozen=True)
class MatchedPair:
    female_id: str
    male_id: str
    stratum: Tuple[str, int]


@dataclass
class MatchResult:
    pairs: List[MatchedPair]
    unmatched_female: List[str]
    excluded_unknown: int = 0
    policy: str = "seeded-uniform-without-replacement"


def _stratum_rng(seed: int, stratum: Tuple[str, int]) -> np.random.Generator:
    # independent of processing order and of the other strata present
    digest = hashlib.sha256(json.dumps([stratum[0], stratum[1]]).encode("utf-8")).digest()
    return np.random.default_rng([int(seed), int.from_bytes(digest[:8], "little")])


def _match_stratum(seed: int, stratum, female: List[str], male: List[str]):
    rng = _stratum_rng(seed, stratum)
    f = sorted(female)
    m = sorted(male)
    f = [f[i] for i in rng.permutation(len(f))]
    m = [m[i] for i in rng.permutation(len(m))]
    k = min(len(f), len(m))
    pairs = sorted((MatchedPair(f[i], m[i], stratum) for i in range(k)), key=lambda p: p.female_id)
    return pairs, sorted(f[k:])


def match_sample(docs: Sequence[Document], seed: int, threads: int = 1,
                 gender_of: Optional[Mapping[str, Gender]] = None) -> MatchResult:
    """Pair each female-authored document with a random male one from its (field, year).

    Matching is one-to-one. Gender is read from ``gender_of[doc.id]`` when
    given, else ``doc.author_gender``; UNKNOWN or missing genders are
    excluded up front. Strata are processed in sorted order with per-stratum
    seeds, so the result does not depend on ``threads``.
    """
    buckets: Dict[Tuple[str, int], Tuple[List[str], List[str]]] = defaultdict(lambda: ([], []))
    excluded = 0
    for d in docs:
        g = gender_of.get(d.id) if gender_of is not None else d.author_gender
        if g is Gender.F:
            buckets[d.stratum][0].append(d.id)
        elif g is Gender.M:
            buckets[d.stratum][1].append(d.id)
        else:
            excluded += 1
    strata = sorted(buckets, key=lambda s: (s[0], s[1]))
    jobs = [(seed, s, *buckets[s]) for s in strata]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda a: _match_stratum(*a), jobs))
    else:
        results = [_match_stratum(*a) for a in jobs]
    pairs: List[MatchedPair] = []
    unmatched: List[str] = []
    for p, u in results:
        pairs.extend(p)
        unmatched.extend(u)
    return MatchResult(pairs, unmatched, excluded)


PAIR_COLUMNS = ("female_id", "male_id", "field", "year")


def pairs_to_csv(pairs: Iterable[MatchedPair]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PAIR_COLUMNS)
    for p in pairs:
        w.writerow([p.female_id, p.male_id, p.stratum[0], p.stratum[1]])
    return buf.getvalue()


def write_pairs_csv(pairs: Iterable[MatchedPair], path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(pairs_to_csv(pairs))


def read_pairs_csv(path: Union[str, Path]) -> List[MatchedPair]:
    with open(path, encoding="utf-8", newline="") as fh:
        return [MatchedPair(r["female_id"], r["male_id"], (r["field"], int(r["year"])))
                for r in csv.DictReader(fh)]
