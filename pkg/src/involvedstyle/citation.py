"""Per-document citation profiles split by citing-author gender."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .corpus import Document
from .gender import Gender

__all__ = ["CitationProfile", "decompose", "profiles_to_csv", "PROFILE_COLUMNS", "DENOMINATOR_POLICY"]

# citers of unknown gender stay in the denominator
DENOMINATOR_POLICY = "all-non-self-citations"

PROFILE_COLUMNS = ("doc_id", "total_cites", "rate_female_first", "rate_male_first",
                   "rate_female_last", "rate_male_last", "imputed_zero")


@dataclass(frozen=True)
class CitationProfile:
    doc_id: str
    total_cites: int
    rate_female_first: float
    rate_male_first: float
    rate_female_last: float
    rate_male_last: float
    imputed_zero: bool
    self_citations: int = 0

    def as_row(self) -> list:
        return [self.doc_id, self.total_cites, self.rate_female_first, self.rate_male_first,
                self.rate_female_last, self.rate_male_last, int(self.imputed_zero)]


def decompose(doc: Document, author_ids: Optional[Sequence[str]] = None) -> CitationProfile:
    """Citation rates per 100 non-self citations.

    A citation is a self-citation when its ``citing_author_ids`` share an
    id with the cited document's authors (``author_ids`` if given, else
    :meth:`Document.author_ids`). Documents with no remaining citations get
    all-zero rates and ``imputed_zero=True``. For patents the first/last
    inventor of the citing patent fills the first/last author slots.
    """
    own = set(author_ids if author_ids is not None else doc.author_ids())
    kept = [c for c in doc.cited_by if not own.intersection(c.citing_author_ids)]
    n = len(kept)
    n_self = len(doc.cited_by) - n
    if n == 0:
        return CitationProfile(doc.id, 0, 0.0, 0.0, 0.0, 0.0, True, n_self)
    ff = sum(c.first_author_gender is Gender.F for c in kept)
    mf = sum(c.first_author_gender is Gender.M for c in kept)
    fl = sum(c.last_author_gender is Gender.F for c in kept)
    ml = sum(c.last_author_gender is Gender.M for c in kept)
    return CitationProfile(doc.id, n, 100 * ff / n, 100 * mf / n, 100 * fl / n, 100 * ml / n, False, n_self)


def profiles_to_csv(profiles: Iterable[CitationProfile]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PROFILE_COLUMNS)
    for p in profiles:
        w.writerow(p.as_row())
    return buf.getvalue()
