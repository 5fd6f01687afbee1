"""Citation standardization: per-publication Article Impact Index.

A publication's citations are divided by the national mean citations of
same-year, same-subject-category publications.  Multi-category journals
use the equal-weight average of their categories' means as the scaling
factor, and the resulting index is split in equal fractions across the
categories.

Citation sums per stratum are integers, so stratum means are exact up to
one float division; every derived value is therefore independent of
iteration and worker order.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .config import AII_INCLUSIVE, AII_LEAVE_ONE_OUT
from .corpus import Corpus, PublicationRecord
from .errors import LeaveOneOutUndefined, MissingStratumError
from .parallel import chunked_map

log = logging.getLogger("specforge.normalize")


@dataclass(frozen=True, slots=True)
class Stratum:
    year: int
    sc_id: str
    pub_count: int
    citation_sum: int

    @property
    def mean_citations(self) -> float:
        return self.citation_sum / self.pub_count

    def leave_one_out_mean(self, citations: int) -> float:
        if self.pub_count == 1:
            raise LeaveOneOutUndefined(
                f"stratum ({self.year}, {self.sc_id}) has a single publication"
            )
        return (self.citation_sum - citations) / (self.pub_count - 1)


class StratumTable:
    """(year, sc_id) -> Stratum for exactly the pairs occurring in a corpus."""

    def __init__(self, strata: dict[tuple[int, str], Stratum]):
        self._strata = strata

    def __len__(self) -> int:
        return len(self._strata)

    def __contains__(self, key: tuple[int, str]) -> bool:
        return key in self._strata

    def get(self, year: int, sc_id: str) -> Stratum | None:
        return self._strata.get((year, sc_id))

    def items(self):
        return self._strata.items()


def build_strata(corpus: Corpus) -> StratumTable:
    """Count publications and sum citations per (year, subject category).

    A multi-category publication contributes its full citation count to
    each of its categories' strata.
    """
    counts: dict[tuple[int, str], int] = {}
    sums: dict[tuple[int, str], int] = {}
    for pub in corpus.publications:
        year = pub.year
        citations = pub.citations
        for sc in pub.subject_categories:
            key = (year, sc)
            counts[key] = counts.get(key, 0) + 1
            sums[key] = sums.get(key, 0) + citations
    strata = {
        key: Stratum(key[0], key[1], counts[key], sums[key]) for key in counts
    }
    return StratumTable(strata)


@dataclass(frozen=True, slots=True)
class ImpactRecord:
    pub_id: str
    aii: float
    per_sc_aii: dict
    zero_stratum: bool = False


def compute_aii(
    pub: PublicationRecord, strata: StratumTable, mode: str = AII_INCLUSIVE
) -> ImpactRecord:
    """Impact index of one publication against its strata.

    The scaling factor is the equal-weight average of the per-category
    reference means (in sorted category order, one mean for a single
    category).  A zero factor (every reference publication uncited) maps
    to an index of 0 with the zero-stratum flag set.
    """
    scs = pub.subject_categories
    m = len(scs)
    inclusive = mode != AII_LEAVE_ONE_OUT
    if m == 1:
        # Same bits as the general path: 0.0 + d == d and d / 1 == d exactly.
        stratum = strata.get(pub.year, scs[0])
        if stratum is None:
            raise MissingStratumError(
                f"no stratum for ({pub.year}, {scs[0]}) required by {pub.pub_id!r}"
            )
        factor = (
            stratum.mean_citations
            if inclusive
            else stratum.leave_one_out_mean(pub.citations)
        )
    else:
        denom_sum = 0.0
        for sc in sorted(scs):
            stratum = strata.get(pub.year, sc)
            if stratum is None:
                raise MissingStratumError(
                    f"no stratum for ({pub.year}, {sc}) required by {pub.pub_id!r}"
                )
            if inclusive:
                denom_sum += stratum.mean_citations
            else:
                denom_sum += stratum.leave_one_out_mean(pub.citations)
        factor = denom_sum / m
    if factor == 0.0:
        aii = 0.0
        zero = True
    else:
        aii = pub.citations / factor
        zero = False
    fraction = aii / m
    return ImpactRecord(
        pub_id=pub.pub_id,
        aii=aii,
        per_sc_aii={sc: fraction for sc in scs},
        zero_stratum=zero,
    )


def compute_all_impacts(
    corpus: Corpus, mode: str = AII_INCLUSIVE, workers: int = 1
) -> dict[str, ImpactRecord]:
    """One ImpactRecord per publication, independent of worker count."""
    strata = build_strata(corpus)
    return compute_impacts_from_strata(corpus, strata, mode, workers)


def compute_impacts_from_strata(
    corpus: Corpus,
    strata: StratumTable,
    mode: str = AII_INCLUSIVE,
    workers: int = 1,
) -> dict[str, ImpactRecord]:
    def one(pub: PublicationRecord) -> ImpactRecord:
        try:
            return compute_aii(pub, strata, mode)
        except (MissingStratumError, LeaveOneOutUndefined) as exc:
            raise type(exc)(f"{exc} (publication {pub.pub_id!r})") from exc

    records = chunked_map(one, corpus.publications, workers)
    zero_count = sum(1 for r in records if r.zero_stratum)
    if zero_count:
        log.warning("zero-mean stratum rule fired for %d publication(s)", zero_count)
    return {r.pub_id: r for r in records}
