"""Territory x subject-category Scientific Strength matrix.

Each publication credits its full fractional impact to every distinct
territory of its co-authors (whole counting across territories), but only
once per territory (co-authors in the same territory do not multiply it).
Publication counts are tallied alongside under the same dedup rule.

Cell values are exactly-rounded sums (math.fsum) of their contributions
and totals are exactly-rounded sums of cell values in sorted key order, so
results are bit-identical for any iteration or worker order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import fsum

from .corpus import Corpus
from .errors import EmptyMatrixError, ImpactCoverageError, InactiveTerritoryError


@dataclass(frozen=True)
class StrengthMatrix:
    level: str
    values: dict = field(default_factory=dict)
    counts: dict = field(default_factory=dict)
    territory_totals: dict = field(default_factory=dict)
    sc_totals: dict = field(default_factory=dict)
    grand_total: float = 0.0
    count_territory_totals: dict = field(default_factory=dict)
    count_sc_totals: dict = field(default_factory=dict)
    count_grand_total: int = 0

    def territories(self) -> list[str]:
        return sorted(self.territory_totals)

    def sc_ids(self) -> list[str]:
        return sorted(self.sc_totals)

    def is_empty(self) -> bool:
        return not self.values or self.grand_total <= 0.0


def make_matrix(level: str, values: dict, counts: dict) -> StrengthMatrix:
    """Canonical matrix constructor: totals, then pruning of inactive rows.

    Territories whose total strength is zero are dropped entirely (they are
    "inactive", not zero rows); subject categories with zero national
    strength are dropped the same way.  Dropped cells are all exact zeros,
    so surviving totals are unaffected.
    """
    territory_totals: dict[str, float] = {}
    by_territory: dict[str, list] = {}
    for (t, s) in values:
        by_territory.setdefault(t, []).append(s)
    for t, scs in by_territory.items():
        territory_totals[t] = fsum(values[(t, s)] for s in sorted(scs))

    active = {t for t, total in territory_totals.items() if total > 0.0}
    values = {k: v for k, v in values.items() if k[0] in active}
    territory_totals = {t: total for t, total in territory_totals.items() if t in active}

    by_sc: dict[str, list] = {}
    for (t, s) in values:
        by_sc.setdefault(s, []).append(t)
    sc_totals = {
        s: fsum(values[(t, s)] for t in sorted(ts)) for s, ts in by_sc.items()
    }
    live_scs = {s for s, total in sc_totals.items() if total > 0.0}
    values = {k: v for k, v in values.items() if k[1] in live_scs}
    sc_totals = {s: total for s, total in sc_totals.items() if s in live_scs}

    grand_total = fsum(values[k] for k in sorted(values))

    counts = {k: c for k, c in counts.items() if k in values}
    count_territory_totals: dict[str, int] = {}
    count_sc_totals: dict[str, int] = {}
    count_grand = 0
    for (t, s), c in counts.items():
        count_territory_totals[t] = count_territory_totals.get(t, 0) + c
        count_sc_totals[s] = count_sc_totals.get(s, 0) + c
        count_grand += c

    return StrengthMatrix(
        level=level,
        values=values,
        counts=counts,
        territory_totals=territory_totals,
        sc_totals=sc_totals,
        grand_total=grand_total,
        count_territory_totals=count_territory_totals,
        count_sc_totals=count_sc_totals,
        count_grand_total=count_grand,
    )


def build_strength(corpus: Corpus, impacts: dict, level: str) -> StrengthMatrix:
    """Accumulate fractional impact per (territory, subject category)."""
    contributions: dict[tuple[str, str], list] = {}
    territory_tuple = corpus.territory_tuple
    for pub in corpus.publications:
        record = impacts.get(pub.pub_id)
        if record is None:
            raise ImpactCoverageError(f"no impact record for publication {pub.pub_id!r}")
        per_sc = record.per_sc_aii
        for t in territory_tuple(pub.pub_id, level):
            for sc in pub.subject_categories:
                key = (t, sc)
                bucket = contributions.get(key)
                if bucket is None:
                    contributions[key] = [per_sc[sc]]
                else:
                    bucket.append(per_sc[sc])
    # Dedup guarantees one contribution per (publication, territory, sc),
    # so the count matrix is just the bucket sizes.
    values = {key: fsum(parts) for key, parts in contributions.items()}
    counts = {key: len(parts) for key, parts in contributions.items()}
    return make_matrix(level, values, counts)


def strength_share(matrix: StrengthMatrix, territory: str, sc: str) -> float:
    """Share of the territory's total strength held by one subject category."""
    total = matrix.territory_totals.get(territory, 0.0)
    if total <= 0.0:
        raise InactiveTerritoryError(f"territory {territory!r} is inactive")
    return matrix.values.get((territory, sc), 0.0) / total


def national_share(matrix: StrengthMatrix, sc: str) -> float:
    """Share of national total strength held by one subject category."""
    if matrix.is_empty():
        raise EmptyMatrixError("strength matrix has no positive entries")
    return matrix.sc_totals.get(sc, 0.0) / matrix.grand_total


def count_share(matrix: StrengthMatrix, territory: str, sc: str) -> float:
    """strength_share analogue on deduplicated publication counts."""
    total = matrix.count_territory_totals.get(territory, 0)
    if total <= 0:
        raise InactiveTerritoryError(f"territory {territory!r} is inactive")
    return matrix.counts.get((territory, sc), 0) / total


def national_count_share(matrix: StrengthMatrix, sc: str) -> float:
    if matrix.count_grand_total <= 0:
        raise EmptyMatrixError("strength matrix has no publication counts")
    return matrix.count_sc_totals.get(sc, 0) / matrix.count_grand_total


def write_strength_csv(matrix: StrengthMatrix, path, census_date: str, aii_mode: str) -> None:
    """Interchange export: metadata rows, then territory_code,sc_id,ss."""
    lines = [
        f"# level={matrix.level}",
        f"# census_date={census_date}",
        f"# aii_mode={aii_mode}",
        "territory_code,sc_id,ss",
    ]
    for (t, s) in sorted(matrix.values):
        lines.append(f"{t},{s},{matrix.values[(t, s)]!r}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_counts_csv(matrix: StrengthMatrix, path, census_date: str) -> None:
    """Interchange export of deduplicated publication counts per cell."""
    lines = [
        f"# level={matrix.level}",
        f"# census_date={census_date}",
        "territory_code,sc_id,pub_count",
    ]
    for (t, s) in sorted(matrix.counts):
        lines.append(f"{t},{s},{matrix.counts[(t, s)]}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_strength_csv(path) -> tuple[StrengthMatrix, dict]:
    """Rebuild a StrengthMatrix (values only) from its interchange export."""
    meta: dict[str, str] = {}
    values: dict[tuple[str, str], float] = {}
    with open(path, "r", encoding="utf-8") as fh:
        header_seen = False
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("# "):
                key, _, val = line[2:].partition("=")
                meta[key] = val
                continue
            if not header_seen:
                header_seen = True
                continue
            t, s, ss = line.split(",")
            values[(t, s)] = float(ss)
    level = meta.get("level", "province")
    return make_matrix(level, values, {}), meta


def read_counts_csv(path) -> dict[tuple[str, str], int]:
    counts: dict[tuple[str, str], int] = {}
    with open(path, "r", encoding="utf-8") as fh:
        header_seen = False
        for line in fh:
            line = line.rstrip("\n")
            if not line or line.startswith("# "):
                continue
            if not header_seen:
                header_seen = True
                continue
            t, s, c = line.split(",")
            counts[(t, s)] = int(c)
    return counts
