"""Derived analyses: activity thresholds, rankings, extremes, per-capita strength.

All transforms are pure reads of the corpus / report / matrix, sorted with
lexicographic tie-breaks so re-running on shuffled input produces
identical rows.
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import Corpus, TerritoryRegistry
from .errors import MissingPopulationError
from .specialization import SpecializationReport
from .strength import StrengthMatrix


@dataclass(frozen=True)
class ActivityProfile:
    territory_code: str
    active_scs: frozenset
    pub_counts: dict


@dataclass(frozen=True, slots=True)
class TopKRow:
    subject: str
    entries: tuple  # ((entry, value), ...) non-increasing by value


@dataclass(frozen=True, slots=True)
class ExtremeRatioRow:
    subject: str
    active_count: int
    highly_specialized_count: int
    non_specialized_count: int
    ratio_high: float
    ratio_low: float


@dataclass(frozen=True, slots=True)
class TerritorySummaryRow:
    territory_code: str
    population: int
    organizations: int
    publications: int
    active_scs: int


def activity_profiles(corpus: Corpus, level: str, threshold: int = 1) -> dict[str, ActivityProfile]:
    """Deduplicated publication counts per territory and category.

    A publication ticks each of its categories once per distinct territory
    of its co-authors; ``active_scs`` keeps the categories at or above the
    threshold.
    """
    if threshold < 1:
        raise ValueError("threshold must be >= 1")
    counts: dict[str, dict[str, int]] = {}
    territory_tuple = corpus.territory_tuple
    for pub in corpus.publications:
        for t in territory_tuple(pub.pub_id, level):
            per_t = counts.get(t)
            if per_t is None:
                per_t = counts[t] = {}
            for sc in pub.subject_categories:
                per_t[sc] = per_t.get(sc, 0) + 1
    return {
        t: ActivityProfile(
            territory_code=t,
            active_scs=frozenset(sc for sc, c in per_t.items() if c >= threshold),
            pub_counts=per_t,
        )
        for t, per_t in counts.items()
    }


def profiles_from_counts(
    counts: dict[tuple[str, str], int], threshold: int = 1
) -> dict[str, ActivityProfile]:
    """Rebuild activity profiles from an exported per-cell count table."""
    per_territory: dict[str, dict[str, int]] = {}
    for (t, sc), c in counts.items():
        per_territory.setdefault(t, {})[sc] = c
    return {
        t: ActivityProfile(
            territory_code=t,
            active_scs=frozenset(sc for sc, c in per_t.items() if c >= threshold),
            pub_counts=per_t,
        )
        for t, per_t in per_territory.items()
    }


def top_scs_per_territory(report: SpecializationReport, k: int) -> list[TopKRow]:
    """Per territory, the k highest-index categories (ties by category id)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    by_territory: dict[str, list] = {}
    for (t, s), cell in report.cells.items():
        by_territory.setdefault(t, []).append((s, cell.ssi))
    rows = []
    for t in sorted(by_territory):
        ranked = sorted(by_territory[t], key=lambda e: (-e[1], e[0]))[:k]
        rows.append(TopKRow(subject=t, entries=tuple(ranked)))
    return rows


def top_territories_per_sc(report: SpecializationReport, k: int) -> list[TopKRow]:
    """Per category, the k highest-index territories; categories ordered by
    their best territorial value descending."""
    if k < 1:
        raise ValueError("k must be >= 1")
    by_sc: dict[str, list] = {}
    for (t, s), cell in report.cells.items():
        by_sc.setdefault(s, []).append((t, cell.ssi))
    prepared = []
    for s, entries in by_sc.items():
        ranked = sorted(entries, key=lambda e: (-e[1], e[0]))[:k]
        prepared.append((s, ranked, ranked[0][1]))
    prepared.sort(key=lambda item: (-item[2], item[0]))
    return [TopKRow(subject=s, entries=tuple(ranked)) for s, ranked, _ in prepared]


def _extreme_row(subject, active, high, low) -> ExtremeRatioRow:
    return ExtremeRatioRow(
        subject=subject,
        active_count=active,
        highly_specialized_count=high,
        non_specialized_count=low,
        ratio_high=high / active,
        ratio_low=low / active,
    )


def extreme_ratios_by_territory(
    report: SpecializationReport,
    profiles: dict[str, ActivityProfile],
    high_cut: float = 50.0,
    low_cut: float = -50.0,
) -> list[ExtremeRatioRow]:
    """Per territory: counts of active categories past either cut, over the
    territory's active-category count (strict inequalities)."""
    if high_cut <= low_cut:
        raise ValueError("high_cut must exceed low_cut")
    rows = []
    for t in sorted(report.territories()):
        profile = profiles.get(t)
        if profile is None or not profile.active_scs:
            continue
        high = low = 0
        for sc in profile.active_scs:
            cell = report.cells.get((t, sc))
            if cell is None:
                continue
            if cell.ssi > high_cut:
                high += 1
            elif cell.ssi < low_cut:
                low += 1
        rows.append(_extreme_row(t, len(profile.active_scs), high, low))
    rows.sort(key=lambda r: (-r.ratio_high, r.subject))
    return rows


def extreme_ratios_by_sc(
    report: SpecializationReport,
    profiles: dict[str, ActivityProfile],
    high_cut: float = 50.0,
    low_cut: float = -50.0,
) -> list[ExtremeRatioRow]:
    """Transpose of extreme_ratios_by_territory: territories counted per category."""
    if high_cut <= low_cut:
        raise ValueError("high_cut must exceed low_cut")
    active_by_sc: dict[str, list] = {}
    for t, profile in profiles.items():
        for sc in profile.active_scs:
            active_by_sc.setdefault(sc, []).append(t)
    rows = []
    for sc in sorted(active_by_sc):
        territories = active_by_sc[sc]
        high = low = 0
        for t in territories:
            cell = report.cells.get((t, sc))
            if cell is None:
                continue
            if cell.ssi > high_cut:
                high += 1
            elif cell.ssi < low_cut:
                low += 1
        rows.append(_extreme_row(sc, len(territories), high, low))
    rows.sort(key=lambda r: (-r.ratio_high, r.subject))
    return rows


def strength_per_inhabitant(
    matrix: StrengthMatrix, registry: TerritoryRegistry, sc: str
) -> dict[str, float]:
    """Strength of one category divided by territory population, for every
    active territory (absent cells count as zero strength)."""
    out = {}
    for t in matrix.territories():
        population = registry.population_of(t, matrix.level)
        if population is None or population <= 0:
            raise MissingPopulationError(
                f"no positive population for territory {t!r} at level {matrix.level}"
            )
        out[t] = matrix.values.get((t, sc), 0.0) / population
    return out


def territory_summary(
    corpus: Corpus,
    profiles: dict[str, ActivityProfile],
    level: str,
) -> list[TerritorySummaryRow]:
    """Per-territory overview: population, organizations, publications,
    active categories (rows sorted by territory code)."""
    registry = corpus.territories
    orgs_per: dict[str, int] = {}
    for org in corpus.organizations.values():
        code = org.province_code
        if level == "region":
            prov = registry.provinces.get(code)
            if prov is None:
                continue
            code = prov.region_code
        orgs_per[code] = orgs_per.get(code, 0) + 1
    pubs_per: dict[str, int] = {}
    for pub in corpus.publications:
        for t in corpus.territory_tuple(pub.pub_id, level):
            pubs_per[t] = pubs_per.get(t, 0) + 1
    rows = []
    for t in sorted(profiles):
        population = registry.population_of(t, level) or 0
        rows.append(
            TerritorySummaryRow(
                territory_code=t,
                population=population,
                organizations=orgs_per.get(t, 0),
                publications=pubs_per.get(t, 0),
                active_scs=len(profiles[t].active_scs),
            )
        )
    return rows
