"""Input data model: publications, organizations, territories, taxonomy.

Parses the four input files, cross-checks every reference, and builds an
immutable Corpus that downstream stages read concurrently.  Loading is
strict (unknown references are hard errors, never silent drops);
``validate_corpus`` is the non-throwing counterpart that counts violations
on corpora built by hand.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

from .config import PROVINCE, REGION, RunConfig
from .errors import EmptyCorpusError, ParseError, ReferentialError

DOC_TYPE_UNIVERSE = ("article", "review", "proceeding_paper", "letter", "other")

ORG_KINDS = {
    "U": "university",
    "I": "research_institution",
    "H": "research_hospital",
}

DISCIPLINES = frozenset(
    {
        "Biology",
        "Biomedical research",
        "Chemistry",
        "Clinical medicine",
        "Earth and space sciences",
        "Engineering",
        "Mathematics",
        "Physics",
    }
)


@dataclass(frozen=True, slots=True)
class PublicationRecord:
    pub_id: str
    year: int
    doc_type: str
    citations: int
    subject_categories: tuple[str, ...]
    org_ids: tuple[str, ...]


@dataclass(frozen=True, slots=True)
class Organization:
    org_id: str
    name: str
    org_kind: str
    province_code: str


@dataclass(frozen=True, slots=True)
class Province:
    code: str
    name: str
    region_code: str
    population: int


@dataclass(frozen=True, slots=True)
class Region:
    code: str
    name: str
    macro_area: str


class TerritoryRegistry:
    """Province/region hierarchy with per-territory population."""

    def __init__(self, provinces: dict[str, Province], regions: dict[str, Region]):
        self.provinces = provinces
        self.regions = regions
        self._region_pop: dict[str, int] | None = None

    def region_of(self, province_code: str) -> str:
        return self.provinces[province_code].region_code

    def population_of(self, code: str, level: str) -> int | None:
        """Population of a territory; region population sums its provinces."""
        if level == PROVINCE:
            prov = self.provinces.get(code)
            return prov.population if prov else None
        if self._region_pop is None:
            totals: dict[str, int] = {}
            for prov in self.provinces.values():
                totals[prov.region_code] = totals.get(prov.region_code, 0) + prov.population
            self._region_pop = totals
        return self._region_pop.get(code)

    def codes(self, level: str) -> list[str]:
        return sorted(self.provinces if level == PROVINCE else self.regions)


class SubjectCategoryTaxonomy:
    """sc_id -> (name, discipline) with the fixed eight-discipline universe."""

    def __init__(self, entries: dict[str, tuple[str, str]]):
        self.entries = entries

    def __contains__(self, sc_id: str) -> bool:
        return sc_id in self.entries

    def name_of(self, sc_id: str) -> str:
        return self.entries[sc_id][0]

    def discipline_of(self, sc_id: str) -> str:
        return self.entries[sc_id][1]


@dataclass(frozen=True, slots=True)
class LoadSummary:
    total_rows: int
    kept: int
    dropped: int
    dropped_by_type: dict


class Corpus:
    """Immutable cross-indexed corpus; safe for concurrent readers."""

    def __init__(
        self,
        publications,
        organizations: dict[str, Organization],
        territories: TerritoryRegistry,
        taxonomy: SubjectCategoryTaxonomy,
        census_date: str,
        year_window: tuple[int, int],
        load_summary: LoadSummary | None = None,
    ):
        self.publications = tuple(publications)
        self.organizations = organizations
        self.territories = territories
        self.taxonomy = taxonomy
        self.census_date = census_date
        self.year_window = year_window
        self.load_summary = load_summary
        self.by_id = {p.pub_id: p for p in self.publications}
        self._territory_index: dict[str, dict[str, tuple[str, ...]]] = {}

    def territory_tuple(self, pub_id: str, level: str) -> tuple[str, ...]:
        """Sorted duplicate-free territory codes of a publication at ``level``."""
        index = self._territory_index.get(level)
        if index is None:
            index = self._build_territory_index(level)
            self._territory_index[level] = index
        return index[pub_id]

    def _build_territory_index(self, level: str) -> dict[str, tuple[str, ...]]:
        if level == REGION:
            # Derive from the province index: cheaper and definitionally the
            # same as resolving orgs directly to regions.
            province_index = self._territory_index.get(PROVINCE)
            if province_index is None:
                province_index = self._build_territory_index(PROVINCE)
                self._territory_index[PROVINCE] = province_index
            provinces = self.territories.provinces
            region_of = {code: prov.region_code for code, prov in provinces.items()}
            cache: dict[tuple[str, ...], tuple[str, ...]] = {}
            index = {}
            for pub_id, provs in province_index.items():
                mapped = cache.get(provs)
                if mapped is None:
                    mapped = tuple(sorted({region_of[c] for c in provs if c in region_of}))
                    cache[provs] = mapped
                index[pub_id] = mapped
            return index
        orgs = self.organizations
        org_prov = {org_id: org.province_code for org_id, org in orgs.items()}
        index = {}
        for pub in self.publications:
            ids = pub.org_ids
            if len(ids) == 1:
                code = org_prov.get(ids[0])
                index[pub.pub_id] = (code,) if code is not None else ()
            else:
                seen = {org_prov[o] for o in ids if o in org_prov}
                index[pub.pub_id] = tuple(sorted(seen))
        return index

    def sc_ids(self) -> list[str]:
        seen = set()
        for pub in self.publications:
            seen.update(pub.subject_categories)
        return sorted(seen)


def territories_of(pub: PublicationRecord, corpus: Corpus, level: str) -> set[str]:
    """Duplicate-free territory codes reachable through the publication's orgs."""
    if level not in (PROVINCE, REGION):
        raise ValueError(f"unknown level {level!r}")
    return set(corpus.territory_tuple(pub.pub_id, level))


def _read_csv(path: Path, expected_header: list[str]):
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise ParseError(f"cannot open file: {exc}", path=str(path)) from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file, header row required", path=str(path), line=1)
        if header != expected_header:
            raise ParseError(
                f"bad header {header!r}, expected {expected_header!r}",
                path=str(path),
                line=1,
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(expected_header):
                raise ParseError(
                    f"expected {len(expected_header)} fields, got {len(row)}",
                    path=str(path),
                    line=lineno,
                )
            yield lineno, row


def load_territories(path: str | Path) -> TerritoryRegistry:
    path = Path(path)
    header = ["province_code", "province_name", "region_code", "region_name", "macro_area", "population"]
    provinces: dict[str, Province] = {}
    regions: dict[str, Region] = {}
    for lineno, row in _read_csv(path, header):
        code, name, region_code, region_name, macro_area, pop_s = row
        if code in provinces:
            raise ParseError(f"duplicate province_code {code!r}", path=str(path), line=lineno)
        try:
            population = int(pop_s)
        except ValueError:
            raise ParseError(f"population must be an integer, got {pop_s!r}", path=str(path), line=lineno)
        if population <= 0:
            raise ParseError(f"population must be positive, got {population}", path=str(path), line=lineno)
        known = regions.get(region_code)
        if known is None:
            regions[region_code] = Region(region_code, region_name, macro_area)
        elif (known.name, known.macro_area) != (region_name, macro_area):
            raise ParseError(
                f"region {region_code!r} redefined with different name/macro_area",
                path=str(path),
                line=lineno,
            )
        provinces[code] = Province(code, name, region_code, population)
    return TerritoryRegistry(provinces, regions)


def load_organizations(
    path: str | Path, registry: TerritoryRegistry, strict: bool = True
) -> dict[str, Organization]:
    path = Path(path)
    orgs: dict[str, Organization] = {}
    for lineno, row in _read_csv(path, ["org_id", "name", "org_kind", "province_code"]):
        org_id, name, kind_code, province_code = row
        if org_id in orgs:
            raise ParseError(f"duplicate org_id {org_id!r}", path=str(path), line=lineno)
        kind = ORG_KINDS.get(kind_code)
        if kind is None:
            raise ParseError(
                f"org_kind must be one of {sorted(ORG_KINDS)}, got {kind_code!r}",
                path=str(path),
                line=lineno,
            )
        if strict and province_code not in registry.provinces:
            raise ReferentialError(
                f"organization {org_id!r} references unknown province_code {province_code!r}",
                record_id=org_id,
            )
        orgs[org_id] = Organization(org_id, name, kind, province_code)
    return orgs


def load_taxonomy(path: str | Path) -> SubjectCategoryTaxonomy:
    path = Path(path)
    entries: dict[str, tuple[str, str]] = {}
    for lineno, row in _read_csv(path, ["sc_id", "sc_name", "discipline"]):
        sc_id, sc_name, discipline = row
        if sc_id in entries:
            raise ParseError(f"duplicate sc_id {sc_id!r}", path=str(path), line=lineno)
        if discipline not in DISCIPLINES:
            raise ParseError(
                f"discipline {discipline!r} not in the eight-discipline set",
                path=str(path),
                line=lineno,
            )
        entries[sc_id] = (sc_name, discipline)
    return SubjectCategoryTaxonomy(entries)


def _dedup(values) -> tuple[str, ...]:
    seen = set()
    out = []
    for v in values:
        if v not in seen:
            seen.add(v)
            out.append(v)
    return tuple(out)


def load_publications(
    path: str | Path,
    doc_filter: frozenset[str],
    year_window: tuple[int | None, int | None],
    strict: bool = True,
) -> tuple[list[PublicationRecord], LoadSummary]:
    path = Path(path)
    doc_universe = frozenset(DOC_TYPE_UNIVERSE)
    records: list[PublicationRecord] = []
    seen_ids: set[str] = set()
    dropped_by_type: dict[str, int] = {}
    total = 0
    y_lo, y_hi = year_window
    try:
        fh = open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot open file: {exc}", path=str(path)) from exc
    with fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            total += 1
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", path=str(path), line=lineno) from exc
            try:
                pub_id = obj["pub_id"]
                year = obj["year"]
                doc_type = obj["doc_type"]
                citations = obj["citations"]
                scs = obj["subject_categories"]
                org_ids = obj["org_ids"]
            except KeyError as exc:
                raise ParseError(f"missing field {exc.args[0]!r}", path=str(path), line=lineno) from exc
            if doc_type not in doc_filter:
                dropped_by_type[doc_type] = dropped_by_type.get(doc_type, 0) + 1
                continue
            if not isinstance(pub_id, str) or not pub_id:
                raise ParseError("pub_id must be a non-empty string", path=str(path), line=lineno)
            if not isinstance(year, int) or isinstance(year, bool):
                raise ParseError("year must be an integer", path=str(path), line=lineno)
            if not isinstance(citations, int) or isinstance(citations, bool):
                raise ParseError("citations must be an integer", path=str(path), line=lineno)
            if not isinstance(scs, list) or not all(isinstance(s, str) and s for s in scs):
                raise ParseError("subject_categories must be a list of ids", path=str(path), line=lineno)
            if not isinstance(org_ids, list) or not all(isinstance(o, str) and o for o in org_ids):
                raise ParseError("org_ids must be a list of ids", path=str(path), line=lineno)
            if strict:
                # Invariant breaches are hard errors on the loading path; the
                # lenient path keeps the records so validate_corpus can count them.
                if pub_id in seen_ids:
                    raise ParseError(f"duplicate pub_id {pub_id!r}", path=str(path), line=lineno)
                if citations < 0:
                    raise ParseError("citations must be non-negative", path=str(path), line=lineno)
                if not scs:
                    raise ParseError("subject_categories must be non-empty", path=str(path), line=lineno)
                if not org_ids:
                    raise ParseError("org_ids must be non-empty", path=str(path), line=lineno)
                if (y_lo is not None and year < y_lo) or (y_hi is not None and year > y_hi):
                    raise ParseError(
                        f"publication {pub_id!r} year {year} outside configured window",
                        path=str(path),
                        line=lineno,
                    )
            seen_ids.add(pub_id)
            records.append(
                PublicationRecord(
                    pub_id=pub_id,
                    year=year,
                    doc_type=doc_type if doc_type in doc_universe else "other",
                    citations=citations,
                    subject_categories=_dedup(scs),
                    org_ids=_dedup(org_ids),
                )
            )
    summary = LoadSummary(
        total_rows=total,
        kept=len(records),
        dropped=total - len(records),
        dropped_by_type=dropped_by_type,
    )
    return records, summary


def load_corpus(
    pubs_path: str | Path,
    orgs_path: str | Path,
    territories_path: str | Path,
    taxonomy_path: str | Path,
    config: RunConfig,
    strict: bool = True,
) -> Corpus:
    """Parse, filter and cross-check the four input files into a Corpus.

    With ``strict=False`` invariant breaches (unknown references, bad years,
    duplicates) are kept in the corpus for validate_corpus to count instead
    of raising; file-level malformations always raise.
    """
    registry = load_territories(territories_path)
    organizations = load_organizations(orgs_path, registry, strict=strict)
    taxonomy = load_taxonomy(taxonomy_path)
    records, summary = load_publications(
        pubs_path, frozenset(config.doc_types), config.year_window(), strict=strict
    )
    if not records:
        raise EmptyCorpusError("no publications survive doc_type filtering")

    if strict:
        sc_entries = taxonomy.entries
        for pub in records:
            for org_id in pub.org_ids:
                if org_id not in organizations:
                    raise ReferentialError(
                        f"publication {pub.pub_id!r} references unknown org_id {org_id!r}",
                        record_id=pub.pub_id,
                    )
            for sc in pub.subject_categories:
                if sc not in sc_entries:
                    raise ReferentialError(
                        f"publication {pub.pub_id!r} references unknown sc_id {sc!r}",
                        record_id=pub.pub_id,
                    )

    y_lo, y_hi = config.year_window()
    if y_lo is None:
        y_lo = min(p.year for p in records)
    if y_hi is None:
        y_hi = max(p.year for p in records)
    return Corpus(
        publications=records,
        organizations=organizations,
        territories=registry,
        taxonomy=taxonomy,
        census_date=config.census_date,
        year_window=(y_lo, y_hi),
        load_summary=summary,
    )


@dataclass
class ValidationReport:
    total_publications: int = 0
    violations: dict = field(default_factory=dict)
    pubs_per_year: dict = field(default_factory=dict)
    pubs_per_sc: dict = field(default_factory=dict)
    pubs_per_province: dict = field(default_factory=dict)
    pubs_per_region: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not any(self.violations.values())

    def lines(self) -> list[str]:
        out = [f"publications: {self.total_publications}"]
        if self.pubs_per_year:
            years = sorted(self.pubs_per_year)
            out.append(
                "years: "
                + ", ".join(f"{y}={self.pubs_per_year[y]}" for y in years)
            )
        out.append(f"subject categories with output: {len(self.pubs_per_sc)}")
        out.append(f"provinces with output: {len(self.pubs_per_province)}")
        out.append(f"regions with output: {len(self.pubs_per_region)}")
        if self.ok:
            out.append("violations: none")
        else:
            for name in sorted(self.violations):
                count = self.violations[name]
                if count:
                    out.append(f"violation {name}: {count}")
        return out


def validate_corpus(corpus: Corpus) -> ValidationReport:
    """Count invariant violations and gather descriptive statistics.

    Never raises: corpora assembled by hand (bypassing load_corpus) are
    reported on, not rejected.
    """
    report = ValidationReport(total_publications=len(corpus.publications))
    v = report.violations
    for name in (
        "duplicate_pub_id",
        "negative_citations",
        "year_out_of_window",
        "empty_subject_categories",
        "duplicate_subject_categories",
        "empty_org_ids",
        "duplicate_org_ids",
        "unknown_org_id",
        "unknown_sc_id",
        "unknown_province_code",
        "unknown_region_code",
        "nonpositive_population",
    ):
        v[name] = 0

    registry = corpus.territories
    for prov in registry.provinces.values():
        if prov.region_code not in registry.regions:
            v["unknown_region_code"] += 1
        if prov.population <= 0:
            v["nonpositive_population"] += 1
    for org in corpus.organizations.values():
        if org.province_code not in registry.provinces:
            v["unknown_province_code"] += 1

    y_lo, y_hi = corpus.year_window
    seen_ids: set[str] = set()
    orgs = corpus.organizations
    sc_entries = corpus.taxonomy.entries
    for pub in corpus.publications:
        if pub.pub_id in seen_ids:
            v["duplicate_pub_id"] += 1
        seen_ids.add(pub.pub_id)
        if pub.citations < 0:
            v["negative_citations"] += 1
        if not (y_lo <= pub.year <= y_hi):
            v["year_out_of_window"] += 1
        if not pub.subject_categories:
            v["empty_subject_categories"] += 1
        elif len(set(pub.subject_categories)) != len(pub.subject_categories):
            v["duplicate_subject_categories"] += 1
        if not pub.org_ids:
            v["empty_org_ids"] += 1
        elif len(set(pub.org_ids)) != len(pub.org_ids):
            v["duplicate_org_ids"] += 1
        for org_id in pub.org_ids:
            if org_id not in orgs:
                v["unknown_org_id"] += 1
        for sc in pub.subject_categories:
            if sc not in sc_entries:
                v["unknown_sc_id"] += 1

        report.pubs_per_year[pub.year] = report.pubs_per_year.get(pub.year, 0) + 1
        for sc in set(pub.subject_categories):
            report.pubs_per_sc[sc] = report.pubs_per_sc.get(sc, 0) + 1

    # Territory histograms use dedup counting: one tick per publication per territory.
    for level, hist in ((PROVINCE, report.pubs_per_province), (REGION, report.pubs_per_region)):
        for pub in corpus.publications:
            codes = {
                orgs[o].province_code for o in pub.org_ids if o in orgs
            }
            if level == REGION:
                codes = {
                    registry.provinces[c].region_code
                    for c in codes
                    if c in registry.provinces
                }
            for code in codes:
                hist[code] = hist.get(code, 0) + 1
    return report
