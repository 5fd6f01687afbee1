"""Seeded synthetic corpora with planted specialization, and a naive oracle.

The generator is single-threaded pure ``random.Random`` so a seed fixes
the corpus byte-for-byte.  Planted (territory, category) pairs receive a
publication share of ``boost / n_territories`` within that category (the
uniform baseline share times the boost), the remaining mass spread evenly
over the other territories.  Citation counts come from an overdispersed
(negative-binomial-shaped) integer distribution around per-(year,
category) means.

``oracle_pipeline`` recomputes the full indicator stack with plain nested
loops and no shared intermediates; because every sum in the contract is an
exactly-rounded sum over a defined multiset, its report must match the
main pipeline bit for bit.
"""

from __future__ import annotations

import json
import math
import random
from bisect import bisect_right
from dataclasses import dataclass, field
from math import fsum
from pathlib import Path

from .config import AII_LEAVE_ONE_OUT, BASIS_PUB_COUNT, RunConfig
from .corpus import (
    Corpus,
    Organization,
    Province,
    PublicationRecord,
    Region,
    SubjectCategoryTaxonomy,
    TerritoryRegistry,
)
from .errors import (
    EmptyCorpusError,
    EmptyMatrixError,
    LeaveOneOutUndefined,
    SpecError,
)
from .specialization import SpecializationCell, SpecializationReport

_DISCIPLINE_CYCLE = (
    "Biology",
    "Biomedical research",
    "Chemistry",
    "Clinical medicine",
    "Earth and space sciences",
    "Engineering",
    "Mathematics",
    "Physics",
)

_KIND_CYCLE = ("university", "research_institution", "research_hospital")


@dataclass(frozen=True)
class PlantedPair:
    territory: str
    sc: str
    boost: float


@dataclass(frozen=True)
class CitationModel:
    mean_low: float = 1.0
    mean_high: float = 8.0
    dispersion: float = 1.5


@dataclass(frozen=True)
class SynthSpec:
    seed: int
    n_territories: int = 10
    n_scs: int = 8
    n_years: int = 5
    n_publications: int = 1000
    specialization_plan: tuple = ()
    citation_model: CitationModel = field(default_factory=CitationModel)
    multi_sc_rate: float = 0.15
    multi_org_rate: float = 0.2
    orgs_per_province: int = 2
    provinces_per_region: int = 3
    start_year: int = 2006

    def province_codes(self) -> list[str]:
        width = max(3, len(str(self.n_territories)))
        return [f"P{i:0{width}d}" for i in range(1, self.n_territories + 1)]

    def sc_codes(self) -> list[str]:
        width = max(3, len(str(self.n_scs)))
        return [f"SC{i:0{width}d}" for i in range(1, self.n_scs + 1)]


@dataclass(frozen=True)
class SynthResult:
    corpus: Corpus
    ground_truth: dict


def _validate_spec(spec: SynthSpec) -> None:
    if spec.n_territories < 1 or spec.n_scs < 1 or spec.n_years < 1:
        raise SpecError("n_territories, n_scs and n_years must all be >= 1")
    if spec.n_publications < spec.n_territories:
        raise SpecError("n_publications must be >= n_territories")
    if not (0.0 <= spec.multi_sc_rate <= 1.0 and 0.0 <= spec.multi_org_rate <= 1.0):
        raise SpecError("rates must lie in [0, 1]")
    if spec.orgs_per_province < 1 or spec.provinces_per_region < 1:
        raise SpecError("orgs_per_province and provinces_per_region must be >= 1")
    model = spec.citation_model
    if not (0 < model.mean_low <= model.mean_high) or model.dispersion <= 0:
        raise SpecError("citation model needs 0 < mean_low <= mean_high and dispersion > 0")
    provinces = set(spec.province_codes())
    scs = set(spec.sc_codes())
    seen = set()
    mass: dict[str, float] = {}
    for pair in spec.specialization_plan:
        if pair.boost <= 1.0:
            raise SpecError(f"boost must be > 1, got {pair.boost} for {pair.territory}/{pair.sc}")
        if pair.territory not in provinces:
            raise SpecError(f"planted territory {pair.territory!r} not among generated provinces")
        if pair.sc not in scs:
            raise SpecError(f"planted sc {pair.sc!r} not among generated categories")
        key = (pair.territory, pair.sc)
        if key in seen:
            raise SpecError(f"duplicate planted pair {key}")
        seen.add(key)
        mass[pair.sc] = mass.get(pair.sc, 0.0) + pair.boost / spec.n_territories
    for sc, total in mass.items():
        if total >= 0.95:
            raise SpecError(f"planted share mass for {sc!r} is {total:.2f}, must stay below 0.95")


def _negative_binomial(rng: random.Random, mean: float, dispersion: float) -> int:
    """Overdispersed count via inverse-CDF walk (deterministic per rng state)."""
    if mean <= 0.0:
        return 0
    p = dispersion / (dispersion + mean)
    u = rng.random()
    x = 0
    pmf = p**dispersion
    cdf = pmf
    while u > cdf and x < 1_000_000:
        pmf *= (x + dispersion) * (1.0 - p) / (x + 1.0)
        x += 1
        cdf += pmf
    return x


def generate(spec: SynthSpec) -> SynthResult:
    """Deterministically build a corpus honoring the specialization plan."""
    _validate_spec(spec)
    rng = random.Random(spec.seed)

    province_codes = spec.province_codes()
    n_regions = -(-spec.n_territories // spec.provinces_per_region)
    region_width = max(2, len(str(n_regions)))
    macro_cycle = ("north", "center", "south", "islands")

    provinces: dict[str, Province] = {}
    regions: dict[str, Region] = {}
    for i, code in enumerate(province_codes):
        region_idx = i // spec.provinces_per_region + 1
        region_code = f"R{region_idx:0{region_width}d}"
        if region_code not in regions:
            regions[region_code] = Region(
                region_code,
                f"Region {region_idx:03d}",
                macro_cycle[(region_idx - 1) % len(macro_cycle)],
            )
        population = rng.randint(80_000, 3_000_000)
        provinces[code] = Province(code, f"Province {i + 1:03d}", region_code, population)
    registry = TerritoryRegistry(provinces, regions)

    organizations: dict[str, Organization] = {}
    org_ids_by_province: dict[str, list[str]] = {}
    org_counter = 0
    for code in province_codes:
        bucket = org_ids_by_province[code] = []
        for j in range(spec.orgs_per_province):
            org_counter += 1
            org_id = f"ORG{org_counter:05d}"
            organizations[org_id] = Organization(
                org_id,
                f"Organization {org_counter:05d}",
                _KIND_CYCLE[(org_counter - 1) % len(_KIND_CYCLE)],
                code,
            )
            bucket.append(org_id)
    all_org_ids = [o for code in province_codes for o in org_ids_by_province[code]]

    sc_codes = spec.sc_codes()
    taxonomy = SubjectCategoryTaxonomy(
        {
            sc: (f"Category {i + 1:03d}", _DISCIPLINE_CYCLE[i % len(_DISCIPLINE_CYCLE)])
            for i, sc in enumerate(sc_codes)
        }
    )

    years = [spec.start_year + i for i in range(spec.n_years)]
    model = spec.citation_model
    stratum_mean = {
        (year, sc): rng.uniform(model.mean_low, model.mean_high)
        for year in years
        for sc in sc_codes
    }

    # Per-category cumulative territory distribution honoring the plan.
    planted_by_sc: dict[str, list[PlantedPair]] = {}
    for pair in spec.specialization_plan:
        planted_by_sc.setdefault(pair.sc, []).append(pair)
    n_t = spec.n_territories
    cumdist: dict[str, list[float]] = {}
    for sc in sc_codes:
        pairs = planted_by_sc.get(sc, [])
        planted_p = {p.territory: p.boost / n_t for p in pairs}
        rest = (1.0 - sum(planted_p.values())) / (n_t - len(planted_p)) if n_t > len(planted_p) else 0.0
        acc = 0.0
        cum = []
        for code in province_codes:
            acc += planted_p.get(code, rest)
            cum.append(acc)
        cum[-1] = 1.0
        cumdist[sc] = cum

    doc_cuts = ((0.70, "article"), (0.80, "review"), (0.95, "proceeding_paper"), (1.01, "letter"))
    width = max(6, len(str(spec.n_publications)))
    publications: list[PublicationRecord] = []
    for i in range(spec.n_publications):
        sc_primary = sc_codes[rng.randrange(spec.n_scs)]
        if i < n_t:
            territory = province_codes[i]
        else:
            territory = province_codes[bisect_right(cumdist[sc_primary], rng.random())]
        scs = [sc_primary]
        if spec.n_scs > 1 and rng.random() < spec.multi_sc_rate:
            other = rng.randrange(spec.n_scs - 1)
            sc_extra = sc_codes[other if sc_codes[other] != sc_primary else spec.n_scs - 1]
            scs.append(sc_extra)
        bucket = org_ids_by_province[territory]
        org_ids = [bucket[rng.randrange(len(bucket))]]
        if rng.random() < spec.multi_org_rate:
            extra = all_org_ids[rng.randrange(len(all_org_ids))]
            if extra not in org_ids:
                org_ids.append(extra)
        year = years[rng.randrange(spec.n_years)]
        citations = _negative_binomial(rng, stratum_mean[(year, sc_primary)], model.dispersion)
        u = rng.random()
        doc_type = next(name for cut, name in doc_cuts if u < cut)
        publications.append(
            PublicationRecord(
                pub_id=f"PUB{i + 1:0{width}d}",
                year=year,
                doc_type=doc_type,
                citations=citations,
                subject_categories=tuple(scs),
                org_ids=tuple(org_ids),
            )
        )

    census_date = f"{years[-1] + 1}-12-31"
    corpus = Corpus(
        publications=publications,
        organizations=organizations,
        territories=registry,
        taxonomy=taxonomy,
        census_date=census_date,
        year_window=(years[0], years[-1]),
    )
    ground_truth = {
        "seed": spec.seed,
        "n_territories": spec.n_territories,
        "n_scs": spec.n_scs,
        "n_years": spec.n_years,
        "n_publications": spec.n_publications,
        "multi_sc_rate": spec.multi_sc_rate,
        "multi_org_rate": spec.multi_org_rate,
        "province_codes": province_codes,
        "region_codes": sorted(regions),
        "sc_ids": sc_codes,
        "census_date": census_date,
        "year_window": [years[0], years[-1]],
        "planted": [
            {
                "territory": p.territory,
                "sc": p.sc,
                "boost": p.boost,
                "target_share": p.boost / n_t,
            }
            for p in spec.specialization_plan
        ],
    }
    return SynthResult(corpus=corpus, ground_truth=ground_truth)


def write_corpus_files(result: SynthResult, out_dir: str | Path) -> dict[str, str]:
    """Write the four corpus input files plus ground_truth.json; returns paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    corpus = result.corpus

    pubs_path = out / "pubs.jsonl"
    with open(pubs_path, "w", encoding="utf-8", newline="\n") as fh:
        for p in corpus.publications:
            fh.write(
                json.dumps(
                    {
                        "pub_id": p.pub_id,
                        "year": p.year,
                        "doc_type": p.doc_type,
                        "citations": p.citations,
                        "subject_categories": list(p.subject_categories),
                        "org_ids": list(p.org_ids),
                    },
                    separators=(",", ":"),
                )
                + "\n"
            )

    orgs_path = out / "orgs.csv"
    kind_letter = {"university": "U", "research_institution": "I", "research_hospital": "H"}
    with open(orgs_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("org_id,name,org_kind,province_code\n")
        for org_id in sorted(corpus.organizations):
            org = corpus.organizations[org_id]
            fh.write(f"{org.org_id},{org.name},{kind_letter[org.org_kind]},{org.province_code}\n")

    territories_path = out / "territories.csv"
    registry = corpus.territories
    with open(territories_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("province_code,province_name,region_code,region_name,macro_area,population\n")
        for code in sorted(registry.provinces):
            prov = registry.provinces[code]
            region = registry.regions[prov.region_code]
            fh.write(
                f"{prov.code},{prov.name},{region.code},{region.name},"
                f"{region.macro_area},{prov.population}\n"
            )

    taxonomy_path = out / "taxonomy.csv"
    with open(taxonomy_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("sc_id,sc_name,discipline\n")
        for sc_id in sorted(corpus.taxonomy.entries):
            name, discipline = corpus.taxonomy.entries[sc_id]
            fh.write(f"{sc_id},{name},{discipline}\n")

    truth_path = out / "ground_truth.json"
    with open(truth_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(result.ground_truth, fh, indent=2, sort_keys=True)
        fh.write("\n")

    return {
        "pubs": str(pubs_path),
        "orgs": str(orgs_path),
        "territories": str(territories_path),
        "taxonomy": str(taxonomy_path),
        "ground_truth": str(truth_path),
    }


def oracle_pipeline(corpus: Corpus, config: RunConfig, level: str | None = None) -> SpecializationReport:
    """Recompute the whole indicator stack with plain nested loops.

    Shares nothing with the main path except the domain containers; its
    output must equal the main pipeline's report cell for cell.
    """
    if not corpus.publications:
        raise EmptyCorpusError("oracle received an empty corpus")
    level = level or config.levels[0]
    pubs = sorted(corpus.publications, key=lambda p: p.pub_id)

    counts: dict[tuple[int, str], int] = {}
    sums: dict[tuple[int, str], int] = {}
    for p in pubs:
        for s in p.subject_categories:
            counts[(p.year, s)] = counts.get((p.year, s), 0) + 1
            sums[(p.year, s)] = sums.get((p.year, s), 0) + p.citations

    fractions: dict[str, float] = {}
    for p in pubs:
        m = len(p.subject_categories)
        denom_sum = 0.0
        for s in sorted(p.subject_categories):
            key = (p.year, s)
            if config.aii_mode == AII_LEAVE_ONE_OUT:
                if counts[key] == 1:
                    raise LeaveOneOutUndefined(f"stratum {key} has a single publication")
                denom_sum += (sums[key] - p.citations) / (counts[key] - 1)
            else:
                denom_sum += sums[key] / counts[key]
        factor = denom_sum / m
        aii = 0.0 if factor == 0.0 else p.citations / factor
        fractions[p.pub_id] = aii / m

    def territories(p: PublicationRecord) -> list[str]:
        out = set()
        for org_id in p.org_ids:
            province = corpus.organizations[org_id].province_code
            if level == "region":
                out.add(corpus.territories.provinces[province].region_code)
            else:
                out.add(province)
        return sorted(out)

    cell_parts: dict[tuple[str, str], list] = {}
    cell_counts: dict[tuple[str, str], int] = {}
    for p in pubs:
        for t in territories(p):
            for s in p.subject_categories:
                cell_parts.setdefault((t, s), []).append(fractions[p.pub_id])
                cell_counts[(t, s)] = cell_counts.get((t, s), 0) + 1
    values = {key: fsum(parts) for key, parts in cell_parts.items()}

    terr_scs: dict[str, list] = {}
    for (t, s) in values:
        terr_scs.setdefault(t, []).append(s)
    terr_tot = {t: fsum(values[(t, s)] for s in sorted(scs)) for t, scs in terr_scs.items()}
    active = sorted(t for t, total in terr_tot.items() if total > 0.0)
    values = {k: v for k, v in values.items() if k[0] in set(active)}

    sc_terrs: dict[str, list] = {}
    for (t, s) in values:
        sc_terrs.setdefault(s, []).append(t)
    sc_tot = {s: fsum(values[(t, s)] for t in sorted(ts)) for s, ts in sc_terrs.items()}
    live = sorted(s for s, total in sc_tot.items() if total > 0.0)
    values = {k: v for k, v in values.items() if k[1] in set(live)}
    grand = fsum(values[k] for k in sorted(values))
    if not values or grand <= 0.0:
        raise EmptyMatrixError("oracle matrix has no positive entries")

    cell_counts = {k: c for k, c in cell_counts.items() if k in values}
    cnt_terr: dict[str, int] = {}
    cnt_sc: dict[str, int] = {}
    cnt_grand = 0
    for (t, s), c in cell_counts.items():
        cnt_terr[t] = cnt_terr.get(t, 0) + c
        cnt_sc[s] = cnt_sc.get(s, 0) + c
        cnt_grand += c

    bands = config.bands
    inner = bands.expected_half_width
    outer = bands.extreme_edge
    cells: dict[tuple[str, str], SpecializationCell] = {}
    for t in active:
        for s in live:
            share = values.get((t, s), 0.0) / terr_tot[t]
            nat = sc_tot[s] / grand
            if share == 0.0:
                r = 0.0
            elif nat == 0.0:
                r = math.inf
            else:
                r = share / nat
            value = -100.0 if r == 0.0 else 100.0 * math.tanh(math.log(r))
            if config.ai_basis == BASIS_PUB_COUNT:
                ai = (cell_counts.get((t, s), 0) / cnt_terr[t]) / (cnt_sc[s] / cnt_grand)
            else:
                ai = r
            rsi_value = 1.0 if math.isinf(ai) else (ai - 1.0) / (ai + 1.0)
            if value > outer:
                label = "highly_specialized"
            elif value > inner:
                label = "specialized"
            elif value >= -inner:
                label = "expected"
            elif value >= -outer:
                label = "de_specialized"
            else:
                label = "strongly_de_specialized"
            cells[(t, s)] = SpecializationCell(t, s, value, ai, rsi_value, label)
    return SpecializationReport(
        level=level,
        cells=cells,
        bands=bands,
        ai_basis=config.ai_basis,
        aii_mode=config.aii_mode,
        census_date=config.census_date,
    )
