"""Shared fixtures: the 2x2 hand corpus, file writers, small helpers."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from specforge.config import RunConfig
from specforge.corpus import (
    Corpus,
    Organization,
    Province,
    PublicationRecord,
    Region,
    SubjectCategoryTaxonomy,
    TerritoryRegistry,
)

ASSETS = Path(__file__).parent / "assets"


def make_registry(provinces, regions) -> TerritoryRegistry:
    """provinces: (code, name, region_code, population); regions: (code, name, macro)."""
    return TerritoryRegistry(
        {p[0]: Province(*p) for p in provinces},
        {r[0]: Region(*r) for r in regions},
    )


def make_pub(pub_id, year=2008, doc_type="article", citations=0, scs=("X",), orgs=("OA",)):
    return PublicationRecord(
        pub_id=pub_id,
        year=year,
        doc_type=doc_type,
        citations=citations,
        subject_categories=tuple(scs),
        org_ids=tuple(orgs),
    )


def ab_publications() -> list[PublicationRecord]:
    """8 A-X pubs (4 citations), 2 A-Y (2), 2 B-X (4), 8 B-Y (2).

    Every publication matches its stratum mean exactly, so each impact
    index is 1 and the strength matrix is A:{X:8, Y:2}, B:{X:2, Y:8}.
    """
    pubs = []
    n = 0
    for count, org, sc, citations in ((8, "OA", "X", 4), (2, "OA", "Y", 2), (2, "OB", "X", 4), (8, "OB", "Y", 2)):
        for _ in range(count):
            n += 1
            pubs.append(make_pub(f"p{n:02d}", citations=citations, scs=(sc,), orgs=(org,)))
    return pubs


def build_ab_corpus() -> Corpus:
    registry = make_registry(
        provinces=[("A", "Alpha", "R1", 1_000_000), ("B", "Beta", "R2", 500_000)],
        regions=[("R1", "North", "north"), ("R2", "South", "south")],
    )
    organizations = {
        "OA": Organization("OA", "Alpha University", "university", "A"),
        "OB": Organization("OB", "Beta Institute", "research_institution", "B"),
    }
    taxonomy = SubjectCategoryTaxonomy(
        {"X": ("Applied Widgets", "Mathematics"), "Y": ("Particle Gadgets", "Physics")}
    )
    return Corpus(
        publications=ab_publications(),
        organizations=organizations,
        territories=registry,
        taxonomy=taxonomy,
        census_date="2011-12-31",
        year_window=(2006, 2010),
    )


@pytest.fixture
def ab_corpus() -> Corpus:
    return build_ab_corpus()


@pytest.fixture
def ab_expected() -> dict:
    return json.loads((ASSETS / "ab_expected.json").read_text())


@pytest.fixture
def base_config() -> RunConfig:
    return RunConfig(census_date="2011-12-31")


def write_ab_files(directory: Path) -> dict[str, str]:
    """The hand corpus in the four on-disk input formats."""
    directory.mkdir(parents=True, exist_ok=True)
    pubs = directory / "pubs.jsonl"
    with open(pubs, "w", encoding="utf-8") as fh:
        for p in ab_publications():
            fh.write(
                json.dumps(
                    {
                        "pub_id": p.pub_id,
                        "year": p.year,
                        "doc_type": p.doc_type,
                        "citations": p.citations,
                        "subject_categories": list(p.subject_categories),
                        "org_ids": list(p.org_ids),
                    }
                )
                + "\n"
            )
    orgs = directory / "orgs.csv"
    orgs.write_text(
        "org_id,name,org_kind,province_code\n"
        "OA,Alpha University,U,A\n"
        "OB,Beta Institute,I,B\n",
        encoding="utf-8",
    )
    territories = directory / "territories.csv"
    territories.write_text(
        "province_code,province_name,region_code,region_name,macro_area,population\n"
        "A,Alpha,R1,North,north,1000000\n"
        "B,Beta,R2,South,south,500000\n",
        encoding="utf-8",
    )
    taxonomy = directory / "taxonomy.csv"
    taxonomy.write_text(
        "sc_id,sc_name,discipline\n"
        "X,Applied Widgets,Mathematics\n"
        "Y,Particle Gadgets,Physics\n",
        encoding="utf-8",
    )
    return {
        "pubs": str(pubs),
        "orgs": str(orgs),
        "territories": str(territories),
        "taxonomy": str(taxonomy),
    }


@pytest.fixture
def ab_files(tmp_path) -> dict[str, str]:
    return write_ab_files(tmp_path / "ab")


def corpus_args(files: dict[str, str]) -> list[str]:
    return [
        "--pubs", files["pubs"],
        "--orgs", files["orgs"],
        "--territories", files["territories"],
        "--taxonomy", files["taxonomy"],
        "--census-date", "2011-12-31",
    ]
