"""End-to-end orchestration shared by the CLI subcommands.

Splits the run into level-independent stages (strata, impacts) and
per-level stages (strength, specialization, profiles), then fans out to
the table/chart/map emitters.  Output paths are relative to the run's
output directory and recorded with content hashes in the manifest.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .analytics import (
    activity_profiles,
    extreme_ratios_by_sc,
    extreme_ratios_by_territory,
    territory_summary,
    top_scs_per_territory,
    top_territories_per_sc,
)
from .config import REGION, RunConfig
from .corpus import Corpus, load_corpus
from .errors import EmptyCorpusError
from .normalize import StratumTable, build_strata, compute_impacts_from_strata
from .report import (
    RadarSeries,
    RadarSpec,
    emit_table,
    export_map_data,
    render_radar,
    sha256_file,
    write_manifest,
)
from .specialization import SpecializationReport, build_report, write_specialization_csv
from .strength import StrengthMatrix, build_strength, write_counts_csv, write_strength_csv

log = logging.getLogger("specforge.pipeline")


@dataclass(frozen=True)
class LevelResult:
    level: str
    matrix: StrengthMatrix
    report: SpecializationReport
    profiles: dict


@dataclass(frozen=True)
class PipelineResult:
    corpus: Corpus
    strata: StratumTable
    impacts: dict
    levels: dict


def run_pipeline(corpus: Corpus, config: RunConfig) -> PipelineResult:
    """Compute strata, impacts, and per-level matrices/reports/profiles."""
    if not corpus.publications:
        raise EmptyCorpusError("corpus has no publications")
    strata = build_strata(corpus)
    impacts = compute_impacts_from_strata(corpus, strata, config.aii_mode, config.workers)
    levels = {}
    for level in config.levels:
        matrix = build_strength(corpus, impacts, level)
        report = build_report(matrix, config)
        profiles = activity_profiles(corpus, level, config.threshold_for(level))
        levels[level] = LevelResult(level, matrix, report, profiles)
    return PipelineResult(corpus, strata, impacts, levels)


def default_map_scs(matrix: StrengthMatrix) -> list[str]:
    """Strongest national category: deterministic Figure-2-style default."""
    ranked = sorted(matrix.sc_totals.items(), key=lambda kv: (-kv[1], kv[0]))
    return [ranked[0][0]] if ranked else []


def default_radar_scs(matrix: StrengthMatrix, corpus: Corpus) -> list[str]:
    """One category per discipline (its nationally strongest), at most eight."""
    best: dict[str, tuple[float, str]] = {}
    taxonomy = corpus.taxonomy
    for sc, total in matrix.sc_totals.items():
        if sc not in taxonomy:
            continue
        discipline = taxonomy.discipline_of(sc)
        candidate = (-total, sc)
        if discipline not in best or candidate < best[discipline]:
            best[discipline] = candidate
    return sorted(sc for _, sc in best.values())


def radar_spec_for(level_result: LevelResult, scs: list[str]) -> RadarSpec:
    axes = tuple(level_result.matrix.territories())
    cells = level_result.report.cells
    series = tuple(
        RadarSeries(name=sc, values=tuple(cells[(t, sc)].ssi for t in axes))
        for sc in scs
        if all((t, sc) in cells for t in axes)
    )
    return RadarSpec(axes=axes, series=series)


def corpus_input_hash(config: RunConfig) -> str:
    h = hashlib.sha256()
    for role, path in (
        ("pubs", config.pubs_path),
        ("orgs", config.orgs_path),
        ("territories", config.territories_path),
        ("taxonomy", config.taxonomy_path),
    ):
        h.update(role.encode())
        h.update(b"\x00")
        h.update(Path(path).read_bytes())
        h.update(b"\x00")
    return h.hexdigest()


def write_impacts_csv(result: PipelineResult, path: Path, aii_mode: str) -> None:
    """Flag-gated diagnostic: one row per (publication, category) fraction."""
    corpus = result.corpus
    lines = [
        f"# census_date={corpus.census_date}",
        f"# aii_mode={aii_mode}",
        "pub_id,year,aii,sc_id,sc_fraction",
    ]
    for pub in sorted(corpus.publications, key=lambda p: p.pub_id):
        record = result.impacts[pub.pub_id]
        for sc in sorted(pub.subject_categories):
            lines.append(f"{pub.pub_id},{pub.year},{record.aii!r},{sc},{record.per_sc_aii[sc]!r}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_interchange(result: PipelineResult, config: RunConfig, out: Path) -> list[str]:
    """compute-stage exports: strength, counts, specialization per level."""
    written = []
    census = result.corpus.census_date
    for level, lr in result.levels.items():
        strength_path = out / f"strength_{level}.csv"
        write_strength_csv(lr.matrix, strength_path, census, config.aii_mode)
        counts_path = out / f"counts_{level}.csv"
        write_counts_csv(lr.matrix, counts_path, census)
        spec_path = out / f"specialization_{level}.csv"
        write_specialization_csv(lr.report, spec_path)
        written += [strength_path.name, counts_path.name, spec_path.name]
    if config.dump_impacts:
        impacts_path = out / "impacts.csv"
        write_impacts_csv(result, impacts_path, config.aii_mode)
        written.append(impacts_path.name)
    return written


def write_tables(result: PipelineResult, config: RunConfig, out: Path) -> list[str]:
    tables = out / "tables"
    tables.mkdir(parents=True, exist_ok=True)
    written = []
    for level, lr in result.levels.items():
        census = result.corpus.census_date
        meta = {"level": level, "census_date": census}
        top_style = "table2" if level == REGION else "table4"
        transpose_style = "table3" if level == REGION else "table5"

        path = tables / f"summary_{level}.csv"
        emit_table(
            territory_summary(result.corpus, lr.profiles, level),
            "table1",
            path,
            meta={**meta, "threshold": config.threshold_for(level)},
        )
        written.append(f"tables/{path.name}")

        path = tables / f"top_categories_{level}.csv"
        emit_table(
            top_scs_per_territory(lr.report, config.top_k),
            top_style,
            path,
            k=config.top_k,
            decimals=config.decimals,
            meta={**meta, "top_k": config.top_k},
        )
        written.append(f"tables/{path.name}")

        path = tables / f"top_territories_{level}.csv"
        emit_table(
            top_territories_per_sc(lr.report, config.top_k),
            transpose_style,
            path,
            k=config.top_k,
            decimals=config.decimals,
            meta={**meta, "top_k": config.top_k},
        )
        written.append(f"tables/{path.name}")

        cuts_meta = {**meta, "high_cut": config.high_cut, "low_cut": config.low_cut}
        path = tables / f"extreme_by_territory_{level}.csv"
        emit_table(
            extreme_ratios_by_territory(lr.report, lr.profiles, config.high_cut, config.low_cut),
            "table6",
            path,
            meta=cuts_meta,
        )
        written.append(f"tables/{path.name}")

        path = tables / f"extreme_by_category_{level}.csv"
        emit_table(
            extreme_ratios_by_sc(lr.report, lr.profiles, config.high_cut, config.low_cut),
            "table7",
            path,
            meta=cuts_meta,
        )
        written.append(f"tables/{path.name}")
    return written


def write_charts(result: PipelineResult, config: RunConfig, out: Path) -> list[str]:
    charts = out / "charts"
    charts.mkdir(parents=True, exist_ok=True)
    written = []
    for level, lr in result.levels.items():
        scs = list(config.radar_scs) or default_radar_scs(lr.matrix, result.corpus)
        if len(lr.matrix.territories()) < 3:
            log.warning("radar for level %s skipped: fewer than 3 territories", level)
            continue
        spec = radar_spec_for(lr, scs)
        path = charts / f"radar_{level}.svg"
        render_radar(spec, path)
        written.append(f"charts/{path.name}")
    return written


def write_maps(result: PipelineResult, config: RunConfig, out: Path) -> list[str]:
    maps = out / "maps"
    maps.mkdir(parents=True, exist_ok=True)
    written = []
    registry = result.corpus.territories
    for level, lr in result.levels.items():
        scs = list(config.map_scs) or default_map_scs(lr.matrix)
        for sc in scs:
            path = maps / f"{sc}_{level}.csv"
            export_map_data(lr.matrix, lr.report, registry, sc, path)
            written.append(f"maps/{path.name}")
    return written


def run_all(config: RunConfig) -> Path:
    """Load, compute, and emit the full output directory with manifest."""
    corpus = load_corpus(
        config.pubs_path,
        config.orgs_path,
        config.territories_path,
        config.taxonomy_path,
        config,
    )
    result = run_pipeline(corpus, config)
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[str] = []
    written += write_interchange(result, config, out)
    written += write_tables(result, config, out)
    written += write_charts(result, config, out)
    written += write_maps(result, config, out)
    outputs = {rel: sha256_file(out / rel) for rel in sorted(written)}
    return write_manifest(
        out,
        config.echo(),
        corpus_input_hash(config),
        outputs,
        __version__,
    )
