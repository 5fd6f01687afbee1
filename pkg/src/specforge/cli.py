"""Command-line entry point.

Subcommands are composable stages over the documented CSV interchange
formats: ``synth`` writes corpus input files, ``compute`` writes
strength/counts/specialization exports, and ``rank``/``extremes``/
``radar``/``map`` can either recompute from the corpus or read a compute
directory via ``--from``.  ``all`` runs the whole pipeline and writes a
manifest.

Exit codes: 0 success, 1 validation/computation failure, 2 usage error.
Failures print a single JSON object to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .analytics import (
    extreme_ratios_by_sc,
    extreme_ratios_by_territory,
    profiles_from_counts,
    top_scs_per_territory,
    top_territories_per_sc,
)
from .config import (
    LEVELS,
    PROVINCE,
    REGION,
    RunConfig,
    config_from_mapping,
    read_config_mapping,
    resolve_workers,
)
from .corpus import load_corpus, load_territories, validate_corpus
from .errors import ConfigError, ParseError, SpecforgeError
from .pipeline import (
    default_map_scs,
    default_radar_scs,
    radar_spec_for,
    run_all,
    run_pipeline,
    write_interchange,
)
from .report import RadarSeries, RadarSpec, emit_table, export_map_data, render_radar
from .specialization import read_specialization_csv
from .strength import read_counts_csv, read_strength_csv
from .synth import CitationModel, PlantedPair, SynthSpec, generate, write_corpus_files


class UsageError(SpecforgeError):
    code = "cli.UsageError"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


_OVERRIDE_FLAGS = {
    "pubs": "pubs_path",
    "orgs": "orgs_path",
    "territories": "territories_path",
    "taxonomy": "taxonomy_path",
    "out": "out_dir",
    "aii_mode": "aii_mode",
    "ai_basis": "ai_basis",
    "doc_types": "doc_types",
    "threshold_region": "threshold_region",
    "threshold_province": "threshold_province",
    "expected_band": "expected_band",
    "extreme_band": "extreme_band",
    "high_cut": "high_cut",
    "low_cut": "low_cut",
    "top_k": "top_k",
    "decimals": "decimals",
    "seed": "seed",
    "census_date": "census_date",
    "year_start": "year_start",
    "year_end": "year_end",
    "radar_scs": "radar_scs",
    "map_scs": "map_scs",
    "dump_impacts": "dump_impacts",
}


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat TOML config or a previous run_manifest.json")
    p.add_argument("--pubs", help="publications JSON-lines file")
    p.add_argument("--orgs", help="organizations CSV file")
    p.add_argument("--territories", help="territories CSV file")
    p.add_argument("--taxonomy", help="taxonomy CSV file")
    p.add_argument("--level", choices=[PROVINCE, REGION, "both"],
                   help="territorial level(s) to compute (default both)")
    p.add_argument("--aii-mode", dest="aii_mode", choices=["inclusive", "leave_one_out"])
    p.add_argument("--ai-basis", dest="ai_basis", choices=["strength", "pub_count"])
    p.add_argument("--doc-types", dest="doc_types", help="comma-separated doc_type filter")
    p.add_argument("--threshold-region", dest="threshold_region", type=int)
    p.add_argument("--threshold-province", dest="threshold_province", type=int)
    p.add_argument("--expected-band", dest="expected_band", type=float)
    p.add_argument("--extreme-band", dest="extreme_band", type=float)
    p.add_argument("--high-cut", dest="high_cut", type=float)
    p.add_argument("--low-cut", dest="low_cut", type=float)
    p.add_argument("--top-k", dest="top_k", type=int)
    p.add_argument("--decimals", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--census-date", dest="census_date")
    p.add_argument("--year-start", dest="year_start", type=int)
    p.add_argument("--year-end", dest="year_end", type=int)
    p.add_argument("--radar-scs", dest="radar_scs", help="comma-separated category ids")
    p.add_argument("--map-scs", dest="map_scs", help="comma-separated category ids")
    p.add_argument("--dump-impacts", dest="dump_impacts", action="store_const", const=True)
    p.add_argument("--out", help="output directory")


def build_parser() -> _Parser:
    parser = _Parser(prog="specforge", description=__doc__)
    sub = parser.add_subparsers(dest="command")
    for name, handler, extra in (
        ("validate", cmd_validate, None),
        ("compute", cmd_compute, None),
        ("rank", cmd_rank, "from"),
        ("extremes", cmd_extremes, "from"),
        ("radar", cmd_radar, "from"),
        ("map", cmd_map, "from"),
        ("synth", cmd_synth, "synth"),
        ("all", cmd_all, None),
    ):
        p = sub.add_parser(name)
        _add_common_flags(p)
        if extra == "from":
            p.add_argument("--from", dest="from_dir",
                           help="read a compute output directory instead of the corpus")
        if extra == "synth":
            p.add_argument("--n-territories", dest="n_territories", type=int, default=10)
            p.add_argument("--n-scs", dest="n_scs", type=int, default=8)
            p.add_argument("--n-years", dest="n_years", type=int, default=5)
            p.add_argument("--n-pubs", dest="n_pubs", type=int, default=1000)
            p.add_argument("--plant", action="append", default=[],
                           metavar="TERRITORY:SC:BOOST",
                           help="planted specialization, repeatable")
            p.add_argument("--multi-sc-rate", dest="multi_sc_rate", type=float, default=0.15)
            p.add_argument("--multi-org-rate", dest="multi_org_rate", type=float, default=0.2)
            p.add_argument("--mean-low", dest="mean_low", type=float, default=1.0)
            p.add_argument("--mean-high", dest="mean_high", type=float, default=8.0)
            p.add_argument("--dispersion", type=float, default=1.5)
            p.add_argument("--start-year", dest="start_year", type=int, default=2006)
        p.set_defaults(handler=handler)
    return parser


def resolve_config(args) -> RunConfig:
    mapping = read_config_mapping(args.config) if args.config else {}
    overrides = {}
    for flag, field in _OVERRIDE_FLAGS.items():
        value = getattr(args, flag, None)
        if value is not None:
            overrides[field] = value
    level = getattr(args, "level", None)
    if level is not None:
        overrides["levels"] = LEVELS if level == "both" else (level,)
    workers = resolve_workers(getattr(args, "workers", None), mapping.get("workers"))
    merged = {**mapping, **overrides, "workers": workers}
    config = config_from_mapping(merged)
    config.validate()
    return config


def _require_corpus_paths(config: RunConfig) -> None:
    missing = [
        flag
        for flag, value in (
            ("--pubs", config.pubs_path),
            ("--orgs", config.orgs_path),
            ("--territories", config.territories_path),
            ("--taxonomy", config.taxonomy_path),
        )
        if not value
    ]
    if missing:
        raise UsageError(f"missing required input path(s): {', '.join(missing)}")


def _load(config: RunConfig, strict: bool = True):
    _require_corpus_paths(config)
    return load_corpus(
        config.pubs_path,
        config.orgs_path,
        config.territories_path,
        config.taxonomy_path,
        config,
        strict=strict,
    )


def _out_dir(config: RunConfig) -> Path:
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_validate(args, config: RunConfig) -> int:
    corpus = _load(config, strict=False)
    report = validate_corpus(corpus)
    for line in report.lines():
        print(line)
    summary = corpus.load_summary
    if summary is not None:
        print(f"dropped by doc_type filter: {summary.dropped}")
    return 0 if report.ok else 1


def cmd_compute(args, config: RunConfig) -> int:
    corpus = _load(config)
    result = run_pipeline(corpus, config)
    out = _out_dir(config)
    for name in write_interchange(result, config, out):
        print(out / name)
    return 0


def _level_reports(args, config: RunConfig):
    """(level, report, counts_or_None) per configured level, from corpus or --from."""
    from_dir = getattr(args, "from_dir", None)
    out = []
    if from_dir:
        for level in config.levels:
            spec_path = Path(from_dir) / f"specialization_{level}.csv"
            if not spec_path.exists():
                raise ParseError("missing interchange file", path=str(spec_path))
            counts_path = Path(from_dir) / f"counts_{level}.csv"
            counts = read_counts_csv(counts_path) if counts_path.exists() else None
            out.append((level, read_specialization_csv(spec_path), counts))
        return out, None
    corpus = _load(config)
    result = run_pipeline(corpus, config)
    for level in config.levels:
        out.append((level, result.levels[level].report, None))
    return out, result


def cmd_rank(args, config: RunConfig) -> int:
    reports, _ = _level_reports(args, config)
    out = _out_dir(config)
    for level, report, _counts in reports:
        meta = {"level": level, "census_date": report.census_date, "top_k": config.top_k}
        top_style = "table2" if level == REGION else "table4"
        transpose_style = "table3" if level == REGION else "table5"
        path = out / f"top_categories_{level}.csv"
        emit_table(top_scs_per_territory(report, config.top_k), top_style, path,
                   k=config.top_k, decimals=config.decimals, meta=meta)
        print(path)
        path = out / f"top_territories_{level}.csv"
        emit_table(top_territories_per_sc(report, config.top_k), transpose_style, path,
                   k=config.top_k, decimals=config.decimals, meta=meta)
        print(path)
    return 0


def cmd_extremes(args, config: RunConfig) -> int:
    reports, result = _level_reports(args, config)
    out = _out_dir(config)
    for level, report, counts in reports:
        if result is not None:
            profiles = result.levels[level].profiles
        elif counts is not None:
            profiles = profiles_from_counts(counts, config.threshold_for(level))
        else:
            raise ParseError(f"counts_{level}.csv required next to specialization_{level}.csv")
        meta = {
            "level": level,
            "census_date": report.census_date,
            "high_cut": config.high_cut,
            "low_cut": config.low_cut,
        }
        path = out / f"extreme_by_territory_{level}.csv"
        emit_table(
            extreme_ratios_by_territory(report, profiles, config.high_cut, config.low_cut),
            "table6", path, meta=meta,
        )
        print(path)
        path = out / f"extreme_by_category_{level}.csv"
        emit_table(
            extreme_ratios_by_sc(report, profiles, config.high_cut, config.low_cut),
            "table7", path, meta=meta,
        )
        print(path)
    return 0


def cmd_radar(args, config: RunConfig) -> int:
    from_dir = getattr(args, "from_dir", None)
    out = _out_dir(config)
    if from_dir:
        for level in config.levels:
            report = read_specialization_csv(Path(from_dir) / f"specialization_{level}.csv")
            matrix, _meta = read_strength_csv(Path(from_dir) / f"strength_{level}.csv")
            scs = list(config.radar_scs) or _top_scs_by_strength(matrix, 8)
            axes = tuple(matrix.territories())
            series = tuple(
                RadarSeries(sc, tuple(report.cells[(t, sc)].ssi for t in axes))
                for sc in scs
                if all((t, sc) in report.cells for t in axes)
            )
            path = out / f"radar_{level}.svg"
            render_radar(RadarSpec(axes=axes, series=series), path)
            print(path)
        return 0
    corpus = _load(config)
    result = run_pipeline(corpus, config)
    for level in config.levels:
        lr = result.levels[level]
        scs = list(config.radar_scs) or default_radar_scs(lr.matrix, corpus)
        path = out / f"radar_{level}.svg"
        render_radar(radar_spec_for(lr, scs), path)
        print(path)
    return 0


def _top_scs_by_strength(matrix, limit: int) -> list[str]:
    ranked = sorted(matrix.sc_totals.items(), key=lambda kv: (-kv[1], kv[0]))
    return [sc for sc, _ in ranked[:limit]]


def cmd_map(args, config: RunConfig) -> int:
    from_dir = getattr(args, "from_dir", None)
    out = _out_dir(config)
    if from_dir:
        if not config.territories_path:
            raise UsageError("map --from also needs --territories for populations")
        registry = load_territories(config.territories_path)
        for level in config.levels:
            report = read_specialization_csv(Path(from_dir) / f"specialization_{level}.csv")
            matrix, _meta = read_strength_csv(Path(from_dir) / f"strength_{level}.csv")
            for sc in list(config.map_scs) or default_map_scs(matrix):
                path = out / f"{sc}_{level}.csv"
                export_map_data(matrix, report, registry, sc, path)
                print(path)
        return 0
    corpus = _load(config)
    result = run_pipeline(corpus, config)
    for level in config.levels:
        lr = result.levels[level]
        for sc in list(config.map_scs) or default_map_scs(lr.matrix):
            path = out / f"{sc}_{level}.csv"
            export_map_data(lr.matrix, lr.report, corpus.territories, sc, path)
            print(path)
    return 0


def cmd_synth(args, config: RunConfig) -> int:
    plan = []
    for item in args.plant:
        parts = item.split(":")
        if len(parts) != 3:
            raise UsageError(f"--plant expects TERRITORY:SC:BOOST, got {item!r}")
        try:
            boost = float(parts[2])
        except ValueError:
            raise UsageError(f"--plant boost must be a number, got {parts[2]!r}")
        plan.append(PlantedPair(parts[0], parts[1], boost))
    spec = SynthSpec(
        seed=config.seed,
        n_territories=args.n_territories,
        n_scs=args.n_scs,
        n_years=args.n_years,
        n_publications=args.n_pubs,
        specialization_plan=tuple(plan),
        citation_model=CitationModel(args.mean_low, args.mean_high, args.dispersion),
        multi_sc_rate=args.multi_sc_rate,
        multi_org_rate=args.multi_org_rate,
        start_year=args.start_year,
    )
    result = generate(spec)
    paths = write_corpus_files(result, _out_dir(config))
    print(json.dumps(paths, indent=2, sort_keys=True))
    return 0


def cmd_all(args, config: RunConfig) -> int:
    _require_corpus_paths(config)
    manifest = run_all(config)
    print(manifest)
    return 0


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        _emit_error(exc)
        return 2
    if getattr(args, "handler", None) is None:
        parser.print_usage(sys.stderr)
        return 2
    try:
        config = resolve_config(args)
        return args.handler(args, config)
    except SpecforgeError as exc:
        _emit_error(exc)
        return 2 if isinstance(exc, (ParseError, ConfigError, UsageError)) else 1
    except Exception as exc:  # keep the single-JSON-object stderr contract
        _emit_error(exc, code="internal.Error")
        return 1


def _emit_error(exc: BaseException, code: str | None = None) -> None:
    payload = {
        "error": type(exc).__name__,
        "code": code or getattr(exc, "code", "internal.Error"),
        "detail": str(exc),
    }
    print(json.dumps(payload), file=sys.stderr)


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
