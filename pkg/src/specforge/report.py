"""Human-facing outputs: table CSVs, radar charts, map-joinable exports.

Every file is a pure function of its inputs (no timestamps, fixed float
formatting), so repeated runs emit identical bytes.  Displayed index
values are rounded half-away-from-zero to the configured number of
decimals; interchange files keep full precision.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from xml.sax.saxutils import escape

from .analytics import ExtremeRatioRow, TerritorySummaryRow, TopKRow
from .corpus import TerritoryRegistry
from .errors import SpecError, StyleMismatchError, UnknownScError
from .specialization import SpecializationReport
from .strength import StrengthMatrix

DEFAULT_PALETTE = (
    "#1f77b4",
    "#d62728",
    "#2ca02c",
    "#9467bd",
    "#ff7f0e",
    "#8c564b",
    "#17becf",
    "#7f7f7f",
)

TABLE_STYLES = ("table1", "table2", "table3", "table4", "table5", "table6", "table7")


def round_half_away(value: float, decimals: int = 1) -> Decimal:
    """Round to ``decimals`` with ties away from zero (table convention)."""
    q = Decimal(1).scaleb(-decimals)
    d = Decimal(repr(value)).quantize(q, rounding=ROUND_HALF_UP)
    if d == 0:
        d = abs(d)
    return d


def fmt(value: float, decimals: int = 1) -> str:
    return str(round_half_away(value, decimals))


@dataclass(frozen=True)
class RadarSeries:
    name: str
    values: tuple


@dataclass(frozen=True)
class RadarSpec:
    axes: tuple
    series: tuple
    reference_level: float = 0.0
    grid_levels: tuple = (-50.0, 50.0, 100.0)
    size: int = 640
    palette: tuple = DEFAULT_PALETTE


def _radial_point(center: float, radius: float, angle: float, value: float) -> tuple[float, float]:
    rho = (value + 100.0) / 200.0 * radius
    return (center + rho * math.cos(angle), center + rho * math.sin(angle))


def render_radar(spec: RadarSpec, out_path: str | Path) -> None:
    """Write a radar chart SVG: one polygon per series, axes at equal
    angles, gridline rings, and a highlighted reference ring."""
    n = len(spec.axes)
    if n < 3:
        raise SpecError(f"radar needs at least 3 axes, got {n}")
    for series in spec.series:
        if len(series.values) != n:
            raise SpecError(
                f"series {series.name!r} has {len(series.values)} values for {n} axes"
            )
        for v in series.values:
            if not (-100.0 <= v <= 100.0):
                raise SpecError(f"series {series.name!r} value {v!r} outside [-100, 100]")

    size = spec.size
    center = size / 2.0
    radius = center - 60.0
    angles = [-math.pi / 2.0 + 2.0 * math.pi * i / n for i in range(n)]

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
    ]
    for level in spec.grid_levels:
        rho = (level + 100.0) / 200.0 * radius
        parts.append(
            f'<circle cx="{center:.2f}" cy="{center:.2f}" r="{rho:.2f}" '
            'fill="none" stroke="#cccccc" stroke-width="1"/>'
        )
    ref_rho = (spec.reference_level + 100.0) / 200.0 * radius
    parts.append(
        f'<circle cx="{center:.2f}" cy="{center:.2f}" r="{ref_rho:.2f}" '
        'fill="none" stroke="#444444" stroke-width="2" stroke-dasharray="4 3"/>'
    )
    for i, axis in enumerate(spec.axes):
        x, y = _radial_point(center, radius, angles[i], 100.0)
        parts.append(
            f'<line x1="{center:.2f}" y1="{center:.2f}" x2="{x:.2f}" y2="{y:.2f}" '
            'stroke="#999999" stroke-width="1"/>'
        )
        lx, ly = _radial_point(center, radius + 24.0, angles[i], 100.0)
        anchor = "middle"
        if lx > center + 1:
            anchor = "start"
        elif lx < center - 1:
            anchor = "end"
        parts.append(
            f'<text x="{lx:.2f}" y="{ly:.2f}" font-size="11" font-family="sans-serif" '
            f'text-anchor="{anchor}">{escape(str(axis))}</text>'
        )
    for idx, series in enumerate(spec.series):
        color = spec.palette[idx % len(spec.palette)]
        points = " ".join(
            f"{x:.2f},{y:.2f}"
            for x, y in (
                _radial_point(center, radius, angles[i], v)
                for i, v in enumerate(series.values)
            )
        )
        parts.append(
            f'<polygon points="{points}" fill="{color}" fill-opacity="0.08" '
            f'stroke="{color}" stroke-width="2"/>'
        )
    for idx, series in enumerate(spec.series):
        color = spec.palette[idx % len(spec.palette)]
        y = 16 + 14 * idx
        parts.append(
            f'<rect x="8" y="{y - 9}" width="10" height="10" fill="{color}"/>'
        )
        parts.append(
            f'<text x="22" y="{y}" font-size="11" font-family="sans-serif">'
            f"{escape(str(series.name))}</text>"
        )
    parts.append("</svg>")
    Path(out_path).write_text("\n".join(parts) + "\n", encoding="utf-8")


def export_map_data(
    matrix: StrengthMatrix,
    report: SpecializationReport,
    registry: TerritoryRegistry,
    sc: str,
    out_path: str | Path,
) -> None:
    """One row per active territory, joinable to boundary data by code."""
    if sc not in matrix.sc_totals:
        raise UnknownScError(f"subject category {sc!r} not present in the matrix")
    lines = [
        f"# level={matrix.level}",
        f"# census_date={report.census_date}",
        f"# sc={sc}",
        "territory_code,ss,ss_per_inhabitant,ssi",
    ]
    for t in matrix.territories():
        population = registry.population_of(t, matrix.level)
        ss = matrix.values.get((t, sc), 0.0)
        per_inhabitant = ss / population if population else 0.0
        cell = report.cells.get((t, sc))
        ssi_s = fmt(cell.ssi, 1) if cell is not None else ""
        lines.append(f"{t},{ss!r},{per_inhabitant!r},{ssi_s}")
    Path(out_path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _topk_table(rows, style: str, k: int, decimals: int) -> list[str]:
    subject_col, entry_col = {
        "table2": ("region", "sc"),
        "table3": ("subject_category", "region"),
        "table4": ("province", "sc"),
        "table5": ("subject_category", "province"),
    }[style]
    header = [subject_col]
    for i in range(1, k + 1):
        header.append(f"{entry_col}_{i}")
        header.append(f"ssi_{i}")
    out = [",".join(header)]
    for row in rows:
        cells = [row.subject]
        for i in range(k):
            if i < len(row.entries):
                entry, value = row.entries[i]
                cells.append(str(entry))
                cells.append(fmt(value, decimals))
            else:
                cells.append("")
                cells.append("")
        out.append(",".join(cells))
    return out


def _extreme_table(rows, style: str) -> list[str]:
    subject_col, count_col = {
        "table6": ("territory", "active_scs"),
        "table7": ("subject_category", "active_territories"),
    }[style]
    header = f"{subject_col},{count_col},highly_specialized,non_specialized,ratio_high,ratio_low"
    out = [header]
    for row in rows:
        out.append(
            f"{row.subject},{row.active_count},{row.highly_specialized_count},"
            f"{row.non_specialized_count},{fmt(row.ratio_high, 2)},{fmt(row.ratio_low, 2)}"
        )
    return out


def _summary_table(rows) -> list[str]:
    out = ["territory,population,organizations,publications,active_scs"]
    for row in rows:
        out.append(
            f"{row.territory_code},{row.population},{row.organizations},"
            f"{row.publications},{row.active_scs}"
        )
    return out


def emit_table(
    result,
    style: str,
    out_path: str | Path,
    k: int = 3,
    decimals: int = 1,
    meta: dict | None = None,
) -> None:
    """Write an analysis result as a CSV shaped like the named table style."""
    if style not in TABLE_STYLES:
        raise StyleMismatchError(f"unknown table style {style!r}")
    rows = list(result)
    if style in ("table2", "table3", "table4", "table5"):
        if not all(isinstance(r, TopKRow) for r in rows):
            raise StyleMismatchError(f"style {style} expects ranked top-k rows")
        body = _topk_table(rows, style, k, decimals)
    elif style in ("table6", "table7"):
        if not all(isinstance(r, ExtremeRatioRow) for r in rows):
            raise StyleMismatchError(f"style {style} expects extreme-ratio rows")
        body = _extreme_table(rows, style)
    else:
        if not all(isinstance(r, TerritorySummaryRow) for r in rows):
            raise StyleMismatchError("style table1 expects territory summary rows")
        body = _summary_table(rows)
    lines = [f"# style={style}"]
    for key in sorted(meta or {}):
        lines.append(f"# {key}={meta[key]}")
    lines.extend(body)
    Path(out_path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def write_manifest(
    out_dir: str | Path,
    config_echo: dict,
    corpus_hash: str,
    outputs: dict[str, str],
    version: str,
) -> Path:
    """run_manifest.json: config echo, input hash, per-output hashes."""
    manifest = {
        "tool": "specforge",
        "version": version,
        "config": config_echo,
        "corpus_hash": corpus_hash,
        "outputs": outputs,
    }
    path = Path(out_dir) / "run_manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
