"""Specialization indicators over a strength matrix.

The core transform maps a share ratio r (territory's within-portfolio
category share over the national category share) to 100*tanh(ln r),
bounded in [-100, 100] and zero when the territory mirrors the national
mix.  The plain ratio (activity index) and its (r-1)/(r+1) variant are
computed alongside, plus qualitative labels from configurable band edges.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

from .config import BASIS_PUB_COUNT, BASIS_STRENGTH, BandConfig, RunConfig
from .errors import DomainError, EmptyMatrixError, UndefinedShareError
from .strength import (
    StrengthMatrix,
    count_share,
    national_count_share,
    national_share,
    strength_share,
)

log = logging.getLogger("specforge.specialization")

HIGHLY_SPECIALIZED = "highly_specialized"
SPECIALIZED = "specialized"
EXPECTED = "expected"
DE_SPECIALIZED = "de_specialized"
STRONGLY_DE_SPECIALIZED = "strongly_de_specialized"
INACTIVE = "inactive"

LABELS = (
    HIGHLY_SPECIALIZED,
    SPECIALIZED,
    EXPECTED,
    DE_SPECIALIZED,
    STRONGLY_DE_SPECIALIZED,
    INACTIVE,
)


def ssi_from_ratio(r: float) -> float:
    """100*tanh(ln r); the r=0 limit is -100 exactly."""
    if r < 0.0 or math.isnan(r):
        raise DomainError(f"share ratio must be non-negative, got {r!r}")
    if r == 0.0:
        return -100.0
    return 100.0 * math.tanh(math.log(r))


def share_ratio(matrix: StrengthMatrix, territory: str, sc: str, basis: str = BASIS_STRENGTH) -> float:
    """r = (territory share of sc) / (national share of sc) on the chosen basis."""
    if basis == BASIS_STRENGTH:
        if matrix.sc_totals.get(sc, 0.0) <= 0.0:
            raise UndefinedShareError(f"subject category {sc!r} has zero national strength")
        share = strength_share(matrix, territory, sc)
        nat = national_share(matrix, sc)
        return _limit_ratio(share, nat)
    if basis == BASIS_PUB_COUNT:
        nat = national_count_share(matrix, sc)
        if nat <= 0.0:
            raise UndefinedShareError(f"subject category {sc!r} has zero national count")
        return count_share(matrix, territory, sc) / nat
    raise ValueError(f"unknown basis {basis!r}")


def _limit_ratio(share: float, nat: float) -> float:
    """share / nat with the underflow limits pinned: a zero share is ratio 0
    even if nat underflowed, and a positive share over an underflowed-to-zero
    positive national share is +inf (saturating the index at +100)."""
    if share == 0.0:
        return 0.0
    if nat == 0.0:
        return math.inf
    return share / nat


def ssi(matrix: StrengthMatrix, territory: str, sc: str) -> float:
    """Specialization index of one (territory, subject category) pair."""
    return ssi_from_ratio(share_ratio(matrix, territory, sc, BASIS_STRENGTH))


def activity_index(
    matrix: StrengthMatrix, territory: str, sc: str, basis: str = BASIS_STRENGTH
) -> float:
    """The raw share ratio; strength basis weights publications by impact,
    pub_count basis is the classical count-based form."""
    return share_ratio(matrix, territory, sc, basis)


def rsi(ai_value: float) -> float:
    """(ai - 1) / (ai + 1), bounded in [-1, 1]; the +inf limit is 1."""
    if ai_value < 0.0 or math.isnan(ai_value):
        raise DomainError(f"activity index must be non-negative, got {ai_value!r}")
    if math.isinf(ai_value):
        return 1.0
    return (ai_value - 1.0) / (ai_value + 1.0)


def label_of(ssi_value: float, bands: BandConfig | None = None) -> str:
    """Qualitative band for an index value (edges from ``bands``)."""
    bands = bands or BandConfig()
    if math.isnan(ssi_value) or ssi_value < -100.0 or ssi_value > 100.0:
        raise DomainError(f"index value outside [-100, 100]: {ssi_value!r}")
    inner = bands.expected_half_width
    outer = bands.extreme_edge
    if ssi_value > outer:
        return HIGHLY_SPECIALIZED
    if ssi_value > inner:
        return SPECIALIZED
    if ssi_value >= -inner:
        return EXPECTED
    if ssi_value >= -outer:
        return DE_SPECIALIZED
    return STRONGLY_DE_SPECIALIZED


@dataclass(frozen=True, slots=True)
class SpecializationCell:
    territory_code: str
    sc_id: str
    ssi: float
    ai: float
    rsi: float
    label: str


@dataclass(frozen=True)
class SpecializationReport:
    level: str
    cells: dict
    bands: BandConfig
    ai_basis: str
    aii_mode: str
    census_date: str

    def territories(self) -> list[str]:
        return sorted({t for (t, _) in self.cells})

    def sc_ids(self) -> list[str]:
        return sorted({s for (_, s) in self.cells})


def build_report(matrix: StrengthMatrix, config: RunConfig) -> SpecializationReport:
    """One cell per active-territory x subject-category pair."""
    if matrix.is_empty():
        raise EmptyMatrixError("cannot build a specialization report from an empty matrix")
    bands = config.bands
    basis = config.ai_basis
    territories = matrix.territories()
    if len(territories) == 1:
        log.warning(
            "single active territory %r: national reference is degenerate, all indices are 0",
            territories[0],
        )
    grand = matrix.grand_total
    sc_ids = matrix.sc_ids()
    cells: dict[tuple[str, str], SpecializationCell] = {}
    for t in territories:
        t_total = matrix.territory_totals[t]
        for s in sc_ids:
            share = matrix.values.get((t, s), 0.0) / t_total
            nat = matrix.sc_totals[s] / grand
            r = _limit_ratio(share, nat)
            value = ssi_from_ratio(r)
            if basis == BASIS_STRENGTH:
                ai = r
            else:
                ai = share_ratio(matrix, t, s, BASIS_PUB_COUNT)
            cells[(t, s)] = SpecializationCell(
                territory_code=t,
                sc_id=s,
                ssi=value,
                ai=ai,
                rsi=rsi(ai),
                label=label_of(value, bands),
            )
    return SpecializationReport(
        level=matrix.level,
        cells=cells,
        bands=bands,
        ai_basis=basis,
        aii_mode=config.aii_mode,
        census_date=config.census_date,
    )


def write_specialization_csv(report: SpecializationReport, path) -> None:
    """Interchange export with config header rows; full float precision."""
    lines = [
        f"# level={report.level}",
        f"# census_date={report.census_date}",
        f"# aii_mode={report.aii_mode}",
        f"# ai_basis={report.ai_basis}",
        f"# bands={report.bands.expected_half_width!r},{report.bands.extreme_edge!r}",
        "territory_code,sc_id,ssi,ai,rsi,label",
    ]
    for key in sorted(report.cells):
        c = report.cells[key]
        lines.append(f"{c.territory_code},{c.sc_id},{c.ssi!r},{c.ai!r},{c.rsi!r},{c.label}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_specialization_csv(path) -> SpecializationReport:
    meta: dict[str, str] = {}
    cells: dict[tuple[str, str], SpecializationCell] = {}
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
            t, s, ssi_s, ai_s, rsi_s, lbl = line.split(",")
            cells[(t, s)] = SpecializationCell(t, s, float(ssi_s), float(ai_s), float(rsi_s), lbl)
    inner, _, outer = meta.get("bands", "10.0,50.0").partition(",")
    return SpecializationReport(
        level=meta.get("level", "province"),
        cells=cells,
        bands=BandConfig(float(inner), float(outer)),
        ai_basis=meta.get("ai_basis", BASIS_STRENGTH),
        aii_mode=meta.get("aii_mode", "inclusive"),
        census_date=meta.get("census_date", "unspecified"),
    )
