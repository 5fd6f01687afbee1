import math
import xml.etree.ElementTree as ET

import pytest
from hypothesis import given
from hypothesis import strategies as st

from specforge.analytics import (
    ExtremeRatioRow,
    TerritorySummaryRow,
    TopKRow,
    activity_profiles,
    territory_summary,
)
from specforge.errors import SpecError, StyleMismatchError, UnknownScError
from specforge.normalize import compute_all_impacts
from specforge.report import (
    RadarSeries,
    RadarSpec,
    emit_table,
    export_map_data,
    fmt,
    render_radar,
    round_half_away,
    write_manifest,
)
from specforge.specialization import build_report
from specforge.strength import build_strength


SVG_NS = "{http://www.w3.org/2000/svg}"


def polygons(path):
    tree = ET.parse(path)
    return tree.getroot().findall(f".//{SVG_NS}polygon")


# rounding -------------------------------------------------------------------


def test_rounding_half_away_from_zero():
    assert fmt(99.97) == "100.0"
    assert fmt(43.82022) == "43.8"
    assert fmt(-72.41379) == "-72.4"
    assert fmt(0.05) == "0.1"
    assert fmt(-0.05) == "-0.1"
    assert fmt(2.25, 1) == "2.3"
    assert fmt(-2.25, 1) == "-2.3"
    assert fmt(8 / 17, 2) == "0.47"
    assert fmt(1.0, 2) == "1.00"
    assert fmt(-0.04) == "0.0"  # negative zero normalized


@given(st.floats(min_value=-100, max_value=100, allow_nan=False))
def test_rounding_stays_within_half_ulp(value):
    rounded = float(round_half_away(value, 1))
    assert abs(rounded - value) <= 0.05 + 1e-12


# radar ----------------------------------------------------------------------


def radar_fixture(n_axes=20, n_series=8):
    axes = tuple(f"T{i:02d}" for i in range(n_axes))
    series = tuple(
        RadarSeries(
            name=f"S{j}",
            values=tuple(100.0 * math.sin(0.3 * j + 0.5 * i) for i in range(n_axes)),
        )
        for j in range(n_series)
    )
    return RadarSpec(axes=axes, series=series)


def test_radar_wellformed_with_polygon_count(tmp_path):
    path = tmp_path / "radar.svg"
    render_radar(radar_fixture(), path)
    assert len(polygons(path)) == 8


def test_radar_zero_series_sits_on_reference_ring(tmp_path):
    spec = RadarSpec(
        axes=tuple(f"A{i}" for i in range(20)),
        series=(RadarSeries("zero", tuple(0.0 for _ in range(20))),),
    )
    path = tmp_path / "ring.svg"
    render_radar(spec, path)
    poly = polygons(path)[0]
    center = spec.size / 2.0
    radius = center - 60.0
    expected = (0.0 + 100.0) / 200.0 * radius
    for pair in poly.get("points").split():
        x, y = map(float, pair.split(","))
        assert math.hypot(x - center, y - center) == pytest.approx(expected, abs=0.02)


def test_radar_needs_three_axes():
    spec = RadarSpec(axes=("X", "Y"), series=(RadarSeries("s", (1.0, 2.0)),))
    with pytest.raises(SpecError):
        render_radar(spec, "/tmp/never.svg")


def test_radar_length_mismatch():
    spec = RadarSpec(axes=("X", "Y", "Z"), series=(RadarSeries("s", (1.0, 2.0)),))
    with pytest.raises(SpecError):
        render_radar(spec, "/tmp/never.svg")


def test_radar_out_of_range_value():
    spec = RadarSpec(axes=("X", "Y", "Z"), series=(RadarSeries("s", (1.0, 2.0, 101.0)),))
    with pytest.raises(SpecError):
        render_radar(spec, "/tmp/never.svg")


def test_radar_deterministic_bytes(tmp_path):
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    render_radar(radar_fixture(), a)
    render_radar(radar_fixture(), b)
    assert a.read_bytes() == b.read_bytes()


# map export -------------------------------------------------------------------


def test_map_export_ab(tmp_path, ab_corpus, base_config):
    impacts = compute_all_impacts(ab_corpus)
    matrix = build_strength(ab_corpus, impacts, "province")
    report = build_report(matrix, base_config)
    path = tmp_path / "map.csv"
    export_map_data(matrix, report, ab_corpus.territories, "X", path)
    lines = [l for l in path.read_text().splitlines() if not l.startswith("# ")]
    assert lines[0] == "territory_code,ss,ss_per_inhabitant,ssi"
    assert len(lines) == 3  # header + 2 active territories
    row_a = lines[1].split(",")
    assert row_a[0] == "A"
    assert float(row_a[1]) == 8.0
    assert float(row_a[2]) == pytest.approx(8e-06)
    assert row_a[3] == "43.8"


def test_map_unknown_sc(tmp_path, ab_corpus, base_config):
    impacts = compute_all_impacts(ab_corpus)
    matrix = build_strength(ab_corpus, impacts, "province")
    report = build_report(matrix, base_config)
    with pytest.raises(UnknownScError):
        export_map_data(matrix, report, ab_corpus.territories, "nope", tmp_path / "x.csv")


# tables -------------------------------------------------------------------------


def test_table2_columns(tmp_path):
    rows = [
        TopKRow("R1", (("X", 43.82022), ("Y", -72.41379))),
        TopKRow("R2", (("Y", 43.82022), ("X", -72.41379))),
    ]
    path = tmp_path / "t2.csv"
    emit_table(rows, "table2", path, k=3, meta={"level": "region"})
    lines = path.read_text().splitlines()
    assert lines[0] == "# style=table2"
    assert lines[1] == "# level=region"
    assert lines[2] == "region,sc_1,ssi_1,sc_2,ssi_2,sc_3,ssi_3"
    assert lines[3] == "R1,X,43.8,Y,-72.4,,"


def test_table_rounding_to_displayed_hundred(tmp_path):
    rows = [TopKRow("R1", (("X", 99.97),))]
    path = tmp_path / "t.csv"
    emit_table(rows, "table2", path, k=1)
    assert path.read_text().splitlines()[-1] == "R1,X,100.0"


def test_empty_analysis_header_only(tmp_path):
    path = tmp_path / "empty.csv"
    emit_table([], "table2", path, k=3)
    lines = path.read_text().splitlines()
    assert lines[-1] == "region,sc_1,ssi_1,sc_2,ssi_2,sc_3,ssi_3"


def test_table6_and_7_layout(tmp_path):
    rows = [ExtremeRatioRow("T", 17, 8, 6, 8 / 17, 6 / 17)]
    path = tmp_path / "t6.csv"
    emit_table(rows, "table6", path)
    lines = path.read_text().splitlines()
    assert lines[-2] == "territory,active_scs,highly_specialized,non_specialized,ratio_high,ratio_low"
    assert lines[-1] == "T,17,8,6,0.47,0.35"
    path7 = tmp_path / "t7.csv"
    emit_table([ExtremeRatioRow("SCX", 17, 8, 6, 8 / 17, 6 / 17)], "table7", path7)
    assert "subject_category,active_territories," in path7.read_text()


def test_table1_layout(tmp_path, ab_corpus):
    profiles = activity_profiles(ab_corpus, "province", 1)
    rows = territory_summary(ab_corpus, profiles, "province")
    path = tmp_path / "t1.csv"
    emit_table(rows, "table1", path)
    lines = path.read_text().splitlines()
    assert lines[-3] == "territory,population,organizations,publications,active_scs"
    assert lines[-2] == "A,1000000,1,10,2"


def test_style_mismatch(tmp_path):
    rows = [TopKRow("R1", (("X", 1.0),))]
    with pytest.raises(StyleMismatchError):
        emit_table(rows, "table6", tmp_path / "x.csv")
    with pytest.raises(StyleMismatchError):
        emit_table([TerritorySummaryRow("A", 1, 1, 1, 1)], "table3", tmp_path / "y.csv")
    with pytest.raises(StyleMismatchError):
        emit_table(rows, "table99", tmp_path / "z.csv")


def test_manifest_deterministic(tmp_path):
    p1 = write_manifest(tmp_path, {"a": 1}, "deadbeef", {"x.csv": "123"}, "0.1.0")
    first = p1.read_bytes()
    p2 = write_manifest(tmp_path, {"a": 1}, "deadbeef", {"x.csv": "123"}, "0.1.0")
    assert p2.read_bytes() == first
