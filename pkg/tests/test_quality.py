import numpy as np
import pytest

from adastream.errors import ArgumentError, SchemaError
from adastream.ladder import DEFAULT_LADDER, VideoMode
from adastream.quality import (GRID_CSV_HEADER, QualityGrid,
                               SyntheticQualityParams, load_grids,
                               make_synthetic_grid, quality_value,
                               synthetic_quality, write_grids_csv)

# Hand-evaluated surface point, frozen from an independent step-by-step
# calculation: temporal loss 40*(1/30 - 1/166) = 1.0923694779116466,
# bits/pixel 4e6/(30*1920*1080) = 0.06430041152263374, coding loss
# 1.5*log2(0.10/0.0643004)*0.75 = 0.7167376395633731, spatial loss 0.
WORKED_POINT_JOD = 8.190892882524981


def grid_argmax(grid):
    fi, hi = np.unravel_index(np.argmax(grid.q), grid.q.shape)
    return grid.ladder.frame_rates_hz[fi], grid.ladder.heights[hi]


def test_worked_surface_point():
    params = SyntheticQualityParams(bpp_ref=0.10)
    q = synthetic_quality(VideoMode(30, 1080), 4e6, 40.0, params)
    assert q == pytest.approx(WORKED_POINT_JOD, abs=1e-12)


def test_quality_saturates_at_reference_rate():
    # at the reference rate, top resolution, and ample bitrate every loss
    # term vanishes
    assert quality_value(166, 1080, 1e12, 50.0) == pytest.approx(10.0)
    assert quality_value(166, 1080, 1e12, 0.0) == 10.0


def test_zero_velocity_rows_constant_when_bits_ample():
    grid = make_synthetic_grid(1e12, 0.0)
    assert np.all(grid.q.max(axis=0) == grid.q.min(axis=0))


def test_velocity_cap_at_spem_limit():
    q80 = synthetic_quality(VideoMode(60, 720), 4e6, 80.0)
    q200 = synthetic_quality(VideoMode(60, 720), 4e6, 200.0)
    assert q80 == q200


def test_argmax_top_resolution_at_high_bitrate_low_velocity():
    f, h = grid_argmax(make_synthetic_grid(4e6, 5.0))
    assert h == 1080


def test_argmax_below_top_resolution_at_low_bitrate_high_velocity():
    f, h = grid_argmax(make_synthetic_grid(2e6, 60.0))
    assert h < 1080


def test_grid_determinism():
    a = make_synthetic_grid(3e6, 37.5, SyntheticQualityParams(content_detail=0.7))
    b = make_synthetic_grid(3e6, 37.5, SyntheticQualityParams(content_detail=0.7))
    assert np.array_equal(a.q, b.q)


def test_quality_clamped_to_jod_range(rng):
    for _ in range(50):
        params = SyntheticQualityParams(
            alpha_temporal=float(rng.uniform(0, 10)),
            alpha_spatial=float(rng.uniform(0, 10)),
            alpha_coding=float(rng.uniform(0, 10)),
            content_detail=float(rng.uniform(0, 1)))
        grid = make_synthetic_grid(float(rng.uniform(1e5, 1e7)),
                                   float(rng.uniform(0, 150)), params)
        assert grid.q.min() >= 0.0 and grid.q.max() <= 10.0


def test_monotone_in_rate_and_resolution_without_coding_loss(rng):
    for _ in range(20):
        params = SyntheticQualityParams(
            alpha_temporal=float(rng.uniform(0, 5)),
            alpha_spatial=float(rng.uniform(0, 5)),
            content_detail=float(rng.uniform(0, 1)))
        grid = make_synthetic_grid(1e15, float(rng.uniform(0, 100)), params)
        assert np.all(np.diff(grid.q, axis=0) >= 0)  # frame rate up, quality up
        assert np.all(np.diff(grid.q, axis=1) >= 0)  # resolution up, quality up


def test_params_validation():
    with pytest.raises(ArgumentError):
        SyntheticQualityParams(alpha_temporal=-0.1)
    with pytest.raises(ArgumentError):
        SyntheticQualityParams(content_detail=1.5)
    with pytest.raises(ArgumentError):
        SyntheticQualityParams(reference_rate_hz=167)
    with pytest.raises(ArgumentError):
        SyntheticQualityParams(bpp_ref=0.0)


def test_quality_input_validation():
    with pytest.raises(ArgumentError):
        synthetic_quality(VideoMode(60, 720), 4e6, -1.0)
    with pytest.raises(ArgumentError):
        synthetic_quality(VideoMode(60, 720), 0.0, 1.0)


def test_grid_invariants():
    bad = np.full((10, 5), 11.0)
    with pytest.raises(ArgumentError):
        QualityGrid("x", 0.0, 1e6, bad)
    with pytest.raises(ArgumentError):
        QualityGrid("x", -1.0, 1e6, np.full((10, 5), 5.0))
    with pytest.raises(ArgumentError):
        QualityGrid("x", 0.0, 1e6, np.full((9, 5), 5.0))


def test_grid_is_immutable():
    grid = make_synthetic_grid(2e6, 10.0)
    with pytest.raises(ValueError):
        grid.q[0, 0] = 5.0


# ---------------------------------------------------------------------------
# CSV ingestion


def write_rows(path, rows, header=GRID_CSV_HEADER):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(str(v) for v in row) + "\n")


def full_group(clip_id="clipA", velocity=12.0, bitrate=2e6, jod=7.0):
    return [(clip_id, velocity, bitrate, f, h, jod)
            for f in DEFAULT_LADDER.frame_rates_hz
            for h in DEFAULT_LADDER.heights]


def test_load_single_group(tmp_path):
    path = tmp_path / "grids.csv"
    write_rows(path, full_group())
    grids = load_grids(path)
    assert len(grids) == 1
    assert grids[0].clip_id == "clipA"
    assert grids[0].q.shape == (10, 5)
    assert np.all(grids[0].q == 7.0)


def test_load_six_groups(tmp_path):
    rows = []
    for clip in ("clipA", "clipB"):
        for bitrate in (2e6, 3e6, 4e6):
            rows.extend(full_group(clip, 5.0, bitrate))
    path = tmp_path / "grids.csv"
    write_rows(path, rows)
    grids = load_grids(path)
    assert len(grids) == 6
    assert len(rows) == 300


def test_incomplete_group_names_clip_and_cell(tmp_path):
    rows = full_group()[:-1]  # drop (120, 1080)
    path = tmp_path / "grids.csv"
    write_rows(path, rows)
    with pytest.raises(SchemaError, match="incomplete grid") as err:
        load_grids(path)
    assert "clipA" in str(err.value)
    assert "120" in str(err.value) and "1080" in str(err.value)


def test_non_numeric_jod_reports_line(tmp_path):
    rows = full_group()
    rows[3] = rows[3][:-1] + ("oops",)
    path = tmp_path / "grids.csv"
    write_rows(path, rows)
    with pytest.raises(SchemaError, match=":5:"):  # header is line 1
        load_grids(path)


def test_out_of_range_jod_rejected(tmp_path):
    rows = full_group()
    rows[0] = rows[0][:-1] + (10.5,)
    path = tmp_path / "grids.csv"
    write_rows(path, rows)
    with pytest.raises(SchemaError, match="out of range"):
        load_grids(path)


def test_duplicate_cell_rejected(tmp_path):
    rows = full_group() + [("clipA", 12.0, 2e6, 30, 360, 7.0)]
    path = tmp_path / "grids.csv"
    write_rows(path, rows)
    with pytest.raises(SchemaError, match="duplicate"):
        load_grids(path)


def test_bad_header_rejected(tmp_path):
    path = tmp_path / "grids.csv"
    write_rows(path, full_group(), header=("clip", "v", "b", "f", "r", "jod"))
    with pytest.raises(SchemaError, match="header"):
        load_grids(path)


def test_csv_round_trip(tmp_path):
    grids = [make_synthetic_grid(b, v, clip_id=f"clip{i}")
             for i, (b, v) in enumerate([(2e6, 3.0), (4e6, 55.0)])]
    path = tmp_path / "grids.csv"
    write_grids_csv(grids, path)
    loaded = load_grids(path)
    assert len(loaded) == 2
    for orig, back in zip(sorted(grids, key=lambda g: (g.clip_id, g.bitrate_bps)),
                          loaded):
        assert back.clip_id == orig.clip_id
        assert np.array_equal(back.q, orig.q)
