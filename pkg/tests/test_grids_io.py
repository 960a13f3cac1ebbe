import numpy as np
import pytest

from sligeo import GridSpec, Raster, points_in_polygon, read_raster, write_raster
from sligeo.raster_io import read_esri_ascii, read_xyz, write_esri_ascii, write_xyz


def test_grid_cell_centers_arithmetic():
    grid = GridSpec((10.0, 20.0), (2.0, 5.0), (3, 2))
    centers = grid.cell_centers()
    assert centers.shape == (6, 2)
    np.testing.assert_allclose(centers[0], [11.0, 22.5])
    np.testing.assert_allclose(centers[2], [15.0, 22.5])
    np.testing.assert_allclose(centers[3], [11.0, 27.5])
    assert grid.cell_area == 10.0
    assert grid.n_cells == 6


def test_grid_auto_pads_one_cell():
    coords = [[0.0, 0.0], [9.0, 4.0]]
    grid = GridSpec.auto(coords, (1.0, 1.0))
    assert (grid.x0, grid.y0) == (-1.0, -1.0)
    assert (grid.nx, grid.ny) == (11, 6)
    centers = grid.cell_centers()
    assert centers[:, 0].min() < 0.0 < 9.0 < centers[:, 0].max()


def test_grid_roundtrip_and_equality():
    grid = GridSpec((1.0, 2.0), (0.5, 0.25), (4, 8))
    assert GridSpec.from_dict(grid.to_dict()) == grid
    assert grid != GridSpec((1.0, 2.0), (0.5, 0.25), (4, 9))


def test_points_in_polygon_square():
    square = [[0.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0]]
    pts = [[1.0, 1.0], [3.0, 1.0], [-0.5, 1.0], [1.0, 2.5]]
    np.testing.assert_array_equal(
        points_in_polygon(pts, square), [True, False, False, False]
    )


def test_points_in_polygon_concave():
    # L-shape: the notch around (1.5, 1.5) is outside
    poly = [[0, 0], [2, 0], [2, 1], [1, 1], [1, 2], [0, 2]]
    pts = [[0.5, 0.5], [1.5, 0.5], [0.5, 1.5], [1.5, 1.5]]
    np.testing.assert_array_equal(
        points_in_polygon(pts, poly), [True, True, True, False]
    )


def test_polygon_needs_three_vertices():
    with pytest.raises(ValueError):
        points_in_polygon([[0.0, 0.0]], [[0, 0], [1, 1]])


def checker_raster(square=True):
    grid = GridSpec((0.0, 0.0), (1.0, 1.0) if square else (1.0, 2.0), (4, 3))
    rng = np.random.default_rng(0)
    vals = rng.normal(size=(3, 4))
    vals[1, 2] = np.nan
    return Raster(grid, vals)


def test_esri_roundtrip_bit_exact(tmp_path):
    raster = checker_raster()
    path = tmp_path / "out.asc"
    write_esri_ascii(raster, path)
    back = read_esri_ascii(path)
    assert back.grid == raster.grid
    np.testing.assert_array_equal(back.values, raster.values)


def test_esri_nodata_sentinel_on_disk(tmp_path):
    raster = checker_raster()
    path = tmp_path / "out.asc"
    write_esri_ascii(raster, path)
    text = path.read_text()
    assert "-9999.0" in text
    assert "nan" not in text.lower().replace("nodata", "")


def test_esri_north_row_first(tmp_path):
    grid = GridSpec((0.0, 0.0), (1.0, 1.0), (2, 2))
    raster = Raster(grid, [[1.0, 2.0], [3.0, 4.0]])  # row 0 = south
    path = tmp_path / "rows.asc"
    write_esri_ascii(raster, path)
    lines = [ln for ln in path.read_text().splitlines() if ln]
    assert lines[-2].split() == ["3.0", "4.0"]
    assert lines[-1].split() == ["1.0", "2.0"]


def test_esri_rejects_non_square_cells(tmp_path):
    raster = checker_raster(square=False)
    with pytest.raises(ValueError, match="delimited-xyz"):
        write_esri_ascii(raster, tmp_path / "bad.asc")


def test_esri_missing_header_field(tmp_path):
    path = tmp_path / "broken.asc"
    path.write_text("ncols 2\nnrows 1\n1.0 2.0\n")
    with pytest.raises(ValueError, match="header"):
        read_esri_ascii(path)


def test_xyz_roundtrip_bit_exact(tmp_path):
    raster = checker_raster(square=False)
    path = tmp_path / "out.xyz"
    write_xyz(raster, path)
    back = read_xyz(path)
    assert back.grid == raster.grid
    np.testing.assert_array_equal(back.values, raster.values)


def test_xyz_masked_cells_not_written(tmp_path):
    raster = checker_raster()
    path = tmp_path / "out.xyz"
    write_xyz(raster, path)
    data_lines = path.read_text().splitlines()[2:]
    assert len(data_lines) == 11  # 12 cells, one masked


def test_xyz_requires_grid_header(tmp_path):
    path = tmp_path / "plain.xyz"
    path.write_text("x,y,value\n0.5,0.5,1.0\n")
    with pytest.raises(ValueError, match="grid header"):
        read_xyz(path)


def test_dispatch_by_format(tmp_path):
    raster = checker_raster()
    for fmt, name in (("esri-ascii-grid", "a.asc"), ("delimited-xyz", "a.xyz")):
        path = tmp_path / name
        write_raster(raster, path, fmt=fmt)
        back = read_raster(path, fmt=fmt)
        np.testing.assert_array_equal(back.values, raster.values)
    with pytest.raises(ValueError):
        write_raster(raster, tmp_path / "a.bin", fmt="geotiff")
    with pytest.raises(ValueError):
        read_raster(tmp_path / "a.xyz", fmt="geotiff")


def test_raster_valid_mask():
    raster = checker_raster()
    assert raster.valid_mask.sum() == 11
    assert not raster.valid_mask[1, 2]


def test_raster_value_reshape_guard():
    grid = GridSpec((0.0, 0.0), (1.0, 1.0), (2, 2))
    with pytest.raises(ValueError):
        Raster(grid, [1.0, 2.0, 3.0])
