"""Map grids, rasters, masks and grid-filling drivers.

Rasters are stored as (ny, nx) float arrays with row 0 at the southern edge
(y increases with row index); NaN marks no-data cells. Grid prediction is
embarrassingly parallel over cells: workers fill disjoint slices of the
output arrays, so results are bit-identical for any worker count.
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np

NODATA = np.nan


class GridSpec:
    """Regular rectangular grid: lower-left origin, cell sizes, cell counts."""

    def __init__(self, origin, cell_size, shape):
        self.x0, self.y0 = float(origin[0]), float(origin[1])
        self.dx, self.dy = float(cell_size[0]), float(cell_size[1])
        self.nx, self.ny = int(shape[0]), int(shape[1])
        if self.dx <= 0 or self.dy <= 0:
            raise ValueError("cell sizes must be positive")
        if self.nx < 1 or self.ny < 1:
            raise ValueError("grid must contain at least one cell")

    @property
    def cell_area(self):
        return self.dx * self.dy

    @property
    def n_cells(self):
        return self.nx * self.ny

    def cell_centers(self):
        """All cell centers as an (ny * nx, 2) array, row-major from south."""
        xs = self.x0 + (np.arange(self.nx) + 0.5) * self.dx
        ys = self.y0 + (np.arange(self.ny) + 0.5) * self.dy
        gx, gy = np.meshgrid(xs, ys)
        return np.column_stack([gx.ravel(), gy.ravel()])

    def to_dict(self):
        return {
            "origin": [self.x0, self.y0],
            "cell_size": [self.dx, self.dy],
            "shape": [self.nx, self.ny],
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["origin"], d["cell_size"], d["shape"])

    def __eq__(self, other):
        return isinstance(other, GridSpec) and self.to_dict() == other.to_dict()

    @classmethod
    def auto(cls, coords, cell_size):
        """Bounding box of the points padded by one cell on every side."""
        coords = np.asarray(coords, dtype=np.float64)
        dx, dy = float(cell_size[0]), float(cell_size[1])
        x_lo, y_lo = coords.min(axis=0)
        x_hi, y_hi = coords.max(axis=0)
        nx = int(np.ceil((x_hi - x_lo) / dx)) + 2
        ny = int(np.ceil((y_hi - y_lo) / dy)) + 2
        return cls((x_lo - dx, y_lo - dy), (dx, dy), (nx, ny))


class Raster:
    """GridSpec plus one value per cell; NaN cells are no-data."""

    def __init__(self, grid, values, units=""):
        self.grid = grid
        self.values = np.asarray(values, dtype=np.float64).reshape(grid.ny, grid.nx)
        self.units = units

    @classmethod
    def full(cls, grid, fill=NODATA, units=""):
        return cls(grid, np.full((grid.ny, grid.nx), fill), units)

    @property
    def valid_mask(self):
        return np.isfinite(self.values)


def points_in_polygon(points, vertices):
    """Even-odd rule point-in-polygon test for a simple closed polygon."""
    pts = np.asarray(points, dtype=np.float64)
    vx = np.asarray(vertices, dtype=np.float64)
    if vx.ndim != 2 or vx.shape[0] < 3 or vx.shape[1] != 2:
        raise ValueError("polygon needs at least 3 (x, y) vertices")
    x, y = pts[:, 0], pts[:, 1]
    inside = np.zeros(len(pts), dtype=bool)
    n = len(vx)
    for i in range(n):
        x1, y1 = vx[i]
        x2, y2 = vx[(i + 1) % n]
        crosses = (y1 > y) != (y2 > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            x_at = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
        inside ^= crosses & (x < np.where(crosses, x_at, np.inf))
    return inside


def total_volume(raster):
    """Cell area times the sum of values over non-masked cells."""
    vals = raster.values[raster.valid_mask]
    return raster.grid.cell_area * float(vals.sum())


def fill_grid(grid, predict_fn, n_outputs, mask_polygon=None, workers=1):
    """Evaluate a per-point predictor at every unmasked cell center.

    `predict_fn(point)` must return `n_outputs` floats. Returns a list of
    rasters, one per output, masked cells left as no-data. Each worker owns
    a contiguous block of cells, so output is independent of `workers`.
    """
    centers = grid.cell_centers()
    if mask_polygon is not None:
        active = np.nonzero(points_in_polygon(centers, mask_polygon))[0]
    else:
        active = np.arange(len(centers))
    out = np.full((n_outputs, len(centers)), NODATA)

    def run_block(block):
        for idx in block:
            out[:, idx] = predict_fn(centers[idx])

    if workers <= 1 or len(active) == 0:
        run_block(active)
    else:
        blocks = np.array_split(active, workers)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run_block, blocks))
    return [Raster(grid, out[i]) for i in range(n_outputs)]
