"""Raster serialization: ESRI ASCII grid and delimited x/y/value text.

The ASCII grid header carries a single cellsize, so non-square cells are
rejected for that format; delimited-xyz handles any rectangular grid.
Finite values round-trip bit-exactly (written with repr-precision).
"""

import numpy as np

from .grids import GridSpec, Raster

ESRI_NODATA = -9999.0


def write_esri_ascii(raster, path):
    """Write a square-cell raster as an ESRI ASCII grid."""
    g = raster.grid
    if g.dx != g.dy:
        raise ValueError(
            "esri-ascii-grid requires square cells (one cellsize in the "
            "header); use the delimited-xyz format for this grid"
        )
    vals = raster.values
    with open(path, "w") as fh:
        fh.write(f"ncols {g.nx}\n")
        fh.write(f"nrows {g.ny}\n")
        fh.write(f"xllcorner {g.x0!r}\n")
        fh.write(f"yllcorner {g.y0!r}\n")
        fh.write(f"cellsize {g.dx!r}\n")
        fh.write(f"NODATA_value {ESRI_NODATA!r}\n")
        # ASCII grids list the northernmost row first
        for row in vals[::-1]:
            out = np.where(np.isfinite(row), row, ESRI_NODATA)
            fh.write(" ".join(repr(float(v)) for v in out) + "\n")


def read_esri_ascii(path):
    """Read an ESRI ASCII grid back into a Raster (NODATA becomes NaN)."""
    header = {}
    rows = []
    with open(path) as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            key = parts[0].lower()
            if key in ("ncols", "nrows", "xllcorner", "yllcorner",
                       "cellsize", "nodata_value") and len(parts) == 2:
                header[key] = float(parts[1])
            else:
                rows.append([float(v) for v in parts])
    for req in ("ncols", "nrows", "xllcorner", "yllcorner", "cellsize"):
        if req not in header:
            raise ValueError(f"missing ESRI ASCII header field {req!r}")
    nx, ny = int(header["ncols"]), int(header["nrows"])
    nodata = header.get("nodata_value", ESRI_NODATA)
    values = np.asarray(rows, dtype=np.float64)
    if values.shape != (ny, nx):
        values = values.reshape(ny, nx)
    values = np.where(values == nodata, np.nan, values)[::-1]
    grid = GridSpec(
        (header["xllcorner"], header["yllcorner"]),
        (header["cellsize"], header["cellsize"]),
        (nx, ny),
    )
    return Raster(grid, values)


def write_xyz(raster, path):
    """Write non-masked cells as x,y,value lines plus a grid header comment."""
    g = raster.grid
    centers = g.cell_centers()
    vals = raster.values.ravel()
    with open(path, "w") as fh:
        fh.write(
            f"# grid origin={g.x0!r},{g.y0!r} cell={g.dx!r},{g.dy!r} "
            f"shape={g.nx},{g.ny}\n"
        )
        fh.write("x,y,value\n")
        for (x, y), v in zip(centers, vals):
            if np.isfinite(v):
                fh.write(f"{float(x)!r},{float(y)!r},{float(v)!r}\n")


def read_xyz(path):
    """Read a delimited-xyz raster written by write_xyz."""
    grid = None
    with open(path) as fh:
        first = fh.readline()
        if first.startswith("# grid "):
            fields = dict(
                item.split("=") for item in first[len("# grid "):].split()
            )
            x0, y0 = (float(v) for v in fields["origin"].split(","))
            dx, dy = (float(v) for v in fields["cell"].split(","))
            nx, ny = (int(v) for v in fields["shape"].split(","))
            grid = GridSpec((x0, y0), (dx, dy), (nx, ny))
            fh.readline()  # column header
        data = [line.strip().split(",") for line in fh if line.strip()]
    if grid is None:
        raise ValueError("xyz file lacks the grid header comment")
    values = np.full((grid.ny, grid.nx), np.nan)
    for x, y, v in data:
        col = int(np.floor((float(x) - grid.x0) / grid.dx))
        row = int(np.floor((float(y) - grid.y0) / grid.dy))
        values[row, col] = float(v)
    return Raster(grid, values)


def write_raster(raster, path, fmt="delimited-xyz"):
    if fmt == "esri-ascii-grid":
        write_esri_ascii(raster, path)
    elif fmt == "delimited-xyz":
        write_xyz(raster, path)
    else:
        raise ValueError(f"unknown raster format {fmt!r}")


def read_raster(path, fmt="delimited-xyz"):
    if fmt == "esri-ascii-grid":
        return read_esri_ascii(path)
    if fmt == "delimited-xyz":
        return read_xyz(path)
    raise ValueError(f"unknown raster format {fmt!r}")
