"""Command-line application: config-driven fit/predict/variogram/krige/validate/compare.

All subcommands read one YAML config document; outputs go to --output (or
the config's output directory). Every run writes a manifest with the config
echo, seed, package version and input checksum, so reruns with the same
config and seed reproduce outputs byte-identically.
"""

import hashlib
import json
import sys
from pathlib import Path

import click
import numpy as np
import pandas as pd
import yaml

from . import __version__
from .estimation import EstimationConfig, FittedModel, fit as fit_sli
from .grids import GridSpec, Raster, fill_grid, total_volume
from .kriging import KrigingConfig, ok_predict_point
from .raster_io import write_raster
from .sli import SampleSet, SliModel
from .validation import box_summary, parameter_stability_report, run_loo, run_lpo
from .variogram import (
    VariogramModel,
    empirical_variogram,
    fit_variogram,
)

EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3


class ConfigError(Exception):
    pass


class DataError(Exception):
    pass


def ingest(path, columns, duplicate_policy="average"):
    """Read a delimited text file into a SampleSet.

    `columns` maps the roles x, y, value to header names. Duplicate
    coordinates are merged by averaging (or rejected), with a count
    reported back to the caller via the returned info dict.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"input file not found: {path}")
    try:
        df = pd.read_csv(path)
    except Exception as exc:
        raise DataError(f"cannot parse {path}: {exc}") from exc
    if df.empty:
        raise DataError(f"input file {path} has no data rows")
    for role in ("x", "y", "value"):
        name = columns.get(role)
        if name is None:
            raise ConfigError(f"column mapping missing role {role!r}")
        if name not in df.columns:
            raise DataError(f"missing column {name!r} in {path}")
    sub = df[[columns["x"], columns["y"], columns["value"]]]
    bad = sub.apply(pd.to_numeric, errors="coerce")
    if bad.isna().any().any():
        row = int(bad.isna().any(axis=1).idxmax())
        col = bad.columns[bad.isna().iloc[row].values.argmax()]
        raise DataError(f"non-numeric cell at row {row + 2}, column {col!r}")
    coords = bad[[columns["x"], columns["y"]]].to_numpy(dtype=np.float64)
    values = bad[columns["value"]].to_numpy(dtype=np.float64)

    uniq, inverse, counts = np.unique(
        coords, axis=0, return_inverse=True, return_counts=True
    )
    n_dup = int(np.sum(counts > 1))
    if n_dup and duplicate_policy == "error":
        raise DataError(f"{n_dup} duplicate coordinate groups in {path}")
    if n_dup:
        # averaging preserves first-occurrence order of the unique locations
        order = np.full(len(uniq), len(coords), dtype=np.intp)
        np.minimum.at(order, inverse, np.arange(len(coords)))
        rank = np.argsort(order, kind="stable")
        merged = np.zeros(len(uniq))
        np.add.at(merged, inverse, values)
        merged /= counts
        coords, values = uniq[rank], merged[rank]
    return SampleSet(coords, values), {"duplicate_groups": n_dup}


def _load_config(path):
    try:
        with open(path) as fh:
            cfg = yaml.safe_load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config parse error: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a mapping")
    return cfg


def _require(cfg, section):
    if section not in cfg:
        raise ConfigError(f"config is missing the {section!r} section")
    return cfg[section]


def _samples_from_config(cfg):
    inp = _require(cfg, "input")
    return ingest(
        inp.get("path"),
        inp.get("columns", {"x": "x", "y": "y", "value": "value"}),
        inp.get("duplicate_policy", "average"),
    )


def _grid_from_config(cfg, samples):
    g = _require(cfg, "grid")
    if "origin" in g:
        return GridSpec(g["origin"], g["cell_size"], g["shape"])
    if "auto_cell_size" in g:
        return GridSpec.auto(samples.points, g["auto_cell_size"])
    raise ConfigError("grid section needs origin/cell_size/shape or auto_cell_size")


def _mask_from_config(cfg):
    path = cfg.get("mask")
    if path is None:
        return None
    if not Path(path).exists():
        raise DataError(f"mask polygon file not found: {path}")
    return np.loadtxt(path)


def _sli_params_from_config(cfg, outdir):
    sli = _require(cfg, "sli")
    model_file = sli.get("model_file")
    if model_file is not None:
        mpath = Path(model_file)
        if not mpath.is_absolute() and not mpath.exists():
            mpath = Path(outdir) / model_file
        if not mpath.exists():
            raise DataError(f"model file not found: {model_file}")
        with open(mpath) as fh:
            return FittedModel.from_dict(json.load(fh)).params
    try:
        from .sli import SliParams

        return SliParams(
            sli.get("lambda", 1.0),
            sli["m_x"],
            sli["c1"],
            sli.get("k", 3),
            sli["mu"],
            sli.get("kernel", "spherical"),
        )
    except KeyError as exc:
        raise ConfigError(
            f"sli section needs either model_file or explicit parameters "
            f"(missing {exc})"
        ) from exc


def _variogram_model_from_config(ok_cfg, samples):
    vg = ok_cfg.get("variogram")
    if isinstance(vg, dict):
        return VariogramModel.from_dict(vg)
    # fall back to fitting the best family on the fly
    emp = empirical_variogram(samples, n_bins=ok_cfg.get("n_bins", 25))
    return fit_variogram(emp)[0][0]


def _ok_config(cfg, samples):
    ok = _require(cfg, "ok")
    model = _variogram_model_from_config(ok, samples)
    radius = ok.get("radius")
    if radius is None:
        raise ConfigError("ok section needs a search radius")
    return KrigingConfig(
        model,
        radius,
        ok.get("max_neighbors", 64),
        ok.get("no_neighbor_policy", "nodata"),
    )


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_json(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_manifest(cfg, outdir, seed, workers, extra=None):
    manifest = {
        "config": cfg,
        "seed": seed,
        "workers": workers,
        "version": __version__,
        "inputs": {},
    }
    inp = cfg.get("input", {})
    if inp.get("path") and Path(inp["path"]).exists():
        manifest["inputs"][inp["path"]] = _sha256(inp["path"])
    if extra:
        manifest.update(extra)
    _write_json(manifest, Path(outdir) / "manifest.json")


def _raster_fmt(cfg):
    return cfg.get("raster_format", "delimited-xyz")


@click.group()
def cli():
    """Spatial interpolation pipelines: local-interaction model and kriging."""


_common = [
    click.option("--config", "config_path", required=True,
                 type=click.Path(), help="YAML run configuration"),
    click.option("--output", "output_dir", default=None,
                 type=click.Path(), help="output directory"),
    click.option("--seed", default=0, type=int, show_default=True),
    click.option("--workers", default=1, type=int, show_default=True),
]


def common_options(fn):
    for opt in reversed(_common):
        fn = opt(fn)
    return fn


def _prepare(config_path, output_dir):
    cfg = _load_config(config_path)
    outdir = Path(output_dir or cfg.get("output", "out"))
    outdir.mkdir(parents=True, exist_ok=True)
    return cfg, outdir


@cli.command("fit")
@common_options
def cmd_fit(config_path, output_dir, seed, workers):
    """Estimate model parameters by leave-one-out cross-validation."""
    cfg, outdir = _prepare(config_path, output_dir)
    samples, info = _samples_from_config(cfg)
    sli = cfg.get("sli", {})
    config = EstimationConfig(
        kernels=sli.get("kernels", [sli.get("kernel", "spherical")]),
        k_candidates=sli.get("k_candidates", [sli.get("k", 3)]),
        mu_bounds=sli.get("mu_bounds", (0.5, 5.0)),
        c1_bounds=sli.get("c1_bounds", (np.finfo(float).eps, 1e8)),
        c1_init=sli.get("c1_init", 115.0),
        mu_init=sli.get("mu_init", 1.5),
        cost=sli.get("cost", "mae"),
        multistart=sli.get("multistart", 5),
        mode=sli.get("mode", "fast"),
        seed=seed,
    )
    model = fit_sli(samples, config)
    _write_json(model.to_dict(), outdir / "model.json")
    with open(outdir / "kernel_costs.csv", "w") as fh:
        fh.write("kernel,k,c1,mu,cost\n")
        for entry in model.trace:
            b = entry["best"]
            fh.write(
                f"{entry['kernel']},{entry['k']},{b['c1']!r},{b['mu']!r},"
                f"{b['cost']!r}\n"
            )
    _write_manifest(cfg, outdir, seed, workers, {"ingest": info})
    click.echo(f"fitted model written to {outdir / 'model.json'}")


@cli.command("predict")
@common_options
def cmd_predict(config_path, output_dir, seed, workers):
    """Fill the map grid with predictions, uncertainties and diagnostics."""
    cfg, outdir = _prepare(config_path, output_dir)
    samples, info = _samples_from_config(cfg)
    params = _sli_params_from_config(cfg, outdir)
    grid = _grid_from_config(cfg, samples)
    mask = _mask_from_config(cfg)
    engine = SliModel(samples, params)

    def predict_cell(pt):
        p = engine.predict(pt)
        return (p.value, p.std, float(p.neighbor_count), p.bandwidth)

    values, stds, neighbors, bandwidths = fill_grid(
        grid, predict_cell, 4, mask_polygon=mask, workers=workers
    )
    fmt = _raster_fmt(cfg)
    ext = "asc" if fmt == "esri-ascii-grid" else "xyz"
    for name, raster in [
        ("values", values),
        ("stds", stds),
        ("neighbors", neighbors),
        ("bandwidths", bandwidths),
    ]:
        write_raster(raster, outdir / f"sli_{name}.{ext}", fmt)
    volume = total_volume(values)
    _write_json(
        {"total_volume": volume, "cell_area": grid.cell_area,
         "cells_predicted": int(values.valid_mask.sum())},
        outdir / "volume.json",
    )
    _write_manifest(cfg, outdir, seed, workers, {"ingest": info})
    click.echo(f"total volume {volume!r}")


@cli.command("variogram")
@common_options
def cmd_variogram(config_path, output_dir, seed, workers):
    """Estimate the empirical variogram and rank model fits."""
    cfg, outdir = _prepare(config_path, output_dir)
    samples, info = _samples_from_config(cfg)
    vg = cfg.get("variogram", {})
    emp = empirical_variogram(
        samples, n_bins=vg.get("n_bins", 25), max_lag=vg.get("max_lag")
    )
    with open(outdir / "empirical_variogram.csv", "w") as fh:
        fh.write("lag,gamma,count\n")
        for lag, g, c in zip(emp.lag_centers, emp.gamma, emp.counts):
            fh.write(f"{lag!r},{g!r},{c}\n")
    fits = fit_variogram(
        emp,
        families=vg.get("families",
                        ("spherical", "gaussian", "cubic", "power",
                         "exponential")),
        seed=seed,
    )
    report = [
        {"model": model.to_dict(), "fitting_error": err} for model, err in fits
    ]
    _write_json({"fits": report}, outdir / "variogram_fits.json")
    _write_manifest(cfg, outdir, seed, workers, {"ingest": info})
    click.echo(f"best family: {fits[0][0].family}")


@cli.command("krige")
@common_options
def cmd_krige(config_path, output_dir, seed, workers):
    """Ordinary-kriging prediction over the map grid."""
    cfg, outdir = _prepare(config_path, output_dir)
    samples, info = _samples_from_config(cfg)
    ok = _ok_config(cfg, samples)
    grid = _grid_from_config(cfg, samples)
    mask = _mask_from_config(cfg)
    index = samples.index()

    def predict_cell(pt):
        p = ok_predict_point(pt, samples, index, ok)
        return (p.value, p.std)

    values, stds = fill_grid(grid, predict_cell, 2, mask_polygon=mask,
                             workers=workers)
    fmt = _raster_fmt(cfg)
    ext = "asc" if fmt == "esri-ascii-grid" else "xyz"
    write_raster(values, outdir / f"ok_values.{ext}", fmt)
    write_raster(stds, outdir / f"ok_stds.{ext}", fmt)
    _write_manifest(cfg, outdir, seed, workers, {"ingest": info})
    click.echo(f"kriging rasters written to {outdir}")


@cli.command("validate")
@common_options
def cmd_validate(config_path, output_dir, seed, workers):
    """LOO or leave-P-out cross-validation reports with box summaries."""
    cfg, outdir = _prepare(config_path, output_dir)
    samples, info = _samples_from_config(cfg)
    val = cfg.get("validate", {})
    methods = val.get("methods", ["sli", "ok"])
    scheme = val.get("scheme", "loo")
    result = {"scheme": scheme, "methods": {}}

    ok_config = _ok_config(cfg, samples) if "ok" in methods else None

    if scheme == "loo":
        # explicit parameters required only here; lpo refits per fold
        sli_params = (
            _sli_params_from_config(cfg, outdir) if "sli" in methods else None
        )
        if sli_params is not None:
            rep = run_loo(samples, sli_params, mode=cfg.get("sli", {}).get("mode", "fast"))
            result["methods"]["sli"] = {
                "report": rep.to_dict(),
                "box": box_summary(rep.errors).to_dict(),
            }
        if ok_config is not None:
            rep = run_loo(samples, ok_config)
            result["methods"]["ok"] = {
                "report": rep.to_dict(),
                "box": box_summary(rep.errors).to_dict(),
            }
    elif scheme == "lpo":
        p = val.get("p", 0.9)
        folds = val.get("folds", 10)
        sli_cfg = cfg.get("sli", {})

        def refit(train):
            config = EstimationConfig(
                kernels=[sli_cfg.get("kernel", "spherical")],
                k_candidates=[sli_cfg.get("k", 3)],
                c1_init=sli_cfg.get("c1_init", 115.0),
                mu_init=sli_cfg.get("mu_init", 1.5),
                multistart=sli_cfg.get("multistart", 1),
                mode=sli_cfg.get("mode", "fast"),
                seed=seed,
            )
            return fit_sli(train, config)

        reports, fitted, skipped = run_lpo(
            samples,
            refit if "sli" in methods else None,
            (lambda: ok_config) if "ok" in methods else None,
            p, folds, seed,
        )
        for method in methods:
            per_fold = [r.to_dict() for r in reports[method]]
            maes = [r.mae for r in reports[method]]
            result["methods"][method] = {
                "folds": per_fold,
                "mae_box": box_summary(maes).to_dict() if maes else None,
            }
        if len(fitted) >= 2:
            result["parameter_stability"] = parameter_stability_report(fitted)
        result["skipped_folds"] = skipped
    else:
        raise ConfigError(f"unknown validation scheme {scheme!r}")

    _write_json(result, outdir / "validation.json")
    _write_manifest(cfg, outdir, seed, workers, {"ingest": info})
    click.echo(f"validation report written to {outdir / 'validation.json'}")


@cli.command("compare")
@common_options
def cmd_compare(config_path, output_dir, seed, workers):
    """Side-by-side comparison: difference rasters, band classes, CV table."""
    cfg, outdir = _prepare(config_path, output_dir)
    samples, info = _samples_from_config(cfg)
    params = _sli_params_from_config(cfg, outdir)
    ok = _ok_config(cfg, samples)
    grid = _grid_from_config(cfg, samples)
    mask = _mask_from_config(cfg)
    engine = SliModel(samples, params)
    index = samples.index()

    def predict_cell(pt):
        ps = engine.predict(pt)
        po = ok_predict_point(pt, samples, index, ok)
        return (ps.value, ps.std, po.value, po.std)

    sli_v, sli_s, ok_v, ok_s = fill_grid(
        grid, predict_cell, 4, mask_polygon=mask, workers=workers
    )
    diff_v = Raster(grid, sli_v.values - ok_v.values)
    diff_s = Raster(grid, sli_s.values - ok_s.values)

    edges = cfg.get("compare", {}).get("band_edges", [-1.0, 1.0, 3.5])
    if list(edges) != sorted(edges) or len(edges) != 3:
        raise ConfigError("compare.band_edges must be 3 ascending values")
    d = diff_v.values
    bands = np.full(d.shape, np.nan)
    valid = np.isfinite(d)
    # classes: 0 OK>SLI, 1 OK=SLI, 2 SLI>OK, 3 SLI>>OK
    bands[valid] = np.digitize(d[valid], edges)
    band_raster = Raster(grid, bands)

    fmt = _raster_fmt(cfg)
    ext = "asc" if fmt == "esri-ascii-grid" else "xyz"
    for name, raster in [
        ("diff_values", diff_v),
        ("diff_stds", diff_s),
        ("diff_bands", band_raster),
    ]:
        write_raster(raster, outdir / f"compare_{name}.{ext}", fmt)

    sli_rep = run_loo(samples, params, mode=cfg.get("sli", {}).get("mode", "fast"))
    ok_rep = run_loo(samples, ok)
    with open(outdir / "compare_cv.csv", "w") as fh:
        fh.write("method," + ",".join(sli_rep.FIELDS) + "\n")
        for name, rep in [("sli", sli_rep), ("ok", ok_rep)]:
            fh.write(
                name + ","
                + ",".join(repr(getattr(rep, f)) for f in rep.FIELDS) + "\n"
            )
    _write_manifest(cfg, outdir, seed, workers, {"ingest": info})
    click.echo(f"comparison outputs written to {outdir}")


def main(argv=None):
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        sys.exit(EXIT_CONFIG)
    except click.Abort:
        sys.exit(EXIT_CONFIG)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except DataError as exc:
        click.echo(f"data error: {exc}", err=True)
        sys.exit(EXIT_DATA)
    except (np.linalg.LinAlgError, FloatingPointError, RuntimeError) as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        sys.exit(EXIT_NUMERICAL)
    sys.exit(0)


if __name__ == "__main__":
    main()
