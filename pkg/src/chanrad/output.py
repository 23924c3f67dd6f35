"""CSV/JSON serialization of scan products.

Both formats are bit-specified: UTF-8, LF line endings, '.' decimal
separator, floats at the configured number of significant digits.  Two runs
with the same configuration produce byte-identical files.  CSV carries a
'#'-prefixed metadata preamble with the full configuration; JSON wraps the
same information in a schema-versioned object.
"""
from __future__ import annotations

import json
import os
import tempfile

from .config import RunConfig
from .scans import ScanSeries

SCHEMA = "chanrad/1"

OUT_DIR_ENV = "CHANRAD_OUT_DIR"

_COLUMNS = {
    "energy_table": ["energy_eV", "omega_eV", "n_max", "theta_L_rad", "gamma",
                     "omega1_dipole_eV", "G1", "dipole_over_exp"],
    "theta_scan": ["theta_rad", "theta_over_thetaL", "G_eq7", "G_n0_estimate",
                   "G_sqrt_estimate"],
    "population_grid": ["theta_rad", "theta_over_thetaL", "n", "P"],
    "beam_average": ["energy_eV", "sigma_rad", "estimator", "g_avg",
                     "rel_change_on_doubling", "converged", "nodes"],
    "spectrum": None,        # depends on mode, taken from the payload rows
    "electron_compare": ["shape", "level_count", "mean_spacing_eV",
                         "equidistance_deviation"],
}


def _rows(series: ScanSeries) -> tuple[list[str], list[dict]]:
    if series.kind == "population_grid":
        matrix = series.payload
        theta_L = series.metadata["theta_L_rad"]
        rows = []
        for i, theta in enumerate(series.axis):
            for n in range(matrix.shape[0]):
                rows.append({"theta_rad": theta, "theta_over_thetaL": theta / theta_L,
                             "n": n, "P": float(matrix[n, i])})
        return _COLUMNS["population_grid"], rows
    rows = list(series.payload)
    columns = _COLUMNS.get(series.kind)
    if columns is None:
        columns = list(rows[0].keys()) if rows else []
    return columns, rows


def _fmt(value, precision: int) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.{precision}g}"
    return str(value)


def _rounded(value, precision: int):
    """Float pre-rounded to the configured precision so JSON round-trips exactly."""
    if isinstance(value, float):
        return float(f"{value:.{precision}g}")
    return value


def _config_block(series: ScanSeries, cfg: RunConfig) -> dict:
    return {"kind": series.kind, "cli": cfg.echo(), "scan": series.metadata}


def emit(series: ScanSeries, cfg: RunConfig) -> bytes:
    """Serialize one scan product to CSV or JSON bytes per the configuration."""
    columns, rows = _rows(series)
    block = _config_block(series, cfg)
    if cfg.out_format == "json":
        data = [{c: _rounded(r.get(c), cfg.precision) for c in columns} for r in rows]
        doc = {"schema": SCHEMA, "config": block, "data": data}
        return (json.dumps(doc, separators=(",", ":")) + "\n").encode("utf-8")
    lines = [f"# schema={SCHEMA}",
             f"# kind={series.kind}",
             "# config=" + json.dumps(block, separators=(",", ":")),
             ",".join(columns)]
    for r in rows:
        lines.append(",".join(_fmt(r.get(c), cfg.precision) for c in columns))
    return ("\n".join(lines) + "\n").encode("utf-8")


def resolve_output_path(path: str) -> str:
    """Apply the optional output-directory override to relative paths."""
    out_dir = os.environ.get(OUT_DIR_ENV)
    if out_dir and not os.path.isabs(path):
        return os.path.join(out_dir, path)
    return path


def write_output(data: bytes, path: str | None):
    """Write bytes to a file atomically (temp + rename), or to stdout when path is None/'-'."""
    if path is None or path == "-":
        import sys
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
        return
    path = resolve_output_path(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(prefix=".chanrad-", dir=directory)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
