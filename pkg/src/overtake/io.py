"""CSV/JSON artifacts and run manifests.

Floats are written with 17 significant digits so a read-back reproduces
every double exactly.  JSON is emitted with sorted keys and no timestamps,
so identical inputs give byte-identical files.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import platform
import sys
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .asymptotics import LimitPath
from .errors import StructuralError
from .model import FinitePath, ModelSpec, euler_residuals, feasibility_check

__all__ = [
    "PATH_HEADER",
    "LIMIT_HEADER",
    "RATIO_HEADER",
    "fmt",
    "export_path_csv",
    "read_path_csv",
    "export_limit_csv",
    "export_ratio_csv",
    "write_rows",
    "write_json",
    "read_json",
    "sha256_file",
    "write_manifest",
]

PATH_HEADER = ["t", "k", "c", "lambda", "saving_rate", "euler_residual"]
LIMIT_HEADER = ["t", "k_star", "c_star", "lambda_star", "convergence_error"]
RATIO_HEADER = ["T", "numerator", "denominator", "ratio", "tail_infimum"]


def fmt(x) -> str:
    """17 significant digits; empty string for None."""
    if x is None:
        return ""
    return "%.17g" % float(x)


def _open_for_write(destination):
    dest = Path(destination)
    try:
        dest.parent.mkdir(parents=True, exist_ok=True)
        return dest, open(dest, "w", newline="")
    except OSError as exc:
        raise OSError(f"cannot write {dest}: {exc.strerror or exc}") from exc


def write_rows(destination, header, rows) -> Path:
    dest, fh = _open_for_write(destination)
    with fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return dest


def export_path_csv(path: FinitePath, destination, model: ModelSpec) -> Path:
    """One row per period ``0..T`` and a terminal row carrying only ``k[T+1]``.

    ``saving_rate`` is ``k[t+1] / f(k[t])``; ``euler_residual`` is blank at
    ``t = 0`` where it is undefined.
    """
    T = path.T
    y = model.production.value(np.maximum(path.k[: T + 1], 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        sr = np.where(y > 0, path.k[1:] / np.where(y > 0, y, 1.0), np.nan)
    resid = euler_residuals(model, path) if np.all(path.c > 0) else np.full(T, np.nan)
    rows = []
    for t in range(T + 1):
        rows.append(
            [
                str(t),
                fmt(path.k[t]),
                fmt(path.c[t]),
                fmt(path.lam[t]),
                fmt(sr[t]),
                "" if t == 0 else fmt(resid[t - 1]),
            ]
        )
    rows.append([str(T + 1), fmt(path.k[T + 1]), "", "", "", ""])
    return write_rows(destination, PATH_HEADER, rows)


def read_path_csv(source, model: Optional[ModelSpec] = None, k0: Optional[float] = None) -> FinitePath:
    """Parse a file written by :func:`export_path_csv`.

    With ``model`` given the path is re-validated by
    :func:`feasibility_check` (``k0`` defaults to the first capital entry)
    and :class:`StructuralError` is raised if it fails.
    """
    with open(source, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != PATH_HEADER:
            raise StructuralError(f"unexpected header in {source}: {header}")
        rows = list(reader)
    if len(rows) < 2:
        raise StructuralError(f"{source}: need at least two data rows")
    body, last = rows[:-1], rows[-1]
    for i, r in enumerate(body):
        if int(r[0]) != i:
            raise StructuralError(f"{source}: rows out of order at t={r[0]}")
    if int(last[0]) != len(body) or any(last[2:]):
        raise StructuralError(f"{source}: malformed terminal row")
    k = [float(r[1]) for r in body] + [float(last[1])]
    c = [float(r[2]) for r in body]
    lam = [float(r[3]) for r in body]
    path = FinitePath(len(body) - 1, c, k, lam)
    if model is not None:
        verdict = feasibility_check(model, k[0] if k0 is None else k0, path)
        if not verdict:
            v = verdict.first_violation
            raise StructuralError(
                f"{source}: infeasible at t={v.index} ({v.constraint})"
            )
    return path


def export_limit_csv(path: LimitPath, destination) -> Path:
    rows = [
        [str(t), fmt(path.k_star[t]), fmt(path.c_star[t]), fmt(path.lambda_star[t]), fmt(path.convergence_error[t])]
        for t in range(path.t_max + 1)
    ]
    return write_rows(destination, LIMIT_HEADER, rows)


def export_ratio_csv(report, destination) -> Path:
    """Ratio sequence of an :class:`~overtake.overtaking.OvertakingReport`."""
    rows = [[str(T), fmt(n), fmt(d), fmt(r), fmt(m)] for T, n, d, r, m in report.csv_rows()]
    return write_rows(destination, RATIO_HEADER, rows)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        # JSON has no NaN/inf; null keeps files parseable by strict readers
        return x if math.isfinite(x) else None
    return obj


def write_json(obj, destination) -> Path:
    dest, fh = _open_for_write(destination)
    with fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")
    return dest


def read_json(source):
    with open(source) as fh:
        return json.load(fh)


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _package_version():
    try:
        from importlib.metadata import version

        return version("artifact")
    except Exception:  # pragma: no cover - not installed
        return "unknown"


def write_manifest(out_dir, command: str, config: dict, outputs: Iterable, status: str = "ok") -> Path:
    """Record config, versions and output checksums in ``manifest.json``.

    Output paths are stored relative to ``out_dir`` and sorted.
    """
    out_dir = Path(out_dir)
    files = {}
    for p in outputs:
        p = Path(p)
        try:
            key = p.resolve().relative_to(out_dir.resolve()).as_posix()
        except ValueError:
            key = p.as_posix()
        files[key] = sha256_file(p)
    manifest = {
        "command": command,
        "config": config,
        "status": status,
        "versions": {
            "package": _package_version(),
            "python": platform.python_version(),
            "numpy": np.__version__,
            "platform": sys.platform,
        },
        "outputs": dict(sorted(files.items())),
    }
    return write_json(manifest, out_dir / "manifest.json")
