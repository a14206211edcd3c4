"""CSV and JSON artifacts: lossless numeric CSV, run manifests, matrix input."""
from __future__ import annotations

import csv
import json
import math
import os
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .errors import InvalidInputError

SCHEMA_VERSION = 1
OUTPUT_ROOT_ENV = "G2FLOW_OUTPUT_ROOT"
DEFAULT_OUTPUT_ROOT = "g2flow_runs"
MANIFEST_NAME = "manifest.json"


class InputPathError(InvalidInputError):
    """An input path is missing or unreadable."""

    exit_code = 4


class OutputPathError(InvalidInputError):
    exit_code = 5


def output_root() -> Path:
    return Path(os.environ.get(OUTPUT_ROOT_ENV, DEFAULT_OUTPUT_ROOT))


def prepare_output_dir(path: str | os.PathLike | None, default_name: str) -> Path:
    out = Path(path) if path else output_root() / default_name
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputPathError(f"cannot create output directory {out}: {exc}") from exc
    if not os.access(out, os.W_OK):
        raise OutputPathError(f"output directory {out} is not writable")
    return out


def fmt(x) -> str:
    """17 significant digits, enough to round-trip any double."""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_csv(path: str | os.PathLike, header: Iterable[str], rows) -> Path:
    """UTF-8, header row, '.' decimal. ``rows`` is an iterable of sequences."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(header))
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def write_columns(path, columns: Mapping[str, np.ndarray]) -> Path:
    """Write equal-length 1-D arrays as named CSV columns."""
    names = list(columns)
    arrays = [np.asarray(columns[k]) for k in names]
    n = {a.shape[0] for a in arrays}
    if len(n) != 1:
        raise InvalidInputError("CSV columns must have equal length")
    return write_csv(path, names, zip(*arrays))


def read_csv(path) -> tuple[list[str], np.ndarray]:
    path = Path(path)
    try:
        with path.open(encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InputPathError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise InvalidInputError(f"{path} is empty")
    try:
        data = np.array([r for r in rows[1:] if r], dtype=float)
    except ValueError as exc:
        raise InvalidInputError(f"{path}: non-numeric or ragged data ({exc})") from exc
    return rows[0], data


def read_matrix(path) -> np.ndarray:
    """A headerless or headed 7x7 numeric CSV."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputPathError(f"cannot read matrix file {path}: {exc}") from exc
    rows = [r for r in csv.reader(text.splitlines()) if r]
    try:
        m = np.array([[float(v) for v in r] for r in rows])
    except ValueError:
        m = np.array([[float(v) for v in r] for r in rows[1:]])
    if m.shape != (7, 7):
        raise InvalidInputError(f"{path} must hold a 7x7 matrix, got shape {m.shape}")
    return m


def read_curve(path) -> np.ndarray:
    """Curve samples from a CSV with seven numeric columns (an extra leading ``s`` column is dropped)."""
    header, data = read_csv(path)
    if data.ndim != 2 or data.shape[1] not in (7, 8):
        raise InvalidInputError(f"{path}: expected 7 coordinate columns")
    return data[:, -7:]


NLSS_HEADER = ["s", "re1", "im1", "re2", "im2", "re3", "im3"]


def read_nlss(path) -> tuple[np.ndarray, float]:
    """Complex fields (N, 3) and the grid spacing from columns s, re1, im1, re2, im2, re3, im3."""
    _, data = read_csv(path)
    if data.ndim != 2 or data.shape[1] != 7 or data.shape[0] < 2:
        raise InvalidInputError(f"{path}: expected columns {', '.join(NLSS_HEADER)}")
    s = data[:, 0]
    steps = np.diff(s)
    ds = float(steps.mean())
    if not ds > 0 or np.max(np.abs(steps - ds)) > 1e-9 * max(1.0, abs(s[-1])):
        raise InvalidInputError(f"{path}: the s column must be uniformly increasing")
    phi = data[:, 1::2] + 1j * data[:, 2::2]
    return phi, ds


def _jsonable(x):
    if isinstance(x, Mapping):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, Path):
        return str(x)
    return x


def write_manifest(
    out_dir,
    config: Mapping,
    metrics: Mapping,
    thresholds: Mapping,
    status: str,
    wall_time: float,
    version: str,
    error: Mapping | None = None,
    outputs: Iterable[str] = (),
) -> Path:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "version": version,
        "status": status,
        "config": config,
        "thresholds": thresholds,
        "metrics": metrics,
        "outputs": sorted(outputs),
        "error": error,
        "wall_time_s": wall_time,
    }
    path = Path(out_dir) / MANIFEST_NAME
    path.write_text(json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def read_manifest(path) -> dict:
    path = Path(path)
    if path.is_dir():
        path = path / MANIFEST_NAME
    return json.loads(path.read_text(encoding="utf-8"))
