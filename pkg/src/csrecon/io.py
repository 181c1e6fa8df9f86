"""CSV/JSON readers and writers for signals, masks, coefficients and reports.

All CSVs use ``.`` as decimal separator, ``,`` as delimiter and newline
terminated rows. Floats are written with 17 significant digits so every file
round-trips bit for bit.
"""

import csv
import json
from pathlib import Path

import numpy as np

from .exceptions import IngestionError
from .numerics import AdamState
from .reconstructor import CoefficientState, LossRecord
from .sampling import MaskMatrix
from .signals import SignalMatrix

__all__ = [
    "read_checkpoint",
    "read_loss_history",
    "read_mask",
    "read_matrix",
    "read_signal",
    "sidecar_path",
    "write_checkpoint",
    "write_loss_history",
    "write_mask",
    "write_matrix",
    "write_signal",
]

FLOAT_FMT = "%.17g"


def sidecar_path(path):
    path = Path(path)
    return path.with_suffix(".json")


def _fmt(v):
    return FLOAT_FMT % v


def _open_for_read(path):
    path = Path(path)
    if not path.is_file():
        raise IngestionError(f"{path}: no such file")
    return path.open(newline="", encoding="utf-8")


def _parse_rows(rows, path, start_line, expect_cols=None):
    out = []
    for i, row in enumerate(rows):
        line = start_line + i
        if not row or all(not c.strip() for c in row):
            continue
        if expect_cols is not None and len(row) != expect_cols:
            raise IngestionError(f"{path}: row {line} has {len(row)} columns, expected {expect_cols}")
        vals = []
        for j, cell in enumerate(row):
            try:
                vals.append(float(cell))
            except ValueError:
                raise IngestionError(
                    f"{path}: row {line}, column {j + 1}: cannot parse {cell!r} as a number"
                ) from None
        out.append(vals)
    if not out:
        raise IngestionError(f"{path}: no data rows")
    if expect_cols is None:
        widths = {len(r) for r in out}
        if len(widths) != 1:
            raise IngestionError(f"{path}: ragged rows with widths {sorted(widths)}")
    return np.array(out, dtype=np.float64)


def _read_json(path, required=True):
    path = Path(path)
    if not path.is_file():
        if required:
            raise IngestionError(f"{path}: missing side-car file")
        return {}
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise IngestionError(f"{path}: invalid JSON ({exc})") from None


def _write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def write_matrix(path, m, header=None):
    m = np.atleast_2d(np.asarray(m, dtype=np.float64))
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if header is not None:
            w.writerow(header)
        for row in m:
            w.writerow([_fmt(v) for v in row])


def read_matrix(path, header=False):
    """Read a numeric CSV. Returns ``data`` or ``(names, data)`` if ``header``."""
    with _open_for_read(path) as fh:
        rows = list(csv.reader(fh))
    if header:
        if not rows:
            raise IngestionError(f"{path}: empty file")
        names = [c.strip() for c in rows[0]]
        return names, _parse_rows(rows[1:], path, 2, expect_cols=len(names))
    return _parse_rows(rows, path, 1)


def write_signal(path, signal):
    """Signal CSV (header = channel names) plus ``{sample_rate, t0}`` side-car."""
    write_matrix(path, signal.data, header=signal.channel_names)
    _write_json(sidecar_path(path), {"sample_rate": signal.sample_rate, "t0": signal.t0})


def read_signal(path, sample_rate=None):
    """Read a signal CSV; ``sample_rate`` overrides or replaces the side-car."""
    names, data = read_matrix(path, header=True)
    meta = _read_json(sidecar_path(path), required=sample_rate is None)
    fs = sample_rate if sample_rate is not None else meta.get("sample_rate")
    if fs is None:
        raise IngestionError(f"{sidecar_path(path)}: sample_rate missing")
    try:
        return SignalMatrix(data, float(fs), tuple(names), float(meta.get("t0", 0.0)))
    except ValueError as exc:
        raise IngestionError(f"{path}: {exc}") from None


def write_mask(path, mask):
    """0/1 integer CSV plus ``{n, k, ratio, seed, shared}`` side-car."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in mask.bits.astype(int):
            w.writerow(row.tolist())
    _write_json(sidecar_path(path), mask.metadata())


def read_mask(path):
    bits = read_matrix(path)
    meta = _read_json(sidecar_path(path), required=False)
    try:
        mask = MaskMatrix(bits, float(meta.get("ratio", 1.0)), meta.get("seed"), bool(meta.get("shared", False)))
    except ValueError as exc:
        raise IngestionError(f"{path}: {exc}") from None
    if meta and (meta.get("n"), meta.get("k")) != (mask.n, mask.k):
        raise IngestionError(f"{path}: side-car dims {meta.get('n')}x{meta.get('k')} != {mask.n}x{mask.k}")
    return mask


def write_loss_history(path, history):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LossRecord.FIELDS)
        for rec in history:
            w.writerow([rec.epoch] + [_fmt(v) for v in rec.as_row()[1:]])


def read_loss_history(path):
    names, data = read_matrix(path, header=True)
    if tuple(names) != LossRecord.FIELDS:
        raise IngestionError(f"{path}: unexpected columns {names}")
    return [LossRecord(int(r[0]), *map(float, r[1:])) for r in data]


_CKPT_FILES = ("x_real", "x_imag")
_MOMENT_FILES = ("adam_real_m", "adam_real_v", "adam_imag_m", "adam_imag_v")


def write_checkpoint(directory, state, header, moments=True):
    """Write ``checkpoint.json`` plus one CSV per coefficient matrix.

    ``header`` should carry at least ``n``, ``k``, ``epoch``,
    ``schedule_position`` and ``seed``; the Adam step count is added.
    """
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    head = dict(header)
    head.update(n=state.shape[0], k=state.shape[1], adam_step=state.adam_real.step, moments=bool(moments))
    _write_json(d / "checkpoint.json", head)
    write_matrix(d / "x_real.csv", state.x_real)
    write_matrix(d / "x_imag.csv", state.x_imag)
    if moments:
        for name, arr in zip(
            _MOMENT_FILES,
            (state.adam_real.m, state.adam_real.v, state.adam_imag.m, state.adam_imag.v),
        ):
            write_matrix(d / f"{name}.csv", arr)


def read_checkpoint(directory):
    """Return ``(state, header)``; moments are zero if they were not saved."""
    d = Path(directory)
    if not d.is_dir():
        raise IngestionError(f"{d}: no such checkpoint directory")
    head = _read_json(d / "checkpoint.json")
    xr = read_matrix(d / "x_real.csv")
    xi = read_matrix(d / "x_imag.csv")
    if xr.shape != xi.shape or xr.shape != (head.get("n"), head.get("k")):
        raise IngestionError(f"{d}: coefficient shapes {xr.shape}/{xi.shape} disagree with header")
    if head.get("moments"):
        rm, rv, im, iv = (read_matrix(d / f"{n}.csv") for n in _MOMENT_FILES)
        step = int(head.get("adam_step", 0))
        state = CoefficientState(xr, xi, AdamState(rm, rv, step), AdamState(im, iv, step))
    else:
        state = CoefficientState(xr, xi)
    return state, head
