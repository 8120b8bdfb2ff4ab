"""File formats: dataset CSVs, scenario files, LME tables and result documents.

Every JSON document carries ``schema_version``; directories of CSV tables
get a ``manifest.json`` holding the version and the resolved configuration.
Writes are atomic (temporary file, then rename).
"""

import csv
import io as _io
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .dataset import DEFAULT_RT_CUTOFF, preprocess
from .exceptions import InputValidationError, ParseError
from .recovery import Scenario

SCHEMA_VERSION = 1
DATASET_COLUMNS = ("trial", "u", "rt", "choice")


def atomic_write_text(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def write_json(path, doc):
    doc = dict(doc)
    doc.setdefault("schema_version", SCHEMA_VERSION)
    atomic_write_text(path, json.dumps(_jsonable(doc), indent=2) + "\n")


def read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from exc


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return "" if not math.isfinite(x) else repr(float(x))
    return str(x)


def write_table(path, rows, columns=None):
    """Write a list of dicts as CSV with a header row."""
    columns = list(columns or (rows[0].keys() if rows else []))
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r.get(c)) for c in columns])
    atomic_write_text(path, buf.getvalue())


def read_dataset(path, rt_cutoff=DEFAULT_RT_CUTOFF):
    """Read a ``trial,u,rt,choice`` CSV; returns ``(Dataset, report)``."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ParseError(f"{path}: empty file")
        missing = {"u", "rt", "choice"} - {c.strip() for c in reader.fieldnames}
        if missing:
            raise ParseError(f"{path}: missing columns {sorted(missing)}")
        rows = [{k.strip(): v for k, v in row.items() if k is not None} for row in reader]
    return preprocess(rows, rt_cutoff=rt_cutoff)


def write_dataset(path, dataset):
    rows = [
        dict(trial=i + 1, u=int(u), rt=rt, choice=None if not np.isfinite(c) else int(c))
        for i, (u, rt, c) in enumerate(zip(dataset.u, dataset.rt, dataset.choice))
    ]
    write_table(path, rows, DATASET_COLUMNS)


def read_lme_table(path):
    """Read an LME table: header of model labels, one row per subject.

    A leading ``subject`` column is allowed and returned separately.
    Returns ``(labels, subjects, matrix)``.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    has_subject = header[0].lower() == "subject"
    labels = header[1:] if has_subject else header
    subjects, values, bad = [], [], []
    for i, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        cells = row[1:] if has_subject else row
        try:
            vals = [float(c) for c in cells]
        except ValueError:
            bad.append(i)
            continue
        if len(vals) != len(labels) or not all(math.isfinite(v) for v in vals):
            bad.append(i)
            continue
        subjects.append(row[0] if has_subject else str(len(subjects) + 1))
        values.append(vals)
    if bad:
        raise ParseError(f"{path}: malformed rows {bad[:20]}", rows=bad)
    return labels, subjects, np.asarray(values, dtype=float)


def load_scenarios(path):
    """Read a scenario document; returns ``(scenarios, fit_config_overrides)``.

    Accepted shapes: a single scenario object, or
    ``{"scenarios": [...], "fit": {...}}``.
    """
    doc = read_json(path)
    if isinstance(doc, dict) and "scenarios" in doc:
        items, fit_cfg = doc["scenarios"], doc.get("fit", {})
    elif isinstance(doc, dict):
        items, fit_cfg = [doc], {}
    elif isinstance(doc, list):
        items, fit_cfg = doc, {}
    else:
        raise InputValidationError(f"{path}: unrecognised scenario document")
    out = []
    for k, item in enumerate(items):
        item = {key: v for key, v in item.items() if key != "schema_version"}
        item.setdefault("name", f"scenario{k + 1}")
        item.setdefault("fit_configs", [item.get("model")])
        try:
            out.append(Scenario(**item))
        except TypeError as exc:
            raise InputValidationError(f"{path}: scenario {k + 1}: {exc}") from exc
    return out, fit_cfg


def write_scenarios(path, scenarios, fit_config=None):
    write_json(path, {"scenarios": [s.to_dict() for s in scenarios], "fit": fit_config or {}})
