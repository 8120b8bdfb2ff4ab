"""Trial-level behavioural data and the preprocessing rule that builds it."""

from dataclasses import dataclass, field

import numpy as np

from ._validation import check_binary
from .exceptions import InputValidationError, ParseError

DEFAULT_RT_CUTOFF = 0.15


@dataclass
class Dataset:
    """Inputs ``u`` for every trial plus responses, NaN where missing.

    ``valid`` marks trials whose response enters the likelihood; invalid
    trials still feed their input to the perceptual model.
    """

    u: np.ndarray
    rt: np.ndarray
    choice: np.ndarray
    valid: np.ndarray = field(default=None)
    rt_cutoff: float = DEFAULT_RT_CUTOFF

    def __post_init__(self):
        self.u = check_binary(self.u)
        n = len(self.u)
        self.rt = np.asarray(self.rt, dtype=float).reshape(-1)
        self.choice = np.asarray(self.choice, dtype=float).reshape(-1)
        if len(self.rt) != n or len(self.choice) != n:
            raise InputValidationError("u, rt and choice must have equal length")
        if self.valid is None:
            self.valid = validity_mask(self.rt, self.choice, self.rt_cutoff)
        else:
            self.valid = np.asarray(self.valid, dtype=bool)

    def __len__(self):
        return len(self.u)

    @property
    def n_valid(self):
        return int(self.valid.sum())

    @property
    def min_rt(self):
        """Smallest valid response time (seconds)."""
        if self.n_valid == 0:
            raise InputValidationError("dataset has no valid trials")
        return float(self.rt[self.valid].min())

    @classmethod
    def from_arrays(cls, u, y, rt_cutoff=DEFAULT_RT_CUTOFF):
        """Build from an input vector and an ``(n, 2)`` array of [rt, choice]."""
        y = np.asarray(y, dtype=float)
        return cls(u=u, rt=y[:, 0], choice=y[:, 1], rt_cutoff=rt_cutoff)

    def responses(self):
        return np.column_stack([self.rt, self.choice])


def validity_mask(rt, choice, rt_cutoff=DEFAULT_RT_CUTOFF):
    rt = np.asarray(rt, dtype=float)
    choice = np.asarray(choice, dtype=float)
    with np.errstate(invalid="ignore"):
        return np.isfinite(rt) & np.isfinite(choice) & (rt >= rt_cutoff)


def preprocess(rows, rt_cutoff=DEFAULT_RT_CUTOFF):
    """Turn raw rows (mappings with keys ``u``, ``rt``, ``choice``) into a Dataset.

    Empty or ``nan`` cells count as missing responses. Rows with
    non-binary ``u``, negative ``rt`` or unparsable values are collected and
    reported together in a single :class:`ParseError`.

    Returns
    -------
    dataset : Dataset
    report : dict
        Counts of total, valid, missing and anticipated trials.
    """
    u, rt, choice, bad = [], [], [], []
    for i, row in enumerate(rows, start=1):
        try:
            ui = _parse_number(row.get("u"))
            ri = _parse_number(row.get("rt"))
            ci = _parse_number(row.get("choice"))
        except ValueError:
            bad.append(i)
            continue
        if ui not in (0.0, 1.0):
            bad.append(i)
            continue
        if np.isfinite(ri) and ri < 0:
            bad.append(i)
            continue
        if np.isfinite(ci) and ci not in (0.0, 1.0):
            bad.append(i)
            continue
        u.append(ui)
        rt.append(ri)
        choice.append(ci)
    if bad:
        raise ParseError(f"malformed rows: {bad[:20]}", rows=bad)
    if not u:
        raise ParseError("no trials found")
    ds = Dataset(u=np.array(u), rt=np.array(rt), choice=np.array(choice), rt_cutoff=rt_cutoff)
    missing = ~(np.isfinite(ds.rt) & np.isfinite(ds.choice))
    report = {
        "n_trials": len(ds),
        "n_valid": ds.n_valid,
        "n_missing": int(missing.sum()),
        "n_anticipated": int((~missing & ~ds.valid).sum()),
    }
    return ds, report


def _parse_number(cell):
    if cell is None:
        return float("nan")
    if isinstance(cell, (int, float, np.floating, np.integer)):
        return float(cell)
    s = str(cell).strip()
    if s == "" or s.lower() in ("nan", "na", "null", "none"):
        return float("nan")
    return float(s)
