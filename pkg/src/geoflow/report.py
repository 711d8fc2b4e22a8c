"""Growth-rate reports, slope fitting and bit-stable CSV/JSON emission."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

CSV_COLUMNS = ("quantity", "horizon", "count_lo", "count_hi", "slope", "slope_lo", "slope_hi",
               "r", "a", "R", "exact_flag")


def _log(x) -> float:
    if isinstance(x, int):
        # exact ints may overflow float conversion
        return math.log(x) if x > 0 else -math.inf
    return math.log(float(x)) if x > 0 else -math.inf


def fit_slope(xs: Sequence, ys: Sequence) -> tuple[float, float]:
    """Least-squares slope of ``ys`` against ``xs`` and the RMS residual."""
    x = np.asarray([float(v) for v in xs])
    y = np.asarray([float(v) for v in ys])
    if len(x) < 2:
        return 0.0, 0.0
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    res = y - A @ coef
    return float(coef[0]), float(np.sqrt(np.mean(res ** 2)))


def fit_loglinear(xs: Sequence, ys: Sequence) -> tuple[float, float, float]:
    """Fit ``y = h x + beta log x + c``; returns ``(h, beta, rms residual)``.

    Separating a polynomial prefactor keeps linear growth from leaking into ``h``.
    """
    x = np.asarray([float(v) for v in xs])
    y = np.asarray([float(v) for v in ys])
    if len(x) < 3 or np.any(x <= 0):
        h, r = fit_slope(xs, ys)
        return h, 0.0, r
    A = np.vstack([x, np.log(x), np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    res = y - A @ coef
    return float(coef[0]), float(coef[1]), float(np.sqrt(np.mean(res ** 2)))


def _fit_linear3(xs, ys) -> tuple[float, float, float]:
    h, res = fit_slope(xs, ys)
    return h, 0.0, res


def step_slopes(xs: Sequence, ys: Sequence) -> tuple[float, float]:
    """Min and max of consecutive difference quotients (liminf/limsup proxies)."""
    d = [(float(ys[i + 1]) - float(ys[i])) / (float(xs[i + 1]) - float(xs[i]))
         for i in range(len(xs) - 1)]
    if not d:
        return 0.0, 0.0
    return min(d), max(d)


def _jsonable(v):
    if isinstance(v, Fraction):
        return float(v) if v.denominator != 1 else int(v)
    if isinstance(v, float) and not math.isfinite(v):
        return None if math.isnan(v) else ("inf" if v > 0 else "-inf")
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return _jsonable(float(v))
    if isinstance(v, float):
        return round(v, 12)
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


@dataclass
class EntropyReport:
    """Counts per horizon, a fitted slope and optional certified brackets."""

    quantity: str
    horizons: list = field(default_factory=list)
    count_lo: list = field(default_factory=list)
    count_hi: list = field(default_factory=list)
    exact: list = field(default_factory=list)
    slope: float = float("nan")
    slope_lo: float = float("nan")
    slope_hi: float = float("nan")
    residual: float = 0.0
    config: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)
    partial: bool = False

    def add(self, horizon, lo, hi=None, exact=True):
        self.horizons.append(horizon)
        self.count_lo.append(lo)
        self.count_hi.append(lo if hi is None else hi)
        self.exact.append(bool(exact))

    def log_counts(self, which: str = "lo") -> list[float]:
        src = self.count_lo if which == "lo" else self.count_hi
        return [_log(c) for c in src]

    def fit(self, model: str = "linear") -> "EntropyReport":
        """Fill ``slope`` (and brackets when the counts differ) from the positive counts."""
        def series(counts):
            pts = [(x, _log(c)) for x, c in zip(self.horizons, counts) if c > 0]
            return [p[0] for p in pts], [p[1] for p in pts]

        (xl, yl), (xh, yh) = series(self.count_lo), series(self.count_hi)
        if not xl and not xh:
            self.slope = self.slope_lo = self.slope_hi = float("nan")
            self.meta["empty"] = True
            return self
        if len(xl) < 2 and len(xh) < 2:
            self.slope = self.slope_lo = self.slope_hi = 0.0
            return self
        fit = fit_loglinear if model == "loglinear" else _fit_linear3
        s_lo, beta, res = fit(xl, yl) if len(xl) >= 2 else fit(xh, yh)
        s_hi, _, _ = fit(xh, yh) if len(xh) >= 2 else (s_lo, 0.0, 0.0)
        if model == "loglinear":
            self.meta["beta"] = beta
        self.meta["fit"] = model
        self.slope_lo, self.slope_hi = min(s_lo, s_hi), max(s_lo, s_hi)
        self.slope = s_lo if self.count_lo == self.count_hi else 0.5 * (s_lo + s_hi)
        self.residual = res
        return self

    def rows(self) -> list[dict]:
        c = self.config
        out = []
        for i, T in enumerate(self.horizons):
            out.append({
                "quantity": self.quantity, "horizon": T,
                "count_lo": self.count_lo[i], "count_hi": self.count_hi[i],
                "slope": self.slope, "slope_lo": self.slope_lo, "slope_hi": self.slope_hi,
                "r": c.get("r"), "a": c.get("a"), "R": c.get("R"),
                "exact_flag": self.exact[i],
            })
        return out

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))

    @classmethod
    def from_dict(cls, data: dict) -> "EntropyReport":
        return cls(**{k: data[k] for k in cls.__dataclass_fields__ if k in data})


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, Fraction):
        v = float(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.12f}"
    return str(v)


def to_csv(reports) -> str:
    if isinstance(reports, EntropyReport):
        reports = [reports]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for rep in reports:
        for row in rep.rows():
            w.writerow([_fmt(row[k]) for k in CSV_COLUMNS])
    return buf.getvalue()


def to_json(reports) -> str:
    if isinstance(reports, EntropyReport):
        payload = reports.to_dict()
    else:
        payload = [r.to_dict() for r in reports]
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def atomic_write(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def emit(reports, path, fmt: str = "csv") -> Path:
    """Write reports as CSV or JSON (sorted keys, 12 decimals, LF endings)."""
    if fmt == "csv":
        text = to_csv(reports)
    elif fmt == "json":
        text = to_json(reports)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return atomic_write(path, text)
