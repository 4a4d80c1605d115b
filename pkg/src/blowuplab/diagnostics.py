"""Growth-law fitting, blow-up time extrapolation and conservation reports."""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field

import numpy as np


class FitRejected(ValueError):
    """A fit was refused; ``reason`` says why."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


def fmt(v: float) -> str:
    # 17 significant digits round-trip any float64
    return f"{float(v):.17g}"


@dataclass
class RunReport:
    """Outcome of a solver run."""

    verdict: str  # completed | blow-up suspected | contact | under-resolved
    reason: str
    t: float
    steps: int
    extras: dict = field(default_factory=dict)


@dataclass
class TimeSeries:
    """Rows of ``(t, values...)`` with strictly increasing ``t``."""

    columns: list[str]
    rows: list[list[float]] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.columns = list(self.columns)
        if not self.columns or self.columns[0] != "t":
            raise ValueError("first column must be 't'")
        if len(set(self.columns)) != len(self.columns):
            raise ValueError("duplicate column names")
        rows, self.rows = self.rows, []
        for r in rows:
            self.append(r)

    def append(self, row) -> None:
        row = [float(v) for v in row]
        if len(row) != len(self.columns):
            raise ValueError(f"row has {len(row)} entries, expected {len(self.columns)}")
        if self.rows and not row[0] > self.rows[-1][0]:
            raise ValueError(f"t must increase strictly: {row[0]!r} after {self.rows[-1][0]!r}")
        self.rows.append(row)

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def t(self) -> np.ndarray:
        return self.column("t")

    def column(self, name: str) -> np.ndarray:
        try:
            j = self.columns.index(name)
        except ValueError:
            raise KeyError(f"no column {name!r}; have {self.columns}") from None
        return np.array([r[j] for r in self.rows], dtype=float)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([fmt(v) for v in r])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, metadata: dict | None = None) -> "TimeSeries":
        lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
        reader = csv.reader(lines)
        header = next(reader)
        rows = [[float(v) for v in r] for r in reader]
        return cls(header, rows, dict(metadata or {}))


class FitKind(str, enum.Enum):
    EXP = "exp"
    DOUBLE_EXP = "double_exp"
    POWER_BLOWUP = "power_blowup"


@dataclass
class GrowthFit:
    kind: FitKind
    params: dict
    residual: float
    window: tuple[float, float]
    samples: int = 0

    def to_text(self) -> str:
        lines = [f"kind = {self.kind.value}"]
        lines += [f"{k} = {fmt(v) if isinstance(v, float) else v}" for k, v in self.params.items()]
        lines += [
            f"residual = {fmt(self.residual)}",
            f"window_start = {fmt(self.window[0])}",
            f"window_end = {fmt(self.window[1])}",
            f"samples = {self.samples}",
        ]
        return "\n".join(lines) + "\n"


def _window(series: TimeSeries, column: str, window, exclude_tail: float):
    t = series.t
    v = series.column(column)
    if exclude_tail:
        keep = len(t) - int(np.floor(exclude_tail * len(t)))
        t, v = t[:keep], v[:keep]
    if window is not None:
        t0, t1 = window
        sel = (t >= t0) & (t <= t1)
        t, v = t[sel], v[sel]
    if t.size < 10:
        raise FitRejected(f"need at least 10 samples in the window, have {t.size}")
    return t, v


def _linear_fit(t, y):
    # fit about the window start so a shift of t moves only the offset
    t0 = t[0]
    s = t - t0
    A = np.column_stack([np.ones_like(s), s])
    (c0, c1), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.sqrt(np.mean((y - c0 - c1 * s) ** 2)))
    return t0, c0, c1, resid


def _check_growing(v, rtol):
    drops = v[:-1] - v[1:]
    if np.any(drops > rtol * np.abs(v[:-1])):
        raise FitRejected("values are not monotone increasing")
    if not v[-1] > v[0]:
        raise FitRejected("values do not grow over the window")


def fit_exponential(series, column, window=None, exclude_tail=0.0) -> GrowthFit:
    """``log v = log c + kappa t``."""
    t, v = _window(series, column, window, exclude_tail)
    if np.any(v <= 0):
        raise FitRejected("values must be positive")
    t0, c0, c1, r = _linear_fit(t, np.log(v))
    return GrowthFit(
        FitKind.EXP, {"kappa": float(c1), "intercept": float(c0 - c1 * t0)}, r, (t[0], t[-1]), t.size
    )


def fit_double_exponential(series, column, window=None, exclude_tail=0.0, monotone_rtol=1e-2) -> GrowthFit:
    """Least squares of ``log log v`` against ``t``: ``v = exp(c exp(kappa t))``.

    Reports ``kappa`` and the intercept ``log c``.  Decreases larger than
    ``monotone_rtol`` (relative) reject the series, so small noise passes.
    """
    t, v = _window(series, column, window, exclude_tail)
    if np.any(v <= 1.0):
        raise FitRejected("values must exceed 1 on the window")
    _check_growing(v, monotone_rtol)
    t0, c0, c1, r = _linear_fit(t, np.log(np.log(v)))
    return GrowthFit(
        FitKind.DOUBLE_EXP,
        {"kappa": float(c1), "intercept": float(c0 - c1 * t0)},
        r,
        (float(t[0]), float(t[-1])),
        t.size,
    )


def estimate_blowup_time(series, column, exponent_hint=None, window=None, exclude_tail=0.05,
                         order: int = 1) -> GrowthFit:
    """Fit ``v^(-1/p)`` by a polynomial in ``t``; its first root past the data is the blow-up time ``T``.

    ``order = 1`` is the straight-line law.  ``order = 2`` adds a quadratic
    term, which absorbs the leading correction to the power law when the
    window reaches back into the pre-asymptotic regime.  Tries ``p = 1, 2``
    unless ``exponent_hint`` is given and keeps the fit with the smaller
    residual relative to the range of ``v^(-1/p)``.  The last
    ``exclude_tail`` fraction of samples is dropped before fitting.  A root
    more than one window length beyond the last sample is not taken as an
    indication of blow-up.
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    t, v = _window(series, column, window, exclude_tail)
    if np.any(v <= 0):
        raise FitRejected("values must be positive")
    ps = (exponent_hint,) if exponent_hint is not None else (1, 2)
    span = t[-1] - t[0]
    best = None
    for p in ps:
        y = v ** (-1.0 / p)
        if order == 1:
            t0, c0, c1, r = _linear_fit(t, y)
            if not c1 < 0:
                continue
            root = -c0 / c1
        else:
            t0 = t[0]
            c = np.polyfit(t - t0, y, 2)
            r = float(np.sqrt(np.mean((y - np.polyval(c, t - t0)) ** 2)))
            roots = np.roots(c)
            roots = roots[np.isreal(roots)].real
            roots = roots[roots > t[-1] - t0]
            if roots.size == 0:
                continue
            root = roots.min()
        if not t[-1] - t0 < root <= t[-1] - t0 + span:
            continue
        score = r / max(np.ptp(y), 1e-300)
        if best is None or score < best[0]:
            best = (score, p, t0 + root, r)
    if best is None:
        raise FitRejected("no blow-up indicated")
    _, p, T, r = best
    return GrowthFit(FitKind.POWER_BLOWUP, {"T": float(T), "p": int(p)}, r, (float(t[0]), float(t[-1])), t.size)


@dataclass
class ConservationReport:
    drift: dict
    window: tuple[float, float]

    def passed(self, tol: float, columns=None) -> bool:
        cols = self.drift if columns is None else columns
        return all(self.drift[c] <= tol for c in cols)

    def to_text(self) -> str:
        lines = [f"window_start = {fmt(self.window[0])}", f"window_end = {fmt(self.window[1])}"]
        lines += [f"drift.{k} = {fmt(v)}" for k, v in self.drift.items()]
        return "\n".join(lines) + "\n"


def conservation_report(series: TimeSeries, columns, window=None) -> ConservationReport:
    """Max relative drift ``|v - v(t0)| / |v(t0)|`` per column."""
    t = series.t
    sel = np.ones(t.size, bool) if window is None else (t >= window[0]) & (t <= window[1])
    if not sel.any():
        raise ValueError("empty window")
    out = {}
    for c in columns:
        v = series.column(c)[sel]
        ref = abs(v[0])
        d = np.max(np.abs(v - v[0]))
        out[c] = float(d / ref) if ref > 0 else float(d)
    return ConservationReport(out, (float(t[sel][0]), float(t[sel][-1])))
