"""Rectangular sets of Beta priors over a time grid, and their posterior sets.

For each component type and grid time the prior set is the rectangle
``[n_lower, n_upper] x [y_lower, y_upper]`` of canonical parameters. Each
member is updated separately; the extreme posterior means are attained at
corners of the rectangle, which corner depending on whether the observed
survival fraction falls inside ``[y_lower, y_upper]`` (no prior-data conflict)
or outside it.
"""

from __future__ import annotations

import csv
import io
import math
from decimal import Decimal
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .beta_binomial import DEFAULT_EPSILON
from .errors import InputError

# Half-width lint: warn when n_upper is outside [n_k / 4, 2 n_k].
HALF_WIDTH_HIGH = 2.0
HALF_WIDTH_LOW = 0.25


@dataclass(frozen=True)
class PriorRectangle:
    n_lower: float
    n_upper: float
    y_lower: float
    y_upper: float

    def __post_init__(self) -> None:
        if not (0 < self.n_lower <= self.n_upper and math.isfinite(self.n_upper)):
            raise InputError(
                f"need 0 < n_lower <= n_upper, got [{self.n_lower}, {self.n_upper}]"
            )
        if not (0 < self.y_lower <= self.y_upper < 1):
            raise InputError(
                f"need 0 < y_lower <= y_upper < 1, got [{self.y_lower}, {self.y_upper}]"
            )

    @property
    def degenerate_n(self) -> bool:
        return self.n_lower == self.n_upper


def expand_grid(start, stop, step) -> tuple[float, ...]:
    """Inclusive ``start, start + step, ... <= stop``.

    Points are ``start + i * step`` in exact decimal arithmetic, so a step of
    0.02 lands on 1.0, 2.0, ... exactly instead of drifting.
    """
    a, b, h = (Decimal(str(v)) for v in (start, stop, step))
    if h <= 0:
        raise InputError(f"grid step must be positive, got {step}")
    if b < a:
        raise InputError(f"grid stop {stop} is before start {start}")
    count = int((b - a) / h) + 1
    return tuple(float(a + i * h) for i in range(count))


def validate_grid(times: Sequence[float]) -> tuple[float, ...]:
    t = tuple(float(x) for x in times)
    if not t:
        raise InputError("time grid is empty")
    if any(not math.isfinite(x) for x in t):
        raise InputError("time grid contains non-finite values")
    for a, b in zip(t, t[1:]):
        if not b > a:
            raise InputError(f"time grid not strictly increasing at {a}, {b}")
    return t


@dataclass(frozen=True)
class PriorSpec:
    """Per-type, per-time prior rectangles on a common grid."""

    times: tuple[float, ...]
    rects: Mapping[str, tuple[PriorRectangle, ...]]
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self) -> None:
        times = validate_grid(self.times)
        object.__setattr__(self, "times", times)
        rects = {lab: tuple(r) for lab, r in sorted(self.rects.items())}
        object.__setattr__(self, "rects", rects)
        lo, hi = self.epsilon, 1.0 - self.epsilon
        slack = 1e-12
        for lab, rs in rects.items():
            if len(rs) != len(times):
                raise InputError(f"type {lab!r}: {len(rs)} rectangles for {len(times)} grid points")
            for t, r in zip(times, rs):
                if r.y_lower < lo - slack or r.y_upper > hi + slack:
                    raise InputError(
                        f"type {lab!r}, t={t}: y bounds [{r.y_lower}, {r.y_upper}] "
                        f"outside [{lo}, {hi}]"
                    )
            for j in range(1, len(rs)):
                for attr in ("y_lower", "y_upper"):
                    if getattr(rs[j], attr) > getattr(rs[j - 1], attr):
                        raise InputError(
                            f"type {lab!r}: {attr} increases from t={times[j - 1]} to t={times[j]}"
                        )

    @property
    def type_labels(self) -> tuple[str, ...]:
        return tuple(self.rects)

    def at(self, label: str, j: int) -> PriorRectangle:
        return self.rects[label][j]


@dataclass(frozen=True)
class TestData:
    """Observed failure times per component type (all units fail)."""

    __test__ = False  # not a pytest class

    failures: Mapping[str, tuple[float, ...]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        clean = {}
        for lab, ts in sorted(self.failures.items()):
            arr = tuple(float(x) for x in ts)
            if any(not math.isfinite(x) or x < 0 for x in arr):
                raise InputError(f"type {lab!r}: failure times must be finite and nonnegative")
            clean[lab] = tuple(sorted(arr))
        object.__setattr__(self, "failures", clean)

    def n(self, label: str) -> int:
        return len(self.failures.get(label, ()))

    def restricted(self, labels: Iterable[str]) -> "TestData":
        return TestData({lab: self.failures.get(lab, ()) for lab in labels})


def survival_counts(data: TestData, grid: Sequence[float]) -> dict[str, np.ndarray]:
    """Number of tested units of each type still working at each grid time."""
    t = np.asarray(grid, dtype=float)
    out = {}
    for lab, ts in data.failures.items():
        obs = np.asarray(ts, dtype=float)
        out[lab] = (obs[None, :] > t[:, None]).sum(axis=1).astype(int) if len(obs) else np.zeros(len(t), int)
    return out


@dataclass(frozen=True)
class PosteriorYBounds:
    y_lower_post: float
    y_upper_post: float
    attained_n_lower: float
    attained_n_upper: float


def posterior_y_bounds(rect: PriorRectangle, n_obs: int, s_obs: int) -> PosteriorYBounds:
    """Extreme posterior means over the prior rectangle.

    The minimum is attained at ``y_lower`` and the maximum at ``y_upper``;
    the strength used is ``n_upper`` unless the data fraction lies beyond
    that bound, in which case the weaker ``n_lower`` lets the data pull
    further.
    """
    if n_obs < 0 or not 0 <= s_obs <= n_obs:
        raise InputError(f"need 0 <= s <= n, got s={s_obs}, n={n_obs}")
    if n_obs == 0:
        return PosteriorYBounds(rect.y_lower, rect.y_upper, rect.n_upper, rect.n_upper)
    frac = s_obs / n_obs
    n_lo = rect.n_upper if frac >= rect.y_lower else rect.n_lower
    n_hi = rect.n_upper if frac <= rect.y_upper else rect.n_lower
    lower = (n_lo * rect.y_lower + s_obs) / (n_lo + n_obs)
    upper = (n_hi * rect.y_upper + s_obs) / (n_hi + n_obs)
    return PosteriorYBounds(lower, upper, n_lo, n_hi)


def detect_conflict(rect: PriorRectangle, n_obs: int, s_obs: int) -> bool:
    if n_obs <= 0:
        raise InputError("prior-data conflict is undefined without observations")
    if not 0 <= s_obs <= n_obs:
        raise InputError(f"need 0 <= s <= n, got s={s_obs}, n={n_obs}")
    frac = s_obs / n_obs
    return frac < rect.y_lower or frac > rect.y_upper


@dataclass(frozen=True)
class ConflictEntry:
    t: float
    conflict: bool
    fraction: float | None
    y_lower: float
    y_upper: float


@dataclass(frozen=True)
class ConflictReport:
    entries: Mapping[str, tuple[ConflictEntry, ...]]

    def flags(self, label: str) -> np.ndarray:
        return np.array([e.conflict for e in self.entries[label]], dtype=bool)

    def ranges(self, label: str) -> list[tuple[float, float]]:
        """Maximal runs of consecutive flagged grid times, as (first, last)."""
        runs: list[tuple[float, float]] = []
        start = prev = None
        for e in self.entries[label]:
            if e.conflict:
                if start is None:
                    start = e.t
                prev = e.t
            elif start is not None:
                runs.append((start, prev))
                start = None
        if start is not None:
            runs.append((start, prev))
        return runs


def conflict_report(spec: PriorSpec, data: TestData) -> ConflictReport:
    counts = survival_counts(data.restricted(spec.type_labels), spec.times)
    entries = {}
    for lab in spec.type_labels:
        n = data.n(lab)
        row = []
        for j, t in enumerate(spec.times):
            r = spec.at(lab, j)
            s = int(counts[lab][j])
            if n == 0:
                row.append(ConflictEntry(t, False, None, r.y_lower, r.y_upper))
            else:
                row.append(ConflictEntry(t, detect_conflict(r, n, s), s / n, r.y_lower, r.y_upper))
        entries[lab] = tuple(row)
    return ConflictReport(entries)


def _on_grid(t: float, grid: Sequence[float]) -> int:
    for j, g in enumerate(grid):
        if math.isclose(t, g, rel_tol=1e-9, abs_tol=1e-12):
            return j
    raise InputError(f"elicited time {t} is not on the time grid")


def _clamp(y: float, eps: float) -> float:
    return min(max(y, eps), 1.0 - eps)


def fill_bounds(
    elicited: Mapping[float, tuple[float | None, float | None]],
    grid: Sequence[float],
    epsilon: float = DEFAULT_EPSILON,
) -> list[tuple[float, float]]:
    """Densify sparsely elicited y bounds with the least committal choice.

    Between elicitations the upper bound is carried forward from the latest
    elicited time and the lower bound carried back from the next one; with
    no elicitation on a side the bound falls back to ``1 - epsilon`` or
    ``epsilon``. Either bound of an elicited pair may be ``None``.
    """
    grid = validate_grid(grid)
    low_at: dict[int, float] = {}
    up_at: dict[int, float] = {}
    for t, (yl, yu) in sorted(elicited.items()):
        j = _on_grid(t, grid)
        if yl is not None:
            low_at[j] = _clamp(float(yl), epsilon)
        if yu is not None:
            up_at[j] = _clamp(float(yu), epsilon)
        if yl is not None and yu is not None and yl > yu:
            raise InputError(f"elicited bounds at t={t}: lower {yl} exceeds upper {yu}")
    for name, pts in (("lower", low_at), ("upper", up_at)):
        vals = [pts[j] for j in sorted(pts)]
        if any(b > a for a, b in zip(vals, vals[1:])):
            raise InputError(f"elicited {name} bounds increase over time")

    out = []
    for j in range(len(grid)):
        prev = [i for i in up_at if i <= j]
        nxt = [i for i in low_at if i >= j]
        yu = up_at[max(prev)] if prev else 1.0 - epsilon
        yl = low_at[min(nxt)] if nxt else epsilon
        if yl > yu:
            raise InputError(f"filled bounds cross at t={grid[j]}: lower {yl} > upper {yu}")
        out.append((yl, yu))
    return out


def weibull_prior_bounds(
    shape: float,
    scale_lower: float,
    scale_upper: float,
    grid: Sequence[float],
    epsilon: float = DEFAULT_EPSILON,
) -> list[tuple[float, float]]:
    """Prior y bounds from two Weibull survival functions sharing a shape."""
    if not (shape > 0 and scale_lower > 0 and scale_upper > 0):
        raise InputError("Weibull shape and scales must be positive")
    if scale_lower > scale_upper:
        raise InputError("scale_lower must not exceed scale_upper")
    t = np.asarray(validate_grid(grid))
    lo = np.exp(-((t / scale_lower) ** shape))
    hi = np.exp(-((t / scale_upper) ** shape))
    return [(_clamp(a, epsilon), _clamp(b, epsilon)) for a, b in zip(lo, hi)]


def lint_prior(spec: PriorSpec, data: TestData) -> list[str]:
    warnings: list[str] = []
    eps = spec.epsilon
    counts = survival_counts(data.restricted(spec.type_labels), spec.times)
    for lab in spec.type_labels:
        rs = spec.rects[lab]
        n_lo = {r.n_lower for r in rs}
        n_hi = {r.n_upper for r in rs}
        if len(n_lo) > 1 or len(n_hi) > 1:
            warnings.append(
                f"{lab}: n bounds vary over time (n_lower in [{min(n_lo)}, {max(n_lo)}], "
                f"n_upper in [{min(n_hi)}, {max(n_hi)}]); posterior y bounds may lose monotonicity"
            )
        nk = data.n(lab)
        if nk > 0:
            for nu in sorted(n_hi):
                if nu > HALF_WIDTH_HIGH * nk or nu < HALF_WIDTH_LOW * nk:
                    warnings.append(
                        f"{lab}: n_upper={nu:g} is far from the sample size n={nk} "
                        f"(n_upper = n halves the prior y interval when data agree)"
                    )
        clamp = 1e-9 * max(eps, 1e-12)
        at_lo = [t for t, r in zip(spec.times, rs) if r.y_lower <= eps + clamp]
        at_hi = [t for t, r in zip(spec.times, rs) if r.y_upper >= 1 - eps - clamp]
        if at_lo:
            warnings.append(f"{lab}: y_lower at the clamp {eps:g} for {len(at_lo)} grid time(s)")
        if at_hi:
            warnings.append(f"{lab}: y_upper at the clamp {1 - eps:g} for {len(at_hi)} grid time(s)")
        if nk > 0:
            frac = counts[lab] / nk
            outside = [(f < r.y_lower or f > r.y_upper) for f, r in zip(frac, rs)]
            if all(outside):
                warnings.append(f"{lab}: observed survival fractions fall outside the prior y bounds at every grid time")
    return warnings


# ---------------------------------------------------------------------------
# File formats

PRIOR_COLUMNS = ("type", "t", "n_lower", "n_upper", "y_lower", "y_upper")
PRIOR_PARAMS = PRIOR_COLUMNS[2:]


@dataclass(frozen=True)
class PriorRow:
    type: str  # "*" for every type
    t: float | None  # None for every time ("*")
    values: Mapping[str, float]  # subset of PRIOR_PARAMS
    line: int = 0


def parse_prior_csv(text: str, source: str = "<priors>") -> list[PriorRow]:
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise InputError("empty prior file", source) from None
    if tuple(header) != PRIOR_COLUMNS:
        raise InputError(f"header must be {','.join(PRIOR_COLUMNS)}", source, 1)
    rows = []
    for lineno, rec in enumerate(reader, start=2):
        if not rec or all(not c.strip() for c in rec):
            continue
        if len(rec) != len(PRIOR_COLUMNS):
            raise InputError(f"expected {len(PRIOR_COLUMNS)} fields, got {len(rec)}", source, lineno)
        typ, t_raw, *vals = (c.strip() for c in rec)
        if not typ:
            raise InputError("empty type field", source, lineno)
        try:
            t = None if t_raw == "*" else float(t_raw)
            values = {k: float(v) for k, v in zip(PRIOR_PARAMS, vals) if v != ""}
        except ValueError as exc:
            raise InputError(f"bad number: {exc}", source, lineno) from None
        rows.append(PriorRow(typ, t, values, lineno))
    return rows


def build_prior_spec(
    rows: Sequence[PriorRow],
    type_labels: Sequence[str],
    grid: Sequence[float],
    epsilon: float = DEFAULT_EPSILON,
    defaults: Mapping[str, float] | None = None,
    source: str = "<priors>",
) -> PriorSpec:
    """Resolve prior rows into a dense :class:`PriorSpec`.

    Rows for a specific type override ``type=*`` rows. A ``t=*`` row sets a
    value for every time. Per-time y values are elicitation points densified
    by :func:`fill_bounds`; per-time n values are carried forward (and back
    before the first given time). ``defaults`` supplies any parameter still
    unset.
    """
    grid = validate_grid(grid)
    defaults = dict(defaults or {})
    labels = sorted(type_labels)
    for r in rows:
        if r.type != "*" and r.type not in labels:
            raise InputError(f"unknown component type {r.type!r}", source, r.line)

    rects: dict[str, tuple[PriorRectangle, ...]] = {}
    for lab in labels:
        mine = [r for r in rows if r.type == lab] or []
        star = [r for r in rows if r.type == "*"]
        per_param: dict[str, list] = {}
        for p in PRIOR_PARAMS:
            # specific-type rows win over wildcard rows, parameter by parameter
            source_rows = [r for r in mine if p in r.values] or [r for r in star if p in r.values]
            whole = [r for r in source_rows if r.t is None]
            timed = [r for r in source_rows if r.t is not None]
            if len(whole) > 1:
                raise InputError(f"type {lab!r}: several t=* values for {p}", source, whole[1].line)
            points: dict[int, float] = {}
            for r in timed:
                try:
                    j = _on_grid(r.t, grid)
                except InputError as exc:
                    raise InputError(exc.message, source, r.line) from None
                if j in points:
                    raise InputError(f"type {lab!r}: duplicate {p} at t={r.t}", source, r.line)
                points[j] = r.values[p]
            base = whole[0].values[p] if whole else defaults.get(p)
            per_param[p] = [base, points]

        dense: dict[str, list[float]] = {}
        for p in ("n_lower", "n_upper"):
            base, points = per_param[p]
            if not points and base is None:
                raise InputError(f"type {lab!r}: no value for {p}", source)
            vals = []
            cur = base if base is not None else points[min(points)]
            for j in range(len(grid)):
                if j in points:
                    cur = points[j]
                vals.append(cur)
            dense[p] = vals

        lo_base, lo_pts = per_param["y_lower"]
        hi_base, hi_pts = per_param["y_upper"]
        if lo_pts or hi_pts:
            elicited: dict[float, list] = {}
            for j, v in lo_pts.items():
                elicited.setdefault(grid[j], [None, None])[0] = v
            for j, v in hi_pts.items():
                elicited.setdefault(grid[j], [None, None])[1] = v
            try:
                filled = fill_bounds({t: tuple(v) for t, v in elicited.items()}, grid, epsilon)
            except InputError as exc:
                raise InputError(f"type {lab!r}: {exc.message}", source) from None
            # an unelicited side with a t=* value keeps that constant value
            if not lo_pts and lo_base is not None:
                filled = [(_clamp(lo_base, epsilon), yu) for _, yu in filled]
            if not hi_pts and hi_base is not None:
                filled = [(yl, _clamp(hi_base, epsilon)) for yl, _ in filled]
        else:
            if lo_base is None or hi_base is None:
                raise InputError(f"type {lab!r}: no value for y_lower/y_upper", source)
            filled = [(_clamp(lo_base, epsilon), _clamp(hi_base, epsilon))] * len(grid)

        try:
            rects[lab] = tuple(
                PriorRectangle(dense["n_lower"][j], dense["n_upper"][j], filled[j][0], filled[j][1])
                for j in range(len(grid))
            )
        except InputError as exc:
            raise InputError(f"type {lab!r}: {exc.message}", source) from None
    try:
        return PriorSpec(grid, rects, epsilon)
    except InputError as exc:
        raise InputError(exc.message, source) from None


def parse_test_data_csv(text: str, source: str = "<data>") -> TestData:
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise InputError("empty test data file", source) from None
    if header != ["type", "failure_time"]:
        raise InputError("header must be type,failure_time", source, 1)
    failures: dict[str, list[float]] = {}
    for lineno, rec in enumerate(reader, start=2):
        if not rec or all(not c.strip() for c in rec):
            continue
        if len(rec) != 2:
            raise InputError(f"expected 2 fields, got {len(rec)}", source, lineno)
        lab, val = rec[0].strip(), rec[1].strip()
        try:
            x = float(val)
        except ValueError:
            raise InputError(f"bad failure time {val!r}", source, lineno) from None
        if not math.isfinite(x) or x < 0:
            raise InputError(f"failure time {val} must be finite and nonnegative", source, lineno)
        failures.setdefault(lab, []).append(x)
    return TestData({k: tuple(v) for k, v in failures.items()})
