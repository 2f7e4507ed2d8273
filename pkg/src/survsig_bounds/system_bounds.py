"""Lower and upper system reliability over sets of component priors.

At every grid time the system reliability is the survival signature
averaged over the independent per-type predictive laws of the number of
working components. Its extremes over the prior rectangles are found by

1. pinning each type's prior mean at ``y_lower`` (lower bound) or
   ``y_upper`` (upper bound), which is optimal because the signature is
   monotone and the predictive is stochastically increasing in the mean;
2. picking each type's prior strength from the dominance checks;
3. searching a joint grid over the strengths of the types left undecided.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .beta_binomial import BetaBinomialDist, pmf_matrix
from .dominance import NTildeChoice, select_n_tilde
from .errors import InputError, NumericError
from .prior_sets import (
    ConflictReport,
    PosteriorYBounds,
    PriorRectangle,
    PriorSpec,
    TestData,
    conflict_report,
    posterior_y_bounds,
    survival_counts,
)
from .structure_graph import SurvivalSignature

BOUNDS = ("lower", "upper")


@dataclass(frozen=True)
class SearchConfig:
    """Resolution of the fallback grid search over undecided prior strengths."""

    points_few: int = 101  # per dimension, up to two undecided types
    points_many: int = 21  # per dimension, three or more
    refine: bool = True

    def points(self, ndim: int) -> int:
        return self.points_few if ndim <= 2 else self.points_many


def _contract(phi: np.ndarray, pmfs: Sequence[np.ndarray]) -> np.ndarray | float:
    """Sum phi[l_1..l_K] * prod_k pmfs[k][..., l_k].

    A 1-d pmf is summed out; a 2-d pmf (candidates x values) leaves a
    candidate axis. Candidate axes appear in type order.
    """
    out = phi
    for p in pmfs:
        if p.ndim == 1:
            out = np.tensordot(out, p, axes=([0], [0]))
        else:
            out = np.tensordot(out, p, axes=([0], [1]))
    return out if np.ndim(out) else float(out)


def system_reliability_point(sig: SurvivalSignature, dists: Sequence[BetaBinomialDist]) -> float:
    if len(dists) != len(sig.counts):
        raise InputError(f"{len(dists)} predictive laws for {len(sig.counts)} component types")
    for lab, m, d in zip(sig.type_labels, sig.counts, dists):
        if d.m != m:
            raise InputError(f"type {lab!r}: law on 0..{d.m} but the system has {m} components")
    value = _contract(sig.values, [d.pmf_vector() for d in dists])
    if not np.isfinite(value):
        raise NumericError("non-finite system reliability")
    return float(value)


@dataclass(frozen=True)
class TypeChoice:
    """How one type's prior strength was fixed for one bound."""

    n: float
    mechanism: str  # "theorem2", "lemma3", "degenerate" or "search"


def _y_for(rect: PriorRectangle, bound: str) -> float:
    return rect.y_lower if bound == "lower" else rect.y_upper


def joint_grid_search(
    sig: SurvivalSignature,
    rects: Sequence[PriorRectangle],
    obs: Sequence[tuple[int, int]],
    bound: str,
    candidates: Sequence[np.ndarray],
) -> tuple[float, tuple[float, ...]]:
    """Extreme system reliability over the product of candidate strengths.

    ``candidates[k]`` lists the prior strengths tried for type ``k``; prior
    means are pinned by ``bound``. Returns the extreme value and the
    strengths attaining it.
    """
    mats = [
        pmf_matrix(m, cand, _y_for(r, bound), n, s)
        for m, r, (n, s), cand in zip(sig.counts, rects, obs, candidates)
    ]
    vals = np.asarray(_contract(sig.values, mats))
    flat = int(np.argmin(vals) if bound == "lower" else np.argmax(vals))
    idx = np.unravel_index(flat, vals.shape)
    best = float(vals[idx])
    if not np.isfinite(best):
        raise NumericError("non-finite system reliability in grid search")
    return best, tuple(float(c[i]) for c, i in zip(candidates, idx))


def bound_at_time(
    sig: SurvivalSignature,
    rects: Sequence[PriorRectangle],
    obs: Sequence[tuple[int, int]],
    bound: str,
    search: SearchConfig = SearchConfig(),
) -> tuple[float, tuple[TypeChoice, ...]]:
    """One system reliability bound at one time.

    ``rects`` and ``obs`` (tested count, surviving count) are in signature
    type order.
    """
    if bound not in BOUNDS:
        raise InputError(f"bound must be 'lower' or 'upper', got {bound!r}")
    if not len(rects) == len(obs) == len(sig.counts):
        raise InputError("one prior rectangle and one data summary needed per component type")
    picks: list[NTildeChoice] = [
        select_n_tilde(r, bound, m, s, n) for r, m, (n, s) in zip(rects, sig.counts, obs)
    ]
    free = [k for k, p in enumerate(picks) if p.n is None]
    candidates = [np.array([p.n]) if p.n is not None else None for p in picks]

    if not free:
        dists = [
            pmf_matrix(m, [p.n], _y_for(r, bound), n, s)[0]
            for m, r, (n, s), p in zip(sig.counts, rects, obs, picks)
        ]
        value = _contract(sig.values, dists)
        if not np.isfinite(value):
            raise NumericError("non-finite system reliability")
        chosen = tuple(p.n for p in picks)
    else:
        npts = search.points(len(free))
        for k in free:
            candidates[k] = np.linspace(rects[k].n_lower, rects[k].n_upper, npts)
        value, chosen = joint_grid_search(sig, rects, obs, bound, candidates)
        if search.refine:
            local = list(candidates)
            for k in free:
                lo, hi = rects[k].n_lower, rects[k].n_upper
                h = (hi - lo) / (npts - 1)
                pts = chosen[k] + h * np.array([-1.0, -0.5, 0.0, 0.5, 1.0])
                local[k] = np.unique(np.clip(pts, lo, hi))
            for k, p in enumerate(picks):
                if p.n is not None:
                    local[k] = np.array([p.n])
            v2, c2 = joint_grid_search(sig, rects, obs, bound, local)
            if (v2 < value) if bound == "lower" else (v2 > value):
                value, chosen = v2, c2

    choices = tuple(
        TypeChoice(float(chosen[k]), "search" if p.n is None else p.decision.source.value)
        for k, p in enumerate(picks)
    )
    return float(value), choices


@dataclass(frozen=True)
class TypeDiagnostics:
    label: str
    s: int
    n: int
    conflict: bool | None
    lower: TypeChoice
    upper: TypeChoice
    y_bounds: PosteriorYBounds


@dataclass(frozen=True)
class BoundsCurve:
    times: tuple[float, ...]
    lower: np.ndarray
    upper: np.ndarray
    diagnostics: tuple[tuple[TypeDiagnostics, ...], ...] = field(default=(), repr=False)

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower


@dataclass(frozen=True)
class ComponentBoundsCurve:
    label: str
    times: tuple[float, ...]
    lower: np.ndarray
    upper: np.ndarray

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower


@dataclass(frozen=True)
class InferenceResult:
    system: BoundsCurve
    components: Mapping[str, ComponentBoundsCurve]
    conflicts: ConflictReport
    posterior: bool


def _evaluate_time(args) -> tuple[float, float, tuple[TypeChoice, ...], tuple[TypeChoice, ...]]:
    sig, rects, obs, search = args
    lo, lo_choice = bound_at_time(sig, rects, obs, "lower", search)
    hi, hi_choice = bound_at_time(sig, rects, obs, "upper", search)
    return lo, hi, lo_choice, hi_choice


def _check_labels(sig: SurvivalSignature, spec: PriorSpec, data: TestData) -> None:
    sig_l, spec_l = set(sig.type_labels), set(spec.type_labels)
    problems = []
    if sig_l - spec_l:
        problems.append(f"no prior for types {sorted(sig_l - spec_l)}")
    if spec_l - sig_l:
        problems.append(f"prior given for unknown types {sorted(spec_l - sig_l)}")
    unknown = set(data.failures) - sig_l
    if unknown:
        problems.append(f"test data for unknown types {sorted(unknown)}")
    if problems:
        raise InputError("type label mismatch: " + "; ".join(problems))


def compute_bounds(
    sig: SurvivalSignature,
    spec: PriorSpec,
    data: TestData,
    posterior: bool = True,
    search: SearchConfig = SearchConfig(),
    workers: int = 1,
) -> InferenceResult:
    """System and per-type reliability bounds at every grid time.

    With ``posterior=False`` the data are ignored for the bounds (prior
    curves) but still used for the conflict report. Types missing from
    ``data`` count as untested. ``workers > 1`` evaluates grid times in
    separate processes; results are identical to a sequential run.
    """
    _check_labels(sig, spec, data)
    labels = sig.type_labels
    counts = survival_counts(data.restricted(labels), spec.times)
    conflicts = conflict_report(spec, data)

    jobs = []
    for j in range(len(spec.times)):
        rects = tuple(spec.at(lab, j) for lab in labels)
        if posterior:
            obs = tuple((data.n(lab), int(counts[lab][j])) for lab in labels)
        else:
            obs = tuple((0, 0) for _ in labels)
        jobs.append((sig, rects, obs, search))

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_evaluate_time, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        results = [_evaluate_time(job) for job in jobs]

    lower = np.array([r[0] for r in results])
    upper = np.array([r[1] for r in results])
    diags = []
    comp_lo = {lab: [] for lab in labels}
    comp_hi = {lab: [] for lab in labels}
    for j, (job, res) in enumerate(zip(jobs, results)):
        _, rects, obs, _ = job
        row = []
        for k, lab in enumerate(labels):
            n, s = obs[k]
            yb = posterior_y_bounds(rects[k], n, s)
            comp_lo[lab].append(yb.y_lower_post)
            comp_hi[lab].append(yb.y_upper_post)
            entry = conflicts.entries[lab][j]
            conflict = entry.conflict if data.n(lab) > 0 else None
            row.append(TypeDiagnostics(lab, s, n, conflict, res[2][k], res[3][k], yb))
        diags.append(tuple(row))

    system = BoundsCurve(spec.times, lower, upper, tuple(diags))
    components = {
        lab: ComponentBoundsCurve(lab, spec.times, np.array(comp_lo[lab]), np.array(comp_hi[lab]))
        for lab in labels
    }
    return InferenceResult(system, components, conflicts, posterior)


def _fmt(x: float) -> str:
    return f"{x:.15g}"


def bounds_to_csv(result: InferenceResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    labels = list(result.components)
    w.writerow(["t", "system_lower", "system_upper", *[f"{lab}_{b}" for lab in labels for b in BOUNDS]])
    sysc = result.system
    for j, t in enumerate(sysc.times):
        row = [_fmt(t), _fmt(sysc.lower[j]), _fmt(sysc.upper[j])]
        for lab in labels:
            c = result.components[lab]
            row += [_fmt(c.lower[j]), _fmt(c.upper[j])]
        w.writerow(row)
    return buf.getvalue()


def _mechanism(d: TypeDiagnostics) -> str:
    a, b = d.lower.mechanism, d.upper.mechanism
    return a if a == b else f"{a}/{b}"


def diagnostics_to_csv(result: InferenceResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "type", "s", "n", "conflict", "n_tilde_lower", "n_tilde_upper", "mechanism"])
    for t, row in zip(result.system.times, result.system.diagnostics):
        for d in row:
            conflict = "" if d.conflict is None else str(d.conflict).lower()
            w.writerow([_fmt(t), d.label, d.s, d.n, conflict, _fmt(d.lower.n), _fmt(d.upper.n), _mechanism(d)])
    return buf.getvalue()
