"""Weighted nonlinear least squares and r^2-ranked catalog model selection.

The fitter is a damped Gauss-Newton (Levenberg-Marquardt) scheme with
analytic Jacobians from the model catalog, bound projection, and monotone
RSS descent. Catalog ranking fits every family via multi-start and orders
the plausible results by coefficient of determination.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .dataset import Dataset
from .models import (
    ModelSpec,
    PlausibilityConfig,
    check_plausibility,
    evaluate,
    gradient,
    initial_guess,
)

__all__ = [
    "FitOptions",
    "FitResult",
    "RankedFits",
    "RankedEntry",
    "fit_least_squares",
    "r_squared",
    "multi_start",
    "rank_all",
]


@dataclass(frozen=True)
class FitOptions:
    max_iterations: int = 200
    rss_rtol: float = 1e-10
    step_tol: float = 1e-10
    lambda0: float = 1e-3
    lambda_up: float = 10.0
    lambda_down: float = 0.1


@dataclass(frozen=True)
class FitResult:
    spec_name: str
    params: tuple[float, ...]
    rss: float
    r2: float
    converged: bool
    iterations: int
    residuals: tuple[float, ...]

    def as_dict(self) -> dict:
        return {
            "spec_name": self.spec_name,
            "params": list(self.params),
            "rss": self.rss,
            "r2": self.r2,
            "converged": self.converged,
            "iterations": self.iterations,
        }


def _weighted_residuals(spec, params, xs, ys, sw):
    pred = np.asarray(evaluate(spec, params, xs), dtype=float)
    with np.errstate(all="ignore"):
        return sw * (ys - pred)


def _rss(res: np.ndarray) -> float:
    if not np.all(np.isfinite(res)):
        return float("inf")
    with np.errstate(over="ignore"):
        return float(res @ res)


def r_squared(spec: ModelSpec, params: Sequence[float], d: Dataset) -> float:
    """Coefficient of determination, 1 - RSS/TSS; negative means worse than the mean."""
    if len(d) < 2:
        raise ValueError("need at least 2 points for r^2")
    ys = d.ys
    tss = float(np.sum((ys - ys.mean()) ** 2))
    if tss == 0.0:
        raise ValueError("zero total sum of squares: all y identical")
    pred = np.asarray(evaluate(spec, params, d.xs), dtype=float)
    with np.errstate(all="ignore"):
        rss = float(np.sum((ys - pred) ** 2))
    return 1.0 - rss / tss


def fit_least_squares(spec: ModelSpec, d: Dataset,
                      start: Sequence[float],
                      options: FitOptions = FitOptions()) -> FitResult:
    """Levenberg-Marquardt minimization of the weighted residual sum of squares.

    Damping starts at lambda0, grows on rejected steps and shrinks on
    accepted ones; parameters are projected onto the spec's bounds after
    every step. Accepted iterations never increase the RSS.
    """
    if len(d) < spec.n_params:
        raise ValueError(
            f"underdetermined: {len(d)} points for {spec.n_params} parameters")
    xs, ys = d.xs, d.ys
    sw = np.sqrt(d.weights)
    lo = np.array([b[0] for b in spec.bounds])
    hi = np.array([b[1] for b in spec.bounds])
    p = np.clip(np.asarray(start, dtype=float), lo, hi)

    if np.ptp(xs) == 0.0 and spec.n_params > 1:
        raise ValueError("all x identical: singular system for an x-dependent family")

    res = _weighted_residuals(spec, p, xs, ys, sw)
    if not np.all(np.isfinite(res)):
        raise ValueError(f"{spec.name}: start point evaluates non-finite")
    rss = _rss(res)
    lam = options.lambda0
    converged = False
    it = 0
    for it in range(1, options.max_iterations + 1):
        jac = gradient(spec, p, xs)  # (n_params, n_points)
        with np.errstate(all="ignore"):
            jac = np.where(np.isfinite(jac), jac, 0.0) * sw
            a = jac @ jac.T
            g = jac @ res
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(g))):
            break
        accepted = False
        for _ in range(50):  # damping escalations within one iteration
            try:
                step = np.linalg.solve(a + lam * np.diag(np.maximum(np.diag(a), 1e-12)), g)
            except np.linalg.LinAlgError:
                step = None
            if step is not None and np.all(np.isfinite(step)):
                p_new = np.clip(p + step, lo, hi)
                res_new = _weighted_residuals(spec, p_new, xs, ys, sw)
                rss_new = _rss(res_new)
                if rss_new <= rss:
                    accepted = True
                    break
            lam *= options.lambda_up
        if not accepted:
            converged = True  # cannot improve further at any damping
            break
        step_norm = float(np.linalg.norm(p_new - p))
        rel_drop = (rss - rss_new) / max(rss, 1e-300)
        p, res, rss = p_new, res_new, rss_new
        lam = max(lam * options.lambda_down, 1e-12)
        if rel_drop < options.rss_rtol or step_norm < options.step_tol:
            converged = True
            break

    try:
        r2 = r_squared(spec, p, d)
    except ValueError:
        r2 = float("nan")
    raw_residuals = ys - np.asarray(evaluate(spec, p, xs), dtype=float)
    return FitResult(
        spec_name=spec.name,
        params=tuple(float(v) for v in p),
        rss=rss,
        r2=r2,
        converged=converged,
        iterations=it,
        residuals=tuple(float(v) for v in raw_residuals),
    )


def multi_start(spec: ModelSpec, d: Dataset, n_starts: int = 5,
                seed: int = 0,
                options: FitOptions = FitOptions()) -> FitResult:
    """Fit from the heuristic guess plus seeded perturbations; keep the best RSS.

    Returns the lowest-RSS converged result, or the best non-converged one
    (flagged) when nothing converges.
    """
    if n_starts < 1:
        raise ValueError("n_starts must be >= 1")
    base = initial_guess(spec, d)
    lo = np.array([b[0] for b in spec.bounds])
    hi = np.array([b[1] for b in spec.bounds])
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    scale = np.maximum(np.abs(base), 1.0)

    starts = [base]
    for _ in range(n_starts - 1):
        jitter = base * (1.0 + 0.5 * rng.standard_normal(spec.n_params))
        jitter = jitter + 0.25 * scale * rng.standard_normal(spec.n_params)
        starts.append(np.clip(jitter, lo, hi))

    best: Optional[FitResult] = None
    for start in starts:
        try:
            result = fit_least_squares(spec, d, start, options)
        except (ValueError, np.linalg.LinAlgError):
            continue
        if best is None:
            best = result
            continue
        if (result.converged, -result.rss) > (best.converged, -best.rss):
            best = result
    if best is None:
        raise ValueError(f"{spec.name}: no start point produced a fit")
    return best


@dataclass(frozen=True)
class RankedEntry:
    result: FitResult
    plausible: bool
    reason: str


@dataclass(frozen=True)
class RankedFits:
    """Full catalog leaderboard; plausible entries first, r^2 descending."""

    entries: tuple[RankedEntry, ...]
    dataset_label: str = ""

    @property
    def gold_standard(self) -> Optional[FitResult]:
        """Best plausible converged fit, or None when nothing qualifies."""
        for e in self.entries:
            if e.plausible and e.result.converged and np.isfinite(e.result.r2):
                return e.result
        return None

    def as_dict(self) -> dict:
        return {
            "dataset_label": self.dataset_label,
            "gold_standard": self.gold_standard.spec_name if self.gold_standard else None,
            "entries": [
                {**e.result.as_dict(), "plausible": e.plausible, "reason": e.reason}
                for e in self.entries
            ],
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.as_dict(), indent=indent, sort_keys=True)

    def leaderboard(self, top: Optional[int] = None) -> str:
        """Aligned plain-text table mirroring the JSON output."""
        lines = [f"{'rank':>4}  {'model':<22} {'r2':>10} {'params':>6} "
                 f"{'conv':>5}  status"]
        shown = self.entries if top is None else self.entries[:top]
        for i, e in enumerate(shown, start=1):
            r2 = f"{e.result.r2:.6f}" if np.isfinite(e.result.r2) else "nan"
            status = "plausible" if e.plausible else f"excluded: {e.reason}"
            lines.append(
                f"{i:>4}  {e.result.spec_name:<22} {r2:>10} "
                f"{len(e.result.params):>6} {str(e.result.converged):>5}  {status}")
        return "\n".join(lines)


def rank_all(specs: Sequence[ModelSpec], d: Dataset,
             plaus: PlausibilityConfig,
             n_starts: int = 5, seed: int = 0,
             options: FitOptions = FitOptions()) -> RankedFits:
    """Fit every family, tag plausibility, and rank by r^2.

    Plausible entries sort by r^2 descending, ties broken by fewer
    parameters then name; implausible and failed fits follow, so the whole
    catalog is always accounted for.
    """
    if len(d) == 0:
        raise ValueError("empty dataset")
    entries: list[RankedEntry] = []
    for spec in specs:
        try:
            result = multi_start(spec, d, n_starts=n_starts, seed=seed,
                                 options=options)
        except (ValueError, np.linalg.LinAlgError) as exc:
            result = FitResult(
                spec_name=spec.name,
                params=tuple(np.zeros(spec.n_params)),
                rss=float("inf"), r2=float("nan"),
                converged=False, iterations=0,
                residuals=(),
            )
            entries.append(RankedEntry(result, False, f"fit failed: {exc}"))
            continue
        plausible, reason = check_plausibility(spec, result.params, plaus)
        entries.append(RankedEntry(result, plausible, reason))

    def sort_key(e: RankedEntry):
        ok = e.plausible and e.result.converged and np.isfinite(e.result.r2)
        r2 = e.result.r2 if np.isfinite(e.result.r2) else -np.inf
        return (not ok, -r2, len(e.result.params), e.result.spec_name)

    return RankedFits(entries=tuple(sorted(entries, key=sort_key)),
                      dataset_label=d.label)
