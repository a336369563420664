"""Parametric model catalog: evaluation, analytic gradients, guesses, plausibility.

Each ModelSpec bundles a family's forward evaluation, analytic parameter
gradient (for the fitter), analytic x-derivative (for downstream analysis),
parameter bounds, and an initial-guess heuristic driven by data descriptives.
The built-in catalog covers six family classes and is user-extensible via
``register_model``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .dataset import Dataset

__all__ = [
    "ModelSpec",
    "PlausibilityConfig",
    "catalog",
    "register_model",
    "get_model",
    "evaluate",
    "gradient",
    "x_derivative",
    "initial_guess",
    "check_plausibility",
    "spec_to_dict",
]

Array = np.ndarray
EvalFn = Callable[[Array, Array], Array]
GradFn = Callable[[Array, Array], Array]
GuessFn = Callable[[Array, Array], Array]

_TINY = 1e-12


@dataclass(frozen=True)
class ModelSpec:
    """One parametric family y = f(theta, x)."""

    name: str
    n_params: int
    family_class: str  # polynomial | exponential | sigmoidal | peaked | rational | power
    eval_fn: EvalFn
    grad_fn: GradFn          # returns array of shape (n_params,) + x.shape
    dx_fn: GradFn            # analytic dy/dx
    guess_fn: GuessFn        # (xs, ys) -> params
    bounds: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if not self.bounds:
            object.__setattr__(
                self, "bounds",
                tuple((-np.inf, np.inf) for _ in range(self.n_params)))
        if len(self.bounds) != self.n_params:
            raise ValueError(f"{self.name}: bounds/params length mismatch")


@dataclass(frozen=True)
class PlausibilityConfig:
    """Constraints a candidate model must satisfy over the data domain."""

    domain: tuple[float, float] = (0.0, 60.0)
    require_nonnegative: bool = False
    require_finite: bool = True
    max_sign_changes_of_derivative: Optional[int] = None
    grid: int = 512

    def __post_init__(self):
        lo, hi = self.domain
        if not (lo < hi):
            raise ValueError("empty plausibility domain")


def evaluate(spec: ModelSpec, params: Sequence[float], x) -> np.ndarray | float:
    """Evaluate the model; poles/overflow come back as non-finite, never raise."""
    p = np.asarray(params, dtype=float)
    xv = np.asarray(x, dtype=float)
    with np.errstate(all="ignore"):
        y = spec.eval_fn(p, xv)
    y = np.asarray(y, dtype=float)
    return float(y) if np.isscalar(x) or xv.ndim == 0 else y


def gradient(spec: ModelSpec, params: Sequence[float], x) -> np.ndarray:
    """Analytic partials dy/dtheta_j, shape (n_params,) + shape(x)."""
    p = np.asarray(params, dtype=float)
    xv = np.asarray(x, dtype=float)
    with np.errstate(all="ignore"):
        g = np.asarray(spec.grad_fn(p, xv), dtype=float)
    return g


def x_derivative(spec: ModelSpec, params: Sequence[float], x) -> np.ndarray | float:
    """Analytic dy/dx."""
    p = np.asarray(params, dtype=float)
    xv = np.asarray(x, dtype=float)
    with np.errstate(all="ignore"):
        d = np.asarray(spec.dx_fn(p, xv), dtype=float)
    return float(d) if np.isscalar(x) or xv.ndim == 0 else d


def initial_guess(spec: ModelSpec, d: Dataset) -> np.ndarray:
    """Data-driven starting parameters, clipped into the spec's bounds."""
    if len(d) < spec.n_params:
        raise ValueError(
            f"{spec.name}: need >= {spec.n_params} points, got {len(d)}")
    with np.errstate(all="ignore"):
        p = np.asarray(spec.guess_fn(d.xs, d.ys), dtype=float)
    p = np.where(np.isfinite(p), p, 0.0)
    lo = np.array([b[0] for b in spec.bounds])
    hi = np.array([b[1] for b in spec.bounds])
    return np.clip(p, lo, hi)


def check_plausibility(spec: ModelSpec, params: Sequence[float],
                       cfg: PlausibilityConfig) -> tuple[bool, str]:
    """Dense-grid scan of the model against the configured constraints."""
    lo, hi = cfg.domain
    xs = np.linspace(lo, hi, cfg.grid)
    y = np.asarray(evaluate(spec, params, xs), dtype=float)
    finite = np.isfinite(y)
    if cfg.require_finite and not finite.all():
        return False, "non-finite value in domain"
    if cfg.require_nonnegative:
        if np.any(y[finite] < -1e-9 * max(1.0, float(np.nanmax(np.abs(y[finite])) if finite.any() else 1.0))):
            return False, "negative value in domain"
    if cfg.max_sign_changes_of_derivative is not None:
        dy = np.diff(y[finite])
        scale = max(1e-300, float(np.max(np.abs(dy))) if dy.size else 0.0)
        signs = np.sign(dy[np.abs(dy) > 1e-9 * scale])
        changes = int(np.sum(signs[1:] != signs[:-1])) if signs.size > 1 else 0
        if changes > cfg.max_sign_changes_of_derivative:
            return False, f"derivative changes sign {changes} times"
    return True, "ok"


def spec_to_dict(spec: ModelSpec) -> dict:
    return {
        "name": spec.name,
        "n_params": spec.n_params,
        "family_class": spec.family_class,
        "bounds": [[lo, hi] for lo, hi in spec.bounds],
    }


# ---------------------------------------------------------------------------
# Guess helpers
# ---------------------------------------------------------------------------

def _span(v: Array, floor: float = 1e-6) -> float:
    return max(float(v.max() - v.min()), floor)


def _lstsq(design: Array, ys: Array) -> Array:
    sol, *_ = np.linalg.lstsq(design, ys, rcond=None)
    return sol


def _poly_guess(deg: int) -> GuessFn:
    def guess(xs, ys):
        design = np.vander(xs, deg + 1, increasing=True)
        return _lstsq(design, ys)
    return guess


def _log_linear_decay(xs, ys):
    """Fit log y ~ intercept + slope*x on the strictly-positive points."""
    mask = ys > 0
    if mask.sum() >= 2:
        sol = _lstsq(np.vander(xs[mask], 2, increasing=True), np.log(ys[mask]))
        return math.exp(min(sol[0], 300.0)), -sol[1]
    return max(float(ys.max()), _TINY), 1.0 / _span(xs)


# ---------------------------------------------------------------------------
# Built-in families
# ---------------------------------------------------------------------------

_REGISTRY: dict[str, ModelSpec] = {}


def register_model(spec: ModelSpec) -> ModelSpec:
    if spec.name in _REGISTRY:
        raise ValueError(f"model {spec.name!r} already registered")
    _REGISTRY[spec.name] = spec
    return spec


def get_model(name: str) -> ModelSpec:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown model {name!r}; see catalog()") from None


def catalog() -> list[ModelSpec]:
    """All registered model families, in registration order."""
    return list(_REGISTRY.values())


def _register(name, family, n, eval_fn, grad_fn, dx_fn, guess_fn, bounds=()):
    register_model(ModelSpec(
        name=name, n_params=n, family_class=family,
        eval_fn=eval_fn, grad_fn=grad_fn, dx_fn=dx_fn, guess_fn=guess_fn,
        bounds=tuple(bounds),
    ))


def _ones_like(x):
    return np.ones_like(np.asarray(x, dtype=float))


# --- polynomials, degree 0..5 ---

def _make_poly(deg: int):
    def f(p, x):
        return np.polynomial.polynomial.polyval(x, p)

    def g(p, x):
        return np.stack([x ** j * _ones_like(x) for j in range(deg + 1)])

    def dx(p, x):
        if deg == 0:
            return np.zeros_like(np.asarray(x, dtype=float))
        dp = np.polynomial.polynomial.polyder(p)
        return np.polynomial.polynomial.polyval(x, dp)

    _register(f"poly{deg}", "polynomial", deg + 1, f, g, dx, _poly_guess(deg))


for _deg in range(6):
    _make_poly(_deg)


# --- exponential class ---

def _exp_decay(p, x):
    a, b = p
    return a * np.exp(-b * x)

def _exp_decay_g(p, x):
    a, b = p
    e = np.exp(-b * x)
    return np.stack([e, -a * x * e])

def _exp_decay_dx(p, x):
    a, b = p
    return -a * b * np.exp(-b * x)

_register("exp_decay", "exponential", 2, _exp_decay, _exp_decay_g, _exp_decay_dx,
          lambda xs, ys: np.array(_log_linear_decay(xs, ys)))


def _exp_decay_off(p, x):
    a, b, c = p
    return a * np.exp(-b * x) + c

def _exp_decay_off_g(p, x):
    a, b, c = p
    e = np.exp(-b * x)
    return np.stack([e, -a * x * e, _ones_like(x)])

def _exp_decay_off_guess(xs, ys):
    c = float(ys.min())
    a, b = _log_linear_decay(xs, ys - c + 1e-3)
    return np.array([a, b, c])

_register("exp_decay_offset", "exponential", 3, _exp_decay_off, _exp_decay_off_g,
          lambda p, x: -p[0] * p[1] * np.exp(-p[1] * x), _exp_decay_off_guess)


def _dbl_exp(p, x):
    a, b, c, d = p
    return a * np.exp(-b * x) + c * np.exp(-d * x)

def _dbl_exp_g(p, x):
    a, b, c, d = p
    e1, e2 = np.exp(-b * x), np.exp(-d * x)
    return np.stack([e1, -a * x * e1, e2, -c * x * e2])

def _dbl_exp_dx(p, x):
    a, b, c, d = p
    return -a * b * np.exp(-b * x) - c * d * np.exp(-d * x)

_register("double_exp_decay", "exponential", 4, _dbl_exp, _dbl_exp_g, _dbl_exp_dx,
          lambda xs, ys: np.array([
              0.7 * max(float(ys.max()), _TINY), 2.0 / _span(xs),
              0.3 * max(float(ys.max()), _TINY), 0.3 / _span(xs)]))


def _exp_sat(p, x):
    a, b = p
    return a * (1.0 - np.exp(-b * x))

def _exp_sat_g(p, x):
    a, b = p
    e = np.exp(-b * x)
    return np.stack([1.0 - e, a * x * e])

_register("exp_saturating", "exponential", 2, _exp_sat, _exp_sat_g,
          lambda p, x: p[0] * p[1] * np.exp(-p[1] * x),
          lambda xs, ys: np.array([float(ys.max()), 2.0 / _span(xs)]))


def _exp_quad(p, x):
    a, b, c = p
    return np.exp(a + b * x + c * x * x)

def _exp_quad_g(p, x):
    y = _exp_quad(p, x)
    return np.stack([y, x * y, x * x * y])

def _exp_quad_guess(xs, ys):
    mask = ys > 0
    if mask.sum() >= 3:
        sol = _lstsq(np.vander(xs[mask], 3, increasing=True), np.log(ys[mask]))
        return np.clip(sol, -50.0, 50.0)
    return np.array([math.log(max(float(np.abs(ys).mean()), _TINY)), 0.0, 0.0])

_register("exp_quadratic", "exponential", 3, _exp_quad, _exp_quad_g,
          lambda p, x: (p[1] + 2.0 * p[2] * x) * _exp_quad(p, x), _exp_quad_guess)


def _stretched(p, x):
    a, b, q = p
    return a * np.exp(-np.power(x / b, q))

def _stretched_g(p, x):
    a, b, q = p
    u = x / b
    uq = np.power(u, q)
    y = a * np.exp(-uq)
    logu = np.log(u)
    return np.stack([y / a, y * uq * q / b, -y * uq * logu])

def _stretched_dx(p, x):
    a, b, q = p
    u = x / b
    uq = np.power(u, q)
    return a * np.exp(-uq) * (-q / b) * np.power(u, q - 1.0)

_register("stretched_exp", "exponential", 3, _stretched, _stretched_g, _stretched_dx,
          lambda xs, ys: np.array([max(float(ys.max()), _TINY), _span(xs) / 2.0, 1.0]),
          bounds=[(-np.inf, np.inf), (_TINY, np.inf), (_TINY, np.inf)])


# --- sigmoidal class ---

def _logistic(p, x):
    L, k, x0 = p
    return L / (1.0 + np.exp(-k * (x - x0)))

def _logistic_g(p, x):
    L, k, x0 = p
    s = np.exp(-k * (x - x0))
    den = (1.0 + s) ** 2
    return np.stack([1.0 / (1.0 + s), L * (x - x0) * s / den, -L * k * s / den])

def _logistic_dx(p, x):
    L, k, x0 = p
    s = np.exp(-k * (x - x0))
    return L * k * s / (1.0 + s) ** 2

def _sigmoid_guess(xs, ys):
    slope_sign = 1.0 if np.corrcoef(xs, ys)[0, 1] >= 0 else -1.0
    return np.array([float(ys.max()), slope_sign * 4.0 / _span(xs),
                     float(np.median(xs))])

_register("logistic", "sigmoidal", 3, _logistic, _logistic_g, _logistic_dx,
          _sigmoid_guess)


def _logistic_off(p, x):
    return _logistic(p[:3], x) + p[3]

def _logistic_off_g(p, x):
    return np.concatenate([_logistic_g(p[:3], x), _ones_like(x)[None]])

_register("logistic_offset", "sigmoidal", 4, _logistic_off, _logistic_off_g,
          lambda p, x: _logistic_dx(p[:3], x),
          lambda xs, ys: np.concatenate([_sigmoid_guess(xs, ys - ys.min()),
                                         [float(ys.min())]]))


def _gompertz(p, x):
    a, b, c = p
    return a * np.exp(-b * np.exp(-c * x))

def _gompertz_g(p, x):
    a, b, c = p
    e = np.exp(-c * x)
    y = a * np.exp(-b * e)
    return np.stack([y / a if a != 0 else np.exp(-b * e),
                     -y * e, y * b * x * e])

def _gompertz_dx(p, x):
    a, b, c = p
    e = np.exp(-c * x)
    return a * np.exp(-b * e) * b * c * e

_register("gompertz", "sigmoidal", 3, _gompertz, _gompertz_g, _gompertz_dx,
          lambda xs, ys: np.array([float(ys.max()), 1.0, 2.0 / _span(xs)]),
          bounds=[(-np.inf, np.inf), (_TINY, np.inf), (-np.inf, np.inf)])


def _hill(p, x):
    a, k, h = p
    xh = np.power(x, h)
    return a * xh / (np.power(k, h) + xh)

def _hill_g(p, x):
    a, k, h = p
    xh = np.power(x, h)
    kh = np.power(k, h)
    den = (kh + xh) ** 2
    gk = -a * xh * h * np.power(k, h - 1.0) / den
    gh = a * kh * xh * (np.log(x) - math.log(k)) / den
    return np.stack([xh / (kh + xh), gk, gh])

def _hill_dx(p, x):
    a, k, h = p
    xh = np.power(x, h)
    kh = np.power(k, h)
    return a * h * kh * np.power(x, h - 1.0) / (kh + xh) ** 2

_register("hill_sigmoid", "sigmoidal", 3, _hill, _hill_g, _hill_dx,
          lambda xs, ys: np.array([float(ys.max()),
                                   max(float(np.median(xs)), 1e-3), 2.0]),
          bounds=[(-np.inf, np.inf), (_TINY, np.inf), (_TINY, np.inf)])


def _tanh_sig(p, x):
    a, b, k, x0 = p
    return a + b * np.tanh(k * (x - x0))

def _tanh_sig_g(p, x):
    a, b, k, x0 = p
    t = np.tanh(k * (x - x0))
    sech2 = 1.0 - t * t
    return np.stack([_ones_like(x), t, b * (x - x0) * sech2, -b * k * sech2])

def _tanh_sig_dx(p, x):
    a, b, k, x0 = p
    t = np.tanh(k * (x - x0))
    return b * k * (1.0 - t * t)

_register("tanh_sigmoid", "sigmoidal", 4, _tanh_sig, _tanh_sig_g, _tanh_sig_dx,
          lambda xs, ys: np.array([float(ys.mean()), _span(ys) / 2.0,
                                   2.0 / _span(xs), float(np.median(xs))]))


# --- peaked class ---

def _gauss(p, x):
    A, c, w = p
    return A * np.exp(-((x - c) ** 2) / (2.0 * w * w))

def _gauss_g(p, x):
    A, c, w = p
    u = x - c
    e = np.exp(-(u * u) / (2.0 * w * w))
    return np.stack([e, A * e * u / (w * w), A * e * u * u / (w ** 3)])

def _gauss_dx(p, x):
    A, c, w = p
    u = x - c
    return -A * np.exp(-(u * u) / (2.0 * w * w)) * u / (w * w)

def _peak_guess(xs, ys):
    return np.array([float(ys.max()), float(xs[np.argmax(ys)]), _span(xs) / 6.0])

_register("gaussian_peak", "peaked", 3, _gauss, _gauss_g, _gauss_dx, _peak_guess,
          bounds=[(-np.inf, np.inf), (-np.inf, np.inf), (_TINY, np.inf)])


def _gauss_off(p, x):
    return _gauss(p[:3], x) + p[3]

def _gauss_off_g(p, x):
    return np.concatenate([_gauss_g(p[:3], x), _ones_like(x)[None]])

_register("gaussian_peak_offset", "peaked", 4, _gauss_off, _gauss_off_g,
          lambda p, x: _gauss_dx(p[:3], x),
          lambda xs, ys: np.concatenate([_peak_guess(xs, ys - ys.min()),
                                         [float(ys.min())]]),
          bounds=[(-np.inf, np.inf), (-np.inf, np.inf), (_TINY, np.inf),
                  (-np.inf, np.inf)])


def _lognorm_peak(p, x):
    A, c, w = p
    u = np.log(x / c)
    return A * np.exp(-(u * u) / (2.0 * w * w))

def _lognorm_peak_g(p, x):
    A, c, w = p
    u = np.log(x / c)
    e = np.exp(-(u * u) / (2.0 * w * w))
    return np.stack([e, A * e * u / (w * w * c), A * e * u * u / (w ** 3)])

def _lognorm_peak_dx(p, x):
    A, c, w = p
    u = np.log(x / c)
    return -A * np.exp(-(u * u) / (2.0 * w * w)) * u / (w * w * x)

_register("lognormal_peak", "peaked", 3, _lognorm_peak, _lognorm_peak_g,
          _lognorm_peak_dx,
          lambda xs, ys: np.array([float(ys.max()),
                                   max(float(xs[np.argmax(ys)]), 1e-3), 0.5]),
          bounds=[(-np.inf, np.inf), (_TINY, np.inf), (_TINY, np.inf)])


def _lorentz(p, x):
    A, c, w = p
    u = (x - c) / w
    return A / (1.0 + u * u)

def _lorentz_g(p, x):
    A, c, w = p
    u = (x - c) / w
    den = (1.0 + u * u) ** 2
    return np.stack([1.0 / (1.0 + u * u), 2.0 * A * u / (w * den),
                     2.0 * A * u * u / (w * den)])

def _lorentz_dx(p, x):
    A, c, w = p
    u = (x - c) / w
    return -2.0 * A * u / (w * (1.0 + u * u) ** 2)

_register("lorentzian_peak", "peaked", 3, _lorentz, _lorentz_g, _lorentz_dx,
          _peak_guess,
          bounds=[(-np.inf, np.inf), (-np.inf, np.inf), (_TINY, np.inf)])


def _gamma_peak(p, x):
    A, c = p
    u = x / c
    return A * u * np.exp(1.0 - u)

def _gamma_peak_g(p, x):
    A, c = p
    u = x / c
    e = np.exp(1.0 - u)
    return np.stack([u * e, A * e * u * (u - 1.0) / c])

def _gamma_peak_dx(p, x):
    A, c = p
    u = x / c
    return A * np.exp(1.0 - u) * (1.0 - u) / c

_register("linear_rise_exp_fall", "peaked", 2, _gamma_peak, _gamma_peak_g,
          _gamma_peak_dx,
          lambda xs, ys: np.array([float(ys.max()),
                                   max(float(xs[np.argmax(ys)]), 1e-3)]),
          bounds=[(-np.inf, np.inf), (_TINY, np.inf)])


def _sech2(p, x):
    A, c, w = p
    u = (x - c) / w
    return A / np.cosh(u) ** 2

def _sech2_g(p, x):
    A, c, w = p
    u = (x - c) / w
    s2 = 1.0 / np.cosh(u) ** 2
    t = np.tanh(u)
    return np.stack([s2, 2.0 * A * s2 * t / w, 2.0 * A * s2 * t * u / w])

def _sech2_dx(p, x):
    A, c, w = p
    u = (x - c) / w
    return -2.0 * A * np.tanh(u) / (w * np.cosh(u) ** 2)

_register("sech2_peak", "peaked", 3, _sech2, _sech2_g, _sech2_dx, _peak_guess,
          bounds=[(-np.inf, np.inf), (-np.inf, np.inf), (_TINY, np.inf)])


# --- rational class ---

def _rat_ll(p, x):
    a, b, c = p
    return (a + b * x) / (1.0 + c * x)

def _rat_ll_g(p, x):
    a, b, c = p
    den = 1.0 + c * x
    return np.stack([1.0 / den, x / den, -(a + b * x) * x / den ** 2])

def _rat_ll_dx(p, x):
    a, b, c = p
    den = 1.0 + c * x
    return (b * den - c * (a + b * x)) / den ** 2

def _rat_guess(xs, ys):
    sol = _lstsq(np.vander(xs, 2, increasing=True), ys)
    return np.array([sol[0], sol[1], 1e-3])

_register("rational_lin_lin", "rational", 3, _rat_ll, _rat_ll_g, _rat_ll_dx,
          _rat_guess)


def _rat_ql(p, x):
    a, b, c, d = p
    return (a + b * x + d * x * x) / (1.0 + c * x)

def _rat_ql_g(p, x):
    a, b, c, d = p
    num = a + b * x + d * x * x
    den = 1.0 + c * x
    return np.stack([1.0 / den, x / den, -num * x / den ** 2, x * x / den])

def _rat_ql_dx(p, x):
    a, b, c, d = p
    num = a + b * x + d * x * x
    den = 1.0 + c * x
    return ((b + 2.0 * d * x) * den - c * num) / den ** 2

_register("rational_quad_lin", "rational", 4, _rat_ql, _rat_ql_g, _rat_ql_dx,
          lambda xs, ys: np.concatenate([
              _lstsq(np.vander(xs, 2, increasing=True), ys), [1e-3, 0.0]]))


def _rat_lq(p, x):
    a, b, c, d = p
    return (a + b * x) / (1.0 + c * x + d * x * x)

def _rat_lq_g(p, x):
    a, b, c, d = p
    num = a + b * x
    den = 1.0 + c * x + d * x * x
    return np.stack([1.0 / den, x / den, -num * x / den ** 2,
                     -num * x * x / den ** 2])

def _rat_lq_dx(p, x):
    a, b, c, d = p
    num = a + b * x
    den = 1.0 + c * x + d * x * x
    return (b * den - (c + 2.0 * d * x) * num) / den ** 2

_register("rational_lin_quad", "rational", 4, _rat_lq, _rat_lq_g, _rat_lq_dx,
          lambda xs, ys: np.concatenate([
              _lstsq(np.vander(xs, 2, increasing=True), ys), [1e-3, 1e-4]]))


def _inv_shift(p, x):
    a, b, c = p
    return a + b / (x + c)

def _inv_shift_g(p, x):
    a, b, c = p
    den = x + c
    return np.stack([_ones_like(x), 1.0 / den, -b / den ** 2])

_register("inverse_shift", "rational", 3, _inv_shift, _inv_shift_g,
          lambda p, x: -p[1] / (x + p[2]) ** 2,
          lambda xs, ys: np.array([float(ys.min()), 1.0,
                                   max(1.0, 1.0 - float(xs.min()))]))


# --- power class ---

def _power(p, x):
    a, b = p
    return a * np.power(x, b)

def _power_g(p, x):
    a, b = p
    xb = np.power(x, b)
    return np.stack([xb, a * xb * np.log(x)])

def _power_guess(xs, ys):
    mask = (xs > 0) & (ys > 0)
    if mask.sum() >= 2:
        sol = _lstsq(np.vander(np.log(xs[mask]), 2, increasing=True),
                     np.log(ys[mask]))
        return np.array([math.exp(min(sol[0], 300.0)), sol[1]])
    return np.array([max(float(np.abs(ys).mean()), _TINY), 1.0])

_register("power_law", "power", 2, _power, _power_g,
          lambda p, x: p[0] * p[1] * np.power(x, p[1] - 1.0), _power_guess)


def _power_off(p, x):
    a, b, c = p
    return a * np.power(x, b) + c

def _power_off_g(p, x):
    a, b, c = p
    xb = np.power(x, b)
    return np.stack([xb, a * xb * np.log(x), _ones_like(x)])

def _power_off_guess(xs, ys):
    c = float(ys.min())
    inner = _power_guess(xs, ys - c + 1e-3)
    return np.array([inner[0], inner[1], c])

_register("power_offset", "power", 3, _power_off, _power_off_g,
          lambda p, x: p[0] * p[1] * np.power(x, p[1] - 1.0), _power_off_guess)


def _sqrt_law(p, x):
    a, b = p
    return a + b * np.sqrt(x)

_register("sqrt_law", "power", 2, _sqrt_law,
          lambda p, x: np.stack([_ones_like(x), np.sqrt(x)]),
          lambda p, x: 0.5 * p[1] / np.sqrt(x),
          lambda xs, ys: _lstsq(
              np.stack([np.ones_like(xs), np.sqrt(np.abs(xs))], axis=1), ys))


def _log_law(p, x):
    a, b = p
    return a + b * np.log1p(x)

_register("log_law", "power", 2, _log_law,
          lambda p, x: np.stack([_ones_like(x), np.log1p(x)]),
          lambda p, x: p[1] / (1.0 + x),
          lambda xs, ys: _lstsq(
              np.stack([np.ones_like(xs), np.log1p(np.abs(xs))], axis=1), ys))
