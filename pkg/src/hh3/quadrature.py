"""Composite corrected-midpoint quadrature with certified error bounds.

A division a = x_0 < x_1 < ... < x_n = b induces the two sums

    midpoint:   sum_i h_i f(m_i)
    corrected:  sum_i h_i f(m_i) + (h_i^3 / 24) f''(m_i)

with h_i = x_{i+1} - x_i and m_i the subinterval midpoints.  When |f'''| is
positive at every division point, each subinterval contributes a rigorous
bound from :mod:`hh3.bounds` (scaled by h_i, turning the mean-value bound
into an integral one), and their sum certifies the corrected sum:

    | integral - corrected_sum |  <=  certified_bound.

The same number is attached to the plain midpoint sum only as a heuristic:
it becomes rigorous exactly when the correction terms vanish, so the flag
flips to rigorous when max_i |f''(m_i)| <= 1e-12 * scale.

The reference integrator used for truth values and residual checks is an
adaptive bisection scheme whose panel rule is a nested Clenshaw-Curtis pair
(17 and 33 points; the coarse nodes are the even-indexed fine ones, so a
panel costs 33 evaluations total).  A panel is accepted when the difference
of the two rules, a Richardson-style estimate that in practice overstates
the fine rule's error, fits within the panel's pro-rata share of the
tolerance or falls below a 10-ulp floor proportional to the panel's
absolute integral; the floor stops the bisection from chasing rounding
noise when a tight absolute tolerance meets a large integrand.
"""

from __future__ import annotations

import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

from . import bounds as _bounds
from .errors import BadInterval, NonConvergence, NonPositiveThirdDerivative, \
    ToleranceUnreachable
from .expr import Node, eval_jet3, evaluate

__all__ = [
    "Division", "IntervalBound", "QuadResult", "CertifyOutcome",
    "uniform_division", "division_from_points", "midpoint_sum",
    "corrected_midpoint_sum", "composite_bound", "reference_integral",
    "integrate_adaptive", "identity_residual", "certify",
    "DEFAULT_EVAL_BUDGET",
]

DEFAULT_EVAL_BUDGET = 1_000_000

#: Correction terms at or below 1e-12 * scale make the midpoint bound
#: rigorous rather than heuristic.
_MIDPOINT_RIGOROUS_TOL = 1e-12


# --------------------------------------------------------------------------
# Divisions
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Division:
    """Strictly increasing division points of an interval."""

    points: tuple[float, ...]

    def __post_init__(self):
        if len(self.points) < 2:
            raise BadInterval("a division needs at least two points")
        for p in self.points:
            if not math.isfinite(p):
                raise BadInterval(f"division point {p!r} is not finite")
        for lo, hi in zip(self.points, self.points[1:]):
            if not lo < hi:
                raise BadInterval(
                    f"division points must be strictly increasing; "
                    f"{lo!r} >= {hi!r}")

    @property
    def a(self) -> float:
        return self.points[0]

    @property
    def b(self) -> float:
        return self.points[-1]

    def __len__(self) -> int:
        return len(self.points) - 1

    def widths(self) -> tuple[float, ...]:
        return tuple(hi - lo for lo, hi in zip(self.points, self.points[1:]))

    def midpoints(self) -> tuple[float, ...]:
        return tuple(0.5 * (lo + hi)
                     for lo, hi in zip(self.points, self.points[1:]))


def division_from_points(points: Sequence[float]) -> Division:
    return Division(tuple(float(p) for p in points))


def uniform_division(a: float, b: float, n: int) -> Division:
    """n equal subintervals of [a, b]; endpoints are reproduced exactly."""
    if not (math.isfinite(a) and math.isfinite(b) and a < b):
        raise BadInterval(f"need finite a < b, got [{a!r}, {b!r}]")
    if n < 1:
        raise BadInterval(f"need at least one subinterval, got n = {n}")
    h = (b - a) / n
    pts = [a + i * h for i in range(n)]
    pts.append(b)
    return Division(tuple(pts))


# --------------------------------------------------------------------------
# Plain sums
# --------------------------------------------------------------------------

def midpoint_sum(f: Node, d: Division) -> float:
    terms = [h * evaluate(f, m)
             for h, m in zip(d.widths(), d.midpoints())]
    return math.fsum(terms)


def corrected_midpoint_sum(f: Node, d: Division) -> float:
    terms = []
    for h, m in zip(d.widths(), d.midpoints()):
        jet = eval_jet3(f, m)
        terms.append(h * jet.d0 + h ** 3 / 24.0 * jet.d2)
    return math.fsum(terms)


# --------------------------------------------------------------------------
# Composite certified bound
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class IntervalBound:
    """One subinterval's certified contribution."""

    lo: float
    hi: float
    bound: float
    k_ratio: float      # |f'''(lo)| / |f'''(hi)|
    m_ratio: float      # |f'''(hi)| / |f'''(lo)|
    method: str         # which bound produced `bound` ("thm1"... or chi label)
    q: float | None


@dataclass(frozen=True)
class QuadResult:
    midpoint_sum: float
    corrected_sum: float
    certified_bound: float
    per_interval: tuple[IntervalBound, ...]
    method: str
    midpoint_bound: float
    midpoint_bound_heuristic: bool


def _worker_count() -> int:
    """Parallelism cap from the HH3_THREADS environment variable (default 1)."""
    raw = os.environ.get("HH3_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = 1
    return max(1, n)


def _map_ordered(fn: Callable, items: Sequence) -> list:
    """Map preserving order; thread count is advisory and never affects
    results because aggregation always happens in index order."""
    workers = _worker_count()
    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def composite_bound(f: Node, d: Division, method: str = "best",
                    q: float | None = None,
                    q_grid: tuple[float, ...] | None = None) -> QuadResult:
    """Corrected-midpoint sums plus a certified bound on the corrected one.

    ``method`` is one of ``thm1`` (direct), ``thm2`` (Holder, needs q > 1),
    ``thm3`` (power mean, needs q >= 1) or ``best`` (per-subinterval minimum
    over ``q_grid``).  Requires |f'''| > 0 at every division point.
    """
    if method not in _bounds.METHOD_NAMES:
        raise ValueError(f"unknown method {method!r}; "
                         f"expected one of {_bounds.METHOD_NAMES}")
    if method in ("thm2", "thm3") and q is None:
        raise ValueError(f"method {method!r} needs an exponent q")

    point_jets = _map_ordered(lambda x: eval_jet3(f, x), d.points)
    f3 = []
    for x, jet in zip(d.points, point_jets):
        mag = abs(jet.d3)
        if not (math.isfinite(mag) and mag > 0.0):
            raise NonPositiveThirdDerivative(x, jet.d3)
        f3.append(mag)

    mid_jets = _map_ordered(lambda m: eval_jet3(f, m), d.midpoints())

    pairs = list(zip(d.points, d.points[1:]))

    def one_interval(i: int) -> IntervalBound:
        lo, hi = pairs[i]
        e = _bounds.DerivEndpoints(f3a_abs=f3[i], f3b_abs=f3[i + 1],
                                   a=lo, b=hi)
        r = _bounds.ratio_pair(e)
        h = e.width
        if method == "thm1":
            return IntervalBound(lo, hi, h * _bounds.direct_bound(e),
                                 r.K, r.M, "thm1", None)
        if method == "thm2":
            return IntervalBound(lo, hi, h * _bounds.holder_bound(e, q),
                                 r.K, r.M, "thm2", q)
        if method == "thm3":
            return IntervalBound(lo, hi, h * _bounds.power_mean_bound(e, q),
                                 r.K, r.M, "thm3", q)
        report = _bounds.best_bound(e, q_grid)
        label = {"chi1": "thm1", "chi2": "thm2", "chi3": "thm3"}[
            report.argmin_label]
        best_q = {"thm1": None, "thm2": report.chi2_q,
                  "thm3": report.chi3_q}[label]
        return IntervalBound(lo, hi, h * report.min_value,
                             r.K, r.M, label, best_q)

    per_interval = tuple(_map_ordered(one_interval, range(len(pairs))))
    certified = math.fsum(ib.bound for ib in per_interval)

    widths = d.widths()
    mid_terms = [h * jet.d0 + h ** 3 / 24.0 * jet.d2
                 for h, jet in zip(widths, mid_jets)]
    plain = math.fsum(h * jet.d0 for h, jet in zip(widths, mid_jets))
    corrected = math.fsum(mid_terms)

    second_scale = max(1.0, max(abs(jet.d0) for jet in mid_jets))
    max_second = max(abs(jet.d2) for jet in mid_jets)
    heuristic = max_second > _MIDPOINT_RIGOROUS_TOL * second_scale

    return QuadResult(
        midpoint_sum=plain,
        corrected_sum=corrected,
        certified_bound=certified,
        per_interval=per_interval,
        method=method,
        midpoint_bound=certified,
        midpoint_bound_heuristic=heuristic,
    )


# --------------------------------------------------------------------------
# Reference integrator
# --------------------------------------------------------------------------

def _cc_weights(n: int) -> tuple[float, ...]:
    """Clenshaw-Curtis weights for the n+1 nodes cos(j*pi/n) on [-1, 1].

    Interpolatory weights from Chebyshev moments: expand the interpolant in
    T_k via the discrete cosine transform of type I and integrate it with
    the exact moments (integral of T_k over [-1,1] is 2/(1-k^2) for even k,
    zero for odd k).  n must be even.  All weights come out positive.
    """
    weights = []
    for j in range(n + 1):
        acc = 0.0
        for k in range(0, n + 1, 2):
            moment = 2.0 if k == 0 else 2.0 / (1.0 - k * k)
            edge = 0.5 if (k == 0 or k == n) else 1.0
            acc += edge * moment * math.cos(math.pi * k * j / n)
        w = 2.0 / n * acc
        if j == 0 or j == n:
            w *= 0.5
        weights.append(w)
    return tuple(weights)


_CC_FINE_N = 32
_CC_NODES = tuple(math.cos(math.pi * j / _CC_FINE_N)
                  for j in range(_CC_FINE_N + 1))
_CC_W_FINE = _cc_weights(_CC_FINE_N)
_CC_W_COARSE = _cc_weights(_CC_FINE_N // 2)
_ROUNDOFF_ULPS = 10.0 * sys.float_info.epsilon

#: No panel is accepted above this bisection depth, so every integral sees
#: at least four panels.  Guards against features narrow enough to slip
#: between the first panel's nodes and fool the error estimate.
_MIN_DEPTH = 2


def integrate_adaptive(fn: Callable[[float], float], a: float, b: float,
                       tol: float,
                       budget: int = DEFAULT_EVAL_BUDGET) -> float:
    """Adaptive bisection driver around the nested panel rule.

    Accepts a panel when |fine - coarse| fits the panel's width-proportional
    share of ``tol`` (or its rounding floor); otherwise bisects.  Panels are
    processed left to right and the accepted values are fsum-ed in that
    order, so results are bitwise deterministic.  Raises
    :class:`NonConvergence` once more than ``budget`` evaluations would be
    needed.
    """
    if not (math.isfinite(a) and math.isfinite(b) and a < b):
        raise BadInterval(f"need finite a < b, got [{a!r}, {b!r}]")
    span = b - a
    stack = [(a, b, 0)]
    pieces: list[float] = []
    evals = 0
    while stack:
        lo, hi, depth = stack.pop()
        if depth < _MIN_DEPTH:
            mid = 0.5 * (lo + hi)
            stack.append((mid, hi, depth + 1))  # pushed first, popped second
            stack.append((lo, mid, depth + 1))
            continue
        evals += len(_CC_NODES)
        if evals > budget:
            raise NonConvergence(budget)
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        values = [fn(mid + half * t) for t in _CC_NODES]
        fine = half * math.fsum(w * v for w, v in zip(_CC_W_FINE, values))
        coarse = half * math.fsum(w * v for w, v in
                                  zip(_CC_W_COARSE, values[::2]))
        err = abs(fine - coarse)
        magnitude = half * math.fsum(w * abs(v) for w, v in
                                     zip(_CC_W_FINE, values))
        floor = _ROUNDOFF_ULPS * magnitude
        if err <= tol * (hi - lo) / span or err <= floor:
            pieces.append(fine)
        else:
            stack.append((mid, hi, depth + 1))
            stack.append((lo, mid, depth + 1))
    return math.fsum(pieces)


def reference_integral(f: Node, a: float, b: float, tol: float = 1e-13,
                       budget: int = DEFAULT_EVAL_BUDGET) -> float:
    """High-accuracy integral of an expression, used as ground truth.

    ``tol`` below 1e-14 is rejected: that is the scheme's trust limit in
    double precision.
    """
    if not (tol >= 1e-14):
        raise ValueError(f"tol must be at least 1e-14, got {tol!r}")
    return integrate_adaptive(lambda x: evaluate(f, x), a, b, tol, budget)


# --------------------------------------------------------------------------
# The third-derivative kernel identity behind every bound
# --------------------------------------------------------------------------

def identity_residual(f: Node, a: float, b: float,
                      tol: float = 1e-13) -> float:
    """Residual of the integral identity that the bounds rest on.

    For three-times differentiable f, with h = b - a and m the midpoint,

        (1/h) * integral(f) - f(m) - (h^2/24) f''(m)
          =  (h^3/96) * ( I1 - I2 )

    where I1 = integral over [0,1] of t^3 f'''(b - t h/2) and I2 likewise at
    a + t h/2.  Both sides are evaluated with the reference integrator and
    their difference is returned; it should sit at rounding level for any
    smooth f, log-convex |f'''| or not.
    """
    if not (math.isfinite(a) and math.isfinite(b) and a < b):
        raise BadInterval(f"need finite a < b, got [{a!r}, {b!r}]")
    h = b - a
    m = 0.5 * (a + b)
    mean = integrate_adaptive(lambda x: evaluate(f, x), a, b, tol) / h
    jet = eval_jet3(f, m)
    lhs = mean - jet.d0 - h * h / 24.0 * jet.d2

    def kernel_from_b(t: float) -> float:
        return t ** 3 * eval_jet3(f, b - 0.5 * t * h).d3

    def kernel_from_a(t: float) -> float:
        return t ** 3 * eval_jet3(f, a + 0.5 * t * h).d3

    i1 = integrate_adaptive(kernel_from_b, 0.0, 1.0, tol)
    i2 = integrate_adaptive(kernel_from_a, 0.0, 1.0, tol)
    rhs = h ** 3 / 96.0 * (i1 - i2)
    return lhs - rhs


# --------------------------------------------------------------------------
# Certification loop
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CertifyOutcome:
    result: QuadResult
    n_final: int
    iterations: int


def certify(f: Node, a: float, b: float, tol: float, method: str = "best",
            q: float | None = None,
            q_grid: tuple[float, ...] | None = None,
            n_max: int = 2 ** 20) -> CertifyOutcome:
    """Double a uniform division until the certified bound meets ``tol``.

    Starts at one subinterval.  Raises :class:`ToleranceUnreachable`
    (carrying the best bound achieved) if n exceeds ``n_max`` first.
    """
    if not (math.isfinite(tol) and tol > 0.0):
        raise BadInterval(f"tolerance must be positive, got {tol!r}")
    best_seen = math.inf
    n = 1
    iterations = 0
    last_n = 1
    while n <= n_max:
        result = composite_bound(f, uniform_division(a, b, n),
                                 method=method, q=q, q_grid=q_grid)
        iterations += 1
        if result.certified_bound <= tol:
            return CertifyOutcome(result=result, n_final=n,
                                  iterations=iterations)
        best_seen = min(best_seen, result.certified_bound)
        last_n = n
        n *= 2
    raise ToleranceUnreachable(tol, best_seen, last_n)
