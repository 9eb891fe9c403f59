"""Closed-form laws of the fractionally slowed counting process.

The process counts renewal events whose interarrival survival follows a
one-parameter Mittag-Leffler decay with order ``nu`` in (0, 1].  At
``nu = 1`` every quantity here collapses to its classical Poisson
counterpart, which the tests exploit heavily.

All probabilities are returned as plain floats.  The two-time joint law
needs iterated numerical integration; when the requested quadrature
tolerance cannot be certified the value is still returned and a
:class:`~fracpoisson.errors.ToleranceNotMet` warning is emitted.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParamError, ToleranceNotMet
from .quadrature import QuadSpec, integrate
from .special import MLSpec, ml3

__all__ = [
    "FppParams",
    "BivariateQuery",
    "pmf",
    "survival",
    "interarrival_density",
    "waiting_time_density",
    "conditional_binomial",
    "conditional_trinomial",
    "bivariate_pmf",
]

# accuracy target for every Mittag-Leffler evaluation feeding a probability
_ML_RTOL = 1e-12


@dataclass(frozen=True)
class FppParams:
    """Rate and order of the counting process.

    rate is the event intensity (classical Poisson rate when order is 1),
    order the fractional exponent governing the heavy interarrival tail.
    """

    rate: float
    order: float = 1.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.rate) and self.rate > 0.0):
            raise InvalidParamError(f"rate must be finite and > 0, got {self.rate!r}")
        if not (0.0 < self.order <= 1.0):
            raise InvalidParamError(f"order must lie in (0, 1], got {self.order!r}")


@dataclass(frozen=True)
class BivariateQuery:
    """Joint evaluation request: k events by time s and r events by time t.

    Requires 0 < s <= t and integer counts 0 <= k <= r.  quad controls the
    outer integration; the inner integral runs one decade tighter.
    """

    s: float
    t: float
    k: int
    r: int
    quad: QuadSpec = field(default_factory=QuadSpec)

    def __post_init__(self) -> None:
        if not (math.isfinite(self.s) and math.isfinite(self.t)):
            raise InvalidParamError("times must be finite")
        if not (0.0 < self.s <= self.t):
            raise InvalidParamError(
                f"need 0 < s <= t, got s={self.s!r}, t={self.t!r}"
            )
        for name, value in (("k", self.k), ("r", self.r)):
            if int(value) != value:
                raise InvalidParamError(f"{name} must be an integer, got {value!r}")
        if not (0 <= self.k <= self.r):
            raise InvalidParamError(
                f"need 0 <= k <= r, got k={self.k!r}, r={self.r!r}"
            )


def _check_count(k, minimum: int, name: str = "k") -> int:
    if int(k) != k or k < minimum:
        raise InvalidParamError(f"{name} must be an integer >= {minimum}, got {k!r}")
    return int(k)


def pmf(params: FppParams, t: float, k: int) -> float:
    """Probability of exactly k events by time t.

    t = 0 is the degenerate point mass at k = 0.  For order 1 this is the
    Poisson pmf exp(-rate*t) (rate*t)^k / k!.
    """
    k = _check_count(k, 0)
    if not (math.isfinite(t) and t >= 0.0):
        raise InvalidParamError(f"t must be finite and >= 0, got {t!r}")
    if t == 0.0:
        return 1.0 if k == 0 else 0.0
    nu = params.order
    x = params.rate * t**nu
    spec = MLSpec(nu, nu * k + 1.0, float(k + 1), rel_tol=_ML_RTOL)
    value = x**k * ml3(spec, -x)
    return min(max(value, 0.0), 1.0)


def survival(params: FppParams, t: float) -> float:
    """Probability that no event has occurred by time t."""
    if not (math.isfinite(t) and t >= 0.0):
        raise InvalidParamError(f"t must be finite and >= 0, got {t!r}")
    if t == 0.0:
        return 1.0
    nu = params.order
    value = ml3(MLSpec(nu, 1.0, rel_tol=_ML_RTOL), -params.rate * t**nu)
    return min(max(value, 0.0), 1.0)


def interarrival_density(params: FppParams, s: float) -> float:
    """Density of the gap between consecutive events, s > 0.

    Heavy-tailed for order < 1 with a power blow-up at s = 0; plain
    exponential density at order 1.
    """
    if not (math.isfinite(s) and s > 0.0):
        raise InvalidParamError(f"s must be finite and > 0, got {s!r}")
    lam = params.rate
    nu = params.order
    spec = MLSpec(nu, nu, rel_tol=_ML_RTOL)
    return lam * s ** (nu - 1.0) * ml3(spec, -lam * s**nu)


def waiting_time_density(params: FppParams, k: int, s: float) -> float:
    """Density of the arrival epoch of the k-th event, k >= 1, s > 0.

    Erlang(k, rate) at order 1.
    """
    k = _check_count(k, 1)
    if not (math.isfinite(s) and s > 0.0):
        raise InvalidParamError(f"s must be finite and > 0, got {s!r}")
    lam = params.rate
    nu = params.order
    spec = MLSpec(nu, nu * k, float(k), rel_tol=_ML_RTOL)
    return lam**k * s ** (nu * k - 1.0) * ml3(spec, -lam * s**nu)


def conditional_binomial(n: int, s: float, t: float, r: int) -> float:
    """P(r of the n events counted by t had already happened by s < t.

    Given n events by time t the earlier count is binomial(n, s/t)
    regardless of rate and order, so no process parameters appear.
    """
    n = _check_count(n, 0, "n")
    r = _check_count(r, 0, "r")
    if r > n:
        raise InvalidParamError(f"need r <= n, got r={r}, n={n}")
    if not (math.isfinite(s) and math.isfinite(t) and 0.0 <= s < t):
        raise InvalidParamError(f"need 0 <= s < t, got s={s!r}, t={t!r}")
    p = s / t
    return math.comb(n, r) * p**r * (1.0 - p) ** (n - r)


def conditional_trinomial(
    n: int, s: float, w: float, t: float, h: int, k: int
) -> float:
    """Joint law of the counts at two interior times given n events by t.

    Given n events by time t and 0 < s < w < t, the pair (count by s,
    count by w) is trinomial with cell probabilities s/t, (w-s)/t,
    (t-w)/t; h and k are the respective counts, 0 <= h <= k <= n.
    """
    n = _check_count(n, 0, "n")
    h = _check_count(h, 0, "h")
    k = _check_count(k, 0, "k")
    if not (0 <= h <= k <= n):
        raise InvalidParamError(f"need 0 <= h <= k <= n, got h={h}, k={k}, n={n}")
    if not (math.isfinite(s) and math.isfinite(w) and math.isfinite(t)):
        raise InvalidParamError("times must be finite")
    if not (0.0 < s < w < t):
        raise InvalidParamError(
            f"need 0 < s < w < t, got s={s!r}, w={w!r}, t={t!r}"
        )
    coeff = math.comb(n, k) * math.comb(k, h)
    return coeff * s**h * (w - s) ** (k - h) * (t - w) ** (n - k) / t**n


def bivariate_pmf(params: FppParams, query: BivariateQuery) -> float:
    """Joint probability of k events by s and r events by t, s <= t.

    Decomposes over the epoch w of the k-th event and the gap y to the
    next one; the remaining r - k - 1 events must then fall inside what
    is left of (0, t].  The power singularities of the epoch density at
    w = 0 and of the gap density at y = 0 are absorbed analytically:
    the outer integral declares its endpoint weight, the inner one is
    transformed with u = y^order so the gap weight disappears.

    Emits ToleranceNotMet (value still returned) when any quadrature
    level fails to certify its tolerance.
    """
    lam = params.rate
    nu = params.order
    s, t, k, r = query.s, query.t, int(query.k), int(query.r)

    if s == t:
        return pmf(params, t, k) if k == r else 0.0
    if r == 0:
        return survival(params, t)

    outer_spec = query.quad
    inner_spec = QuadSpec(
        rel_tol=max(outer_spec.rel_tol * 0.1, 1e-13),
        abs_tol=outer_spec.abs_tol * 0.1,
        max_depth=outer_spec.max_depth,
    )
    inter = MLSpec(nu, nu, rel_tol=_ML_RTOL)
    surv = MLSpec(nu, 1.0, rel_tol=_ML_RTOL)
    certified = True

    j = r - k - 1  # events to place strictly after the (k+1)-th
    if j > 0:
        tail_spec = MLSpec(nu, nu * j + 1.0, float(j + 1), rel_tol=_ML_RTOL)

    def gap_and_tail(u: np.ndarray, w: float) -> np.ndarray:
        # integrand after u = y^order: gap density (weight absorbed) times
        # the probability of j further events in the remaining time
        y = u ** (1.0 / nu)
        rem = np.maximum((t - w) - y, 0.0)
        fv = ml3(inter, -lam * u) / nu
        if j == 0:
            return fv * ml3(surv, -lam * rem**nu)
        return fv * rem ** (nu * j) * ml3(tail_spec, -lam * rem**nu)

    if k == 0:
        res = integrate(lambda u: gap_and_tail(u, 0.0), s**nu, t**nu, outer_spec)
        value = lam**r * res.value
        certified = res.converged
    else:
        epoch = MLSpec(nu, nu * k, float(k), rel_tol=_ML_RTOL)
        p = nu * k  # left endpoint weight exponent of the epoch density

        if r == k:
            # no event in (w, t]: epoch density times survival of the gap
            def f(w: np.ndarray) -> np.ndarray:
                fv = ml3(epoch, -lam * w**nu) * ml3(surv, -lam * (t - w) ** nu)
                if p > 1.0:
                    fv = fv * w ** (p - 1.0)
                return fv

        else:

            def f(w: np.ndarray) -> np.ndarray:
                nonlocal certified
                inner = np.empty_like(w)
                for i, wi in enumerate(w):
                    res = integrate(
                        lambda u: gap_and_tail(u, wi),
                        (s - wi) ** nu,
                        (t - wi) ** nu,
                        inner_spec,
                    )
                    if not res.converged:
                        certified = False
                    inner[i] = res.value
                fv = ml3(epoch, -lam * w**nu) * inner
                if p > 1.0:
                    fv = fv * w ** (p - 1.0)
                return fv

        spec = outer_spec
        if p < 1.0:
            spec = QuadSpec(
                rel_tol=outer_spec.rel_tol,
                abs_tol=outer_spec.abs_tol,
                max_depth=outer_spec.max_depth,
                singular_left_exponent=p,
            )
        res = integrate(f, 0.0, s, spec)
        value = lam**r * res.value
        certified = certified and res.converged

    if not certified:
        warnings.warn(
            f"joint pmf at s={s}, t={t}, k={k}, r={r} returned without "
            f"certified tolerance {outer_spec.rel_tol:g}",
            ToleranceNotMet,
            stacklevel=2,
        )
    return max(value, 0.0)
