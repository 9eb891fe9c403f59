"""Scalar special-function kernel.

Provides the three pieces every distribution formula in this package rests
on: a Lanczos log-gamma, the modified Bessel function of the first kind by
its power series, and the three-parameter Mittag-Leffler function

    E(alpha, beta, gamma; z) = sum_r  poch(gamma, r) z^r / (r! Gamma(alpha r + beta))

summed through an escalation ladder: compensated double summation, then
double-double arithmetic when alternating-series cancellation eats more than
the double mantissa can carry, then adaptive multiprecision for the extreme
tail of the supported envelope.  Each tier estimates its own rounding error
from the running ratio sum|t_r| / |sum t_r| and hands off when the estimate
misses the requested tolerance.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from ._ddarith import (
    RGAMMA_XMAX,
    dd_add,
    dd_div,
    dd_mul,
    mul3,
    norm3,
    quick_two_sum,
    rgamma_scaled,
    to_dd,
    two_prod,
    two_sum,
)
from .errors import EvaluationOverflowError, InvalidParamError, NonConvergenceError

__all__ = ["MLSpec", "ml3", "bessel_i", "log_gamma", "log_pochhammer"]

_LN_SQRT_2PI = 0.9189385332046727417803297364056176398614
# Lanczos approximation, g = 7, nine coefficients.
_LANCZOS_G = 7.0
_LANCZOS_C = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

_ABS_Z_MAX = 50.0       # support envelope of the series ladder
_MP_DPS_CAP = 320       # multiprecision tier gives up beyond this


@functools.lru_cache(maxsize=1 << 16)
def log_gamma(x: float) -> float:
    """ln Gamma(x) for real x > 0.

    Lanczos approximation (g = 7, nine coefficients); absolute error below
    1e-14 * max(1, |value|).  Arguments in (0, 0.5) are lifted through
    ln Gamma(x) = ln Gamma(x + 1) - ln x.
    """
    x = float(x)
    if not (x > 0.0) or math.isinf(x):
        raise InvalidParamError(f"log_gamma requires finite x > 0, got {x!r}")
    shift = 0.0
    if x < 0.5:
        shift = -math.log(x)
        x += 1.0
    acc = _LANCZOS_C[0]
    for i in range(1, 9):
        acc += _LANCZOS_C[i] / (x - 1.0 + i)
    base = x + _LANCZOS_G - 0.5
    return shift + _LN_SQRT_2PI + (x - 0.5) * math.log(base) - base + math.log(acc)


def log_pochhammer(a: float, r: int) -> float:
    """ln of the rising factorial a (a+1) ... (a+r-1), a > 0, r >= 0."""
    if r < 0:
        raise InvalidParamError("log_pochhammer requires r >= 0")
    if r == 0:
        return 0.0
    if r <= 20:
        acc = 0.0
        for j in range(r):
            acc += math.log(a + j)
        return acc
    return log_gamma(a + r) - log_gamma(a)


def bessel_i(order: float, z: float, scaled: bool = False) -> float:
    """Modified Bessel function of the first kind by its power series.

    Parameters
    ----------
    order : float
        Nonnegative real order.
    z : float
        Nonnegative argument; the series envelope is calibrated for the
        desk scale z <= ~700.
    scaled : bool
        When True, return exp(-z) * I(order, z), which stays bounded for
        every argument in range.

    The sum has positive terms only, so accuracy is set by term rounding
    (relative error ~1e-14 or better).  Internally the summation switches to
    the exp(-z)-scaled form for z > 30; the unscaled value is recovered only
    while it is representable, otherwise the call raises
    EvaluationOverflowError.
    """
    order = float(order)
    z = float(z)
    if not (order >= 0.0) or not math.isfinite(order):
        raise InvalidParamError(f"bessel_i requires order >= 0, got {order!r}")
    if not (z >= 0.0) or not math.isfinite(z):
        raise InvalidParamError(f"bessel_i requires z >= 0, got {z!r}")
    if z == 0.0:
        return 1.0 if order == 0.0 else 0.0
    use_scale = scaled or z > 30.0
    q = 0.25 * z * z
    # anchor the sum at the largest term (index where the term ratio crosses 1)
    # so the scaled seed cannot underflow while the result is representable
    k0 = int(max(0.0, math.floor(0.5 * (math.sqrt(order * order + z * z) - order))))
    lt_peak = (
        (2.0 * k0 + order) * math.log(0.5 * z)
        - log_gamma(k0 + 1.0)
        - log_gamma(k0 + order + 1.0)
    )
    if use_scale:
        lt_peak -= z
    if lt_peak < -745.0:
        return 0.0
    t_peak = math.exp(lt_peak)
    s = t_peak
    t = t_peak
    converged = False
    for k in range(k0, k0 + 20000):
        ratio = q / ((k + 1.0) * (k + 1.0 + order))
        t *= ratio
        s += t
        if ratio < 1.0 and t <= s * 1e-18:
            converged = True
            break
    if not converged:
        raise NonConvergenceError(f"bessel_i series stalled at order={order}, z={z}")
    t = t_peak
    for k in range(k0, 0, -1):
        t *= (k + 0.0) * (k + order) / q
        s += t
        if t <= s * 1e-18:
            break
    if scaled:
        return s
    if not use_scale:
        return s
    if s <= 0.0:
        return 0.0
    ln_val = math.log(s) + z
    if ln_val > 709.78:
        raise EvaluationOverflowError(
            f"bessel_i({order}, {z}) exceeds the double range; request scaled=True"
        )
    return math.exp(ln_val)


@dataclass(frozen=True)
class MLSpec:
    """Parameter block for the three-parameter Mittag-Leffler function.

    alpha, beta, gamma are the series parameters (all positive reals;
    complex parameters are out of scope), rel_tol the target relative
    accuracy of the sum, max_terms the term budget.
    """

    alpha: float
    beta: float
    gamma: float = 1.0
    rel_tol: float = 1e-12
    max_terms: int = 10000

    def __post_init__(self) -> None:
        if not (0.0 < self.alpha <= 5.0) or not math.isfinite(self.alpha):
            raise InvalidParamError(f"alpha must lie in (0, 5], got {self.alpha!r}")
        if not (0.0 < self.beta <= 350.0) or not math.isfinite(self.beta):
            raise InvalidParamError(f"beta must lie in (0, 350], got {self.beta!r}")
        if not (0.0 < self.gamma <= 1e4) or not math.isfinite(self.gamma):
            raise InvalidParamError(f"gamma must lie in (0, 1e4], got {self.gamma!r}")
        if not (1e-15 <= self.rel_tol < 0.1):
            raise InvalidParamError(f"rel_tol must lie in [1e-15, 0.1), got {self.rel_tol!r}")
        if not (16 <= int(self.max_terms) <= 1_000_000):
            raise InvalidParamError(f"max_terms must lie in [16, 1e6], got {self.max_terms!r}")


def ml3(spec: MLSpec, z):
    """Evaluate the three-parameter Mittag-Leffler function.

    Parameters
    ----------
    spec : MLSpec
        Series parameters and accuracy targets.
    z : float or ndarray
        Argument(s), |z| <= 50.  An array input is evaluated by a shared
        term recurrence (Pochhammer ratio times a log-gamma scale) with
        per-element escalation of any entry whose rounding estimate misses
        rel_tol.

    Returns
    -------
    float or ndarray of float

    Raises
    ------
    NonConvergenceError
        Term budget exhausted, |z| beyond the support envelope, or
        cancellation beyond what the multiprecision tier will absorb.
    EvaluationOverflowError
        The value itself exceeds the double floating range.
    InvalidParamError
        Non-finite argument.
    """
    if np.ndim(z) > 0:
        return _ml3_array(spec, np.asarray(z, dtype=float))
    z = float(z)
    if not math.isfinite(z):
        raise InvalidParamError(f"ml3 requires finite z, got {z!r}")
    if abs(z) > _ABS_Z_MAX:
        raise NonConvergenceError(
            f"|z| = {abs(z)} outside the supported envelope |z| <= {_ABS_Z_MAX}"
        )
    if z == 0.0:
        return math.exp(-log_gamma(spec.beta))
    value, ok, loss = _ml3_double(spec, z)
    if ok:
        return value
    return _ml3_escalate(spec, z)


def _ml3_escalate(spec: MLSpec, z: float) -> float:
    """Tiers past compensated double: double-double, then multiprecision."""
    value, ok, loss = _ml3_dd(spec, z)
    if ok:
        return value
    return _ml3_mp(spec, z, loss)


def _tail_bound(abs_t: float, ratio: float) -> float:
    if ratio >= 0.98:
        return math.inf
    if ratio <= 0.9:
        return 1.5 * abs_t * ratio / (1.0 - ratio)
    return 25.0 * abs_t


def _ml3_double(spec: MLSpec, z: float) -> tuple[float, bool, float]:
    """Compensated double summation.  Returns (value, accurate, loss_digits)."""
    a, b, g = spec.alpha, spec.beta, spec.gamma
    neg = z < 0.0
    az = abs(z)
    lz = math.log(az)
    lgg = log_gamma(g)
    s = 0.0
    comp = 0.0
    sum_abs = 0.0
    max_t = 0.0
    wsum = 0.0     # sum |t_r| * log-magnitude, drives the rounding estimate
    prev_abs = 0.0
    past_peak = False
    coeff = 1.0    # poch(g, r) / r! while r <= 20
    zpow = 1.0
    converged = False
    r = 0
    while r < spec.max_terms:
        if r <= 20:
            if r > 0:
                coeff *= (g + r - 1.0) / r
                zpow *= az
            lgab = log_gamma(a * r + b)
            abs_t = coeff * zpow * math.exp(-lgab)
            mag = 25.0 + abs(lgab)
        else:
            lp = log_gamma(g + r) - lgg
            lrf = log_gamma(r + 1.0)
            lgab = log_gamma(a * r + b)
            lt = lp - lrf - lgab + r * lz
            if lt > 705.0:
                if not neg:
                    raise EvaluationOverflowError(
                        f"ml3 value exceeds the double range at z={z}"
                    )
                return math.nan, False, math.inf
            abs_t = math.exp(lt)
            mag = abs(lp) + lrf + abs(lgab) + abs(r * lz) + abs(lgg)
        t = -abs_t if (neg and r % 2 == 1) else abs_t
        y = t - comp
        tmp = s + y
        comp = (tmp - s) - y
        s = tmp
        sum_abs += abs_t
        wsum += abs_t * mag
        if abs_t < max_t:
            past_peak = True
        else:
            max_t = abs_t
        if past_peak and prev_abs > 0.0:
            ratio = abs_t / prev_abs
            thresh = 0.05 * spec.rel_tol * max(abs(s), max_t * 1e-16)
            if _tail_bound(abs_t, ratio) <= thresh:
                converged = True
                break
        prev_abs = abs_t
        r += 1
    if not converged:
        raise NonConvergenceError(
            f"ml3 did not meet rel_tol={spec.rel_tol} within max_terms={spec.max_terms}"
        )
    denom = abs(s) if s != 0.0 else max_t * 1e-17 + 5e-324
    amp = sum_abs / denom
    est = 2.2e-16 * wsum / denom + 1e-15 * amp
    ok = est <= 0.4 * spec.rel_tol and amp <= 1e6
    return s, ok, math.log10(amp) if amp > 1.0 else 0.0


_rgamma_cached = functools.lru_cache(maxsize=1 << 16)(rgamma_scaled)


def _ml3_dd(spec: MLSpec, z: float) -> tuple[float, bool, float]:
    """Double-double summation with exact-ratio term recurrence."""
    a, b, g = spec.alpha, spec.beta, spec.gamma
    zm = norm3(z, 0.0, 0)
    coeff = (1.0, 0.0, 0)   # poch(g, r) / r!, scaled pair
    zpow = (1.0, 0.0, 0)
    sh, sl = 0.0, 0.0
    sum_abs = 0.0
    max_t = 0.0
    prev_abs = 0.0
    past_peak = False
    converged = False
    r = 0
    plain = g == 1.0    # poch(1, r) / r! is exactly one
    while r < spec.max_terms:
        if r > 0:
            if not plain:
                gh, gl = two_sum(g, float(r - 1))
                ch, cl = dd_mul(coeff[0], coeff[1], gh, gl)
                ch, cl = dd_div(ch, cl, float(r), 0.0)
                coeff = norm3(ch, cl, coeff[2])
            zpow = mul3(zpow, zm)
        # gamma argument carried as a double-double: its rounding otherwise
        # feeds psi(arg)-amplified noise into every term
        ph, pl = two_prod(a, float(r))
        argh, at = two_sum(ph, b)
        argh, argl = quick_two_sum(argh, at + pl)
        if argh > RGAMMA_XMAX:
            # past the reciprocal-gamma domain: fine only if the tail is
            # already negligible, otherwise this tier cannot finish the sum
            converged = past_peak and prev_abs <= 0.05 * max(
                spec.rel_tol * abs(sh), max_t * 1e-33
            )
            break
        term3 = mul3(mul3(coeff, zpow), _rgamma_cached(argh, argl))
        if term3[2] > 1000:
            if z > 0.0:
                raise EvaluationOverflowError(
                    f"ml3 value exceeds the double range at z={z}"
                )
            return math.nan, False, math.inf
        th, tl = to_dd(*term3)
        sh, sl = dd_add(sh, sl, th, tl)
        abs_t = abs(th)
        sum_abs += abs_t
        if abs_t < max_t:
            past_peak = True
        else:
            max_t = abs_t
        if past_peak and prev_abs > 0.0 and abs_t > 0.0:
            ratio = abs_t / prev_abs
            thresh = 0.05 * max(spec.rel_tol * abs(sh), max_t * 1e-33)
            if _tail_bound(abs_t, ratio) <= thresh:
                converged = True
                break
        if abs_t == 0.0 and past_peak:
            converged = True
            break
        prev_abs = abs_t
        r += 1
    value = sh + sl
    if not converged:
        return value, False, math.log10(max(sum_abs / max(abs(value), 5e-324), 1.0))
    denom = abs(value) if value != 0.0 else max_t * 1e-32 + 5e-324
    amp = sum_abs / denom
    est = 6e-30 * amp
    ok = est <= 0.6 * spec.rel_tol
    return value, ok, math.log10(amp) if amp > 1.0 else 0.0


def _ml3_mp(spec: MLSpec, z: float, loss_guess: float) -> float:
    """Adaptive multiprecision summation for the extreme-cancellation tail."""
    import mpmath as mp

    digits_needed = max(2, int(math.ceil(-math.log10(spec.rel_tol))))
    loss = 10.0 if not math.isfinite(loss_guess) else loss_guess
    if z < 0.0:
        # alternating-series cancellation grows like 0.4343 |z|^(1/alpha)
        loss = max(loss, 0.4343 * abs(z) ** (1.0 / spec.alpha))
    dps = int(loss) + digits_needed + 25
    for _ in range(5):
        if dps > _MP_DPS_CAP:
            raise NonConvergenceError(
                f"ml3 cancellation at z={z} exceeds the multiprecision envelope "
                f"(would need ~{dps} digits, cap {_MP_DPS_CAP})"
            )
        with mp.workdps(dps):
            am, bm, gm, zm = (mp.mpf(v) for v in (spec.alpha, spec.beta, spec.gamma, z))
            s = mp.mpf(0)
            max_t = mp.mpf(0)
            prev = mp.mpf(0)
            past_peak = False
            converged = False
            stop = mp.mpf(10) ** (-(digits_needed + 8))
            term = mp.mpf(1) / mp.gamma(bm)
            r = 0
            while r < spec.max_terms:
                s += term
                at = abs(term)
                if at < max_t:
                    past_peak = True
                else:
                    max_t = at
                if past_peak and prev > 0:
                    ratio = at / prev
                    if ratio < mp.mpf("0.98") and 1.5 * at * ratio / (1 - ratio) <= stop * max(
                        abs(s), max_t * mp.mpf(10) ** (-dps + 4)
                    ):
                        converged = True
                        break
                prev = at
                term = term * zm * (gm + r) / (r + 1) * mp.gamma(am * r + bm) / mp.gamma(
                    am * (r + 1) + bm
                )
                r += 1
            if not converged:
                raise NonConvergenceError(
                    f"ml3 did not meet rel_tol={spec.rel_tol} within "
                    f"max_terms={spec.max_terms}"
                )
            if s == 0:
                observed = dps
            else:
                observed = float(mp.log10(max_t / abs(s))) if max_t > abs(s) else 0.0
            if dps - observed >= digits_needed + 6:
                value = float(s)
                break
            # a noise-dominated round reports observed ~ dps; grow firmly
            dps = max(int(observed) + digits_needed + 25, 2 * dps)
    else:
        raise NonConvergenceError(f"ml3 multiprecision tier failed to settle at z={z}")
    if math.isinf(value):
        raise EvaluationOverflowError(f"ml3 value exceeds the double range at z={z}")
    return value


# Series coefficients depend only on (alpha, beta, gamma), so batched small-|z|
# evaluation can reuse them across calls as a plain polynomial.
_COEFF_CACHE: dict = {}
_POLY_ZMAX = 4.0        # fast path only below this |z|
_POLY_RMAX = 420        # and only while raw powers of z stay in double range


def _ml3_coeff_entry(a: float, b: float, g: float) -> dict:
    key = (a, b, g)
    entry = _COEFF_CACHE.get(key)
    if entry is None:
        entry = {"c": np.empty(0), "w": np.empty(0), "capped": False}
        _COEFF_CACHE[key] = entry
    return entry


def _ml3_coeff_grow(entry: dict, a: float, b: float, g: float, need: int) -> None:
    """Extend the cached coefficient table to `need` terms if possible."""
    have = entry["c"].size
    if entry["capped"] or have >= need:
        return
    c = np.empty(need)
    w = np.empty(need)
    c[:have] = entry["c"]
    w[:have] = entry["w"]
    for r in range(have, need):
        lp = log_pochhammer(g, r)
        lr = log_gamma(float(r + 1))
        lab = log_gamma(a * r + b)
        height = lp - lr - lab
        if height > 700.0:
            # coefficient would overflow a double; the loop tier handles this
            entry["c"] = c[:r]
            entry["w"] = w[:r]
            entry["capped"] = True
            return
        c[r] = math.exp(height)
        # construction rounding plus one multiply per power-chain step
        w[r] = (abs(lp) + lr + abs(lab) + 8.0 + r) * 2.2e-16
    entry["c"] = c
    entry["w"] = w


def _ml3_poly_cutoff(entry: dict, zmax: float, rel_tol: float) -> int | None:
    """Truncation index whose tail is provably negligible, or None."""
    c = entry["c"]
    n = c.size
    if n < 2:
        return None
    if zmax == 0.0:
        return 1
    lt = np.log(np.maximum(c, 5e-324)) + np.arange(n) * math.log(zmax)
    peak = int(np.argmax(lt))
    target = lt[peak] + math.log(1e-3 * rel_tol)
    past = np.nonzero((np.arange(n) > peak) & (lt <= target))[0]
    if past.size == 0:
        return None
    cut = int(past[0]) + 1
    # one spare coefficient is needed for the geometric tail ratio
    return cut if cut < n else None


def _ml3_poly_eval(
    spec: MLSpec, flat: np.ndarray, entry: dict, cut: int
) -> np.ndarray | None:
    """Evaluate the cached-coefficient polynomial; None if uncertifiable."""
    c = entry["c"]
    w = entry["w"]
    n = flat.size
    out = np.empty(n)
    chunk = max(1, int(4e6) // cut)
    rel_tol = spec.rel_tol
    for lo in range(0, n, chunk):
        z = flat[lo : lo + chunk]
        m = z.size
        powers = np.empty((cut, m))
        powers[0] = 1.0
        if cut > 1:
            np.cumprod(np.broadcast_to(z, (cut - 1, m)), axis=0, out=powers[1:])
        terms = c[:cut, None] * powers
        s = terms.sum(axis=0)
        np.abs(terms, out=terms)
        sum_abs = terms.sum(axis=0)
        max_t = terms.max(axis=0)
        wsum = (w[:cut, None] * terms).sum(axis=0)
        # geometric tail bound from the first dropped term
        q = np.abs(z) * (c[cut] / c[cut - 1])
        last = terms[cut - 1] * (c[cut] / c[cut - 1]) * np.abs(z)
        tail = np.where(q < 0.9, last / np.maximum(1.0 - q, 0.1), np.inf)
        floor = np.maximum(np.abs(s), max_t * 1e-16)
        denom = np.where(s != 0.0, np.abs(s), max_t * 1e-17 + 5e-324)
        est = wsum / denom + (5.0 + math.log2(cut)) * 2.2e-16 * sum_abs / denom
        bad = (
            (est > 0.4 * rel_tol)
            | (sum_abs > 1e6 * denom)
            | ~np.isfinite(s)
            | (tail > 0.03 * rel_tol * floor)
        )
        if np.any(bad):
            s = s.copy()
            for i in np.nonzero(bad)[0]:
                s[i] = _ml3_escalate(spec, float(z[i]))
        out[lo : lo + chunk] = s
    return out


def _ml3_poly_try(spec: MLSpec, flat: np.ndarray, zmax: float) -> np.ndarray | None:
    """Fast batched evaluation for small |z|; None means use the loop tier."""
    entry = _ml3_coeff_entry(spec.alpha, spec.beta, spec.gamma)
    # quantize zmax upward so the cutoff can be cached per bucket; a cutoff
    # chosen for a larger argument stays valid below it
    if zmax > 0.0:
        bucket = math.ceil(4.0 * math.log2(zmax))
        ztop = min(2.0 ** (0.25 * bucket), _POLY_ZMAX)
    else:
        bucket = None
        ztop = 0.0
    key = (bucket, spec.rel_tol)
    cut = entry.setdefault("cuts", {}).get(key)
    if cut is None:
        need = 48
        while True:
            _ml3_coeff_grow(entry, spec.alpha, spec.beta, spec.gamma, need)
            cut = _ml3_poly_cutoff(entry, ztop, spec.rel_tol)
            if cut is not None:
                entry["cuts"][key] = cut
                break
            if entry["capped"] or entry["c"].size >= _POLY_RMAX or need >= _POLY_RMAX:
                return None
            need = min(2 * need, _POLY_RMAX)
    if cut > spec.max_terms:
        return None
    return _ml3_poly_eval(spec, flat, entry, cut)


def _ml3_array(spec: MLSpec, zarr: np.ndarray) -> np.ndarray:
    """Shared-recurrence evaluation over an argument array."""
    flat = np.ravel(zarr).astype(float)
    if flat.size == 0:
        return np.empty(zarr.shape, dtype=float)
    if not np.all(np.isfinite(flat)):
        raise InvalidParamError("ml3 requires finite z values")
    zmax = float(np.max(np.abs(flat)))
    if zmax > _ABS_Z_MAX:
        raise NonConvergenceError(
            f"max |z| = {zmax} outside the supported envelope |z| <= {_ABS_Z_MAX}"
        )
    if zmax <= _POLY_ZMAX:
        fast = _ml3_poly_try(spec, flat, zmax)
        if fast is not None:
            return fast.reshape(zarr.shape)
    a, b, g = spec.alpha, spec.beta, spec.gamma
    lg_b = log_gamma(b)
    n = flat.size
    s = np.zeros(n)
    comp = np.zeros(n)
    sum_abs = np.zeros(n)
    max_t = np.zeros(n)
    wsum = np.zeros(n)
    done = np.zeros(n, dtype=bool)
    t = np.full(n, math.exp(-lg_b) if lg_b < 700.0 else 0.0)
    # accumulated relative rounding of the running term
    cum_eps = 3e-15
    lg_hi = log_gamma(b)
    r = 0
    while r < spec.max_terms:
        abs_t = np.abs(t)
        y = t - comp
        tmp = s + y
        comp = (tmp - s) - y
        s = tmp
        sum_abs += abs_t
        wsum += abs_t * cum_eps
        np.maximum(max_t, abs_t, out=max_t)
        lg_lo = lg_hi
        lg_hi = log_gamma(a * (r + 1) + b)
        fac = (g + r) / (r + 1.0) * math.exp(lg_lo - lg_hi)
        cum_eps += 2.2e-16 * (abs(lg_lo) + abs(lg_hi) + 3.0)
        rho = np.abs(flat) * fac
        settled = rho < 0.95
        if np.any(settled):
            tail = np.where(settled, abs_t * rho / np.where(settled, 1.0 - rho, 1.0), np.inf)
            floor = np.maximum(np.abs(s), max_t * 1e-16)
            done |= settled & (tail <= 0.03 * spec.rel_tol * floor)
            if np.all(done):
                break
        t = t * flat * fac
        r += 1
    if not np.all(done):
        raise NonConvergenceError(
            f"ml3 array evaluation did not meet rel_tol={spec.rel_tol} within "
            f"max_terms={spec.max_terms}"
        )
    denom = np.where(s != 0.0, np.abs(s), max_t * 1e-17 + 5e-324)
    est = wsum / denom + 1e-15 * sum_abs / denom
    bad = (est > 0.4 * spec.rel_tol) | (sum_abs > 1e6 * denom) | ~np.isfinite(s)
    if np.any(bad):
        out = s.copy()
        for i in np.nonzero(bad)[0]:
            out[i] = _ml3_escalate(spec, float(flat[i]))
        s = out
    return s.reshape(zarr.shape)
