"""Closed-form moments of the fractional integral of the counting
process, paired with the Monte Carlo estimators that verify them.

Unconditional moments come in two strengths: the mean of the fractional
integral is closed form for every order of the process, while the
variance is closed form only when the process is classical Poisson.
Conditioning on the count at the right endpoint makes everything
Poisson-like again (given n events by t the epochs are ordered
uniforms), so the conditional family below holds with n free.

verify_moment runs the matching simulation estimator and returns a
MomentReport carrying the raw z score; thresholds are the caller's
business, not this module's.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import FppParams, _check_count
from .errors import EmptyInputError, InvalidParamError
from .fracint import FracIntegralSpec, _rl_chunk, rl_integral_mc_moments
from .simulate import SimConfig, conditional_jump_times, iter_path_chunks

__all__ = [
    "MomentReport",
    "mean_frac_integral",
    "var_frac_integral_poisson",
    "second_moment_frac_integral_poisson",
    "cond_mean_frac_integral",
    "cond_second_moment_frac_integral",
    "cond_var_frac_integral",
    "cond_mixed_moment_poisson",
    "cond_mean_integrated_power",
    "mean_integrated_power",
    "verify_moment",
]


@dataclass(frozen=True)
class MomentReport:
    """One verified moment: its closed form, the MC estimate, and the gap.

    analytic is None when no closed form exists; z_score is then None as
    well.  Otherwise z_score = (mc_estimate - analytic) / mc_std_error.
    """

    name: str
    analytic: float | None
    mc_estimate: float
    mc_std_error: float
    n_samples: int
    z_score: float | None

    def __post_init__(self) -> None:
        if not self.name:
            raise InvalidParamError("name must be a nonempty string")
        if int(self.n_samples) != self.n_samples or self.n_samples < 1:
            raise InvalidParamError(
                f"n_samples must be a positive integer, got {self.n_samples!r}"
            )
        if self.mc_std_error < 0.0:
            raise InvalidParamError(
                f"mc_std_error must be nonnegative, got {self.mc_std_error!r}"
            )

    @classmethod
    def from_mc(
        cls,
        name: str,
        analytic: float | None,
        mc_estimate: float,
        mc_std_error: float,
        n_samples: int,
    ) -> "MomentReport":
        """Build a report, deriving the z score from the other fields."""
        if analytic is None:
            z = None
        elif math.isnan(mc_std_error) or math.isnan(mc_estimate):
            z = float("nan")
        elif mc_std_error > 0.0:
            z = (mc_estimate - analytic) / mc_std_error
        elif mc_estimate == analytic:
            z = 0.0
        else:
            # degenerate sample with zero spread but a real discrepancy
            z = math.copysign(math.inf, mc_estimate - analytic)
        return cls(
            name=name,
            analytic=analytic,
            mc_estimate=mc_estimate,
            mc_std_error=mc_std_error,
            n_samples=n_samples,
            z_score=z,
        )


def _check_positive(x, name: str):
    if not (math.isfinite(x) and x > 0):
        raise InvalidParamError(f"{name} must be finite and > 0, got {x!r}")
    return x


def _check_rate(lam, name: str = "rate"):
    # zero is allowed here: the vanishing-rate limit of every moment is 0
    if not (math.isfinite(lam) and lam >= 0):
        raise InvalidParamError(f"{name} must be finite and >= 0, got {lam!r}")
    return lam


def mean_frac_integral(params: FppParams, spec: FracIntegralSpec) -> float:
    """Mean of the order-alpha fractional integral of the process at t.

    rate * t**(alpha + order) / Gamma(alpha + order + 1); at
    alpha = order = 1 this is the familiar rate * t**2 / 2.
    """
    p = spec.alpha + params.order
    return params.rate * spec.t**p / math.gamma(p + 1.0)


def var_frac_integral_poisson(rate: float, alpha: float, t: float) -> float:
    """Variance of the fractional integral of a classical Poisson process.

    rate * t**(2*alpha + 1) / ((2*alpha + 1) * Gamma(alpha + 1)**2); only
    the order-1 process admits this closed form.
    """
    _check_rate(rate)
    _check_positive(alpha, "alpha")
    _check_positive(t, "t")
    g = math.gamma(alpha + 1.0)
    return rate * t ** (2.0 * alpha + 1.0) / ((2.0 * alpha + 1.0) * g * g)


def second_moment_frac_integral_poisson(rate: float, alpha: float, t: float) -> float:
    """Raw second moment of the Poisson-case fractional integral."""
    _check_rate(rate)
    _check_positive(alpha, "alpha")
    _check_positive(t, "t")
    g1 = math.gamma(alpha + 1.0)
    g2 = math.gamma(alpha + 2.0)
    return rate * t ** (2.0 * alpha + 1.0) / (
        (2.0 * alpha + 1.0) * g1 * g1
    ) + rate * rate * t ** (2.0 * alpha + 2.0) / (g2 * g2)


def cond_mean_frac_integral(n: int, alpha: float, t: float) -> float:
    """Mean of the fractional integral given n events by time t.

    n * t**alpha / Gamma(alpha + 2): each of the n epochs is uniform on
    (0, t) given the count, whatever the order of the process.  At
    alpha = 1 this is n * t / 2.
    """
    n = _check_count(n, 0, "n")
    _check_positive(alpha, "alpha")
    _check_positive(t, "t")
    return n * t**alpha / math.gamma(alpha + 2.0)


def cond_second_moment_frac_integral(n: int, alpha: float, t: float) -> float:
    """Raw second moment of the fractional integral given n events by t.

    The diagonal term couples each epoch with itself, the cross term the
    n * (n - 1) ordered pairs of distinct uniform epochs.
    """
    n = _check_count(n, 0, "n")
    _check_positive(alpha, "alpha")
    _check_positive(t, "t")
    diag = (
        2.0
        * n
        * t ** (2.0 * alpha)
        * math.gamma(2.0 * alpha)
        / (alpha * math.gamma(alpha) ** 2 * math.gamma(2.0 * alpha + 2.0))
    )
    cross = n * (n - 1) * t ** (2.0 * alpha) / math.gamma(alpha + 2.0) ** 2
    return diag + cross


def cond_var_frac_integral(n: int, alpha: float, t: float) -> float:
    """Variance of the fractional integral given n events by time t.

    n * t**(2*alpha) * alpha**2 / ((2*alpha + 1) * Gamma(alpha + 2)**2),
    which is n * t**2 / 12 at alpha = 1.
    """
    n = _check_count(n, 0, "n")
    _check_positive(alpha, "alpha")
    _check_positive(t, "t")
    g = math.gamma(alpha + 2.0)
    return n * t ** (2.0 * alpha) * alpha * alpha / ((2.0 * alpha + 1.0) * g * g)


def cond_mixed_moment_poisson(n: int, s, w, t):
    """E[N(s) N(w)] given N(t) = n, for 0 < s <= w < t.

    n*s/t + n*(n-1)*s*w/t**2.  The diagonal s = w is admitted because it
    yields the conditional second moment of the count at s.  Exact
    rational inputs pass through exactly.
    """
    n = _check_count(n, 0, "n")
    if not (math.isfinite(s) and math.isfinite(w) and math.isfinite(t)):
        raise InvalidParamError("times must be finite")
    if not (0 < s <= w < t):
        raise InvalidParamError(
            f"need 0 < s <= w < t, got s={s!r}, w={w!r}, t={t!r}"
        )
    return n * s / t + n * (n - 1) * s * w / (t * t)


def cond_mean_integrated_power(n: int, k: int, t):
    """Mean of the time integral of the k-th power of the count, given
    n events by t.

    (t / (n + 1)) * sum of j**k for j = 1..n; exact when t is an exact
    rational, so the closed Faulhaber forms can be matched without
    rounding.
    """
    n = _check_count(n, 0, "n")
    k = _check_count(k, 1, "k")
    if not (math.isfinite(t) and t > 0):
        raise InvalidParamError(f"t must be finite and > 0, got {t!r}")
    psum = sum(j**k for j in range(1, n + 1))
    return t * psum / (n + 1)


def mean_integrated_power(rate, k: int, t):
    """Unconditional mean of the integrated k-th power of the Poisson
    count, for k in {1, 2, 3} only.

    k=1: rate*t**2/2, which is the alpha = order = 1 fractional-integral
    mean walking through the same time integral.  k=2 and k=3 pick up
    the factorial-moment corrections of the squared and cubed count.
    Higher powers have no closed form here and are served by the Monte
    Carlo route instead.
    """
    k = _check_count(k, 1, "k")
    _check_rate(rate)
    if not (math.isfinite(t) and t > 0):
        raise InvalidParamError(f"t must be finite and > 0, got {t!r}")
    if k == 1:
        return rate * t**2 / 2
    if k == 2:
        return rate**2 * t**3 / 3 + rate * t**2 / 2
    if k == 3:
        return rate**3 * t**4 / 4 + rate**2 * t**3 + rate * t**2 / 2
    raise InvalidParamError(f"closed form exists only for k in {{1, 2, 3}}, got {k}")


def _power_chunk(times: np.ndarray, k: int, t: float) -> np.ndarray:
    """Row-wise integrals of the k-th power of the count up to t.

    Between consecutive jumps the count is constant, so each row is a
    dot product of segment widths with level powers; padding entries are
    inf and clamp to zero width.
    """
    m, w = times.shape
    if w == 0:
        return np.zeros(m)
    clipped = np.minimum(times, t)
    nxt = np.concatenate([clipped[:, 1:], np.full((m, 1), t)], axis=1)
    levels = np.arange(1, w + 1, dtype=float) ** k
    return (nxt - clipped) @ levels


def _mean_report(name: str, analytic, vals: np.ndarray) -> MomentReport:
    m = vals.size
    if m == 0:
        raise EmptyInputError(f"no samples available to estimate {name}")
    est = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(m)) if m > 1 else float("nan")
    return MomentReport.from_mc(name, analytic, est, se, m)


def _var_report(name: str, analytic, vals: np.ndarray) -> MomentReport:
    m = vals.size
    if m == 0:
        raise EmptyInputError(f"no samples available to estimate {name}")
    if m == 1:
        return MomentReport.from_mc(name, analytic, float("nan"), float("nan"), m)
    var = float(vals.var(ddof=1))
    d = vals - vals.mean()
    m4 = float(np.mean(d**4))
    spread = m4 - (m - 3.0) / (m - 1.0) * var * var
    se = math.sqrt(max(spread, 0.0) / m)
    return MomentReport.from_mc(name, analytic, var, se, m)


def verify_moment(
    name: str,
    params: FppParams,
    spec: FracIntegralSpec,
    sim: SimConfig,
    **extra,
) -> MomentReport:
    """Estimate the named moment by simulation and report it with its z.

    Conditional names need the keyword n (the conditioning count at
    spec.t); power names need k.  The conditional and integrated-power
    closed forms describe the order-1 process, so pass order-1 params
    when comparing against them; the estimator itself runs whatever
    process it is given.  Power names integrate the plain time integral
    and ignore spec.alpha.
    """
    known = (
        "mean_frac_integral",
        "var_frac_integral",
        "cond_mean_integral",
        "cond_second_moment_integral",
        "cond_var_integral",
        "mean_integrated_power",
        "cond_mean_integrated_power",
    )
    if name not in known:
        raise InvalidParamError(
            f"unknown moment {name!r}; expected one of {', '.join(known)}"
        )

    if name in ("mean_frac_integral", "var_frac_integral"):
        _reject_extra(name, extra)
        mean_rep, var_rep = rl_integral_mc_moments(params, spec, sim)
        return mean_rep if name == "mean_frac_integral" else var_rep

    if name == "mean_integrated_power":
        if "k" not in extra:
            raise InvalidParamError(f"{name} needs the keyword k")
        k = _check_count(extra.pop("k"), 1, "k")
        _reject_extra(name, extra)
        analytic = (
            mean_integrated_power(params.rate, k, spec.t) if k <= 3 else None
        )
        parts = [
            _power_chunk(times, k, spec.t)
            for times, _ in iter_path_chunks(params, spec.t, sim)
        ]
        return _mean_report(name, analytic, np.concatenate(parts))

    # the remaining names condition on the count at spec.t via rejection
    if "n" not in extra:
        raise InvalidParamError(f"{name} needs the keyword n")
    n = _check_count(extra.pop("n"), 0, "n")
    if name == "cond_mean_integrated_power":
        if "k" not in extra:
            raise InvalidParamError(f"{name} needs the keyword k")
        k = _check_count(extra.pop("k"), 1, "k")
    _reject_extra(name, extra)
    rows = conditional_jump_times(params, spec.t, n, sim)
    if rows.shape[0] == 0:
        raise EmptyInputError(
            f"rejection sampling accepted no paths with count {n} for {name}"
        )

    if name == "cond_mean_integrated_power":
        return _mean_report(
            name,
            cond_mean_integrated_power(n, k, spec.t),
            _power_chunk(rows, k, spec.t),
        )

    vals = _rl_chunk(rows, spec.alpha, spec.t)
    if name == "cond_mean_integral":
        return _mean_report(name, cond_mean_frac_integral(n, spec.alpha, spec.t), vals)
    if name == "cond_second_moment_integral":
        return _mean_report(
            name,
            cond_second_moment_frac_integral(n, spec.alpha, spec.t),
            vals * vals,
        )
    return _var_report(name, cond_var_frac_integral(n, spec.alpha, spec.t), vals)


def _reject_extra(name: str, extra: dict) -> None:
    if extra:
        raise InvalidParamError(
            f"unexpected arguments for {name}: {', '.join(sorted(extra))}"
        )
