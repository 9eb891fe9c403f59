"""Double-double arithmetic helpers.

A value is carried as an unevaluated pair ``(hi, lo)`` with ``|lo|`` below
half an ulp of ``hi``, giving roughly 32 significant decimal digits.  Used by
the escalated summation path of the three-parameter Mittag-Leffler series,
where alternating-series cancellation exhausts plain double precision.

A third "scaled" form ``(hi, lo, e2)`` meaning ``(hi + lo) * 2**e2`` covers
intermediates whose magnitude leaves the double range (Pochhammer products,
reciprocal gamma values).
"""
from __future__ import annotations

import math

_SPLIT = 134217729.0  # 2**27 + 1, Veltkamp splitting constant


def two_sum(a: float, b: float) -> tuple[float, float]:
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def quick_two_sum(a: float, b: float) -> tuple[float, float]:
    # requires |a| >= |b|
    s = a + b
    return s, b - (s - a)


def two_prod(a: float, b: float) -> tuple[float, float]:
    p = a * b
    ta = _SPLIT * a
    ah = ta - (ta - a)
    al = a - ah
    tb = _SPLIT * b
    bh = tb - (tb - b)
    bl = b - bh
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def dd_add(xh: float, xl: float, yh: float, yl: float) -> tuple[float, float]:
    sh, se = two_sum(xh, yh)
    th, te = two_sum(xl, yl)
    se += th
    sh, se = quick_two_sum(sh, se)
    se += te
    return quick_two_sum(sh, se)


def dd_mul(xh: float, xl: float, yh: float, yl: float) -> tuple[float, float]:
    p, e = two_prod(xh, yh)
    e += xh * yl + xl * yh
    return quick_two_sum(p, e)


def dd_div(xh: float, xl: float, yh: float, yl: float) -> tuple[float, float]:
    q1 = xh / yh
    th, tl = dd_mul(yh, yl, q1, 0.0)
    rh, rl = dd_add(xh, xl, -th, -tl)
    q2 = rh / yh
    th, tl = dd_mul(yh, yl, q2, 0.0)
    rh, rl = dd_add(rh, rl, -th, -tl)
    q3 = rh / yh
    qh, ql = quick_two_sum(q1, q2)
    return dd_add(qh, ql, q3, 0.0)


def norm3(h: float, l: float, e: int) -> tuple[float, float, int]:
    """Renormalize a scaled pair so that hi lands in [0.5, 1)."""
    if h == 0.0:
        return 0.0, 0.0, 0
    m, ex = math.frexp(h)
    if ex:
        h = m
        l = math.ldexp(l, -ex)
        e += ex
    return h, l, e


def mul3(a: tuple[float, float, int], b: tuple[float, float, int]) -> tuple[float, float, int]:
    h, l = dd_mul(a[0], a[1], b[0], b[1])
    return norm3(h, l, a[2] + b[2])


def to_dd(h: float, l: float, e: int) -> tuple[float, float]:
    """Collapse a scaled pair to an ordinary pair; saturates out of range."""
    if h == 0.0:
        return 0.0, 0.0
    if e > 1022:
        inf = math.inf if h > 0 else -math.inf
        return inf, 0.0
    if e < -1060:
        return 0.0, 0.0
    return math.ldexp(h, e), math.ldexp(l, e)


# Taylor coefficients a_k of 1/Gamma(1+u) = sum_{k>=0} a_k u^k as double-double
# pairs, 37 terms: truncation below 1e-37 for |u| <= 0.5.  Generated once from
# the Euler/zeta recurrence for the reciprocal-gamma expansion at 80-digit
# working precision and frozen here.
RGAMMA_TAYLOR = (
    (1.0, 0.0),
    (0.5772156649015329, -4.942915152430645e-18),
    (-0.6558780715202539, 2.137185197068536e-17),
    (-0.04200263503409524, 1.4920306285650505e-18),
    (0.16653861138229148, 1.0189144546842026e-17),
    (-0.04219773455554433, -3.3579992682480134e-18),
    (-0.009621971527876973, -5.300031368830263e-19),
    (0.0072189432466631, -3.6006537063394283e-19),
    (-0.0011651675918590652, 5.659947853880981e-20),
    (-0.00021524167411495098, 2.3758686180729364e-21),
    (0.0001280502823881162, -9.359124499198967e-21),
    (-2.013485478078824e-05, 3.0488773972037385e-23),
    (-1.2504934821426706e-06, -2.66214092271898e-23),
    (1.133027231981696e-06, -4.622235212104869e-23),
    (-2.056338416977607e-07, -3.0061601618645134e-24),
    (6.116095104481416e-09, -2.693458298171306e-25),
    (5.002007644469223e-09, -1.538123614056751e-26),
    (-1.18127457048702e-09, -1.0052356155716208e-25),
    (1.0434267116911005e-10, -2.9298419956825035e-27),
    (7.782263439905071e-12, 4.397255556595848e-28),
    (-3.696805618642206e-12, 2.7050034921703885e-28),
    (5.100370287454476e-13, 2.253001461085878e-29),
    (-2.0583260535665066e-14, -1.4747481491954336e-30),
    (-5.348122539423018e-15, -1.6208384686356568e-31),
    (1.2267786282382608e-15, -5.072915146023867e-32),
    (-1.1812593016974588e-16, 6.422257838149681e-33),
    (1.1866922547516004e-18, -4.2037265494226014e-35),
    (1.4123806553180319e-18, -7.576946701116294e-35),
    (-2.29874568443537e-19, 1.3335481917069145e-36),
    (1.7144063219273374e-20, 5.230715150426935e-38),
    (1.337351730493693e-22, 2.6434059649079228e-39),
    (-2.0542335517666728e-22, 3.6856892424568953e-39),
    (2.736030048608e-23, -2.8599315416397774e-39),
    (-1.7323564459105165e-24, -1.7540883508197598e-40),
    (-2.3606190244992872e-26, -1.260225016995785e-42),
    (1.8649829417172943e-26, 8.774775617290965e-43),
    (-2.2180956242071973e-27, 6.809640315042753e-44),
)

RGAMMA_XMAX = 355.0


_RGAMMA_REV = tuple(reversed(RGAMMA_TAYLOR[:-1]))


def rgamma_scaled(xh: float, xl: float = 0.0) -> tuple[float, float, int]:
    """1/Gamma(x) for the double-double x = xh + xl as a scaled double-double.

    Series evaluation of 1/Gamma(1+u) around the nearest integer combined
    with the exact downward product Gamma(x) = Gamma(1+u) * prod (u+j).
    Requires 0 < x <= RGAMMA_XMAX.
    """
    m = int(math.floor(xh + 0.5))
    uh, t = two_sum(xh, float(-m))
    uh, ul = two_sum(uh, t + xl)
    sh, sl = RGAMMA_TAYLOR[-1]
    for ch, cl in _RGAMMA_REV:
        sh, sl = dd_mul(sh, sl, uh, ul)
        sh, sl = dd_add(sh, sl, ch, cl)
    if m == 0:
        h, l = dd_mul(sh, sl, xh, xl)
        return norm3(h, l, 0)
    ph, pl, pe = 1.0, 0.0, 0
    for j in range(1, m):
        fh, ft = two_sum(float(j), uh)
        fh, fl = quick_two_sum(fh, ft + ul)
        ph, pl = dd_mul(ph, pl, fh, fl)
        ph, pl, pe = norm3(ph, pl, pe)
    qh, ql = dd_div(sh, sl, ph, pl)
    return norm3(qh, ql, -pe)
