"""F-distribution quantiles for the variable-rate forgetting trigger.

The CDF is evaluated through the regularized incomplete beta function
(continued fraction, modified Lentz recurrence) and inverted with a
Newton iteration safeguarded by bisection.  Everything is scalar; the
forgetting trigger needs one quantile per configuration, not vectors.
"""

import math

_TINY = 1e-300
_CF_MAX_ITER = 400
_CF_EPS = 1e-16


def _beta_cont_frac(a, b, x):
    """Continued fraction for the incomplete beta integral at x."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        # even step
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        # odd step
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise ArithmeticError(
        f"incomplete beta continued fraction failed to converge (a={a}, b={b}, x={x})"
    )


def regularized_incomplete_beta(x, a, b):
    """I_x(a, b): the regularized incomplete beta function.

    Parameters
    ----------
    x : float in [0, 1]
    a, b : positive shape parameters

    Returns
    -------
    float in [0, 1], monotone nondecreasing in x.
    """
    if not (a > 0.0 and b > 0.0):
        raise ValueError(f"shape parameters must be positive, got a={a}, b={b}")
    if not (0.0 <= x <= 1.0):
        raise ValueError(f"x must lie in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    # the continued fraction converges fast only on one side of the mean
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cont_frac(a, b, x) / a
    return 1.0 - front * _beta_cont_frac(b, a, 1.0 - x) / b


def _beta_log_pdf(y, a, b):
    return (
        (a - 1.0) * math.log(y)
        + (b - 1.0) * math.log1p(-y)
        + math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
    )


def f_cdf(x, d1, d2):
    """CDF of the F(d1, d2) distribution at x >= 0."""
    if d1 <= 0.0 or d2 <= 0.0:
        raise ValueError(f"degrees of freedom must be positive, got ({d1}, {d2})")
    if x <= 0.0:
        return 0.0
    y = d1 * x / (d1 * x + d2)
    return regularized_incomplete_beta(y, 0.5 * d1, 0.5 * d2)


def f_quantile(p, d1, d2, max_iter=200):
    """Quantile of the F(d1, d2) distribution.

    Inverts the incomplete-beta representation of the CDF: a Newton
    iteration on the beta variable y = d1 x / (d1 x + d2), bracketed on
    (0, 1) and falling back to bisection whenever a Newton step leaves
    the bracket.  Converges to relative accuracy well below 1e-10.
    """
    if not (0.0 < p < 1.0):
        raise ValueError(f"probability must lie in (0, 1), got {p}")
    if d1 <= 0.0 or d2 <= 0.0:
        raise ValueError(f"degrees of freedom must be positive, got ({d1}, {d2})")
    a = 0.5 * d1
    b = 0.5 * d2
    lo, hi = 0.0, 1.0
    y = a / (a + b)
    for _ in range(max_iter):
        f = regularized_incomplete_beta(y, a, b) - p
        if f > 0.0:
            hi = y
        else:
            lo = y
        if abs(f) < 1e-15 or (hi - lo) < 1e-16 * max(hi, 1e-10):
            break
        pdf = math.exp(_beta_log_pdf(y, a, b)) if 0.0 < y < 1.0 else 0.0
        if pdf > 0.0:
            step = f / pdf
            y_new = y - step
        else:
            y_new = -1.0  # force bisection
        if not (lo < y_new < hi):
            y_new = 0.5 * (lo + hi)
        if abs(y_new - y) < 1e-17 * max(y, 1e-10):
            y = y_new
            break
        y = y_new
    else:
        raise ArithmeticError(
            f"F quantile iteration did not converge for p={p}, d1={d1}, d2={d2}"
        )
    if y <= 0.0:
        return 0.0
    if y >= 1.0:
        return math.inf
    return d2 * y / (d1 * (1.0 - y))
