"""Hidden-layer activation functions and their series expansions at zero.

Provides numerically stable evaluation of softplus, tanh, sigmoid (and a
linear passthrough for test scaffolding), exact-rational Taylor coefficients
at 0 up to order 10, Horner evaluation of the truncated series, and a
numeric search for the interval around 0 on which the truncation stays
within a given error tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

ACTIVATIONS = ("softplus", "tanh", "sigmoid", "linear")

MAX_ORDER = 10

# valid_range search parameters: scan window, grid step, bisection tolerance
SCAN_LIMIT = 50.0
SCAN_STEP = 1e-3
BISECT_TOL = 1e-6


def _check_kind(kind: str) -> None:
    if kind not in ACTIVATIONS:
        raise ValueError(f"unknown activation {kind!r}; expected one of {ACTIVATIONS}")


def _check_order(order: int) -> None:
    if not 0 <= order <= MAX_ORDER:
        raise ValueError(f"series order must be in [0, {MAX_ORDER}], got {order}")


def value(kind: str, x):
    """Evaluate the activation at ``x`` (scalar or ndarray).

    Stable for |x| up to at least 500: softplus uses max(x, 0) + log1p(exp(-|x|)),
    sigmoid uses the sign-split form that never exponentiates a positive argument.
    """
    _check_kind(kind)
    x = np.asarray(x, dtype=float)
    if kind == "softplus":
        out = np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))
    elif kind == "tanh":
        out = np.tanh(x)
    elif kind == "sigmoid":
        out = _sigmoid(x)
    else:
        out = x.copy()
    return float(out) if out.ndim == 0 else out


def derivative(kind: str, x):
    """First derivative of the activation at ``x`` (scalar or ndarray)."""
    _check_kind(kind)
    x = np.asarray(x, dtype=float)
    if kind == "softplus":
        out = _sigmoid(x)
    elif kind == "tanh":
        t = np.tanh(x)
        out = 1.0 - t * t
    elif kind == "sigmoid":
        s = _sigmoid(x)
        out = s * (1.0 - s)
    else:
        out = np.ones_like(x)
    return float(out) if out.ndim == 0 else out


def _sigmoid(x: np.ndarray) -> np.ndarray:
    # exp only ever sees non-positive arguments
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _sigmoid_fractions(order: int) -> list[Fraction]:
    # s' = s(1 - s) termwise: (n+1) a_{n+1} = a_n - sum_k a_k a_{n-k}
    a = [Fraction(1, 2)]
    for n in range(order):
        conv = sum(a[k] * a[n - k] for k in range(n + 1))
        a.append((a[n] - conv) / (n + 1))
    return a


def _tanh_fractions(order: int) -> list[Fraction]:
    # t' = 1 - t^2 termwise: (n+1) t_{n+1} = [n == 0] - sum_k t_k t_{n-k}
    t = [Fraction(0)]
    for n in range(order):
        conv = sum(t[k] * t[n - k] for k in range(n + 1))
        t.append(((1 if n == 0 else 0) - conv) / Fraction(n + 1))
    return t


def _softplus_fractions(order: int) -> list[Fraction]:
    # softplus' = sigmoid, so c_{n+1} = a_n / (n+1).  The constant term is
    # ln 2, which is irrational; this rational view carries a 0 there and the
    # float conversion in taylor_coeffs() injects math.log(2).
    a = _sigmoid_fractions(max(order - 1, 0))
    c = [Fraction(0)]
    for n in range(order):
        c.append(a[n] / (n + 1))
    return c


def rational_coefficients(kind: str, order: int) -> tuple[Fraction, ...]:
    """Exact rational series coefficients c_0..c_order, c_n = g^(n)(0)/n!.

    For softplus the constant term (ln 2) is not rational and is reported
    as 0 here; ``taylor_coeffs`` substitutes the float value.
    """
    _check_kind(kind)
    _check_order(order)
    if kind == "sigmoid":
        coeffs = _sigmoid_fractions(order)
    elif kind == "tanh":
        coeffs = _tanh_fractions(order)
    elif kind == "softplus":
        coeffs = _softplus_fractions(order)
    else:
        coeffs = [Fraction(0), Fraction(1)][: order + 1]
        coeffs += [Fraction(0)] * (order + 1 - len(coeffs))
    return tuple(coeffs[: order + 1])


@dataclass(frozen=True)
class TaylorSeries:
    """Truncated series of an activation at 0: coeffs[n] = g^(n)(0)/n!."""

    kind: str
    order: int
    coeffs: tuple[float, ...]

    def __post_init__(self):
        if len(self.coeffs) != self.order + 1:
            raise ValueError(
                f"series of order {self.order} needs {self.order + 1} "
                f"coefficients, got {len(self.coeffs)}"
            )


def taylor_coeffs(kind: str, order: int) -> TaylorSeries:
    """Series coefficients of the activation at 0, exact until float conversion."""
    fracs = rational_coefficients(kind, order)
    coeffs = [float(f) for f in fracs]
    if kind == "softplus":
        coeffs[0] = math.log(2.0)
    return TaylorSeries(kind=kind, order=order, coeffs=tuple(coeffs))


def taylor_eval(series: TaylorSeries, x):
    """Horner evaluation of the truncated series at ``x`` (scalar or ndarray)."""
    xa = np.asarray(x, dtype=float)
    acc = np.full_like(xa, series.coeffs[-1])
    for c in series.coeffs[-2::-1]:
        acc = acc * xa + c
    return float(acc) if acc.ndim == 0 else acc


@dataclass(frozen=True)
class ValidRange:
    """Interval [lo, hi] around 0 where |g(x) - T_q(x)| <= epsilon.

    ``saturated_lo``/``saturated_hi`` flag endpoints clamped at the scan
    limit because no crossing was found within it.
    """

    epsilon: float
    lo: float
    hi: float
    saturated_lo: bool = False
    saturated_hi: bool = False

    def __post_init__(self):
        if not self.lo < 0.0 < self.hi:
            raise ValueError(f"valid range must straddle 0, got [{self.lo}, {self.hi}]")

    def contains(self, x) -> np.ndarray:
        xa = np.asarray(x, dtype=float)
        return (xa >= self.lo) & (xa <= self.hi)


def valid_range(kind: str, order: int, epsilon: float) -> ValidRange:
    """Find where the truncation error first exceeds ``epsilon`` on each side of 0.

    Scans [0, 50] (and mirrored) with step 1e-3, then bisects the bracketing
    cell to 1e-6 absolute.  If the error never crosses within the window the
    endpoint is reported as +/-50 with a saturation flag.
    """
    _check_kind(kind)
    _check_order(order)
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    series = taylor_coeffs(kind, order)

    def err(x):
        return np.abs(value(kind, x) - taylor_eval(series, x))

    hi, sat_hi = _first_crossing(err, epsilon, sign=+1.0)
    lo, sat_lo = _first_crossing(err, epsilon, sign=-1.0)
    return ValidRange(epsilon=epsilon, lo=lo, hi=hi, saturated_lo=sat_lo, saturated_hi=sat_hi)


def _first_crossing(err, epsilon: float, sign: float) -> tuple[float, bool]:
    grid = sign * np.arange(0.0, SCAN_LIMIT + SCAN_STEP, SCAN_STEP)
    above = err(grid) > epsilon
    idx = np.flatnonzero(above)
    if idx.size == 0:
        return sign * SCAN_LIMIT, True
    k = int(idx[0])
    if k == 0:
        # epsilon exceeded already at 0 cannot happen: every series is exact at 0
        raise AssertionError("truncation error exceeds epsilon at x = 0")
    inside, outside = grid[k - 1], grid[k]
    while abs(outside - inside) > BISECT_TOL:
        mid = 0.5 * (inside + outside)
        if err(np.asarray(mid)) > epsilon:
            outside = mid
        else:
            inside = mid
    return float(0.5 * (inside + outside)), False
