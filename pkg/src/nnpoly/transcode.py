"""Convert trained network weights into explicit polynomial coefficients.

For a network z = v_0 + sum_j v_j g(u_j) with u_j = w_0j + sum_i w_ij x_i,
replacing g by its order-q series at 0 and expanding the powers of u_j
multinomially yields a degree-q polynomial in x whose coefficient for the
monomial with exponents (m_1..m_p), total order t = sum m_i, is

    beta = sum_j v_j * sum_{n=t}^{q} g^(n)(0) / ((n-t)! m_1! ... m_p!)
                       * w_0j^(n-t) * prod_i w_ij^{m_i}

and beta_0 = v_0 + sum_j v_j T_q(w_0j).  Two independent routes to the same
number are provided: ``nn_to_poly`` (coefficient expansion) and
``taylor_truncated_output`` (series applied to the potentials directly);
they share only the series coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from . import activations, nn, poly as polymod
from .poly import MultiIndex, Polynomial

if TYPE_CHECKING:  # pragma: no cover
    from .simlab import ScalingSpec

MAX_ORDER = 10
MAX_HIDDEN = nn.MAX_HIDDEN


@dataclass(frozen=True)
class TranscodeResult:
    """Polynomial in the network's (scaled) input space plus provenance.

    ``unit_contributions`` maps each monomial to the per-hidden-unit addends
    of its coefficient (before the output bias), kept only on request.
    """

    poly: Polynomial
    order: int
    activation: str
    unit_contributions: dict[MultiIndex, tuple[float, ...]] | None = None


def _sorted_fsum(addends) -> float:
    # smallest magnitudes first keeps the mixed-sign accumulation stable
    return math.fsum(sorted(addends, key=abs))


_BLOCK = 16384  # monomials per block; bounds peak memory at the p=q=10 corner


def nn_to_poly(wts: nn.NetworkWeights, q: int, keep_contributions: bool = False) -> TranscodeResult:
    """Expand the network into a degree-q polynomial over all C(p+q, q) monomials.

    The inner sum over series order n for a monomial of total order t
    collapses to a factor S[unit, t]; monomial powers come from per-variable
    power tables.  Factorial ratios are exact integers, and every floating
    accumulation sums its addends in ascending magnitude, so results are
    independent of hidden-unit order and reproducible bit for bit.
    """
    if not 1 <= q <= MAX_ORDER:
        raise ValueError(f"series order must be in [1, {MAX_ORDER}], got {q}")
    if wts.h1 > MAX_HIDDEN:
        raise ValueError(f"h1 must be at most {MAX_HIDDEN}, got {wts.h1}")
    p, h1 = wts.p, wts.h1
    series = activations.taylor_coeffs(wts.activation, q)
    c = series.coeffs

    monos = polymod.monomials_up_to(p, q)
    E = np.array(monos, dtype=np.intp)
    orders = E.sum(axis=1)
    # products of factorials of entries <= 10 never exceed 10!, so the float
    # table is exact
    fact = np.array([math.factorial(e) for e in range(q + 1)], dtype=float)
    mfact = np.prod(fact[E], axis=1)

    # S[j, t] = sum_{n=t}^{q} c_n * n!/(n-t)! * w0j^(n-t)
    S = np.empty((h1, q + 1))
    for j in range(h1):
        w0_pow = [wts.w[0, j] ** s for s in range(q + 1)]
        for t in range(q + 1):
            S[j, t] = _sorted_fsum(
                c[t + s] * math.perm(t + s, t) * w0_pow[s] for s in range(q - t + 1)
            )

    # power_tables[i][e] holds w_{i+1, :} ** e for e = 0..q
    power_tables = [wts.w[1 + i][None, :] ** np.arange(q + 1)[:, None] for i in range(p)]

    betas = np.empty(len(monos))
    breakdown: dict[MultiIndex, tuple[float, ...]] | None = {} if keep_contributions else None
    for lo in range(0, len(monos), _BLOCK):
        hi = min(lo + _BLOCK, len(monos))
        contrib = np.ones((hi - lo, h1))
        for i in range(p):
            contrib *= power_tables[i][E[lo:hi, i], :]
        contrib *= wts.v[1:][None, :]
        contrib *= S.T[orders[lo:hi], :]
        contrib /= mfact[lo:hi, None]
        if keep_contributions:
            for k in range(lo, hi):
                breakdown[monos[k]] = tuple(contrib[k - lo])
        idx = np.argsort(np.abs(contrib), axis=1, kind="stable")
        ordered = np.take_along_axis(contrib, idx, axis=1)
        betas[lo:hi] = np.cumsum(ordered, axis=1)[:, -1]

    betas[0] += wts.v[0]  # the all-zeros monomial leads the graded-lex order
    coeffs: dict[MultiIndex, float] = {m: float(b) for m, b in zip(monos, betas)}
    return TranscodeResult(
        poly=Polynomial(p=p, degree=q, coeffs=coeffs),
        order=q,
        activation=wts.activation,
        unit_contributions=breakdown,
    )


def taylor_truncated_output(wts: nn.NetworkWeights, q: int, x) -> float:
    """Network output with g replaced by its order-q series at 0.

    Independent check route for ``nn_to_poly``: no monomial expansion, just
    the truncated series applied to each synaptic potential.
    """
    if not 1 <= q <= MAX_ORDER:
        raise ValueError(f"series order must be in [1, {MAX_ORDER}], got {q}")
    x = np.asarray(x, dtype=float)
    if x.shape != (wts.p,):
        raise ValueError(f"input has shape {x.shape}, expected ({wts.p},)")
    series = activations.taylor_coeffs(wts.activation, q)
    u = wts.w[0] + x @ wts.w[1:]
    return float(wts.v[0] + wts.v[1:] @ activations.taylor_eval(series, u))


@dataclass(frozen=True)
class CoverageReport:
    """Share of observed synaptic potentials inside the series' valid range."""

    per_unit: tuple[float, ...]
    overall: float
    order: int
    epsilon: float
    valid_range: activations.ValidRange

    def __post_init__(self):
        if not all(0.0 <= f <= 1.0 for f in (*self.per_unit, self.overall)):
            raise ValueError("coverage fractions must lie in [0, 1]")


def coverage(wts: nn.NetworkWeights, X: np.ndarray, q: int, epsilon: float = 0.1) -> CoverageReport:
    """Fraction of potentials u_j(x_k) falling inside the acceptable range.

    Low coverage flags hidden units operating where the truncated series has
    already diverged from the activation, which predicts poor transcoding
    fidelity.
    """
    rng = activations.valid_range(wts.activation, q, epsilon)
    U = nn.potentials(wts, X)
    inside = rng.contains(U)
    return CoverageReport(
        per_unit=tuple(float(f) for f in inside.mean(axis=0)),
        overall=float(inside.mean()),
        order=q,
        epsilon=epsilon,
        valid_range=rng,
    )


def rescale_to_original(result: TranscodeResult, scaling: "ScalingSpec") -> Polynomial:
    """Express a scaled-space polynomial in the original data units.

    Substitutes the original->scaled input map into each variable, then
    applies the scaled->original response map to the output.
    """
    shift, scale = scaling.input_affine(result.poly.p)
    mult, add = scaling.response_affine_inverse()
    composed = polymod.affine_substitute(result.poly, shift, scale)
    return polymod.output_affine(composed, mult, add)
