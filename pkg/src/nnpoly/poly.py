"""Sparse multivariate polynomials over a monomial basis.

A polynomial in p variables with total degree bound q is a map from
exponent vectors (multi-indices) to real coefficients.  Terms absent from
the map are zero; explicit zeros may be stored but all comparisons treat
them as absent.  The canonical term order everywhere (enumeration, files,
design matrices) is graded lexicographic: ascending total degree, then
lexicographically descending exponent vectors.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Mapping, Sequence

import numpy as np

MultiIndex = tuple[int, ...]

MAX_VARS = 10
MAX_DEGREE = 10


def _check_limits(p: int, q: int) -> None:
    if not 1 <= p <= MAX_VARS:
        raise ValueError(f"variable count must be in [1, {MAX_VARS}], got {p}")
    if not 0 <= q <= MAX_DEGREE:
        raise ValueError(f"degree must be in [0, {MAX_DEGREE}], got {q}")


def _compositions(total: int, parts: int) -> Iterator[MultiIndex]:
    # exponent vectors summing to `total`, in descending lexicographic order
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


@lru_cache(maxsize=None)
def _monomials_cached(p: int, q: int) -> tuple[MultiIndex, ...]:
    out: list[MultiIndex] = []
    for degree in range(q + 1):
        out.extend(_compositions(degree, p))
    return tuple(out)


def monomials_up_to(p: int, q: int) -> list[MultiIndex]:
    """All C(p+q, q) exponent vectors of length p with total degree <= q.

    Graded lexicographic order: degree 0 first, ties broken by descending
    exponent tuples, e.g. (p=2, q=2) -> (0,0),(1,0),(0,1),(2,0),(1,1),(0,2).
    """
    _check_limits(p, q)
    return list(_monomials_cached(p, q))


@dataclass(frozen=True, eq=False)
class Polynomial:
    """Sparse polynomial: coefficient map keyed by exponent vector."""

    p: int
    degree: int
    coeffs: Mapping[MultiIndex, float] = field(default_factory=dict)

    def __post_init__(self):
        _check_limits(self.p, self.degree)
        keys = list(self.coeffs.keys())
        if keys:
            try:
                K = np.array(keys, dtype=np.int64)
                regular = K.ndim == 2 and K.shape[1] == self.p
            except (ValueError, TypeError, OverflowError):
                regular = False
            if not regular:
                self._validate_slow(keys)  # raises with the offending key named
            else:
                if K.min() < 0:
                    bad = keys[int(np.argmax((K < 0).any(axis=1)))]
                    raise ValueError(f"negative exponent in {tuple(bad)}")
                degrees = K.sum(axis=1)
                if degrees.max() > self.degree:
                    bad = keys[int(np.argmax(degrees > self.degree))]
                    raise ValueError(f"term {tuple(bad)} exceeds degree bound {self.degree}")
        object.__setattr__(self, "coeffs", {m: float(c) for m, c in self.coeffs.items()})

    def _validate_slow(self, keys) -> None:
        for m in keys:
            if len(m) != self.p:
                raise ValueError(
                    f"exponent vector {tuple(m)} has length {len(m)}, expected {self.p}"
                )
            if any(int(e) != e or e < 0 for e in m):
                raise ValueError(f"exponents must be non-negative integers in {tuple(m)}")
        raise AssertionError("irregular exponent keys")  # pragma: no cover

    def canonical(self) -> dict[MultiIndex, float]:
        """Nonzero terms in graded-lex order (the comparison form)."""
        items = [(m, c) for m, c in self.coeffs.items() if c != 0.0]
        items.sort(key=_grlex_key)
        return dict(items)

    def coefficient(self, m: Sequence[int]) -> float:
        return self.coeffs.get(tuple(int(e) for e in m), 0.0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.p == other.p and self.canonical() == other.canonical()

    def evaluate(self, x: Sequence[float]) -> float:
        """Sum of coeff * prod(x_i^e_i) in one pass over stored terms."""
        xv = np.asarray(x, dtype=float)
        if xv.shape != (self.p,):
            raise ValueError(f"point has shape {xv.shape}, expected ({self.p},)")
        return math.fsum(
            c * math.prod(xv[i] ** e for i, e in enumerate(m) if e)
            for m, c in self.coeffs.items()
        )

    def evaluate_many(self, X: np.ndarray) -> np.ndarray:
        """Evaluate at each row of an (n, p) array; terms accumulated in canonical order."""
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.p:
            raise ValueError(f"points have shape {X.shape}, expected (n, {self.p})")
        z = np.zeros(X.shape[0])
        for m, c in sorted(self.coeffs.items(), key=_grlex_key):
            if c == 0.0:
                continue
            term = np.full(X.shape[0], c)
            for i, e in enumerate(m):
                if e:
                    term *= X[:, i] ** e
            z += term
        return z


def grlex_key(m: MultiIndex):
    """Sort key realizing the canonical graded-lex term order."""
    return (sum(m), tuple(-e for e in m))


def _grlex_key(item):
    return grlex_key(item[0])


def affine_substitute(poly: Polynomial, shift: Sequence[float], scale: Sequence[float]) -> Polynomial:
    """Change of variables x_i <- shift_i + scale_i * x_i'.

    Returns poly' with the same degree bound satisfying
    poly'(x') = poly(shift + scale * x') exactly in exact arithmetic.
    A zero scale entry collapses that variable (allowed).
    """
    a = np.asarray(shift, dtype=float)
    b = np.asarray(scale, dtype=float)
    if a.shape != (poly.p,) or b.shape != (poly.p,):
        raise ValueError(
            f"shift/scale must have shape ({poly.p},), got {a.shape} and {b.shape}"
        )
    out: dict[MultiIndex, float] = {}
    for m, c in poly.coeffs.items():
        if c == 0.0:
            continue
        # expand prod_i (a_i + b_i x_i)^{m_i} one variable at a time
        partial: dict[MultiIndex, float] = {(): c}
        for i, mi in enumerate(m):
            grown: dict[MultiIndex, float] = {}
            for prefix, pc in partial.items():
                for k in range(mi + 1):
                    w = pc * math.comb(mi, k) * a[i] ** (mi - k) * b[i] ** k
                    if w == 0.0 and k > 0:
                        continue
                    key = prefix + (k,)
                    grown[key] = grown.get(key, 0.0) + w
            partial = grown
        for key, w in partial.items():
            out[key] = out.get(key, 0.0) + w
    return Polynomial(p=poly.p, degree=poly.degree, coeffs=out)


def output_affine(poly: Polynomial, mult: float, add: float) -> Polynomial:
    """Return mult * poly + add; the constant term absorbs ``add``."""
    zero = (0,) * poly.p
    out = {m: mult * c for m, c in poly.coeffs.items()}
    out[zero] = out.get(zero, 0.0) + add
    return Polynomial(p=poly.p, degree=poly.degree, coeffs=out)


@dataclass(frozen=True)
class FitReport:
    """Least-squares diagnostics: residual sum of squares, estimates, conditioning."""

    rss: float
    coefficients: dict[MultiIndex, float]
    condition: float

    def __post_init__(self):
        if self.rss < 0:
            raise ValueError("residual sum of squares cannot be negative")


def ols_fit(X: np.ndarray, y: np.ndarray, q: int) -> tuple[Polynomial, FitReport]:
    """Least-squares polynomial fit of total degree ``q`` on the monomial basis.

    Solved through an orthogonalization-based routine (SVD via lstsq), not
    normal equations.  Raises if the system is underdetermined or the design
    matrix is rank deficient.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2:
        raise ValueError(f"X must be 2-D, got shape {X.shape}")
    n, p = X.shape
    if y.shape != (n,):
        raise ValueError(f"y has shape {y.shape}, expected ({n},)")
    monos = monomials_up_to(p, q)
    m = len(monos)
    if n < m:
        raise ValueError(
            f"underdetermined fit: {n} samples for {m} monomials of degree <= {q} in {p} variables"
        )
    D = design_matrix(X, monos)
    beta, _, rank, s = np.linalg.lstsq(D, y, rcond=None)
    if rank < m:
        raise ValueError(
            f"design matrix is rank deficient: rank {rank} < {m} monomial columns"
        )
    condition = float(s[0] / s[-1])
    rss = float(np.sum((D @ beta - y) ** 2))
    coeffs = {mono: float(b) for mono, b in zip(monos, beta)}
    poly = Polynomial(p=p, degree=q, coeffs=coeffs)
    return poly, FitReport(rss=rss, coefficients=dict(coeffs), condition=condition)


def design_matrix(X: np.ndarray, monos: Sequence[MultiIndex]) -> np.ndarray:
    """Columns of prod(x^m) for each monomial, rows matching rows of X."""
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    D = np.ones((n, len(monos)))
    for col, m in enumerate(monos):
        for i, e in enumerate(m):
            if e:
                D[:, col] *= X[:, i] ** e
    return D


@dataclass(frozen=True)
class CoefficientDistance:
    """Per-term absolute differences plus max and L2 aggregates."""

    per_term: dict[MultiIndex, float]
    max_abs: float
    l2: float


def coefficient_distance(p1: Polynomial, p2: Polynomial) -> CoefficientDistance:
    """Compare coefficient maps term by term; missing terms count as zero."""
    if p1.p != p2.p:
        raise ValueError(f"variable counts differ: {p1.p} vs {p2.p}")
    a, b = p1.canonical(), p2.canonical()
    keys = sorted(set(a) | set(b), key=grlex_key)
    per_term = {m: abs(a.get(m, 0.0) - b.get(m, 0.0)) for m in keys}
    diffs = list(per_term.values())
    return CoefficientDistance(
        per_term=per_term,
        max_abs=max(diffs, default=0.0),
        l2=math.sqrt(math.fsum(d * d for d in diffs)),
    )


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def polynomial_to_json(poly: Polynomial) -> str:
    """Serialize with 17-significant-digit coefficients, terms in canonical order."""
    lines = ["{", f'  "p": {poly.p},', f'  "degree": {poly.degree},', '  "terms": [']
    terms = list(poly.canonical().items())
    for k, (m, c) in enumerate(terms):
        comma = "," if k < len(terms) - 1 else ""
        exps = "[" + ", ".join(str(int(e)) for e in m) + "]"
        lines.append(f'    {{"exponents": {exps}, "coeff": {_fmt(c)}}}{comma}')
    lines += ["  ]", "}"]
    return "\n".join(lines) + "\n"


def save_polynomial(poly: Polynomial, path) -> None:
    with open(path, "w") as fh:
        fh.write(polynomial_to_json(poly))


def load_polynomial(path) -> Polynomial:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise ValueError(f"{path}: invalid JSON at line {e.lineno}: {e.msg}") from e
    for name in ("p", "degree", "terms"):
        if name not in doc:
            raise ValueError(f"{path}: missing field '{name}'")
    coeffs: dict[MultiIndex, float] = {}
    for k, term in enumerate(doc["terms"]):
        for name in ("exponents", "coeff"):
            if name not in term:
                raise ValueError(f"{path}: term {k}: missing field '{name}'")
        coeffs[tuple(term["exponents"])] = float(term["coeff"])
    try:
        return Polynomial(p=int(doc["p"]), degree=int(doc["degree"]), coeffs=coeffs)
    except ValueError as e:
        raise ValueError(f"{path}: {e}") from e
