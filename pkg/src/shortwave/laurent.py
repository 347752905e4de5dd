"""Finite Laurent expansions about s = 1 and the residue main term.

A series carries its coefficients from (s-1)^min_order upward together with
valid_order, the largest exponent through which the coefficients are exact.
Products of truncated series are only trustworthy through

    valid(a*b) = min(valid(a) + min_order(b), valid(b) + min_order(a)),

and the arithmetic tracks that bound rather than pretending to more.

The main term attached to a series L with a pole of order p at s = 1 is
MainTerm(y) = Res_{s=1} L(s) y^s / s = y * P(ln y).  Writing s = 1 + t,

    y^s / s = y * e^{ut} / (1 + t),   u = ln y,

whose t^j coefficient is c_j(u) = sum_{i<=j} (-1)^i u^{j-i}/(j-i)!.  The
residue picks out Laurent coefficients a_{-1-j}, j = 0..p-1, so

    P(u) = sum_{j=0}^{p-1} a_{-1-j} c_j(u),   deg P = p - 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

from .stieltjes import stieltjes_constant

_ZERO_EPS = 0.0  # leading-coefficient normalization drops exact zeros only


@dataclass(frozen=True)
class LaurentSeries:
    """Truncated Laurent expansion about s = 1."""

    min_order: int
    coeffs: tuple[float, ...]
    valid_order: int

    def __post_init__(self):
        if self.coeffs and self.coeffs[0] == _ZERO_EPS:
            raise ValueError("leading coefficient must be nonzero (normalize first)")
        if self.coeffs and self.min_order + len(self.coeffs) - 1 > self.valid_order:
            raise ValueError("coefficients extend past the declared valid order")

    @property
    def pole_order(self) -> int:
        return -self.min_order if self.coeffs and self.min_order < 0 else 0

    def coefficient(self, order: int) -> float:
        """Coefficient of (s-1)^order; zero off the stored window."""
        if order > self.valid_order:
            raise ValueError(f"order {order} beyond valid truncation {self.valid_order}")
        idx = order - self.min_order
        if not self.coeffs or idx < 0 or idx >= len(self.coeffs):
            return 0.0
        return self.coeffs[idx]


def laurent_from_coeffs(min_order: int, coeffs, valid_order=None) -> LaurentSeries:
    """Normalize away exactly-zero leading terms and build a series."""
    coeffs = list(coeffs)
    while coeffs and coeffs[0] == 0.0:
        coeffs.pop(0)
        min_order += 1
    if valid_order is None:
        valid_order = min_order + len(coeffs) - 1 if coeffs else 0
    if not coeffs:
        return LaurentSeries(0, (), valid_order)
    top = min_order + len(coeffs) - 1
    if top > valid_order:
        coeffs = coeffs[: valid_order - min_order + 1]
    return LaurentSeries(min_order, tuple(coeffs), valid_order)


def zeta_laurent(q: int) -> LaurentSeries:
    """Expansion of zeta about s = 1 through (s-1)^q."""
    if q < 0:
        raise ValueError("truncation order must be nonnegative")
    coeffs = [1.0]
    for n in range(q + 1):
        coeffs.append((-1) ** n * stieltjes_constant(n) / factorial(n))
    return LaurentSeries(-1, tuple(coeffs), q)


def laurent_mul(a: LaurentSeries, b: LaurentSeries) -> LaurentSeries:
    """Cauchy product, valid through the common reliable order."""
    if not a.coeffs or not b.coeffs:
        return LaurentSeries(0, (), min(a.valid_order, b.valid_order))
    min_order = a.min_order + b.min_order
    valid = min(a.valid_order + b.min_order, b.valid_order + a.min_order)
    out = [0.0] * (len(a.coeffs) + len(b.coeffs) - 1)
    for i, ca in enumerate(a.coeffs):
        if ca == 0.0:
            continue
        for j, cb in enumerate(b.coeffs):
            out[i + j] += ca * cb
    return laurent_from_coeffs(min_order, out, valid)


def laurent_pow(a: LaurentSeries, k: int) -> LaurentSeries:
    if k < 1:
        raise ValueError("exponent must be a positive integer")
    acc = a
    for _ in range(k - 1):
        acc = laurent_mul(acc, a)
    return acc


def main_term_polynomial(series: LaurentSeries) -> tuple[float, ...]:
    """P(u) with MainTerm(y) = y * P(ln y); coefficients lowest degree first.

    Requires the series to be valid at least through order -1 so that every
    residue-contributing coefficient a_{-1-j} is trustworthy.
    """
    if series.valid_order < -1:
        raise ValueError("series truncation insufficient for the residue (need order >= -1)")
    p = series.pole_order
    if p == 0:
        return ()
    poly = [0.0] * p
    for j in range(p):
        a = series.coefficient(-1 - j)
        if a == 0.0:
            continue
        for d in range(j + 1):
            poly[d] += a * (-1) ** (j - d) / factorial(d)
    return tuple(poly)


def eval_poly(coeffs, u: float) -> float:
    """Horner evaluation of a lowest-first coefficient tuple."""
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * u + c
    return acc


def main_term(coeffs, y: float) -> float:
    """MainTerm(y) = y * P(ln y) for a main-term polynomial; 0 if empty."""
    if not coeffs or y <= 0.0:
        return 0.0
    import math

    return y * eval_poly(coeffs, math.log(y))
