"""Double-double helpers for phase-accurate trig arguments.

The dual sums need sin/cos of pi * breve(n) * (2x + ...) with breve(n) * x as
large as 1e12; a plain double carries ~1e-4 absolute phase error there, which
is fatal.  Frequencies breve(n) = m (n/D)^(1/m) are therefore carried as
(hi, lo) double-double pairs (~32 digits), products with x reduce mod 1 or
mod 2 in double-double, and only the reduced fraction drops to a single
double before the sin/cos call.

Error-free transforms: Knuth two-sum, Dekker split + two-prod (no fma
dependence).  Everything is numpy-vectorized.
"""

from __future__ import annotations

import numpy as np

_SPLITTER = 134217729.0  # 2^27 + 1


def two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


def dd_sqrt(n):
    """(hi, lo) double-double sqrt of exact doubles n >= 0."""
    n = np.asarray(n, dtype=np.float64)
    s = np.sqrt(n)
    p, e = two_prod(s, s)
    r = (n - p) - e
    lo = np.where(s > 0, r / (2.0 * s), 0.0)
    return s, lo


def dd_cbrt(n):
    """(hi, lo) double-double cube root of exact doubles n >= 0."""
    n = np.asarray(n, dtype=np.float64)
    c = np.cbrt(n)
    # one Newton step in double-double: c <- c - (c^3 - n)/(3 c^2)
    p1, e1 = two_prod(c, c)
    p2a, e2a = two_prod(p1, c)
    e2 = e1 * c + e2a
    num_hi, num_lo = two_sum(p2a - n, e2)
    denom = 3.0 * p1
    corr = (num_hi + num_lo) / denom
    hi, lo = two_sum(c, -corr)
    return hi, lo


def dd_scale(hi, lo, f: float):
    """Double-double times an exact small float (2, 3, 0.5 ...)."""
    ph, pe = two_prod(hi, f)
    lo2 = pe + lo * f
    return two_sum(ph, lo2)


def dd_mul_float(hi, lo, x):
    """Double-double times an arbitrary double x (x treated exactly)."""
    ph, pe = two_prod(hi, x)
    lo2 = pe + lo * x
    return two_sum(ph, lo2)


def frac_mod(hi, lo, modulus: float):
    """(hi + lo) mod modulus in [0, modulus), collapsed to a double.

    hi must stay below 2^52 so that floor(hi/modulus)*modulus is exact for
    modulus in {1, 2}.
    """
    base = np.floor(hi / modulus) * modulus
    fh, fl = two_sum(hi - base, lo)
    f = fh + fl
    f = np.where(f < 0.0, f + modulus, f)
    f = np.where(f >= modulus, f - modulus, f)
    return f


def breve_dd(n, m: int, D: float):
    """Double-double dual frequency m*(n/D)^(1/m) for integer n, m in {2,3}.

    D is an exact small integer (1 or 4 for the built-ins), so n/D is exact
    for m = 2; for m = 3 the built-ins have D = 1.
    """
    n = np.asarray(n, dtype=np.float64)
    if m == 2:
        hi, lo = dd_sqrt(n / D)
        return dd_scale(hi, lo, 2.0)
    if m == 3:
        if D != 1.0:
            hi, lo = dd_cbrt(n)
            # divide by D^(1/3) in dd: multiply by dd of D^{-1/3}
            dh, dl = dd_cbrt(np.asarray(D, dtype=np.float64))
            inv = 1.0 / (dh + dl)
            hi, lo = dd_mul_float(hi, lo, inv)  # adequate: |lo/hi| ~ 1e-32
            return dd_scale(hi, lo, 3.0)
        hi, lo = dd_cbrt(n)
        return dd_scale(hi, lo, 3.0)
    raise ValueError("double-double frequencies implemented for m in {2, 3} only")
