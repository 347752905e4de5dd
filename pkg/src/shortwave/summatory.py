"""Exact summatory oracles that bypass coefficient tables.

All oracles work in int64 with exact integer square/cube roots (float seed
plus correction loops, exact for the full int64 range), so boundary terms are
never lost to floating sqrt.

  tau2:     sum_{n<=T} tau_2(n) = 2 sum_{d<=sqrt T} floor(T/d) - floor(sqrt T)^2,
            the hyperbola method, O(sqrt T).
  gaussian: sum_{n<=T} lambda(n) = (#{(a,b) != 0 : a^2+b^2 <= T}) / 4 with the
            lattice count walked in O(sqrt T): b = isqrt(T - a^2) only
            decreases as a grows, so one decrementing walk suffices.
  tau3:     inclusion-exclusion on the cube corners with v = floor(T^(1/3)):
            sum tau_3 = 3 sum_{a<=v} D2(T/a) - 3 sum_{a,b<=v} floor(T/(ab)) + v^3,
            O(T^(2/3)) using the tau2 oracle for the inner sums.

For the ideal counts of Q(i) there is additionally an exact O(y^(2/3))-style
oracle for the square sum S2(y) = sum_{n<=y} lambda(n)^2, far beyond any
table.  The Dirichlet series of lambda^2 factors as

    sum lambda(n)^2 n^-s = [zeta(s) L(s,chi)]^2 / (zeta(2s) (1 + 2^-s)),

so with G(Y) = sum_{ab<=Y} lambda(a) lambda(b) (a double hyperbola over the
lambda summatory) the square sum telescopes over odd squarefree k:

    S2(y) = sum_{k odd squarefree} mu(k) * [ G(y/k^2) - G(y/(2k^2)) ].

G only needs lambda(a) for a <= sqrt(Y) plus the lambda summatory, which is
served from a prefix table where available and the lattice walk beyond it.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

_KERNEL_OPTS = dict(cache=True, nogil=True)


@njit(**_KERNEL_OPTS)
def isqrt64(T):
    """Exact floor(sqrt(T)) for T >= 0 (int64)."""
    if T < 0:
        return np.int64(-1)
    r = np.int64(math.sqrt(np.float64(T)))
    while r > 0 and r * r > T:
        r -= 1
    while (r + 1) * (r + 1) <= T:
        r += 1
    return r


@njit(**_KERNEL_OPTS)
def icbrt64(T):
    """Exact floor(T^(1/3)) for T >= 0 (int64)."""
    if T < 0:
        return np.int64(-1)
    r = np.int64(np.float64(T) ** (1.0 / 3.0))
    while r > 0 and r * r * r > T:
        r -= 1
    while (r + 1) * (r + 1) * (r + 1) <= T:
        r += 1
    return r


@njit(**_KERNEL_OPTS)
def tau2_summatory(T):
    """Exact sum_{n<=T} tau_2(n), O(sqrt T)."""
    if T < 1:
        return np.int64(0)
    s = isqrt64(T)
    acc = np.int64(0)
    for d in range(1, s + 1):
        acc += T // d
    return 2 * acc - s * s


@njit(**_KERNEL_OPTS)
def disk_lattice_count(T):
    """#{(a,b) in Z^2 : a^2 + b^2 <= T}, origin included; O(sqrt T)."""
    if T < 0:
        return np.int64(0)
    r0 = isqrt64(T)
    total = 2 * r0 + 1
    b = r0
    for a in range(1, r0 + 1):
        rem = T - a * a
        while b * b > rem:
            b -= 1
        total += 2 * (2 * b + 1)
    return total


@njit(**_KERNEL_OPTS)
def gaussian_summatory4(T):
    """4 * sum_{n<=T} lambda(n) for the Q(i) ideal counts (exact integer)."""
    if T < 1:
        return np.int64(0)
    return disk_lattice_count(T) - 1


@njit(**_KERNEL_OPTS)
def tau3_summatory(T):
    """Exact sum_{n<=T} tau_3(n), O(T^(2/3))."""
    if T < 1:
        return np.int64(0)
    v = icbrt64(T)
    single = np.int64(0)
    for a in range(1, v + 1):
        single += tau2_summatory(T // a)
    double = np.int64(0)
    for a in range(1, v + 1):
        Ta = T // a
        for b in range(1, v + 1):
            double += Ta // b
    return 3 * single - 3 * double + v * v * v


# ---------------------------------------------------------------------------
# batch variants (one thread-friendly loop, results placed by index)
# ---------------------------------------------------------------------------


@njit(**_KERNEL_OPTS)
def batch_disk_counts(Ts, out):
    for i in range(Ts.shape[0]):
        out[i] = disk_lattice_count(Ts[i])


@njit(**_KERNEL_OPTS)
def batch_tau2(Ts, out):
    for i in range(Ts.shape[0]):
        out[i] = tau2_summatory(Ts[i])


@njit(**_KERNEL_OPTS)
def batch_tau3(Ts, out):
    for i in range(Ts.shape[0]):
        out[i] = tau3_summatory(Ts[i])


# ---------------------------------------------------------------------------
# exact square-sum oracle for the Q(i) ideal counts
# ---------------------------------------------------------------------------


@njit(**_KERNEL_OPTS)
def _lambda_summatory_hybrid(t, prefix):
    """sum_{n<=t} lambda(n): prefix table when covered, lattice walk beyond."""
    if t < 1:
        return np.int64(0)
    if t < prefix.shape[0]:
        return np.int64(prefix[t])
    return (disk_lattice_count(t) - 1) // 4


@njit(**_KERNEL_OPTS)
def gaussian_pair_summatory(Y, lam, prefix):
    """G(Y) = sum_{ab<=Y} lambda(a) lambda(b); needs lam through isqrt(Y)."""
    if Y < 1:
        return np.int64(0)
    s = isqrt64(Y)
    acc = np.int64(0)
    for a in range(1, s + 1):
        la = lam[a]
        if la != 0:
            acc += la * _lambda_summatory_hybrid(Y // a, prefix)
    S_s = _lambda_summatory_hybrid(s, prefix)
    return 2 * acc - S_s * S_s


@njit(**_KERNEL_OPTS)
def _mu_odd(k):
    m = np.int64(1)
    r = k
    p = np.int64(3)
    while p * p <= r:
        if r % p == 0:
            r //= p
            if r % p == 0:
                return np.int64(0)
            m = -m
        p += 2
    if r > 1:
        m = -m
    return m


@njit(**_KERNEL_OPTS)
def gaussian_square_summatory(y, lam, prefix):
    """Exact S2(y) = sum_{n<=y} lambda(n)^2; needs lam through isqrt(y)."""
    if y < 1:
        return np.int64(0)
    acc = np.int64(0)
    k = np.int64(1)
    while k * k <= y:
        mk = _mu_odd(k)
        if mk != 0:
            acc += mk * gaussian_pair_summatory(y // (k * k), lam, prefix)
            d2 = 2 * k * k
            if d2 <= y:
                acc -= mk * gaussian_pair_summatory(y // d2, lam, prefix)
        k += 2
    return acc


# ---------------------------------------------------------------------------
# Python-facing wrappers (accept plain ints, validate)
# ---------------------------------------------------------------------------

_INT64_SAFE = 2**62


def summatory_tau2_hyperbola(T: int) -> int:
    """Exact Sigma tau_2 up to T; pure-integer fallback past int64 comfort."""
    T = int(T)
    if T < 1:
        raise ValueError("T must be >= 1")
    if T < _INT64_SAFE // 64:
        return int(tau2_summatory(np.int64(T)))
    s = math.isqrt(T)
    return 2 * sum(T // d for d in range(1, s + 1)) - s * s


def summatory_gaussian_exact(T: int):
    """Exact Sigma lambda up to T for Q(i) ideal counts, a quarter-integer.

    Returned as a Fraction (the count of nonzero lattice points over 4).
    """
    from fractions import Fraction

    T = int(T)
    if T < 0:
        raise ValueError("T must be >= 0")
    if T == 0:
        return Fraction(0)
    return Fraction(int(disk_lattice_count(np.int64(T))) - 1, 4)


def summatory_tau3_hyperbola(T: int) -> int:
    T = int(T)
    if T < 1:
        raise ValueError("T must be >= 1")
    return int(tau3_summatory(np.int64(T)))
