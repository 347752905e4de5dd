"""Euler-product evaluation of the mean-square constant for tau_k.

The partial sums of tau_k(n)^2 grow like c * y (ln 2y)^{k^2 - 1} with

    c = (1/(k^2 - 1)!) * prod_p (1 - 1/p)^{k^2} sum_{j>=0} C(j+k-1, j)^2 p^{-j}.

The 1/(k^2-1)! converts the density of the degree-(k^2-1) log power into the
partial-sum normalization used throughout; for k = 2 the product telescopes to
1/zeta(2) and c = 1/pi^2, the classical constant of sum tau(n)^2 ~ y ln^3 y/pi^2.

The product over p <= P is evaluated with the inner series summed to 1e-15
relative tail; the p > P remainder is bounded through the log expansion (each
factor is 1 + O(k^4/p^2)) and reported as an interval half-width.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def primes_up_to(n: int) -> np.ndarray:
    """Ascending primes <= n (simple numpy sieve)."""
    if n < 2:
        return np.empty(0, dtype=np.int64)
    mask = np.ones(n + 1, dtype=bool)
    mask[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if mask[p]:
            mask[p * p :: p] = False
    return np.nonzero(mask)[0].astype(np.int64)


def tau_k_local_factor(k: int, p: int, rel_tol: float = 1e-15) -> float:
    """(1 - 1/p)^{k^2} * sum_j C(j+k-1, j)^2 p^{-j} for a single prime."""
    x = 1.0 / p
    term = 1.0  # j = 0: C(k-1, 0)^2 = 1
    binom = 1.0
    total = term
    j = 0
    while True:
        binom *= (j + k) / (j + 1)  # C(j+k, j+1) from C(j+k-1, j)
        j += 1
        term = binom * binom * x**j
        total += term
        if term < rel_tol * total and j >= k:
            break
        if j > 10_000:
            raise RuntimeError(f"inner series for p={p}, k={k} failed to converge")
    return (1.0 - x) ** (k * k) * total


@dataclass(frozen=True)
class EulerProductValue:
    value: float
    halfwidth: float
    prime_cutoff: int
    k: int


def euler_product_c_tau_k(k: int, prime_cutoff: int) -> EulerProductValue:
    """Mean-square constant c for tau_k with a tail-interval half-width."""
    if k < 2:
        raise ValueError("k must be at least 2")
    if prime_cutoff < 10**3:
        raise ValueError("prime cutoff must be at least 10^3")
    log_total = 0.0
    for p in primes_up_to(prime_cutoff):
        log_total += math.log(tau_k_local_factor(k, int(p)))
    product = math.exp(log_total) / math.factorial(k * k - 1)
    # crude but sufficient: sum_{p>P} k^4/p^2 <= k^4/(P ln P)
    tail = k**4 / (prime_cutoff * math.log(prime_cutoff))
    halfwidth = product * (math.exp(tail) - 1.0)
    return EulerProductValue(product, halfwidth, prime_cutoff, k)
