"""Exact algebra of m-th roots: kernels, cancellations, diagonal moments.

Every n >= 1 factors uniquely as n = q r^m with q free of m-th powers; q is
the kernel.  Distinct kernels have Q-linearly independent m-th roots, so

    sum_j eps_j n_j^(1/m) = 0
        <=>  within every kernel class, sum_j eps_j r_j = 0 (integers).

Zero detection is therefore exact and algebraic -- interval arithmetic enters
only to bound magnitudes of provably nonzero sums, where the Galois-product
argument guarantees

    |sum_j eps_j n_j^(1/m)| >= (k N^(1/m))^-(m^k - 1).

The k-th moment of the truncated dual difference collapses onto tuples with
vanishing signed frequency sums.  Grouping a tuple by kernels q with
r-parts r_j, each kernel class S contributes

    D_q(S) = (w/pi)^|S| sum_{eps, r : <eps, r>|_S = 0}
             prod_{j in S} lambda(n_j)/sqrt(n_j)
                           * sin(pi breve(n_j) delta)/sqrt(breve(n_j))
                           * e^(i eps_j phi),      n_j = q r_j^m,

and the diagonal moment is the sum over set partitions of [k] and distinct
kernel assignments of the product of the D_q(S).  D_q depends on |S| only;
the signed-zero convolution (h * ... * h)[0] with h(+-r) = g(r) e^(+-i phi)
evaluates it in O(R^2) per kernel instead of O((2R)^|S|).
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np

from .coefficients import CoefficientTable
from .descriptors import LFunctionDescriptor

_FACTOR_BUDGET = 10**12


@dataclass(frozen=True)
class KernelDecomposition:
    n: int
    m: int
    q: int
    r: int

    def __post_init__(self):
        if self.q * self.r**self.m != self.n:
            raise ValueError("q * r^m must equal n")


@lru_cache(maxsize=200_000)
def _factorize(n: int) -> tuple[tuple[int, int], ...]:
    if n > _FACTOR_BUDGET:
        raise ValueError(f"n={n} exceeds the trial-factorization budget {_FACTOR_BUDGET}")
    out = []
    for p in (2, 3):
        a = 0
        while n % p == 0:
            n //= p
            a += 1
        if a:
            out.append((p, a))
    p = 5
    step = 2
    while p * p <= n:
        a = 0
        while n % p == 0:
            n //= p
            a += 1
        if a:
            out.append((p, a))
        p += step
        step = 6 - step
    if n > 1:
        out.append((n, 1))
    return tuple(out)


def powerfree_kernel(n: int, m: int) -> KernelDecomposition:
    """Unique (q, r) with n = q r^m and q m-th-power-free."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if m < 2:
        raise ValueError("m must be >= 2")
    q, r = 1, 1
    for p, a in _factorize(int(n)):
        q *= p ** (a % m)
        r *= p ** (a // m)
    return KernelDecomposition(int(n), m, q, r)


def is_zero_alternating(m: int, ns, eps) -> bool:
    """Exact test of sum_j eps_j n_j^(1/m) == 0 via kernel grouping."""
    if len(ns) != len(eps) or not ns:
        raise ValueError("ns and eps must be equal-length nonempty lists")
    groups: dict[int, int] = {}
    for n, e in zip(ns, eps):
        if n < 1:
            raise ValueError("entries must be >= 1")
        if e not in (-1, 1):
            raise ValueError("signs must be +-1")
        kd = powerfree_kernel(n, m)
        groups[kd.q] = groups.get(kd.q, 0) + e * kd.r
    return all(v == 0 for v in groups.values())


@dataclass
class AlternatingMinimum:
    min_abs: object            # mpmath mpf
    witness_ns: tuple[int, ...]
    witness_eps: tuple[int, ...]
    bound: float
    zeros_detected: int
    tuples_checked: int


_DEFAULT_TUPLE_BUDGET = 10**9


def min_alternating_sum(
    m: int, N: int, k: int, tuple_budget: int = _DEFAULT_TUPLE_BUDGET
) -> AlternatingMinimum:
    """Full enumeration of |sum eps_j n_j^(1/m)| over nonzero combinations.

    Exact zeros are skipped through the kernel test; magnitudes are bounded
    with interval arithmetic at escalating precision until each interval
    separates from zero.  The returned minimum is asserted against the
    Galois-product lower bound (k N^(1/m))^-(m^k - 1).
    """
    total = (2 * N) ** k
    if total > tuple_budget:
        import warnings

        warnings.warn(
            f"enumeration of {total} tuples above budget {tuple_budget}; proceeding",
            stacklevel=2,
        )
    bound = (k * N ** (1.0 / m)) ** -(m**k - 1)
    best = None
    witness = None
    zeros = 0
    checked = 0
    root_cache = {}

    def roots_at(prec):
        if prec not in root_cache:
            old = mpmath.iv.prec
            try:
                mpmath.iv.prec = prec
                root_cache[prec] = [
                    mpmath.iv.mpf(n) ** (mpmath.iv.mpf(1) / m) for n in range(1, N + 1)
                ]
            finally:
                mpmath.iv.prec = old
        return root_cache[prec]

    for ns in itertools.product(range(1, N + 1), repeat=k):
        for eps in itertools.product((1, -1), repeat=k):
            checked += 1
            if is_zero_alternating(m, ns, eps):
                zeros += 1
                continue
            prec = 128
            while True:
                rt = roots_at(prec)
                old = mpmath.iv.prec
                try:
                    mpmath.iv.prec = prec
                    acc = mpmath.iv.mpf(0)
                    for n, e in zip(ns, eps):
                        acc = acc + rt[n - 1] if e > 0 else acc - rt[n - 1]
                finally:
                    mpmath.iv.prec = old
                if 0 not in acc:
                    # conservative magnitude: nearest interval endpoint to zero
                    mag = min(abs(mpmath.mpf(acc.a)), abs(mpmath.mpf(acc.b)))
                    break
                prec *= 2
                if prec > 1 << 14:
                    raise RuntimeError(
                        f"interval failed to separate {ns} {eps} from zero; "
                        "kernel grouping should have caught an exact zero"
                    )
            if best is None or mag < best:
                best = mag
                witness = (ns, eps)
    if best is None:
        raise ValueError("no nonzero combinations in range")
    if float(best) < bound * (1.0 - 1e-12):
        raise AssertionError(
            f"minimum {float(best)} violates the lower bound {bound} at (m={m}, N={N}, k={k})"
        )
    return AlternatingMinimum(best, witness[0], witness[1], bound, zeros, checked)


# ---------------------------------------------------------------------------
# diagonal enumeration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiagonalGroup:
    q: int
    indices: tuple[int, ...]        # subset of 0..k-1
    eps: tuple[int, ...]
    r: tuple[int, ...]


@dataclass(frozen=True)
class DiagonalDecomposition:
    k: int
    m: int
    N: int
    groups: tuple[DiagonalGroup, ...]

    def to_json_line(self) -> str:
        return json.dumps(
            {
                "k": self.k,
                "m": self.m,
                "N": self.N,
                "groups": [
                    {"q": g.q, "S": list(g.indices), "eps": list(g.eps), "r": list(g.r)}
                    for g in self.groups
                ],
            },
            sort_keys=True,
        )


def enumerate_diagonal(m: int, N: int, k: int, tuple_budget: int = _DEFAULT_TUPLE_BUDGET):
    """Yield every (eps, n) in {+-1}^k x [N]^k with vanishing signed root sum,
    grouped by kernel.  Groups carry exact integer witnesses r with zero
    signed sums; kernels are distinct by construction."""
    total = (2 * N) ** k
    if total > tuple_budget:
        import warnings

        warnings.warn(
            f"enumeration of {total} tuples above budget {tuple_budget}; proceeding",
            stacklevel=2,
        )
    kernels = [powerfree_kernel(n, m) for n in range(1, N + 1)]
    for ns in itertools.product(range(1, N + 1), repeat=k):
        kds = [kernels[n - 1] for n in ns]
        for eps in itertools.product((1, -1), repeat=k):
            sums: dict[int, int] = {}
            for kd, e in zip(kds, eps):
                sums[kd.q] = sums.get(kd.q, 0) + e * kd.r
            if any(v != 0 for v in sums.values()):
                continue
            by_q: dict[int, list[int]] = {}
            for i, kd in enumerate(kds):
                by_q.setdefault(kd.q, []).append(i)
            groups = tuple(
                DiagonalGroup(
                    q=q,
                    indices=tuple(idx),
                    eps=tuple(eps[i] for i in idx),
                    r=tuple(kds[i].r for i in idx),
                )
                for q, idx in sorted(by_q.items())
            )
            yield DiagonalDecomposition(k=k, m=m, N=N, groups=groups)


# ---------------------------------------------------------------------------
# the diagonal moment oracle
# ---------------------------------------------------------------------------


class MomentSymmetryError(RuntimeError):
    """Imaginary part of the assembled moment failed to vanish."""


def _set_partitions(items: tuple[int, ...]):
    """All partitions of items into unordered blocks."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [part[i] + [first]] + part[i + 1 :]
        yield part + [[first]]


def _powerfree_flags(N: int, m: int) -> np.ndarray:
    free = np.ones(N + 1, dtype=bool)
    free[0] = False
    p = 2
    while p**m <= N:
        free[p**m :: p**m] = False
        p += 1
    return free


def moment_oracle(
    d: LFunctionDescriptor,
    table: CoefficientTable,
    delta: float,
    N: int,
    k: int,
    imag_tol: float = 1e-12,
) -> float:
    """Exact diagonal value of the k-th moment of the truncated dual difference.

    Sums prod_i D_{q_i}(S_i) over set partitions of [k] and distinct m-th-
    power-free kernels.  Kernel classes of size 1 vanish (a single r >= 1
    cannot cancel), so only partitions with all blocks >= 2 contribute; the
    distinct-kernel sums are inclusion-exclusion over coincidences (blocks
    never exceed 3 for k <= 6).  Evaluated in complex arithmetic with the
    e^(i eps phi) factors as written; the imaginary part must vanish.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if N > table.n_max:
        raise ValueError(f"N={N} beyond table n_max={table.n_max}")
    if k == 1:
        return 0.0
    sizes_needed = sorted(
        {len(b) for part in _set_partitions(tuple(range(k))) for b in part if all(len(x) >= 2 for x in part)}
    )
    if not sizes_needed:
        return 0.0
    smax = max(sizes_needed)

    free = _powerfree_flags(N, d.m)
    qs = np.nonzero(free)[0]
    lam = table.values_f64
    wpi = d.w / math.pi
    ephi = complex(math.cos(d.phi), math.sin(d.phi))

    # D[s][iq] = D_q(block of size s); complex
    D = {s: np.zeros(len(qs), dtype=np.complex128) for s in sizes_needed}
    for iq, q in enumerate(qs):
        R = int((N / q) ** (1.0 / d.m) + 1e-9)
        while (R + 1) ** d.m * q <= N:
            R += 1
        while R >= 1 and R**d.m * q > N:
            R -= 1
        if R < 1:
            continue
        r = np.arange(1, R + 1, dtype=np.float64)
        n = q * r**d.m
        nb = d.m * (n / d.D) ** (1.0 / d.m)
        g = lam[(n - 1).astype(np.int64)] / np.sqrt(n) * np.sin(math.pi * nb * delta) / np.sqrt(nb)
        # h over signed support -R..R: h(+r) = g_r e^{i phi}, h(-r) = g_r e^{-i phi}
        h = np.zeros(2 * R + 1, dtype=np.complex128)
        h[R + 1 :] = g * ephi
        h[:R] = (g * ephi.conjugate())[::-1]
        conv = h
        power = 1
        for s in sizes_needed:
            while power < s:
                conv = np.convolve(conv, h)
                power += 1
            # zero-sum coefficient sits at the center
            D[s][iq] = wpi**s * conv[(len(conv) - 1) // 2]

    def distinct_product_sum(blocks):
        """sum over distinct kernel assignments of prod_i D[len(blocks[i])]."""
        vs = [D[len(b)] for b in blocks]
        l = len(vs)
        if l == 1:
            return np.sum(vs[0])
        if l == 2:
            return np.sum(vs[0]) * np.sum(vs[1]) - np.sum(vs[0] * vs[1])
        if l == 3:
            s1, s2, s3 = (np.sum(v) for v in vs)
            p12, p13, p23 = np.sum(vs[0] * vs[1]), np.sum(vs[0] * vs[2]), np.sum(vs[1] * vs[2])
            p123 = np.sum(vs[0] * vs[1] * vs[2])
            return s1 * s2 * s3 - p12 * s3 - p13 * s2 - p23 * s1 + 2 * p123
        raise ValueError("partitions with more than 3 blocks not supported (k <= 6)")

    total = 0j
    for part in _set_partitions(tuple(range(k))):
        if any(len(b) < 2 for b in part):
            continue
        total += distinct_product_sum(part)
    scale = abs(total) if abs(total) > 0 else 1.0
    if abs(total.imag) > imag_tol * max(1.0, scale):
        raise MomentSymmetryError(
            f"moment imaginary part {total.imag} exceeds tolerance (conjugation symmetry bug)"
        )
    return float(total.real)
