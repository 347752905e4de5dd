"""Coefficient tables: sieves, exact backing, prefix sums, CSV exchange.

Tables hold lambda(1..n_max) as floats plus, where possible, exact integer
backing: tau_k values directly, the Q(i) ideal counts as 4*lambda = r2(n) (so
the stored integers are the lattice counts; every consumer divides by 4 at
the boundary), and tau(n) of the weight-12 cusp form as arbitrary-precision
ints with lambda(n) = tau(n)/n^(11/2).

Prefix sums of lambda and lambda^2: integer tables accumulate exactly (int64
cumsum when the worst-case bound fits, Python ints otherwise) and convert to
float on store; float-valued tables accumulate with Kahan compensation.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numba import njit

_SIEVE_OPTS = dict(cache=True)


@dataclass
class CoefficientTable:
    descriptor_id: str
    n_max: int
    values_f64: np.ndarray                      # lambda(1..n_max), index 0 = n=1
    values_exact: np.ndarray | list | None = None
    prefix_lambda: np.ndarray = field(default=None, repr=False)
    prefix_lambda_sq: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if len(self.values_f64) != self.n_max:
            raise ValueError("values_f64 length must equal n_max")
        if self.prefix_lambda is None:
            self.prefix_lambda, self.prefix_lambda_sq = _build_prefixes(
                self.values_f64, self.values_exact, self.descriptor_id
            )

    def value(self, n: int) -> float:
        return float(self.values_f64[n - 1])

    def summatory(self, T) -> float:
        """Prefix sum Sigma_{n<=T} lambda(n); exact backing where it exists."""
        if T > self.n_max:
            raise ValueError(f"T={T} beyond table range n_max={self.n_max}")
        t = int(math.floor(T))
        if t < 1:
            return 0.0
        return float(self.prefix_lambda[t - 1])

    def summatory_sq(self, T) -> float:
        if T > self.n_max:
            raise ValueError(f"T={T} beyond table range n_max={self.n_max}")
        t = int(math.floor(T))
        if t < 1:
            return 0.0
        return float(self.prefix_lambda_sq[t - 1])


def _kahan_cumsum(values: np.ndarray) -> np.ndarray:
    out = np.empty(len(values), dtype=np.float64)
    total = 0.0
    comp = 0.0
    for i, v in enumerate(values):
        y = v - comp
        t = total + y
        comp = (t - total) - y
        total = t
        out[i] = total
    return out


@njit(**_SIEVE_OPTS)
def _kahan_cumsum_jit(values):
    out = np.empty(values.shape[0], dtype=np.float64)
    total = 0.0
    comp = 0.0
    for i in range(values.shape[0]):
        y = values[i] - comp
        t = total + y
        comp = (t - total) - y
        total = t
        out[i] = total
    return out


def _build_prefixes(values_f64, values_exact, descriptor_id):
    n = len(values_f64)
    if isinstance(values_exact, np.ndarray) and values_exact.dtype == np.int64:
        ints = values_exact.astype(object) if _cumsum_overflows(values_exact) else values_exact
        scale = 4.0 if descriptor_id.startswith("gaussian_ideal") else 1.0
        if isinstance(ints, np.ndarray):
            pl = np.cumsum(ints).astype(np.float64) / scale
            ps = np.cumsum(ints * ints).astype(np.float64) / scale**2
        else:  # big-int path
            pl = np.array(list(_running(ints)), dtype=np.float64) / scale
            ps = np.array(list(_running(v * v for v in ints)), dtype=np.float64) / scale**2
        return pl, ps
    vals = np.asarray(values_f64, dtype=np.float64)
    return _kahan_cumsum_jit(vals), _kahan_cumsum_jit(vals * vals)


def _running(it):
    acc = 0
    for v in it:
        acc += v
        yield acc


def _cumsum_overflows(arr: np.ndarray) -> bool:
    m = int(np.abs(arr).max(initial=0))
    return m * m * len(arr) >= 2**62


# ---------------------------------------------------------------------------
# linear sieve over the smallest prime factor
# ---------------------------------------------------------------------------


@njit(**_SIEVE_OPTS)
def _smallest_prime_factor(N):
    lp = np.zeros(N + 1, dtype=np.int32)
    primes = np.empty(max(N // 2, 8), dtype=np.int64)
    count = 0
    for i in range(2, N + 1):
        if lp[i] == 0:
            lp[i] = i
            primes[count] = i
            count += 1
        j = 0
        while j < count:
            p = primes[j]
            if p > lp[i] or i * p > N:
                break
            lp[i * p] = np.int32(p)
            j += 1
    return lp


@njit(**_SIEVE_OPTS)
def _sieve_multiplicative_tau_k(lp, k, N, pp):
    """tau_k values in int64; returns (values, bad_n): bad_n >= 0 on overflow."""
    val = np.zeros(N + 1, dtype=np.int64)
    cnt = np.zeros(N + 1, dtype=np.int8)
    quo = np.zeros(N + 1, dtype=np.int32)
    val[1] = 1
    quo[1] = 1
    for n in range(2, N + 1):
        p = lp[n]
        m = n // p
        if lp[m] == p:
            cnt[n] = cnt[m] + 1
            quo[n] = quo[m]
        else:
            cnt[n] = 1
            quo[n] = np.int32(m)
        b = pp[cnt[n]]
        if b < 0:
            return val, np.int64(n)
        v = val[quo[n]] * b
        if val[quo[n]] != 0 and v // b != val[quo[n]]:
            return val, np.int64(n)
        val[n] = v
    return val, np.int64(-1)


@njit(**_SIEVE_OPTS)
def _sieve_gaussian_lambda(lp, N):
    """Ideal counts lambda(n) of Q(i) in int64 (multiplicative rules)."""
    val = np.zeros(N + 1, dtype=np.int64)
    cnt = np.zeros(N + 1, dtype=np.int8)
    quo = np.zeros(N + 1, dtype=np.int32)
    val[1] = 1
    quo[1] = 1
    for n in range(2, N + 1):
        p = lp[n]
        m = n // p
        if lp[m] == p:
            cnt[n] = cnt[m] + 1
            quo[n] = quo[m]
        else:
            cnt[n] = 1
            quo[n] = np.int32(m)
        a = cnt[n]
        if p == 2:
            local = 1
        elif p % 4 == 1:
            local = a + 1
        else:
            local = 1 if a % 2 == 0 else 0
        val[n] = val[quo[n]] * local
    return val


def sieve_tau_k(k: int, N: int) -> CoefficientTable:
    """tau_k(1..N) by the linear sieve; tau_k(p^a) = C(a+k-1, a)."""
    if k < 2:
        raise ValueError("k must be >= 2")
    if N < 1:
        raise ValueError("N must be >= 1")
    pp = np.full(66, -1, dtype=np.int64)
    pp[0] = 1
    for a in range(1, 66):
        prev = int(pp[a - 1])
        if prev < 0:
            break
        nxt = prev * (a + k - 1) // a  # exact: C grows by (a+k-1)/a
        pp[a] = nxt if nxt < 2**62 else -1
    lp = _smallest_prime_factor(np.int64(N))
    val, bad = _sieve_multiplicative_tau_k(lp, np.int64(k), np.int64(N), pp)
    if bad >= 0:
        p = int(lp[int(bad)])
        a = 0
        t = int(bad)
        while t % p == 0:
            t //= p
            a += 1
        raise OverflowError(
            f"tau_{k} exact value overflows int64 at n={int(bad)} (prime power {p}^{a})"
        )
    exact = val[1:].copy()
    return CoefficientTable(f"tau_{k}", N, exact.astype(np.float64), exact)


def sieve_gaussian_ideals(N: int, lattice_counts: bool = False) -> CoefficientTable:
    """Ideal counts of Q(i): lambda(n) = sum_{d|n} chi_-4(d).

    With lattice_counts=True the table carries r2(n) = 4*lambda(n) itself
    (the thin-annuli normalization; every mean square scales by 16).
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    lp = _smallest_prime_factor(np.int64(N))
    lam = _sieve_gaussian_lambda(lp, np.int64(N))[1:]
    if lattice_counts:
        exact = 4 * lam
        return CoefficientTable("gaussian_lattice", N, exact.astype(np.float64), exact)
    exact = 4 * lam  # stored integers are r2(n); lambda = exact/4
    return CoefficientTable("gaussian_ideals", N, lam.astype(np.float64), exact)


def eta24_coefficients(N: int) -> CoefficientTable:
    """tau(n) of Delta = q prod (1-q^n)^24, exact, with lambda = tau/n^(11/2).

    prod (1-q^n)^3 = sum_j (-1)^j (2j+1) q^{j(j+1)/2} is sparse with O(sqrt N)
    terms; the dense accumulator is multiplied by it 8 times, O(N sqrt N)
    Python-int work overall.  That budget caps practical N around 10^7 and
    test-scale use well below; the range/runtime trade lives entirely here.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if N > 10**7:
        raise ValueError("N > 1e7 exceeds the eta24 runtime budget")
    # sparse cube: exponent j(j+1)/2, coefficient (-1)^j (2j+1), exponents < N
    sparse = []
    j = 0
    while j * (j + 1) // 2 < N:
        sparse.append((j * (j + 1) // 2, (-(2 * j + 1)) if j % 2 else (2 * j + 1)))
        j += 1
    acc = [0] * N
    acc[0] = 1
    for _ in range(8):
        new = [0] * N
        for off, c in sparse:
            if c == 1:
                for i in range(0, N - off):
                    if acc[i]:
                        new[i + off] += acc[i]
            elif c == -1:
                for i in range(0, N - off):
                    if acc[i]:
                        new[i + off] -= acc[i]
            else:
                for i in range(0, N - off):
                    if acc[i]:
                        new[i + off] += c * acc[i]
        acc = new
    tau = acc  # tau(n) = acc[n-1] after the q-shift
    vals = np.array([t / float(n) ** 5.5 for n, t in enumerate(tau, start=1)], dtype=np.float64)
    return CoefficientTable("ramanujan", N, vals, tau)


# ---------------------------------------------------------------------------
# CSV exchange
# ---------------------------------------------------------------------------


def load_coefficients(path, descriptor_id: str) -> CoefficientTable:
    """Ingest a 'n,lambda' CSV with n contiguous from 1; gaps are errors."""
    path = Path(path)
    values = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"{path}: no rows")
        if [h.strip() for h in header] != ["n", "lambda"]:
            raise ValueError(f"{path}: expected header 'n,lambda', got {header!r}")
        expected = 1
        for row in reader:
            if not row:
                continue
            try:
                n = int(row[0])
                lam = float(row[1])
            except (ValueError, IndexError) as exc:
                raise ValueError(f"{path}: non-numeric row {row!r}") from exc
            if n != expected:
                if n > expected:
                    raise ValueError(f"{path}: gap at n={expected}")
                raise ValueError(f"{path}: n must ascend from 1, got n={n}")
            values.append(lam)
            expected += 1
    if not values:
        raise ValueError(f"{path}: no rows")
    return CoefficientTable(descriptor_id, len(values), np.array(values, dtype=np.float64))


def export_coefficients(table: CoefficientTable, path) -> Path:
    """Write the table as 'n,lambda' CSV plus a metadata sidecar JSON."""
    path = Path(path)
    lines = ["n,lambda"]
    lines += [f"{n},{v!r}" for n, v in enumerate(table.values_f64, start=1)]
    body = "\n".join(lines) + "\n"
    path.write_text(body, encoding="utf-8", newline="")
    meta = {
        "descriptor_id": table.descriptor_id,
        "n_max": table.n_max,
        "checksum_sha256": hashlib.sha256(body.encode()).hexdigest(),
    }
    sidecar = path.with_suffix(path.suffix + ".meta.json")
    sidecar.write_text(json.dumps(meta, indent=2, sort_keys=True), encoding="utf-8")
    return sidecar


def summatory_direct(table: CoefficientTable, T) -> float:
    """Prefix-sum oracle Sigma_{n<=T} lambda(n) (T within the table)."""
    return table.summatory(T)
