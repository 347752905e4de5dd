"""Remainders Delta_f and their truncated dual-sum approximations.

The remainder of the coefficient sum is

    Delta(x^m) = Sigma_{n <= x^m} lambda(n) - MainTerm(x^m),

computed exactly through the fastest summatory oracle available for the
instance (hyperbola, lattice walk, tau_3 decomposition) with prefix sums as
the fallback.  Its dual expansion truncated at N is

    Delta(x^m) ~ (w/pi) x^{(m-1)/2} sum_{n<=N} lambda(n)/sqrt(n)
                 * sin(2 pi breve(n) x + phi) / sqrt(breve(n)),

and the short-interval difference quantity

    D(x, delta) = Delta((x+delta)^m)/(x+delta)^{(m-1)/2} - Delta(x^m)/x^{(m-1)/2}

has the product-to-sum form

    D(x, delta; N) = (2w/pi) sum_{n<=N} lambda(n)/sqrt(n)
                     * sin(pi breve(n) delta)/sqrt(breve(n))
                     * cos(pi breve(n) (2x + delta) + phi).

All large trig arguments are reduced in double-double before evaluation
(breve(n) x up to 1e12 leaves ~1e-20 phase error that way).  Terms are summed
ascending in n; magnitudes decay like n^{-1/2 - 1/2m}.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import summatory as sm
from .coefficients import CoefficientTable
from .dd import breve_dd, dd_mul_float, frac_mod
from .descriptors import LFunctionDescriptor
from .laurent import eval_poly
from .rng import uniform_open_interval


class DegenerateFitError(RuntimeError):
    """Raised when a least-squares phase fit has a flat objective."""


def breve(n, d: LFunctionDescriptor) -> float:
    """Dual frequency m*(n/D)^(1/m)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return d.breve(n)


def _check_validity_floor(d: LFunctionDescriptor, x: float) -> None:
    floor = d.D ** (1.0 / (2.0 * d.m))
    if x < floor:
        warnings.warn(
            f"x={x} below the dual-sum validity floor D^(1/2m)={floor:.4g}; proceeding",
            stacklevel=3,
        )


def _chunked(worklen: int, workers: int):
    workers = max(1, int(workers))
    step = max(1, -(-worklen // workers))
    return [(i, min(i + step, worklen)) for i in range(0, worklen, step)]


def summatory_batch(
    d: LFunctionDescriptor,
    Ts: np.ndarray,
    table: CoefficientTable | None = None,
    workers: int = 1,
) -> np.ndarray:
    """Exact Sigma lambda at integer thresholds Ts, vectorized and threaded."""
    Ts = np.asarray(Ts, dtype=np.int64)
    out = np.empty(len(Ts), dtype=np.float64)

    if d.id in ("gaussian_ideals", "gaussian_lattice"):
        counts = np.empty(len(Ts), dtype=np.int64)
        _run_batch(sm.batch_disk_counts, Ts, counts, workers)
        scale = 1.0 if d.id == "gaussian_lattice" else 0.25
        np.subtract(counts, 1, out=counts)
        out[:] = counts * scale
        return out
    if d.id == "tau_2":
        acc = np.empty(len(Ts), dtype=np.int64)
        _run_batch(sm.batch_tau2, Ts, acc, workers)
        return acc.astype(np.float64)
    if d.id == "tau_3":
        acc = np.empty(len(Ts), dtype=np.int64)
        _run_batch(sm.batch_tau3, Ts, acc, workers)
        return acc.astype(np.float64)
    if table is None:
        raise ValueError(f"no fast oracle for {d.id!r} and no table supplied")
    if Ts.max(initial=0) > table.n_max:
        raise ValueError(f"threshold {int(Ts.max())} beyond table n_max={table.n_max}")
    prefix = np.concatenate([[0.0], table.prefix_lambda])
    return prefix[np.clip(Ts, 0, table.n_max)]


def _run_batch(kernel, Ts, out, workers):
    spans = _chunked(len(Ts), workers)
    if len(spans) == 1:
        kernel(Ts, out)
        return
    with ThreadPoolExecutor(max_workers=len(spans)) as pool:
        futs = [pool.submit(kernel, Ts[a:b], out[a:b]) for a, b in spans]
        for f in futs:
            f.result()


def delta_direct(
    d: LFunctionDescriptor, x: float, table: CoefficientTable | None = None
) -> float:
    """Delta(x^m) = S(floor(x^m)) - x^m P(ln x^m), exact summatory part."""
    return float(delta_direct_batch(d, np.array([x], dtype=np.float64), table)[0])


def delta_direct_batch(
    d: LFunctionDescriptor,
    xs: np.ndarray,
    table: CoefficientTable | None = None,
    workers: int = 1,
) -> np.ndarray:
    xs = np.asarray(xs, dtype=np.float64)
    if np.any(xs <= 0):
        raise ValueError("x must be positive")
    _check_validity_floor(d, float(xs.min()))
    T_real = xs**d.m
    Ts = np.floor(T_real).astype(np.int64)
    S = summatory_batch(d, Ts, table, workers)
    if d.main_term_poly:
        coeffs = d.main_term_poly
        u = np.log(T_real)
        P = np.zeros_like(u)
        for c in reversed(coeffs):
            P = P * u + c
        S = S - T_real * P
    return S


def delta_pair_normalized(
    d: LFunctionDescriptor,
    x: float,
    delta: float,
    sigma: float,
    table: CoefficientTable | None = None,
) -> float:
    """[Delta((x+delta)^m) - Delta(x^m)] / (x^{(m-1)/2} sigma).

    The main-term part enters as MainTerm((x+delta)^m) - MainTerm(x^m), the
    residue of L(f,s) ((x+delta)^{ms} - x^{ms}) / s.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if delta == 0.0:
        return 0.0
    pair = delta_direct_batch(d, np.array([x, x + delta]), table)
    return float((pair[1] - pair[0]) / (x ** ((d.m - 1) / 2.0) * sigma))


# ---------------------------------------------------------------------------
# truncated dual sums
# ---------------------------------------------------------------------------


@dataclass
class _DualArrays:
    nb_hi: np.ndarray
    nb_lo: np.ndarray
    nb: np.ndarray
    amp: np.ndarray  # lambda(n) / (sqrt(n) sqrt(breve n))


def _dual_arrays(d: LFunctionDescriptor, table: CoefficientTable, N: int) -> _DualArrays:
    if N < 0:
        raise ValueError("N must be >= 0")
    if N > table.n_max:
        raise ValueError(f"table covers n <= {table.n_max}, dual sum wants N={N}")
    n = np.arange(1, N + 1, dtype=np.float64)
    nb_hi, nb_lo = breve_dd(n, d.m, d.D)
    nb = nb_hi + nb_lo
    lam = table.values_f64[:N]
    amp = lam / (np.sqrt(n) * np.sqrt(nb))
    return _DualArrays(nb_hi, nb_lo, nb, amp)


def dual_sum_truncated(
    d: LFunctionDescriptor, x: float, N: int, table: CoefficientTable
) -> float:
    """(w/pi) x^{(m-1)/2} Sigma_{n<=N} lambda/sqrt(n) sin(2 pi breve x + phi)/sqrt(breve)."""
    _check_validity_floor(d, x)
    if N == 0:
        return 0.0
    ar = _dual_arrays(d, table, N)
    frac = frac_mod(*dd_mul_float(ar.nb_hi, ar.nb_lo, x), 1.0)
    terms = ar.amp * np.sin(2.0 * math.pi * frac + d.phi)
    return d.w / math.pi * x ** ((d.m - 1) / 2.0) * float(np.sum(terms))


def delta_approx(
    d: LFunctionDescriptor,
    x: float,
    delta: float,
    N: int,
    table: CoefficientTable,
) -> float:
    """Truncated dual form of the normalized short-interval difference."""
    _check_validity_floor(d, x)
    if N == 0:
        return 0.0
    ar = _dual_arrays(d, table, N)
    return _delta_approx_from_arrays(d, ar, x, delta)


def _delta_approx_from_arrays(d, ar: _DualArrays, x: float, delta: float) -> float:
    mod2 = frac_mod(*dd_mul_float(ar.nb_hi, ar.nb_lo, 2.0 * x + delta), 2.0)
    terms = ar.amp * np.sin(math.pi * ar.nb * delta) * np.cos(math.pi * mod2 + d.phi)
    return 2.0 * d.w / math.pi * float(np.sum(terms))


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------


@dataclass
class PhaseDiagnostic:
    phi_hat: float
    phi_expected: float
    phase_error: float
    amplitude_ratio: float
    residual_ratio: float
    x: np.ndarray
    direct: np.ndarray
    fitted: np.ndarray


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def phase_diagnostic(
    d: LFunctionDescriptor,
    X: float,
    M: int,
    N: int,
    table: CoefficientTable,
    workers: int = 1,
) -> PhaseDiagnostic:
    """Least-squares fit of the dual-sum phase against exact remainders.

    Writing sin(2 pi breve x + phi_hat) = cos(phi_hat) sin(...) +
    sin(phi_hat) cos(...), the model is linear in (cos phi_hat, sin phi_hat);
    the fit solves the 2x2 normal equations over a golden-ratio sample of
    x in [X, 2X] and reports the recovered phase, its distance from the
    descriptor's phase, the amplitude ratio, and the residual ratio.
    """
    if M < 2:
        raise ValueError("need at least 2 samples")
    xs = X * (1.0 + np.modf(_GOLDEN * np.arange(1, M + 1))[0])
    direct = delta_direct_batch(d, xs, table, workers)
    ar = _dual_arrays(d, table, N)
    pref = d.w / math.pi * xs ** ((d.m - 1) / 2.0)
    Bc = np.empty(M)
    Bs = np.empty(M)
    for i, x in enumerate(xs):
        frac = frac_mod(*dd_mul_float(ar.nb_hi, ar.nb_lo, x), 1.0)
        Bc[i] = pref[i] * np.sum(ar.amp * np.sin(2.0 * math.pi * frac))
        Bs[i] = pref[i] * np.sum(ar.amp * np.cos(2.0 * math.pi * frac))
    gram = np.array([[Bc @ Bc, Bc @ Bs], [Bc @ Bs, Bs @ Bs]])
    rhs = np.array([Bc @ direct, Bs @ direct])
    if not np.all(np.isfinite(gram)) or np.linalg.cond(gram) > 1e12 or gram.max() == 0.0:
        raise DegenerateFitError("phase fit objective is flat (zero or degenerate basis)")
    c, s = np.linalg.solve(gram, rhs)
    phi_hat = math.atan2(s, c)
    fitted = c * Bc + s * Bs
    resid = direct - fitted
    norm = math.sqrt(float(direct @ direct))
    if norm == 0.0:
        raise DegenerateFitError("phase fit objective is flat (zero remainder)")
    err = abs(math.remainder(phi_hat - d.phi, 2.0 * math.pi))
    return PhaseDiagnostic(
        phi_hat=phi_hat,
        phi_expected=d.phi,
        phase_error=err,
        amplitude_ratio=float(math.hypot(c, s)),
        residual_ratio=math.sqrt(float(resid @ resid)) / norm,
        x=xs,
        direct=direct,
        fitted=fitted,
    )


@dataclass
class L2DeviationReport:
    ratio: float
    se_ratio: float
    mean_square: float
    sigma_sq: float
    N: int
    M: int
    x: np.ndarray
    direct: np.ndarray
    approx: np.ndarray
    diff: np.ndarray


def l2_deviation(
    d: LFunctionDescriptor,
    X: float,
    delta: float,
    N: int,
    M: int,
    seed: int,
    table: CoefficientTable,
    workers: int = 1,
) -> L2DeviationReport:
    """Mean square of D(x,delta) - D(x,delta;N) over x ~ U[X,2X], / sigma^2."""
    from .variance import sigma_sq_asymptotic

    if M < 1:
        raise ValueError("empty sample (M must be >= 1)")
    xs = uniform_open_interval(seed, M, X, 2.0 * X)
    lo = delta_direct_batch(d, xs, table, workers)
    hi = delta_direct_batch(d, xs + delta, table, workers)
    ex = (d.m - 1) / 2.0
    direct = hi / (xs + delta) ** ex - lo / xs**ex
    ar = _dual_arrays(d, table, N)
    approx = np.array([_delta_approx_from_arrays(d, ar, x, delta) for x in xs])
    diff = direct - approx
    sq = diff * diff
    mean_sq = float(np.mean(sq))
    sigma_sq = sigma_sq_asymptotic(d, delta)
    se = float(np.std(sq, ddof=1) / math.sqrt(M)) if M > 1 else float("inf")
    return L2DeviationReport(
        ratio=mean_sq / sigma_sq,
        se_ratio=se / sigma_sq,
        mean_square=mean_sq,
        sigma_sq=sigma_sq,
        N=N,
        M=M,
        x=xs,
        direct=direct,
        approx=approx,
        diff=diff,
    )
