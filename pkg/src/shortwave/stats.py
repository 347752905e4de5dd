"""Monte-Carlo sampling, window quadrature, and Gaussianity statistics.

Two expectation routes, deliberately kept distinct:

  * sample_uniform draws x uniformly from [X, 2X] (one counter-derived random
    stream per sample index, so worker count can never change a value) and
    pushes each x through the exact remainder oracles -- the statement-level
    statistic.
  * window_expectation integrates the truncated dual difference against a
    fixed C^inf bump W of unit mass supported on (1/2, 5/2) -- the proof-level
    statistic.  The integrand oscillates at frequency k * breve(N) in x, so
    panels are pinned to the top oscillation wavelength with >= 10
    Gauss-Legendre nodes per oscillation, refined until two successive levels
    agree to the target (Filon-type quadrature would be an upgrade, not a
    requirement).

The Gaussian reference: Phi via erfc (relative error at the libm level,
well under 1e-12; Phi(0) = 1/2 exactly), the even moments k!/(2^{k/2}(k/2)!),
and the asymptotic Kolmogorov distribution for the KS p-value.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .coefficients import CoefficientTable
from .descriptors import LFunctionDescriptor
from .rng import per_index_uniforms
from .variance import CalibrationRecord, sigma_sq_asymptotic
from .voronoi import _delta_approx_from_arrays, _dual_arrays, delta_direct_batch


class QuadratureError(RuntimeError):
    """Adaptive refinement stopped before reaching the target error."""

    def __init__(self, message, achieved):
        super().__init__(message)
        self.achieved = achieved


# ---------------------------------------------------------------------------
# the bump window
# ---------------------------------------------------------------------------


def _bump_raw(t: np.ndarray) -> np.ndarray:
    a, b = 0.5, 2.5
    t = np.asarray(t, dtype=np.float64)
    out = np.zeros_like(t)
    inside = (t > a) & (t < b)
    ti = t[inside]
    out[inside] = np.exp(-1.0 / ((ti - a) * (b - ti)))
    return out


@lru_cache(maxsize=8)
def _leggauss(order: int):
    return np.polynomial.legendre.leggauss(order)


def _refine_integral(f, a: float, b: float, rtol: float, atol: float,
                     start_panels: int, gl_order: int, max_levels: int):
    """Composite GL with panel doubling until two levels agree."""
    nodes, weights = _leggauss(gl_order)
    prev = None
    panels = start_panels
    for level in range(max_levels):
        edges = np.linspace(a, b, panels + 1)
        mid = (edges[1:] + edges[:-1]) / 2.0
        half = (edges[1:] - edges[:-1]) / 2.0
        total = 0.0
        chunk = max(1, (1 << 16) // gl_order)
        for i in range(0, panels, chunk):
            xs = mid[i : i + chunk, None] + half[i : i + chunk, None] * nodes[None, :]
            ws = half[i : i + chunk, None] * weights[None, :]
            total += float(np.sum(ws * f(xs.ravel()).reshape(xs.shape)))
        if prev is not None:
            err = abs(total - prev)
            if err <= max(rtol * abs(total), atol):
                return total, err, level + 1
        prev = total
        panels *= 2
    raise QuadratureError(
        f"quadrature did not converge (achieved error {abs(total - prev) if prev is not None else math.inf:g})",
        achieved=abs(total - prev) if prev is not None else math.inf,
    )


@dataclass(frozen=True)
class WindowW:
    """Unit-mass bump C * exp(-1/((t-1/2)(5/2-t))) on (1/2, 5/2)."""

    normalization: float

    support = (0.5, 2.5)

    def __call__(self, t):
        return self.normalization * _bump_raw(t)

    def mass(self, rtol: float = 1e-12) -> float:
        val, _, _ = _refine_integral(self.__call__, 0.5, 2.5, rtol, 0.0, 64, 12, 10)
        return val


@lru_cache(maxsize=1)
def bump_window() -> WindowW:
    raw, _, _ = _refine_integral(_bump_raw, 0.5, 2.5, 1e-13, 0.0, 64, 12, 10)
    return WindowW(normalization=1.0 / raw)


# ---------------------------------------------------------------------------
# windowed moments of the truncated dual difference
# ---------------------------------------------------------------------------


@dataclass
class WindowExpectation:
    value: float
    achieved_error: float
    levels: int
    k: int
    N: int
    X: float
    delta: float


def window_expectation(
    d: LFunctionDescriptor,
    table: CoefficientTable,
    X: float,
    delta: float,
    N: int,
    k: int,
    rtol: float = 1e-9,
    gl_order: int = 12,
    max_levels: int = 4,
) -> WindowExpectation:
    """(1/X) integral of D(x, delta; N)^k W(x/X) dx over [X/2, 5X/2]."""
    if k < 1 or k > 6:
        raise ValueError("k must be in 1..6")
    if N < 1:
        raise ValueError("N must be >= 1")
    W = bump_window()
    ar = _dual_arrays(d, table, N)
    coef = (2.0 * d.w / math.pi) * ar.amp * np.sin(math.pi * ar.nb * delta)
    nb = ar.nb
    top_freq = float(nb[-1])
    if 2.0 * math.pi * top_freq * 2.5 * X > 1e12:
        warnings.warn("dual phases exceed the plain-double comfort range", stacklevel=2)

    def integrand(xs: np.ndarray) -> np.ndarray:
        phases = math.pi * np.outer(nb, 2.0 * xs + delta) + d.phi
        Dvals = coef @ np.cos(phases)
        return (Dvals**k) * W(xs / X) / X

    # panels pinned to the top oscillation of D^k
    a, b = X / 2.0, 2.5 * X
    wavelength = 1.0 / (k * top_freq)
    start_panels = int(math.ceil((b - a) / wavelength))
    scale = float(np.sum(np.abs(coef))) ** k
    atol = rtol * max(scale, 1e-300)
    value, err, levels = _refine_integral(
        integrand, a, b, rtol, atol, start_panels, gl_order, max_levels
    )
    return WindowExpectation(value, err, levels, k, N, X, delta)


# ---------------------------------------------------------------------------
# Gaussian reference quantities
# ---------------------------------------------------------------------------


def cdf_normal(t: float) -> float:
    """Standard normal CDF via erfc; Phi(0) = 1/2 exactly."""
    return 0.5 * math.erfc(-t / math.sqrt(2.0))


_erfc_vec = np.frompyfunc(math.erfc, 1, 1)


def _cdf_array(z: np.ndarray) -> np.ndarray:
    return 0.5 * _erfc_vec(-np.asarray(z, dtype=np.float64) / math.sqrt(2.0)).astype(
        np.float64
    )


def gaussian_moment(k: int) -> float:
    """k-th standard Gaussian moment: k!/(2^{k/2} (k/2)!) for even k, else 0."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k % 2 == 1:
        return 0.0
    return float(math.factorial(k) // (2 ** (k // 2) * math.factorial(k // 2)))


@dataclass
class KSResult:
    D: float
    p_value: float


def _kolmogorov_survival(lam: float) -> float:
    """Q(lambda) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2)."""
    if lam <= 0.0:
        return 1.0
    if lam < 0.7:
        # theta-transformed series, accurate for small lambda
        total = 0.0
        for j in range(1, 20):
            total += math.exp(-((2 * j - 1) ** 2) * math.pi**2 / (8.0 * lam**2))
        return max(0.0, min(1.0, 1.0 - math.sqrt(2.0 * math.pi) / lam * total))
    total = 0.0
    for j in range(1, 101):
        term = 2.0 * (-1.0) ** (j - 1) * math.exp(-2.0 * j**2 * lam**2)
        total += term
        if abs(term) < 1e-16:
            break
    return max(0.0, min(1.0, total))


def ks_statistic(z_values: np.ndarray) -> KSResult:
    """Sup distance of the empirical CDF from Phi plus the asymptotic p-value."""
    z = np.sort(np.asarray(z_values, dtype=np.float64))
    M = len(z)
    if M < 1:
        raise ValueError("empty sample")
    F = _cdf_array(z)
    i = np.arange(1, M + 1, dtype=np.float64)
    D = float(max(np.max(i / M - F), np.max(F - (i - 1.0) / M)))
    return KSResult(D, _kolmogorov_survival(math.sqrt(M) * D))


# ---------------------------------------------------------------------------
# sample runs
# ---------------------------------------------------------------------------


@dataclass
class SummaryStats:
    mean: float
    variance: float
    skewness: float
    kurtosis: float          # excess + 3
    ks_d: float
    ks_p: float


@dataclass
class SampleRun:
    seed: int
    descriptor_id: str
    X: float
    delta: float
    M: int
    method: str
    x_values: np.ndarray
    z_values: np.ndarray
    summary: SummaryStats
    delta_advisory_ratio: float
    delta_advisory_ok: bool


ADVISORY_THRESHOLD = 0.25


def delta_validity_ratio(X: float, delta: float) -> float:
    """ln(1/delta)/ln(X); above 1/4 the interval is advisory-short."""
    return math.log(1.0 / delta) / math.log(X)


def summarize(z: np.ndarray) -> SummaryStats:
    z = np.asarray(z, dtype=np.float64)
    M = len(z)
    mean = float(np.sum(z) / M)
    c = z - mean
    m2 = float(np.sum(c * c) / M)
    if m2 > 0:
        m3 = float(np.sum(c**3) / M)
        m4 = float(np.sum(c**4) / M)
        skew = m3 / m2**1.5
        kurt = m4 / m2**2
    else:
        skew = 0.0
        kurt = 0.0
    var = m2 * M / (M - 1) if M > 1 else 0.0
    ks = ks_statistic(z)
    return SummaryStats(mean, var, skew, kurt, ks.D, ks.p_value)


def sample_uniform(
    d: LFunctionDescriptor,
    X: float,
    delta: float,
    M: int,
    seed: int,
    method: str = "direct",
    N: int | None = None,
    table: CoefficientTable | None = None,
    workers: int = 1,
    calibration: CalibrationRecord | None = None,
) -> SampleRun:
    """Normalized short-interval statistics at x = X(1 + u_i), u_i per-index."""
    if M < 1:
        raise ValueError("empty sample (M must be >= 1)")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    ratio = delta_validity_ratio(X, delta)
    advisory_ok = ratio <= ADVISORY_THRESHOLD
    if not advisory_ok:
        warnings.warn(
            f"ln(1/delta)/ln(X) = {ratio:.3f} > {ADVISORY_THRESHOLD}: interval "
            "shorter than the asymptotic regime supports; proceeding",
            stacklevel=2,
        )
    sigma = math.sqrt(sigma_sq_asymptotic(d, delta, calibration))
    xs = X * (1.0 + per_index_uniforms(seed, 0, M))
    if method == "direct":
        lo = delta_direct_batch(d, xs, table, workers)
        hi = delta_direct_batch(d, xs + delta, table, workers)
        z = (hi - lo) / (xs ** ((d.m - 1) / 2.0) * sigma)
        method_label = "direct"
    elif method == "dual":
        if N is None or table is None:
            raise ValueError("dual method needs a truncation N and a table")
        ar = _dual_arrays(d, table, N)
        z = np.array([_delta_approx_from_arrays(d, ar, x, delta) for x in xs]) / sigma
        method_label = f"dual({N})"
    else:
        raise ValueError(f"unknown method {method!r}")
    return SampleRun(
        seed=seed,
        descriptor_id=d.id,
        X=X,
        delta=delta,
        M=M,
        method=method_label,
        x_values=xs,
        z_values=z,
        summary=summarize(z),
        delta_advisory_ratio=ratio,
        delta_advisory_ok=advisory_ok,
    )


# ---------------------------------------------------------------------------
# empirical moments with jackknife errors
# ---------------------------------------------------------------------------


@dataclass
class MomentEstimate:
    k: int
    value: float
    se: float


def empirical_moments(z_values: np.ndarray, k_max: int) -> list[MomentEstimate]:
    """Studentized sample moments with delete-one jackknife standard errors.

    Moments are computed on y = (z - mean)/sqrt(mean((z-mean)^2)), so k = 2
    returns exactly 1.  Delete-one recomputation runs on raw power sums,
    O(M k_max) total.
    """
    z = np.asarray(z_values, dtype=np.float64)
    M = len(z)
    if M < 30:
        raise ValueError("need at least 30 samples")
    S = [float(np.sum(z**t)) for t in range(0, k_max + 1)]

    def studentized_all(power_sums, count):
        mean = power_sums[1] / count
        central = []
        for kk in range(0, k_max + 1):
            acc = 0.0
            for t in range(0, kk + 1):
                acc += math.comb(kk, t) * power_sums[t] * (-mean) ** (kk - t)
            central.append(acc / count)
        m2 = central[2]
        return [central[kk] / m2 ** (kk / 2.0) if m2 > 0 else 0.0 for kk in range(k_max + 1)]

    full = studentized_all(S, M)
    # delete-one, vectorized over samples
    powers = np.vstack([z**t for t in range(0, k_max + 1)])
    out = []
    for kk in range(1, k_max + 1):
        theta = np.empty(M)
        Sm = np.array(S)[:, None] - powers
        mean_i = Sm[1] / (M - 1)
        central = np.zeros(M)
        m2_i = np.zeros(M)
        for t in range(0, kk + 1):
            central += math.comb(kk, t) * Sm[t] * (-mean_i) ** (kk - t)
        for t in range(0, 3):
            m2_i += math.comb(2, t) * Sm[t] * (-mean_i) ** (2 - t)
        central /= M - 1
        m2_i /= M - 1
        with np.errstate(divide="ignore", invalid="ignore"):
            theta = np.where(m2_i > 0, central / m2_i ** (kk / 2.0), 0.0)
        se = math.sqrt((M - 1) / M * float(np.sum((theta - np.mean(theta)) ** 2)))
        out.append(MomentEstimate(kk, full[kk], se))
    return out
