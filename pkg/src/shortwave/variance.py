"""Predicted variance of the normalized short-interval statistic.

Asymptotic form:   sigma^2(delta) = rs_c * m^rs_r * delta * ln(1/delta)^(rs_r-1)
Truncated form:    sigma^2(delta; N) = (2/pi^2) sum_{n<=N} lambda(n)^2/n
                                        * sin^2(pi breve(n) delta) / breve(n)

plus the machinery around them: the dyadic mean-square fit for rs_c, the
Euler-product constant for tau_k, the tail-decay check, and -- for the Q(i)
instance -- an exact-anchored streamed evaluation of the truncated sum far
beyond any table.

Streamed tail (gaussian only).  For A < n <= B, Abel summation gives

    sum lambda(n)^2 f(n) = f(B) S2(B) - f(A) S2(A) - int_A^B f'(y) S2(y) dy,

with f(y) = sin^2(pi delta sqrt(y)) / y^(3/2) and S2 exact through the
divisor-style oracle in `summatory`.  The integral splits S2 = M + E around
the model M(y) = c_hat y ln(2y): the M part is integrated on a dense
oscillation-resolving Gauss-Legendre grid; E is exact at geometrically spaced
anchors, interpolated as E/y linear in ln y (the secondary term of S2 is
proportional to y, so E/y is nearly constant and the interpolation error is
orders below the target).  Doubling the anchor count supplies the reported
error estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict
import json

import numpy as np

from .coefficients import CoefficientTable
from .descriptors import LFunctionDescriptor
from .eulerprod import EulerProductValue, euler_product_c_tau_k, tau_k_local_factor  # noqa: F401
from .summatory import gaussian_square_summatory


@dataclass(frozen=True)
class CalibrationRecord:
    """Data-derived rs_c for descriptors that ship without an analytic one."""

    descriptor_id: str
    n_max: int
    c_hat: float
    spread: float
    r: int
    converged: bool


_CALIBRATIONS: dict[tuple[str, int], CalibrationRecord] = {}


def resolve_rs_c(d: LFunctionDescriptor, calibration: CalibrationRecord | None = None) -> float:
    if calibration is not None:
        if calibration.descriptor_id != d.id:
            raise ValueError("calibration record belongs to a different descriptor")
        return calibration.c_hat
    if d.rs_c is not None:
        return d.rs_c
    raise ValueError(
        f"rs_c unresolved for {d.id!r}: supply a calibration record (rankin_selberg_fit)"
    )


def sigma_sq_asymptotic(
    d: LFunctionDescriptor, delta: float, calibration: CalibrationRecord | None = None
) -> float:
    """rs_c * m^rs_r * delta * ln(1/delta)^(rs_r - 1)."""
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    c = resolve_rs_c(d, calibration)
    return c * d.m**d.rs_r * delta * math.log(1.0 / delta) ** (d.rs_r - 1)


def sigma_sq_truncated(
    d: LFunctionDescriptor, table: CoefficientTable, delta: float, N: int
) -> float:
    """(2/pi^2) sum_{n<=N} lambda^2/n sin^2(pi breve delta)/breve, table-exact."""
    if N > table.n_max:
        raise ValueError(f"N={N} beyond table n_max={table.n_max}")
    if N < 1:
        raise ValueError("N must be >= 1")
    if delta == 0.0:
        return 0.0
    n = np.arange(1, N + 1, dtype=np.float64)
    nb = d.m * (n / d.D) ** (1.0 / d.m)
    lam = table.values_f64[:N]
    terms = lam * lam / n * np.sin(math.pi * nb * delta) ** 2 / nb
    return 2.0 / math.pi**2 * float(np.sum(terms))


# ---------------------------------------------------------------------------
# streamed truncated variance for the Q(i) ideal counts
# ---------------------------------------------------------------------------


_S2_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gaussian_int_arrays(table: CoefficientTable):
    key = id(table)
    if key not in _S2_CACHE:
        if table.descriptor_id != "gaussian_ideals" or table.values_exact is None:
            raise ValueError("streamed variance needs an exact gaussian_ideals table")
        lam = np.concatenate([[0], np.asarray(table.values_exact, dtype=np.int64) // 4])
        prefix = np.concatenate([[0], np.cumsum(lam[1:])]).astype(np.int64)
        _S2_CACHE[key] = (lam, prefix)
    return _S2_CACHE[key]


def gaussian_square_sum_exact(table: CoefficientTable, y: int) -> int:
    """Exact sum_{n<=y} lambda(n)^2, any y with sqrt(y) <= n_max."""
    lam, prefix = _gaussian_int_arrays(table)
    if math.isqrt(int(y)) >= len(lam):
        raise ValueError("table too short: need lambda through isqrt(y)")
    return int(gaussian_square_summatory(np.int64(y), lam, prefix))


@dataclass
class StreamedVariance:
    value: float
    exact_part: float
    tail_part: float
    tail_error_estimate: float
    exact_limit: int
    N: int


def _gauss_legendre_panels(a: float, b: float, panel: float, order: int):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    count = max(1, int(math.ceil((b - a) / panel)))
    edges = np.linspace(a, b, count + 1)
    mid = (edges[1:] + edges[:-1]) / 2.0
    half = (edges[1:] - edges[:-1]) / 2.0
    xs = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    ws = (half[:, None] * weights[None, :]).ravel()
    return xs, ws


def _streamed_tail(table, delta: float, A: int, B: int, anchors: int) -> float:
    """(2/pi^2)-unscaled sum_{A<n<=B} lambda^2 sin^2(pi d sqrt n)/n^(3/2)."""

    def f(y):
        th = math.pi * delta * np.sqrt(y)
        return np.sin(th) ** 2 / y**1.5

    def fprime(y):
        th = math.pi * delta * np.sqrt(y)
        return np.sin(2.0 * th) * (math.pi * delta) / (2.0 * y**2) - 1.5 * np.sin(
            th
        ) ** 2 / y**2.5

    s2A = gaussian_square_sum_exact(table, A)
    s2B = gaussian_square_sum_exact(table, B)
    c_hat = s2B / (B * math.log(2.0 * B))

    # exact anchors, E/y interpolated linearly in ln y
    ys = np.unique(np.geomspace(A, B, anchors).astype(np.int64))
    ys[0], ys[-1] = A, B
    e_over_y = np.array(
        [
            (gaussian_square_sum_exact(table, int(y)) - c_hat * y * math.log(2.0 * y)) / y
            for y in ys
        ]
    )
    log_ys = np.log(ys.astype(np.float64))

    theta_a = math.pi * delta * math.sqrt(A)
    theta_b = math.pi * delta * math.sqrt(B)
    xs, ws = _gauss_legendre_panels(theta_a, theta_b, math.pi / 4.0, 8)
    y_nodes = (xs / (math.pi * delta)) ** 2
    jac = 2.0 * xs / (math.pi * delta) ** 2
    model = c_hat * y_nodes * np.log(2.0 * y_nodes)
    e_nodes = y_nodes * np.interp(np.log(y_nodes), log_ys, e_over_y)
    integral = float(np.sum(ws * fprime(y_nodes) * (model + e_nodes) * jac))

    return float(f(np.float64(B)) * s2B - f(np.float64(A)) * s2A - integral)


def sigma_sq_truncated_streamed(
    d: LFunctionDescriptor,
    table: CoefficientTable,
    delta: float,
    N: int,
    anchors: int = 48,
) -> StreamedVariance:
    """Truncated variance with the region beyond the table streamed exactly.

    Only the Q(i) instance carries the required exact square-sum oracle;
    other descriptors must stay within their tables.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    L0 = min(int(N), table.n_max)
    exact = sigma_sq_truncated(d, table, delta, L0)
    if N <= table.n_max:
        return StreamedVariance(exact, exact, 0.0, 0.0, L0, int(N))
    if d.id != "gaussian_ideals":
        raise ValueError(f"N={N} beyond table and no streamed oracle for {d.id!r}")
    if math.isqrt(int(N)) > table.n_max:
        raise ValueError("table must cover sqrt(N) for the streamed square-sum oracle")
    scale = 2.0 / math.pi**2
    tail = scale * _streamed_tail(table, delta, L0, int(N), anchors)
    tail_refined = scale * _streamed_tail(table, delta, L0, int(N), 2 * anchors)
    err = abs(tail_refined - tail)
    return StreamedVariance(exact + tail_refined, exact, tail_refined, err, L0, int(N))


# ---------------------------------------------------------------------------
# reports and estimators
# ---------------------------------------------------------------------------


@dataclass
class VarianceReport:
    delta: float
    sigma_sq_asymptotic: float
    sigma_sq_truncated: float
    N_used: int
    tail_bound: float
    ratio: float

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def default_truncation(d: LFunctionDescriptor, delta: float, scale: float = 1e3) -> int:
    """N(delta) = scale * delta^-m, the default margin for delta^m N -> inf."""
    return int(math.ceil(scale * delta ** (-d.m)))


def variance_report(
    d: LFunctionDescriptor,
    table: CoefficientTable,
    delta: float,
    N: int | None = None,
    calibration: CalibrationRecord | None = None,
) -> VarianceReport:
    if N is None:
        N = default_truncation(d, delta)
    if N > table.n_max and d.id == "gaussian_ideals":
        trunc = sigma_sq_truncated_streamed(d, table, delta, N).value
    else:
        N = min(N, table.n_max)
        trunc = sigma_sq_truncated(d, table, delta, N)
    asym = sigma_sq_asymptotic(d, delta, calibration)
    tail = N ** (-1.0 / d.m) * math.log(N) ** (d.rs_r - 1)
    return VarianceReport(
        delta=delta,
        sigma_sq_asymptotic=asym,
        sigma_sq_truncated=trunc,
        N_used=int(N),
        tail_bound=tail,
        ratio=trunc / asym,
    )


@dataclass
class TailBoundReport:
    N_pairs: list[tuple[int, int]]
    increments: list[float]
    bounds: list[float]
    C: float
    ok: bool


def tail_bound_check(
    d: LFunctionDescriptor,
    table: CoefficientTable,
    delta: float,
    N_list,
) -> TailBoundReport:
    """Check sigma^2(delta;N') - sigma^2(delta;N) <= C N^(-1/m) ln^(r-1) N.

    C is fitted from the smallest consecutive pair and reported; a single-N
    list passes trivially.
    """
    Ns = sorted(int(N) for N in N_list)
    if Ns and Ns[-1] > table.n_max:
        raise ValueError("largest N beyond table range")
    values = {N: sigma_sq_truncated(d, table, delta, N) for N in Ns}

    def g(N):
        return N ** (-1.0 / d.m) * math.log(N) ** (d.rs_r - 1)

    pairs, increments, bounds = [], [], []
    for lo, hi in zip(Ns, Ns[1:]):
        pairs.append((lo, hi))
        increments.append(values[hi] - values[lo])
    if not pairs:
        return TailBoundReport([], [], [], float("nan"), True)
    C = increments[0] / g(pairs[0][0]) if g(pairs[0][0]) > 0 else float("inf")
    ok = True
    for (lo, _), inc in zip(pairs, increments):
        bound = C * g(lo)
        bounds.append(bound)
        if inc > bound * (1.0 + 1e-9):
            ok = False
    return TailBoundReport(pairs, increments, bounds, C, ok)


@dataclass
class RankinSelbergFit:
    c_hat: float
    spread: float
    points: list[int]
    values: list[float]
    r: int
    converged: bool


def rankin_selberg_fit(table: CoefficientTable, r: int) -> RankinSelbergFit:
    """Dyadic estimate of c in  sum lambda^2 ~ c y ln(2y)^(r-1).

    Mean of the ratio at y = n_max/8, /4, /2, /1; the spread across the
    dyadic points is the convergence diagnostic (> 50% flags not-converged).
    """
    if table.n_max < 10**4:
        raise ValueError("need n_max >= 1e4 for a meaningful fit")
    points = [table.n_max // 8, table.n_max // 4, table.n_max // 2, table.n_max]
    values = [
        table.summatory_sq(y) / (y * math.log(2.0 * y) ** (r - 1)) for y in points
    ]
    c_hat = float(np.mean(values))
    spread = (max(values) - min(values)) / c_hat if c_hat != 0 else float("inf")
    return RankinSelbergFit(c_hat, spread, points, values, r, spread <= 0.5)


def calibrate_rs_c(d: LFunctionDescriptor, table: CoefficientTable) -> CalibrationRecord:
    """Fit rs_c from a table and cache it per (descriptor, n_max)."""
    key = (d.id, table.n_max)
    if key not in _CALIBRATIONS:
        fit = rankin_selberg_fit(table, d.rs_r)
        _CALIBRATIONS[key] = CalibrationRecord(
            d.id, table.n_max, fit.c_hat, fit.spread, d.rs_r, fit.converged
        )
    return _CALIBRATIONS[key]


def rs_slope_diagnostic(table: CoefficientTable) -> float:
    """Log-log slope of the mean square: estimates r - 1, diagnostics only."""
    points = [table.n_max // 8, table.n_max // 4, table.n_max // 2, table.n_max]
    xs = np.log([math.log(2.0 * y) for y in points])
    ys = np.log([table.summatory_sq(y) / y for y in points])
    slope, _ = np.polyfit(xs, ys, 1)
    return float(slope)
