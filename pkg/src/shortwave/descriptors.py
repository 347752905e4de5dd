"""L-function instance descriptors and the built-in family.

A descriptor fixes everything the dual-sum and variance machinery needs about
one L-function: degree m, conductor D, real parts of the gamma-shift
parameters, weight (their sum), root number w, the dual-sum phase

    phi = (pi/2) * ((m - 1)/2 - weight),

stored reduced to (-pi, pi], the order of the pole at s = 1, the mean-square
growth data (rs_c, rs_r) with sum lambda(n)^2 ~ rs_c * y (ln 2y)^{rs_r - 1},
and the main-term polynomial P with MainTerm(y) = y * P(ln y).

Built-ins:
  tau_k(k)        divisor function tau_k: zeta^k, m = k, D = 1, pole order k.
  gaussian_ideals ideal counts of Q(i): zeta * L(chi_-4), m = 2, D = 4.
  gaussian_lattice  the same object scaled by 4 (lattice points r2 = 4*lambda);
                  variance scales by 16.  Replication convenience, not a new
                  L-function.
  ramanujan       normalized coefficients tau(n)/n^{11/2} of the weight-12
                  cusp form; entire, so no main term.  rs_c is left unset and
                  must come from a data calibration.

Descriptors are immutable; anything estimated later (e.g. rs_c for ramanujan)
lives in a separate calibration record, never in the descriptor.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, asdict
from functools import lru_cache

from .eulerprod import euler_product_c_tau_k
from .laurent import laurent_pow, main_term_polynomial, zeta_laurent

_FIELD_TOL = 1e-12


def reduce_phase(raw: float) -> float:
    """Reduce an angle to (-pi, pi]."""
    phi = math.remainder(raw, 2.0 * math.pi)
    if phi <= -math.pi:
        phi += 2.0 * math.pi
    return phi


def dual_phase(m: int, weight_k: float) -> float:
    return reduce_phase((math.pi / 2.0) * ((m - 1) / 2.0 - weight_k))


@dataclass(frozen=True)
class LFunctionDescriptor:
    id: str
    m: int
    D: float
    kappa_re: tuple[float, ...]
    weight_k: float
    w: int
    phi: float
    pole_order: int
    rs_c: float | None
    rs_r: int
    main_term_poly: tuple[float, ...]

    def __post_init__(self):
        problems = []
        if self.m < 2:
            problems.append("m must be >= 2")
        if not self.D > 0:
            problems.append("D must be positive")
        if self.w not in (-1, 1):
            problems.append("w must be -1 or +1")
        if len(self.kappa_re) != self.m:
            problems.append("kappa_re must have m entries")
        if abs(self.weight_k - sum(self.kappa_re)) > _FIELD_TOL:
            problems.append("weight_k must equal sum(kappa_re)")
        expected_phi = dual_phase(self.m, self.weight_k)
        if abs(math.remainder(self.phi - expected_phi, 2.0 * math.pi)) > _FIELD_TOL:
            problems.append("phi inconsistent with (pi/2)((m-1)/2 - weight_k)")
        if not (-math.pi < self.phi <= math.pi + _FIELD_TOL):
            problems.append("phi must be reduced to (-pi, pi]")
        if self.pole_order < 0:
            problems.append("pole_order must be nonnegative")
        if self.pole_order == 0 and any(c != 0.0 for c in self.main_term_poly):
            problems.append("entire L-function must have zero main term")
        if self.pole_order > 0 and len(self.main_term_poly) != self.pole_order:
            problems.append("main_term_poly degree must be pole_order - 1")
        if self.rs_c is not None and not self.rs_c > 0:
            problems.append("rs_c must be positive when set")
        if self.rs_r < 1:
            problems.append("rs_r must be a positive integer")
        if problems:
            raise ValueError("invalid descriptor: " + "; ".join(problems))

    def breve(self, n: float) -> float:
        """Dual frequency m*(n/D)^(1/m)."""
        return self.m * (n / self.D) ** (1.0 / self.m)

    def to_json_dict(self) -> dict:
        d = asdict(self)
        d["kappa_re"] = list(self.kappa_re)
        d["main_term_poly"] = list(self.main_term_poly)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)


def descriptor_from_json_dict(d: dict) -> LFunctionDescriptor:
    return LFunctionDescriptor(
        id=d["id"],
        m=int(d["m"]),
        D=float(d["D"]),
        kappa_re=tuple(float(v) for v in d["kappa_re"]),
        weight_k=float(d["weight_k"]),
        w=int(d["w"]),
        phi=float(d["phi"]),
        pole_order=int(d["pole_order"]),
        rs_c=None if d.get("rs_c") is None else float(d["rs_c"]),
        rs_r=int(d["rs_r"]),
        main_term_poly=tuple(float(v) for v in d["main_term_poly"]),
    )


def descriptor_from_json(text: str) -> LFunctionDescriptor:
    return descriptor_from_json_dict(json.loads(text))


_TAU_NAME = re.compile(r"^tau_(\d+)$|^tau_k\((\d+)\)$")

_EULER_PRIME_CUTOFF = 10**5


@lru_cache(maxsize=None)
def _tau_k_rs_c(k: int) -> float:
    if k == 2:
        return 1.0 / math.pi**2  # the product telescopes to 1/zeta(2); /3!
    return euler_product_c_tau_k(k, _EULER_PRIME_CUTOFF).value


@lru_cache(maxsize=None)
def _tau_k_main_term(k: int) -> tuple[float, ...]:
    return main_term_polynomial(laurent_pow(zeta_laurent(k + 1), k))


@lru_cache(maxsize=None)
def builtin_descriptor(name: str) -> LFunctionDescriptor:
    """Construct one of the built-in instances by name."""
    m = _TAU_NAME.match(name)
    if m:
        k = int(m.group(1) or m.group(2))
        if k < 2:
            raise ValueError(f"tau_k requires k >= 2, got {k}")
        return LFunctionDescriptor(
            id=f"tau_{k}",
            m=k,
            D=1.0,
            kappa_re=(0.0,) * k,
            weight_k=0.0,
            w=1,
            phi=dual_phase(k, 0.0),
            pole_order=k,
            rs_c=_tau_k_rs_c(k),
            rs_r=k * k,
            main_term_poly=_tau_k_main_term(k),
        )
    if name == "gaussian_ideals":
        return LFunctionDescriptor(
            id="gaussian_ideals",
            m=2,
            D=4.0,
            kappa_re=(0.0, 1.0),
            weight_k=1.0,
            w=1,
            phi=dual_phase(2, 1.0),  # -pi/4
            pole_order=1,
            rs_c=0.25,
            rs_r=2,
            main_term_poly=(math.pi / 4.0,),  # residue L(1, chi_-4) = pi/4
        )
    if name == "gaussian_lattice":
        # 4x the ideal-count object: lambda = r2(n).  Mean square scales by 16.
        return LFunctionDescriptor(
            id="gaussian_lattice",
            m=2,
            D=4.0,
            kappa_re=(0.0, 1.0),
            weight_k=1.0,
            w=1,
            phi=dual_phase(2, 1.0),
            pole_order=1,
            rs_c=4.0,
            rs_r=2,
            main_term_poly=(math.pi,),
        )
    if name == "ramanujan":
        # weight-12 form; gamma shifts (11/2, 13/2) via the duplication split.
        return LFunctionDescriptor(
            id="ramanujan",
            m=2,
            D=1.0,
            kappa_re=(5.5, 6.5),
            weight_k=12.0,
            w=1,
            phi=dual_phase(2, 12.0),  # -23pi/4 reduced to +pi/4
            pole_order=0,
            rs_c=None,
            rs_r=1,
            main_term_poly=(),
        )
    raise ValueError(f"unknown built-in descriptor {name!r}")


BUILTIN_NAMES = ("tau_2", "tau_3", "gaussian_ideals", "gaussian_lattice", "ramanujan")
