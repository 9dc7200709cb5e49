"""Dilated fractional-part functions on (0,1) and exact residual assembly.

The basis functions are x -> frac(1/(a*x)) for dilation parameters a >= 1.
On the interval (1/(a*(m+1)), 1/(a*m)) the function equals 1/(a*x) - m, so
everything built from the basis (residuals, pairings) reduces to closed-form
work on the joint breakpoint partition.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .piecewise import PiecewiseFunction


class _Chi:
    """Sentinel for the generator chi = indicator of (0,1)."""

    def __repr__(self):
        return "CHI"


class _LogGenerator:
    """Sentinel for the alternative generator x -> log(x) on (0,1)."""

    def __repr__(self):
        return "LOG_GENERATOR"


#: Sentinels accepted by pairing routines in place of a dilation parameter.
CHI = _Chi()
LOG_GENERATOR = _LogGenerator()


def eval_rho(a: float, x: float) -> float:
    """Fractional part of 1/(a*x).

    Requires a >= 1 and 0 < x <= 1; the value lies in [0, 1).
    """
    if not a >= 1.0:
        raise ValueError(f"dilation must satisfy a >= 1, got {a}")
    if not 0.0 < x <= 1.0:
        raise ValueError(f"x must lie in (0, 1], got {x}")
    t = 1.0 / (a * x)
    return t - math.floor(t)


def rho_values(a: float, x: np.ndarray) -> np.ndarray:
    """Vectorised frac(1/(a*x)) without domain checks (internal use)."""
    t = 1.0 / (a * np.asarray(x, dtype=float))
    return t - np.floor(t)


def breakpoints(a: float, x_cut: float) -> np.ndarray:
    """All discontinuity points 1/(a*m) of x -> frac(1/(a*x)) inside (x_cut, 1].

    Returned in descending order (m = 1, 2, ...).
    """
    if not a >= 1.0:
        raise ValueError(f"dilation must satisfy a >= 1, got {a}")
    if not 0.0 < x_cut < 1.0:
        raise ValueError(f"x_cut must lie in (0, 1), got {x_cut}")
    m_max = int(math.ceil(1.0 / (a * x_cut))) + 1
    m = np.arange(1, m_max + 1, dtype=float)
    pts = 1.0 / (a * m)
    return pts[pts > x_cut]


@dataclass(frozen=True)
class DilationBasis:
    """Strictly increasing dilation parameters a_k >= 1 (possibly empty)."""

    dilations: tuple

    def __post_init__(self):
        dil = tuple(float(a) for a in self.dilations)
        object.__setattr__(self, "dilations", dil)
        for a in dil:
            if not a >= 1.0:
                raise ValueError(f"dilation {a} violates a >= 1")
        if any(b <= a for a, b in zip(dil, dil[1:])):
            raise ValueError("dilations must be strictly increasing")

    @classmethod
    def integer(cls, n: int) -> "DilationBasis":
        """The default basis a_k = k for k = 1..n."""
        if n < 0:
            raise ValueError("basis size must be >= 0")
        return cls(tuple(float(k) for k in range(1, n + 1)))

    @classmethod
    def from_spec(cls, spec: dict) -> "DilationBasis":
        """Build from {"dilations": [...]} or {"integer_n": N}."""
        if "dilations" in spec:
            return cls(tuple(spec["dilations"]))
        if "integer_n" in spec:
            return cls.integer(int(spec["integer_n"]))
        raise ValueError("basis spec needs 'dilations' or 'integer_n'")

    @classmethod
    def from_json(cls, text: str) -> "DilationBasis":
        return cls.from_spec(json.loads(text))

    @property
    def n(self) -> int:
        return len(self.dilations)

    @property
    def is_integer(self) -> bool:
        return all(float(a).is_integer() for a in self.dilations)

    def endpoint_values(self) -> np.ndarray:
        """Values of the span-membership functional, one per dilation.

        A fully integer basis needs no side condition (its span is
        admissible as-is), so the functional vanishes there and the linear
        constraint is vacuous.  Otherwise each dilation contributes
        frac(1/a), which pins the coefficient combinations that keep the
        span admissible.
        """
        if self.is_integer:
            return np.zeros(self.n)
        return np.array([eval_rho(a, 1.0) for a in self.dilations])


def phi_constraint_residual(basis: DilationBasis, coeffs) -> float:
    """Sum of c_k * frac(1/a_k); membership in the constrained span means 0."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (basis.n,):
        raise ValueError(
            f"coefficient length {coeffs.shape} does not match basis size {basis.n}"
        )
    if basis.n == 0:
        return 0.0
    return math.fsum(c * v for c, v in zip(coeffs, basis.endpoint_values()))


PHI_CONSTRAINT_TOL = 1e-12


@dataclass(frozen=True)
class CoefficientVector:
    """Coefficients attached to a basis, with the endpoint-constraint residual."""

    coeffs: tuple
    constraint_residual: float = field(default=0.0)

    @classmethod
    def for_basis(cls, basis: DilationBasis, coeffs) -> "CoefficientVector":
        coeffs = tuple(float(c) for c in coeffs)
        res = phi_constraint_residual(basis, coeffs)
        return cls(coeffs, res)

    @property
    def is_phi_member(self) -> bool:
        return abs(self.constraint_residual) <= PHI_CONSTRAINT_TOL

    def __len__(self):
        return len(self.coeffs)


def residual_function(basis: DilationBasis, coeffs, x_cut: float) -> PiecewiseFunction:
    """Exact piecewise form of 1 - sum_k c_k * frac(1/(a_k x)) on (x_cut, 1).

    Each segment of the joint breakpoint partition carries alpha + beta/x with
    beta = -sum_k c_k/a_k (independent of the segment) and alpha shifted by the
    active floor values.  The unresolved mass on (0, x_cut) is bounded in L1 by
    (1 + sum|c_k|) * x_cut since every basis value stays inside [0, 1).
    """
    if isinstance(coeffs, CoefficientVector):
        coeffs = coeffs.coeffs
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (basis.n,):
        raise ValueError("coefficient length does not match basis size")
    if not 0.0 < x_cut < 1.0:
        raise ValueError("x_cut must lie in (0, 1)")

    if basis.n == 0 or not np.any(coeffs):
        return PiecewiseFunction.single_segment(x_cut, 1.0, alpha=1.0, beta=0.0,
                                                tail_l1_bound=x_cut)

    pts = [np.array([x_cut, 1.0])]
    for a in basis.dilations:
        pts.append(breakpoints(a, x_cut))
    edges = np.unique(np.concatenate(pts))
    # strictly inside [x_cut, 1]
    edges = edges[(edges >= x_cut) & (edges <= 1.0)]
    lo, hi = edges[:-1], edges[1:]
    mid = 0.5 * (lo + hi)

    alpha = np.ones_like(lo)
    beta_total = 0.0
    for a, c in zip(basis.dilations, coeffs):
        m = np.floor(1.0 / (a * mid))
        alpha += c * m
        beta_total -= c / a
    beta = np.full_like(lo, beta_total)

    tail_bound = (1.0 + float(np.sum(np.abs(coeffs)))) * x_cut
    return PiecewiseFunction(x_lo=lo, x_hi=hi, alpha=alpha, beta=beta,
                             x_cut=x_cut, tail_l1_bound=tail_bound)
