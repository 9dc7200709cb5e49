"""Certified pairings of dilated fractional-part functions on (0,1).

The quantity computed here is

    I(a, b) = integral over (0,1) of frac(1/(a x)) * frac(1/(b x)) dx

(and the companion pairing against the constant generator).  Substituting
u = 1/x turns this into  integral over (1, inf) of rho(u/a) rho(u/b) / u^2 du
with rho = fractional part.  The integrand is piecewise rational between
consecutive multiples of a and b, so the strategy is:

1.  Exact segment sums on [1, V].  On a joint segment [s1, s2] write
    rho(u/a) = p + tau/a with tau = u - s1 and p the fractional value at s1
    (exact integer arithmetic when a, b are integers).  The segment integral
    splits into three nonnegative pieces evaluated through log1p-stable
    primitives, so no large cancellations occur and the running sum carries
    only O(eps) error.

2.  A certified tail on [V, inf).  Writing rho = 1/2 + B with B the centered
    sawtooth, the tail splits into 1/(4V), two single-sawtooth terms handled
    by two rounds of integration by parts against periodic antiderivatives
    (remainder <= 0.0161 a^2 / V^3), and the product term B(u/a)B(u/b).
    When a/b = P/Q is rational the product is periodic with period L = aQ;
    its mean mu, the antiderivative G of (product - mu), and the mean nu of G
    are computed exactly from the piecewise-quadratic structure of one
    period, giving

        tail_cross = mu/V + (nu - G(V mod L))/V^2 + err,
        |err| <= 2 L max|G - nu| / V^3.

    V is chosen from the requested tolerance via these explicit bounds.  For
    incommensurable dilations only the crude bound |tail_cross| <= 1/(4V) is
    available and coarse tolerances remain reachable.

Every public entry point returns (or enforces) a certified absolute error
bound; a ToleranceNotReachedError is raised when the bound cannot be pushed
below the requested tolerance within the segment budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .basis import CHI, LOG_GENERATOR, DilationBasis, _Chi, _LogGenerator
from .exceptions import ToleranceNotReachedError

_EPS = 2.0 ** -52
# sup of |Q| for Q(w) = w^3/6 - w^2/4 + w/12, the second periodic
# antiderivative of the centered sawtooth; attained at w = 1/2 -+ 1/sqrt(12)
_QMAX = 0.00802
_CHUNK = 4_000_000
# structure pass is O(P + Q); ratios beyond this are treated as incommensurable
_MAX_RATIO_TERMS = 2_000_000


# ---------------------------------------------------------------------------
# stable per-segment primitives
# ---------------------------------------------------------------------------

def _f1(lam):
    """integral_0^w tau/(s1+tau)^2 dtau with lam = w/s1; value ~ lam^2/2."""
    lam = np.asarray(lam, dtype=float)
    direct = np.log1p(lam) - lam / (1.0 + lam)
    acc = np.full_like(lam, (-1.0) ** 18 * 17.0 / 18.0)
    for i in range(17, 1, -1):
        acc = acc * lam + ((-1.0) ** i) * (i - 1.0) / i
    series = acc * lam * lam
    return np.where(lam > 0.05, direct, series)


def _g(lam):
    """integral_0^w tau^2/(s1+tau)^2 dtau = s1 * g(lam); value ~ lam^3/3."""
    lam = np.asarray(lam, dtype=float)
    direct = lam - 2.0 * np.log1p(lam) + lam / (1.0 + lam)
    acc = np.full_like(lam, (-1.0) ** 20 * 17.0 / 19.0)
    for i in range(18, 2, -1):
        acc = acc * lam + ((-1.0) ** (i + 1)) * (i - 2.0) / i
    series = acc * lam * lam * lam
    return np.where(lam > 0.05, direct, series)


def _frac_at(u, a, a_is_int):
    """Fractional part of u/a, exact when u and a are integral floats."""
    if a_is_int:
        m = np.floor_divide(u, a)
        return (u - a * m) / a
    m = np.floor(u / a)
    p = u / a - m
    return np.clip(p, 0.0, None)


def _multiples_in(a, u0, u1):
    """Multiples of a in the open-closed window (u0, u1]."""
    k0 = math.floor(u0 / a)
    k1 = math.floor(u1 / a)
    if k1 <= k0:
        return np.empty(0)
    ks = np.arange(k0 + 1, k1 + 1, dtype=float)
    pts = a * ks
    return pts[(pts > u0) & (pts <= u1)]


def _windows(v_lo, v_hi, approx_total):
    n_chunks = max(1, int(math.ceil(approx_total / _CHUNK)))
    bounds = np.linspace(v_lo, v_hi, n_chunks + 1)
    return zip(bounds[:-1], bounds[1:])


# ---------------------------------------------------------------------------
# exact segment sums on [1, V]
# ---------------------------------------------------------------------------

def _segment_sum_single(a, V):
    """integral over [1, V] of rho(u/a)/u^2 du, exact per segment."""
    a_is_int = float(a).is_integer()
    total = 0.0
    est = V / a + 2
    for w0, w1 in _windows(1.0, float(V), est):
        edges = np.unique(np.concatenate(
            [[w0, w1], _multiples_in(a, w0, w1)]))
        s1, s2 = edges[:-1], edges[1:]
        w = s2 - s1
        keep = w > 0
        s1, s2, w = s1[keep], s2[keep], w[keep]
        if len(s1) == 0:
            continue
        p = _frac_at(s1, a, a_is_int)
        lam = w / s1
        d = p * w / (s1 * s2) + _f1(lam) / a
        total += float(np.sum(d))
    return total


def _segment_sum_pair(a, b, V):
    """integral over [1, V] of rho(u/a) rho(u/b) / u^2 du, exact per segment."""
    a_is_int = float(a).is_integer()
    b_is_int = float(b).is_integer()
    inv_ab = 1.0 / (a * b)
    total = 0.0
    est = V / a + V / b + 2
    for w0, w1 in _windows(1.0, float(V), est):
        edges = np.unique(np.concatenate(
            [[w0, w1], _multiples_in(a, w0, w1), _multiples_in(b, w0, w1)]))
        s1, s2 = edges[:-1], edges[1:]
        w = s2 - s1
        keep = w > 0
        s1, s2, w = s1[keep], s2[keep], w[keep]
        if len(s1) == 0:
            continue
        p = _frac_at(s1, a, a_is_int)
        q = _frac_at(s1, b, b_is_int)
        lam = w / s1
        d = ((p * q) * w / (s1 * s2)
             + (p / b + q / a) * _f1(lam)
             + inv_ab * s1 * _g(lam))
        total += float(np.sum(d))
    return total


# ---------------------------------------------------------------------------
# certified tails on [V, inf)
# ---------------------------------------------------------------------------

def _sawtooth_tail(a, V):
    """integral over [V, inf) of B(u/a)/u^2 du with B the centered sawtooth.

    Two rounds of integration by parts against the periodic antiderivatives
    P (mean -1/12) and Q of the sawtooth; remainder <= 2*QMAX*(a/V)^3 / a.
    """
    Wv = V / a
    r = Wv - math.floor(Wv)
    p_val = 0.5 * (r * r - r)
    q_val = r ** 3 / 6.0 - r * r / 4.0 + r / 12.0
    value = (-p_val / Wv ** 2 - 1.0 / (12.0 * Wv ** 2)
             - 2.0 * q_val / Wv ** 3) / a
    err = 2.0 * _QMAX / (a * Wv ** 3)
    return value, err


@dataclass(frozen=True)
class _PeriodStructure:
    """One period of B(u/a) B(u/b): breakpoints and exact cumulative data."""

    a: float
    b: float
    L: float
    mu: float
    nu: float
    max_dev: float          # certified bound for max |G - nu| over the period
    pts: np.ndarray         # breakpoints, pts[0] = 0, pts[-1] = L
    g_bp: np.ndarray        # G at the breakpoints (G(0) = 0)
    pa: np.ndarray          # centered sawtooth value for a at each left point
    pb: np.ndarray

    def g_at(self, u):
        """G(u mod L) by exact partial integration inside one segment."""
        ur = math.fmod(u, self.L)
        if ur < 0:
            ur += self.L
        j = int(np.searchsorted(self.pts, ur, side="right")) - 1
        j = min(max(j, 0), len(self.pts) - 2)
        tau = ur - self.pts[j]
        # integral_0^tau of (h - mu) with h(s1+t) = (pa + t/a)(pb + t/b)
        c0 = self.pa[j] * self.pb[j] - self.mu
        c1 = self.pa[j] / self.b + self.pb[j] / self.a
        return (self.g_bp[j] + c0 * tau + 0.5 * c1 * tau * tau
                + tau ** 3 / (3.0 * self.a * self.b))


def _ratio(a, b):
    """Exact reduced ratio a/b of the float inputs, or None if too wild."""
    fr = Fraction(a) / Fraction(b)
    if fr.numerator + fr.denominator > _MAX_RATIO_TERMS:
        return None
    return int(fr.numerator), int(fr.denominator)


def _period_structure(a, b):
    """Exact one-period data for the sawtooth product, or None."""
    rat = _ratio(a, b)
    if rat is None:
        return None
    P, Q = rat
    L = a * Q
    pts = np.unique(np.concatenate([
        a * np.arange(0, Q + 1, dtype=float),
        b * np.arange(0, P + 1, dtype=float),
    ]))
    # collapse float-coincident breakpoints (possible for real dilations)
    d = np.diff(pts)
    keep = np.concatenate([[True], d > 1e-12 * L])
    pts = pts[keep]
    s1 = pts[:-1]
    w = np.diff(pts)
    mid = s1 + 0.5 * w
    a_is_int = float(a).is_integer()
    b_is_int = float(b).is_integer()
    if a_is_int:
        pa = _frac_at(s1, a, True) - 0.5
    else:
        # midpoints avoid floor misclassification at rounded breakpoints
        pa = (mid / a - np.floor(mid / a)) - (0.5 * w) / a - 0.5
    if b_is_int:
        pb = _frac_at(s1, b, True) - 0.5
    else:
        pb = (mid / b - np.floor(mid / b)) - (0.5 * w) / b - 0.5
    inv_ab = 1.0 / (a * b)

    seg_int = w * (pa * pb + 0.5 * (pa / b + pb / a) * w + inv_ab * w * w / 3.0)
    total = float(np.sum(seg_int))
    mu = total / L
    g_bp = np.concatenate([[0.0], np.cumsum(seg_int - mu * w)])

    c0 = pa * pb - mu
    c1 = pa / b + pb / a
    seg_G = (g_bp[:-1] * w + 0.5 * c0 * w ** 2 + c1 * w ** 3 / 6.0
             + inv_ab * w ** 4 / 12.0)
    nu = float(np.sum(seg_G)) / L
    max_dev = float(np.max(np.abs(g_bp - nu))) + float(np.max(w)) * (1.0 / 3.0)

    return _PeriodStructure(a=float(a), b=float(b), L=float(L), mu=mu, nu=nu,
                            max_dev=max_dev, pts=pts, g_bp=g_bp, pa=pa, pb=pb)


def _pair_tail(a, b, V, struct):
    """integral over [V, inf) of rho(u/a) rho(u/b) / u^2 du with bound."""
    base = 0.25 / V
    sa, ea = _sawtooth_tail(a, V)
    sb, eb = _sawtooth_tail(b, V)
    value = base + 0.5 * sa + 0.5 * sb
    err = 0.5 * ea + 0.5 * eb
    if struct is None:
        # crude: |B(u/a) B(u/b)| <= 1/4
        err += 0.25 / V
        return value, err
    gv = struct.g_at(V)
    value += struct.mu / V + (struct.nu - gv) / (V * V)
    err += 2.0 * struct.L * struct.max_dev / V ** 3
    # drift of the numerically closed period (should be ~eps)
    drift = abs(struct.g_bp[-1])
    err += drift / (struct.L * V) + drift / (V * V)
    return value, err


def _single_tail(a, V):
    """integral over [V, inf) of rho(u/a)/u^2 du with bound."""
    sa, ea = _sawtooth_tail(a, V)
    return 0.5 / V + sa, ea


def _log_pairing(a, tol):
    """integral over (0,1) of log(x) * rho(1/(a x)) dx, numerically integrated.

    Gauss-Legendre on the joint partition above eps; below eps the mean-half
    term (1/2) integral of log is exact and the centered oscillation is
    bounded by a (1 + |log eps|) eps^2 / 4.
    """
    a = float(a)
    eps = 1e-5
    while a * (1.0 + abs(math.log(eps))) * eps * eps / 4.0 > 0.5 * tol:
        eps /= 4.0
        if 1.0 / (a * eps) > 5e7:
            raise ToleranceNotReachedError(
                f"log-generator pairing with a={a:g} cannot certify {tol:g}")
    ma = int(math.floor(1.0 / (a * eps))) + 1
    pts = np.unique(np.concatenate([
        np.array([eps, 1.0]),
        1.0 / (a * np.arange(1, ma + 1, dtype=float))]))
    pts = pts[(pts >= eps) & (pts <= 1.0)]
    seg_lo, seg_hi = pts[:-1], pts[1:]
    n_sub = np.clip(np.ceil((seg_hi - seg_lo) / (0.1 * seg_lo)).astype(int),
                    1, 64)
    widths = np.repeat((seg_hi - seg_lo) / n_sub, n_sub)
    lo = np.repeat(seg_lo, n_sub) + np.concatenate(
        [np.arange(k) for k in n_sub]).astype(float) * widths
    nodes, wts = np.polynomial.legendre.leggauss(12)
    mid = lo + 0.5 * widths
    half = 0.5 * widths
    x = mid[:, None] + half[:, None] * nodes[None, :]
    t = 1.0 / (a * x)
    vals = np.log(x) * (t - np.floor(t))
    total = float(np.sum(half * (vals @ wts)))
    # exact mean-half tail: (1/2) integral of log over (0, eps)
    tail = 0.5 * eps * (math.log(eps) - 1.0)
    err = a * (1.0 + abs(math.log(eps))) * eps * eps / 4.0 + 64 * _EPS
    return total + tail, err


# ---------------------------------------------------------------------------
# V selection and public pairings
# ---------------------------------------------------------------------------

def _choose_v_single(a, tol):
    v = (2.0 * _QMAX * a * a / (0.5 * tol)) ** (1.0 / 3.0)
    return int(math.ceil(max(v, 4.0 * a, 64.0)))


def _choose_v_pair(a, b, tol, struct):
    v_saw = (2.0 * _QMAX * (a * a + b * b) / (0.2 * tol)) ** (1.0 / 3.0)
    if struct is None:
        v_cross = 0.25 / (0.4 * tol)
    else:
        v_cross = (2.0 * struct.L * max(struct.max_dev, 1e-30)
                   / (0.4 * tol)) ** (1.0 / 3.0)
    return int(math.ceil(max(v_saw, v_cross, 4.0 * max(a, b), 64.0)))


def _check_budget(segments, max_segments, tol, what):
    if segments > max_segments:
        raise ToleranceNotReachedError(
            f"{what}: certified tolerance {tol:g} needs ~{segments:.3g} "
            f"segments, budget is {max_segments:.3g}",
            requested=tol)


def inner_product_with_bound(a, b, tol=1e-12, *, max_segments=5e7):
    """Pairing of two basis functions (or CHI) with a certified error bound.

    Returns (value, bound) with |value - exact| <= bound <= tol.
    """
    a_chi = a is CHI or a is None or isinstance(a, _Chi)
    b_chi = b is CHI or b is None or isinstance(b, _Chi)
    a_log = isinstance(a, _LogGenerator)
    b_log = isinstance(b, _LogGenerator)
    if tol <= 0:
        raise ValueError("tol must be positive")
    if a_log or b_log:
        if a_log and b_log:
            return 2.0, 0.0          # integral of log^2 over (0,1)
        other = b if a_log else a
        if other is CHI or other is None or isinstance(other, _Chi):
            return -1.0, 0.0         # integral of log over (0,1)
        d = float(other)
        if not d >= 1.0:
            raise ValueError(f"dilation must satisfy a >= 1, got {d}")
        value, err = _log_pairing(d, tol)
        if err > tol:
            raise ToleranceNotReachedError(
                f"log-generator pairing certified only to {err:g} > {tol:g}",
                achieved=err, requested=tol)
        return value, err
    if a_chi and b_chi:
        return 1.0, 0.0
    if a_chi or b_chi:
        d = float(b if a_chi else a)
        if not d >= 1.0:
            raise ValueError(f"dilation must satisfy a >= 1, got {d}")
        V = _choose_v_single(d, tol)
        _check_budget(V / d, max_segments, tol, "generator pairing")
        seg = _segment_sum_single(d, V)
        tail, err = _single_tail(d, V)
        value = seg + tail
        err += 32.0 * _EPS * (abs(seg) + 1.0)
        if err > tol:
            raise ToleranceNotReachedError(
                f"generator pairing certified only to {err:g} > {tol:g}",
                achieved=err, requested=tol)
        return value, err

    a, b = float(a), float(b)
    if not (a >= 1.0 and b >= 1.0):
        raise ValueError("dilations must satisfy a >= 1")
    if a > b:
        a, b = b, a
    struct = _period_structure(a, b)
    V = _choose_v_pair(a, b, tol, struct)
    _check_budget(V / a + V / b, max_segments, tol, f"pairing ({a:g},{b:g})")
    seg = _segment_sum_pair(a, b, V)
    tail, err = _pair_tail(a, b, V, struct)
    value = seg + tail
    err += 32.0 * _EPS * (abs(seg) + 1.0)
    if err > tol:
        raise ToleranceNotReachedError(
            f"pairing ({a:g},{b:g}) certified only to {err:g} > {tol:g}",
            achieved=err, requested=tol)
    return value, err


def inner_product(a, b, tol=1e-12, *, max_segments=5e7):
    """integral over (0,1) of the two basis factors (CHI allowed either side)."""
    value, _ = inner_product_with_bound(a, b, tol, max_segments=max_segments)
    return value


# ---------------------------------------------------------------------------
# Gram assembly
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GramData:
    """Pairing matrix, generator pairings and the worst certified bound."""

    matrix: np.ndarray
    chi_vector: np.ndarray
    bound: float
    tol: float
    generator: str = "chi"

    @property
    def n(self) -> int:
        return len(self.chi_vector)


def gram_matrix(basis: DilationBasis, tol=1e-12, *, max_segments=5e7,
                generator="chi") -> GramData:
    """All pairwise pairings of the basis plus the generator vector.

    ``generator`` picks the function paired against the basis in the vector:
    "chi" (default) or "log" for the alternative x -> log x generator.
    """
    if generator not in ("chi", "log"):
        raise ValueError("generator must be 'chi' or 'log'")
    gen = CHI if generator == "chi" else LOG_GENERATOR
    n = basis.n
    G = np.zeros((n, n))
    chi_vec = np.zeros(n)
    worst = 0.0
    for j in range(n):
        v, e = inner_product_with_bound(gen, basis.dilations[j], tol,
                                        max_segments=max_segments)
        chi_vec[j] = v
        worst = max(worst, e)
        for k in range(j, n):
            v, e = inner_product_with_bound(basis.dilations[j],
                                            basis.dilations[k], tol,
                                            max_segments=max_segments)
            G[j, k] = v
            G[k, j] = v
            worst = max(worst, e)
    return GramData(matrix=G, chi_vector=chi_vec, bound=worst, tol=tol,
                    generator=generator)


# ---------------------------------------------------------------------------
# certified residual tail moments (for truncation accounting)
# ---------------------------------------------------------------------------

def residual_tail_moments(basis: DilationBasis, coeffs, eps):
    """Certified (integral of f, integral of f^2) over (0, eps) for
    f = 1 - sum_k c_k rho_k.  Returns (m1, m2, bound) where bound covers both.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    V = 1.0 / eps
    m1 = eps
    m2 = eps
    err = 0.0
    for c, a in zip(coeffs, basis.dilations):
        v, e = _single_tail(a, V)
        m1 -= c * v
        m2 -= 2.0 * c * v
        err += 3.0 * abs(c) * e
    for j, aj in enumerate(basis.dilations):
        for k in range(j, basis.n):
            ak = basis.dilations[k]
            struct = _period_structure(min(aj, ak), max(aj, ak))
            v, e = _pair_tail(min(aj, ak), max(aj, ak), V, struct)
            wgt = coeffs[j] * coeffs[k] * (1.0 if j == k else 2.0)
            m2 += wgt * v
            err += abs(wgt) * e
    return float(m1), float(m2), float(err)
