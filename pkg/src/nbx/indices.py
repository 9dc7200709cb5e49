"""Dilation-index estimation for sampled quasi-concave functions.

For a positive nondecreasing sample phi with phi(s)/s nonincreasing, the
lower/upper indices are the extreme exponents theta for which
phi(s)/phi(t) is bounded by gamma (s/t)^theta from above/below over all
grid pairs s < t, with the multiplicative slack gamma capped.  In log-log
coordinates both reduce to extremal chord slopes shifted by log(gamma)."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import NotQuasiConcaveError

_MONOTONE_RTOL = 1e-9


@dataclass(frozen=True)
class QuasiConcaveSample:
    """Grid s in (0,1] with positive values phi(s), validated quasi-concave."""

    s: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        s = np.ascontiguousarray(self.s, dtype=float)
        phi = np.ascontiguousarray(self.phi, dtype=float)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "phi", phi)
        if s.ndim != 1 or s.shape != phi.shape:
            raise ValueError("s and phi must be 1-d arrays of equal length")
        if np.any(s <= 0.0) or np.any(s > 1.0) or np.any(np.diff(s) <= 0):
            raise ValueError("s must be strictly increasing inside (0,1]")
        if np.any(phi <= 0.0):
            raise NotQuasiConcaveError("phi must be positive")
        scale = float(np.max(phi))
        if np.any(np.diff(phi) < -_MONOTONE_RTOL * scale):
            raise NotQuasiConcaveError("phi must be nondecreasing")
        ratio = phi / s
        if np.any(np.diff(ratio) > _MONOTONE_RTOL * float(np.max(ratio))):
            raise NotQuasiConcaveError("phi(s)/s must be nonincreasing")

    def __len__(self):
        return len(self.s)

    @classmethod
    def from_profile_csv(cls, path) -> "QuasiConcaveSample":
        """Read the rearrangement-profile dump ("s,fstar,fstarstar") mapping
        the running integral s * fstarstar onto phi."""
        s_vals, phi_vals = [], []
        with open(path) as fh:
            reader = csv.DictReader(fh)
            for row in reader:
                s = float(row["s"])
                if s > 1.0:
                    continue
                s_vals.append(s)
                phi_vals.append(s * float(row["fstarstar"]))
        return cls(np.array(s_vals), np.array(phi_vals))


def _pair_slopes(sample: QuasiConcaveSample, max_points=2048):
    """(dy, dx) over all grid pairs (subsampled deterministically if large)."""
    s, phi = sample.s, sample.phi
    if len(s) > max_points:
        idx = np.unique(np.linspace(0, len(s) - 1, max_points).astype(int))
        s, phi = s[idx], phi[idx]
    x = np.log(s)
    y = np.log(phi)
    dx = x[None, :] - x[:, None]
    dy = y[None, :] - y[:, None]
    mask = dx > 0
    return dy[mask], dx[mask]


def estimate_indices(sample: QuasiConcaveSample, gamma_cap: float = 1e3):
    """(alpha0, beta0) by the chord-slope transform.

    alpha0 is the largest exponent with phi(s)/phi(t) <= gamma (s/t)^alpha
    over all grid pairs for some gamma <= gamma_cap, i.e. the minimum of
    (dy + log gamma_cap)/dx over log-log chords; beta0 mirrors it with the
    reverse inequality.  Both are clipped to [0, 1] and always ordered.
    With gamma_cap = 1 they reduce to the extreme chord slopes.
    """
    if len(sample) < 64:
        raise ValueError("need at least 64 grid points")
    if gamma_cap < 1.0:
        raise ValueError("gamma_cap must be >= 1")
    dy, dx = _pair_slopes(sample)
    lg = math.log(gamma_cap)
    alpha0 = float(np.min((dy + lg) / dx))
    beta0 = float(np.max((dy - lg) / dx))
    alpha0 = min(max(alpha0, 0.0), 1.0)
    beta0 = min(max(beta0, 0.0), 1.0)
    if beta0 < alpha0:
        # possible only through the clipping; collapse to the common point
        beta0 = alpha0
    return alpha0, beta0


def scan_indices(sample: QuasiConcaveSample, gamma_cap: float = 1e3,
                 iters: int = 50):
    """Definition-based oracle: bisection on the exponent, feasibility by a
    dense pair scan.  Cross-checks estimate_indices."""
    dy, dx = _pair_slopes(sample, max_points=256)
    lg = math.log(gamma_cap)

    def upper_feasible(theta):
        # phi(s)/phi(t) <= gamma (s/t)^theta  <=>  theta dx <= dy + lg
        return bool(np.all(theta * dx <= dy + lg + 1e-14))

    def lower_feasible(theta):
        return bool(np.all(theta * dx >= dy - lg - 1e-14))

    lo, hi = 0.0, 1.0
    if not upper_feasible(0.0):
        alpha0 = 0.0
    elif upper_feasible(1.0):
        alpha0 = 1.0
    else:
        for _ in range(iters):
            mid = 0.5 * (lo + hi)
            if upper_feasible(mid):
                lo = mid
            else:
                hi = mid
        alpha0 = lo
    lo, hi = 0.0, 1.0
    if lower_feasible(0.0):
        beta0 = 0.0
    elif not lower_feasible(1.0):
        beta0 = 1.0
    else:
        for _ in range(iters):
            mid = 0.5 * (lo + hi)
            if lower_feasible(mid):
                hi = mid
            else:
                lo = mid
        beta0 = hi
    return min(alpha0, 1.0), min(beta0, 1.0)


def almost_increasing_gamma(sample: QuasiConcaveSample, theta: float) -> float:
    """Smallest gamma with s^-theta phi(s) <= gamma t^-theta phi(t) for all
    grid pairs s < t (monotonicity up to a constant)."""
    dy, dx = _pair_slopes(sample)
    # need  (phi(s) s^-theta)/(phi(t) t^-theta) <= gamma, s < t
    worst = float(np.max(theta * dx - dy))
    return math.exp(max(worst, 0.0))
