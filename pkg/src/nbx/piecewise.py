"""Piecewise alpha + beta/x functions on subintervals of (0,1).

Residuals of the dilated fractional-part system are exactly of this shape on
every segment of the joint breakpoint partition, so norms and meshes can be
computed in closed form segment by segment.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np


def _beta_log(beta, lo, w):
    """beta * log(1 + w/lo), exactly zero where beta vanishes (so segments
    reaching lo = 0 are allowed for constant pieces)."""
    out = np.zeros_like(w)
    mask = beta != 0.0
    if np.any(mask):
        out[mask] = beta[mask] * np.log1p(w[mask] / lo[mask])
    return out


def _seg_l2sq(alpha, beta, lo, hi):
    # integral of (alpha + beta/x)^2 = a^2 w + 2ab log(hi/lo) + b^2 (1/lo - 1/hi)
    w = hi - lo
    out = alpha * alpha * w + 2.0 * alpha * _beta_log(beta, lo, w)
    mask = beta != 0.0
    if np.any(mask):
        out[mask] += beta[mask] ** 2 * w[mask] / (lo[mask] * hi[mask])
    return out


def _seg_signed_l1(alpha, beta, lo, hi):
    # integral of alpha + beta/x
    w = hi - lo
    return alpha * w + _beta_log(beta, lo, w)


@dataclass(frozen=True)
class PiecewiseFunction:
    """Contiguous segments (x_lo, x_hi) each carrying alpha + beta/x.

    Segments partition (x_cut, 1).  The mass on (0, x_cut) is not represented;
    ``tail_l1_bound`` is a certified upper bound for its L1 contribution.
    x_cut == 0 is allowed when the representation is exact on all of (0,1).
    """

    x_lo: np.ndarray
    x_hi: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    x_cut: float = 0.0
    tail_l1_bound: float = 0.0

    def __post_init__(self):
        for name in ("x_lo", "x_hi", "alpha", "beta"):
            object.__setattr__(self, name,
                               np.ascontiguousarray(getattr(self, name), dtype=float))
        if not (len(self.x_lo) == len(self.x_hi) == len(self.alpha) == len(self.beta)):
            raise ValueError("segment arrays must share one length")
        if len(self.x_lo) == 0:
            raise ValueError("need at least one segment")
        if np.any(self.x_hi <= self.x_lo):
            raise ValueError("segments must have positive width")
        if not np.allclose(self.x_hi[:-1], self.x_lo[1:], rtol=0, atol=1e-15):
            raise ValueError("segments must be contiguous")

    # -- constructors -------------------------------------------------------

    @classmethod
    def single_segment(cls, lo, hi, alpha, beta, tail_l1_bound=0.0):
        return cls(np.array([lo]), np.array([hi]), np.array([alpha]),
                   np.array([beta]), x_cut=lo, tail_l1_bound=tail_l1_bound)

    @classmethod
    def chi(cls) -> "PiecewiseFunction":
        """Indicator of (0,1); exact, no unresolved tail."""
        return cls(np.array([0.0]), np.array([1.0]), np.array([1.0]),
                   np.array([0.0]), x_cut=0.0, tail_l1_bound=0.0)

    @classmethod
    def step(cls, height=2.0, split=0.5) -> "PiecewiseFunction":
        """height * indicator of (0, split); exact."""
        return cls(np.array([0.0, split]), np.array([split, 1.0]),
                   np.array([float(height), 0.0]), np.zeros(2),
                   x_cut=0.0, tail_l1_bound=0.0)

    @classmethod
    def zero(cls) -> "PiecewiseFunction":
        return cls(np.array([0.0]), np.array([1.0]), np.array([0.0]),
                   np.array([0.0]), x_cut=0.0, tail_l1_bound=0.0)

    @classmethod
    def from_spec(cls, spec: dict) -> "PiecewiseFunction":
        segs = spec["segments"]
        arr = np.asarray(segs, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 4:
            raise ValueError("segments must be rows [x_lo, x_hi, alpha, beta]")
        order = np.argsort(arr[:, 0])
        arr = arr[order]
        return cls(arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3],
                   x_cut=float(spec.get("x_cut", arr[0, 0])),
                   tail_l1_bound=float(spec.get("tail_l1_bound", 0.0)))

    @classmethod
    def from_json(cls, text: str) -> "PiecewiseFunction":
        return cls.from_spec(json.loads(text))

    def to_spec(self) -> dict:
        return {
            "segments": [[float(a), float(b), float(c), float(d)]
                         for a, b, c, d in zip(self.x_lo, self.x_hi,
                                               self.alpha, self.beta)],
            "x_cut": float(self.x_cut),
            "tail_l1_bound": float(self.tail_l1_bound),
        }

    # -- evaluation ---------------------------------------------------------

    @property
    def n_segments(self) -> int:
        return len(self.x_lo)

    @property
    def sup_bound(self) -> float:
        """Upper bound for sup |f| over the resolved segments."""
        lo_vals = np.abs(self.alpha + self.beta / self.x_lo)
        hi_vals = np.abs(self.alpha + self.beta / self.x_hi)
        return float(max(lo_vals.max(), hi_vals.max()))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        if np.any(x <= self.x_lo[0]) or np.any(x > self.x_hi[-1]):
            raise ValueError("evaluation outside the resolved domain")
        idx = np.clip(np.searchsorted(self.x_hi, x, side="left"), 0,
                      self.n_segments - 1)
        out = self.alpha[idx] + self.beta[idx] / x
        return float(out[0]) if scalar else out

    # -- exact norms over the resolved domain -------------------------------

    def signed_integral(self) -> float:
        return float(np.sum(_seg_signed_l1(self.alpha, self.beta,
                                           self.x_lo, self.x_hi)))

    def _split_at_roots(self):
        """Segment arrays refined so that f has one sign per piece."""
        lo, hi = self.x_lo, self.x_hi
        alpha, beta = self.alpha, self.beta
        with np.errstate(divide="ignore", invalid="ignore"):
            root = np.where(alpha != 0.0, -beta / alpha, np.nan)
        inside = (root > lo) & (root < hi)
        if not np.any(inside):
            return lo, hi, alpha, beta
        parts = [
            (lo[~inside], hi[~inside], alpha[~inside], beta[~inside]),
            (lo[inside], root[inside], alpha[inside], beta[inside]),
            (root[inside], hi[inside], alpha[inside], beta[inside]),
        ]
        lo = np.concatenate([p[0] for p in parts])
        hi = np.concatenate([p[1] for p in parts])
        alpha = np.concatenate([p[2] for p in parts])
        beta = np.concatenate([p[3] for p in parts])
        return lo, hi, alpha, beta

    def l1_norm(self) -> float:
        """Exact integral of |f| over (x_cut, 1)."""
        lo, hi, alpha, beta = self._split_at_roots()
        vals = _seg_signed_l1(alpha, beta, lo, hi)
        return float(np.sum(np.abs(vals)))

    def l2_norm_sq(self) -> float:
        """Exact integral of f^2 over (x_cut, 1)."""
        return float(np.sum(_seg_l2sq(self.alpha, self.beta,
                                      self.x_lo, self.x_hi)))

    def lp_norm(self, p: float, nodes: int = 24) -> float:
        """Integral of |f|^p over (x_cut, 1) by per-piece Gauss-Legendre,
        returned as the p-th root.  Pieces are sign-pure so the integrand is
        smooth on each."""
        if p <= 0:
            raise ValueError("p must be positive")
        lo, hi, alpha, beta = self._split_at_roots()
        gx, gw = np.polynomial.legendre.leggauss(nodes)
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        x = mid[:, None] + half[:, None] * gx[None, :]
        vals = np.abs(alpha[:, None] + beta[:, None] / x) ** p
        total = float(np.sum(half * (vals @ gw)))
        return total ** (1.0 / p)

    def scaled(self, c: float) -> "PiecewiseFunction":
        return PiecewiseFunction(self.x_lo, self.x_hi, c * self.alpha,
                                 c * self.beta, x_cut=self.x_cut,
                                 tail_l1_bound=abs(c) * self.tail_l1_bound)

    def refined_edges(self, grid_size: int) -> np.ndarray:
        """Segment edges merged with a mesh that is log-uniform on segments
        where beta != 0 (where f actually varies) and left alone elsewhere."""
        edges = [np.concatenate([self.x_lo, self.x_hi[-1:]])]
        varying = self.beta != 0.0
        if np.any(varying) and grid_size > 0:
            lo = self.x_lo[varying]
            hi = self.x_hi[varying]
            span = np.log(self.x_hi[-1] / self.x_lo[0])
            # subdivision counts proportional to each segment's log-width
            counts = np.ceil(grid_size * np.log(hi / lo) / max(span, 1e-300))
            counts = counts.astype(int)
            total = int(np.sum(counts))
            if total > 0:
                inner = np.empty(total)
                pos = 0
                for a, b, k in zip(lo, hi, counts):
                    if k <= 1:
                        continue
                    inner[pos:pos + k - 1] = np.exp(
                        np.linspace(np.log(a), np.log(b), k + 1)[1:-1])
                    pos += k - 1
                edges.append(inner[:pos])
        return np.unique(np.concatenate(edges))
