"""Best-approximation distances from the generator to the dilated span.

Two objectives at desk scale:

*   the classical least-squares distance  d_n^2 = 1 - b.c*  where c* solves
    the normal equations G c = b built from certified pairings, and
*   the weighted sup-extrapolation distance, minimised over coefficients by
    Polyak-style subgradient steps (the objective is a norm of an affine map
    of the coefficients, hence convex), initialised at the least-squares
    minimiser and certified never to exceed the extrapolation norm there.

Pairing matrices for integer dilations are cached on disk (NBX_CACHE_DIR)
because assembly at tight tolerances dominates the cost of a sweep.
"""

from __future__ import annotations

import logging
import math
import os
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .basis import (LOG_GENERATOR, CoefficientVector, DilationBasis,
                    residual_function, rho_values)
from .exceptions import IllConditionedError, NbxError
from .extrapolation import (DeltaNormResult, TemperedWeight, delta_norm,
                            weight_presets)
from .pairings import (GramData, gram_matrix, inner_product_with_bound,
                       residual_tail_moments)
from .piecewise import PiecewiseFunction
from .rearrangement import RearrangementProfile, rearrange

logger = logging.getLogger(__name__)

DEFAULT_GRAM_TOL = 1e-12
_RESIDUAL_HARD_LIMIT = 1e-6
_RESIDUAL_TARGET = 1e-10


# ---------------------------------------------------------------------------
# pairing-matrix cache
# ---------------------------------------------------------------------------

def _cache_dir():
    d = os.environ.get("NBX_CACHE_DIR")
    if not d:
        return None
    path = Path(d)
    path.mkdir(parents=True, exist_ok=True)
    return path


def get_gram(n: int, tol: float = DEFAULT_GRAM_TOL, *,
             max_segments: float = 5e7) -> GramData:
    """Pairing data for the integer basis 1..n, cached under NBX_CACHE_DIR.

    Any cached file at the same tolerance with size >= n is sliced."""
    cache = _cache_dir()
    tag = f"{tol:.3e}"
    if cache is not None:
        best = None
        for f in cache.glob("gram_int_*.npz"):
            m = re.match(r"gram_int_n(\d+)_tol(.+)\.npz", f.name)
            if m and m.group(2) == tag and int(m.group(1)) >= n:
                if best is None or int(m.group(1)) < best[0]:
                    best = (int(m.group(1)), f)
        if best is not None:
            with np.load(best[1]) as z:
                return GramData(matrix=z["g"][:n, :n].copy(),
                                chi_vector=z["b"][:n].copy(),
                                bound=float(z["bound"]), tol=tol)
    gd = gram_matrix(DilationBasis.integer(n), tol, max_segments=max_segments)
    if cache is not None:
        np.savez(cache / f"gram_int_n{n}_tol{tag}.npz", g=gd.matrix,
                 b=gd.chi_vector, bound=gd.bound)
    return gd


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

@dataclass
class DistanceReport:
    """Per-n record of distances, coefficients and solve diagnostics."""

    n: int
    l2_distance: float
    l2_coeffs: CoefficientVector
    weight: str = "one"
    delta_distance: float = None
    delta_coeffs: CoefficientVector = None
    cond_estimate: float = float("nan")
    normal_residual: float = 0.0
    reg_lambda: float = 0.0
    gram_tol: float = DEFAULT_GRAM_TOL
    gram_bound: float = 0.0
    iterations: int = 0
    delta_certificate: dict = field(default_factory=dict)

    def as_dict(self):
        out = {
            "n": self.n,
            "l2_distance": self.l2_distance,
            "l2_coeffs": list(self.l2_coeffs.coeffs),
            "weight": self.weight,
            "cond_estimate": self.cond_estimate,
            "normal_residual": self.normal_residual,
            "reg_lambda": self.reg_lambda,
            "gram_tol": self.gram_tol,
            "iterations": self.iterations,
        }
        if self.delta_distance is not None:
            out["delta_distance"] = self.delta_distance
            out["delta_coeffs"] = list(self.delta_coeffs.coeffs)
            out["delta_certificate"] = self.delta_certificate
        return out


# ---------------------------------------------------------------------------
# least-squares distance
# ---------------------------------------------------------------------------

def _solve_normal_equations(G, b):
    """SPD solve with Tikhonov fallback and iterative refinement against the
    unregularised matrix.  Returns (c, residual_inf, lambda_used)."""
    n = len(b)
    lam = 0.0
    A = G
    try:
        np.linalg.cholesky(A)
    except np.linalg.LinAlgError:
        lam = 1e-12 * float(np.trace(G)) / max(n, 1)
        A = G + lam * np.eye(n)
    c = np.linalg.solve(A, b)
    resid = float(np.max(np.abs(b - G @ c)))
    for _ in range(8):
        if resid <= _RESIDUAL_TARGET:
            break
        c = c + np.linalg.solve(A, b - G @ c)
        resid = float(np.max(np.abs(b - G @ c)))
    if resid > _RESIDUAL_HARD_LIMIT:
        raise IllConditionedError(
            f"normal-equation residual {resid:.3e} above "
            f"{_RESIDUAL_HARD_LIMIT:g} despite regularisation {lam:.3e}")
    return c, resid, lam


def _solve_constrained(G, b, v):
    """One-multiplier KKT system for the endpoint constraint v.c = 0."""
    n = len(b)
    if float(np.max(np.abs(v), initial=0.0)) == 0.0:
        # constraint is vacuous (integer dilations)
        return _solve_normal_equations(G, b)
    A = np.zeros((n + 1, n + 1))
    A[:n, :n] = G
    A[:n, n] = v
    A[n, :n] = v
    rhs = np.concatenate([b, [0.0]])
    sol = np.linalg.solve(A, rhs)
    for _ in range(4):
        sol = sol + np.linalg.solve(A, rhs - A @ sol)
    c = sol[:n]
    resid = float(np.max(np.abs(b - G @ c - sol[n] * v)))
    if resid > _RESIDUAL_HARD_LIMIT:
        raise IllConditionedError(
            f"constrained solve residual {resid:.3e}")
    return c, resid, 0.0


def l2_distance(n: int = None, constrained: bool = False, *,
                basis: DilationBasis = None, tol: float = DEFAULT_GRAM_TOL,
                gram: GramData = None, weight_label: str = "one",
                generator: str = "chi",
                max_segments: float = 5e7) -> DistanceReport:
    """Least-squares distance from the generator to the n-term span.

    The distance satisfies d^2 = |gen|^2 - b.c* at the solution (with or
    without the endpoint constraint, which is vacuous for integer
    dilations).  ``generator`` is "chi" (default, |gen|^2 = 1) or "log" for
    the alternative x -> log x generator (|gen|^2 = 2, pairings numerically
    integrated).
    """
    if generator not in ("chi", "log"):
        raise ValueError("generator must be 'chi' or 'log'")
    gen_sq = 1.0 if generator == "chi" else 2.0
    if basis is None:
        if n is None:
            raise ValueError("need n or basis")
        basis = DilationBasis.integer(n)
    n = basis.n
    if n == 0:
        return DistanceReport(n=0, l2_distance=math.sqrt(gen_sq),
                              l2_coeffs=CoefficientVector((), 0.0),
                              weight=weight_label, gram_tol=tol)
    if gram is None:
        if basis.is_integer and tuple(basis.dilations) == tuple(
                float(k) for k in range(1, n + 1)):
            gram = get_gram(n, tol, max_segments=max_segments)
        else:
            gram = gram_matrix(basis, tol, max_segments=max_segments)
    G = gram.matrix
    if generator == "log" and gram.generator != "log":
        log_tol = max(tol, 1e-9)
        b = np.array([inner_product_with_bound(LOG_GENERATOR, a, log_tol)[0]
                      for a in basis.dilations])
    else:
        b = gram.chi_vector
    if constrained:
        c, resid, lam = _solve_constrained(G, b, basis.endpoint_values())
    else:
        c, resid, lam = _solve_normal_equations(G, b)
    d2 = max(gen_sq - float(b @ c), 0.0)
    eig = np.linalg.eigvalsh(G)
    cond = float(eig[-1] / max(eig[0], 1e-300))
    logger.info("l2_distance n=%d d=%.6e resid=%.2e cond=%.3e lam=%.1e",
                n, math.sqrt(d2), resid, cond, lam)
    return DistanceReport(
        n=n, l2_distance=math.sqrt(d2),
        l2_coeffs=CoefficientVector.for_basis(basis, c),
        weight=weight_label, cond_estimate=cond, normal_residual=resid,
        reg_lambda=lam, gram_tol=tol, gram_bound=gram.bound)


def l2_crosscheck(basis: DilationBasis, coeffs, x_cut: float = 1e-6):
    """Squared residual norm by direct integration: exact segments on
    (x_cut, 1) plus the certified tail moments.  Returns (d2, bound)."""
    f = residual_function(basis, coeffs, x_cut)
    _, m2, bound = residual_tail_moments(basis, np.asarray(coeffs, float), x_cut)
    return f.l2_norm_sq() + m2, bound


# ---------------------------------------------------------------------------
# extrapolation-norm distance
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DeltaBudget:
    """Effort knobs for the subgradient minimisation."""

    iterations: int = 40
    x_cut: float = 1e-4
    grid_size: int = 65536
    proxy_grid: int = 16384


class _ProxyObjective:
    """Point-sampled evaluation of the weighted sup-norm of the residual.

    The mesh is fixed by the basis, so the objective is an exact max-of-
    affine-images functional of the sampled |residual| and its subgradient
    at the active (theta*, t*) is available in closed form through the
    suffix integrals of the step profile.
    """

    def __init__(self, basis, weight, budget):
        f_ref = residual_function(basis, np.ones(basis.n), budget.x_cut)
        edges = f_ref.refined_edges(budget.proxy_grid)
        self.lo, self.hi = edges[:-1], edges[1:]
        self.mass = self.hi - self.lo
        self.mid = 0.5 * (self.lo + self.hi)
        self.rho = np.stack([rho_values(a, self.mid) for a in basis.dilations])
        self.weight = weight
        self.x_cut = budget.x_cut

    def profile_for(self, c):
        v = 1.0 - c @ self.rho
        absv = np.abs(v)
        order = np.argsort(-absv, kind="stable")
        va = absv[order]
        ma = self.mass[order]
        cum = np.cumsum(va * ma)
        cum2 = np.cumsum(va * va * ma)
        prof = RearrangementProfile(
            fstar=va, mass=ma, s_hi=np.cumsum(ma), cum=cum, cum2=cum2,
            l1_mass=float(cum[-1]), l2_sq=float(cum2[-1]), variance_gap=0.0,
            x_cut=self.x_cut, tail_l1_bound=0.0)
        return prof, v, order

    def value_and_grad(self, c):
        prof, v, order = self.profile_for(c)
        res = delta_norm(prof, self.weight, certify=False)
        if res.value <= 0.0:
            return 0.0, np.zeros(len(c)), res
        th, t = res.theta_star, res.t_star
        w_val = prof.w_tail(t * t)
        if w_val <= 0.0:
            return res.value, np.zeros(len(c)), res
        # d/d|v_j| of W(t^2) ~ 2 m_j * integral of f**(s)/s over (max(t^2,S_j), inf)
        s_mid = prof.s_hi - 0.5 * prof.mass
        w_sorted = prof.mass * prof.r_tail(np.maximum(t * t, s_mid))
        # scatter sorted-cell weights back to mesh order
        cell_w = np.empty_like(w_sorted)
        cell_w[order] = w_sorted
        scale = self.weight.eval(th) * t ** (1.0 - th) / math.sqrt(w_val)
        grad = -scale * (self.rho @ (cell_w * np.sign(v)))
        return res.value, grad, res


def delta_distance(n: int = None, weight: TemperedWeight = None, *,
                   basis: DilationBasis = None, budget: DeltaBudget = None,
                   tol: float = DEFAULT_GRAM_TOL, gram: GramData = None,
                   initial_coeffs=None, l2_report: DistanceReport = None,
                   max_segments: float = 5e7) -> DistanceReport:
    """Approximate minimiser of the weighted sup-norm of the residual.

    Subgradient descent with Polyak-style steps on a fixed sampling mesh;
    the reported value is re-evaluated through the full profile pipeline and
    never exceeds the norm at the least-squares coefficients (nor at zero),
    which is recorded as the certificate.
    """
    if weight is None:
        weight = weight_presets("one")
    if budget is None:
        budget = DeltaBudget()
    if basis is None:
        if n is None:
            raise ValueError("need n or basis")
        basis = DilationBasis.integer(n)
    n = basis.n
    if l2_report is None:
        l2_report = l2_distance(basis=basis, tol=tol, gram=gram,
                                weight_label=weight.label,
                                max_segments=max_segments)
    if n == 0:
        chi_prof = rearrange(PiecewiseFunction.chi())
        val = delta_norm(chi_prof, weight).value
        rep = l2_report
        rep.weight = weight.label
        rep.delta_distance = val
        rep.delta_coeffs = CoefficientVector((), 0.0)
        return rep

    obj = _ProxyObjective(basis, weight, budget)
    c0 = np.asarray(initial_coeffs if initial_coeffs is not None
                    else l2_report.l2_coeffs.coeffs, dtype=float)
    c = c0.copy()
    f_val, grad, _ = obj.value_and_grad(c)
    best_val, best_c = f_val, c.copy()
    iters_used = 0
    for k in range(budget.iterations):
        iters_used = k + 1
        gnorm2 = float(grad @ grad)
        if gnorm2 <= 1e-28:
            break
        target = best_val * (1.0 - 0.25 / math.sqrt(k + 1.0))
        step = max(f_val - target, 0.0) / gnorm2
        c = c - step * grad
        f_val, grad, _ = obj.value_and_grad(c)
        if f_val < best_val:
            best_val, best_c = f_val, c.copy()

    def full_value(coeffs):
        if not np.any(coeffs):
            prof = rearrange(PiecewiseFunction.chi())
        else:
            prof = rearrange(residual_function(basis, coeffs, budget.x_cut),
                             budget.grid_size)
        return delta_norm(prof, weight)

    candidates = {"optimised": best_c, "initial": c0,
                  "l2": np.asarray(l2_report.l2_coeffs.coeffs, dtype=float),
                  "zero": np.zeros(n)}
    evaluated = {name: full_value(cc) for name, cc in candidates.items()}
    best_name = min(evaluated, key=lambda k: evaluated[k].value)
    res: DeltaNormResult = evaluated[best_name]
    rep = l2_report
    rep.weight = weight.label
    rep.delta_distance = res.value
    rep.delta_coeffs = CoefficientVector.for_basis(
        basis, candidates[best_name])
    rep.iterations = iters_used
    rep.delta_certificate = {
        "value_at_l2_minimizer": evaluated["l2"].value,
        "value_at_zero": evaluated["zero"].value,
        "chosen": best_name,
        "theta_star": res.theta_star,
        "t_star": res.t_star,
        "grid_rel_change": res.rel_change,
    }
    logger.info("delta_distance n=%d weight=%s value=%.6e (%s, %d iters)",
                n, weight.label, res.value, best_name, iters_used)
    return rep


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

def sweep_sizes(n_max: int):
    """n = 1, 2, 4, ... capped at n_max (n_max itself always included)."""
    ns = []
    k = 1
    while k <= n_max:
        ns.append(k)
        k *= 2
    if ns and ns[-1] != n_max:
        ns.append(n_max)
    return ns


def sweep(n_max: int, weight: TemperedWeight = None, *, delta: bool = True,
          tol: float = DEFAULT_GRAM_TOL, constrained: bool = False,
          budget: DeltaBudget = None, max_segments: float = 5e7):
    """Distance reports for n = 1, 2, 4, ..., n_max.

    Per-n failures are logged and skipped so partial sweeps still return.
    The largest pairing matrix is assembled once and sliced per n.
    """
    if n_max < 1 or n_max > 512:
        raise ValueError("n_max must lie in 1..512")
    if weight is None:
        weight = weight_presets("one")
    big = get_gram(n_max, tol, max_segments=max_segments)
    reports = []
    for n in sweep_sizes(n_max):
        sub = GramData(matrix=big.matrix[:n, :n], chi_vector=big.chi_vector[:n],
                       bound=big.bound, tol=tol)
        try:
            rep = l2_distance(n, constrained=constrained, tol=tol, gram=sub,
                              weight_label=weight.label)
            if delta:
                rep = delta_distance(n, weight, budget=budget, tol=tol,
                                     gram=sub, l2_report=rep)
            reports.append(rep)
        except NbxError as exc:
            logger.warning("sweep n=%d failed: %s", n, exc)
    return reports
