"""Batch command-line front-end.

Subcommands::

    nbx gram      --n 16 --tol 1e-12 --out OUTDIR
    nbx sweep     --n-max 64 --weight power:1 --out OUTDIR
    nbx deltanorm --function chi --weight one

Tabular results are CSV, structured results JSON; figures are rendered next
to the delimited outputs.  Exit codes: 0 success, 2 configuration error,
3 numerical certificate failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

from .basis import DilationBasis, residual_function
from .exceptions import ConfigError, NbxError
from .extrapolation import (default_t_grid, default_theta_grid, delta_norm,
                            parse_weight)
from .minimizer import DeltaBudget, sweep
from .pairings import gram_matrix
from .piecewise import PiecewiseFunction
from .rearrangement import rearrange
from . import plots


@dataclass(frozen=True)
class RunConfig:
    """Echo of the effective configuration (kept with every artifact)."""

    command: str
    n: int = None
    n_max: int = None
    basis: str = None
    weight: str = "one"
    tol: float = 1e-12
    theta_grid: int = 20
    t_grid: int = 40
    grid_size: int = 65536
    x_cut: float = 1e-4
    out: str = "."
    seed: int = 0
    constrained: bool = False
    function: str = None
    delta: bool = True

    def dump(self, path):
        with open(path, "w") as fh:
            json.dump({k: v for k, v in asdict(self).items() if v is not None},
                      fh, indent=2, sort_keys=True)
            fh.write("\n")


def _fmt(x) -> str:
    return repr(float(x))


def _build_basis(cfg: RunConfig) -> DilationBasis:
    if cfg.basis:
        text = cfg.basis
        if not text.lstrip().startswith("{"):
            text = Path(text).read_text()
        try:
            return DilationBasis.from_json(text)
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"bad basis spec: {exc}") from exc
    if cfg.n is None:
        raise ConfigError("need --n or --basis")
    return DilationBasis.integer(cfg.n)


def cmd_gram(cfg: RunConfig) -> int:
    basis = _build_basis(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    gd = gram_matrix(basis, cfg.tol)
    with open(out / "gram.csv", "w") as fh:
        fh.write("j,k,value\n")
        for j in range(gd.n):
            for k in range(j, gd.n):
                fh.write(f"{j + 1},{k + 1},{_fmt(gd.matrix[j, k])}\n")
    with open(out / "b.csv", "w") as fh:
        fh.write("k,value\n")
        for k in range(gd.n):
            fh.write(f"{k + 1},{_fmt(gd.chi_vector[k])}\n")
    plots.render_gram_figure(gd.matrix, out / "gram.png")
    cfg.dump(out / "config.json")
    print(f"wrote {gd.n}x{gd.n} pairing data to {out} "
          f"(certified bound {gd.bound:.3e})")
    return 0


def cmd_sweep(cfg: RunConfig) -> int:
    weight = parse_weight(cfg.weight)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    budget = DeltaBudget(x_cut=cfg.x_cut, grid_size=cfg.grid_size)
    reports = sweep(cfg.n_max, weight, delta=cfg.delta, tol=cfg.tol,
                    constrained=cfg.constrained, budget=budget)
    csv_path = out / "sweep.csv"
    with open(csv_path, "w") as fh:
        fh.write("n,l2_distance,delta_distance,weight,cond_estimate\n")
        for r in reports:
            dd = _fmt(r.delta_distance) if r.delta_distance is not None else ""
            fh.write(f"{r.n},{_fmt(r.l2_distance)},{dd},{r.weight},"
                     f"{_fmt(r.cond_estimate)}\n")
    with open(out / "coefficients.json", "w") as fh:
        json.dump({str(r.n): r.as_dict() for r in reports}, fh, indent=2,
                  sort_keys=True)
        fh.write("\n")
    lines = [f"distance sweep to n_max={cfg.n_max}, weight={weight.label}"]
    for r in reports:
        extra = (f"  delta={r.delta_distance:.6f}"
                 if r.delta_distance is not None else "")
        lines.append(f"  n={r.n:4d}  l2={r.l2_distance:.6f}{extra}  "
                     f"cond={r.cond_estimate:.3e}")
    summary = "\n".join(lines) + "\n"
    (out / "summary.txt").write_text(summary)
    plots.render_sweep_figure(reports, out / "sweep.png")
    cfg.dump(out / "config.json")
    sys.stdout.write(summary)
    return 0


_PRESETS = {
    "chi": PiecewiseFunction.chi,
    "step": PiecewiseFunction.step,
    "zero": PiecewiseFunction.zero,
}


def _build_function(cfg: RunConfig) -> PiecewiseFunction:
    spec = cfg.function
    if spec is None:
        raise ConfigError("need --function (chi | step | zero | JSON)")
    if spec in _PRESETS:
        return _PRESETS[spec]()
    try:
        text = spec if spec.lstrip().startswith("{") else Path(spec).read_text()
        payload = json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"bad function spec {spec!r}: {exc}") from exc
    if "dilations" in payload or "integer_n" in payload:
        basis = DilationBasis.from_spec(payload)
        coeffs = payload.get("coeffs")
        if coeffs is None or len(coeffs) != basis.n:
            raise ConfigError("residual spec needs matching 'coeffs'")
        return residual_function(basis, coeffs, cfg.x_cut)
    try:
        return PiecewiseFunction.from_spec(payload)
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"bad function spec: {exc}") from exc


def cmd_deltanorm(cfg: RunConfig) -> int:
    weight = parse_weight(cfg.weight)
    f = _build_function(cfg)
    profile = rearrange(f, cfg.grid_size)
    res = delta_norm(profile, weight,
                     default_theta_grid(cfg.theta_grid),
                     default_t_grid(cfg.t_grid))
    payload = {
        "value": res.value,
        "theta_star": res.theta_star,
        "t_star": res.t_star,
        "certificate": {
            "refined_value": res.refined_value,
            "rel_change": res.rel_change,
            "profile_cells": int(len(profile.fstar)),
            "tail_l1_bound": profile.tail_l1_bound,
        },
        "weight": weight.label,
    }
    print(json.dumps(payload, sort_keys=True))
    return 0


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nbx", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--tol", type=float, default=1e-12)
        p.add_argument("--out", default=".")
        p.add_argument("--seed", type=int, default=0)

    g = sub.add_parser("gram", help="pairing matrix and generator vector")
    g.add_argument("--n", type=int)
    g.add_argument("--basis", help="JSON basis spec (inline or path)")
    common(g)

    s = sub.add_parser("sweep", help="distance sweep over doubling basis sizes")
    s.add_argument("--n-max", type=int, required=True)
    s.add_argument("--weight", default="one")
    s.add_argument("--constrained", action="store_true")
    s.add_argument("--no-delta", dest="delta", action="store_false")
    s.add_argument("--x-cut", type=float, default=1e-4)
    s.add_argument("--grid-size", type=int, default=65536)
    common(s)

    d = sub.add_parser("deltanorm", help="weighted sup-norm of one function")
    d.add_argument("--function", required=True,
                   help="chi | step | zero | JSON spec (inline or path)")
    d.add_argument("--weight", default="one")
    d.add_argument("--theta-grid", type=int, default=20)
    d.add_argument("--t-grid", type=int, default=40)
    d.add_argument("--grid-size", type=int, default=65536)
    d.add_argument("--x-cut", type=float, default=1e-4)
    common(d)
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    kwargs = {k: v for k, v in vars(args).items() if v is not None}
    cfg = RunConfig(**kwargs)
    if cfg.tol <= 0:
        print("error: --tol must be positive", file=sys.stderr)
        return 2
    try:
        if cfg.command == "gram":
            return cmd_gram(cfg)
        if cfg.command == "sweep":
            if cfg.n_max is None or cfg.n_max < 1:
                raise ConfigError("--n-max must be >= 1")
            return cmd_sweep(cfg)
        if cfg.command == "deltanorm":
            return cmd_deltanorm(cfg)
        raise ConfigError(f"unknown command {cfg.command!r}")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NbxError as exc:
        print(f"numerical certificate failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
