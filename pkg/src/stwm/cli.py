"""Command-line front end.

Subcommands: basis, sample, cov, limits, regularity, holder. Configuration
comes from a JSON document (--config); randomized subcommands print their
full seed record so any run can be replayed. Exit codes: 0 ok / condition
satisfied, 1 condition unsatisfied, 2 config error, 3 model invalid
(existence condition violated), 4 numerical failure.
"""

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import analysis, fieldfile
from .kernel import mode_cov, stationary_variance, temporal_matern_limit
from .quadrature import QuadratureConfig, QuadratureError
from .sampler import CholeskyError, SeedSpec, TimeGrid, sample_field
from .spectral import ConfigError, SpectralModel, model_from_dict, mode_params, weyl_ratio

EXIT_OK = 0
EXIT_UNSATISFIED = 1
EXIT_CONFIG = 2
EXIT_MODEL = 3
EXIT_NUMERICAL = 4

_FMT = ".17g"


def _f(x) -> str:
    return format(float(x), _FMT)


class ModelInvalid(RuntimeError):
    pass


def _load_config(path) -> dict:
    if path is None:
        raise ConfigError("--config", "a config file is required")
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise ConfigError("--config", f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("--config", f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    return doc


def _model_from_config(doc: dict) -> SpectralModel:
    model_doc = doc.get("model", doc)
    if not isinstance(model_doc, dict):
        raise ConfigError("model", "must be a JSON object")
    return model_from_dict(model_doc)


def _grid_from_config(doc: dict) -> TimeGrid:
    spec = doc.get("grid")
    if not isinstance(spec, dict):
        raise ConfigError("grid", "missing grid spec {t_start, t_end, steps}")
    try:
        t0 = float(spec["t_start"])
        t1 = float(spec["t_end"])
        steps = int(spec["steps"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError("grid", f"needs numeric t_start, t_end and integer steps ({exc})") from None
    if steps < 1:
        raise ConfigError("grid.steps", f"must be >= 1, got {steps}")
    try:
        return TimeGrid.uniform(t0, t1, steps)
    except ValueError as exc:
        raise ConfigError("grid", str(exc)) from None


def _space_from_config(doc: dict, model: SpectralModel) -> np.ndarray:
    spec = doc.get("space")
    if spec is None:
        raise ConfigError("space", "missing space spec ({points: [...]} or {lattice: n})")
    if isinstance(spec, dict) and "points" in spec:
        pts = np.atleast_2d(np.asarray(spec["points"], dtype=float))
        if model.d == 1 and pts.shape[0] == 1 and pts.shape[1] != 1:
            pts = pts.T
        return pts
    if isinstance(spec, dict) and "lattice" in spec:
        n = int(spec["lattice"])
        if n < 1:
            raise ConfigError("space.lattice", f"must be >= 1, got {n}")
        axes = [np.linspace(0.0, ell, n + 2)[1:-1] for ell in model.basis.extents]
        if model.d == 1:
            return axes[0][:, None]
        xx, yy = np.meshgrid(*axes, indexing="ij")
        return np.column_stack([xx.ravel(), yy.ravel()])
    raise ConfigError("space", "must contain 'points' or 'lattice'")


def _seed_from(args, doc: dict) -> SeedSpec:
    if args.seed is not None:
        return SeedSpec(args.seed)
    raw = doc.get("seed", 0)
    try:
        return SeedSpec(int(raw))
    except (TypeError, ValueError) as exc:
        raise ConfigError("seed", str(exc)) from None


def _threads_from(args) -> int:
    if args.threads is not None:
        return args.threads
    env = os.environ.get("STWM_THREADS")
    if env:
        try:
            return int(env)
        except ValueError:
            raise ConfigError("STWM_THREADS", f"not an integer: {env!r}") from None
    return 1


def _quad_cfg(args) -> QuadratureConfig:
    if args.rel_tol is not None:
        return QuadratureConfig(rel_tol=args.rel_tol)
    return QuadratureConfig()


def _out_dir(args) -> Path:
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _variance_series_summable(model: SpectralModel) -> bool:
    p_v = (2.0 / model.d) * (model.beta * (1.0 - 2.0 * model.gamma) - model.alpha)
    return p_v < -1.0


def cmd_basis(args) -> int:
    doc = _load_config(args.config)
    model = _model_from_config(doc)
    out = _out_dir(args) / "basis.csv"
    lam = model.basis.eigenvalues
    lam_t = model.basis_tilde.eigenvalues
    with open(out, "w") as fh:
        fh.write("j,lambda,lambda_tilde,weyl_ratio\n")
        for j in range(1, model.J + 1):
            ratio = lam[j - 1] / j ** (2.0 / model.d)
            fh.write(f"{j},{_f(lam[j - 1])},{_f(lam_t[j - 1])},{_f(ratio)}\n")
    if model.J >= 10:
        lo, hi = weyl_ratio(model.basis)
        print(f"weyl ratio extrema over upper half spectrum: [{_f(lo)}, {_f(hi)}]")
    print(f"wrote {out}")
    return EXIT_OK


def cmd_sample(args) -> int:
    doc = _load_config(args.config)
    model = _model_from_config(doc)
    if not model.gamma > 0.5:
        raise ModelInvalid(f"sampling requires gamma > 1/2, got gamma={model.gamma}")
    if not _variance_series_summable(model):
        if not args.force:
            raise ModelInvalid(
                "field variance series fails the eigenvalue-growth summability test "
                "(pass --force to sample the truncated model anyway)")
        print("warning: variance series diverges; sampling the truncated model (--force)")
    grid = _grid_from_config(doc)
    space = _space_from_config(doc, model)
    n_paths = int(doc.get("n_paths", 1))
    if n_paths < 1:
        raise ConfigError("n_paths", f"must be >= 1, got {n_paths}")
    seed = _seed_from(args, doc)
    threads = _threads_from(args)
    sample = sample_field(model, grid, space, n_paths, seed, _quad_cfg(args), threads)
    out = _out_dir(args)
    bin_path = out / "field.stwm"
    fieldfile.write_field(bin_path, sample)
    summary = out / "sample_summary.csv"
    with open(summary, "w") as fh:
        fh.write("time,mean,variance\n")
        for it, t in enumerate(grid.points):
            vals = sample.values[:, it, :]
            fh.write(f"{_f(t)},{_f(vals.mean())},{_f(vals.var(ddof=1) if vals.size > 1 else 0.0)}\n")
    print(f"seed record: master={seed.master} paths=0..{n_paths - 1} "
          f"(stream key = (master, path << 32 | mode))")
    print(f"wrote {bin_path}")
    print(f"wrote {summary}")
    return EXIT_OK


def cmd_cov(args) -> int:
    doc = _load_config(args.config)
    model = _model_from_config(doc)
    if not model.gamma > 0.5:
        raise ModelInvalid(f"covariance requires gamma > 1/2, got gamma={model.gamma}")
    grid = _grid_from_config(doc)
    cfg = _quad_cfg(args)
    opts = doc.get("cov", {})
    if not isinstance(opts, dict):
        raise ConfigError("cov", "must be a JSON object")
    target = opts.get("mode", 1)
    out = _out_dir(args) / "cov.csv"
    pts = grid.points
    with open(out, "w") as fh:
        fh.write("s,t,value\n")
        if target == "field":
            if "x" not in opts:
                raise ConfigError("cov.x", "field covariance needs spatial points x (and optional y)")
            x = opts["x"]
            y = opts.get("y", x)
            for s in pts:
                for t in pts[pts >= s]:
                    val = analysis.field_cov(model, float(s), float(t), x, y, cfg).value
                    fh.write(f"{_f(s)},{_f(t)},{_f(val)}\n")
        else:
            k = mode_params(model, int(target))
            for s in pts:
                for t in pts[pts >= s]:
                    fh.write(f"{_f(s)},{_f(t)},{_f(mode_cov(k, float(s), float(t), cfg))}\n")
    print(f"wrote {out}")
    return EXIT_OK


def cmd_limits(args) -> int:
    doc = _load_config(args.config)
    model = _model_from_config(doc)
    if not model.gamma > 0.5:
        raise ModelInvalid(f"asymptotics require gamma > 1/2, got gamma={model.gamma}")
    opts = doc.get("limits", {})
    kappa = float(opts.get("temporal_kappa", 1.0))
    lags = opts.get("lags")
    if lags is None:
        lags = np.geomspace(1e-2, 4.0, 25)
    out = _out_dir(args)
    stat_path = out / "limits_stationary.csv"
    with open(stat_path, "w") as fh:
        fh.write("j,stationary_var\n")
        for j in range(1, model.J + 1):
            fh.write(f"{j},{_f(stationary_variance(mode_params(model, j)))}\n")
    temp_path = out / "limits_temporal.csv"
    with open(temp_path, "w") as fh:
        fh.write("h,matern_value\n")
        for h in lags:
            fh.write(f"{_f(h)},{_f(temporal_matern_limit(model.gamma, kappa, float(h)))}\n")
    print(f"wrote {stat_path}")
    print(f"wrote {temp_path}")
    return EXIT_OK


def cmd_regularity(args) -> int:
    doc = _load_config(args.config)
    model = _model_from_config(doc)
    try:
        query = analysis.RegularityQuery(n=args.n, tau=args.tau, sigma=args.sigma)
    except ValueError as exc:
        raise ConfigError("query", str(exc)) from None
    report = analysis.check_exponents(model, query)
    print(json.dumps(report.as_dict(), indent=2))
    return EXIT_OK if report.satisfied else EXIT_UNSATISFIED


def _parse_lags(spec: str) -> np.ndarray:
    """Either comma-separated positive floats or a dyadic range '2^-6..2^-12'."""
    spec = spec.strip()
    if ".." in spec:
        lo_s, hi_s = spec.split("..", 1)

        def dyadic(tok):
            tok = tok.strip()
            if not tok.startswith("2^"):
                raise ValueError(f"expected '2^<exp>', got {tok!r}")
            return int(tok[2:])

        e_lo, e_hi = dyadic(lo_s), dyadic(hi_s)
        step = -1 if e_hi < e_lo else 1
        return 2.0 ** np.arange(e_lo, e_hi + step, step, dtype=float)
    vals = np.array([float(tok) for tok in spec.split(",") if tok.strip()])
    if vals.size == 0:
        raise ValueError("empty lag list")
    return vals


def cmd_holder(args) -> int:
    doc = _load_config(args.config)
    model = _model_from_config(doc)
    if not model.gamma > 0.5:
        raise ModelInvalid(f"holder slopes require gamma > 1/2, got gamma={model.gamma}")
    try:
        lags = _parse_lags(args.lags)
    except (ValueError, IndexError) as exc:
        raise ConfigError("--lags", str(exc)) from None
    opts = doc.get("holder", {})
    mode = int(opts.get("mode", 1))
    k = mode_params(model, mode)
    try:
        est = analysis.estimate_holder(k, args.t0, lags)
    except ValueError as exc:
        raise ConfigError("--t0/--lags", str(exc)) from None
    theory = analysis.holder_theory_slope(model.gamma)
    print(f"estimated slope: {_f(est.slope)}")
    print(f"theory 2*min(gamma-1/2, 1): {_f(theory)}")
    print(f"fit residual (rms): {_f(est.residual)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stwm",
        description="Sampling and covariance analysis of spatiotemporal Whittle-Matern fields")
    parser.add_argument("--config", help="path to the JSON run configuration")
    parser.add_argument("--out", help="output directory (default: current directory)")
    parser.add_argument("--seed", type=int, help="master seed (64-bit unsigned)")
    parser.add_argument("--threads", type=int,
                        help="worker threads (fallback: STWM_THREADS env var, then 1)")
    parser.add_argument("--rel-tol", type=float, dest="rel_tol",
                        help="relative quadrature tolerance")
    parser.add_argument("--force", action="store_true",
                        help="sample even when the variance series diverges")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("basis", help="eigenvalue table with growth-law ratios")
    sub.add_parser("sample", help="sample field paths; writes binary field + summary CSV")
    sub.add_parser("cov", help="per-mode or field covariance table")
    sub.add_parser("limits", help="stationary variances and the temporal Matern curve")
    reg = sub.add_parser("regularity", help="exponent-condition report (exit 0 iff satisfied)")
    reg.add_argument("--n", type=int, default=0, help="time derivatives")
    reg.add_argument("--tau", type=float, default=0.0, help="Holder exponent in [0,1)")
    reg.add_argument("--sigma", type=float, default=0.0, help="spatial exponent")
    hold = sub.add_parser("holder", help="mean-square Holder slope from exact increments")
    hold.add_argument("--t0", type=float, default=5.0, help="base time (>= 1)")
    hold.add_argument("--lags", default="2^-6..2^-12",
                      help="comma-separated lags or dyadic range like 2^-6..2^-12")
    return parser


_COMMANDS = {
    "basis": cmd_basis,
    "sample": cmd_sample,
    "cov": cmd_cov,
    "limits": cmd_limits,
    "regularity": cmd_regularity,
    "holder": cmd_holder,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ModelInvalid as exc:
        print(f"model invalid: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except (QuadratureError, CholeskyError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
