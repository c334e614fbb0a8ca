"""Command-line entry point.

Subcommands: recurrence | kernel | verify | lmax | sample.  Options can
come from flags or a TOML file (--config); flags win.  Exit codes: 0 on
success, 1 on numerical failure, 2 on configuration errors.

Set EXTKERNEL_MAX_THREADS to cap the BLAS thread count; it must be set
before heavy imports, so it is honored at module import time.
"""

from __future__ import annotations

import os

if "EXTKERNEL_MAX_THREADS" in os.environ:
    _cap = os.environ["EXTKERNEL_MAX_THREADS"]
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _cap)

import argparse
import csv
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

import numpy as np

from .fredholm import FredholmConfig, lmax_cdf_detail
from .orthopoly import build_recurrence
from .quadrature import WeightSpec
from .sampling import sample_spectra
from .source_kernel import SourceSpec, build_model, kernel_grid
from .orthopoly import cd_kernel_k0_sum
from .verify import run_checks

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_CONFIG = 2

FLOAT_FMT = "{:.17g}"


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    potential: tuple[float, ...] = (0.0, 0.0, 1.0)
    n: int = 4
    source: tuple[float, ...] = (1.0,)
    grid: tuple[float, float, int] = (-3.0, 3.0, 25)
    s_grid: tuple[float, float, int] = (0.0, 4.0, 9)
    quad_size: int | None = None
    count: int = 1000
    seed: int = 12345
    out: str | None = None
    oracle: bool = False

    def weight(self) -> WeightSpec:
        try:
            return WeightSpec(self.potential)
        except ValueError as exc:
            raise ConfigError(f"potential: {exc}") from exc

    def source_spec(self) -> SourceSpec:
        a = tuple(sorted(self.source, reverse=True))
        if len(set(self.source)) != len(self.source):
            raise ConfigError("source eigenvalues must be distinct")
        try:
            return SourceSpec(n=self.n, r=len(a), a=a)
        except ValueError as exc:
            raise ConfigError(f"source: {exc}") from exc


def _parse_floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in text.split(",") if tok.strip() != "")
    except ValueError as exc:
        raise ConfigError(f"could not parse float list {text!r}") from exc


def _parse_grid(text: str) -> tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"grid spec must be lo:hi:count, got {text!r}")
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"could not parse grid spec {text!r}") from exc
    if count < 1:
        raise ConfigError("grid count must be >= 1")
    if count > 1 and not lo < hi:
        raise ConfigError(f"grid bounds must satisfy lo < hi, got {text!r}")
    return lo, hi, count


def _grid_points(spec: tuple[float, float, int]) -> np.ndarray:
    lo, hi, count = spec
    if count == 1:
        return np.array([lo])
    return np.linspace(lo, hi, count)


def parse_config(argv: list[str]) -> tuple[str, RunConfig]:
    parser = argparse.ArgumentParser(
        prog="extkernel",
        description="External-source ensemble kernels, spectra and statistics",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML file with defaults for all flags")
    common.add_argument("--potential", help="comma list of V coefficients v0,v1,...")
    common.add_argument("--n", type=int, help="matrix dimension")
    common.add_argument("--source", help="comma list of nonzero source eigenvalues")
    common.add_argument("--quad-size", type=int, help="override quadrature size")
    common.add_argument("--out", help="output CSV path")
    sub.add_parser("recurrence", parents=[common])
    p_kernel = sub.add_parser("kernel", parents=[common])
    p_kernel.add_argument("--grid", help="kernel grid lo:hi:count (both axes)")
    p_verify = sub.add_parser("verify", parents=[common])
    p_verify.add_argument("--oracle", action="store_true",
                          help="also compare against the Gram-matrix oracle")
    p_lmax = sub.add_parser("lmax", parents=[common])
    p_lmax.add_argument("--s-grid", help="CDF evaluation grid lo:hi:count")
    p_sample = sub.add_parser("sample", parents=[common])
    p_sample.add_argument("--count", type=int, help="number of sampled spectra")
    p_sample.add_argument("--seed", type=int, help="batch seed")

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code not in (0, None):
            raise ConfigError("invalid command line") from exc
        raise

    cfg = RunConfig()
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            data = tomllib.loads(path.read_text())
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"unreadable config file: {exc}") from exc
        _apply_toml(cfg, data)

    if getattr(args, "potential", None):
        cfg.potential = _parse_floats(args.potential)
    if getattr(args, "n", None) is not None:
        cfg.n = args.n
    if getattr(args, "source", None):
        cfg.source = _parse_floats(args.source)
    if getattr(args, "quad_size", None) is not None:
        cfg.quad_size = args.quad_size
    if getattr(args, "out", None):
        cfg.out = args.out
    if getattr(args, "grid", None):
        cfg.grid = _parse_grid(args.grid)
    if getattr(args, "s_grid", None):
        cfg.s_grid = _parse_grid(args.s_grid)
    if getattr(args, "count", None) is not None:
        cfg.count = args.count
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "oracle", False):
        cfg.oracle = True
    return args.command, cfg


def _apply_toml(cfg: RunConfig, data: dict) -> None:
    simple = {"n": int, "quad_size": int, "count": int, "seed": int,
              "out": str, "oracle": bool}
    for key, value in data.items():
        if key == "potential":
            cfg.potential = tuple(float(v) for v in value)
        elif key == "source":
            cfg.source = tuple(float(v) for v in value)
        elif key in ("grid", "s_grid"):
            if isinstance(value, str):
                setattr(cfg, key, _parse_grid(value))
            else:
                setattr(cfg, key, (float(value[0]), float(value[1]), int(value[2])))
        elif key in simple:
            setattr(cfg, key, simple[key](value))
        else:
            raise ConfigError(f"unknown config key {key!r}")


def _write_csv(path: str, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([FLOAT_FMT.format(v) if isinstance(v, float) else v
                             for v in row])


def _write_summary(out: str | None, command: str, cfg: RunConfig,
                   extra: dict, elapsed: float) -> None:
    if out is None:
        return
    summary = {
        "command": command,
        "config": {
            "potential": list(cfg.potential),
            "n": cfg.n,
            "source": list(cfg.source),
            "seed": cfg.seed,
        },
        "elapsed_seconds": elapsed,
    }
    summary.update(extra)
    Path(out).with_suffix(".run.json").write_text(json.dumps(summary, indent=2) + "\n")


def _build_model(cfg: RunConfig):
    weight = cfg.weight()
    rule = None
    if cfg.quad_size is not None:
        from .quadrature import hermite_tilted_rule

        rule = hermite_tilted_rule(weight, cfg.quad_size)
    return build_model(cfg.source_spec(), weight, rule=rule)


def _run_recurrence(cfg: RunConfig) -> tuple[int, dict]:
    weight = cfg.weight()
    table = build_recurrence(weight, cfg.n)
    rows = []
    for k in range(cfg.n + 1):
        alpha = float(table.alpha[k]) if k < cfg.n else ""
        rows.append([k, alpha, float(table.beta[k]), float(table.h[k]),
                     float(table.kappa[k])])
    if cfg.out:
        _write_csv(cfg.out, ["k", "alpha", "beta", "h", "kappa"], rows)
    else:
        print("k,alpha,beta,h,kappa")
        for row in rows:
            print(",".join(FLOAT_FMT.format(v) if isinstance(v, float) else str(v)
                           for v in row))
    return EXIT_OK, {"table_size": table.size}


def _run_kernel(cfg: RunConfig) -> tuple[int, dict]:
    weight = cfg.weight()
    model = _build_model(cfg)
    pts = _grid_points(cfg.grid)
    K = kernel_grid(model, pts, pts)
    K0 = cd_kernel_k0_sum(model.table, weight, model.spec.n, pts, pts)
    rows = []
    for i, x in enumerate(pts):
        for j, y in enumerate(pts):
            rows.append([float(x), float(y), float(K0[i, j]), float(K[i, j]),
                         float(K[i, j] - K0[i, j])])
    if cfg.out:
        _write_csv(cfg.out, ["x", "y", "K0", "K", "K_minus_K0"], rows)
    else:
        print("x,y,K0,K,K_minus_K0")
        for row in rows:
            print(",".join(FLOAT_FMT.format(v) for v in row))
    return EXIT_OK, {"quadrature_size": model.rule.size, "cond_B": model.B_cond}


def _run_verify(cfg: RunConfig) -> tuple[int, dict]:
    model = _build_model(cfg)
    results = run_checks(model, with_oracle=cfg.oracle)
    width = max(len(res.name) for res in results)
    all_pass = True
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        all_pass &= res.passed
        print(f"{res.name:<{width}}  residual {res.residual:.3e}  "
              f"tol {res.tolerance:.1e}  {status}")
    return (EXIT_OK if all_pass else EXIT_NUMERICAL), {
        "checks": {res.name: res.passed for res in results},
        "cond_B": model.B_cond,
    }


def _run_lmax(cfg: RunConfig) -> tuple[int, dict]:
    model = _build_model(cfg)
    rows = []
    fcfg = FredholmConfig()
    for s in _grid_points(cfg.s_grid):
        res = lmax_cdf_detail(model, float(s), fcfg)
        rows.append([float(s), res.cdf, res.m, res.T])
    if cfg.out:
        _write_csv(cfg.out, ["s", "cdf", "nystrom_m", "truncation_T"], rows)
    else:
        print("s,cdf,nystrom_m,truncation_T")
        for row in rows:
            print(",".join(FLOAT_FMT.format(v) if isinstance(v, float) else str(v)
                           for v in row))
    return EXIT_OK, {"quadrature_size": model.rule.size, "cond_B": model.B_cond}


def _run_sample(cfg: RunConfig) -> tuple[int, dict]:
    weight = cfg.weight()
    if not weight.is_gaussian:
        raise ConfigError("sample requires the Gaussian potential 0,0,1")
    batch = sample_spectra(cfg.source_spec(), cfg.count, cfg.seed, weight)
    header = [f"lambda_{i + 1}" for i in range(batch.n)]
    rows = [[float(v) for v in row] for row in batch.eigenvalues]
    if cfg.out:
        _write_csv(cfg.out, header, rows)
    else:
        print(",".join(header))
        for row in rows:
            print(",".join(FLOAT_FMT.format(v) for v in row))
    return EXIT_OK, {"count": batch.count, "seed": batch.seed}


_RUNNERS = {
    "recurrence": _run_recurrence,
    "kernel": _run_kernel,
    "verify": _run_verify,
    "lmax": _run_lmax,
    "sample": _run_sample,
}


def run(command: str, cfg: RunConfig) -> int:
    start = time.perf_counter()
    try:
        code, extra = _RUNNERS[command](cfg)
    except ConfigError:
        raise
    except (RuntimeError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    _write_summary(cfg.out, command, cfg, extra, time.perf_counter() - start)
    return code


def main(argv: list[str] | None = None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    try:
        command, cfg = parse_config(argv)
        return run(command, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
