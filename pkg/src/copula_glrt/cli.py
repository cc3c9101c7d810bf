"""Command line interface: ``copula-glrt {test,fit,bandwidth,simulate}``.

Exit codes: 0 success, 2 input error, 3 numerical failure, 4 config error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .calibration import (ConvergenceError, Dataset, InsufficientLocalData,
                          estimate_curve, fit_parametric, loo_cv_bandwidth,
                          pseudo_observations)
from .copulas import CopulaDomainError, as_spec
from .glrt import default_bandwidth_grid, run_test
from .simulation import ScenarioSpec, run_scenario

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3
EXIT_CONFIG = 4


class InputError(Exception):
    pass


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    input_path: str | None = None
    output_path: str | None = None
    family: str = "frank"
    link: str | None = None
    null_degree: int = 0
    null_degrees: tuple = (0,)
    kernel: str = "epanechnikov"
    bandwidth: float | None = None
    grid: tuple | None = None
    seed: int | None = None
    alpha: tuple = (0.10, 0.05, 0.01)
    grid_points: int = 50
    model: str | None = None
    n: int | None = None
    reps: int = 200
    threads: int | None = None

    def validate(self):
        if self.command == "simulate":
            if self.input_path is not None:
                raise ConfigError("simulate takes a --model, not an input file")
            for name in ("model", "n", "seed"):
                if getattr(self, name) is None:
                    raise ConfigError(f"simulate requires --{name}")
            if self.seed < 0:
                raise ConfigError("--seed must be a nonnegative integer")
        elif self.input_path is None:
            raise ConfigError(f"{self.command} requires an input CSV")
        if self.bandwidth is not None and not self.bandwidth > 0:
            raise ConfigError("--bandwidth must be positive")
        if self.grid is not None and (not self.grid or min(self.grid) <= 0):
            raise ConfigError("--grid needs positive bandwidths")
        if not all(0 < a < 1 for a in self.alpha):
            raise ConfigError("--alpha levels must lie in (0, 1)")
        if self.grid_points < 1:
            raise ConfigError("--grid-points must be at least 1")
        if self.threads is not None and self.threads < 1:
            raise ConfigError("--threads must be at least 1")
        try:
            spec = as_spec(self.family)
            if self.link is not None and spec.link.value != self.link:
                raise ConfigError(f"{self.family} requires the {spec.link.value} link")
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return self

    def echo(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v)
                for k, v in self.__dict__.items()}


def _floats(text):
    try:
        return tuple(float(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")


def _ints(text):
    try:
        return tuple(int(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of integers: {text!r}")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="copula-glrt",
                     description="Testing the calibration function of a "
                                 "conditional copula.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("--family", default="frank", choices=["frank", "clayton"])
    common.add_argument("--link", choices=["identity", "log"])
    common.add_argument("--kernel", default="epanechnikov",
                        choices=["epanechnikov", "uniform"])
    common.add_argument("--bandwidth", type=float)
    common.add_argument("--grid", type=_floats, help='bandwidths "h1,h2,..."')
    common.add_argument("--seed", type=int)
    common.add_argument("--threads", type=int)
    common.add_argument("--out", dest="output_path")

    for name, help_ in (("test", "run the GLRT on a CSV file"),
                        ("fit", "write the local polynomial calibration curve"),
                        ("bandwidth", "leave-one-out likelihood bandwidth scores")):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("input_path", metavar="INPUT")
        p.add_argument("--null-degree", "--degree", dest="null_degree", type=int,
                       default=0)
        if name == "fit":
            p.add_argument("--grid-points", type=int, default=50)

    p = sub.add_parser("simulate", parents=[common],
                       help="Monte Carlo rejection rates")
    p.add_argument("--model", choices=["m0", "m1", "m2"])
    p.add_argument("--n", type=int)
    p.add_argument("--reps", type=int, default=200)
    p.add_argument("--alpha", type=_floats, default=(0.10, 0.05, 0.01))
    p.add_argument("--null-degree", dest="null_degrees", type=_ints, default=(0,))
    return parser


def read_dataset(path) -> Dataset:
    """Read ``x,u1,u2`` (or ``x,y1,y2``, rank-transformed) CSV input."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    if not rows:
        raise InputError(f"{path}: empty file")
    header = [h.strip().lower() for h in rows[0]]
    if header == ["x", "u1", "u2"]:
        raw = False
    elif header == ["x", "y1", "y2"]:
        raw = True
    else:
        raise InputError(f"{path}: header must be x,u1,u2 or x,y1,y2; got {rows[0]}")
    values = []
    for line, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 3:
            raise InputError(f"{path}: line {line}: expected 3 fields, got {len(row)}")
        try:
            vals = [float(c) for c in row]
        except ValueError:
            raise InputError(f"{path}: line {line}: non-numeric value in {row}") from None
        if not all(math.isfinite(v) for v in vals):
            raise InputError(f"{path}: line {line}: non-finite value")
        if not raw and not all(0.0 < v < 1.0 for v in vals[1:]):
            raise InputError(f"{path}: line {line}: u values must lie strictly in (0, 1)")
        values.append(vals)
    if not values:
        raise InputError(f"{path}: no data rows")
    arr = np.array(values)
    x, a, b = arr.T
    if raw:
        a, b = pseudo_observations(a, b)
    try:
        return Dataset(x, a, b)
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None


def _open_out(path):
    if path is None or path == "-":
        return open(sys.stdout.fileno(), "w", closefd=False, newline="")
    return open(path, "w", newline="", encoding="utf-8")


def _write_csv(path, header, rows):
    with _open_out(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])


def _write_json(path, obj):
    with _open_out(path) as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def _grid(cfg, data):
    return cfg.grid if cfg.grid is not None else default_bandwidth_grid(data.covariate_range)


def cmd_test(cfg: RunConfig) -> int:
    data = read_dataset(cfg.input_path)
    result = run_test(data, cfg.family, cfg.null_degree, cfg.kernel,
                      cfg.bandwidth, None if cfg.grid is None else cfg.grid)
    report = result.to_dict()
    report["config"] = cfg.echo()
    report["version"] = __version__
    _write_json(cfg.output_path, report)
    return EXIT_OK


def cmd_fit(cfg: RunConfig) -> int:
    data = read_dataset(cfg.input_path)
    spec = as_spec(cfg.family)
    start = fit_parametric(data, spec, cfg.null_degree)
    h = cfg.bandwidth
    if h is None:
        h = loo_cv_bandwidth(data, spec, _grid(cfg, data), cfg.null_degree,
                             cfg.kernel, start).chosen
    xs = np.linspace(data.x.min(), data.x.max(), cfg.grid_points)
    fits = estimate_curve(data, spec, xs, h, cfg.null_degree, cfg.kernel, start)
    rows = [(f.x0, f.eta_hat, float(spec.inverse_link(f.eta_hat)), int(f.converged))
            for f in fits]
    _write_csv(cfg.output_path, ["x", "eta_hat", "theta_hat", "converged"], rows)
    return EXIT_OK


def cmd_bandwidth(cfg: RunConfig) -> int:
    data = read_dataset(cfg.input_path)
    sel = loo_cv_bandwidth(data, cfg.family, _grid(cfg, data), cfg.null_degree,
                           cfg.kernel)
    best = sel.chosen_index
    rows = [(float(h), float(s), int(i == best))
            for i, (h, s) in enumerate(zip(sel.grid, sel.cv_scores))]
    _write_csv(cfg.output_path, ["h", "cv_score", "chosen"], rows)
    return EXIT_OK


def sidecar_path(path):
    root, _ = os.path.splitext(path)
    return root + ".records.json"


def cmd_simulate(cfg: RunConfig) -> int:
    spec = ScenarioSpec(cfg.model, cfg.n, cfg.reps, cfg.alpha, cfg.null_degrees,
                        cfg.seed, cfg.kernel, cfg.grid)
    result = run_scenario(spec, threads=cfg.threads)
    _write_csv(cfg.output_path, ["model", "n", "null_degree", "alpha", "rate"],
               list(result.rows()))
    if cfg.output_path not in (None, "-"):
        _write_json(sidecar_path(cfg.output_path), {
            "config": cfg.echo(),
            "version": __version__,
            "failures": result.failures,
            "records": [r.to_dict() for r in result.records],
        })
    if result.failures:
        print(f"warning: {result.failures} replicate fits failed", file=sys.stderr)
    return EXIT_OK


COMMANDS = {"test": cmd_test, "fit": cmd_fit, "bandwidth": cmd_bandwidth,
            "simulate": cmd_simulate}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    values = vars(args)
    try:
        cfg = RunConfig(**values).validate()
        return COMMANDS[cfg.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InputError, CopulaDomainError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ConvergenceError, InsufficientLocalData, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
