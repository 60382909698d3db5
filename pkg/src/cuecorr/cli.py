"""Command-line entry point.

    cuecorr cumulant --n-size 10 --k 3,-3
    cuecorr mean --n-size 64 --fn gaussian:sigma=1 --arity 1
    cuecorr clt-experiment --config run.json --out report.json

Configs and reports are JSON; ``clt-experiment`` also writes the per-sample
values as CSV.  Errors go to stderr as one JSON object and set the exit
status: 2 for configuration errors, 3 for capacity errors, 4 for tolerance
errors.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import platform
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .asymptotics import mean_asymptotic, variance_asymptotic, variance_closed_form_pairs
from .cumulants import kappa_exact
from .errors import ConfigError, CueCorrError
from .sampler import ExperimentConfig, brute_force_joint_moment, monte_carlo_clt_experiment
from .statistic import mean_exact, variance_exact
from .testfunctions import parse_function_spec

SUBCOMMANDS = ("cumulant", "mean", "variance", "asymptotic-mean", "asymptotic-variance",
               "clt-experiment", "oracle-moment")
NEEDS_K = {"cumulant", "oracle-moment"}
NEEDS_N = {"cumulant", "mean", "variance", "clt-experiment", "oracle-moment"}


@dataclass
class RunConfig:
    subcommand: str
    N: int | list | None = None
    k: list | None = None
    fn: str = "gaussian:sigma=1.0"
    arity: int = 1
    samples: int = 1000
    seed: int = 0
    out: str | None = None
    csv: str | None = None
    tolerance: float | None = None
    form: str = "partitions"
    threads: int | None = None

    def to_dict(self):
        return dataclasses.asdict(self)

    def sizes(self):
        return list(self.N) if isinstance(self.N, list) else [self.N]


_FIELDS = {f.name for f in dataclasses.fields(RunConfig)}


def _positive_int(value, path, minimum=1):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}: expected an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(f"{path}: must be >= {minimum}, got {value}")
    return value


def validate(cfg: RunConfig) -> RunConfig:
    if cfg.subcommand not in SUBCOMMANDS:
        raise ConfigError(f"subcommand: unknown {cfg.subcommand!r}; choose from {list(SUBCOMMANDS)}")
    if cfg.N is not None:
        if isinstance(cfg.N, list):
            if not cfg.N:
                raise ConfigError("N: empty list")
            for i, n in enumerate(cfg.N):
                _positive_int(n, f"N[{i}]")
        else:
            _positive_int(cfg.N, "N")
    elif cfg.subcommand in NEEDS_N:
        raise ConfigError(f"N: required for {cfg.subcommand}")
    if cfg.subcommand in NEEDS_K:
        if cfg.k is None or not isinstance(cfg.k, list) or not cfg.k:
            raise ConfigError(f"k: a non-empty list of integers is required for {cfg.subcommand}")
        for i, x in enumerate(cfg.k):
            if isinstance(x, bool) or not isinstance(x, int):
                raise ConfigError(f"k[{i}]: expected an integer, got {x!r}")
        if isinstance(cfg.N, list):
            raise ConfigError(f"N: {cfg.subcommand} takes a single size")
    _positive_int(cfg.arity, "arity")
    if cfg.arity > 3:
        raise ConfigError(f"arity: must be <= 3, got {cfg.arity}")
    _positive_int(cfg.samples, "samples", 2)
    _positive_int(cfg.seed, "seed", 0)
    if cfg.threads is not None:
        _positive_int(cfg.threads, "threads")
    if cfg.tolerance is not None:
        if isinstance(cfg.tolerance, bool) or not isinstance(cfg.tolerance, (int, float)) or cfg.tolerance <= 0:
            raise ConfigError(f"tolerance: must be a positive number, got {cfg.tolerance!r}")
        cfg.tolerance = float(cfg.tolerance)
    if cfg.form not in ("partitions", "compositions"):
        raise ConfigError(f"form: must be 'partitions' or 'compositions', got {cfg.form!r}")
    for key in ("fn", "out", "csv"):
        v = getattr(cfg, key)
        if v is not None and not isinstance(v, str):
            raise ConfigError(f"{key}: expected a string, got {v!r}")
    parse_function_spec(cfg.fn, cfg.arity)
    return cfg


def config_from_dict(data) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config: top level must be an object")
    unknown = sorted(set(data) - _FIELDS)
    if unknown:
        raise ConfigError(f"config: unknown key(s) {', '.join(map(repr, unknown))}")
    if "subcommand" not in data:
        raise ConfigError("subcommand: missing")
    return validate(RunConfig(**data))


def parse_config(text: str) -> RunConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return config_from_dict(data)


def emit_config(cfg: RunConfig) -> str:
    return json.dumps(cfg.to_dict(), sort_keys=True)


def versions():
    return {"cuecorr": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

def _execute(cfg: RunConfig):
    """Returns ``(result dict, lines for stdout, per-sample values or None)``."""
    sub = cfg.subcommand
    if sub == "cumulant":
        v = kappa_exact(cfg.N, cfg.k)
        return {"value": v}, [str(v)], None
    if sub == "oracle-moment":
        v = brute_force_joint_moment(cfg.N, cfg.k)
        return {"real": v.real, "imag": v.imag}, [repr(v.real)], None
    f = parse_function_spec(cfg.fn, cfg.arity)
    if sub in ("mean", "variance"):
        op = mean_exact if sub == "mean" else variance_exact
        vals = [op(N, f) for N in cfg.sizes()]
        result = {"values": [{"N": N, "value": v} for N, v in zip(cfg.sizes(), vals)]}
        return result, [repr(v) for v in vals], None
    if sub == "asymptotic-mean":
        res = mean_asymptotic(f, form=cfg.form, tol=cfg.tolerance, return_details=True)
        return res.as_dict(), [repr(res.value)], None
    if sub == "asymptotic-variance":
        res = variance_asymptotic(f, tol=cfg.tolerance, return_details=True)
        out = res.as_dict()
        if f.arity == 1:
            out["closed_form_pairs"] = variance_closed_form_pairs(f)
        return out, [repr(res.value)], None
    if sub == "clt-experiment":
        sizes = cfg.sizes()
        if len(sizes) != 1:
            raise ConfigError("N: clt-experiment takes a single size")
        rep = monte_carlo_clt_experiment(ExperimentConfig(sizes[0], cfg.samples, cfg.seed, cfg.threads), f)
        d = rep.as_dict()
        return d, [json.dumps(d, sort_keys=True)], rep.values
    raise ConfigError(f"subcommand: unknown {sub!r}")  # pragma: no cover


def run(cfg: RunConfig, stdout=None) -> dict:
    """Execute ``cfg``, print the headline result and write the requested files."""
    stdout = sys.stdout if stdout is None else stdout
    validate(cfg)
    t0 = time.perf_counter()
    result, lines, values = _execute(cfg)
    elapsed = time.perf_counter() - t0
    report = {"config": cfg.to_dict(), "result": result, "versions": versions(),
              "seed": cfg.seed, "timings": {"total_seconds": elapsed}}
    for line in lines:
        print(line, file=stdout)
    if cfg.out:
        Path(cfg.out).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    csv_path = cfg.csv or (str(Path(cfg.out).with_suffix(".csv")) if cfg.out and values is not None else None)
    if values is not None and csv_path:
        with open(csv_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["sample", "value"])
            for i, v in enumerate(values):
                w.writerow([i, repr(float(v))])
    return report


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser():
    p = argparse.ArgumentParser(prog="cuecorr", description="Moments of smoothed local correlations of CUE eigenangles.")
    p.add_argument("--version", action="version", version=f"cuecorr {__version__}")
    sub = p.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="JSON config; explicit flags override its keys")
        s.add_argument("--n-size", dest="N", type=_int_list, help="matrix size, or a comma-separated list")
        s.add_argument("--k", type=_int_list, help="comma-separated trace powers, e.g. 3,-3")
        s.add_argument("--fn", help="test function, e.g. gaussian:sigma=1.0 or triangle:a=0.5")
        s.add_argument("--arity", type=int)
        s.add_argument("--samples", type=int)
        s.add_argument("--seed", type=int)
        s.add_argument("--out", help="write a JSON report here")
        s.add_argument("--csv", help="per-sample CSV (clt-experiment)")
        s.add_argument("--tolerance", type=float)
        s.add_argument("--form", choices=("partitions", "compositions"))
        s.add_argument("--threads", type=int)
    return p


def config_from_args(ns) -> RunConfig:
    data = {}
    if ns.config:
        try:
            text = Path(ns.config).read_text()
        except OSError as exc:
            raise ConfigError(f"config: cannot read {ns.config}: {exc.strerror}") from None
        data = json.loads(text) if text.strip() else {}
        cfg = parse_config(text)
        if cfg.subcommand != ns.subcommand:
            raise ConfigError(f"subcommand: config says {cfg.subcommand!r} but {ns.subcommand!r} was requested")
    data["subcommand"] = ns.subcommand
    for key in _FIELDS - {"subcommand"}:
        v = getattr(ns, key, None)
        if v is not None:
            data[key] = v
    if isinstance(data.get("N"), list) and len(data["N"]) == 1:
        data["N"] = data["N"][0]
    return config_from_dict(data)


def _fail(exc, code):
    print(json.dumps({"error": type(exc).__name__, "exit_code": code, "message": str(exc),
                      **({"diagnostics": exc.diagnostics} if getattr(exc, "diagnostics", None) else {})},
                     default=str), file=sys.stderr)
    return code


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        run(config_from_args(ns))
    except CueCorrError as exc:
        return _fail(exc, exc.exit_code)
    except ValueError as exc:
        return _fail(ConfigError(str(exc)), ConfigError.exit_code)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
