"""Command-line front end.

Exit codes: 0 success, 2 I/O or parse error, 3 invalid configuration,
4 numeric or data failure. Errors are printed to standard output as a JSON
object ``{"error": true, "kind": ..., "message": ...}``.
"""

import argparse
import json
import math
import os
import re
import sys

import numpy as np

from . import harness
from .errors import ConfigError, NumericError, ParameterError, RobustMeanError
from .multivariate import estimate_multivariate
from .score import HUBER, smoothed_huber
from .univariate import EstimatorConfig, estimate_block_huber, parse_delta_rule

OUTPUT_DIR_ENV = "ROBUSTMEAN_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "robustmean-out"

EXIT_OK, EXIT_IO, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3, 4

_NUMBER = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")
_NONFINITE = re.compile(r"^[+-]?(nan|inf|infinity)$", re.IGNORECASE)


class CliError(Exception):
    def __init__(self, kind, message, code, **extra):
        super().__init__(message)
        self.kind, self.code, self.extra = kind, code, extra


def read_numeric_csv(path, columns=None):
    """Headerless, comma-separated numeric table; returns an ``(N, d)`` array.

    Raises :class:`CliError` with kind ``io`` (missing file), ``parse``
    (malformed line, with its 1-based number) or ``data`` (non-finite entry).
    """
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise CliError("io", f"cannot read {path}: {exc.strerror or exc}", EXIT_IO, path=str(path))
    rows = []
    width = columns
    for i, line in enumerate(lines, start=1):
        fields = [f.strip() for f in line.split(",")]
        if line.strip() == "":
            if all(not ln.strip() for ln in lines[i:]):
                break
            raise CliError("parse", f"empty line {i}", EXIT_IO, line=i)
        row = []
        for f in fields:
            if _NONFINITE.match(f):
                raise CliError("data", f"non-finite entry {f!r} on line {i}", EXIT_NUMERIC, line=i)
            if not _NUMBER.match(f):
                raise CliError("parse", f"cannot parse {f!r} on line {i}", EXIT_IO, line=i)
            row.append(float(f))
        if width is None:
            width = len(row)
        if len(row) != width:
            raise CliError("parse", f"line {i} has {len(row)} columns, expected {width}", EXIT_IO, line=i)
        rows.append(row)
    if not rows:
        raise CliError("parse", f"{path} contains no data", EXIT_IO, line=0)
    x = np.array(rows, dtype=float)
    if not np.all(np.isfinite(x)):
        bad = int(np.flatnonzero(~np.all(np.isfinite(x), axis=1))[0]) + 1
        raise CliError("data", f"entry overflows to a non-finite value on line {bad}", EXIT_NUMERIC, line=bad)
    return x


def parse_delta(text):
    """``auto:<regime>[:s]``, ``inf`` or a positive number."""
    if text.startswith("auto:"):
        try:
            parse_delta_rule(text)
        except ParameterError as exc:
            raise CliError("config", str(exc), EXIT_CONFIG, keys=["delta"])
        return text
    if text.lower() in ("inf", "infinity"):
        return math.inf
    try:
        v = float(text)
    except ValueError:
        raise CliError("config", f"delta must be a number, 'inf' or 'auto:<regime>', got {text!r}", EXIT_CONFIG, keys=["delta"])
    if not v > 0:
        raise CliError("config", f"delta must be positive, got {text!r}", EXIT_CONFIG, keys=["delta"])
    return v


def _estimator_config(args, N):
    score = HUBER if args.score == "huber" else smoothed_huber(args.psi_max)
    k = args.k if args.k is not None else max(1, math.isqrt(N))
    if k > N:
        raise CliError("config", f"k={k} exceeds the sample size {N}", EXIT_CONFIG, keys=["k"])
    try:
        return EstimatorConfig(
            k=k,
            delta=parse_delta(args.delta),
            n=args.n,
            score=score,
            root_tol=args.root_tol,
            max_iter=args.max_iter,
            seed=args.seed,
        )
    except ParameterError as exc:
        raise CliError("config", str(exc), EXIT_CONFIG)


def _dump(obj):
    return json.dumps(harness._json_safe(obj), indent=2, sort_keys=True)


def cmd_estimate(args):
    x = read_numeric_csv(args.input, columns=1)[:, 0]
    cfg = _estimator_config(args, x.size)
    res = estimate_block_huber(x, cfg)
    out = res.to_dict()
    out["input"] = str(args.input)
    out["N"] = int(x.size)
    print(_dump(out))
    return EXIT_OK


def cmd_estimate_mv(args):
    x = read_numeric_csv(args.input)
    cfg = _estimator_config(args, x.shape[0])
    sol = estimate_multivariate(
        x, cfg, m_directions=args.m_directions, tol=args.tol, method=args.method, direction_seed=args.direction_seed
    )
    out = sol.to_dict()
    out.update(
        {
            "input": str(args.input),
            "N": int(x.shape[0]),
            "d": int(x.shape[1]),
            "config": cfg.to_dict(),
            "m_directions": args.m_directions,
            "tol": args.tol,
            "method": args.method,
            "direction_seed": args.direction_seed,
        }
    )
    print(_dump(out))
    return EXIT_OK


def _load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise CliError("io", f"cannot read {path}: {exc.strerror or exc}", EXIT_IO, path=str(path))
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError("parse", f"invalid JSON in {path}: {exc.msg}", EXIT_IO, line=exc.lineno)


def _study(kind):
    def run(args):
        cfg = _load_config(args.config)
        if not isinstance(cfg, dict):
            raise CliError("config", "study config must be a JSON object", EXIT_CONFIG, keys=[])
        if cfg.get("study", kind) != kind:
            raise CliError("config", f"config is for study {cfg['study']!r}, not {kind!r}", EXIT_CONFIG, keys=["study"])
        if args.seed is not None:
            cfg["seed"] = args.seed
        out_dir = args.out or os.environ.get(OUTPUT_DIR_ENV) or DEFAULT_OUTPUT_DIR
        try:
            _, csv_path, json_path = harness.run_study(cfg, out_dir, study=kind, timing=args.timing)
        except OSError as exc:
            raise CliError("io", f"cannot write to {out_dir}: {exc.strerror or exc}", EXIT_IO)
        print(_dump({"study": kind, "csv": str(csv_path), "summary": str(json_path)}))
        return EXIT_OK

    return run


def cmd_validate(args):
    cfg = _load_config(args.config)
    if isinstance(cfg, dict) and args.study is None and "study" not in cfg:
        unknown = sorted(set(cfg) - set(EstimatorConfig.__dataclass_fields__))
        if unknown:
            raise CliError("config", f"unknown estimator keys: {unknown}", EXIT_CONFIG, keys=unknown)
        try:
            resolved = EstimatorConfig.from_dict(cfg).to_dict()
        except (ParameterError, TypeError) as exc:
            raise CliError("config", str(exc), EXIT_CONFIG)
        print(_dump({"valid": True, "kind": "estimator", "resolved": resolved}))
        return EXIT_OK
    resolved = harness.validate_study_config(cfg, args.study)
    print(_dump({"valid": True, "kind": resolved["study"], "resolved": resolved}))
    return EXIT_OK


def _add_estimator_args(p):
    p.add_argument("input", help="headerless comma-separated numeric file")
    p.add_argument("--k", type=int, default=None, help="number of blocks (default floor(sqrt(N)))")
    p.add_argument("--delta", default="auto:mom_like", help="number, 'inf' or auto:<mom_like|catoni_like|confidence:s>")
    p.add_argument("--n", type=int, default=None, help="block size (default N // k)")
    p.add_argument("--score", choices=("huber", "smoothed_huber"), default="huber")
    p.add_argument("--psi-max", type=float, default=1.0, help="plateau of smoothed_huber (1 reproduces huber)")
    p.add_argument("--root-tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)


def build_parser():
    parser = argparse.ArgumentParser(prog="robustmean", description="Robust mean estimation and Monte Carlo studies.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="scalar estimate from a one-column file")
    _add_estimator_args(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("estimate-mv", help="multivariate slab estimate from a d-column file")
    _add_estimator_args(p)
    p.add_argument("--m-directions", type=int, default=None, help="random directions (default 32*d)")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--method", choices=("lp", "subgradient"), default="lp")
    p.add_argument("--direction-seed", type=int, default=None)
    p.set_defaults(func=cmd_estimate_mv)

    for kind in ("deviation", "regimes", "contamination", "ustat"):
        p = sub.add_parser(f"study-{kind}", help=f"run a {kind} study from a JSON config")
        p.add_argument("--config", required=True)
        p.add_argument("--out", default=None, help=f"output directory (default ${OUTPUT_DIR_ENV} or {DEFAULT_OUTPUT_DIR})")
        p.add_argument("--seed", type=int, default=None, help="override the config's master seed")
        p.add_argument("--timing", action="store_true", help="fill runtime_ms (output is then not byte-stable)")
        p.set_defaults(func=_study(kind))

    p = sub.add_parser("validate", help="check an estimator or study config")
    p.add_argument("--config", required=True)
    p.add_argument("--study", choices=sorted(harness.STUDY_KEYS), default=None)
    p.set_defaults(func=cmd_validate)
    return parser


def _emit_error(kind, message, **extra):
    print(json.dumps({"error": True, "kind": kind, "message": message, **extra}, sort_keys=True))


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        _emit_error(exc.kind, str(exc), **exc.extra)
        return exc.code
    except ConfigError as exc:
        _emit_error("config", str(exc), keys=exc.keys)
        return EXIT_CONFIG
    except ParameterError as exc:
        _emit_error("config", str(exc))
        return EXIT_CONFIG
    except (NumericError, ArithmeticError) as exc:
        _emit_error("numeric", str(exc))
        return EXIT_NUMERIC
    except RobustMeanError as exc:
        _emit_error("data", str(exc))
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
