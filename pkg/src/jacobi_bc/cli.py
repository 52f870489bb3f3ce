"""Command-line interface for scripted experiments.

Every command is a thin composition of library calls with file-based
JSON/CSV I/O; no numerical logic lives here.  Outputs are deterministic:
identical configurations produce byte-identical files.

Exit codes: 0 success, 2 validation failure (malformed input, data that
fails a positivity characterization), 1 internal error.  Failures write
a machine-readable JSON object to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass

from .core import (
    SCHEMA_TAG,
    JacobiBCError,
    JacobiCoefficients,
    PrecisionMode,
)
from . import connecting as connecting_mod
from . import debranges
from . import determinacy
from . import dynamics
from . import inverse
from . import moments as moments_mod

__all__ = ["RunConfig", "run", "main"]

COMMANDS = ("simulate", "response", "connect", "recover", "diagnose",
            "kernel", "hb", "moments")


class CliInputError(Exception):
    """Malformed or inconsistent command input (exit code 2)."""


@dataclass(frozen=True)
class RunConfig:
    """One CLI invocation: exactly one command plus its I/O settings."""

    command: str
    inputs: tuple
    output: str | None
    horizon: int | None
    n_max: int | None
    precision: PrecisionMode
    fmt: str
    threads: int


def _fmt_float(x: float) -> str:
    return f"{float(x):.17g}"


def _load_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise CliInputError(f"cannot read input file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CliInputError(f"malformed JSON in {path}: {exc}") from exc


def _coefficients(obj: dict, path: str) -> JacobiCoefficients:
    if not isinstance(obj, dict) or ("a" not in obj and not obj.get("generator")):
        raise CliInputError(
            f"{path}: expected a coefficient file with keys a/b/generator")
    try:
        return JacobiCoefficients.from_json_dict(obj)
    except (ValueError, KeyError, TypeError) as exc:
        raise CliInputError(f"{path}: {exc}") from exc


def _number_list(obj, key: str, path: str) -> list:
    vals = obj.get(key)
    if not isinstance(vals, list) or not vals or \
            not all(isinstance(v, (int, float)) for v in vals):
        raise CliInputError(f"{path}: {key!r} must be a non-empty number list")
    return vals


def _require_horizon(config: RunConfig) -> int:
    if config.horizon is None:
        raise CliInputError(f"command {config.command!r} requires --T")
    return config.horizon


def _primary_input(config: RunConfig) -> dict:
    if not config.inputs:
        raise CliInputError(f"command {config.command!r} requires --input")
    return _load_json(config.inputs[0])


def _complex_from(pair, path: str) -> complex:
    if isinstance(pair, (int, float)):
        return complex(pair)
    if isinstance(pair, list) and len(pair) == 2 and \
            all(isinstance(v, (int, float)) for v in pair):
        return complex(pair[0], pair[1])
    raise CliInputError(f"{path}: points must be numbers or [re, im] pairs")


# -- command handlers ----------------------------------------------------


def _cmd_simulate(config: RunConfig):
    obj = _primary_input(config)
    coeffs = _coefficients(obj, config.inputs[0])
    horizon = _require_horizon(config)
    if len(config.inputs) > 1:
        ctrl_obj = _load_json(config.inputs[1])
        control = _number_list(ctrl_obj, "control", config.inputs[1])
    else:
        control = [1] + [0] * (horizon - 1)
    if coeffs.is_finite:
        field = dynamics.solve_finite(coeffs, coeffs.size, control, horizon,
                                      config.precision)
        system = "finite"
    else:
        field = dynamics.solve_semi_infinite(coeffs, control, horizon,
                                             config.precision)
        system = "semi-infinite"
    payload = {"system": system, **field.to_json_dict()}
    return payload, field.to_csv()


def _cmd_response(config: RunConfig):
    obj = _primary_input(config)
    coeffs = _coefficients(obj, config.inputs[0])
    horizon = _require_horizon(config)
    r = dynamics.response_vector(coeffs, horizon, config.precision)
    values = [float(v) for v in r]
    payload = {"length": horizon, "response": values}
    rows = [["t", "r_t"]] + [[str(i), _fmt_float(v)] for i, v in enumerate(values)]
    return payload, _csv_text(rows)


def _connect_from_input(config: RunConfig):
    obj = _primary_input(config)
    path = config.inputs[0]
    if "response" in obj:
        r = _number_list(obj, "response", path)
        size = config.horizon or (len(r) + 1) // 2
        return connecting_mod.connecting_from_response(r, size)
    if "moments" in obj:
        s = _number_list(obj, "moments", path)
        size = config.horizon or (len(s) + 1) // 2
        hank = moments_mod.build_hankel(s, size)
        return connecting_mod.connecting_from_hankel(hank, size)
    coeffs = _coefficients(obj, path)
    size = _require_horizon(config)
    return connecting_mod.gram_from_control(coeffs, size, config.precision)


def _cmd_connect(config: RunConfig):
    conn = _connect_from_input(config)
    mat = [[float(v) for v in row] for row in conn.matrix]
    payload = {"size": conn.size, "orientation": conn.orientation.value,
               "matrix": mat}
    rows = [["orientation", conn.orientation.value]]
    rows += [[_fmt_float(v) for v in row] for row in mat]
    return payload, _csv_text(rows)


def _cmd_recover(config: RunConfig):
    obj = _primary_input(config)
    path = config.inputs[0]
    if "response" in obj:
        r = _number_list(obj, "response", path)
        horizon = config.horizon or (len(r) + 1) // 2
        result = inverse.recover_from_response(r, horizon, config.precision)
    elif "moments" in obj:
        s = _number_list(obj, "moments", path)
        horizon = config.horizon or (len(s) + 1) // 2
        result = inverse.recover_from_moments(s, horizon, config.precision)
    else:
        raise CliInputError(f"{path}: expected a 'response' or 'moments' key")
    payload = {
        "a": [float(v) for v in result.a],
        "b": [float(v) for v in result.b],
        "residual": result.residual,
        "path": result.path,
        "precision": result.precision.value,
    }
    rows = [["k", "a_k", "b_k"]]
    for i in range(len(result.b)):
        rows.append([str(i + 1), _fmt_float(result.a[i]), _fmt_float(result.b[i])])
    return payload, _csv_text(rows)


def _cmd_diagnose(config: RunConfig):
    obj = _primary_input(config)
    coeffs = _coefficients(obj, config.inputs[0])
    if config.n_max is None:
        raise CliInputError("command 'diagnose' requires --N-max")
    report = determinacy.classify(coeffs, config.n_max, config.precision)
    return report.to_json_dict(), _csv_text(list(report.csv_rows()))


def _default_kernel_points():
    zs = [complex(re, im) for re in (-2.0, 0.0, 2.0) for im in (0.5, 1.5)]
    lams = [-2.0, -1.0, 0.0, 1.0, 2.0]
    return [(z, complex(lam)) for z in zs for lam in lams]


def _cmd_kernel(config: RunConfig):
    obj = _primary_input(config)
    coeffs = _coefficients(obj, config.inputs[0])
    horizon = _require_horizon(config)
    if len(config.inputs) > 1:
        pts_obj = _load_json(config.inputs[1])
        raw = pts_obj.get("points")
        if not isinstance(raw, list) or not raw:
            raise CliInputError(f"{config.inputs[1]}: expected a 'points' list")
        points = [(_complex_from(p.get("z"), config.inputs[1]),
                   _complex_from(p.get("lambda"), config.inputs[1]))
                  for p in raw]
    else:
        points = _default_kernel_points()
    entries = []
    for z, lam in points:
        val = debranges.kernel_finite(coeffs, z, lam, horizon)
        entries.append({"re_z": z.real, "im_z": z.imag,
                        "re_lambda": lam.real, "im_lambda": lam.imag,
                        "re_value": complex(val).real,
                        "im_value": complex(val).imag})
    payload = {"horizon": horizon, "values": entries}
    rows = [["re_z", "im_z", "re_lambda", "im_lambda", "re_value", "im_value"]]
    rows += [[_fmt_float(e["re_z"]), _fmt_float(e["im_z"]),
              _fmt_float(e["re_lambda"]), _fmt_float(e["im_lambda"]),
              _fmt_float(e["re_value"]), _fmt_float(e["im_value"])]
             for e in entries]
    return payload, _csv_text(rows)


def _cmd_hb(config: RunConfig):
    obj = _primary_input(config)
    coeffs = _coefficients(obj, config.inputs[0])
    horizon = _require_horizon(config)
    if len(config.inputs) > 1:
        pts_obj = _load_json(config.inputs[1])
        raw = pts_obj.get("points")
        if not isinstance(raw, list) or not raw:
            raise CliInputError(f"{config.inputs[1]}: expected a 'points' list")
        points = [_complex_from(p.get("z"), config.inputs[1]) for p in raw]
    else:
        points = [complex(re, im) for re in (-2.0, -1.0, 0.0, 1.0, 2.0)
                  for im in (0.25, 0.5, 1.0, 2.0, 4.0)]
    evaluator = debranges.hermite_biehler(coeffs, horizon)
    entries = []
    for z in points:
        val = complex(evaluator(z))
        entries.append({"re_z": z.real, "im_z": z.imag,
                        "re_value": val.real, "im_value": val.imag})
    payload = {"horizon": horizon, "values": entries}
    rows = [["re_z", "im_z", "re_value", "im_value"]]
    rows += [[_fmt_float(e["re_z"]), _fmt_float(e["im_z"]),
              _fmt_float(e["re_value"]), _fmt_float(e["im_value"])]
             for e in entries]
    return payload, _csv_text(rows)


def _cmd_moments(config: RunConfig):
    obj = _primary_input(config)
    path = config.inputs[0]
    if "response" in obj:
        r = _number_list(obj, "response", path)
        s = moments_mod.response_to_moments(r, config.precision)
        values = [float(v) for v in s]
        payload = {"direction": "response-to-moments", "moments": values}
        label = "s_k"
    elif "moments" in obj:
        s = _number_list(obj, "moments", path)
        r = moments_mod.moments_to_response(s, config.precision)
        values = [float(v) for v in r]
        payload = {"direction": "moments-to-response", "response": values}
        label = "r_k"
    else:
        raise CliInputError(f"{path}: expected a 'response' or 'moments' key")
    rows = [["k", label]] + [[str(i), _fmt_float(v)] for i, v in enumerate(values)]
    return payload, _csv_text(rows)


_HANDLERS = {
    "simulate": _cmd_simulate,
    "response": _cmd_response,
    "connect": _cmd_connect,
    "recover": _cmd_recover,
    "diagnose": _cmd_diagnose,
    "kernel": _cmd_kernel,
    "hb": _cmd_hb,
    "moments": _cmd_moments,
}


def _csv_text(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def _write_output(config: RunConfig, payload: dict, csv_text: str) -> None:
    if config.fmt == "json":
        body = json.dumps({"schema": SCHEMA_TAG, "command": config.command,
                           **payload}, indent=2)
        text = body + "\n"
    else:
        text = csv_text
    if config.output:
        with open(config.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(config: RunConfig) -> int:
    """Execute one configuration; returns the process exit code."""
    try:
        handler = _HANDLERS[config.command]
        payload, csv_text = handler(config)
        _write_output(config, payload, csv_text)
        return 0
    except (CliInputError, JacobiBCError) as exc:
        _emit_error(exc, validation=True)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        _emit_error(exc, validation=False)
        return 1


def _emit_error(exc: Exception, validation: bool) -> None:
    doc = {"schema": SCHEMA_TAG,
           "error": {"type": type(exc).__name__,
                     "kind": "validation" if validation else "internal",
                     "message": str(exc)}}
    sys.stderr.write(json.dumps(doc, indent=2) + "\n")


def _parse_precision(value: str) -> PrecisionMode:
    try:
        return PrecisionMode(value)
    except ValueError as exc:
        raise CliInputError(
            f"unknown precision {value!r}; choose double, extended, or rational"
        ) from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jacobi-bc",
        description="Boundary-control toolkit for Jacobi matrices")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, doc in [
        ("simulate", "run the forward solver (impulse control by default)"),
        ("response", "extract the response vector"),
        ("connect", "build a connecting matrix"),
        ("recover", "recover coefficients from a response or moments"),
        ("diagnose", "determinacy report"),
        ("kernel", "evaluate the reproducing kernel on a grid"),
        ("hb", "evaluate the Hermite-Biehler function on a grid"),
        ("moments", "convert between responses and moments"),
    ]:
        p = sub.add_parser(name, help=doc)
        p.add_argument("--input", action="append", default=[],
                       help="input JSON file (repeatable where documented)")
        p.add_argument("--output", default=None, help="output file (default stdout)")
        p.add_argument("--T", dest="horizon", type=int, default=None,
                       help="time horizon / block size")
        p.add_argument("--N-max", dest="n_max", type=int, default=None,
                       help="maximum block size for sequence diagnostics")
        p.add_argument("--precision", default=None,
                       choices=["double", "extended", "rational"],
                       help="arithmetic mode (default double, or "
                            "JACOBI_BC_PRECISION)")
        p.add_argument("--format", dest="fmt", default="json",
                       choices=["json", "csv"], help="output format")
        p.add_argument("--threads", type=int, default=1,
                       help="worker threads; outputs are independent of it")
    return parser


def config_from_args(args) -> RunConfig:
    precision = args.precision or os.environ.get("JACOBI_BC_PRECISION", "double")
    if args.threads < 1:
        raise CliInputError("--threads must be >= 1")
    return RunConfig(command=args.command, inputs=tuple(args.input),
                     output=args.output, horizon=args.horizon,
                     n_max=args.n_max, precision=_parse_precision(precision),
                     fmt=args.fmt, threads=args.threads)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = config_from_args(args)
    except CliInputError as exc:
        _emit_error(exc, validation=True)
        return 2
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
