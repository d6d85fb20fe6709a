"""Command-line interface wiring all modules together.

Subcommands: check-type, trace, transport, gauge, synth, estimate,
compare, roundtrip.  Exit codes: 0 success (or comparison pass), 1
invalid input or configuration, 2 numerical failure, 3 comparison
failure.  Identical arguments and inputs produce byte-identical
outputs: fixed field order, shortest round-trip float formatting, no
timestamps.  A JSON config file may supply any long option (keys are
the option names with dashes replaced by underscores); explicit flags
override the file, and environment variables are never consulted.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import serialization as ser
from .errors import InvalidInput, NumericalFailure, PolarayError
from .gauge import (
    FourierMode,
    classify_mode,
    field_strength_mode,
    lorenz_residual,
    physical_kernel,
    radiation_fix,
)
from .minkowski import phase_point
from .principal_type import (
    char_membership,
    decompose_principal_type,
    is_real_principal_type,
    kernel_basis,
)
from .rays import null_project, trace_ray
from .symbols import MatrixSymbol, builtin_symbol, parse_symbol_file, pretty
from .transport import transport
from .wavepacket import (
    CompareTolerances,
    GridSpec,
    WavePacketSpec,
    compare,
    estimate_polarization_set,
    synthesize,
)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NUMERICAL = 2
EXIT_COMPARE_FAIL = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on usage errors; the contract here is 1
    def error(self, message):
        raise InvalidInput(message)


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w", newline="\n") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _json_dump(payload) -> str:
    return json.dumps(payload, sort_keys=True, indent=1) + "\n"


def _parse_reals(text: str, count: int, what: str) -> np.ndarray:
    parts = text.split(",")
    if len(parts) != count:
        raise InvalidInput(f"{what} needs {count} comma-separated values, got {len(parts)}")
    try:
        return np.array([float(p) for p in parts])
    except ValueError as exc:
        raise InvalidInput(f"bad {what}: {exc}") from exc


def _parse_span(text: str) -> tuple[float, float]:
    lo, sep, hi = text.partition(":")
    if not sep:
        raise InvalidInput("tau span must look like '0:1'")
    try:
        a, b = float(lo), float(hi)
    except ValueError as exc:
        raise InvalidInput(f"bad tau span: {exc}") from exc
    if b < a:
        raise InvalidInput("tau span must be nondecreasing")
    return a, b


def _parse_complex_vec(real_text: str, imag_text: str | None, count: int, what: str):
    re = _parse_reals(real_text, count, what)
    if imag_text is None:
        return re.astype(complex)
    im = _parse_reals(imag_text, count, f"{what} imaginary part")
    return re + 1j * im


def _positive(value: float, what: str) -> float:
    if not value > 0:
        raise InvalidInput(f"{what} must be positive, got {value}")
    return value


def _load_symbol(args) -> MatrixSymbol:
    if getattr(args, "symbol_file", None):
        with open(args.symbol_file, "r") as handle:
            return parse_symbol_file(handle.read())
    if not getattr(args, "symbol", None):
        raise InvalidInput("give --symbol NAME or --symbol-file PATH")
    return builtin_symbol(
        args.symbol,
        scale=getattr(args, "scale", None),
        dimension=getattr(args, "dimension", None),
    )


def _mode_from_args(args) -> FourierMode:
    k = _parse_reals(args.k, 4, "--k")
    eps = _parse_complex_vec(args.eps, getattr(args, "eps_imag", None), 4, "--eps")
    amp = complex(args.amp, getattr(args, "amp_imag", 0.0) or 0.0)
    return FourierMode(k=k, eps=eps, amplitude=amp)


# -- subcommand handlers ---------------------------------------------------


def _cmd_check_type(args) -> int:
    sym = _load_symbol(args)
    hint = None
    if args.hint_file:
        with open(args.hint_file, "r") as handle:
            hint = parse_symbol_file(handle.read())
    decomp = decompose_principal_type(sym, hint=hint)
    pt = phase_point(_parse_reals(args.point, 4, "--point"), _parse_reals(args.k, 4, "--k"))
    tol = _positive(args.tol, "--tol")
    basis = kernel_basis(sym, pt, tol=tol)
    result = {
        "symbol": sym.name or "file",
        "point": [float(v) for v in pt.x],
        "k": [float(v) for v in pt.k],
        "q": pretty(decomp.q),
        "q_value": float(decomp.q.eval(pt)[0, 0].real),
        "real_principal_type": is_real_principal_type(decomp.q, pt, tol=tol),
        "on_char": char_membership(decomp, pt, tol=tol),
        "kernel_dimension": basis.dimension,
        "singular_values": [float(s) for s in basis.singular_values],
    }
    _emit(_json_dump(result), args.output)
    return EXIT_OK


def _trace_from_args(args):
    sym = _load_symbol(args)
    decomp = decompose_principal_type(sym)
    k0 = _parse_reals(args.k, 4, "--k")
    if args.project_null:
        k0 = null_project(k0, args.branch)
    span = _parse_span(args.tau)
    step = _positive(args.step, "--step")
    ray = trace_ray(
        decomp.q,
        _parse_reals(args.x0, 4, "--x0"),
        k0,
        span,
        step,
        method=args.method,
    )
    return decomp, ray


def _cmd_trace(args) -> int:
    _, ray = _trace_from_args(args)
    _emit(ser.ray_csv_text(ray), args.output)
    return EXIT_OK


def _cmd_transport(args) -> int:
    decomp, ray = _trace_from_args(args)
    omega0 = _parse_complex_vec(
        args.omega0, args.omega0_imag, decomp.p.dimension, "--omega0"
    )
    orbit = transport(decomp, ray, omega0, reproject=args.reproject)
    _emit(ser.orbit_csv_text(orbit), args.output)
    return EXIT_OK


def _cmd_gauge(args) -> int:
    mode = _mode_from_args(args)
    residual = lorenz_residual(mode)
    cls = classify_mode(mode)
    fixed, chi = radiation_fix(mode)
    strength = field_strength_mode(mode)
    kernel = physical_kernel(mode.k)
    result = {
        "k": [float(v) for v in mode.k],
        "eps_re": [float(z.real) for z in mode.eps],
        "eps_im": [float(z.imag) for z in mode.eps],
        "amplitude_re": mode.amplitude.real,
        "amplitude_im": mode.amplitude.imag,
        "lorenz_residual_re": residual.real,
        "lorenz_residual_im": residual.imag,
        "classification": {
            "transverse_re": [float(z.real) for z in cls.transverse],
            "transverse_im": [float(z.imag) for z in cls.transverse],
            "pure_gauge_re": cls.pure_gauge.real,
            "pure_gauge_im": cls.pure_gauge.imag,
            "constraint_violation_re": cls.constraint_violation.real,
            "constraint_violation_im": cls.constraint_violation.imag,
        },
        "radiation_fix": {
            "chi_hat_re": chi.chi_hat.real,
            "chi_hat_im": chi.chi_hat.imag,
            "eps_re": [float(z.real) for z in fixed.eps],
            "eps_im": [float(z.imag) for z in fixed.eps],
        },
        "field_strength_nonzero": bool(np.any(strength.F != 0)),
        "physical_kernel_re": [[float(z.real) for z in row] for row in kernel],
        "physical_kernel_im": [[float(z.imag) for z in row] for row in kernel],
    }
    _emit(_json_dump(result), args.output)
    return EXIT_OK


def _grid_from_args(args) -> GridSpec:
    extents = _parse_reals(args.extent, 3, "--extent")
    samples = _parse_reals(args.samples, 3, "--samples").astype(int)
    return GridSpec(
        extents=tuple(extents),
        samples=tuple(int(n) for n in samples),
        time_slices=args.tslices,
        time_step=args.tstep,
    )


def _cmd_synth(args) -> int:
    grid = _grid_from_args(args)
    mode = _mode_from_args(args)
    spec = WavePacketSpec(
        mode=mode,
        center=_parse_reals(args.center, 4, "--center"),
        sigma=_positive(args.sigma, "--sigma"),
    )
    field = synthesize(spec, grid)
    ser.write_gridfield(args.output, field)
    info = {
        "output": args.output,
        "envelope_transport_error": field.metadata["envelope_transport_error"],
        "samples": list(grid.samples),
        "time_slices": grid.time_slices,
    }
    sys.stdout.write(_json_dump(info))
    return EXIT_OK


def _parse_centers(text: str) -> list[np.ndarray]:
    out = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if chunk:
            out.append(_parse_reals(chunk, 4, "window center"))
    if not out:
        raise InvalidInput("no window centers given")
    return out


def _cmd_estimate(args) -> int:
    field = ser.read_gridfield(args.field)
    if not (0.0 < args.threshold < 1.0):
        raise InvalidInput("--threshold must lie strictly between 0 and 1")
    estimates = estimate_polarization_set(
        field,
        _parse_centers(args.centers),
        window_width=_positive(args.window, "--window"),
        threshold=args.threshold,
        refine=not args.no_refine,
    )
    if args.format == "json":
        _emit(ser.estimates_json_text(estimates), args.output)
    else:
        _emit(ser.estimates_csv_text(estimates), args.output)
    return EXIT_OK


def _cmd_compare(args) -> int:
    estimates = ser.read_estimates(args.estimates)
    orbit = ser.read_orbit_csv(args.orbit)
    for name in ("max_distance", "max_angle"):
        _positive(getattr(args, name), f"--{name.replace('_', '-')}")
    if not (0.0 < args.min_overlap <= 1.0):
        raise InvalidInput("--min-overlap must lie in (0, 1]")
    tol = CompareTolerances(
        max_distance=args.max_distance,
        max_angle_deg=args.max_angle,
        min_overlap=args.min_overlap,
        max_sideband_db=args.max_sideband_db,
    )
    report = compare(estimates, orbit, tol)
    _emit(_json_dump(report.to_dict()), args.output)
    return EXIT_OK if report.passed else EXIT_COMPARE_FAIL


def _cmd_roundtrip(args) -> int:
    ok = ser.roundtrip(args.path)
    sys.stdout.write(_json_dump({"path": args.path, "roundtrip": bool(ok)}))
    return EXIT_OK if ok else EXIT_INVALID


# -- parser wiring -----------------------------------------------------------


def _add_symbol_options(sub):
    sub.add_argument("--symbol", help="built-in symbol name")
    sub.add_argument("--symbol-file", help="symbol definition file")
    sub.add_argument("--scale", help="x-polynomial for scaled-wave, e.g. '1+x3^2'")
    sub.add_argument("--dimension", type=int, help="fiber dimension for scaled-wave")


def _add_trace_options(sub):
    _add_symbol_options(sub)
    sub.add_argument("--x0", required=True, help="start point t,x1,x2,x3")
    sub.add_argument("--k", required=True, help="start covector k0,k1,k2,k3")
    sub.add_argument("--tau", required=True, help="parameter span lo:hi")
    sub.add_argument("--step", type=float, required=True, help="integrator step")
    sub.add_argument("--method", choices=("rk4", "adaptive"), default="rk4")
    sub.add_argument("--project-null", action="store_true", help="project k to the cone first")
    sub.add_argument("--branch", choices=("+", "-"), default="+", help="cone branch for projection")


def build_parser() -> _Parser:
    parser = _Parser(prog="polaray", description=__doc__)
    parser.add_argument("--config", help="JSON file supplying default option values")
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("check-type", help="decomposition and principal-type verdict")
    _add_symbol_options(sub)
    sub.add_argument("--hint-file", help="symbol file with the p~ hint")
    sub.add_argument("--point", required=True, help="base point t,x1,x2,x3")
    sub.add_argument("--k", required=True, help="covector k0,k1,k2,k3")
    sub.add_argument("--tol", type=float, default=1e-10)
    sub.add_argument("-o", "--output")
    sub.set_defaults(func=_cmd_check_type)

    sub = subs.add_parser("trace", help="integrate a null ray, emit CSV")
    _add_trace_options(sub)
    sub.add_argument("-o", "--output")
    sub.set_defaults(func=_cmd_trace)

    sub = subs.add_parser("transport", help="transport a fiber vector along a ray")
    _add_trace_options(sub)
    sub.add_argument("--omega0", required=True, help="fiber vector real parts")
    sub.add_argument("--omega0-imag", help="fiber vector imaginary parts")
    sub.add_argument("--reproject", action="store_true")
    sub.add_argument("-o", "--output")
    sub.set_defaults(func=_cmd_transport)

    sub = subs.add_parser("gauge", help="classify a mode, fix the gauge, emit JSON")
    sub.add_argument("--k", required=True, help="null covector k0,k1,k2,k3")
    sub.add_argument("--eps", required=True, help="polarization real parts")
    sub.add_argument("--eps-imag", help="polarization imaginary parts")
    sub.add_argument("--amp", type=float, default=1.0)
    sub.add_argument("--amp-imag", type=float, default=0.0)
    sub.add_argument("-o", "--output")
    sub.set_defaults(func=_cmd_gauge)

    sub = subs.add_parser("synth", help="synthesize a wave packet grid field")
    sub.add_argument("--k", required=True, help="null covector of the carrier")
    sub.add_argument("--eps", required=True, help="polarization real parts")
    sub.add_argument("--eps-imag", help="polarization imaginary parts")
    sub.add_argument("--amp", type=float, default=1.0)
    sub.add_argument("--amp-imag", type=float, default=0.0)
    sub.add_argument("--center", required=True, help="envelope center t,x1,x2,x3")
    sub.add_argument("--sigma", type=float, required=True, help="envelope width")
    sub.add_argument("--extent", required=True, help="domain lengths L1,L2,L3")
    sub.add_argument("--samples", required=True, help="sample counts n1,n2,n3")
    sub.add_argument("--tslices", type=int, default=1)
    sub.add_argument("--tstep", type=float, default=0.1)
    sub.add_argument("-o", "--output", required=True, help="grid field output path")
    sub.set_defaults(func=_cmd_synth)

    sub = subs.add_parser("estimate", help="estimate oscillation directions from a field")
    sub.add_argument("--field", required=True, help="grid field file")
    sub.add_argument("--centers", required=True, help="semicolon-separated t,x1,x2,x3 windows")
    sub.add_argument("--window", type=float, required=True, help="window width")
    sub.add_argument("--threshold", type=float, default=0.2)
    sub.add_argument("--no-refine", action="store_true", help="report raw bin directions")
    sub.add_argument("--format", choices=("csv", "json"), default="csv")
    sub.add_argument("-o", "--output")
    sub.set_defaults(func=_cmd_estimate)

    sub = subs.add_parser("compare", help="check estimates against a transported orbit")
    sub.add_argument("--estimates", required=True, help="estimates CSV or JSON")
    sub.add_argument("--orbit", required=True, help="orbit CSV")
    sub.add_argument("--max-distance", type=float, default=1.0)
    sub.add_argument("--max-angle", type=float, default=3.0)
    sub.add_argument("--min-overlap", type=float, default=0.99)
    sub.add_argument("--max-sideband-db", type=float, default=-20.0)
    sub.add_argument("-o", "--output")
    sub.set_defaults(func=_cmd_compare)

    sub = subs.add_parser("roundtrip", help="verify an emitted file re-reads bit-exactly")
    sub.add_argument("path")
    sub.set_defaults(func=_cmd_roundtrip)

    return parser


def _apply_config(parser: _Parser, argv: list[str]) -> list[str]:
    """Inject config-file values as subparser defaults; flags still win."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        raise InvalidInput("--config needs a file path")
    path = argv[idx + 1]
    try:
        with open(path, "r") as handle:
            config = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInput(f"bad config file {path}: {exc}") from exc
    if not isinstance(config, dict):
        raise InvalidInput("config file must hold a JSON object")
    remaining = argv[:idx] + argv[idx + 2 :]
    if not remaining:
        raise InvalidInput("config file cannot choose the subcommand")
    command = remaining[0]
    for action in parser._subparsers._group_actions:  # noqa: SLF001
        sub = action.choices.get(command)
        if sub is None:
            continue
        valid = {a.dest for a in sub._actions}  # noqa: SLF001
        unknown = set(config) - valid
        if unknown:
            raise InvalidInput(f"config file has unknown keys: {sorted(unknown)}")
        sub.set_defaults(**config)
        for sub_action in sub._actions:  # noqa: SLF001
            if sub_action.dest in config:
                sub_action.required = False
    return remaining


def run(argv: list[str]) -> int:
    parser = build_parser()
    try:
        argv = _apply_config(parser, list(argv))
        args = parser.parse_args(argv)
        return args.func(args)
    except NumericalFailure as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (InvalidInput, OSError, ValueError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except PolarayError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
