"""Command-line front end: ``noonsim {jsa,fringe,simulate,fit}``.

Exit status 0 on success, 2 for configuration/input errors, 3 for runtime or
numerical failures. Errors go to stderr as ``error: <code>: <message>``.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import fringe, interferometer, montecarlo, spectral
from .config import keys_help, load_config
from .errors import ConfigurationError, DomainError, FitError

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


class CliError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status, self.code = status, code


def _write_or_print(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        try:
            Path(out).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise CliError(EXIT_CONFIG, "io", f"cannot write {out}: {exc}") from None


def cmd_jsa(args) -> int:
    cfg = load_config(args.config)
    pump, pm, grid = cfg.pump(), cfg.phasematch(), cfg.grid()
    jsa = spectral.build_jsa(pump, pm, grid)
    rep = spectral.analyze_source(jsa)
    mu = spectral.mean_pairs_per_pulse(cfg["pump"]["pair_rate_per_mw_s"], cfg["pump"]["power_mw"],
                                       cfg["pump"]["repetition_rate_hz"])
    if args.out is not None:
        try:
            spectral.write_jsa_csv(jsa, args.out, metadata=cfg.echo() + "\n")
        except OSError as exc:
            raise CliError(EXIT_CONFIG, "io", f"cannot write {args.out}: {exc}") from None
    print(cfg.echo())
    print(f"K_amplitude = {rep.k_amplitude:.4f}")
    print(f"K_intensity = {rep.k_intensity:.4f}")
    print(f"purity = {rep.purity:.4f}")
    print(f"signal_fwhm_nm = {rep.signal_fwhm_nm:.4f}")
    print(f"idler_fwhm_nm = {rep.idler_fwhm_nm:.4f}")
    print(f"mean_pairs_per_pulse = {mu:.6g}")
    return EXIT_OK


def cmd_fringe(args) -> int:
    if args.n not in interferometer.SUPPORTED_N:
        raise ConfigurationError(f"--n must be one of {interferometer.SUPPORTED_N}")
    if args.points < 1:
        raise ConfigurationError("--points must be >= 1")
    grid = np.linspace(args.phase_min, args.phase_max, args.points)
    curve = interferometer.fringe_curve(args.n, grid)
    lines = ["phase_rad, probability"]
    lines += [f"{p!r}, {v!r}" for p, v in curve.samples]
    _write_or_print("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        if not 0 <= args.seed < 2 ** 64:
            raise ConfigurationError("--seed must be an unsigned 64-bit integer")
        cfg.values["run"]["seed"] = args.seed
        cfg.overrides["seed"] = str(args.seed)
    if args.n not in interferometer.SUPPORTED_N:
        raise ConfigurationError(f"--n must be one of {interferometer.SUPPORTED_N}")
    cfg.overrides["n"] = str(args.n)
    run = cfg.run()
    record = montecarlo.simulate_fringe(run, args.n, workers=cfg["run"]["workers"])
    _write_or_print(montecarlo.format_counts_csv(record, metadata=cfg.echo()), args.out)
    return EXIT_OK


def cmd_fit(args) -> int:
    if args.n not in interferometer.SUPPORTED_N:
        raise ConfigurationError(f"--n must be one of {interferometer.SUPPORTED_N}")
    record = montecarlo.read_counts_csv(args.counts_csv)
    y = record.counts(args.n)
    result = fringe.fit_fringe(record.phase, y, args.n)
    lines = [fringe.FIT_CSV_HEADER, result.csv_line()]
    print("\n".join(lines))
    print(result.summary())
    try:
        print(f"V_minmax = {fringe.visibility_minmax(y):.4f}")
    except DomainError:
        print("V_minmax = undefined (no counts)")
    if args.n == 4:
        print(fringe.evaluate_thresholds(result).summary())
    if args.out is not None:
        _write_or_print("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    epilog = keys_help()
    fmt = argparse.RawDescriptionHelpFormatter
    parser = argparse.ArgumentParser(prog="noonsim", description=__doc__.splitlines()[0],
                                     epilog=epilog, formatter_class=fmt)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("jsa", help="build the joint spectral amplitude and report K, P, FWHM",
                       epilog=epilog, formatter_class=fmt)
    p.add_argument("--config", help="experiment file (key = value)")
    p.add_argument("--out", help="JSA CSV path; metadata goes to <out>.meta.txt")
    p.set_defaults(func=cmd_jsa)

    p = sub.add_parser("fringe", help="analytic N-photon fringe as CSV",
                       epilog=epilog, formatter_class=fmt)
    p.add_argument("--n", type=int, required=True, help="photon number: 1, 2 or 4")
    p.add_argument("--points", type=int, default=100, help="grid points (default 100)")
    p.add_argument("--phase-min", type=float, default=0.0, help="first phase [rad] (default 0)")
    p.add_argument("--phase-max", type=float, default=math.pi,
                   help="last phase [rad], included (default pi)")
    p.add_argument("--out", help="output CSV (default stdout)")
    p.set_defaults(func=cmd_fringe)

    p = sub.add_parser("simulate", help="Monte Carlo counting run",
                       epilog=epilog, formatter_class=fmt)
    p.add_argument("--config", help="experiment file (key = value)")
    p.add_argument("--n", type=int, required=True, help="photon number: 1, 2 or 4")
    p.add_argument("--seed", type=int, help="overrides run.seed")
    p.add_argument("--out", help="counts CSV (default stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit a counts CSV and evaluate thresholds",
                       epilog=epilog, formatter_class=fmt)
    p.add_argument("counts_csv", help="counts CSV written by `simulate`")
    p.add_argument("--n", type=int, required=True, help="photon number: 1, 2 or 4")
    p.add_argument("--out", help="write the fit CSV line here as well")
    p.set_defaults(func=cmd_fit)
    return parser


def _fail(status: int, code: str, message: str) -> int:
    print(f"error: {code}: {' '.join(str(message).split())}", file=sys.stderr)
    return status


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 for --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except CliError as exc:
        return _fail(exc.status, exc.code, str(exc))
    except (ConfigurationError, DomainError) as exc:
        return _fail(EXIT_CONFIG, "config", str(exc))
    except FitError as exc:
        return _fail(EXIT_RUNTIME, "fit", str(exc))
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        return _fail(EXIT_RUNTIME, "numerical", str(exc))


if __name__ == "__main__":
    sys.exit(main())
