"""Command-line interface.

Subcommands::

    proprd rd-curve  --model ar1 --r 0.3 --measure proportional --d 0.25
    proprd fig1      [--r 1/3] [--S 1] [--d 0.7]
    proprd channel   (--snr X | --target-d-over-s Y) [--marginal uniform]
    proprd verify    [--seed 0]

Exit status: 0 success, 1 verification failure, 2 usage or range error.
If ``--output`` is omitted and ``PROPRD_OUTPUT_DIR`` is set, files go to
``$PROPRD_OUTPUT_DIR/<command>.<format>``; otherwise to stdout.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import __version__, ratefn, spectra, verify, waterfill
from .errors import ConvergenceError, DomainError, RangeError, UnsupportedError, ValidityError

OUTPUT_DIR_ENV = "PROPRD_OUTPUT_DIR"
USAGE_ERRORS = (DomainError, RangeError, ValidityError, UnsupportedError, ConvergenceError,
                ValueError)


def number(text):
    """Float argument that also accepts fractions such as ``1/3``."""
    try:
        return float(Fraction(text)) if "/" in text else float(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc


@dataclass
class RunConfig:
    command: str
    source: dict = field(default_factory=dict)
    d_values: list = field(default_factory=list)
    grid_points: int = spectra.DEFAULT_GRID_POINTS
    units: str = "nats"
    fmt: str = "csv"
    seed: int = 0
    output: str | None = None


def _output_path(cfg):
    if cfg.output:
        return cfg.output
    root = os.environ.get(OUTPUT_DIR_ENV)
    if root:
        return os.path.join(root, f"{cfg.command}.{cfg.fmt}")
    return None


def _emit(cfg, text):
    """Write ``text`` atomically (or to stdout); nothing is written on failure upstream."""
    path = _output_path(cfg)
    if path is None:
        sys.stdout.write(text)
        return
    folder = os.path.dirname(os.path.abspath(path))
    os.makedirs(folder, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".proprd-")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


# -- rd-curve ---------------------------------------------------------------

def build_source(src):
    model = src["model"]
    if model == "ar1":
        psd = spectra.AR1(src["r"], src["S"])
    elif model == "ou":
        psd = spectra.OU(src["a"], src["beta"])
    elif model == "white":
        if src["B"] is None:
            raise ValueError("--model white needs --B")
        psd = spectra.White(src["S"], src["B"])
    elif model == "csv":
        if not src["psd_csv"]:
            raise ValueError("--model csv needs --psd-csv PATH")
        domain = (spectra.DiscreteTime() if src["domain"] == "discrete"
                  else spectra.Bandlimited(src["band"]))
        psd = spectra.load_csv(src["psd_csv"], domain)
    else:
        raise ValueError(f"unknown model {model!r}")
    marginal = ratefn.MarginalFamily(src["marginal"], psd.total_power())
    return ratefn.SourceModel(psd, marginal, src["divergence"])


def cmd_rd_curve(cfg):
    src = build_source(cfg.source)
    measure = cfg.source["measure"]
    B = cfg.source["B"] if measure == "mixed" else None
    grid = None
    if not isinstance(src.spectrum.domain, spectra.InfiniteBand):
        grid = spectra.FrequencyGrid.for_domain(src.spectrum.domain, cfg.grid_points)
    curve = ratefn.rd_curve(src, cfg.d_values, measure, B=B, grid=grid)
    bits = cfg.units == "bits"
    return curve.to_json(bits) if cfg.fmt == "json" else curve.to_csv(bits)


# -- fig1 -------------------------------------------------------------------

def fig1_table(r=1 / 3, S=1.0, d=0.7, n_points=spectra.DEFAULT_GRID_POINTS):
    """Source density with the plain and proportional error densities at distortion ``d``."""
    psd = spectra.AR1(r, S)
    if not 0 < d <= S:
        raise RangeError(f"distortion must satisfy 0 < d <= S = {S}, got {d}")
    grid = spectra.FrequencyGrid(n_points)
    tab = waterfill.weighted_psd(psd, waterfill.Unit(), grid)
    sol = waterfill.solve_at_distortion(tab, d)
    plain = waterfill.error_spectrum(tab, sol)
    prop = waterfill.proportional_error_spectrum(psd, d, grid)
    return {
        "f": grid.frequencies,
        "phi": tab.values,
        "err_nonweighted": plain.values,
        "err_proportional": prop.values,
        "mu": sol.mu,
    }


FIG1_COLUMNS = ("f", "phi", "err_nonweighted", "err_proportional")


def cmd_fig1(cfg):
    s = cfg.source
    table = fig1_table(s["r"], s["S"], s["d"], cfg.grid_points)
    if cfg.fmt == "json":
        doc = {k: [float(v) for v in table[k]] for k in FIG1_COLUMNS}
        doc.update(mu=table["mu"], r=s["r"], S=s["S"], d=s["d"])
        return json.dumps(doc) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FIG1_COLUMNS)
    for row in zip(*(table[k] for k in FIG1_COLUMNS)):
        w.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


# -- channel ----------------------------------------------------------------

def _ratio_text(x):
    return np.format_float_positional(x, precision=6, unique=True, trim="0")


def cmd_channel(args):
    if args.divergence is not None:
        div = args.divergence
    else:
        div = ratefn.divergence_rate_iid(ratefn.MarginalFamily(args.marginal))
    if args.target_d_over_s is not None:
        snr = ratefn.min_snr_for_distortion(args.target_d_over_s, div)
        return f"SNR_min = {snr:.3f} ({ratefn.snr_db(snr):.2f} dB)\n"
    bound = ratefn.channel_distortion_bound(args.snr, div)
    return f"d/S >= {_ratio_text(bound)}\n"


# -- parser -----------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="proprd", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=f"proprd {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, fmts=("csv", "json")):
        sp.add_argument("--grid", type=int, default=spectra.DEFAULT_GRID_POINTS,
                        help="frequency grid points (default %(default)s)")
        sp.add_argument("--format", choices=fmts, default=fmts[0])
        sp.add_argument("--output", help="output file (default: stdout or $%s)" % OUTPUT_DIR_ENV)

    rd = sub.add_parser("rd-curve", help="rate-distortion points for one measure")
    rd.add_argument("--model", choices=("ar1", "ou", "white", "csv"), required=True)
    rd.add_argument("--r", type=number, default=0.0)
    rd.add_argument("--S", type=number, default=1.0)
    rd.add_argument("--a", type=number, default=1.0)
    rd.add_argument("--beta", type=number, default=math.sqrt(2.0))
    rd.add_argument("--B", type=number, help="bandwidth (white) or cut bandwidth (mixed)")
    rd.add_argument("--psd-csv", help="tabulated density with header f,phi")
    rd.add_argument("--domain", choices=("discrete", "bandlimited"), default="discrete")
    rd.add_argument("--band", type=number, help="bandwidth of a bandlimited CSV density")
    rd.add_argument("--marginal", choices=[m.value for m in ratefn.Marginal], default="gaussian")
    rd.add_argument("--divergence", type=number)
    rd.add_argument("--measure", choices=[m.value for m in ratefn.Measure], required=True)
    rd.add_argument("--d", type=number, nargs="+", help="distortion values")
    rd.add_argument("--d-min", type=number)
    rd.add_argument("--d-max", type=number)
    rd.add_argument("--n-d", type=int, default=50)
    rd.add_argument("--units", choices=("nats", "bits"), default="nats")
    common(rd)

    f1 = sub.add_parser("fig1", help="error densities of a Gauss-Markov source")
    f1.add_argument("--r", type=number, default=1 / 3)
    f1.add_argument("--S", type=number, default=1.0)
    f1.add_argument("--d", type=number, default=0.7)
    common(f1)

    ch = sub.add_parser("channel", help="distortion bound over a Gaussian channel")
    g = ch.add_mutually_exclusive_group(required=True)
    g.add_argument("--snr", type=number)
    g.add_argument("--target-d-over-s", type=number)
    ch.add_argument("--marginal", choices=[m.value for m in ratefn.Marginal], default="gaussian")
    ch.add_argument("--divergence", type=number, help="override the divergence rate (nats)")

    vf = sub.add_parser("verify", help="run the oracle suite")
    vf.add_argument("--seed", type=int, default=0)
    vf.add_argument("--mc-samples", type=int, default=1_000_000)
    vf.add_argument("--mc-dim", type=int, default=512)
    vf.add_argument("--force-tolerance", type=number,
                    help="replace every tolerance (negative control)")
    return p


def _config(args):
    cfg = RunConfig(args.command, fmt=getattr(args, "format", "csv"),
                    output=getattr(args, "output", None), grid_points=getattr(args, "grid", 0))
    if args.command in ("rd-curve", "fig1") and cfg.grid_points < 16:
        raise ValueError("--grid must be at least 16")
    if args.command == "rd-curve":
        cfg.units = args.units
        cfg.source = {k: getattr(args, k) for k in (
            "model", "r", "S", "a", "beta", "B", "psd_csv", "domain", "band", "marginal",
            "divergence", "measure")}
        if args.d:
            cfg.d_values = list(args.d)
        elif args.d_min is not None and args.d_max is not None:
            if not 0 < args.d_min <= args.d_max or args.n_d < 1:
                raise RangeError("need 0 < --d-min <= --d-max and --n-d >= 1")
            cfg.d_values = list(np.linspace(args.d_min, args.d_max, args.n_d))
        else:
            raise ValueError("give --d values or --d-min/--d-max")
        if args.measure == "mixed" and args.B is None:
            raise ValueError("--measure mixed needs --B")
    elif args.command == "fig1":
        cfg.source = {"r": args.r, "S": args.S, "d": args.d}
        if not 0 < args.d <= args.S:
            raise RangeError(f"need 0 < d <= S, got d={args.d}, S={args.S}")
    elif args.command == "verify":
        cfg.seed = args.seed
    return cfg


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = _config(args)
        if args.command == "rd-curve":
            _emit(cfg, cmd_rd_curve(cfg))
        elif args.command == "fig1":
            _emit(cfg, cmd_fig1(cfg))
        elif args.command == "channel":
            sys.stdout.write(cmd_channel(args))
        elif args.command == "verify":
            checks = verify.run_all(args.seed, args.mc_samples, args.mc_dim,
                                    args.force_tolerance)
            sys.stdout.write(verify.format_table(checks))
            failed = [c for c in checks if not c.passed]
            for c in failed:
                sys.stderr.write(f"FAILED {c.name}: expected {c.expected:.12g}, actual "
                                 f"{c.actual:.12g}, tolerance {c.tolerance:.3g}\n")
            return 1 if failed else 0
    except USAGE_ERRORS as exc:
        sys.stderr.write(f"proprd {args.command}: error: {exc}\n")
        return 2
    except BrokenPipeError:
        # downstream reader closed early (e.g. piped into head)
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 0
    return 0


if __name__ == "__main__":
    sys.exit(main())
