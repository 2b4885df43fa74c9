"""Command-line front end.

Every pipeline is a subcommand with deterministic machine-readable output:

* ``dim``            slope estimate of the correlation dimension
* ``tau``            per-level correlation-sum table
* ``cocycle-audit``  submultiplicativity ratio grid and empirical max
* ``fourier``        certified Fourier transform values
* ``pisot-scan``     |Phi| along a witness sequence of frequencies
* ``pisot-check``    Pisot certification plus the power-distance table
* ``find-lambda``    exceptional-parameter construction with witnesses
* ``mc``             Monte-Carlo correlation integral with error bars
* ``covers``         grid covers and the factor-4 offset comparability

Exit codes: 0 success, 2 precondition violation (bad flags, invalid
rationals, rejected polynomials), 3 precision or tolerance cap reached.
On exit 3 any partial result is written next to the requested output with
a ``.partial`` suffix, never to the requested path itself.

Numbers in result files are always two-sided (lo/hi) or value/stderr
pairs; no bare uncertified floats.  Output is byte-identical for
identical (config, seed) across runs.  The ``CANTORCONV_PREC`` environment
variable sets the default working precision in bits.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction

import numpy as np

from .bounds import BoundedValue, PrecisionExceeded, ToleranceNotMet
from .measures import CantorParam
from .lattice import PairParam, build_rotation, good_cover, tau_profile
from .algebraic import (IntPolynomial, NotPisot, certify_pisot,
                        epsilon_constant, power_distance)
from . import dimension, diophantine, spectral

_SCHEMA_VERSION = 1


# ---------------------------------------------------------------------------
# parsing helpers
# ---------------------------------------------------------------------------

class CliError(Exception):
    """Precondition violation destined for exit code 2."""


def parse_rational(text: str, what: str = "rational") -> Fraction:
    """Parse "p/q" or a decimal literal; errors carry the offending position."""
    s = text.strip()
    allowed = set("0123456789/-+.eE")
    for pos, ch in enumerate(s):
        if ch not in allowed:
            raise CliError(
                f"invalid {what} {text!r}: unexpected character {ch!r} "
                f"at position {pos}")
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise CliError(f"invalid {what} {text!r}: {exc}") from None


def parse_scale(text: str) -> tuple[float, Fraction | None]:
    """lambda as a rational, or "s=<rational>" for the log form.

    Returns (s as float, lambda as exact Fraction when available).
    """
    s = text.strip()
    if s.startswith("s="):
        sval = parse_rational(s[2:], "s value")
        return float(sval), None
    lam = parse_rational(s, "lambda")
    if lam <= 0:
        raise CliError(f"lambda must be positive, got {lam}")
    return math.log(float(lam)), lam


def parse_range(text: str) -> tuple[int, int]:
    """Parse "lo..hi" into an inclusive integer range."""
    parts = text.split("..")
    if len(parts) != 2:
        raise CliError(f"invalid range {text!r}: expected lo..hi")
    try:
        lo, hi = int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise CliError(f"invalid range {text!r}: {exc}") from None
    if lo > hi:
        raise CliError(f"invalid range {text!r}: lo > hi")
    return lo, hi


def _bv(b: BoundedValue) -> dict:
    return {"lo": float(b.lo), "hi": float(b.hi)}


def _emit(args, text: str, partial: bool = False) -> None:
    path = getattr(args, "out", None)
    if path is None:
        sys.stdout.write(text)
        if partial:
            sys.stdout.write("\n# PARTIAL RESULT\n")
        return
    if partial:
        path = path + ".partial"
    with open(path, "w") as fh:
        fh.write(text)


def _json(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _pair(args) -> PairParam:
    a = parse_rational(args.a, "ratio a")
    b = parse_rational(args.b, "ratio b")
    return PairParam.of(a, b)


def _load_config(path: str) -> dict[str, str]:
    """key=value config file; '#' starts a comment, blank lines ignored."""
    out: dict[str, str] = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise CliError(f"{path}:{lineno}: expected key=value, got {raw!r}")
            key, val = line.split("=", 1)
            out[key.strip().replace("-", "_")] = val.strip()
    return out


def default_precision() -> int:
    """Working precision in bits, overridable via CANTORCONV_PREC."""
    raw = os.environ.get("CANTORCONV_PREC", "")
    if not raw:
        return 96
    try:
        prec = int(raw)
    except ValueError:
        raise CliError(f"CANTORCONV_PREC must be an integer, got {raw!r}")
    if prec < 16:
        raise CliError("CANTORCONV_PREC must be at least 16")
    return prec


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_dim(args) -> int:
    pp = _pair(args)
    s, _lam = parse_scale(args.scale)
    n_range = parse_range(args.n)
    est = dimension.dim_slope(pp, s=s, q=args.q, n_range=n_range,
                              tol=args.tol, offset=args.offset,
                              refine_levels=args.refine)
    payload = {
        "schema": _SCHEMA_VERSION,
        "a": str(pp.a), "b": str(pp.b), "s": est.s, "q": est.q,
        "n_range": list(est.n_range),
        "slope": {"value": est.slope, "stderr": est.stderr},
        "slope_bounds": _bv(est.bounds),
        "levels": [{"n": r.n, "lo": float(r.tau.lo), "hi": float(r.tau.hi),
                    "log_mid": r.log_mid} for r in est.levels],
    }
    if args.format == "csv":
        _emit(args, est.levels_csv())
    else:
        _emit(args, _json(payload))
    return 0


def _cmd_tau(args) -> int:
    pp = _pair(args)
    s, _lam = parse_scale(args.scale)
    prof = tau_profile(pp, args.n_max, s=s, q=args.q, offset=args.offset,
                       refine_levels=args.refine)
    if args.format == "csv":
        lines = [f"# cantorconv tau v{_SCHEMA_VERSION}", "n,lo,hi,log_mid"]
        for n, (bv, est) in enumerate(prof):
            lines.append(f"{n},{float(bv.lo)!r},{float(bv.hi)!r},"
                         f"{math.log(est)!r}")
        _emit(args, "\n".join(lines) + "\n")
    else:
        payload = {
            "schema": _SCHEMA_VERSION, "a": str(pp.a), "b": str(pp.b),
            "s": s, "q": args.q, "offset": args.offset,
            "levels": [{"n": n, "lo": float(bv.lo), "hi": float(bv.hi),
                        "log_mid": math.log(est)}
                       for n, (bv, est) in enumerate(prof)],
        }
        _emit(args, _json(payload))
    return 0


def _cmd_cocycle_audit(args) -> int:
    pp = _pair(args)
    scheme = build_rotation(pp, ell=args.ell)
    report = dimension.cocycle_audit(
        pp, scheme, m_range=parse_range(args.m), n_range=parse_range(args.n),
        s_grid_size=args.s_grid, q=args.q, refine_levels=args.refine)
    if args.format == "csv":
        _emit(args, report.to_csv())
    else:
        payload = {
            "schema": _SCHEMA_VERSION, "a": str(pp.a), "b": str(pp.b),
            "q": report.q, "m_range": list(report.m_range),
            "n_range": list(report.n_range),
            "s_grid_size": len(report.s_values),
            "max_ratio_hi": report.max_ratio_hi,
            "max_ratio_est": report.max_ratio_est,
            "coarse_max_ratio_est": report.coarse_max_ratio_est,
            "refinement_drift": report.refinement_drift,
        }
        _emit(args, _json(payload))
    return 0


def _cmd_fourier(args) -> int:
    a = parse_rational(args.a, "ratio a")
    b = parse_rational(args.b, "ratio b")
    _s, lam = parse_scale(args.scale)
    if lam is None:
        raise CliError("fourier evaluation needs an exact rational lambda")
    if args.N is not None:
        xi = spectral.PiMultiple(a ** -args.N)
    elif args.xi_pi is not None:
        xi = spectral.PiMultiple(parse_rational(args.xi_pi, "frequency"))
    else:
        raise CliError("give --N or --xi-pi")
    if args.convention == "unit":
        lam_eval = spectral.lambda_recentred(a, b, lam)
    else:
        lam_eval = lam
    phi1, phi2, phi = spectral.conv_hat(a, b, lam_eval, xi, tol=args.tol)
    payload = {
        "schema": _SCHEMA_VERSION, "a": str(a), "b": str(b),
        "lambda": str(lam), "convention": args.convention,
        "lambda_recentred": str(lam_eval),
        "xi_over_pi": str(xi.q),
        "phi1": _bv(phi1.value), "phi2": _bv(phi2.value),
        "phi": _bv(phi.value),
        "phi_abs": _bv(spectral.abs_enclosure(phi)),
        "factors": phi.J, "tail_bound": phi.tail_bound,
    }
    _emit(args, _json(payload))
    return 0


def _cmd_pisot_scan(args) -> int:
    a = parse_rational(args.a, "ratio a")
    b = parse_rational(args.b, "ratio b")
    _s, lam = parse_scale(args.scale)
    if lam is None:
        raise CliError("pisot-scan needs an exact rational lambda")
    if args.witness_file:
        with open(args.witness_file) as fh:
            data = json.load(fh)
        witnesses = [(int(p["n"]), int(p["m"])) for p in data["pairs"]]
        if "lambda_exact" in data and data["lambda_exact"] and args.use_file_lambda:
            lam = Fraction(data["lambda_exact"])
    elif args.witness:
        witnesses = []
        for w in args.witness:
            try:
                n_str, m_str = w.split(":")
                witnesses.append((int(n_str), int(m_str)))
            except ValueError:
                raise CliError(f"invalid witness {w!r}: expected N:M")
    else:
        raise CliError("give --witness N:M ... or --witness-file")
    rows = spectral.pisot_scan(a, b, lam, witnesses, tol=args.tol)
    _emit(args, f"# cantorconv pisot-scan v{_SCHEMA_VERSION}\n"
          + spectral.scan_rows_csv(rows))
    return 0


def _cmd_pisot_check(args) -> int:
    try:
        coeffs = tuple(int(c) for c in args.poly.split(","))
    except ValueError as exc:
        raise CliError(f"invalid polynomial {args.poly!r}: {exc}") from None
    if coeffs and coeffs[-1] != 1 and coeffs[0] == 1:
        coeffs = coeffs[::-1]  # accept leading-coefficient-first input too
    try:
        cert = certify_pisot(IntPolynomial(coeffs))
    except (NotPisot, ValueError) as exc:
        raise CliError(f"not a Pisot polynomial: {exc}") from None
    table = []
    r_gam = []
    for n in range(1, args.n_max + 1):
        d = power_distance(cert, n)
        table.append({"n": n, "lo": float(d.lo), "hi": float(d.hi)})
    eps = epsilon_constant(cert)
    payload = {
        "schema": _SCHEMA_VERSION,
        "poly": list(coeffs),
        "theta": _bv(cert.theta),
        "gamma": _bv(cert.gamma),
        "conjugates": cert.r,
        "power_distance": table,
        "epsilon": _bv(eps),
    }
    _emit(args, _json(payload))
    return 0


def _cmd_find_lambda(args) -> int:
    a = parse_rational(args.a, "ratio a")
    b = parse_rational(args.b, "ratio b")
    eps = parse_rational(args.eps, "epsilon")
    target = None
    if args.target is not None:
        parts = args.target.split(",")
        if len(parts) != 2:
            raise CliError(f"invalid target {args.target!r}: expected c,d")
        target = tuple(parse_rational(t, "target endpoint") for t in parts)
    wl = diophantine.find_lambda(
        a, b, eps, target_interval=target, K=args.K,
        n_max_per_stage=args.n_max_stage, n_min=args.n_min,
        window_factor=parse_rational(args.window_factor, "window factor"))
    _emit(args, wl.to_json() + "\n")
    return 0 if wl.complete else 3


def _cmd_mc(args) -> int:
    pp = _pair(args)
    s, _lam = parse_scale(args.scale)
    rng = np.random.default_rng(args.seed)
    value, stderr = dimension.montecarlo_correlation(
        pp, s=s, n=args.n, sample_count=args.samples, rng=rng)
    payload = {
        "schema": _SCHEMA_VERSION, "a": str(pp.a), "b": str(pp.b),
        "s": s, "n": args.n, "samples": args.samples, "seed": args.seed,
        "correlation": {"value": value, "stderr": stderr},
    }
    if args.exact:
        ex = dimension.correlation_integral(pp, s=s, n=args.n, tol=args.tol)
        payload["exact"] = _bv(ex)
        payload["sigma_gap"] = (0.0 if ex.lo <= value <= ex.hi else
                                min(abs(value - float(ex.lo)),
                                    abs(value - float(ex.hi))) / stderr)
    _emit(args, _json(payload))
    return 0


def _cmd_covers(args) -> int:
    pp = _pair(args)
    _s, lam = parse_scale(args.scale)
    if lam is None:
        raise CliError("covers needs an exact rational lambda")
    offset = parse_rational(args.offset, "offset")
    cover = good_cover(pp, args.n, lam=lam, offset=offset)
    s_val = math.log(float(lam))
    check = dimension.offset_grid_check(pp, args.n, s=s_val,
                                       offset=float(offset),
                                       refine_levels=args.refine)
    payload = {
        "schema": _SCHEMA_VERSION, "a": str(pp.a), "b": str(pp.b),
        "lambda": str(lam), "n": args.n, "offset": str(offset),
        "cover_size": len(cover),
        "cover_first": str(cover[0].left) if cover else None,
        "cover_last": str(cover[-1].right) if cover else None,
        "tau_base": _bv(check["base"]),
        "tau_shifted": _bv(check["shifted"]),
        "factor4_upper_ok": check["upper_ok"],
        "factor4_lower_ok": check["lower_ok"],
    }
    _emit(args, _json(payload))
    return 0 if check["ok"] else 3


# ---------------------------------------------------------------------------
# argument wiring
# ---------------------------------------------------------------------------

def _add_pair_args(p):
    p.add_argument("--a", required=True, help="contraction ratio a as p/q")
    p.add_argument("--b", required=True, help="contraction ratio b as p/q")


def _add_common_args(p):
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--config", help="key=value file supplying flag defaults")
    p.add_argument("--prec", type=int, default=None,
                   help="working precision bits (default from CANTORCONV_PREC)")


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="cantorconv",
        description="Certified numerics for convolutions of Cantor measures")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dim", help="correlation-dimension slope estimate")
    _add_pair_args(p)
    p.add_argument("--lambda", dest="scale", default="1",
                   help="scale factor, rational or s=<rational>")
    p.add_argument("--q", type=float, default=2.0)
    p.add_argument("--n", default="4..14", help="level range lo..hi")
    p.add_argument("--tol", type=float, default=2e-2)
    p.add_argument("--offset", type=float, default=0.0)
    p.add_argument("--refine", type=int, default=8)
    _add_common_args(p)
    p.set_defaults(func=_cmd_dim)

    p = sub.add_parser("tau", help="per-level correlation-sum table")
    _add_pair_args(p)
    p.add_argument("--lambda", dest="scale", default="1")
    p.add_argument("--q", type=float, default=2.0)
    p.add_argument("--n-max", type=int, default=10)
    p.add_argument("--offset", type=float, default=0.0)
    p.add_argument("--refine", type=int, default=8)
    _add_common_args(p)
    p.set_defaults(func=_cmd_tau)

    p = sub.add_parser("cocycle-audit", help="submultiplicativity ratio grid")
    _add_pair_args(p)
    p.add_argument("--m", default="1..8", help="m range lo..hi")
    p.add_argument("--n", default="1..8", help="n range lo..hi")
    p.add_argument("--s-grid", type=int, default=16)
    p.add_argument("--q", type=float, default=2.0)
    p.add_argument("--ell", type=int, default=None)
    p.add_argument("--refine", type=int, default=8)
    _add_common_args(p)
    p.set_defaults(func=_cmd_cocycle_audit)

    p = sub.add_parser("fourier", help="certified Fourier transform values")
    _add_pair_args(p)
    p.add_argument("--lambda", dest="scale", default="1")
    p.add_argument("--N", type=int, default=None,
                   help="evaluate at xi = pi * a^-N")
    p.add_argument("--xi-pi", default=None,
                   help="evaluate at xi = pi * (this rational)")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--convention", choices=("recentred", "unit"),
                   default="unit",
                   help="interpretation of --lambda: unit-interval measures "
                        "(converted) or the recentred convention (as-is)")
    _add_common_args(p)
    p.set_defaults(func=_cmd_fourier)

    p = sub.add_parser("pisot-scan", help="|Phi| along witness frequencies")
    _add_pair_args(p)
    p.add_argument("--lambda", dest="scale", default="1")
    p.add_argument("--witness", action="append",
                   help="witness pair N:M (repeatable)")
    p.add_argument("--witness-file", help="JSON produced by find-lambda")
    p.add_argument("--use-file-lambda", action="store_true",
                   help="take lambda from the witness file")
    p.add_argument("--tol", type=float, default=1e-8)
    _add_common_args(p)
    p.set_defaults(func=_cmd_pisot_scan)

    p = sub.add_parser("pisot-check", help="Pisot certificate + distances")
    p.add_argument("--poly", required=True,
                   help="monic integer polynomial, constant term first, "
                        "comma separated (x^2-x-1 is -1,-1,1)")
    p.add_argument("--n-max", type=int, default=40)
    _add_common_args(p)
    p.set_defaults(func=_cmd_pisot_check)

    p = sub.add_parser("find-lambda", help="exceptional-parameter search")
    _add_pair_args(p)
    p.add_argument("--eps", default="1/4")
    p.add_argument("--K", type=int, default=3)
    p.add_argument("--target", default=None,
                   help="target interval c,d (default: around 1/b)")
    p.add_argument("--n-max-stage", type=int, default=30_000)
    p.add_argument("--n-min", type=int, default=0)
    p.add_argument("--window-factor", default="9/10")
    _add_common_args(p)
    p.set_defaults(func=_cmd_find_lambda)

    p = sub.add_parser("mc", help="Monte-Carlo correlation integral")
    _add_pair_args(p)
    p.add_argument("--lambda", dest="scale", default="1")
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--exact", action="store_true",
                   help="also compute the certified enclosure")
    p.add_argument("--tol", type=float, default=5e-2)
    _add_common_args(p)
    p.set_defaults(func=_cmd_mc)

    p = sub.add_parser("covers", help="grid covers and offset comparability")
    _add_pair_args(p)
    p.add_argument("--lambda", dest="scale", default="1")
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--offset", default="0")
    p.add_argument("--refine", type=int, default=8)
    _add_common_args(p)
    p.set_defaults(func=_cmd_covers)

    return top


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Fold --config file values in as defaults for the chosen subcommand."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        raise CliError("--config needs a path")
    cfg = _load_config(argv[idx + 1])
    # config supplies flags only where the command line does not
    extra: list[str] = []
    for key, val in sorted(cfg.items()):
        flag = "--" + key.replace("_", "-")
        if flag not in argv:
            extra.extend([flag, val])
    return argv[:1] + extra + argv[1:]


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config(parser, argv)
        args = parser.parse_args(argv)
        prec = args.prec if getattr(args, "prec", None) else default_precision()
        from mpmath import mp
        with mp.workprec(prec):
            return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ToleranceNotMet as exc:
        print(f"tolerance not met: {exc}", file=sys.stderr)
        partial = getattr(exc, "partial", None)
        if partial is not None and getattr(args, "out", None):
            with open(args.out + ".partial", "w") as fh:
                fh.write(_json({"schema": _SCHEMA_VERSION,
                                "partial": _bv(partial)}))
        return 3
    except PrecisionExceeded as exc:
        print(f"precision cap reached: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
