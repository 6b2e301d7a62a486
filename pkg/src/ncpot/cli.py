"""Command line front end.

Exit codes: 0 pass, 1 negative certificate, 2 input or usage error,
3 numerical degeneracy. Errors are printed to stderr as JSON.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import io as nio
from .circle import is_power_of_two
from .curvature import classify_field
from .dirichlet import evaluate_metric, solve_dirichlet
from .errors import InputError, NcpotError
from .harnack import family_csv, harnack_family
from .meanvalue import (
    certify_semipositive,
    certify_seminegative,
    default_disc_family,
    profile_csv,
    radial_profile,
)
from .report import collect
from .specfact import fejer_riesz_factor

__all__ = ["main", "build_parser"]


def _write(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _samples(value):
    n = int(value)
    if not is_power_of_two(n) or n < 4:
        raise argparse.ArgumentTypeError("must be a power of two >= 4")
    return n


def _positive(value):
    x = float(value)
    if not x > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return x


def _complex(value):
    try:
        return complex(value.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {value!r}") from None


def _threads():
    raw = os.environ.get("NCPOT_THREADS")
    if raw is None:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise InputError("NCPOT_THREADS must be a positive integer", value=raw) from None
    if n < 1:
        raise InputError("NCPOT_THREADS must be a positive integer", value=raw)
    return n


def cmd_factor(args):
    f = nio.laurent_from_json(nio.load_json(args.input, "laurent"))
    h, report = fejer_riesz_factor(f, tol=args.tol, method=args.method)
    _write(nio.dumps({"H": nio.poly_to_json(h), "report": report.to_dict()}), args.out)
    return 0 if report.passed else 1


def cmd_dirichlet(args):
    f = nio.samples_from_json(nio.load_json(args.boundary, "samples"))
    fm = solve_dirichlet(
        f, degree=args.degree, tol=args.tol, method=args.method, truncation=args.truncation
    )
    out = nio.flat_to_json(fm)
    if args.eval:
        z = nio.points_from_json(nio.load_json(args.eval, "points"))
        vals = evaluate_metric(fm, z)
        out["evaluations"] = [
            {"z": [p.real, p.imag], "P": nio.matrix_to_json(v, "psd")} for p, v in zip(z, vals)
        ]
    _write(nio.dumps(out), args.out)
    return 0


def _square_grid(domain, m, fill=0.9):
    xs = np.linspace(-1.0, 1.0, m) * fill
    w = (xs[None, :] + 1j * xs[:, None]).ravel()
    return domain.from_local(w[np.abs(w) <= fill])


def cmd_curvature(args):
    field = nio.field_from_json(nio.load_json(args.field, "field"))
    cls = classify_field(field, _square_grid(field.domain, args.grid), tol=args.tol)
    _write(nio.dumps(cls.to_dict()), args.out)
    return 0


def _certify(func, field, discs, threads, **kw):
    """Run a certificate over chunks of the disc list; items keep input order."""
    if threads <= 1 or len(discs) < 2:
        return func(field, discs, **kw)
    chunks = [c.tolist() for c in np.array_split(np.array(discs, dtype=object), threads) if len(c)]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        parts = list(ex.map(lambda ch: func(field, ch, **kw), chunks))
    rep = collect(parts[0].kind, [it for p in parts for it in p.items])
    diag = dict(parts[0].diagnostics)
    if "forms_agree" in diag:
        diag["forms_agree"] = all(p.diagnostics["forms_agree"] for p in parts)
        diag["max_margin_gap"] = max(p.diagnostics["max_margin_gap"] for p in parts)
    rep.diagnostics = diag
    return rep


def cmd_certify(args):
    field = nio.field_from_json(nio.load_json(args.field, "field"))
    if args.discs:
        discs = nio.discs_from_json(nio.load_json(args.discs, "discs"))
        for d in discs:
            field.domain.require_disc(d)
    else:
        discs = default_disc_family(field.domain)
    threads = _threads()
    if args.mode == "seminegative":
        tol = 1e-9 if args.tol is None else args.tol
        rep = _certify(certify_seminegative, field, discs, threads, tol=tol, n=args.samples)
    else:
        tol = 1e-8 if args.tol is None else args.tol
        rep = _certify(certify_semipositive, field, discs, threads, tol=tol, n=args.samples)
    if args.profile:
        radii = np.linspace(0.05, 0.9, 18) * field.domain.r
        _write(profile_csv(radial_profile(field, field.domain.z0, radii, args.samples)), args.profile)
    _write(nio.dumps(rep.to_dict()), args.out)
    return 0 if rep.passed else 1


def cmd_harnack(args):
    if args.kmin < 1 or args.kmax < args.kmin:
        raise InputError("need 1 <= kmin <= kmax", kmin=args.kmin, kmax=args.kmax)
    if args.dim < 2:
        raise InputError("dim must be at least 2", dim=args.dim)
    fam = harnack_family(args.z0, range(args.kmin, args.kmax + 1), args.dim)
    _write(family_csv(fam), args.out)
    return 0


def cmd_selftest(args):
    from .selftest import run_selftest

    results = run_selftest(seed=args.seed)
    _write(nio.dumps({"seed": args.seed, "checks": results}), args.out)
    return 0 if all(results.values()) else 1


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--seed", type=int, default=0, help="random seed")

    p = argparse.ArgumentParser(prog="ncpot", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("factor", parents=[common], help="outer factor of a Laurent polynomial")
    s.add_argument("--in", dest="input", required=True, help="Laurent JSON")
    s.add_argument("--method", choices=["bauer", "wilson"], default="bauer")
    s.add_argument("--tol", type=_positive, default=1e-10)
    s.set_defaults(func=cmd_factor)

    s = sub.add_parser("dirichlet", parents=[common], help="flat metric with given boundary values")
    s.add_argument("--boundary", "--in", dest="boundary", required=True, help="samples JSON")
    s.add_argument("--degree", type=int, default=64)
    s.add_argument("--method", choices=["bauer", "wilson"], default="bauer")
    s.add_argument("--truncation", choices=["auto", "fejer", "fourier"], default="auto")
    s.add_argument("--tol", type=_positive, default=1e-10)
    s.add_argument("--eval", help="points JSON to evaluate the metric at")
    s.set_defaults(func=cmd_dirichlet)

    s = sub.add_parser("curvature", parents=[common], help="classify the curvature sign of a field")
    s.add_argument("--field", "--in", dest="field", required=True, help="field JSON")
    s.add_argument("--grid", type=int, default=32, help="points per side of the test grid")
    s.add_argument("--tol", type=_positive, default=1e-9)
    s.set_defaults(func=cmd_curvature)

    s = sub.add_parser("certify", parents=[common], help="circle-mean curvature certificate")
    s.add_argument("--field", "--in", dest="field", required=True, help="field JSON")
    s.add_argument("--mode", choices=["seminegative", "semipositive"], required=True)
    s.add_argument("--discs", help="discs JSON (default: 5x5 centers x 3 radii)")
    s.add_argument("--tol", type=_positive, default=None)
    s.add_argument("--samples", type=_samples, default=256)
    s.add_argument("--profile", help="write the radial profile of S(P, z0, r) as CSV")
    s.set_defaults(func=cmd_certify)

    s = sub.add_parser("harnack", parents=[common], help="weighted-shift Harnack family as CSV")
    s.add_argument("--z0", type=_complex, default=0.5)
    s.add_argument("--kmin", type=int, default=1)
    s.add_argument("--kmax", type=int, default=8)
    s.add_argument("--dim", type=int, default=1024)
    s.set_defaults(func=cmd_harnack)

    s = sub.add_parser("selftest", parents=[common], help="run the built-in invariant checks")
    s.set_defaults(func=cmd_selftest)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NcpotError as exc:
        sys.stderr.write(json.dumps(exc.to_dict(), sort_keys=True, default=str) + "\n")
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
