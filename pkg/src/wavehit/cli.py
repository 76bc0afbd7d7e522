"""Command-line entry point.

Subcommands: cov, sample, cap, haus, hit, verify.  Options may also come from
a ``key = value`` file given by ``--config``; explicit flags win.  Every CSV
output starts with ``# key: value`` lines holding the resolved configuration.
Exit status: 0 success, 1 failed check, 2 usage or configuration error.
"""

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from . import capacity as cap
from . import hausdorff as haus
from . import verifier
from .errors import ParameterError, WavehitError
from .field_sampler import GridBox, assemble_cov, build_grid, sample_field, write_sample_csv
from .hitting_mc import cell_enlargement, min_distances, estimate_from_hits, write_hits_csv
from .spectral_core import ModelParams, QuadratureSpec, covariance_array, metric_sq_array, variance_array
from .targets import Ball, Box, CantorDust, Point

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _floats(text):
    try:
        return [float(v) for v in str(text).replace(";", ",").split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _common(p):
    p.add_argument("--config", help="key = value file; explicit flags take precedence")
    p.add_argument("--k", type=int, default=1, help="spatial dimension (1, 2 or 3)")
    p.add_argument("--beta", type=float, default=0.5, help="noise exponent in (0, min(2, k))")
    p.add_argument("--d", type=int, default=1, help="number of field components")
    p.add_argument("--t0", type=float, default=0.5)
    p.add_argument("--T", type=float, default=2.0)
    p.add_argument("--rel-tol", type=float, default=1e-10)
    p.add_argument("--seed", type=int, default=None, help="falls back to $WAVEHIT_SEED, then 0")
    p.add_argument("--threads", type=int, default=None, help="worker cap; output is independent of it")
    p.add_argument("--out", default="-", help="output path, '-' for stdout")


def _grid_opts(p, nt=32, nx=32):
    p.add_argument("--box", type=_floats, default=None, help="t_lo,t_hi,x_lo,x_hi (x bounds repeated per axis)")
    p.add_argument("--nt", type=int, default=nt)
    p.add_argument("--nx", type=int, default=nx)


def _target_opts(p):
    p.add_argument("--target", choices=["ball", "point", "segment", "box", "cantor"], default="ball")
    p.add_argument("--radius", type=float, default=0.1)
    p.add_argument("--center", type=_floats, default=None)
    p.add_argument("--lo", type=_floats, default=None)
    p.add_argument("--hi", type=_floats, default=None)
    p.add_argument("--depth", type=int, default=8)
    p.add_argument("--gamma", type=float, default=None, help="index; default d minus the critical dimension")


def build_parser():
    parser = argparse.ArgumentParser(prog="wavehit", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cov", help="covariance, variances and squared increments for point pairs")
    _common(p)
    p.add_argument("--pairs", required=True, help="CSV with columns t,x,s,y; vector x, y use ';'")

    p = sub.add_parser("sample", help="one realization on a lattice")
    _common(p)
    _grid_opts(p, 16, 16)
    p.add_argument("--replicate", type=int, default=0)

    p = sub.add_parser("cap", help="capacity estimate of a target set")
    _common(p)
    _target_opts(p)
    p.add_argument("--n-atoms", type=int, default=400)
    p.add_argument("--levels", type=int, default=3)

    p = sub.add_parser("haus", help="Hausdorff measure cover estimates")
    _common(p)
    _target_opts(p)
    p.add_argument("--eps", type=_floats, default=[0.4, 0.2, 0.1, 0.05, 0.025])

    p = sub.add_parser("hit", help="Monte Carlo hitting probabilities of balls")
    _common(p)
    _grid_opts(p)
    p.add_argument("--radii", type=_floats, default=[0.05, 0.1, 0.2, 0.4])
    p.add_argument("--center", type=_floats, default=None)
    p.add_argument("--replicates", type=int, default=10000)
    p.add_argument("--eta", type=float, default=None, help="enlargement; default from the lattice spacing")
    p.add_argument("--kappa", type=float, default=1.0)

    p = sub.add_parser("verify", help="run the experiment battery or named checks")
    _common(p)
    p.add_argument("--check", action="append", choices=list(verifier.CHECKS), default=None)
    p.add_argument("--json", default=None, help="write the JSON reports here")
    return parser


# -------------------------------------------------------------- configuration

def read_config(path, parser):
    """Parse ``key = value`` lines, returning typed defaults for ``parser``."""
    actions = {a.dest: a for a in parser._actions if a.dest not in ("help", "config")}
    out = {}
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}")
    with fh:
        for n, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{n}: expected 'key = value', got {raw.strip()!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            dest = key.replace("-", "_")
            if dest not in actions:
                raise UsageError(f"{path}:{n}: unknown field {key!r}")
            act = actions[dest]
            try:
                if act.nargs == 0:
                    out[dest] = value.lower() in ("1", "true", "yes", "on")
                elif isinstance(act, argparse._AppendAction):
                    out[dest] = [v.strip() for v in value.split(",") if v.strip()]
                else:
                    out[dest] = act.type(value) if act.type else value
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise UsageError(f"{path}:{n}: bad value for {key!r}: {exc}")
            if act.choices is not None:
                vals = out[dest] if isinstance(out[dest], list) else [out[dest]]
                bad = [v for v in vals if v not in act.choices]
                if bad:
                    raise UsageError(f"{path}:{n}: {key!r} must be one of {', '.join(map(str, act.choices))}")
    return out


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        subparser = parser._subparsers._group_actions[0].choices[args.command]
        subparser.set_defaults(**read_config(args.config, subparser))
        args = parser.parse_args(argv)
    if args.seed is None:
        env = os.environ.get("WAVEHIT_SEED")
        try:
            args.seed = int(env) if env not in (None, "") else 0
        except ValueError:
            raise UsageError(f"WAVEHIT_SEED must be an integer, got {env!r}")
    if args.threads is None:
        args.threads = os.cpu_count() or 1
    return args


def resolved(args):
    return {k: (",".join(map(repr, v)) if isinstance(v, list) else v)
            for k, v in sorted(vars(args).items()) if k not in ("config", "threads", "out")}


def _model(args):
    return ModelParams(args.k, args.beta, args.d, args.t0, args.T)


def _quad(args):
    return QuadratureSpec(rel_tol=args.rel_tol)


def _box(args):
    if args.box is None:
        return GridBox(args.t0, args.T, [0.0] * args.k, [1.0] * args.k)
    b = args.box
    if len(b) == 4:
        return GridBox(b[0], b[1], [b[2]] * args.k, [b[3]] * args.k)
    if len(b) == 2 + 2 * args.k:
        return GridBox(b[0], b[1], b[2::2], b[3::2])
    raise UsageError(f"--box needs 4 or {2 + 2 * args.k} numbers, got {len(b)}")


def _target(args):
    d = args.d
    center = args.center or [0.0] * d
    if len(center) != d:
        raise UsageError(f"--center needs {d} coordinates")
    if args.target == "ball":
        return Ball(center, args.radius)
    if args.target == "point":
        return Point(center)
    if args.target == "segment":
        lo, hi = (args.lo or [0.0])[0], (args.hi or [1.0])[0]
        return Box([lo] + [0.0] * (d - 1), [hi] + [0.0] * (d - 1))
    if args.target == "box":
        return Box(args.lo or [0.0] * d, args.hi or [1.0] * d)
    lo, hi = (args.lo or [0.0])[0], (args.hi or [1.0])[0]
    return CantorDust((lo, hi), 1.0 / 3.0, args.depth, d)


def _gamma(args):
    if args.gamma is not None:
        return args.gamma
    return verifier.hitting_index(args.k, args.beta, args.d)


# ------------------------------------------------------------------ output

class _Sink:
    """A path for the module writers; copies to stdout when the target is '-'."""

    def __init__(self, out):
        self.out = out
        self.path = out if out != "-" else None

    def __enter__(self):
        if self.path is None:
            import tempfile
            fd, self.path = tempfile.mkstemp(suffix=".csv")
            os.close(fd)
        return self.path

    def __exit__(self, *exc):
        if self.out == "-":
            with open(self.path, encoding="utf-8") as fh:
                sys.stdout.write(fh.read())
            os.unlink(self.path)
        return False


def _write_rows(out, meta, header, rows):
    buf = io.StringIO(newline="")
    for key in sorted(meta):
        buf.write(f"# {key}: {meta[key]}\n")
    w = csv.writer(buf)
    w.writerow(header)
    w.writerows(rows)
    if out == "-":
        sys.stdout.write(buf.getvalue())
    else:
        with open(out, "w", newline="", encoding="utf-8") as fh:
            fh.write(buf.getvalue())


# ------------------------------------------------------------- subcommands

def _read_pairs(path, k):
    def vec(s):
        v = [float(c) for c in s.split(";")]
        if len(v) != k:
            raise UsageError(f"{path}: point {s!r} has {len(v)} coordinates, expected {k}")
        return v
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read pairs {path}: {exc.strerror}")
    with fh:
        rows = [r for r in csv.reader(line for line in fh if not line.startswith("#")) if r]
    if not rows or [c.strip() for c in rows[0]] != ["t", "x", "s", "y"]:
        raise UsageError(f"{path}: header must be t,x,s,y")
    t, x, s, y = [], [], [], []
    for n, r in enumerate(rows[1:], 2):
        if len(r) != 4:
            raise UsageError(f"{path}:{n}: expected 4 fields")
        try:
            row = float(r[0]), vec(r[1]), float(r[2]), vec(r[3])
        except ValueError:
            raise UsageError(f"{path}:{n}: non-numeric field")
        for col, v in zip((t, x, s, y), row):
            col.append(v)
    return np.array(t), np.array(x), np.array(s), np.array(y), rows[1:]


def cmd_cov(args):
    model, quad = _model(args), _quad(args)
    t, x, s, y, raw = _read_pairs(args.pairs, model.k)
    cov, _ = covariance_array(t, x, s, y, model, quad)
    vp, _ = variance_array(t, model, quad)
    vq, _ = variance_array(s, model, quad)
    dsq, _ = metric_sq_array(t, x, s, y, model, quad)
    rows = [[r[0], r[1], r[2], r[3], repr(float(c)), repr(float(a)), repr(float(b)), repr(float(max(e, 0.0)))]
            for r, c, a, b, e in zip(raw, cov, vp, vq, dsq)]
    _write_rows(args.out, resolved(args), ["t", "x", "s", "y", "cov", "var_p", "var_q", "delta_sq"], rows)
    return EXIT_OK


def cmd_sample(args):
    model = _model(args)
    grid = build_grid(_box(args), args.nt, args.nx)
    sample = sample_field(assemble_cov(grid, model, _quad(args)), model.d, args.seed, args.replicate)
    with _Sink(args.out) as path:
        write_sample_csv(path, sample, grid, resolved(args))
    return EXIT_OK


def cmd_cap(args):
    A = _target(args)
    spec = cap.RieszKernelSpec.for_set(_gamma(args), A)
    est = cap.estimate_capacity(A, spec, n_atoms=args.n_atoms, refinement_levels=args.levels)
    rows = [[repr(float(h)), repr(float(v)), repr(est.value)] for h, v in est.trace]
    meta = resolved(args) | {"gamma_used": repr(spec.gamma), "log_constant_c": repr(spec.log_constant_c)}
    _write_rows(args.out, meta, ["h", "level_value", "value"], rows)
    return EXIT_OK


def cmd_haus(args):
    est = haus.estimate_hausdorff(_target(args), _gamma(args), args.eps)
    with _Sink(args.out) as path:
        haus.write_estimates_csv(path, [est], resolved(args))
    return EXIT_OK


def cmd_hit(args):
    model = _model(args)
    grid = build_grid(_box(args), args.nt, args.nx)
    eta = args.eta if args.eta is not None else cell_enlargement(grid, model, args.kappa)
    if eta < 0:
        raise UsageError("--eta must be >= 0")
    center = args.center or [0.0] * model.d
    if len(center) != model.d:
        raise UsageError(f"--center needs {model.d} coordinates")
    cov = assemble_cov(grid, model, _quad(args))
    dist = min_distances(model, grid, [Ball(center, r) for r in args.radii], args.replicates, args.seed,
                         cov=cov, threads=args.threads)
    rows = [(r, estimate_from_hits(np.count_nonzero(dj <= eta), args.replicates, eta))
            for r, dj in zip(args.radii, dist)]
    with _Sink(args.out) as path:
        write_hits_csv(path, rows, resolved(args) | {"eta_used": repr(eta)})
    return EXIT_OK


def cmd_verify(args):
    reports = verifier.run_battery(args.check, seed=args.seed)
    out = sys.stdout
    for r in reports:
        out.write(r.line() + "\n")
        if "table" in r.diagnostics:
            for case, row in sorted(r.diagnostics["table"].items()):
                out.write(f"    (k, beta) = ({case}): full {row['full']}, fixed time {row['fixed_time']}, "
                          f"fixed space {row['fixed_space']}\n")
        for c in r.constants:
            out.write(f"    {c.name} = {c.value:.6g}\n")
    payload = json.dumps({"config": resolved(args), "reports": [r.to_dict() for r in reports]},
                         sort_keys=True, indent=2)
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(payload + "\n")
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


COMMANDS = {"cov": cmd_cov, "sample": cmd_sample, "cap": cmd_cap, "haus": cmd_haus,
            "hit": cmd_hit, "verify": cmd_verify}


def main(argv=None):
    try:
        args = parse_args(sys.argv[1:] if argv is None else argv)
        return COMMANDS[args.command](args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except (UsageError, ParameterError) as exc:
        sys.stderr.write(f"wavehit: error: {exc}\n")
        return EXIT_USAGE
    except WavehitError as exc:
        sys.stderr.write(f"wavehit: numerical failure: {exc}\n")
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
