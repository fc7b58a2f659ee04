"""Command-line front end.

Exit codes: 0 on success, 1 on invalid input, 2 when a verification check
fails.  Numeric parameters are decimal strings parsed exactly; the default
working precision comes from QTCHAIN_DPS.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath

from . import chain, verify
from .kernels import extended_kernel_row, kernel_compose, kernel_row, kernel_row_float
from .lattice import Configuration, InfiniteConfiguration, Params
from .macdonald import eval as mac_eval
from .qcalc import Precision
from .shapes import DoubleSignature, InfiniteDoubleSignature, Partition, SideSequence, Signature


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse with exit code 1 on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


@dataclass(frozen=True)
class RunConfig:
    params: Params
    precision: Precision
    seed: int = 0
    m_max: int | None = None
    output: str | None = None
    format: str = "json"


# ---------------------------------------------------------------------------
# parsing helpers


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"not a decimal number: {text!r}") from None


def _int_list(text: str | None) -> list[int]:
    if text is None or not text.strip():
        return []
    try:
        return [int(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"not a list of integers: {text!r}") from None


def _signature(text: str | None) -> Signature:
    try:
        return Signature(_int_list(text))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _side(text: str | None) -> SideSequence:
    """'2,1,0;constant' or '3,1;arithmetic;2' or a finite list."""
    if not text:
        return SideSequence()
    parts = text.split(";")
    try:
        rule = parts[1].strip() if len(parts) > 1 else "finite"
        step = int(parts[2]) if len(parts) > 2 else 0
        return SideSequence(tuple(_int_list(parts[0])), rule, step)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _nus(text: str) -> list[Partition]:
    try:
        return [Partition(_int_list(x)) for x in text.split("|")]
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _config(args) -> RunConfig:
    try:
        q = _fraction(args.q)
        zp, zm = _fraction(args.zeta_plus), _fraction(args.zeta_minus)
        if args.tau is not None:
            if args.t is not None:
                raise UsageError("give either --t or --tau, not both")
            params = Params.make(q, tau=args.tau, zeta_plus=zp, zeta_minus=zm)
        else:
            params = Params.make(q, _fraction(args.t or "0.5"), zeta_plus=zp, zeta_minus=zm)
        prec = Precision(args.dps, eps=args.eps) if args.dps is not None else Precision(eps=args.eps)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return RunConfig(params, prec, args.seed, args.m_max, args.output, args.format)


def _configuration(args, cfg: RunConfig) -> Configuration:
    try:
        return Configuration(cfg.params, DoubleSignature(_signature(args.plus), _signature(args.minus)))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# ---------------------------------------------------------------------------
# output


REPORT_FIELDS = ("name", "inputs", "residual", "tolerance", "passed", "runtime", "details")


def emit_report(reports: Sequence[verify.CheckReport], fmt: str = "json", timing: bool = False) -> str:
    """Reports as a JSON array or CSV with a fixed column order."""
    rows = []
    for rep in reports:
        obj = rep.to_json()
        if not timing:
            obj.pop("runtime")
        rows.append({k: obj[k] for k in REPORT_FIELDS if k in obj})
    if fmt == "json":
        return json.dumps(rows, indent=1) + "\n"
    fields = [k for k in REPORT_FIELDS if timing or k != "runtime"]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for row in rows:
        writer.writerow([json.dumps(row[k]) if isinstance(row[k], (dict, list)) else
                         ("true" if row[k] is True else "false" if row[k] is False else row[k]) for k in fields])
    return buf.getvalue()


def _row_output(row, fmt: str) -> str:
    obj = row.to_json()
    if fmt == "json":
        return json.dumps(obj, indent=1) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["plus", "minus", "weight"])
    for atom in obj["atoms"]:
        tgt = atom["target"]
        writer.writerow([" ".join(map(str, tgt["plus"])), " ".join(map(str, tgt["minus"])), atom["weight"]])
    writer.writerow(["tail", "", obj["tail_bound"]])
    return buf.getvalue()


def _table_output(rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(rows, indent=1) + "\n"
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        for r in rows:
            writer.writerow({k: json.dumps(v) if isinstance(v, (list, dict)) else v for k, v in r.items()})
    return buf.getvalue()


def _num(x) -> str:
    return mpmath.nstr(x, mpmath.mp.dps, min_fixed=-mpmath.inf, max_fixed=mpmath.inf) if x else "0"


# ---------------------------------------------------------------------------
# subcommands


def cmd_eval(args, cfg: RunConfig) -> tuple[str, int]:
    nu = Partition(_int_list(args.nu))
    with cfg.precision.context():
        if args.points:
            xs = [mpmath.mpf(_fraction(x).numerator) / _fraction(x).denominator for x in args.points.split(",")]
        else:
            xs = _configuration(args, cfg).values()
        if len(nu) > len(xs):
            value = mpmath.mpf(0)
        else:
            value = mac_eval(nu, xs, cfg.params.qp)
        out = {"nu": list(nu), "N": len(xs), "value": _num(value)}
        if cfg.format == "json":
            return json.dumps(out) + "\n", 0
        return f"nu,N,value\n{' '.join(map(str, nu))},{len(xs)},{out['value']}\n", 0


def cmd_kernel_row(args, cfg: RunConfig) -> tuple[str, int]:
    X = _configuration(args, cfg)
    if args.engine == "float":
        row = kernel_row_float(X, max(cfg.precision.eps, 1e-15), cfg.m_max)
    else:
        row = kernel_row(X, prec=cfg.precision, m_max=cfg.m_max)
    with cfg.precision.context():
        return _row_output(row, cfg.format), 0


def cmd_compose(args, cfg: RunConfig) -> tuple[str, int]:
    X = _configuration(args, cfg)
    row = kernel_compose(X, args.K, prec=cfg.precision, prune=args.prune, engine=args.engine)
    with cfg.precision.context():
        return _row_output(row, cfg.format), 0


def cmd_extended_row(args, cfg: RunConfig) -> tuple[str, int]:
    Xs = _configuration(args, cfg)
    row = extended_kernel_row(Xs, args.N, args.A, prec=cfg.precision)
    with cfg.precision.context():
        if cfg.format == "json":
            obj = row.to_json()
            obj["violating_mass"] = _num(row.violating_mass())
            return json.dumps(obj, indent=1) + "\n", 0
        return _row_output(row, cfg.format), 0


def cmd_sample(args, cfg: RunConfig) -> tuple[str, int]:
    X = _configuration(args, cfg)
    rng = chain.make_rng(cfg.seed)
    if args.row_draws:
        sampler = chain.RowSampler(X, eps=max(cfg.precision.eps, 1e-15))
        counts = sampler.counts(rng, args.row_draws)
        rows = []
        for idx, c in enumerate(counts):
            Y = sampler.target(idx)
            rows.append({"plus": list(Y.dsig.plus), "minus": list(Y.dsig.minus),
                         "weight": repr(float(sampler.weights[idx])), "count": int(c)})
        return _table_output(rows, cfg.format), 0
    cache: dict = {}
    paths = [chain.sample_path(X, rng, prec=cfg.precision, seed=cfg.seed, cache=cache).to_json() for _ in range(args.paths)]
    if cfg.format == "json":
        return json.dumps(paths, indent=1) + "\n", 0
    rows = []
    for i, path in enumerate(paths):
        for lvl in path["levels"]:
            rows.append({"path": i, "level": len(lvl["plus"]) + len(lvl["minus"]),
                         "plus": " ".join(map(str, lvl["plus"])), "minus": " ".join(map(str, lvl["minus"]))})
    return _table_output(rows, cfg.format), 0


def cmd_boundary(args, cfg: RunConfig) -> tuple[str, int]:
    try:
        Xinf = InfiniteConfiguration(InfiniteDoubleSignature(_side(args.plus), _side(args.minus)), cfg.params)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    nus = _nus(args.nus)
    table = chain.boundary_table(Xinf, args.K, _int_list(args.N_list), nus, cfg.precision, args.prune, args.engine)
    with cfg.precision.context():
        rows = [{"nu": list(r["nu"]), "K": r["K"], "N_approx": r["N_approx"],
                 "moment": _num(r["moment"]), "error_band": _num(r["error_band"])} for r in table]
    return _table_output(rows, cfg.format), 0


def _run_entry(entry, prec):
    return verify.run_manifest([entry], prec)[0]


def cmd_verify(args, cfg: RunConfig) -> tuple[str, int]:
    try:
        text = open(args.manifest).read() if args.manifest else verify.suite_text(args.suite)
        entries = verify.load_manifest(text)
    except (OSError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    if args.only:
        entries = [e for e in entries if e[0].startswith(args.only)]
    if args.jobs > 1 and len(entries) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            reports = list(pool.map(_run_entry, entries, [cfg.precision] * len(entries)))
    else:
        reports = verify.run_manifest(entries, cfg.precision)
    code = 0 if all(r.passed for r in reports) else 2
    return emit_report(reports, cfg.format, args.timing), code


# ---------------------------------------------------------------------------


def _common(p: argparse.ArgumentParser, shape: bool = True):
    g = p.add_argument_group("parameters")
    g.add_argument("--q", default="0.5", help="q in (0,1) as a decimal string (default 0.5)")
    g.add_argument("--t", default=None, help="t in (0,1) as a decimal string (default 0.5)")
    g.add_argument("--tau", type=int, default=None, help="set t = q^tau exactly")
    g.add_argument("--zeta-plus", default="1", help="positive lattice anchor (default 1)")
    g.add_argument("--zeta-minus", default="-1", help="negative lattice anchor (default -1)")
    if shape:
        g.add_argument("--plus", default="", help="positive-side signature, e.g. 2,1,0")
        g.add_argument("--minus", default="", help="negative-side signature, e.g. 1,-1")
    r = p.add_argument_group("run")
    r.add_argument("--dps", type=int, default=None, help="significant digits (default QTCHAIN_DPS or 50)")
    r.add_argument("--eps", type=float, default=None, help="truncation tolerance (default 10^-(dps/2))")
    r.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    r.add_argument("--m-max", type=int, default=None, help="fixed straddle depth instead of adaptive truncation")
    r.add_argument("--output", "-o", default=None, help="write to this file instead of standard output")
    r.add_argument("--format", choices=("json", "csv"), default="json", help="output format (default json)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qtchain", description="Extended Gelfand-Tsetlin chain: kernels, sampling and checks.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eval", help="evaluate a Macdonald polynomial")
    _common(p)
    p.add_argument("--nu", required=True, help="partition, e.g. 2,1")
    p.add_argument("--points", default=None, help="comma-separated points (otherwise --plus/--minus)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("kernel-row", help="one row of the cotransition kernel")
    _common(p)
    p.add_argument("--engine", choices=("mp", "float"), default="mp", help="arithmetic for the row (default mp)")
    p.set_defaults(func=cmd_kernel_row)

    p = sub.add_parser("compose", help="row of the composed kernel down to level K")
    _common(p)
    p.add_argument("--K", type=int, required=True, help="target level")
    p.add_argument("--prune", type=float, default=0.0, help="drop intermediate atoms lighter than this")
    p.add_argument("--engine", choices=("mp", "float"), default="mp", help="arithmetic for the rows (default mp)")
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("extended-row", help="row of the extended kernel from a degenerate configuration")
    _common(p)
    p.add_argument("--N", type=int, required=True, help="nominal level (above the number of points)")
    p.add_argument("--A", type=int, default=40, help="insertion depth (default 40)")
    p.set_defaults(func=cmd_extended_row)

    p = sub.add_parser("sample", help="sample paths of the chain, or draws from the top row")
    _common(p)
    p.add_argument("--paths", type=int, default=1, help="number of paths (default 1)")
    p.add_argument("--row-draws", type=int, default=0, help="instead of paths, count this many draws from the top row")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("boundary", help="moments of the composed kernel from an infinite configuration")
    _common(p, shape=False)
    p.add_argument("--plus", default="", help="positive side: prefix[;constant|;arithmetic;step]")
    p.add_argument("--minus", default="", help="negative side, same format")
    p.add_argument("--K", type=int, required=True, help="target level")
    p.add_argument("--N-list", required=True, help="truncation levels, e.g. 3,5,7")
    p.add_argument("--nus", default="1|2|1,1", help="partitions separated by |")
    p.add_argument("--prune", type=float, default=0.0, help="drop intermediate atoms lighter than this")
    p.add_argument("--engine", choices=("mp", "float"), default="mp", help="arithmetic for the rows (default mp)")
    p.set_defaults(func=cmd_boundary)

    p = sub.add_parser("verify", help="run a verification suite")
    _common(p, shape=False)
    p.add_argument("--suite", default="default", help="bundled suite name (default)")
    p.add_argument("--manifest", default=None, help="path to an INI manifest instead of a bundled suite")
    p.add_argument("--only", default=None, help="run only sections whose name starts with this")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    p.add_argument("--timing", action="store_true", help="include runtimes (output is then not reproducible)")
    p.set_defaults(func=cmd_verify)
    return parser


def dispatch(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config(args)
        text, code = args.func(args, cfg)
    except UsageError as exc:
        print(f"qtchain: error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"qtchain: error: {exc}", file=sys.stderr)
        return 1
    if cfg.output:
        try:
            with open(cfg.output, "w") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"qtchain: error: {exc}", file=sys.stderr)
            return 1
    else:
        sys.stdout.write(text)
    return code


def main() -> None:
    try:
        code = dispatch()
        sys.stdout.flush()
    except BrokenPipeError:
        # reader went away (e.g. piped into head); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        code = 1
    sys.exit(code)


if __name__ == "__main__":
    main()
