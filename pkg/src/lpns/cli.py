"""Command-line driver: run | analyze | verify.

Exit codes: 0 ok, 1 usage/config error, 2 numerical failure, 3 I/O failure.
"""
import argparse
import logging
import sys
from pathlib import Path

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3

log = logging.getLogger("lpns")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


RUN_KEYS = (
    ("n", int, "grid points per axis (power of two, 8..512)"),
    ("nu", float, "viscosity"),
    ("t-end", float, "final time"),
    ("dt", float, "time step (cap on the step when --cfl is set)"),
    ("cfl", float, "adaptive CFL target in (0, 0.5]; 0 keeps dt fixed"),
    ("ic", str, "initial condition: taylor-green | random"),
    ("seed", int, "seed of the random initial condition"),
    ("amplitude", float, "velocity scale of the initial condition"),
    ("slope", float, "spectral slope of the random initial condition"),
    ("k-peak", float, "Gaussian cutoff wavenumber of the random initial condition"),
    ("p-min", int, "lowest monitored band"),
    ("p-max", int, "highest monitored band (-1: q_max - 1)"),
    ("b", int, "band offset of the iteration check"),
    ("c-bkm", float, "length factor of the BKM window (0: 4^b)"),
    ("m", str, "Lebesgue exponents in [2, 3], comma separated"),
    ("alpha", float, "decay exponent used by the iteration check"),
    ("delta", float, "smallness constant of the flux-window check"),
    ("sample-every", int, "steps between diagnostic samples"),
    ("snapshot-every", int, "steps between snapshots (0: at every sample)"),
    ("out-dir", str, "output directory"),
)


def build_parser():
    ap = _Parser(prog="lpns", description="Spectral Navier-Stokes runs with Littlewood-Paley diagnostics.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)

    r = sub.add_parser("run", help="integrate from an initial condition and write the report")
    r.add_argument("--config", type=Path)
    for key, typ, text in RUN_KEYS:
        r.add_argument(f"--{key}", type=typ, default=None, help=text)
    r.add_argument("--graded", action="store_true", default=None, help="sample densely towards t_end")
    r.add_argument("--no-figures", action="store_true")
    r.add_argument("--no-snapshots", action="store_true")

    a = sub.add_parser("analyze", help="rebuild the ledger from snapshots and write the report")
    a.add_argument("--snapshots", type=Path, required=True)
    a.add_argument("--out-dir", type=Path, required=True)
    a.add_argument("--b", type=int)
    a.add_argument("--c-bkm", type=float)
    a.add_argument("--m", type=str)
    a.add_argument("--p-min", type=int)
    a.add_argument("--p-max", type=int)
    a.add_argument("--t-ref", type=float)
    a.add_argument("--alpha", type=float)
    a.add_argument("--delta", type=float)
    a.add_argument("--no-figures", action="store_true")

    v = sub.add_parser("verify", help="run the identity/oracle self-checks")
    v.add_argument("--n", type=int, choices=(8, 16, 32), default=8)
    v.add_argument("--seed", type=int, default=0)
    return ap


def _figures(out_dir):
    from .plotting import render_figures

    for p in render_figures(out_dir):
        log.info("figure %s", p)


def cmd_run(args):
    from .config import load_config
    from .driver import RunAborted, run
    from .report import write_report

    flags = {k.replace("-", "_"): getattr(args, k.replace("-", "_")) for k, _, _ in RUN_KEYS}
    flags["graded"] = args.graded
    cfg = load_config(args.config, flags)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        res = run(cfg, snapshots=not args.no_snapshots)
    except RunAborted as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        if exc.snapshot is not None:
            print(f"last good state written to {exc.snapshot}", file=sys.stderr)
        write_report(exc.ledger, out, cfg.items() + [("status", "aborted")], alpha=cfg.alpha, delta=cfg.delta)
        return EXIT_NUMERIC
    write_report(res.ledger, out, cfg.items() + [("status", "ok")], alpha=cfg.alpha, delta=cfg.delta)
    if not args.no_figures:
        _figures(out)
    print(f"t = {res.state.t:.6g} after {res.state.step_count} steps; {len(res.ledger)} samples; report in {out}")
    return EXIT_OK


def _meta_defaults(snap_dir):
    from .io import read_key_values

    for cand in (snap_dir.parent / "run_meta.txt", snap_dir / "run_meta.txt"):
        if cand.is_file():
            return read_key_values(cand)
    return {}


def cmd_analyze(args):
    from .config import _floats
    from .driver import analyze_directory
    from .io import ConfigError, list_snapshots, read_snapshot
    from .lpbank import q_max_for
    from .report import write_report

    meta = _meta_defaults(args.snapshots)

    def pick(name, key, conv, default):
        v = getattr(args, name)
        if v is not None:
            return conv(v)
        if key in meta and meta[key] not in ("", "nan"):
            return conv(meta[key])
        return default

    paths = list_snapshots(args.snapshots)
    if not paths:
        raise FileNotFoundError(f"no snapshots in {args.snapshots}")
    n = read_snapshot(paths[0]).u.grid.n
    qm = q_max_for(n)
    b = pick("b", "ledger_b", int, 2)
    c_bkm = pick("c_bkm", "ledger_c_bkm", float, float(4**b))
    m = pick("m", "ledger_m", _floats, (2.0,))
    if "monitored_p" in meta and args.p_min is None and args.p_max is None:
        ps = tuple(int(x) for x in meta["monitored_p"].split(",") if x)
    else:
        lo = args.p_min if args.p_min is not None else 0
        hi = args.p_max if args.p_max is not None else qm - 1
        ps = tuple(range(lo, hi + 1))
    if not ps or ps[0] < 0 or ps[-1] > qm:
        raise ConfigError(f"monitored bands {ps} outside [0, {qm}]")
    for x in m:
        if not 2.0 <= x <= 3.0:
            raise ConfigError(f"Lebesgue exponent m must lie in [2, 3], got {x}")
    alpha = pick("alpha", "alpha", float, 1.5)
    delta = pick("delta", "delta", float, 0.0)
    ledger = analyze_directory(args.snapshots, ps, b, c_bkm, m)
    items = [("snapshots", str(args.snapshots)), ("n", n), ("alpha", repr(alpha)), ("delta", repr(delta))]
    write_report(ledger, args.out_dir, items, t_ref=args.t_ref, alpha=alpha, delta=delta)
    if not args.no_figures:
        _figures(args.out_dir)
    print(f"analysed {len(paths)} snapshots; report in {args.out_dir}")
    return EXIT_OK


def cmd_verify(args):
    from .verify import run_suite

    return EXIT_OK if run_suite(args.n, args.seed) else EXIT_NUMERIC


def main(argv=None):
    from .io import ConfigError, SnapshotError
    from .solver import NumericalError

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    handler = {"run": cmd_run, "analyze": cmd_analyze, "verify": cmd_verify}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (OSError, SnapshotError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
