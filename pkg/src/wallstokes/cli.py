"""Command-line interface.

Subcommands: evaluate (CSV in, CSV out), verify-noslip, verify-periodic,
rpy-field, bench. All data files are CSV with a mandatory header row and 17
significant digits, so fixed seeds reproduce outputs byte for byte; wall
times go only to the manifest / timing files.

Exit codes: 0 success, 1 invalid input, 2 numerical-contract violation
(neutrality, coincident points, missing derivative orders), 64 usage error.
"""
import argparse
import csv
import hashlib
import sys
import time
from pathlib import Path

import numpy as np

from .errors import (CoincidentPoints, MissingOutputOrder, ModeMismatch,
                     NeutralityViolation, SourceBelowWall)
from .harness import (ExperimentConfig, generate_sources, noslip_residual,
                      periodicity_error, rpy_field_grid, velocity_field)
from .images import (StokesSource, build_rpy_sums_mono, build_rpy_sums_poly,
                     build_stokeslet_sums, build_laplacian_sums,
                     combine_laplacian, combine_rpy_mono, combine_rpy_poly,
                     combine_stokeslet)
from .summation import (NEUTRALITY_RTOL, PeriodicityConfig, direct_sum,
                        evaluate as evaluate_request, set_thread_count)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NUMERICAL = 2
EXIT_USAGE = 64

KERNEL_CHOICES = ("stokeslet", "laplacian", "rpy-mono", "rpy-poly")


class _Parser(argparse.ArgumentParser):
    """argparse parser that reports usage errors with exit code 64."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _write_manifest(path, entries):
    with open(path, "w") as fh:
        for key in sorted(entries):
            fh.write(f"{key}={_fmt(entries[key])}\n")


def _read_table(path, required, optional=()):
    """Read a headered CSV into columns; missing optional columns are None."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        for name in required:
            if name not in header:
                raise ValueError(f"{path}: missing column {name!r}")
        rows = [row for row in reader if row and any(c.strip() for c in row)]
    if not rows:
        raise ValueError(f"{path}: no data rows")
    data = np.array([[float(c) for c in row] for row in rows])
    if data.shape[1] != len(header):
        raise ValueError(f"{path}: ragged rows")
    cols = {name: data[:, header.index(name)] for name in header}
    out = [cols[name] for name in required]
    out += [cols.get(name) for name in optional]
    return out


def read_sources_csv(path):
    """Sources file: columns x1,x2,x3,f1,f2,f3 and optional radius b."""
    x1, x2, x3, f1, f2, f3, b = _read_table(
        path, ("x1", "x2", "x3", "f1", "f2", "f3"), ("b",))
    pos = np.column_stack([x1, x2, x3])
    force = np.column_stack([f1, f2, f3])
    radii = b if b is not None else np.zeros(pos.shape[0])
    return [StokesSource(pos[i], force[i], radii[i])
            for i in range(pos.shape[0])]


def read_targets_csv(path):
    """Targets file: columns x1,x2,x3 and optional radius a."""
    x1, x2, x3, a = _read_table(path, ("x1", "x2", "x3"), ("a",))
    pos = np.column_stack([x1, x2, x3])
    radii = a if a is not None else np.zeros(pos.shape[0])
    return pos, radii


def _periodicity(args, shells=None):
    n_shell = 0
    if shells:
        n_shell = max(shells)
    return PeriodicityConfig(mode=args.mode, box1=args.box[0],
                             box2=args.box[1], n_shell=n_shell)


def _parse_box(text):
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected L1,L2")
    return tuple(float(p) for p in parts)


def _parse_shells(text):
    try:
        shells = [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("expected a comma-separated "
                                         "integer list") from None
    if not shells or any(s < 0 for s in shells):
        raise argparse.ArgumentTypeError("shell counts must be >= 0")
    return shells


def _add_common(sub):
    sub.add_argument("--kernel", choices=KERNEL_CHOICES, default="stokeslet")
    sub.add_argument("--mode", choices=("none", "sp", "dp"), default="none")
    sub.add_argument("--box", type=_parse_box, default=(1.0, 1.0),
                     metavar="L1,L2")
    sub.add_argument("--shells", type=_parse_shells, default=[4, 8, 16, 32],
                     metavar="N,N,...")
    sub.add_argument("--n", type=int, default=500,
                     help="number of random sources")
    sub.add_argument("--mesh", type=int, default=33,
                     help="Chebyshev nodes per face edge")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--radius", type=float, default=0.1,
                     help="particle radius for the rpy variants")
    sub.add_argument("--out", type=Path, default=Path("."),
                     help="output directory")
    sub.add_argument("--threads", type=int, default=1)


def build_parser():
    parser = _Parser(prog="wallstokes",
                     description="Image systems for Stokes flow above a "
                                 "no-slip wall")
    subs = parser.add_subparsers(dest="command", required=True,
                                 parser_class=_Parser)

    p_eval = subs.add_parser("evaluate",
                             help="velocities at CSV targets from CSV sources")
    p_eval.add_argument("--sources", type=Path, required=True)
    p_eval.add_argument("--targets", type=Path, required=True)
    _add_common(p_eval)

    p_ns = subs.add_parser("verify-noslip",
                           help="wall residual of a seeded random cloud")
    _add_common(p_ns)

    p_per = subs.add_parser("verify-periodic",
                            help="face-mismatch convergence over a shell sweep")
    _add_common(p_per)

    p_rpy = subs.add_parser("rpy-field",
                            help="finite-size velocity map on a vertical plane")
    p_rpy.add_argument("--source-radius", type=float, default=0.2,
                       help="radius of the forced source particle")
    p_rpy.add_argument("--force", choices=("x", "z"), default="x")
    p_rpy.add_argument("--grid", type=int, default=41,
                       help="grid points across the plane width")
    _add_common(p_rpy)

    p_bench = subs.add_parser("bench",
                              help="direct-backend throughput per kernel")
    _add_common(p_bench)
    return parser


def _manifest_common(args, extra=None):
    entries = {
        "command": args.command,
        "kernel": getattr(args, "kernel", ""),
        "mode": getattr(args, "mode", "none"),
        "box1": args.box[0],
        "box2": args.box[1],
        "shells": ",".join(str(s) for s in args.shells),
        "n": args.n,
        "mesh": args.mesh,
        "seed": args.seed,
        "radius": args.radius,
        "threads": args.threads,
        "neutrality_rtol": NEUTRALITY_RTOL,
    }
    if extra:
        entries.update(extra)
    return entries


def _cmd_evaluate(args):
    sources = read_sources_csv(args.sources)
    positions, radii = read_targets_csv(args.targets)
    shells = args.shells if args.mode != "none" else None
    periodicity = _periodicity(args, shells)
    t0 = time.perf_counter()
    pressure = None
    if args.kernel == "stokeslet":
        requests = build_stokeslet_sums(sources, positions)
        outs = [evaluate_request(r, periodicity) for r in requests]
        vel = combine_stokeslet(positions, outs)
    elif args.kernel == "laplacian":
        requests = build_laplacian_sums(sources, positions)
        outs = [evaluate_request(r, periodicity) for r in requests]
        flow = combine_laplacian(positions, outs)
        vel, pressure = flow.velocity, flow.pressure
    elif args.kernel == "rpy-mono":
        requests = build_rpy_sums_mono(sources, positions, args.radius)
        outs = [evaluate_request(r, periodicity) for r in requests]
        vel = combine_rpy_mono(positions, outs, args.radius)
    else:
        targets = (positions, radii)
        requests = build_rpy_sums_poly(sources, targets)
        outs = [evaluate_request(r, periodicity) for r in requests]
        vel = combine_rpy_poly(targets, outs)
    elapsed = time.perf_counter() - t0
    header = ["x1", "x2", "x3", "u1", "u2", "u3"]
    rows = np.column_stack([positions, vel])
    if pressure is not None:
        header.append("p")
        rows = np.column_stack([rows, pressure])
    args.out.mkdir(parents=True, exist_ok=True)
    _write_csv(args.out / "velocities.csv", header, rows)
    _write_manifest(args.out / "manifest.txt",
                    _manifest_common(args, {
                        "sources_file": args.sources,
                        "targets_file": args.targets,
                        "n_sources": len(sources),
                        "n_targets": positions.shape[0],
                        "timing_elapsed_s": elapsed,
                    }))
    return EXIT_OK


def _config_from(args, mode_override=None, n_shell=0):
    mode = mode_override if mode_override is not None else args.mode
    periodicity = PeriodicityConfig(mode=mode, box1=args.box[0],
                                    box2=args.box[1], n_shell=n_shell)
    return ExperimentConfig(variant=args.kernel, periodicity=periodicity,
                            n_sources=args.n, seed=args.seed, mesh=args.mesh,
                            radius=args.radius if args.kernel.startswith("rpy")
                            else 0.0)


def _cmd_verify_noslip(args):
    n_shell = max(args.shells) if args.mode != "none" else 0
    config = _config_from(args, n_shell=n_shell)
    t0 = time.perf_counter()
    resid = noslip_residual(config)
    elapsed = time.perf_counter() - t0
    args.out.mkdir(parents=True, exist_ok=True)
    _write_csv(args.out / "report.csv",
               ["kernel", "mode", "n", "mesh", "seed", "n_shell",
                "max_noslip"],
               [[args.kernel, args.mode, args.n, args.mesh, args.seed,
                 n_shell, resid]])
    _write_manifest(args.out / "manifest.txt",
                    _manifest_common(args, {
                        "max_noslip": resid,
                        "timing_elapsed_s": elapsed,
                    }))
    return EXIT_OK


def _cmd_verify_periodic(args):
    if args.mode == "none":
        raise ModeMismatch("verify-periodic needs --mode sp or dp")
    config = _config_from(args, n_shell=max(args.shells))
    t0 = time.perf_counter()
    report = periodicity_error(config, shell_counts=sorted(set(args.shells)))
    elapsed = time.perf_counter() - t0
    rows = []
    for n_shell, eps_x, eps_y, noslip, delta in report.trace:
        rows.append([n_shell,
                     "" if eps_x is None else _fmt(eps_x),
                     "" if eps_y is None else _fmt(eps_y),
                     _fmt(noslip),
                     "" if delta is None else _fmt(delta)])
    args.out.mkdir(parents=True, exist_ok=True)
    _write_csv(args.out / "trace.csv",
               ["n_shell", "eps_l2_x", "eps_l2_y", "max_noslip", "delta"],
               rows)
    _write_manifest(args.out / "manifest.txt",
                    _manifest_common(args, {
                        "max_noslip": report.max_noslip,
                        "eps_l2_x": report.eps_l2_x,
                        "eps_l2_y": "" if report.eps_l2_y is None
                                    else report.eps_l2_y,
                        "timing_elapsed_s": elapsed,
                    }))
    return EXIT_OK


def _cmd_rpy_field(args):
    b = args.source_radius
    force = np.array([1.0, 0.0, 0.0]) if args.force == "x" \
        else np.array([0.0, 0.0, 1.0])
    source = StokesSource(np.array([0.0, 0.0, 2.0 * b]), force, b)
    t0 = time.perf_counter()
    pos, vel, overlap = rpy_field_grid(source, args.radius,
                                       n_width=args.grid,
                                       n_height=max(2, args.grid // 2))
    elapsed = time.perf_counter() - t0
    rows = [[pos[i, 0], pos[i, 1], pos[i, 2], vel[i, 0], vel[i, 1],
             vel[i, 2], int(overlap[i])] for i in range(pos.shape[0])]
    args.out.mkdir(parents=True, exist_ok=True)
    _write_csv(args.out / "field.csv",
               ["x1", "x2", "x3", "u1", "u2", "u3", "overlap"], rows)
    _write_manifest(args.out / "manifest.txt",
                    _manifest_common(args, {
                        "source_radius": b,
                        "force": args.force,
                        "timing_elapsed_s": elapsed,
                    }))
    return EXIT_OK


def _cmd_bench(args):
    sources = generate_sources(args.n, args.seed, radius=args.radius,
                               polydisperse=True)
    probes = generate_sources(args.n, args.seed + 1)
    x = np.array([t.position for t in probes])
    requests = build_rpy_sums_poly(sources, x)
    labels = ["stokeslet-pair", "stokeslet-sized", "monopole", "monopole-z",
              "dipole", "dipole-z", "quadrupole"]
    data_rows = []
    timing_lines = []
    for label, request in zip(labels, requests):
        direct_sum(request)  # warm the jit before timing
        t0 = time.perf_counter()
        out = direct_sum(request)
        elapsed = time.perf_counter() - t0
        pairs = request.n_sources * request.n_targets
        blob = b"".join(np.ascontiguousarray(arr).tobytes()
                        for arr in (out.value, out.gradient, out.hessian,
                                    out.laplacian) if arr is not None)
        digest = hashlib.sha256(blob).hexdigest()[:16]
        data_rows.append([label, request.n_sources, request.n_targets,
                          pairs, digest])
        timing_lines.append((label, elapsed, pairs / max(elapsed, 1e-12)))
    args.out.mkdir(parents=True, exist_ok=True)
    _write_csv(args.out / "bench.csv",
               ["kernel_sum", "n_sources", "n_targets", "pairs", "sha256_16"],
               data_rows)
    with open(args.out / "bench_timing.txt", "w") as fh:
        for label, elapsed, rate in timing_lines:
            fh.write(f"{label}: {elapsed:.6f} s, {rate:.3e} pairs/s\n")
    _write_manifest(args.out / "manifest.txt", _manifest_common(args))
    return EXIT_OK


_COMMANDS = {
    "evaluate": _cmd_evaluate,
    "verify-noslip": _cmd_verify_noslip,
    "verify-periodic": _cmd_verify_periodic,
    "rpy-field": _cmd_rpy_field,
    "bench": _cmd_bench,
}


def cli_run(argv):
    """Parse argv, run the selected subcommand, and return an exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        set_thread_count(args.threads)
        return _COMMANDS[args.command](args)
    except (NeutralityViolation, CoincidentPoints, MissingOutputOrder) as exc:
        print(f"wallstokes: numerical contract violated: {exc}",
              file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, OSError, ModeMismatch, SourceBelowWall) as exc:
        print(f"wallstokes: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main():
    sys.exit(cli_run(sys.argv[1:]))


if __name__ == "__main__":
    main()
