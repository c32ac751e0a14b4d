"""Command-line front end: single estimations, benchmark sweeps, a demo.

Artifacts are plain text. Matrix files hold one dimension line followed
by one `row col re im` line per entry with 17 significant digits, which
round-trips binary64 exactly. Benchmark tables are CSV with a fixed
header and 10 significant digits. Every file artifact gets a JSON
manifest written next to it (same path plus ".manifest.json"); the
manifest carries the timestamp so the data files stay byte-reproducible.

Exit codes: 0 success, 2 usage error, 3 file parse error, 4 numerical
failure, 5 I/O error. The environment variable EQPT_SEED, when set,
overrides the seed for every command.
"""

import argparse
import dataclasses
import json
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .benchmark import (
    DEFAULT_WIDTHS,
    METHODS,
    SweepConfig,
    derive_seed,
    estimate_process,
    run_trial,
    sweep,
)
from .linalg import NumericalError, random_unitary
from .validation import as_complex_matrix, check_unitary

CSV_HEADER = "method,qubits,dimension,width,trials,mean_nrmse,std_nrmse,mean_time_s"

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_NUMERICAL = 4
EXIT_IO = 5


class ParseError(Exception):
    """Malformed input file; message carries the offending line number."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = f"{path}:{line}: " if line is not None else (f"{path}: " if path else "")
        super().__init__(where + message)


class MatrixFormatError(ParseError):
    pass


class ConfigFormatError(ParseError):
    pass


# ---------------------------------------------------------------- matrix files


def write_matrix_file(path, matrix):
    """Serialize a square complex matrix; entries are 1-based, row-major."""
    m = as_complex_matrix(matrix, "matrix")
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("matrix file format holds square matrices only")
    d = m.shape[0]
    lines = [str(d)]
    for r in range(d):
        for c in range(d):
            z = m[r, c]
            lines.append(f"{r + 1} {c + 1} {z.real:.17g} {z.imag:.17g}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def read_matrix_file(path):
    """Parse a matrix file; blank lines and '#' comment lines are skipped."""
    text = Path(path).read_text(encoding="ascii")
    d = None
    seen = set()
    matrix = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if d is None:
            try:
                d = int(line)
            except ValueError:
                raise MatrixFormatError(
                    f"expected the dimension as a bare integer, got {line!r}",
                    path=path,
                    line=lineno,
                ) from None
            if d < 1:
                raise MatrixFormatError(
                    f"dimension must be positive, got {d}", path=path, line=lineno
                )
            matrix = np.zeros((d, d), dtype=complex)
            continue
        fields = line.split()
        if len(fields) != 4:
            raise MatrixFormatError(
                f"expected 4 fields `row col re im`, got {len(fields)}",
                path=path,
                line=lineno,
            )
        try:
            r, c = int(fields[0]), int(fields[1])
            re, im = float(fields[2]), float(fields[3])
        except ValueError as exc:
            raise MatrixFormatError(str(exc), path=path, line=lineno) from None
        if not (1 <= r <= d and 1 <= c <= d):
            raise MatrixFormatError(
                f"indices ({r}, {c}) outside 1..{d}", path=path, line=lineno
            )
        if (r, c) in seen:
            raise MatrixFormatError(
                f"duplicate entry for ({r}, {c})", path=path, line=lineno
            )
        seen.add((r, c))
        matrix[r - 1, c - 1] = complex(re, im)
    if d is None:
        raise MatrixFormatError("file holds no dimension line", path=path, line=1)
    if len(seen) != d * d:
        raise MatrixFormatError(
            f"expected {d * d} entries, found {len(seen)}", path=path
        )
    return matrix


# ------------------------------------------------------------------- artifacts


def format_csv(summaries):
    rows = [CSV_HEADER]
    for s in summaries:
        rows.append(
            ",".join(
                [
                    s.method,
                    str(s.qubits),
                    str(s.dimension),
                    f"{s.width:.10g}",
                    str(s.trials),
                    f"{s.mean_nrmse:.10g}",
                    f"{s.std_nrmse:.10g}",
                    f"{s.mean_time_s:.10g}",
                ]
            )
        )
    return "\n".join(rows) + "\n"


_PALETTE = (
    "#1f77b4",
    "#d62728",
    "#2ca02c",
    "#9467bd",
    "#ff7f0e",
    "#8c564b",
    "#17becf",
    "#e377c2",
)

_NRMSE_FLOOR = 1e-16  # keeps exact-recovery cells plottable on the log axis


def format_svg(summaries):
    """Line chart of log10(mean_nrmse) against qubit count.

    One series per (method, width), colors cycling through a fixed
    palette; output is a deterministic standalone SVG string.
    """
    series = {}
    for s in summaries:
        series.setdefault((s.method, s.width), []).append(
            (s.qubits, np.log10(max(s.mean_nrmse, _NRMSE_FLOOR)))
        )
    keys = sorted(series)
    width, height = 640, 480
    ml, mr, mt, mb = 60, 200, 20, 45
    xs = sorted({q for pts in series.values() for q, _ in pts})
    ys = [v for pts in series.values() for _, v in pts]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if x_hi == x_lo:
        x_hi = x_lo + 1
    if y_hi == y_lo:
        y_hi = y_lo + 1

    def px(q):
        return ml + (q - x_lo) / (x_hi - x_lo) * (width - ml - mr)

    def py(v):
        return height - mb - (v - y_lo) / (y_hi - y_lo) * (height - mt - mb)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{ml}" y1="{height - mb}" x2="{width - mr}" y2="{height - mb}" '
        'stroke="black"/>',
        f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{height - mb}" stroke="black"/>',
        f'<text x="{(ml + width - mr) / 2:.6g}" y="{height - 8}" '
        'text-anchor="middle" font-size="13">qubits</text>',
        f'<text x="14" y="{(mt + height - mb) / 2:.6g}" text-anchor="middle" '
        f'font-size="13" transform="rotate(-90 14 {(mt + height - mb) / 2:.6g})">'
        "log10(mean NRMSE)</text>",
    ]
    for q in xs:
        out.append(
            f'<text x="{px(q):.6g}" y="{height - mb + 16}" text-anchor="middle" '
            f'font-size="11">{q}</text>'
        )
    for tick in np.linspace(y_lo, y_hi, 5):
        out.append(
            f'<text x="{ml - 6}" y="{py(tick) + 4:.6g}" text-anchor="end" '
            f'font-size="11">{tick:.3g}</text>'
        )
    for idx, key in enumerate(keys):
        color = _PALETTE[idx % len(_PALETTE)]
        pts = sorted(series[key])
        coords = " ".join(f"{px(q):.6g},{py(v):.6g}" for q, v in pts)
        out.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.6"/>'
        )
        for q, v in pts:
            out.append(
                f'<circle cx="{px(q):.6g}" cy="{py(v):.6g}" r="3" fill="{color}"/>'
            )
        label = f"{key[0]}, w={key[1]:.10g}"
        ly = mt + 16 + 16 * idx
        out.append(
            f'<line x1="{width - mr + 10}" y1="{ly - 4}" x2="{width - mr + 34}" '
            f'y2="{ly - 4}" stroke="{color}" stroke-width="1.6"/>'
        )
        out.append(
            f'<text x="{width - mr + 40}" y="{ly}" font-size="12">{label}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_manifest(artifact_path, command, config, base_seed, extra=None):
    """Drop a reproduction manifest next to an artifact.

    The manifest, not the artifact, carries the timestamp: artifacts stay
    byte-identical across reruns of the same configuration.
    """
    payload = {
        "command": command,
        "config": config,
        "tool_version": __version__,
        "base_seed": base_seed,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    if extra:
        payload.update(extra)
    path = str(artifact_path) + ".manifest.json"
    with open(path, "w", encoding="ascii") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


# ---------------------------------------------------------------- config files

_LIST_KEYS = {"methods", "qubits", "widths"}
_INT_KEYS = {"trials", "base_seed", "jobs"}


def parse_config_file(path):
    """Flat `key = value` sweep configuration; '#' starts a comment."""
    text = Path(path).read_text(encoding="ascii")
    cfg = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigFormatError(
                f"expected `key = value`, got {line!r}", path=path, line=lineno
            )
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        try:
            if key == "methods":
                cfg[key] = tuple(v.strip() for v in value.split(",") if v.strip())
            elif key == "qubits":
                cfg[key] = tuple(int(v) for v in value.split(","))
            elif key == "widths":
                cfg[key] = tuple(float(v) for v in value.split(","))
            elif key in _INT_KEYS:
                cfg[key] = int(value)
            else:
                raise ConfigFormatError(
                    f"unknown key {key!r}", path=path, line=lineno
                )
        except ValueError as exc:
            raise ConfigFormatError(str(exc), path=path, line=lineno) from None
    return cfg


# ------------------------------------------------------------------- commands


def _seed_override(default):
    env = os.environ.get("EQPT_SEED")
    return int(env) if env else default


def cmd_estimate(args):
    seed = _seed_override(args.seed)
    if args.matrix_file:
        u = read_matrix_file(args.matrix_file)
        d = u.shape[0]
        qubits = d.bit_length() - 1
        if 2**qubits != d:
            raise ValueError(f"matrix dimension {d} is not a power of two")
        if args.qubits is not None and args.qubits != qubits:
            raise ValueError(
                f"--qubits {args.qubits} contradicts the {d}-dimensional matrix"
            )
        check_unitary(u, name="supplied process matrix")
    else:
        if args.qubits is None:
            raise ValueError("either --qubits or --matrix-file is required")
        qubits = args.qubits
        u = random_unitary(2**qubits, derive_seed(seed, "process"))

    est, record = estimate_process(u, args.method, qubits, args.width, seed)

    write_matrix_file(args.out, est.matrix)
    diag = est.diagnostics
    annotation = [
        f"# method {est.method}",
        f"# nrmse {record.nrmse:.10g}",
        f"# estimator_seconds {record.estimator_seconds:.10g}",
        f"# unitarity_defect {diag.unitarity_defect:.10g}",
        f"# eigen_gaps {' '.join(f'{g:.10g}' for g in diag.eigen_gaps)}",
    ]
    annotation.extend(f"# note {n}" for n in diag.notes)
    with open(args.out, "a", encoding="ascii") as fh:
        fh.write("\n".join(annotation) + "\n")
    write_manifest(
        args.out,
        "estimate",
        {
            "method": args.method,
            "qubits": qubits,
            "width": args.width,
            "seed": seed,
            "matrix_file": args.matrix_file,
            "out": str(args.out),
        },
        seed,
        extra={"nrmse": record.nrmse, "estimator_seconds": record.estimator_seconds},
    )
    print(
        f"method={est.method} d={2**qubits} width={args.width:g} seed={seed} "
        f"nrmse={record.nrmse:.3e} time={record.estimator_seconds:.3f}s -> {args.out}"
    )
    return EXIT_OK


def _sweep_config_from_args(args):
    cfg = {}
    if args.config:
        cfg = parse_config_file(args.config)
    if args.methods:
        cfg["methods"] = tuple(m.strip() for m in args.methods.split(","))
    if args.qubits:
        cfg["qubits"] = tuple(int(q) for q in args.qubits.split(","))
    if args.widths:
        cfg["widths"] = tuple(float(w) for w in args.widths.split(","))
    if args.trials is not None:
        cfg["trials"] = args.trials
    if args.base_seed is not None:
        cfg["base_seed"] = args.base_seed
    if args.jobs is not None:
        cfg["jobs"] = args.jobs
    if "methods" not in cfg or "qubits" not in cfg:
        raise ValueError("a sweep needs methods and qubits (flags or config file)")
    cfg.setdefault("widths", DEFAULT_WIDTHS)
    cfg.setdefault("trials", 20)
    cfg.setdefault("base_seed", 0)
    cfg.setdefault("jobs", 1)
    cfg["base_seed"] = _seed_override(cfg["base_seed"])
    if "eqpt5" in cfg["methods"] and any(q > 10 for q in cfg["qubits"]):
        raise ValueError(
            "eqpt5 sweeps are capped at 10 qubits; run larger sizes individually"
        )
    return SweepConfig(**cfg)


def _print_summaries(summaries, stream=None):
    stream = stream if stream is not None else sys.stdout
    head = f"{'method':<10} {'q':>3} {'d':>5} {'width':>8} {'mean_nrmse':>12} {'std_nrmse':>12} {'time_s':>9}"
    print(head, file=stream)
    print("-" * len(head), file=stream)
    for s in summaries:
        print(
            f"{s.method:<10} {s.qubits:>3} {s.dimension:>5} {s.width:>8g} "
            f"{s.mean_nrmse:>12.4e} {s.std_nrmse:>12.4e} {s.mean_time_s:>9.4f}",
            file=stream,
        )


def cmd_bench(args):
    config = _sweep_config_from_args(args)
    t0 = time.perf_counter()
    _, summaries = sweep(config)
    elapsed = time.perf_counter() - t0
    csv_text = format_csv(summaries)
    Path(args.csv).write_text(csv_text, encoding="ascii")
    cfg_dict = dataclasses.asdict(config)
    write_manifest(args.csv, "bench", cfg_dict, config.base_seed)
    if args.svg:
        Path(args.svg).write_text(format_svg(summaries), encoding="ascii")
        write_manifest(args.svg, "bench", cfg_dict, config.base_seed)
    _print_summaries(summaries)
    print(f"{len(summaries)} cells in {elapsed:.1f}s -> {args.csv}")
    return EXIT_OK


DEMO_CONFIG = SweepConfig(
    methods=("eqpt1", "eqpt2", "eqpt3"),
    qubits=(4, 8),
    widths=(0.0, 1e-3),
    trials=10,
    base_seed=0,
    jobs=1,
)


def cmd_demo(args):
    config = dataclasses.replace(
        DEMO_CONFIG,
        base_seed=_seed_override(DEMO_CONFIG.base_seed),
        jobs=args.jobs if args.jobs is not None else 1,
    )
    _, summaries = sweep(config)
    _print_summaries(summaries)

    by_cell = {(s.method, s.qubits, s.width): s.mean_nrmse for s in summaries}
    print()
    for q in config.qubits:
        one = by_cell[("eqpt1", q, 1e-3)]
        two = by_cell[("eqpt2", q, 1e-3)]
        three = by_cell[("eqpt3", q, 1e-3)]
        print(
            f"q={q}, w=0.001: two-stage improves on single-stage by "
            f"{one / two:.1f}x (eqpt2/eqpt3 ratio {two / three:.2f})"
        )

    bad = [s for s in summaries if s.width == 0.0 and not s.mean_nrmse < 1e-8]
    if bad:
        for s in bad:
            print(
                f"noiseless recovery failed: {s.method} q={s.qubits} "
                f"mean_nrmse={s.mean_nrmse:.3e}",
                file=sys.stderr,
            )
        return EXIT_NUMERICAL
    print("noiseless cells recovered below 1e-8 as required")
    return EXIT_OK


# ----------------------------------------------------------------- entry point


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="eqpt",
        description="Eigenanalysis-based estimation of unitary processes: "
        "single runs, benchmark sweeps, and a self-checking demo.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_est = sub.add_parser("estimate", help="estimate one process and save it")
    p_est.add_argument("--method", required=True, choices=METHODS)
    p_est.add_argument("--qubits", type=int, default=None)
    p_est.add_argument("--width", type=float, default=0.0)
    p_est.add_argument("--seed", type=int, default=0)
    p_est.add_argument(
        "--matrix-file", default=None, help="read the true process from this file"
    )
    p_est.add_argument("--out", default="uhat.txt", help="result file path")
    p_est.set_defaults(func=cmd_estimate)

    p_bench = sub.add_parser("bench", help="run a sweep and emit CSV (and SVG)")
    p_bench.add_argument("--config", default=None, help="key = value sweep file")
    p_bench.add_argument("--methods", default=None, help="comma-separated method ids")
    p_bench.add_argument("--qubits", default=None, help="comma-separated qubit counts")
    p_bench.add_argument("--widths", default=None, help="comma-separated noise widths")
    p_bench.add_argument("--trials", type=int, default=None)
    p_bench.add_argument("--base-seed", type=int, default=None)
    p_bench.add_argument("--jobs", type=int, default=None)
    p_bench.add_argument("--csv", default="bench.csv", help="CSV output path")
    p_bench.add_argument("--svg", default=None, help="optional SVG plot path")
    p_bench.set_defaults(func=cmd_bench)

    p_demo = sub.add_parser("demo", help="small fixed sweep with self-checks")
    p_demo.add_argument("--jobs", type=int, default=None)
    p_demo.set_defaults(func=cmd_demo)
    return parser


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
