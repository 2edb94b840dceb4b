"""Command-line front end.

Subcommands cover the codec (encode, decode), the tree instrument
(enumerate), the grid numerics (spectrum-f, spectrum-g, expansion), and
the Monte-Carlo comparison (experiment).  Data goes to stdout (or the
--output file) as CSV or JSON; diagnostics go to stderr.  Exit codes:
0 success, 1 usage error, 2 runtime failure such as non-convergence,
a blown path budget, or an ambiguous codeword.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from .codec import (CodecParams, decode_unambiguous, encode, read_codeword,
                    write_codeword)
from .errors import DactkError
from .harness import ExperimentConfig, run_expansion_experiment
from .search import SearchConfig, SideInfo, enumerate_tree, m_algorithm_decode, path_counts
from .spectrum import (evolve_time_spectrum, expansion_series,
                       solve_path_spectrum, write_grid_csv, write_series_csv)


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage; the contract here reserves 2 for
    # runtime failures, so remap usage problems to 1
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _add_rate_args(p: argparse.ArgumentParser, required: bool = True) -> None:
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--q", type=float,
                   help="interval overlap parameter, 0.5 <= q < 1")
    g.add_argument("--alpha", type=float,
                   help="code rate in bits per symbol; sets q = 2^-alpha")
    p.add_argument("--bits", type=int, default=31, metavar="B",
                   help="coder register width (default: %(default)s)")


def _params_from_args(args) -> CodecParams:
    if args.alpha is not None:
        return CodecParams.from_alpha(args.alpha, bits=args.bits)
    return CodecParams.from_q(args.q, bits=args.bits)


def _add_format_arg(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("csv", "json"), default="csv",
                   help="output format (default: %(default)s)")


def _open_output(args):
    if getattr(args, "output", None):
        return open(args.output, "w"), True
    return sys.stdout, False


def _emit(args, as_csv, as_json) -> None:
    stream, close = _open_output(args)
    try:
        if args.format == "json":
            stream.write(json.dumps(as_json(), sort_keys=True))
            stream.write("\n")
        else:
            as_csv(stream)
    finally:
        if close:
            stream.close()


def _read_bits_text(text: str) -> np.ndarray:
    bits = [c for c in text if not c.isspace()]
    bad = set(bits) - {"0", "1"}
    if bad:
        raise ValueError(f"source text may contain only 0/1, got {sorted(bad)}")
    if not bits:
        raise ValueError("empty source")
    return np.array([int(c) for c in bits], dtype=np.uint8)


def _read_codeword_arg(args):
    if args.input:
        with open(args.input, "rb") as fh:
            return read_codeword(fh)
    return read_codeword(sys.stdin.buffer)


def _cmd_encode(args) -> None:
    params = _params_from_args(args)
    if args.input is not None:
        with open(args.input) as fh:
            x = _read_bits_text(fh.read())
    elif args.len is not None:
        rng = np.random.default_rng(args.seed)
        x = rng.integers(0, 2, size=args.len, dtype=np.uint8)
    else:
        x = _read_bits_text(sys.stdin.read())
    codeword = encode(x, params)
    if args.output:
        with open(args.output, "wb") as fh:
            write_codeword(codeword, fh)
    else:
        write_codeword(codeword, sys.stdout.buffer)
        sys.stdout.buffer.flush()


def _cmd_decode(args) -> None:
    codeword = _read_codeword_arg(args)
    if args.si is not None:
        with open(args.si) as fh:
            y = _read_bits_text(fh.read())
        si = SideInfo(symbols=y, crossover_p=args.p)
        cfg = SearchConfig(max_paths_budget=args.budget, m_paths=args.m_paths,
                           max_depth=max(64, codeword.params.n_symbols))
        x = m_algorithm_decode(codeword, si, cfg)
    else:
        x = decode_unambiguous(codeword)
    out = "".join(map(str, x.tolist())) + "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)


def _cmd_enumerate(args) -> None:
    codeword = _read_codeword_arg(args)
    cfg = SearchConfig(max_paths_budget=args.budget, max_depth=args.depth)
    levels = enumerate_tree(codeword, args.depth, cfg)
    counts = path_counts(levels)

    def as_csv(stream):
        lines = ["i,population"]
        lines.extend(f"{i},{int(c)}" for i, c in enumerate(counts))
        stream.write("\n".join(lines) + "\n")

    _emit(args, as_csv, lambda: {"population": counts.tolist()})


def _cmd_spectrum_f(args) -> None:
    params = _params_from_args(args)
    grid = solve_path_spectrum(params, args.n_cells, tol=args.tol,
                               max_iters=args.max_iters)
    _emit(args, lambda s: write_grid_csv(grid, s),
          lambda: {"n_cells": grid.n_cells, "q": params.q,
                   "values": grid.values.tolist()})


def _cmd_spectrum_g(args) -> None:
    params = _params_from_args(args)
    if args.steps < 1:
        raise ValueError("--steps must be at least 1")
    grid = solve_path_spectrum(params, args.n_cells, tol=args.tol,
                               max_iters=args.max_iters)
    for _ in range(args.steps - 1):
        grid, _gamma = evolve_time_spectrum(grid, params)
    _emit(args, lambda s: write_grid_csv(grid, s),
          lambda: {"n_cells": grid.n_cells, "q": params.q, "steps": args.steps,
                   "values": grid.values.tolist()})


def _cmd_expansion(args) -> None:
    params = _params_from_args(args)
    series = expansion_series(params, args.n_cells, args.depth,
                              tol=args.tol, max_iters=args.max_iters)
    _emit(args, lambda s: write_series_csv(series, s),
          lambda: {"q": params.q,
                   "gamma": series.gamma.tolist(),
                   "population_log2": series.population_log2.tolist(),
                   "entropy_estimate": series.entropy_estimate.tolist()})


def _cmd_experiment(args) -> None:
    params = _params_from_args(args)
    cfg = ExperimentConfig(
        params=params,
        n_symbols=args.len,
        n_trials=args.trials,
        max_depth=args.depth,
        seed=args.seed,
        n_cells=args.n_cells,
        max_paths_budget=args.budget,
    )
    t0 = time.monotonic()
    table = run_expansion_experiment(cfg)
    elapsed = time.monotonic() - t0
    _emit(args, table.to_csv, table.to_dict)
    sidecar = dict(table.metadata)
    sidecar["elapsed_seconds"] = elapsed
    text = json.dumps(sidecar, sort_keys=True)
    if args.output:
        with open(args.output + ".meta.json", "w") as fh:
            fh.write(text + "\n")
    else:
        sys.stderr.write(text + "\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dactk",
                     description="Overlapped-interval arithmetic coding toolkit")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("encode", help="encode a binary source to a codeword")
    _add_rate_args(p)
    p.add_argument("--len", type=int, help="generate a random source of this length")
    p.add_argument("--seed", type=int, default=0,
                   help="seed for --len (default: %(default)s)")
    p.add_argument("--input", help="read the source as 0/1 text from this file "
                                   "(default: stdin unless --len)")
    p.add_argument("--output", help="write the codeword here (default: stdout)")
    p.set_defaults(handler=_cmd_encode)

    p = sub.add_parser("decode", help="decode a codeword, optionally with side information")
    p.add_argument("--input", help="codeword file (default: stdin)")
    p.add_argument("--output", help="write decoded bits here (default: stdout)")
    p.add_argument("--si", help="side-information bits as 0/1 text; enables list decoding")
    p.add_argument("--p", type=float, default=0.0,
                   help="crossover probability of the side information "
                        "(default: %(default)s)")
    p.add_argument("--m-paths", type=int, default=256,
                   help="survivors kept per level (default: %(default)s)")
    p.add_argument("--budget", type=int, default=1 << 22,
                   help="live-path cap (default: %(default)s)")
    p.set_defaults(handler=_cmd_decode)

    p = sub.add_parser("enumerate", help="count decoding paths level by level")
    p.add_argument("--input", help="codeword file (default: stdin)")
    p.add_argument("--depth", type=int, default=25,
                   help="levels to expand (default: %(default)s)")
    p.add_argument("--budget", type=int, default=1 << 22,
                   help="live-path cap (default: %(default)s)")
    p.add_argument("--output", help="write here instead of stdout")
    _add_format_arg(p)
    p.set_defaults(handler=_cmd_enumerate)

    def add_grid_args(p):
        p.add_argument("--n-cells", type=int, default=100_000,
                       help="grid resolution (default: %(default)s)")
        p.add_argument("--tol", type=float, default=1e-9,
                       help="solver stopping tolerance (default: %(default)s)")
        p.add_argument("--max-iters", type=int, default=10_000,
                       help="solver sweep limit (default: %(default)s)")
        p.add_argument("--output", help="write here instead of stdout")
        _add_format_arg(p)

    p = sub.add_parser("spectrum-f",
                       help="stationary code-point density on a grid")
    _add_rate_args(p)
    add_grid_args(p)
    p.set_defaults(handler=_cmd_spectrum_f)

    p = sub.add_parser("spectrum-g",
                       help="pooled code-point density after a number of decoding steps")
    _add_rate_args(p)
    p.add_argument("--steps", type=int, default=50,
                   help="index of the density to output; 1 is the stationary "
                        "density itself (default: %(default)s)")
    add_grid_args(p)
    p.set_defaults(handler=_cmd_spectrum_g)

    p = sub.add_parser("expansion",
                       help="theoretical expansion-factor series")
    _add_rate_args(p)
    p.add_argument("--depth", type=int, default=60,
                   help="series length (default: %(default)s)")
    add_grid_args(p)
    p.set_defaults(handler=_cmd_expansion)

    p = sub.add_parser("experiment",
                       help="theory vs Monte-Carlo expansion comparison")
    _add_rate_args(p)
    p.add_argument("--trials", type=int, default=1000,
                   help="Monte-Carlo trials (default: %(default)s)")
    p.add_argument("--depth", type=int, default=25,
                   help="tree depth per trial (default: %(default)s)")
    p.add_argument("--len", type=int, default=64,
                   help="source length per trial (default: %(default)s)")
    p.add_argument("--seed", type=int, default=0,
                   help="master seed (default: %(default)s)")
    p.add_argument("--n-cells", type=int, default=100_000,
                   help="grid resolution for the theory side (default: %(default)s)")
    p.add_argument("--budget", type=int, default=1 << 22,
                   help="live-path cap per trial (default: %(default)s)")
    p.add_argument("--output",
                   help="write the table here and metadata to OUTPUT.meta.json "
                        "(default: table to stdout, metadata to stderr)")
    _add_format_arg(p)
    p.set_defaults(handler=_cmd_experiment)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code else 0
    try:
        args.handler(args)
    except DactkError as e:
        sys.stderr.write(f"dactk: error: {e}\n")
        return 2
    except BrokenPipeError:
        return 0
    except (ValueError, OSError) as e:
        sys.stderr.write(f"dactk: error: {e}\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
