"""Throughput comparison of the compiled and pure-Python kernel backends.

Times the two hot paths (bitstream encoding and level-by-level decoding
tree expansion) against the same inputs and prints a speedup table.

    python -m benchmarks.bench_kernels --repeats 5
"""

import argparse
import time

import numpy as np

from dactk.codec import CodecParams, encode
from dactk.kernels import available_backends, get_backend
from dactk.search import SearchConfig, enumerate_tree


def _best_of(repeats, fn):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_encode(backend, symbols, params, repeats):
    impl = get_backend(backend)
    fn = lambda: impl.encode_bits(symbols, params.q_fix, params.bits)
    secs = _best_of(repeats, fn)
    return len(symbols) / secs / 1e6, secs


def bench_tree(backend, codeword, depth, repeats, kernels_mod):
    # enumerate_tree resolves kernels.expand_level at call time, so
    # rebinding it on the kernels module switches the whole run
    impl = get_backend(backend)
    saved = kernels_mod.expand_level
    kernels_mod.expand_level = impl.expand_level
    try:
        cfg = SearchConfig(max_paths_budget=1 << 24)
        levels = enumerate_tree(codeword, depth, cfg)
        total = sum(lv.count for lv in levels)
        secs = _best_of(repeats, lambda: enumerate_tree(codeword, depth, cfg))
    finally:
        kernels_mod.expand_level = saved
    return total / secs / 1e6, secs, total


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-symbols", type=int, default=200_000,
                    help="encode input length (default 200000)")
    ap.add_argument("--depth", type=int, default=26,
                    help="tree expansion depth (default 26)")
    ap.add_argument("--q", type=float, default=0.8)
    ap.add_argument("--repeats", type=int, default=3,
                    help="best-of-N timing (default 3)")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    import dactk.kernels as kernels_mod

    params = CodecParams.from_q(args.q)
    rng = np.random.default_rng(args.seed)
    big = rng.integers(0, 2, args.n_symbols, dtype=np.uint8)
    cw = encode(rng.integers(0, 2, max(args.depth, 64), dtype=np.uint8), params)

    backends = available_backends()
    print(f"backends available: {', '.join(backends)}")
    print(f"encode: n={args.n_symbols}  tree: depth={args.depth} q={args.q}")
    print()
    print(f"{'task':<10} {'backend':<8} {'Msym/s':>10} {'seconds':>10}")

    rates = {}
    for name in backends:
        rate, secs = bench_encode(name, big, params, args.repeats)
        rates[("encode", name)] = rate
        print(f"{'encode':<10} {name:<8} {rate:>10.2f} {secs:>10.4f}")
    total = None
    for name in backends:
        rate, secs, total = bench_tree(name, cw, args.depth, args.repeats,
                                       kernels_mod)
        rates[("tree", name)] = rate
        print(f"{'tree':<10} {name:<8} {rate:>10.2f} {secs:>10.4f}")
    print(f"\ntree paths expanded per run: {total}")

    if "cython" in backends and "python" in backends:
        for task in ("encode", "tree"):
            speedup = rates[(task, "cython")] / rates[(task, "python")]
            print(f"{task}: cython is {speedup:.1f}x the python backend")


if __name__ == "__main__":
    main()
