"""Micro-benchmark for the three hot kernels, compiled vs interpreted.

Times the numba and numpy implementations of token sampling, reward term
counting, and block filling on identical inputs, then prints per-call
milliseconds and the speedup. Run from a checkout or an installed
package:

    python benchmarks/bench_kernels.py --repeat 2000

If numba is unavailable (or FILLSCALE_NO_NUMBA is set) only the numpy
column is reported.
"""

import argparse
import time

import numpy as np

from fillscale import kernels


def _time(fn, repeat):
    # one untimed call first so JIT compilation stays out of the numbers
    fn()
    best = float("inf")
    for _ in range(3):
        t0 = time.perf_counter()
        for _ in range(repeat):
            fn()
        best = min(best, (time.perf_counter() - t0) / repeat)
    return best * 1e3


def build_cases(args):
    rng = np.random.default_rng(args.seed)
    total = args.width * args.height
    template = rng.integers(0, args.vocab, size=total).astype(np.int32)
    tokens = rng.integers(0, args.vocab, size=total).astype(np.int32)
    frontier = total // 2
    uniforms = rng.random(total - frontier)
    blocks = frontier // args.block_size
    assignments = rng.integers(0, blocks,
                               size=(total - frontier) // args.block_size)

    def sample(fn):
        work = tokens.copy()
        fn(work, template, frontier, total - frontier, args.width, args.vocab,
           2.0, 1.0, 1.0, uniforms, False)

    def reward(fn):
        fn(tokens, template, args.width, args.height)

    def fill(fn):
        out = tokens.copy()
        fn(tokens, out, frontier, args.block_size, assignments)

    return [
        ("sample_tokens", sample,
         kernels.sample_tokens_nb, kernels.sample_tokens_py),
        ("reward_terms", reward,
         kernels.reward_terms_nb, kernels.reward_terms_py),
        ("fill_blocks", fill,
         kernels.fill_blocks_nb, kernels.fill_blocks_py),
    ]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--width", type=int, default=16)
    parser.add_argument("--height", type=int, default=16)
    parser.add_argument("--vocab", type=int, default=16)
    parser.add_argument("--block-size", type=int, default=8)
    parser.add_argument("--repeat", type=int, default=2000,
                        help="timed calls per measurement (best of 3)")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    cases = build_cases(args)
    have_nb = kernels.sample_tokens_nb is not None
    print(f"backend selected at import: {kernels.BACKEND}   "
          f"grid {args.width}x{args.height}, vocab {args.vocab}, "
          f"repeat {args.repeat}")
    header = f"{'kernel':<16}{'numpy ms':>12}"
    if have_nb:
        header += f"{'numba ms':>12}{'speedup':>10}"
    print(header)
    for name, call, nb_fn, py_fn in cases:
        py_ms = _time(lambda: call(py_fn), args.repeat)
        line = f"{name:<16}{py_ms:>12.4f}"
        if have_nb:
            nb_ms = _time(lambda: call(nb_fn), args.repeat)
            line += f"{nb_ms:>12.4f}{py_ms / nb_ms:>9.1f}x"
        print(line)
    if not have_nb:
        print("numba path unavailable; set up numba and unset "
              "FILLSCALE_NO_NUMBA to compare")


if __name__ == "__main__":
    main()
