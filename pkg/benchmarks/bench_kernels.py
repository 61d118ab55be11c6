"""Compare the compiled and pure-Python kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Prints per-kernel best-of-N timings and the speedup, after checking that both
backends return identical results on the benchmark inputs.
"""
from __future__ import annotations

import argparse
import sys
import timeit

import numpy as np

from metasynth._kernels import available_backends
from metasynth.embedding import tokenize
from metasynth.fixtures import build_catalog


def _token_lists():
    catalog = build_catalog()
    texts = [d.title + " " + d.description for d in catalog.corpus]
    return [tokenize(t) for t in texts]


def _mmr_inputs(n: int, k: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    vecs = rng.normal(size=(n, 64))
    vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
    sim = vecs @ vecs.T
    rel = rng.uniform(-1, 1, size=n)
    return rel, sim, 0.7, k


def main(argv=None) -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)

    backends = available_backends()
    if "cython" not in backends:
        print("compiled backend not built; run `pip install -e . --no-build-isolation` first")
        return 1
    py, cy = backends["python"], backends["cython"]

    tokens = _token_lists()
    mmr_small = _mmr_inputs(12, 4)
    mmr_large = _mmr_inputs(400, 20)

    cases = {
        "hashed_counts (200 docs)": lambda m: [m.hashed_counts(t, 256, 0x5EEDCAFEF00D0001) for t in tokens],
        "mmr_greedy (pool 12, m 4)": lambda m: m.mmr_greedy(*mmr_small),
        "mmr_greedy (pool 400, m 20)": lambda m: m.mmr_greedy(*mmr_large),
    }

    for name, fn in cases.items():
        a, b = fn(py), fn(cy)
        if isinstance(a, list):
            same = all(np.array_equal(x, y) for x, y in zip(a, b))
        else:
            same = np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
        if not same:
            print(f"{name}: backends disagree", file=sys.stderr)
            return 2

    print(f"{'kernel':<30} {'python ms':>10} {'cython ms':>10} {'speedup':>8}")
    for name, fn in cases.items():
        number = 20 if "400" not in name else 3
        t_py = min(timeit.repeat(lambda: fn(py), number=number, repeat=args.repeat)) / number
        t_cy = min(timeit.repeat(lambda: fn(cy), number=number, repeat=args.repeat)) / number
        print(f"{name:<30} {t_py * 1e3:>10.3f} {t_cy * 1e3:>10.3f} {t_py / t_cy:>7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
