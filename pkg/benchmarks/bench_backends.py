"""Throughput of the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_backends.py [--trials 20000] [--repeat 3]

Both backends are run on identical inputs and their outputs are checked for
equality before timings are reported.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from lesionnet.kernels import available_backends, get_backend
from lesionnet.net import train


def _best(fn, repeat: int) -> tuple[float, object]:
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=9)
    ap.add_argument("--nd", type=int, default=10)
    ap.add_argument("--trials", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    net = train([1] * args.n)
    w = np.asarray(net.weights, dtype=np.int8)
    ref = np.asarray(net.reference, dtype=np.int8)
    names = available_backends()
    print(f"backends: {', '.join(names)}; n={args.n}, n_d={args.nd}, trials={args.trials}")

    results: dict[str, dict[str, tuple[float, object]]] = {}
    for name in names:
        be = get_backend(name)
        links = be.sample_links(0, 0, 0, args.trials, args.n, args.nd)
        results[name] = {
            "sample_links": _best(lambda: be.sample_links(0, 0, 0, args.trials, args.n, args.nd), args.repeat),
            "survey_counts": _best(lambda: be.survey_counts(0, 0, 0, args.trials, w, ref, 0, args.nd), args.repeat),
            "agreement_histograms": _best(lambda: be.agreement_histograms(w, ref, 0, links), args.repeat),
        }

    for kernel in ("sample_links", "survey_counts", "agreement_histograms"):
        outs = [np.asarray(results[b][kernel][1]) for b in names]
        same = all(np.array_equal(outs[0], o) for o in outs[1:])
        row = "  ".join(
            f"{b}: {results[b][kernel][0] * 1e3:8.1f} ms ({args.trials / results[b][kernel][0]:,.0f}/s)"
            for b in names
        )
        speedup = ""
        if len(names) > 1:
            speedup = f"  speedup x{results['python'][kernel][0] / results['cython'][kernel][0]:.1f}"
        print(f"{kernel:22s} {row}{speedup}  identical={same}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
