"""Compare the compiled and pure-Python kernels.

    python benchmarks/bench_kernels.py [--agents 2000] [--repeat 3]

Times the acceptance-rejection loop and the rational density evaluation on a
realized N(1, 4) control, checks that both backends return identical
samples, and prints one line per kernel and backend.
"""
import argparse
import time

import numpy as np

from momentsteer import kernels, realizer
from momentsteer.sampler import agent_stream, default_candidate, rejection_constant


def _best(fn, repeat, setup=lambda: ()):
    best = float("inf")
    for _ in range(repeat):
        args = setup()
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--agents", type=int, default=2000)
    ap.add_argument("--points", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    target = realizer.minimize([1.0, 5.0, 13.0, 73.0])
    cand = default_candidate(target)
    c = rejection_constant(target, cand)
    u = np.linspace(-10.0, 12.0, args.points)
    backends = kernels.backends()
    if "cython" not in backends:
        print("compiled backend not built; only the Python fallback is available")

    def streams():
        return ([agent_stream(0, 0, i).bit_generator() for i in range(args.agents)],)

    t_streams, _ = _best(lambda: streams(), args.repeat)
    print(f"(deriving {args.agents} per-agent streams: {t_streams * 1e3:.2f} ms, not counted below)")
    results = {}
    for name, be in backends.items():
        def draw(bgs):
            return kernels.rejection_sample(bgs, target, cand, c, 10 ** 6, backend=be)[0]

        t_rs, samples = _best(draw, args.repeat, streams)
        t_pdf, dens = _best(lambda: kernels.rational_pdf(
            u, target.reference, target.coeffs_t, target.center, target.scale, backend=be),
            args.repeat)
        results[name] = (samples, dens)
        print(f"{name:7s} rejection_sample  {args.agents:8d} draws   {t_rs * 1e3:9.2f} ms")
        print(f"{name:7s} rational_pdf      {args.points:8d} points  {t_pdf * 1e3:9.2f} ms")
        results[name] += (t_rs, t_pdf)

    if len(results) == 2:
        (s_py, d_py, rs_py, pdf_py), (s_cy, d_cy, rs_cy, pdf_cy) = results["python"], results["cython"]
        print(f"samples identical: {np.array_equal(s_py, s_cy)}; "
              f"max pdf difference: {np.max(np.abs(d_py - d_cy)):.3e}")
        print(f"speedup: rejection_sample x{rs_py / rs_cy:.1f}, rational_pdf x{pdf_py / pdf_cy:.1f}")


if __name__ == "__main__":
    main()
