"""Compare the compiled contraction kernels against the NumPy fallback.

Times the two hot kernels on realistic shapes (default grid rows by grid
columns, one coefficient per array column), checks that both backends agree
to roundoff, then times an end-to-end synthesis in a subprocess per backend
since the choice is made at import.

Usage:
    python benchmarks/bench_kernels.py [--repeats N] [--rows N] [--cols N]
                                       [--order N] [--epochs N] [--skip-e2e]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from beamforge.kernels import _pykernels

try:
    from beamforge.kernels import _ckernels
except ImportError:
    _ckernels = None


def _time(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(rows, cols, order, repeats):
    rng = np.random.default_rng(0)
    base = np.exp(1j * rng.uniform(-np.pi, np.pi, (rows, cols)))
    coeffs = rng.standard_normal((rows, order)) + 1j * rng.standard_normal((rows, order))
    weights = (rng.standard_normal((rows, cols))
               + 1j * rng.standard_normal((rows, cols)))

    impls = [("python", _pykernels)]
    if _ckernels is not None:
        impls.append(("compiled", _ckernels))

    ref_fwd = _pykernels.pattern_forward(coeffs, base)
    ref_adj = _pykernels.pattern_adjoint(weights, base, order)

    print(f"shapes: base {rows}x{cols}, order {order}, best of {repeats}")
    results = {}
    for name, impl in impls:
        fwd = impl.pattern_forward(coeffs, base)
        adj = impl.pattern_adjoint(weights, base, order)
        err = max(
            np.abs(fwd - ref_fwd).max() / np.abs(ref_fwd).max(),
            np.abs(adj - ref_adj).max() / np.abs(ref_adj).max(),
        )
        t_fwd = _time(lambda: impl.pattern_forward(coeffs, base), repeats)
        t_adj = _time(lambda: impl.pattern_adjoint(weights, base, order), repeats)
        results[name] = (t_fwd, t_adj)
        print(f"  {name:8s} forward {t_fwd * 1e3:8.3f} ms   "
              f"adjoint {t_adj * 1e3:8.3f} ms   max rel diff {err:.2e}")

    if "compiled" in results:
        pf, pa = results["python"]
        cf, ca = results["compiled"]
        print(f"  speedup  forward {pf / cf:8.2f} x    adjoint {pa / ca:8.2f} x")
    else:
        print("  compiled backend not importable; python timings only")


def bench_end_to_end(epochs):
    script = (
        "import time, beamforge as bf\n"
        "from beamforge.kernels import backend_name\n"
        "from beamforge.synthesis import SynthesisConfig\n"
        "cfg = bf.ArrayConfig.default()\n"
        "grid = bf.default_grid()\n"
        "spec = bf.TargetSpec(kind='triangular', base_deg=40.0, height_deg=30.0)\n"
        "target = bf.make_target(spec, grid)\n"
        f"epochs = {epochs}\n"
        "syn = SynthesisConfig(epochs=epochs, seed=0)\n"
        "t0 = time.perf_counter()\n"
        "bf.synthesize_direct(target, cfg, syn)\n"
        "dt = time.perf_counter() - t0\n"
        "print('%s: %.2fs for %d epochs (%.1f ms/epoch)'\n"
        "      % (backend_name(), dt, epochs, dt / epochs * 1e3))\n"
    )
    print("end-to-end direct synthesis, 16x16 array, default grid:")
    for no_ext in ("0", "1"):
        env = dict(os.environ, BEAMFORGE_NO_EXT=no_ext)
        out = subprocess.run([sys.executable, "-c", script], env=env,
                             capture_output=True, text=True)
        if out.returncode != 0:
            print(out.stderr, file=sys.stderr)
            raise SystemExit(1)
        print("  " + out.stdout.strip())


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=50)
    parser.add_argument("--rows", type=int, default=180)
    parser.add_argument("--cols", type=int, default=180)
    parser.add_argument("--order", type=int, default=16)
    parser.add_argument("--epochs", type=int, default=40,
                        help="epochs for the end-to-end timing")
    parser.add_argument("--skip-e2e", action="store_true")
    args = parser.parse_args(argv)

    bench_kernels(args.rows, args.cols, args.order, args.repeats)
    if not args.skip_e2e:
        bench_end_to_end(args.epochs)


if __name__ == "__main__":
    main()
