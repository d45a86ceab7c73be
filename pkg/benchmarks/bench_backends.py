"""Timing of the two quadrature backends and of the fast fractional Fourier path.

    python3 benchmarks/bench_backends.py [--sizes 1024 2048 4096] [--repeats 3]

Each backend runs in its own interpreter because GEOPROP_BACKEND is read at
import time.  Times are the best of ``--repeats`` runs after one warm-up
call (which also absorbs numba compilation).
"""
import argparse
import json
import os
import subprocess
import sys
import time

_CHILD = r"""
import json, math, sys, time
from geoprop import _accel
from geoprop.phasespace import SystemSpec
from geoprop.propagators import propagate
from geoprop.transforms import frft
from geoprop.waves import Grid1D, HBAR_DIMENSIONLESS, WaveFunction1D, gaussian

sizes, repeats = json.loads(sys.argv[1]), int(sys.argv[2])

def best(fn):
    fn()
    out = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t0)
    return min(out)

rows = []
for n in sizes:
    g = Grid1D.symmetric(20.0, n)
    psi = gaussian(g, 1.0, 0.5, 0.7)
    sys_ = SystemSpec.oscillator(omega=1.0)
    fg = Grid1D.symmetric(8.0, n)
    unit = WaveFunction1D(fg, gaussian(fg, 0.3).values, HBAR_DIMENSIONLESS)
    rows.append({
        "n": n,
        "kernel": best(lambda: propagate(psi, sys_, 1.0)),
        "frft": best(lambda: frft(unit, 1.0)),
    })
print(json.dumps({"backend": _accel.BACKEND, "rows": rows}))
"""


def run_backend(name, sizes, repeats):
    env = dict(os.environ, GEOPROP_BACKEND=name)
    out = subprocess.run(
        [sys.executable, "-c", _CHILD, json.dumps(sizes), str(repeats)],
        env=env, capture_output=True, text=True, check=True,
    )
    return json.loads(out.stdout)


def fast_vs_quadrature(sizes, repeats):
    from geoprop.transforms import frft, frft_fast
    from geoprop.waves import HBAR_DIMENSIONLESS, Grid1D, WaveFunction1D, fidelity, gaussian

    rows = []
    for n in sizes:
        g = Grid1D.symmetric(8.0, n)
        psi = WaveFunction1D(g, gaussian(g, 0.3).values, HBAR_DIMENSIONLESS)
        times = {}
        for label, fn in (("quadrature", frft), ("fast", frft_fast)):
            fn(psi, 1.0)
            runs = []
            for _ in range(repeats):
                t0 = time.perf_counter()
                fn(psi, 1.0)
                runs.append(time.perf_counter() - t0)
            times[label] = min(runs)
        deficit = 1.0 - fidelity(frft_fast(psi, 1.0), frft(psi, 1.0))
        rows.append({"n": n, **times, "speedup": times["quadrature"] / times["fast"], "deficit": deficit})
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[1024, 2048, 4096])
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--json", help="also write the raw numbers here")
    args = ap.parse_args(argv)

    backends = [run_backend(b, args.sizes, args.repeats) for b in ("numpy", "numba")]
    print("quadrature backends (seconds, best of %d)" % args.repeats)
    print(f"{'n':>6} {'op':>8} {'numpy':>10} {'numba':>10} {'ratio':>7}")
    for rn, rb in zip(backends[0]["rows"], backends[1]["rows"]):
        for op in ("kernel", "frft"):
            print(f"{rn['n']:>6} {op:>8} {rn[op]:>10.4f} {rb[op]:>10.4f} {rn[op] / rb[op]:>7.1f}")
    if backends[1]["backend"] != "numba":
        print("note: numba unavailable, second column also ran on numpy")

    ff = fast_vs_quadrature(args.sizes, args.repeats)
    print("\nfractional Fourier, angle 1.0 (seconds)")
    print(f"{'n':>6} {'quadrature':>11} {'fast':>9} {'speedup':>8} {'deficit':>9}")
    for r in ff:
        print(f"{r['n']:>6} {r['quadrature']:>11.4f} {r['fast']:>9.5f} {r['speedup']:>8.1f} {r['deficit']:>9.1e}")

    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump({"backends": backends, "frft": ff}, fh, indent=2)


if __name__ == "__main__":
    main()
