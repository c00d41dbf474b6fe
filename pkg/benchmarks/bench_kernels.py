"""Compare the pure-Python and compiled kernel backends.

    python benchmarks/bench_kernels.py --repeat 5
"""

import argparse
import statistics
import time

from complag import kernels
from complag.dynamics import Compiled, State, integrate, model_for
from complag.systems import load_builtin

RUNS = [
    ("harmonic-oscillator", State(0, [1.0], [0.0]), 10.0),
    ("central-force", State(0, [1.2], [0.3j]), 0.9),
    ("hinged-rod", State(0, [0.5 + 0.2j], [0.1 + 0.1j]), 0.5),
]


def timed(fn, repeat):
    samples = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - start)
    return statistics.median(samples)


def bench_integrate(backend, repeat, dt):
    rows = []
    for name, s0, t_end in RUNS:
        spec = load_builtin(name)
        model_for(spec, "classical", backend)  # build outside the timed region
        secs = timed(lambda: integrate(spec, "classical", s0, t_end, dt, backend), repeat)
        rows.append((f"integrate {name}", round(t_end / dt), secs))
    return rows


def bench_eval(backend, repeat, count):
    spec = load_builtin("hinged-rod")
    model = model_for(spec, "classical", backend)
    fn = Compiled(model.residuals, spec, backend)
    rows = [State(0.1 * k, [0.3 + 0.001 * k], [0.1j]).inputs() for k in range(count)]
    secs = timed(lambda: backend.eval_many(fn.kernel, rows), repeat)
    return [("eval hinged-rod residuals", count, secs)]


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--evals", type=int, default=20000)
    args = p.parse_args(argv)
    names = sorted(kernels.BACKENDS)
    table = {}
    for name in names:
        backend = kernels.BACKENDS[name]
        rows = bench_integrate(backend, args.repeat, args.dt) + bench_eval(backend, args.repeat, args.evals)
        for label, count, secs in rows:
            table.setdefault((label, count), {})[name] = secs
    head = f"{'case':34s} {'n':>7s} " + " ".join(f"{n:>10s}" for n in names)
    print(head + ("    speedup" if "cython" in names else ""))
    for (label, count), by in table.items():
        cols = " ".join(f"{by[n]:9.4f}s" for n in names)
        extra = f"  {by['python'] / by['cython']:8.1f}x" if "cython" in by else ""
        print(f"{label:34s} {count:7d} {cols}{extra}")


if __name__ == "__main__":
    main()
