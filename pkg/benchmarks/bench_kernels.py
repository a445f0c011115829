"""Compare the compiled and pure-numpy backends of the hot kernels.

    python benchmarks/bench_kernels.py [--repeat 5]

Also times one solver step for scale: the time stepper itself is FFT-bound
and never calls these kernels.
"""

import argparse
import math
import timeit

import numpy as np

from fracburgers import _kernels
from fracburgers.burgers import step
from fracburgers.evolution import SolverConfig
from fracburgers.generators import gaussian
from fracburgers.spectral import Grid


def cases():
    rng = np.random.default_rng(0)
    g4 = rng.standard_normal(4096)
    w4 = rng.random(2048)
    f1 = rng.standard_normal(1024)
    k1 = rng.standard_normal(1024)
    c = rng.standard_normal(2049) + 1j * rng.standard_normal(2049)
    xi = np.arange(2049) * math.pi / 100.0
    return {
        "second_difference_sum n=4096 m=2048": lambda m: m.second_difference_sum(g4, w4, True),
        "circular_convolve n=1024": lambda m: m.circular_convolve(f1, k1),
        "trig_eval 2049 modes x100": lambda m: [m.trig_eval(c, xi, 0.01 * i) for i in range(100)],
    }


def _best(func, repeat):
    return min(timeit.repeat(func, number=1, repeat=repeat))


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    backends = _kernels.backends()
    names = sorted(backends)
    print(f"active backend: {_kernels.BACKEND}")
    print(f"{'kernel':40s}" + "".join(f"{n:>12s}" for n in names) + ("     speedup" if len(names) > 1 else ""))
    for label, run in cases().items():
        times = {n: _best(lambda: run(backends[n]), args.repeat) for n in names}
        row = f"{label:40s}" + "".join(f"{times[n] * 1e3:10.2f}ms" for n in names)
        if "compiled" in times:
            row += f"{times['python'] / times['compiled']:11.1f}x"
        print(row)
    g = Grid(4096, 200.0)
    u0 = gaussian(g, 1.0, 2.0)
    cfg = SolverConfig(grid=g, T_final=1.0)
    t = _best(lambda: step(u0, 0.02, cfg), args.repeat)
    print(f"{'solver step n=4096 (scipy.fft, reference)':40s}{t * 1e3:10.2f}ms")


if __name__ == "__main__":
    main()
