"""Benchmark the jit kernels against the pure-numpy fallback.

Times the hot per-observation kernels at several sample sizes, then an
end-to-end fit + bootstrap in a subprocess per backend (backend choice is
fixed at import time, so cross-backend end-to-end numbers need separate
processes).

Run:  python benchmarks/bench_backends.py [--repeats 3000] [--boot-b 200]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from gevboot import _kernels_numpy as knp

try:
    from gevboot import _kernels_numba as knb
except ImportError:
    knb = None


def _timeit(fn, args, repeats):
    fn(*args)  # warm (jit compile / cache load)
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn(*args)
    return (time.perf_counter() - t0) / repeats


def bench_kernels(repeats):
    rng = np.random.default_rng(0)
    print(f"{'kernel':<18} {'n':>7} {'numpy':>12} {'numba':>12} {'speedup':>8}")
    for n in (515, 5_000, 50_000):
        x = rng.uniform(20.0, 80.0, n)
        eta = 1.0 - 0.05 * x
        y = (rng.random(n) < 0.2).astype(np.int64)
        reps = max(repeats // (n // 515), 50)
        cases = [
            ("response_prob", (eta, -0.25)),
            ("log_survival", (eta, -0.25)),
            ("bernoulli_loglik", (eta, y, -0.25)),
            ("score_weights", (eta, y, -0.25)),
        ]
        for name, args in cases:
            t_np = _timeit(getattr(knp, name), args, reps)
            if knb is None:
                print(f"{name:<18} {n:>7} {t_np * 1e6:>10.2f}us {'n/a':>12}")
                continue
            t_nb = _timeit(getattr(knb, name), args, reps)
            print(
                f"{name:<18} {n:>7} {t_np * 1e6:>10.2f}us {t_nb * 1e6:>10.2f}us "
                f"{t_np / t_nb:>7.1f}x"
            )


_END_TO_END = """
import time
import gevboot as gb

spec = gb.dengue_analog(seed=11)
data = gb.simulate_dataset(spec)
fit = gb.fit_mle(data, tau=-0.25)         # warm the whole path
t0 = time.perf_counter()
fit = gb.fit_mle(data, tau=-0.25)
t_fit = time.perf_counter() - t0
t0 = time.perf_counter()
gb.run_bootstrap(data, fit, B={B}, alpha=0.05, seed=7, workers=1)
t_boot = time.perf_counter() - t0
print(f"{{gb.active_backend()}} fit={{t_fit * 1e3:.1f}}ms boot(B={B})={{t_boot:.2f}}s")
"""


def bench_end_to_end(boot_b):
    print(f"\nend-to-end (n=515, fixed shape, B={boot_b}):")
    for backend in ("numpy", "numba"):
        if backend == "numba" and knb is None:
            print("numba unavailable")
            continue
        env = dict(os.environ)
        env["GEVBOOT_BACKEND"] = backend
        out = subprocess.run(
            [sys.executable, "-c", _END_TO_END.format(B=boot_b)],
            capture_output=True, text=True, env=env,
        )
        print(out.stdout.strip() if out.returncode == 0 else out.stderr.strip())


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=3000)
    parser.add_argument("--boot-b", type=int, default=200)
    args = parser.parse_args()
    bench_kernels(args.repeats)
    bench_end_to_end(args.boot_b)
