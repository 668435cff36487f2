"""Time the compiled kernels against the numpy fallback.

    python benchmarks/compare_kernels.py [--size N] [--repeat R]
"""
import argparse

from deltagreen import kernels
from deltagreen.bench import compare_backends, environment


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--size", type=int, default=20000)
    p.add_argument("--repeat", type=int, default=5)
    a = p.parse_args()
    env = environment()
    print(f"python {env['python']}  numpy {env['numpy']}  active kernels: {kernels.NAME}")
    if kernels.compiled is None:
        print("compiled extension not available; only the fallback is timed")
    print(f"{'kernel':<18}{'python [ms]':>14}{'compiled [ms]':>16}{'speedup':>10}")
    for r in compare_backends(a.size, a.repeat):
        tc = f"{1e3 * r['compiled']:16.3f}" if r["compiled"] else f"{'-':>16}"
        sp = f"{r['speedup']:10.1f}" if r["speedup"] else f"{'-':>10}"
        print(f"{r['kernel']:<18}{1e3 * r['python']:14.3f}{tc}{sp}")


if __name__ == "__main__":
    main()
