"""Compare the compiled kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import time

import numpy as np

from torusfilters import _pykernels

try:
    from torusfilters import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def _best(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _cases(rng, M, q):
    rows = rng.standard_normal((M, q)) + 1j * rng.standard_normal((M, q))
    rows /= np.linalg.norm(rows, axis=1, keepdims=True)
    mats = rng.standard_normal((M, q - 1, q - 1)) + 1j * rng.standard_normal((M, q - 1, q - 1))
    frames = _pykernels.householder_complete_batch(rows)[:, 1:, :]
    parent = np.concatenate([[-1], rng.integers(0, np.arange(1, M))]).astype(np.intp)
    perm = np.stack([rng.permutation(q) for _ in range(M)]).astype(np.intp)
    return {
        "householder_complete_batch": (rows,),
        "polar_unitary_batch": (mats,),
        "align_frames": (frames, parent, perm),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':28s} {'M':>7s} {'q':>2s} {'python [ms]':>12s} {'cython [ms]':>12s} {'speedup':>8s}")
    for M, q in [(4096, 2), (4096, 3), (32768, 3), (8192, 5)]:
        for name, a in _cases(rng, M, q).items():
            tp = _best(lambda: getattr(_pykernels, name)(*a), args.repeat)
            if _ckernels is None:
                print(f"{name:28s} {M:7d} {q:2d} {tp * 1e3:12.2f} {'n/a':>12s} {'':>8s}")
                continue
            tc = _best(lambda: getattr(_ckernels, name)(*a), args.repeat)
            ok = np.allclose(getattr(_pykernels, name)(*a), getattr(_ckernels, name)(*a), atol=1e-10)
            print(f"{name:28s} {M:7d} {q:2d} {tp * 1e3:12.2f} {tc * 1e3:12.2f} {tp / tc:7.1f}x"
                  + ("" if ok else "  MISMATCH"))


if __name__ == "__main__":
    main()
