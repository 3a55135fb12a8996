"""Time the compiled and NumPy kernels on the same trajectory and Cesaro grids.

    python3 benchmarks/bench_kernels.py [--dim 12] [--points 2000] [--repeat 5]
"""

import argparse
import sys
import timeit

import numpy as np

from ergolib import _kernels
from ergolib.evolution import Trajectory
from ergolib.spectral_core import spectral_decompose


def fixture(dim, seed=7):
    # several Jordan blocks on and left of the imaginary axis
    rng = np.random.default_rng(seed)
    lams = [0j, 1j, -1j, -0.5 + 2j, -1.0]
    J = np.zeros((dim, dim), dtype=complex)
    i = 0
    while i < dim:
        size = min(int(rng.integers(1, 4)), dim - i)
        lam = lams[(i // 3) % len(lams)]
        lam = lam if lam.real < 0 else lam * (1 + i)  # keep imaginary eigenvalues distinct
        for k in range(size):
            J[i + k, i + k] = lam
            if k:
                J[i + k - 1, i + k] = 1
        i += size
    U, _ = np.linalg.qr(rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))
    A = U @ J @ U.conj().T
    return Trajectory(spectral_decompose(A), rng.standard_normal(dim) + 0j)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--dim", type=int, default=12)
    p.add_argument("--points", type=int, default=2000)
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)

    traj = fixture(args.dim)
    times = np.geomspace(1e-3, 1e6, args.points)
    data = (traj.lams, traj.orbits, traj.orders, times)
    backends = _kernels.available_backends()
    print(f"dim={args.dim} modes={len(traj.lams)} points={args.points} backends={','.join(backends)}")
    if "compiled" not in backends:
        print("compiled kernels not built; run `python3 setup.py build_ext --inplace`", file=sys.stderr)

    for name in ("trajectory_grid", "cesaro_grid"):
        fn = getattr(_kernels, name)
        best = {}
        for backend in backends:
            call = lambda: fn(*data, backend=backend)  # noqa: E731
            call()
            best[backend] = min(timeit.repeat(call, number=1, repeat=args.repeat))
        line = "  ".join(f"{b}={t * 1e3:8.2f} ms" for b, t in best.items())
        if len(best) == 2:
            Yc, _ = fn(*data, backend="compiled")
            Yp, _ = fn(*data, backend="python")
            ok = np.isfinite(Yp)
            diff = np.max(np.abs(Yc[ok] - Yp[ok]) / np.maximum(1.0, np.abs(Yp[ok])))
            line += f"  speedup={best['python'] / best['compiled']:5.2f}x  max_rel_diff={diff:.1e}"
        print(f"{name:16s} {line}")


if __name__ == "__main__":
    main()
