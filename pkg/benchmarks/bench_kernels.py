"""Time the compiled stencil kernels against the NumPy fallback.

Run from the repository root:

    python3 benchmarks/bench_kernels.py

Each kernel is applied repeatedly on random data at a few grid sizes;
the table reports per-call time for both backends and the speedup.  A
correctness column cross-checks the outputs (max abs difference).
"""

import time

import numpy as np

from thermoporo.kernels import get_backend


def _time_call(fn, args, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def _setup(shape, rng, bounded):
    u = rng.standard_normal(shape)
    kf = []
    for a in range(len(shape)):
        s = list(shape)
        if bounded:
            s[a] += 1
        kf.append(np.abs(rng.standard_normal(s)) + 0.1)
    inv_h2 = np.array([float(n) ** 2 for n in shape])
    out = np.empty(shape)
    return u, kf, inv_h2, out


def bench(shapes=((64, 64), (256, 256), (32, 32, 32), (64, 64, 64)),
          repeats=5, warm=2):
    cy = get_backend("cython")
    npb = get_backend("numpy")
    rng = np.random.default_rng(7)

    rows = []
    for shape in shapes:
        label = "x".join(str(n) for n in shape)
        calls = max(1, 2_000_000 // int(np.prod(shape)))

        for name, bounded in (("diffusion_periodic", False),
                              ("diffusion_dirichlet0", True),
                              ("helmholtz_masked", None)):
            if bounded is None:
                u, _, inv_h2, out = _setup(shape, rng, False)
                active = (rng.random(shape) < 0.7).astype(float)
                args = (u, active, 3.0, 0.8, inv_h2, out)
                fn_cy = cy.helmholtz_masked
                fn_np = npb.helmholtz_masked
            else:
                u, kf, inv_h2, out = _setup(shape, rng, bounded)
                args = (u, kf, inv_h2, out)
                fn_cy = getattr(cy, "diffusion_apply_periodic"
                                if not bounded else "diffusion_apply_dirichlet0")
                fn_np = getattr(npb, "diffusion_apply_periodic"
                                if not bounded else "diffusion_apply_dirichlet0")

            def loop(fn):
                def run():
                    for _ in range(calls):
                        fn(*args)
                return run

            for _ in range(warm):
                fn_cy(*args)
            out_cy = out.copy()
            fn_np(*args)
            diff = float(np.abs(out - out_cy).max())

            t_cy = _time_call(loop(fn_cy), (), repeats) / calls
            t_np = _time_call(loop(fn_np), (), repeats) / calls
            rows.append((label, name, t_np * 1e6, t_cy * 1e6,
                         t_np / t_cy, diff))

    print(f"{'grid':>10} {'kernel':<22} {'numpy us':>10} {'cython us':>10} "
          f"{'speedup':>8} {'max diff':>10}")
    for label, name, tn, tc, sp, diff in rows:
        print(f"{label:>10} {name:<22} {tn:10.1f} {tc:10.1f} {sp:8.2f} "
              f"{diff:10.2e}")


if __name__ == "__main__":
    bench()
