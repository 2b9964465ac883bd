#!/usr/bin/env python3
"""Smoke test for the `moralecon` extension module.

Builds nothing itself: it looks for the compiled cdylib under target/ (run
`cargo build -p moralecon-python --release --features extension-module`
first) and imports it from a scratch directory.
"""
import math
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load_module():
    candidates = [
        ROOT / "target" / "release" / "libmoralecon.so",
        ROOT / "target" / "debug" / "libmoralecon.so",
        ROOT / "target" / "release" / "libmoralecon.dylib",
        ROOT / "target" / "debug" / "libmoralecon.dylib",
    ]
    lib = next((p for p in candidates if p.exists()), None)
    if lib is None:
        sys.exit(
            "extension not built; run:\n"
            "  cargo build -p moralecon-python --release --features extension-module"
        )
    scratch = Path(tempfile.mkdtemp(prefix="moralecon_py_"))
    shutil.copy(lib, scratch / ("moralecon" + (".so" if lib.suffix == ".so" else ".so")))
    sys.path.insert(0, str(scratch))
    import moralecon

    return moralecon


def approx(a, b, tol):
    assert abs(a - b) <= tol, f"{a} !~ {b} (tol {tol})"


def main():
    m = load_module()

    # saddle point at the baseline calibration
    rho = math.log(1 / 0.8)
    k0, c0 = m.saddle_point(0.5, 0.1, rho, 0.5, 0.0)
    approx(k0, 2.39, 0.01)
    approx(c0, 1.31, 0.01)

    # statistics
    assert m.gini([1.0, 1.0, 1.0, 1.0]) == 0.0
    approx(m.gini([0.0, 0.0, 0.0, 1.0]), 0.75, 1e-12)
    approx(m.gini([1.0, 3.0]), 0.25, 1e-12)
    assert m.median([3.0, 1.0, 2.0]) == 2.0
    assert m.median([1.0, 2.0, 3.0, 4.0]) == 2.5
    approx(m.balance_index(218.4, 0.2805), 778.6, 0.1)
    try:
        m.gini([0.0, 0.0])
        raise AssertionError("gini of all zeros must raise")
    except ValueError:
        pass

    # OLS on an exact line
    xs = [0.0, 0.25, 0.5, 0.75, 1.0]
    slope, intercept, p = m.fit_linear(xs, [239.0 - 87.0 * x for x in xs])
    approx(slope, -87.0, 1e-9)
    approx(intercept, 239.0, 1e-9)
    assert p < 1e-10

    # Gauss-surface fit recovers a synthetic surface exactly
    grid = [1.0, 1.7, 3.0, 5.5, 10.0, 17.0, 30.0, 55.0, 100.0]
    ks, cs, zs = [], [], []
    for k in grid:
        for c in grid:
            ks.append(k)
            cs.append(c)
            zs.append(
                390.0
                * math.exp(
                    -((math.log(k) - 0.53) ** 2) - 0.5 * (math.log(c) - 1.7) ** 2
                )
                + 361.0
            )
    fit = m.fit_gauss_surface(ks, cs, zs)
    approx(fit.amplitude, 390.0, 1e-4)
    approx(fit.x_center, 0.53, 1e-6)
    approx(fit.y_center, 1.7, 1e-6)
    assert fit.r_squared > 1 - 1e-9

    # a short deterministic simulation
    kwargs = dict(k_th=1.7, c_th=5.5, seed=7, n_agents=100, t_max_years=5.0)
    a = m.simulate(**kwargs)
    b = m.simulate(**kwargs)
    assert a.final_k == b.final_k, "same seed must reproduce bit-identical capital"
    assert a.final_u == b.final_u
    assert len(a.final_k) == 100
    assert all(k > 0 for k in a.final_k)
    assert all(u > 0 for u in a.final_u)
    assert 0.0 <= a.g_k < 1.0
    c = m.simulate(k_th=1.7, c_th=5.5, seed=8, n_agents=100, t_max_years=5.0)
    assert c.final_k != a.final_k, "different seeds must differ"

    # event-free run sits at the saddle forever
    quiet = m.simulate(
        k_th=1e18, c_th=1e18, seed=1, n_agents=10, t_max_years=30.0, m_pairs=0
    )
    approx(quiet.k_med, k0, 1e-9)
    assert quiet.g_k == 0.0

    print("smoke test: OK")
    print("  saddle:", (round(k0, 4), round(c0, 4)))
    print("  sim:", repr(a))
    print("  fit:", repr(fit))


if __name__ == "__main__":
    main()
