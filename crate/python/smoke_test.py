#!/usr/bin/env python3
"""Smoke test for the fraclab_py extension module.

Builds the extension in release mode, loads it from the cargo target
directory, and exercises every exposed entry point against known closed
forms. Run from anywhere inside the repository:

    python3 python/smoke_test.py
"""

import math
import shutil
import subprocess
import sys
import sysconfig
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def build_and_load():
    subprocess.run(
        ["cargo", "build", "-p", "fraclab-py", "--release"],
        cwd=REPO,
        check=True,
    )
    built = REPO / "target" / "release" / "libfraclab_py.so"
    if not built.exists():  # e.g. macOS
        built = REPO / "target" / "release" / "libfraclab_py.dylib"
    suffix = sysconfig.get_config_var("EXT_SUFFIX") or ".so"
    stage = Path(tempfile.mkdtemp(prefix="fraclab_py_"))
    shutil.copy(built, stage / f"fraclab_py{suffix}")
    sys.path.insert(0, str(stage))
    import fraclab_py

    return fraclab_py


def approx(a, b, rel=1e-12):
    assert abs(a - b) <= rel * max(abs(b), 1e-300), f"{a} != {b} (rel {rel})"


def main():
    m = build_and_load()

    # Closed-form constants.
    approx(m.critical_exponent(1, 0.25), 4.0)
    approx(m.talenti_constant(2, 0.5), 1.0 / (2.0 * math.pi ** 0.75))
    approx(m.torsion_amplitude(1, 0.5), 1.0 / (2.0 * math.pi))
    approx(m.critical_level(1, 0.25), 18.039527949356694)

    # Torsion identity: seminorm^2 = L1 norm, any (N, s, R).
    for dim, s, R in [(1, 0.3, 1.0), (2, 0.7, 0.5), (3, 0.9, 2.0)]:
        approx(m.torsion_seminorm(dim, s, R) ** 2, m.torsion_lp_norm(dim, s, R, 1.0))

    # Threshold bundle for the reference instance.
    t = m.thresholds(2, 0.5, 6.0 * math.pi, 1.5, q=3.0)
    approx(t["mu_star_sub"], 2.0 ** 0.75 * math.pi ** 1.5 / 3.0 ** 0.75)
    assert t["lambda_r_star"] > 1.0  # mu_used = mu*/2 keeps lambda = 1 certified

    # Discrete operator: torsion benchmark at moderate resolution.
    op = m.Operator(0.25, radius=1.0, n=128)
    u = op.solve_torsion()
    amp = m.torsion_amplitude(1, 0.25)
    x = op.nodes()
    mid = len(u) // 2
    approx(u[mid], amp * (1.0 - x[mid] ** 2) ** 0.25, rel=2e-2)
    l1 = op.lp_norm(u, 1.0)
    approx(l1, m.torsion_lp_norm(1, 0.25, 1.0, 1.0), rel=2e-2)
    # Quadratic form against the independent seminorm quadrature.
    q = op.quad_form(u)
    g = op.gagliardo_sq(u)
    approx(q, g, rel=5e-2)
    # L(torsion) = 1 in the interior.
    lu = op.apply(u)
    assert abs(lu[mid] - 1.0) < 1e-8

    # Variational problem: energy/gradient consistency and two solutions.
    lam_star = 0.99545341252967472  # s = 0.4, p = 3/2, q = 3 on (-1, 1)
    prob = m.Problem(0.4, 0.5 * lam_star, [(1.0, 1.5), (1.0, 3.0)], n=64)
    zeros = [0.0] * 64
    approx(prob.energy(zeros), 0.0)
    bump = [1.0 - xx * xx for xx in prob.nodes()]
    grad = prob.gradient(bump)
    eps = 1e-6
    bump_p = list(bump)
    bump_p[10] += eps
    fd = (prob.energy(bump_p) - prob.energy(bump)) / eps
    approx(fd, grad[10], rel=1e-4)

    lo, hi = prob.two_solutions()
    assert lo["kind"] == "local_min" and hi["kind"] == "mountain_pass"
    assert lo["certified"] and hi["certified"]
    assert lo["energy"] < 0.0 < hi["energy"]
    assert min(lo["values"]) > 0.0 and min(hi["values"]) > 0.0
    assert lo["grad_norm"] < 1e-6 and hi["grad_norm"] < 1e-6

    print("smoke test passed")


if __name__ == "__main__":
    main()
