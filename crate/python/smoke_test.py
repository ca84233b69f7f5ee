"""Smoke test for the Python bindings: run `python3 python/smoke_test.py` after
`pip install --no-build-isolation -e crates/py`."""

import json
import math
import pathlib

import anholonomic as ah

ROOT = pathlib.Path(__file__).resolve().parent.parent


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} != {b} (tol {tol})"


def main():
    sphere = ah.Lagrangian("y1^2 + sin(x1)^2*y2^2", 2)
    x, y = [math.pi / 4, 0.0], [0.0, 1.0]
    close(sphere.hessian(x, y)[1][1], 0.5, 1e-14)
    # N^1_2 sits at row 2 (base), column 1 (fiber)
    close(sphere.nconnection(x, y)[1][0], -0.5, 1e-14)
    f = sphere.almost_complex(x, y)
    for i in range(4):
        for j in range(4):
            sq = sum(f[i][k] * f[k][j] for k in range(4))
            close(sq, -1.0 if i == j else 0.0, 1e-12)

    lift = sphere.sasaki()
    assert lift.dims() == (2, 2)
    assert lift.pure_torsion(x, [0.3, 0.7]) <= 1e-10
    assert max(lift.compatibility(x, [0.3, 0.7])) <= 1e-8

    product = ah.DMetric([["1", "0"], ["0", "sin(x1)^2"]], [["1", "0"], ["0", "sin(y1)^2"]])
    rh, rv, _ = product.scalar_curvature([0.8, 0.1], [1.1, -0.3])
    close(rh, 2.0, 1e-10)
    close(rv, 2.0, 1e-10)

    gammas = ah.gamma_matrices(3)
    assert len(gammas) == 3 and len(gammas[0]) == 2

    torus = ah.DMetric([["1", "0"], ["0", "1"]], [])
    spec = torus.dirac_spectrum([4, 4], [2 * math.pi, 2 * math.pi])
    assert len(spec) == 32
    close(spec[0], -spec[-1], 1e-12)
    assert torus.lichnerowicz([6, 6], [1.0, 1.0])["operator"] <= 1e-10

    assert ah.z2_betti(3, [[0, 1], [1, 2], [0, 2]]) == [1, 1, 0]
    for q in (1, 2, 3):
        close(ah.monopole_degree(q), q, 1e-9)

    results = ah.selftest()
    assert len(results) >= 40 and all(r[4] for r in results)

    report, ok = ah.run_config(str(ROOT / "configs" / "flat_lagrangian.json"), seed=7)
    assert ok and json.loads(report)["seed"] == 7
    print(f"smoke test passed ({len(results)} selftest checks)")


if __name__ == "__main__":
    main()
