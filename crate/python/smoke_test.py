"""Smoke test for the binrec_py extension.

Build the module first, for example with
    maturin develop -m crates/python/Cargo.toml --release
or
    cargo build -p binrec-py --release --features extension-module
    cp target/release/libbinrec_py.so python/binrec_py.so
"""

import math
import sys

import binrec_py as br


def main() -> int:
    mesh = br.Mesh(100)
    assert mesh.num_nodes == 101 and abs(mesh.h - 0.01) < 1e-15
    square = br.Mesh(4, dim=2)
    assert square.num_elements == 32

    # blurring preserves constants
    y = br.blur(mesh, 0.01, [0.5] * mesh.num_nodes)
    assert max(abs(v - 0.5) for v in y) < 1e-10

    p = br.heuristics(0.2, "well", alpha=0.01, gamma=0.2)
    assert abs(p.sigma - 0.2 / 80) < 1e-15 and abs(p.epsilon - 0.2 / (4 * math.pi)) < 1e-15

    problem = br.Problem("three_bars", 0.01)
    truth = problem.u_true
    for potential in ("well", "obstacle"):
        params = problem.params(potential, gamma=0.0)
        clean = problem.recover(problem.data(0.0), params, potential)
        assert clean["E"] == 0.0, clean["E"]
        assert clean["converged"] and clean["monotone"]

        params = problem.params(potential, gamma=0.2)
        data = problem.data(0.2, seed=1)
        assert data == problem.data(0.2, seed=1)
        noisy = problem.recover(data, params, potential)
        energies = [noisy["initial_energy"]] + noisy["energies"]
        assert all(b <= a * (1 + 1e-12) for a, b in zip(energies, energies[1:]))
        e = br.error_metric(problem.mesh, noisy["projected"], truth)
        assert abs(e - noisy["E"]) < 1e-15
        print(f"{potential:8s} iterations={noisy['iterations']:3d} E={noisy['E']:.4f}")

    params = problem.params("obstacle")
    params.rho = -1.0
    try:
        problem.recover(problem.data(0.0), params, "obstacle")
    except ValueError:
        pass
    else:
        raise AssertionError("invalid rho accepted")

    print("smoke test passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
