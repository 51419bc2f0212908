"""Dirichlet-to-Neumann maps and effective conductivity on small circuits.

The DtN map of a network is computed twice, as a Schur complement of the
Kirchhoff matrix and as the effective operator of an edge-space
Z-problem, and the two are compared.  Effective conductivities then
reproduce the series and parallel laws, and a zero-conductance edge shows
the zero test with its witness potential.

Run with ``python demos/resistor_networks.py``.
"""

from __future__ import annotations

import numpy as np

from effop.network import (
    BoundaryPartition,
    ElectricalNetwork,
    dtn_effcond_relation,
    dtn_schur,
    dtn_zproblem,
    effcond_zero_test,
    effective_conductivity,
    effective_resistance,
)


def main() -> None:
    # a star with three terminals around a hub
    star = ElectricalNetwork.build(4, [(0, 3), (3, 1), (2, 3)], [1.0, 2.0, 3.0], names=["a", "b", "c", "hub"])
    bp = BoundaryPartition.from_boundary(star.graph, ["a", "b", "c"])
    schur, via_z = dtn_schur(star, bp), dtn_zproblem(star, bp)
    print("star DtN map (Schur route):")
    print(np.round(schur, 6))
    print(f"routes agree to {np.abs(schur - via_z).max():.1e}")

    for k in (1, 2, 4, 8):
        chain = ElectricalNetwork.build(k + 1, [(i, i + 1) for i in range(k)])
        bundle = ElectricalNetwork.build(2, [(0, 1)] * k)
        print(f"k={k}: series sigma_eff={effective_conductivity(chain, 0, k):.6f}, "
              f"parallel sigma_eff={effective_conductivity(bundle, 0, 1):.6f}")

    relation = dtn_effcond_relation(star, "a", "b")
    print(f"two-terminal DtN = sigma_eff * [[1,-1],[-1,1]]: {relation.holds} "
          f"(sigma_eff = {relation.conductivity:.6f})")

    broken = ElectricalNetwork.build(3, [(0, 1), (1, 2)], [0.0, 1.0], names=["p1", "p2", "p3"])
    test = effcond_zero_test(broken, "p1", "p2")
    print(f"zero edge: sigma_eff={effective_conductivity(broken, 'p1', 'p2')}, "
          f"r_eff={effective_resistance(broken, 'p1', 'p2')}, witness={test.witness}")


if __name__ == "__main__":
    main()
