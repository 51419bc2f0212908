"""Effective conductivity of periodic lattices.

A lattice unit cell carries a conductivity on its edge fields.  The
effective operator acts on the constant field; for a one-dimensional cell
it is the harmonic mean of the conductances.  A specially built PSD
conductivity has no effective conductivity at all, and the periodic
Dirichlet problem compresses back to the same effective operator.

Run with ``python demos/periodic_lattice.py``.
"""

from __future__ import annotations

import numpy as np

from effop.lattice import (
    Lattice,
    LatticeNetwork,
    compression_check,
    contrived_nonexistence_sigma,
    effcond_exists,
    lattice_decomposition,
    lattice_effective_operator,
)


def main() -> None:
    square = Lattice(2, (2, 2))
    print(f"2x2 cell: U, E, J dimensions {lattice_decomposition(square).dims}")
    identity = LatticeNetwork(square, np.eye(square.edge_count))
    print(f"sigma = I gives sigma_* = {float(lattice_effective_operator(identity).matrix[0, 0])!r}")

    g = np.array([1.0, 3.0, 0.5, 2.0])
    line = LatticeNetwork.from_conductances(Lattice(1, (4,)), g)
    print(f"1D cell {g.tolist()}: sigma_* = {lattice_effective_operator(line).matrix[0, 0]:.12f}, "
          f"harmonic mean = {len(g) / np.sum(1 / g):.12f}")

    contrived = LatticeNetwork(square, contrived_nonexistence_sigma(square))
    print(f"contrived sigma: effective conductivity exists = {effcond_exists(contrived).exists}")

    rng = np.random.default_rng(1)
    cell = Lattice(2, (3, 2))
    report = compression_check(LatticeNetwork.from_conductances(cell, rng.uniform(0.2, 4.0, cell.edge_count)))
    print(f"compression of the periodic Dirichlet operator matches: {report.holds} "
          f"({report.lhs[0, 0]:.10f} vs {report.rhs[0, 0]:.10f})")


if __name__ == "__main__":
    main()
