from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from effop.errors import DimensionError, HypothesisViolation, InputError
from effop.lattice import (
    Lattice,
    LatticeNetwork,
    axis_averages,
    axis_indicators,
    build_periodic_ops,
    compression_check,
    contrived_nonexistence_sigma,
    effcond_exists,
    lattice_decomposition,
    lattice_effective_operator,
    lattice_hodge,
    ohm_law_solutions,
    periodic_dirichlet_decomp,
    ranD_intersect_periodic,
)

seeds = st.integers(0, 2**32 - 1)
SMALL_CELLS = [(1, (1,)), (1, (2,)), (1, (5,)), (2, (1, 1)), (2, (2, 2)), (2, (3, 2)), (2, (1, 3)),
               (3, (1, 1, 2)), (3, (2, 2, 2))]


def _cell_problem_conductivity(conductances) -> float:
    """Direct 1D oracle: minimize the cell energy over periodic potentials."""
    g = np.asarray(conductances, dtype=float)
    n = g.shape[0]
    grad = np.roll(np.eye(n), -1, axis=1) - np.eye(n)
    half = np.sqrt(g)[:, None]
    u = np.linalg.lstsq(half * grad, -np.sqrt(g), rcond=None)[0]
    field = 1.0 + grad @ u
    return float(field @ (g * field)) / n


def test_node_and_edge_ordering():
    lat = Lattice(2, (2, 3))
    assert lat.nodes()[:4] == [(0, 0), (0, 1), (0, 2), (1, 0)]
    assert lat.node_index((2, -1)) == lat.node_index((0, 2)) == 2
    assert lat.edges()[lat.edge_index(2, 1)] == (2, 0, 1)
    assert lat.edges()[lat.edge_index(5, 0)] == (5, 2, 0)


@pytest.mark.parametrize("d, tau", [(0, ()), (4, (1, 1, 1, 1)), (1, (0,)), (1, (17,))])
def test_lattice_validation(d, tau):
    with pytest.raises(InputError):
        Lattice(d, tau)


def test_tau_length_mismatch():
    with pytest.raises(DimensionError):
        Lattice(2, (2,))


def test_one_period_axis_has_zero_gradient():
    ops = build_periodic_ops(Lattice(1, (1,)))
    np.testing.assert_array_equal(ops.D_sharp, [[0.0]])
    np.testing.assert_array_equal(ops.Dbullet_sharp, [[0.0]])


@pytest.mark.parametrize("d, tau", SMALL_CELLS)
def test_periodic_operators_are_adjoint(d, tau):
    ops = build_periodic_ops(Lattice(d, tau))
    np.testing.assert_array_equal(ops.D_sharp.T, -ops.Dbullet_sharp)
    np.testing.assert_allclose(ops.Gamma0 @ ops.Gamma0, ops.Gamma0, atol=1e-15)


@pytest.mark.parametrize("d, tau", SMALL_CELLS)
def test_decomposition_dimensions(d, tau):
    lat = Lattice(d, tau)
    assert lattice_decomposition(lat).dims == (1, lat.node_count - 1, lat.edge_count - lat.node_count)


@pytest.mark.parametrize("d, tau, dims", [(1, (1,), (1, 0, 0)), (1, (2,), (1, 1, 0)),
                                          (2, (2, 2), (1, 3, 4))])
def test_decomposition_small_dims(d, tau, dims):
    assert lattice_decomposition(Lattice(d, tau)).dims == dims


@pytest.mark.parametrize("d, tau", SMALL_CELLS)
def test_hodge_route_matches_direct_triple(d, tau):
    lat = Lattice(d, tau)
    h = lattice_hodge(lat)
    direct = lattice_decomposition(lat)
    assert h.ran_u.equals(direct[0]) and h.ran_tstar.equals(direct[1]) and h.harmonic.equals(direct[2])
    assert h.projection_identity_residual() <= 1e-9
    assert h.orthogonality_residual() <= 1e-9


@pytest.mark.parametrize("d, tau", SMALL_CELLS)
def test_periodic_gradient_routes_agree(d, tau):
    lat = Lattice(d, tau)
    analytic = ranD_intersect_periodic(lat, method="analytic")
    assert analytic.equals(ranD_intersect_periodic(lat, method="extended_block"))
    ops = build_periodic_ops(lat)
    assert analytic.dim == np.linalg.matrix_rank(np.hstack([ops.D_sharp, axis_indicators(lat)]))


def test_unknown_gradient_method():
    with pytest.raises(InputError):
        ranD_intersect_periodic(Lattice(1, (2,)), method="fourier")


@pytest.mark.parametrize("d, tau", SMALL_CELLS)
def test_periodic_dirichlet_triple(d, tau):
    lat = Lattice(d, tau)
    sharp = periodic_dirichlet_decomp(lat)
    gradients = ranD_intersect_periodic(lat)
    assert sharp.dims[0] + sharp.dims[1] == gradients.dim
    ops = build_periodic_ops(lat)
    # U_sharp is divergence free
    np.testing.assert_allclose(ops.Dbullet_sharp @ sharp[0].basis, 0, atol=1e-12)


def test_identity_on_square_cell():
    lat = Lattice(2, (2, 2))
    eff = lattice_effective_operator(LatticeNetwork(lat, np.eye(lat.edge_count)))
    assert abs(eff.matrix[0, 0] - 1.0) <= 1e-12


@pytest.mark.parametrize("g1, g2", [(1.0, 3.0), (0.5, 0.5), (2.0, 7.0), (1e-3, 1e3)])
def test_one_dimensional_harmonic_mean(g1, g2):
    net = LatticeNetwork.from_conductances(Lattice(1, (2,)), [g1, g2])
    value = lattice_effective_operator(net).matrix[0, 0]
    assert value == pytest.approx(2.0 / (1.0 / g1 + 1.0 / g2), abs=1e-10)
    assert value == pytest.approx(_cell_problem_conductivity([g1, g2]), abs=1e-10)


@given(st.lists(st.floats(0.05, 20.0), min_size=1, max_size=8))
def test_one_dimensional_series_law(conductances):
    lat = Lattice(1, (len(conductances),))
    value = lattice_effective_operator(LatticeNetwork.from_conductances(lat, conductances)).matrix[0, 0]
    g = np.asarray(conductances)
    assert value == pytest.approx(len(g) / np.sum(1.0 / g), rel=1e-9)


def test_non_psd_sigma_rejected():
    lat = Lattice(1, (2,))
    with pytest.raises(HypothesisViolation):
        lattice_effective_operator(LatticeNetwork(lat, np.diag([1.0, -1.0])))
    with pytest.raises(DimensionError):
        LatticeNetwork(lat, np.eye(3))


def test_contrived_sigma_breaks_existence():
    lat = Lattice(2, (2, 2))
    sigma = contrived_nonexistence_sigma(lat)
    assert np.linalg.eigvalsh(sigma).min() >= -1e-12
    report = effcond_exists(LatticeNetwork(lat, sigma))
    assert not report.exists and report.conductivity is None and report.residual > 0.1


def test_contrived_sigma_needs_overlap():
    with pytest.raises(InputError):
        contrived_nonexistence_sigma(Lattice(1, (3,)))


def test_identity_has_effective_conductivity():
    lat = Lattice(2, (2, 3))
    report = effcond_exists(LatticeNetwork(lat, np.eye(lat.edge_count)))
    assert report.exists and report.conductivity == pytest.approx(1.0, abs=1e-12)


def _brute_force_exists(net: LatticeNetwork) -> bool:
    """Existence iff every Ohm's law solution with zero average voltage has zero average current."""
    solutions = ohm_law_solutions(net)
    u = net.decomposition[0]
    if solutions.dim == 0:
        return True
    avg_v = u.basis.T @ solutions.basis
    _, singular, vh = np.linalg.svd(avg_v)
    null = vh[int(np.sum(singular > 1e-9)):].conj().T
    if null.size == 0:
        return True
    currents = u.basis.T @ net.sigma @ solutions.basis @ null
    return float(np.abs(currents).max()) <= 1e-8


@given(seeds)
def test_existence_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, 3))
    lat = Lattice(d, tuple(int(t) for t in rng.integers(1, 4, size=d)))
    m = lat.edge_count
    b = rng.standard_normal((m, int(rng.integers(1, m + 1))))
    if rng.random() < 0.5:
        b[:, 0] = np.ones(m) + rng.standard_normal(m) * (rng.random() < 0.5)
    net = LatticeNetwork(lat, b @ b.T)
    assert effcond_exists(net).exists == _brute_force_exists(net)


@given(seeds)
def test_compression_relation(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, 3))
    lat = Lattice(d, tuple(int(t) for t in rng.integers(1, 4, size=d)))
    g = rng.uniform(0.0, 3.0, lat.edge_count) * (rng.random(lat.edge_count) < 0.9)
    report = compression_check(LatticeNetwork.from_conductances(lat, g))
    assert report.holds
    np.testing.assert_allclose(report.lhs, report.rhs, atol=1e-8)


def test_axis_averages():
    lat = Lattice(2, (2, 1))
    np.testing.assert_allclose(axis_averages(lat, [1.0, 2.0, 3.0, 4.0]), [2.0, 3.0])
    with pytest.raises(DimensionError):
        axis_averages(lat, [1.0])


def test_every_small_cell_builds():
    for tau in itertools.product(range(1, 4), repeat=2):
        lat = Lattice(2, tau)
        assert sum(lattice_decomposition(lat).dims) == lat.edge_count
