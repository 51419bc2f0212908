from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from effop.errors import ConnectivityError, DimensionError, InputError, PreconditionError
from effop.network import (
    BoundaryPartition,
    Digraph,
    ElectricalNetwork,
    components_kernel,
    connected_components,
    dirichlet_hodge,
    dirichlet_zproblem,
    dtn_dirichlet_solve,
    dtn_effcond_relation,
    dtn_schur,
    dtn_zproblem,
    effcond_zero_test,
    effective_conductivity,
    effective_resistance,
    incidence,
    is_connected,
    kirchhoff,
)
from effop.numkit import kernel, range_space
from effop.verify import random_connected_graph
from effop.zproblem import thomson_min

seeds = st.integers(0, 2**32 - 1)


def _chain(k: int, conductances=None) -> ElectricalNetwork:
    return ElectricalNetwork.build(k + 1, [(i, i + 1) for i in range(k)], conductances)


def _random_network(seed: int) -> ElectricalNetwork:
    rng = np.random.default_rng(seed)
    graph = random_connected_graph(rng, int(rng.integers(3, 13)))
    return ElectricalNetwork.from_conductances(graph, rng.uniform(0.1, 5.0, graph.edge_count))


def _laplacian_pinv_conductance(net: ElectricalNetwork, p: int, q: int) -> float:
    """Circuit oracle: r = d* K^+ d with the numpy pseudoinverse."""
    d = np.zeros(net.graph.node_count)
    d[p], d[q] = 1.0, -1.0
    return 1.0 / float(d @ np.linalg.pinv(kirchhoff(net)) @ d)


def test_single_edge_incidence():
    grad, div = incidence(Digraph(2, ((0, 1),)))
    np.testing.assert_array_equal(grad, [[-1.0, 1.0]])
    np.testing.assert_array_equal(div, [[1.0], [-1.0]])


@given(seeds)
def test_gradient_is_minus_adjoint_of_divergence(seed):
    graph = random_connected_graph(np.random.default_rng(seed), 7)
    grad, div = incidence(graph)
    np.testing.assert_array_equal(grad.T, -div)


def test_triangle_laplacian():
    net = ElectricalNetwork.build(3, [(0, 1), (1, 2), (2, 0)])
    np.testing.assert_array_equal(kirchhoff(net), [[2, -1, -1], [-1, 2, -1], [-1, -1, 2]])


def test_digraph_validation():
    with pytest.raises(InputError):
        Digraph(2, ((0, 0),))
    with pytest.raises(InputError):
        Digraph(2, ((0, 2),))
    with pytest.raises(InputError):
        Digraph(2, ((0, 1),), names=("a", "a"))
    g = Digraph(3, ((0, 1), (0, 1)), names=("x", "y", "z"))
    assert g.node_index("y") == 1 and g.node_name(2) == "z"


def test_network_validation():
    graph = Digraph(2, ((0, 1),))
    with pytest.raises(DimensionError):
        ElectricalNetwork.from_conductances(graph, [1.0, 2.0])
    with pytest.raises(InputError):
        ElectricalNetwork.from_conductances(graph, [-1.0])


def test_boundary_partition_validation():
    with pytest.raises(InputError):
        BoundaryPartition((0,), ())
    with pytest.raises(InputError):
        BoundaryPartition((0, 1), (1,))
    with pytest.raises(InputError):
        BoundaryPartition((0,), (1,)).check(Digraph(3, ((0, 1),)))


def test_components():
    g = Digraph(5, ((0, 1), (3, 2)))
    assert connected_components(g) == [[0, 1], [2, 3], [4]]
    assert not is_connected(g)
    assert components_kernel(Digraph(2, ())).dim == 2
    grad, _ = incidence(g)
    assert components_kernel(g).equals(kernel(grad))


def test_star_graph_dtn():
    g = np.array([1.0, 2.0, 3.0])
    net = ElectricalNetwork.build(4, [(0, 3), (3, 1), (2, 3)], g)
    bp = BoundaryPartition.from_boundary(net.graph, [0, 1, 2])
    expected = np.diag(g) - np.outer(g, g) / g.sum()
    np.testing.assert_allclose(dtn_schur(net, bp), expected, atol=1e-14)
    np.testing.assert_allclose(dtn_zproblem(net, bp), expected, atol=1e-12)


def test_path_dtn():
    net = _chain(2)
    bp = BoundaryPartition.from_boundary(net.graph, [0, 2])
    np.testing.assert_allclose(dtn_schur(net, bp), 0.5 * np.array([[1, -1], [-1, 1]]), atol=1e-15)


@given(seeds)
def test_dtn_routes_agree(seed):
    net = _random_network(seed)
    rng = np.random.default_rng(seed + 1)
    n = net.graph.node_count
    boundary = [int(p) for p in rng.choice(n, size=int(rng.integers(1, n)), replace=False)]
    bp = BoundaryPartition.from_boundary(net.graph, boundary)
    schur = dtn_schur(net, bp)
    np.testing.assert_allclose(dtn_zproblem(net, bp), schur, atol=1e-8)
    np.testing.assert_allclose(dtn_dirichlet_solve(net, bp), schur, atol=1e-8)
    np.testing.assert_allclose(schur, schur.T, atol=1e-10)
    assert np.linalg.eigvalsh(schur).min() >= -1e-9
    assert np.abs(schur @ np.ones(len(boundary))).max() <= 1e-9


def test_dtn_zproblem_rejects_disconnected():
    net = ElectricalNetwork.build(4, [(0, 1), (2, 3)])
    bp = BoundaryPartition.from_boundary(net.graph, [0, 2])
    with pytest.raises(ConnectivityError):
        dtn_zproblem(net, bp)
    # each boundary node drives a dangling node, so no current flows
    np.testing.assert_allclose(dtn_schur(net, bp), np.zeros((2, 2)), atol=1e-14)


@given(seeds)
def test_dirichlet_hodge_parts(seed):
    net = _random_network(seed)
    g = net.graph
    bp = BoundaryPartition.from_boundary(g, [0])
    h = dirichlet_hodge(g, bp)
    grad, div = incidence(g)
    assert h.ran_tstar.equals(kernel(div))
    interior = np.eye(g.node_count)[:, list(bp.interior)]
    assert h.ran_u.equals(range_space(grad @ interior))
    assert h.projection_identity_residual() <= 1e-9
    assert h.orthogonality_residual() <= 1e-9


@pytest.mark.parametrize("k", range(1, 9))
def test_series_chain(k):
    net = _chain(k)
    assert effective_conductivity(net, 0, k) == pytest.approx(1.0 / k, abs=1e-10)
    assert effective_resistance(net, 0, k) == pytest.approx(float(k), abs=1e-9)


@pytest.mark.parametrize("k", range(1, 9))
def test_parallel_bundle(k):
    net = ElectricalNetwork.build(2, [(0, 1)] * k)
    assert effective_conductivity(net, 0, 1) == pytest.approx(float(k), abs=1e-10)


@given(seeds)
def test_effective_conductivity_matches_laplacian_pinv(seed):
    net = _random_network(seed)
    n = net.graph.node_count
    rng = np.random.default_rng(seed + 2)
    p, q = (int(x) for x in rng.choice(n, size=2, replace=False))
    expected = _laplacian_pinv_conductance(net, p, q)
    assert effective_conductivity(net, p, q) == pytest.approx(expected, rel=1e-8)
    assert effective_conductivity(net, q, p) == pytest.approx(expected, rel=1e-8)
    if n > 2:
        assert dtn_effcond_relation(net, p, q).holds


def test_relation_requires_interior():
    with pytest.raises(PreconditionError):
        dtn_effcond_relation(_chain(1), 0, 1)


def test_zero_conductance_edge():
    net = ElectricalNetwork.build(2, [(0, 1)], [0.0])
    assert effective_conductivity(net, 0, 1) == 0.0
    assert effective_resistance(net, 0, 1) == float("inf")
    zero = effcond_zero_test(net, 0, 1)
    assert zero.is_zero
    assert zero.witness[0] - zero.witness[1] == pytest.approx(1.0)


def test_disconnected_pair_has_zero_conductivity():
    net = ElectricalNetwork.build(4, [(0, 1), (2, 3)])
    assert abs(effective_conductivity(net, 0, 2)) <= 1e-14
    test = effcond_zero_test(net, 0, 2)
    assert test.is_zero
    grad, _ = incidence(net.graph)
    np.testing.assert_allclose(net.sigma @ grad @ test.witness, 0, atol=1e-12)


def test_connected_pair_is_not_zero():
    test = effcond_zero_test(_chain(3), 0, 3)
    assert not test.is_zero and test.witness is None


def test_same_node_rejected():
    with pytest.raises(InputError):
        effective_conductivity(_chain(2), 1, 1)


def test_thomson_on_series_network():
    # edge-space problem on a two-resistor chain; J is empty for a tree, so the
    # dual effective operator on the unit harmonic field is (r1 + r2) / 2
    net = _chain(2, [2.0, 3.0])
    zp = dirichlet_zproblem(net, BoundaryPartition.from_boundary(net.graph, [0, 2]))
    assert zp.J.dim == 0 and zp.U.dim == 1
    res = thomson_min(zp, zp.U.basis[:, 0])
    assert res.value == pytest.approx((1 / 2 + 1 / 3) / 2, abs=1e-12)
    assert res.objective_at_minimizer == pytest.approx(res.value, abs=1e-12)
