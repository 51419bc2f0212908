"""Electrical networks on finite directed graphs.

Node functions live in ``K^|P|`` and edge functions in ``K^|E|``, indexed
in declaration order.  The gradient ``D`` sends ``f`` to
``(Df)(e) = f(head) - f(tail)``; the divergence ``D•`` sends an edge
function ``g`` to ``(D•g)(p) = sum_{tail(e)=p} g(e) - sum_{head(e)=p} g(e)``.
With these conventions ``D* = -D•`` and the Kirchhoff operator is
``K = -D• sigma D = D* sigma D``.

Two routes compute the Dirichlet-to-Neumann map: a generalized Schur
complement of ``K`` onto the boundary nodes, and the effective operator of
the edge-space Z-problem built from a Hodge decomposition.  The effective
conductivity between two nodes is the effective operator of a node-space
Z-problem with one-dimensional ``U`` and ``J``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import hodge
from .blockop import OrthoDecomp, gsc, split
from .errors import ConnectivityError, DimensionError, InputError, PreconditionError
from .numkit import (
    DEFAULT_TOLERANCES,
    Subspace,
    Tolerances,
    as_matrix,
    is_psd,
    kernel,
    matrices_close,
)
from .zproblem import ZProblem, effective_operator

__all__ = [
    "Digraph",
    "ElectricalNetwork",
    "BoundaryPartition",
    "incidence",
    "kirchhoff",
    "connected_components",
    "components_kernel",
    "dirichlet_hodge",
    "dirichlet_zproblem",
    "lift_operator",
    "dtn_schur",
    "dtn_zproblem",
    "dtn_dirichlet_solve",
    "dipole_zproblem",
    "effective_conductivity",
    "effective_resistance",
    "ZeroTest",
    "effcond_zero_test",
    "RelationReport",
    "dtn_effcond_relation",
]


@dataclass(frozen=True)
class Digraph:
    """A finite directed graph without self-loops.

    Parallel edges are allowed.  ``names`` optionally labels the nodes.
    """

    node_count: int
    edges: tuple[tuple[int, int], ...]
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        if int(self.node_count) < 0:
            raise InputError("node_count must be non-negative")
        edges = tuple((int(t), int(h)) for t, h in self.edges)
        for k, (t, h) in enumerate(edges):
            if not (0 <= t < self.node_count and 0 <= h < self.node_count):
                raise InputError(f"edge {k} ({t}->{h}) references a node out of range")
            if t == h:
                raise InputError(f"edge {k} is a self-loop at node {t}")
        object.__setattr__(self, "node_count", int(self.node_count))
        object.__setattr__(self, "edges", edges)
        if self.names is not None:
            names = tuple(str(n) for n in self.names)
            if len(names) != self.node_count or len(set(names)) != len(names):
                raise InputError("names must be distinct and one per node")
            object.__setattr__(self, "names", names)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def node_index(self, node) -> int:
        """Index of a node given by index or by name."""
        if isinstance(node, (int, np.integer)):
            if not 0 <= int(node) < self.node_count:
                raise InputError(f"node index {node} out of range")
            return int(node)
        if self.names is not None and node in self.names:
            return self.names.index(node)
        raise InputError(f"unknown node {node!r}")

    def node_name(self, index: int) -> str:
        return self.names[index] if self.names is not None else str(index)


@dataclass(frozen=True)
class ElectricalNetwork:
    """A digraph with a conductivity operator on edge space.

    ``sigma`` may be any self-adjoint positive semidefinite ``|E| x |E|``
    matrix; :meth:`from_conductances` builds the usual diagonal one.
    """

    graph: Digraph
    sigma: np.ndarray
    tol: Tolerances = DEFAULT_TOLERANCES

    def __post_init__(self):
        m = self.graph.edge_count
        sigma = as_matrix(np.asarray(self.sigma).reshape(m, m) if m == 0 else self.sigma, name="sigma")
        if sigma.shape != (m, m):
            raise DimensionError(f"sigma has shape {sigma.shape}, expected {(m, m)}")
        if m and not is_psd(sigma, self.tol):
            raise InputError("sigma must be self-adjoint positive semidefinite")
        sigma = sigma.copy()
        sigma.setflags(write=False)
        object.__setattr__(self, "sigma", sigma)

    @classmethod
    def from_conductances(cls, graph: Digraph, conductances: Sequence[float],
                          tol: Tolerances = DEFAULT_TOLERANCES) -> "ElectricalNetwork":
        g = np.asarray(conductances, dtype=float).reshape(-1)
        if g.shape[0] != graph.edge_count:
            raise DimensionError(f"{g.shape[0]} conductances for {graph.edge_count} edges")
        return cls(graph, np.diag(g), tol)

    @classmethod
    def build(cls, node_count: int, edges, conductances=None, names=None,
              tol: Tolerances = DEFAULT_TOLERANCES) -> "ElectricalNetwork":
        """Convenience constructor; unit conductances by default."""
        graph = Digraph(node_count, tuple(edges), names)
        if conductances is None:
            conductances = np.ones(graph.edge_count)
        return cls.from_conductances(graph, conductances, tol)


@dataclass(frozen=True)
class BoundaryPartition:
    """Disjoint nonempty boundary and interior node sets covering all nodes."""

    boundary: tuple[int, ...]
    interior: tuple[int, ...]

    def __post_init__(self):
        b = tuple(int(i) for i in self.boundary)
        i = tuple(int(k) for k in self.interior)
        if not b or not i:
            raise InputError("boundary and interior must both be nonempty")
        if set(b) & set(i) or len(set(b)) != len(b) or len(set(i)) != len(i):
            raise InputError("boundary and interior must be disjoint sets")
        object.__setattr__(self, "boundary", b)
        object.__setattr__(self, "interior", i)

    @classmethod
    def from_boundary(cls, graph: Digraph, boundary) -> "BoundaryPartition":
        """Partition with the given boundary (indices or names) in the given order."""
        b = [graph.node_index(p) for p in boundary]
        interior = [p for p in range(graph.node_count) if p not in set(b)]
        return cls(tuple(b), tuple(interior))

    def check(self, graph: Digraph):
        if sorted(self.boundary + self.interior) != list(range(graph.node_count)):
            raise InputError("boundary and interior must cover every node exactly once")


def incidence(graph: Digraph) -> tuple[np.ndarray, np.ndarray]:
    """Gradient ``D`` (``|E| x |P|``) and divergence ``D•`` (``|P| x |E|``).

    Both are assembled from their defining formulas, so ``D.T == -D•``
    holds exactly rather than by construction.
    """
    n, m = graph.node_count, graph.edge_count
    grad = np.zeros((m, n))
    div = np.zeros((n, m))
    for k, (tail, head) in enumerate(graph.edges):
        grad[k, head] += 1.0
        grad[k, tail] -= 1.0
        div[tail, k] += 1.0
        div[head, k] -= 1.0
    return grad, div


def kirchhoff(net: ElectricalNetwork) -> np.ndarray:
    """``K = -D• sigma D``."""
    grad, div = incidence(net.graph)
    return -div @ net.sigma @ grad


def connected_components(graph: Digraph) -> list[list[int]]:
    """Weakly connected components, each sorted, ordered by smallest node."""
    parent = list(range(graph.node_count))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for t, h in graph.edges:
        rt, rh = find(t), find(h)
        if rt != rh:
            parent[max(rt, rh)] = min(rt, rh)
    groups: dict[int, list[int]] = {}
    for p in range(graph.node_count):
        groups.setdefault(find(p), []).append(p)
    return sorted(groups.values(), key=lambda g: g[0])


def is_connected(graph: Digraph) -> bool:
    return len(connected_components(graph)) <= 1


def components_kernel(graph: Digraph) -> Subspace:
    """``ker D`` with the normalized component indicators as basis."""
    comps = connected_components(graph)
    basis = np.zeros((graph.node_count, len(comps)))
    for c, nodes in enumerate(comps):
        basis[nodes, c] = 1.0 / np.sqrt(len(nodes))
    return Subspace(basis, graph.node_count, check=False)


def _node_projection(n: int, nodes: Sequence[int]) -> np.ndarray:
    proj = np.zeros((n, n))
    proj[list(nodes), list(nodes)] = 1.0
    return proj


def dirichlet_hodge(graph: Digraph, bp: BoundaryPartition,
                    tol: Tolerances = DEFAULT_TOLERANCES) -> hodge.HodgeDecomposition:
    """Hodge decomposition of edge space for the Dirichlet problem.

    Uses ``T`` = projection onto ``ker D•`` and ``U = D P_interior``, so
    the parts are ``ran T* = ker D•`` (currents), the harmonic part
    ``{Du : (D•Du) = 0 on the interior}`` and ``ran U = {Du : u = 0 on the
    boundary}``.
    """
    bp.check(graph)
    grad, div = incidence(graph)
    m = graph.edge_count
    currents = kernel(div, tol) if m else Subspace.trivial(0)
    t = currents.projection() if m else np.zeros((0, 0))
    u = grad @ _node_projection(graph.node_count, bp.interior)
    return hodge.decompose(hodge.HodgeInput(t, u), tol)


def dirichlet_zproblem(net: ElectricalNetwork, bp: BoundaryPartition) -> ZProblem:
    """Edge-space Z-problem ``(U, E, J)`` = (harmonic, ``ran D P_int``, ``ker D•``)."""
    parts = dirichlet_hodge(net.graph, bp, net.tol)
    decomp = parts.as_decomp(("harmonic", "ran_u", "ran_tstar"))
    return ZProblem(net.sigma, decomp, net.tol)


def _dirichlet_potentials(graph: Digraph, bp: BoundaryPartition, conductance_kirchhoff: np.ndarray,
                          boundary_values: np.ndarray) -> np.ndarray:
    """Node potentials with given boundary values and zero interior current."""
    n = graph.node_count
    b, i = list(bp.boundary), list(bp.interior)
    k_ii = conductance_kirchhoff[np.ix_(i, i)]
    k_ib = conductance_kirchhoff[np.ix_(i, b)]
    u = np.zeros((n, boundary_values.shape[1]), dtype=np.result_type(boundary_values, k_ii))
    u[b] = boundary_values
    u[i] = np.linalg.solve(k_ii, -k_ib @ boundary_values)
    return u


def lift_operator(graph: Digraph, bp: BoundaryPartition) -> np.ndarray:
    """Lift ``f -> D u_f`` where ``u_f`` is the unit-conductance harmonic extension.

    Requires a connected graph, which makes the interior block of the unit
    Kirchhoff operator invertible.
    """
    if not is_connected(graph):
        raise ConnectivityError("the lift operator needs a connected graph")
    bp.check(graph)
    grad, div = incidence(graph)
    unit_k = -div @ grad
    u = _dirichlet_potentials(graph, bp, unit_k, np.eye(len(bp.boundary)))
    return grad @ u


def dtn_schur(net: ElectricalNetwork, bp: BoundaryPartition) -> np.ndarray:
    """DtN map as the generalized Schur complement of ``K`` onto the boundary.

    Rows and columns follow the order of ``bp.boundary``.  Works for
    disconnected graphs too, because the pseudoinverse tolerates a singular
    interior block.
    """
    bp.check(net.graph)
    n = net.graph.node_count
    decomp = OrthoDecomp.coordinate(n, [bp.boundary, bp.interior])
    return gsc(split(kirchhoff(net), decomp), net.tol)


def dtn_zproblem(net: ElectricalNetwork, bp: BoundaryPartition) -> np.ndarray:
    """DtN map as ``Pi* sigma_* Pi`` from the edge-space Z-problem.

    Raises
    ------
    ConnectivityError
        For disconnected graphs, where the lift is undefined.
    """
    if not is_connected(net.graph):
        raise ConnectivityError("the Z-problem route to the DtN map needs a connected graph")
    lift = lift_operator(net.graph, bp)
    zp = dirichlet_zproblem(net, bp)
    eff = effective_operator(zp)
    return lift.conj().T @ eff.ambient() @ lift


def dtn_dirichlet_solve(net: ElectricalNetwork, bp: BoundaryPartition) -> np.ndarray:
    """DtN map by solving the Dirichlet problem for each boundary basis vector.

    Needs an invertible interior block of ``K``; used as a cross-check.
    """
    bp.check(net.graph)
    k = kirchhoff(net)
    u = _dirichlet_potentials(net.graph, bp, k, np.eye(len(bp.boundary)))
    return (k @ u)[list(bp.boundary)]


def dipole_zproblem(net: ElectricalNetwork, p, q) -> ZProblem:
    """Node-space Z-problem with ``U = span{delta_p}``, ``J = span{delta_q}``."""
    g = net.graph
    pi, qi = g.node_index(p), g.node_index(q)
    if pi == qi:
        raise InputError("effective conductivity needs two distinct nodes")
    rest = [k for k in range(g.node_count) if k not in (pi, qi)]
    return ZProblem.from_indices(kirchhoff(net), [pi], rest, [qi], net.tol)


def effective_conductivity(net: ElectricalNetwork, p, q) -> float:
    """Effective conductivity between nodes ``p`` and ``q``.

    Computed as the 1x1 effective operator of :func:`dipole_zproblem`.
    Complex conductivities give a complex value; its real part is returned
    only when the imaginary part vanishes.
    """
    eff = effective_operator(dipole_zproblem(net, p, q))
    value = eff.matrix[0, 0]
    if np.iscomplexobj(value) and abs(value.imag) > net.tol.eq_atol:
        return complex(value)
    return float(np.real(value))


ZERO_RTOL = 1e-12


def effective_resistance(net: ElectricalNetwork, p, q) -> float:
    """``1 / sigma_eff``, with ``float('inf')`` when ``sigma_eff`` vanishes."""
    g = effective_conductivity(net, p, q)
    zero = ZERO_RTOL * max(1.0, float(np.max(np.abs(kirchhoff(net)))) if net.graph.edge_count else 1.0)
    if abs(g) <= zero:
        return float("inf")
    return 1.0 / g



@dataclass(frozen=True)
class ZeroTest:
    """Whether ``sigma_eff(p, q) = 0`` with a witness potential.

    The witness ``u`` satisfies ``sigma D u = 0`` and ``u(p) - u(q) = 1``.
    """

    is_zero: bool
    witness: np.ndarray | None


def effcond_zero_test(net: ElectricalNetwork, p, q) -> ZeroTest:
    """Search ``ran D ∩ ker sigma`` for a field separating ``p`` from ``q``.

    Potentials ``u`` with ``D u`` in ``ker sigma`` form ``ker(sigma D)``;
    such a ``u`` with ``u(p) != u(q)`` exists exactly when
    ``delta_p - delta_q`` is not orthogonal to that kernel.
    """
    g = net.graph
    pi, qi = g.node_index(p), g.node_index(q)
    if pi == qi:
        raise InputError("the zero test needs two distinct nodes")
    grad, _ = incidence(g)
    if g.edge_count:
        potentials = kernel(net.sigma @ grad, net.tol, scale=float(np.linalg.norm(net.sigma, 2)) * 2)
    else:
        potentials = Subspace.whole(g.node_count)
    dipole = np.zeros(g.node_count)
    dipole[pi], dipole[qi] = 1.0, -1.0
    u = potentials.projection() @ dipole
    drop = float(np.real(u[pi] - u[qi]))
    if drop <= net.tol.eq_atol:
        return ZeroTest(False, None)
    return ZeroTest(True, u / drop)


@dataclass(frozen=True)
class RelationReport:
    """``Lambda`` with boundary ``{p, q}`` against ``sigma_eff d d*``, ``d = (1, -1)``."""

    holds: bool
    lhs: np.ndarray
    rhs: np.ndarray
    conductivity: float


def dtn_effcond_relation(net: ElectricalNetwork, p, q) -> RelationReport:
    """Check that the two-terminal DtN map is ``sigma_eff`` times ``d d*``.

    Raises
    ------
    PreconditionError
        When ``{p, q}`` is the whole node set (no interior).
    """
    g = net.graph
    pi, qi = g.node_index(p), g.node_index(q)
    if pi == qi:
        raise InputError("the relation needs two distinct nodes")
    if g.node_count <= 2:
        raise PreconditionError("{p, q} must be a proper subset of the nodes")
    bp = BoundaryPartition.from_boundary(g, [pi, qi])
    lhs = dtn_schur(net, bp)
    value = effective_conductivity(net, pi, qi)
    d = np.array([1.0, -1.0])
    rhs = value * np.outer(d, d)
    return RelationReport(matrices_close(lhs, rhs, net.tol, atol=1e-8), lhs, rhs, value)
