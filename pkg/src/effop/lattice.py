"""Periodic Cartesian lattice networks.

The lattice ``Z^d`` carries one edge ``x -> x + e_k`` per node and axis
and is periodic with periods ``tau``.  Periodic node and edge functions are
identified with their values on one unit cell, so every operator here is a
small dense matrix:

* nodes of the cell are ordered lexicographically (last axis fastest);
* the edge leaving node ``n`` along axis ``k`` has index ``n * d + k``.

The edge space splits as ``U (+) E (+) J`` with ``U`` the constants,
``E = ran D_sharp`` and ``J`` the mean-zero divergence-free fields.  Periodic
gradient fields ``ran D ∩ F_sharp`` can be larger than ``U (+) E`` because a
potential need not be periodic for its gradient to be; the extra directions
are the axis indicators, the gradients of the coordinate functions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from . import hodge
from .blockop import OrthoDecomp
from .errors import DimensionError, HypothesisViolation, InputError
from .numkit import (
    DEFAULT_TOLERANCES,
    Subspace,
    Tolerances,
    as_matrix,
    is_psd,
    kernel,
    kernel_included,
    matrices_close,
    range_space,
    spectral_norm,
)
from .zproblem import EffectiveOperator, ZProblem, effective_operator

__all__ = [
    "MAX_DIM",
    "MAX_PERIOD",
    "Lattice",
    "LatticeNetwork",
    "PeriodicOperators",
    "build_periodic_ops",
    "axis_indicators",
    "lattice_hodge",
    "lattice_decomposition",
    "lattice_zproblem",
    "lattice_effective_operator",
    "ranD_intersect_periodic",
    "periodic_dirichlet_decomp",
    "ExistenceReport",
    "effcond_exists",
    "ohm_law_solutions",
    "CompressionReport",
    "compression_check",
    "axis_averages",
    "contrived_nonexistence_sigma",
]

MAX_DIM = 3
MAX_PERIOD = 16
PSD_HYPOTHESIS = "sigma* = sigma >= 0"


@dataclass(frozen=True)
class Lattice:
    """Unit cell of the periodic lattice with periods ``tau``."""

    d: int
    tau: tuple[int, ...]

    def __post_init__(self):
        d = int(self.d)
        tau = tuple(int(t) for t in self.tau)
        if not 1 <= d <= MAX_DIM:
            raise InputError(f"dimension d must be between 1 and {MAX_DIM}, got {d}")
        if len(tau) != d:
            raise DimensionError(f"tau has {len(tau)} entries for d = {d}")
        if any(t < 1 or t > MAX_PERIOD for t in tau):
            raise InputError(f"periods must lie in [1, {MAX_PERIOD}], got {tau}")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "tau", tau)

    @property
    def node_count(self) -> int:
        return int(np.prod(self.tau))

    @property
    def edge_count(self) -> int:
        return self.d * self.node_count

    def nodes(self) -> list[tuple[int, ...]]:
        """Cell nodes in lexicographic order."""
        return list(itertools.product(*(range(t) for t in self.tau)))

    def node_index(self, coords: Sequence[int]) -> int:
        """Index of the cell node equivalent to ``coords`` (reduced mod ``tau``)."""
        reduced = tuple(int(c) % t for c, t in zip(coords, self.tau))
        return int(np.ravel_multi_index(reduced, self.tau))

    def edge_index(self, node: int, axis: int) -> int:
        return node * self.d + axis

    def edges(self) -> list[tuple[int, int, int]]:
        """``(tail, head, axis)`` for each cell edge, in edge order."""
        out = []
        for n, x in enumerate(self.nodes()):
            for k in range(self.d):
                shifted = list(x)
                shifted[k] += 1
                out.append((n, self.node_index(shifted), k))
        return out


@dataclass(frozen=True)
class PeriodicOperators:
    """Periodic gradient, divergence and edge cell average in cell coordinates."""

    D_sharp: np.ndarray  # noqa: N815 - names follow the operators
    Dbullet_sharp: np.ndarray  # noqa: N815
    Gamma0: np.ndarray  # noqa: N815


def build_periodic_ops(lat: Lattice) -> PeriodicOperators:
    """Assemble ``D_sharp``, ``Dbullet_sharp`` and ``Gamma0``.

    Each operator is built from its own defining formula; for a period of 1
    the edge along that axis joins a node to itself and its gradient row is
    zero.
    """
    n, m = lat.node_count, lat.edge_count
    grad = np.zeros((m, n))
    div = np.zeros((n, m))
    for e, (tail, head, _axis) in enumerate(lat.edges()):
        grad[e, head] += 1.0
        grad[e, tail] -= 1.0
        div[tail, e] += 1.0
        div[head, e] -= 1.0
    average = np.full((m, m), 1.0 / m)
    for a in (grad, div, average):
        a.setflags(write=False)
    return PeriodicOperators(grad, div, average)


def axis_indicators(lat: Lattice) -> np.ndarray:
    """``|E| x d`` matrix whose column ``k`` is 1 on axis-``k`` edges."""
    chi = np.zeros((lat.edge_count, lat.d))
    for e, (_t, _h, axis) in enumerate(lat.edges()):
        chi[e, axis] = 1.0
    return chi


def lattice_hodge(lat: Lattice, tol: Tolerances = DEFAULT_TOLERANCES) -> hodge.HodgeDecomposition:
    """Hodge decomposition with ``T = -Dbullet_sharp`` and ``U = Gamma0``.

    ``ran T*`` is ``E``, ``ran U`` is ``U`` and the harmonic part is ``J``.
    """
    ops = build_periodic_ops(lat)
    return hodge.decompose(hodge.HodgeInput(-ops.Dbullet_sharp, ops.Gamma0), tol)


def lattice_decomposition(lat: Lattice, tol: Tolerances = DEFAULT_TOLERANCES) -> OrthoDecomp:
    """The triple ``(U, E, J)`` built directly from the definitions.

    ``U`` is spanned by the constant field, ``E = ran D_sharp`` and ``J`` is
    the orthogonal complement of both.
    """
    ops = build_periodic_ops(lat)
    m = lat.edge_count
    u = Subspace(np.ones((m, 1)) / np.sqrt(m), m, check=False)
    e = range_space(ops.D_sharp, tol)
    j = u.sum(e, tol).complement(tol)
    return OrthoDecomp([u, e, j], tol)


@dataclass(frozen=True)
class LatticeNetwork:
    """A unit cell with a conductivity on periodic edge fields."""

    lattice: Lattice
    sigma: np.ndarray
    tol: Tolerances = DEFAULT_TOLERANCES

    def __post_init__(self):
        m = self.lattice.edge_count
        sigma = as_matrix(self.sigma, name="sigma")
        if sigma.shape != (m, m):
            raise DimensionError(f"sigma has shape {sigma.shape}, expected {(m, m)}")
        sigma = sigma.copy()
        sigma.setflags(write=False)
        object.__setattr__(self, "sigma", sigma)

    @classmethod
    def from_conductances(cls, lat: Lattice, conductances,
                          tol: Tolerances = DEFAULT_TOLERANCES) -> "LatticeNetwork":
        g = np.asarray(conductances, dtype=float).reshape(-1)
        if g.shape[0] != lat.edge_count:
            raise DimensionError(f"{g.shape[0]} conductances for {lat.edge_count} edges")
        return cls(lat, np.diag(g), tol)

    @property
    def is_psd(self) -> bool:
        return is_psd(self.sigma, self.tol)

    @cached_property
    def decomposition(self) -> OrthoDecomp:
        return lattice_decomposition(self.lattice, self.tol)


def _require_psd(net: LatticeNetwork):
    if not net.is_psd:
        raise HypothesisViolation(PSD_HYPOTHESIS)


def lattice_zproblem(net: LatticeNetwork) -> ZProblem:
    """The lattice Z-problem ``(F_sharp(E), U, E, J, sigma)``."""
    return ZProblem(net.sigma, net.decomposition, net.tol)


def lattice_effective_operator(net: LatticeNetwork) -> EffectiveOperator:
    """The ``1 x 1`` effective operator on the constants.

    Raises
    ------
    HypothesisViolation
        When ``sigma`` is not self-adjoint positive semidefinite.
    """
    _require_psd(net)
    return effective_operator(lattice_zproblem(net))


def _extended_block_gradients(lat: Lattice, tol: Tolerances) -> Subspace:
    """Periodic gradient fields found from potentials on a doubled cell.

    Potentials live on the box ``[0, 2 tau)`` without wrap-around.  We ask
    that their gradient takes equal values on box edges that differ by a
    period, then read the gradient on the edges leaving the unit cell.  Every
    plaquette fits inside the box, so the result is exactly the set of
    periodic fields with a potential on ``Z^d``.
    """
    shape = tuple(2 * t for t in lat.tau)
    box = list(itertools.product(*(range(s) for s in shape)))
    index = {x: i for i, x in enumerate(box)}
    edge_of: dict[tuple[tuple[int, ...], int], int] = {}
    rows = []
    for x in box:
        for k in range(lat.d):
            y = list(x)
            y[k] += 1
            y = tuple(y)
            if y in index:
                edge_of[(x, k)] = len(rows)
                row = np.zeros(len(box))
                row[index[y]] += 1.0
                row[index[x]] -= 1.0
                rows.append(row)
    grad = np.array(rows)
    constraints = []
    for (x, k), e in edge_of.items():
        for j in range(lat.d):
            shifted = list(x)
            shifted[j] += lat.tau[j]
            other = edge_of.get((tuple(shifted), k))
            if other is not None:
                constraints.append(grad[e] - grad[other])
    potentials = kernel(np.array(constraints), tol) if constraints else Subspace.whole(len(box))
    cell_rows = [edge_of[(x, k)] for x in lat.nodes() for k in range(lat.d)]
    fields = grad[cell_rows] @ potentials.basis
    return range_space(fields, tol)


def ranD_intersect_periodic(lat: Lattice, tol: Tolerances = DEFAULT_TOLERANCES,  # noqa: N802
                            method: str = "analytic") -> Subspace:
    """Periodic edge fields that are gradients of some potential on ``Z^d``.

    Parameters
    ----------
    method : {"analytic", "extended_block"}
        ``"analytic"`` returns ``ran D_sharp + span(axis indicators)``: a
        potential with periodic gradient is periodic up to a linear term.
        ``"extended_block"`` solves for such potentials on a doubled cell
        and costs ``2^d`` times the cell size; use it on small cells.
    """
    if method == "analytic":
        ops = build_periodic_ops(lat)
        return range_space(np.hstack([ops.D_sharp, axis_indicators(lat)]), tol)
    if method == "extended_block":
        return _extended_block_gradients(lat, tol)
    raise InputError(f"unknown method {method!r}")


def periodic_dirichlet_decomp(lat: Lattice, tol: Tolerances = DEFAULT_TOLERANCES) -> OrthoDecomp:
    """The triple ``(U_sharp, E_sharp, J_sharp)``.

    ``U_sharp`` holds the periodic gradients with zero divergence,
    ``E_sharp = ran D_sharp`` and ``J_sharp`` is the complement of all
    periodic gradients.
    """
    ops = build_periodic_ops(lat)
    gradients = ranD_intersect_periodic(lat, tol)
    e_sharp = range_space(ops.D_sharp, tol)
    u_sharp = gradients.minus(e_sharp, tol)
    j_sharp = gradients.complement(tol)
    return OrthoDecomp([u_sharp, e_sharp, j_sharp], tol)


@dataclass(frozen=True)
class ExistenceReport:
    """Outcome of the effective conductivity kernel criterion.

    Attributes
    ----------
    exists : bool
        ``ker(P_E sigma P_V) ⊆ ker(P_U sigma P_V)``.
    v_dim : int
        Dimension of ``V``, the complement of ``U`` in the periodic gradients.
    conductivity : float or None
        ``sigma_eff``, the effective operator, when it exists and
        ``sigma`` is self-adjoint.
    residual : float
        ``|P_U sigma P_V N|`` for an orthonormal basis ``N`` of the kernel on
        the left.
    """

    exists: bool
    v_dim: int
    conductivity: float | None
    residual: float


def effcond_exists(net: LatticeNetwork) -> ExistenceReport:
    """Decide whether the periodic Ohm's law has a single-valued average map."""
    _require_psd(net)
    tol = net.tol
    decomp = net.decomposition
    gradients = ranD_intersect_periodic(net.lattice, tol)
    v_space = gradients.minus(decomp[0], tol)
    p_u, p_e = decomp[0].projection(), decomp[1].projection()
    if v_space.dim == 0:
        exists, residual = True, 0.0
    else:
        restricted = net.sigma @ v_space.basis
        scale = max(spectral_norm(net.sigma), 1.0)
        left = p_e @ restricted
        right = p_u @ restricted
        exists = kernel_included(left, right, tol, scale=scale)
        null = kernel(left, tol, scale=scale)
        residual = float(np.linalg.norm(right @ null.basis, 2)) if null.dim else 0.0
    conductivity = None
    if exists:
        eff = effective_operator(lattice_zproblem(net))
        conductivity = float(np.real(eff.matrix[0, 0]))
    return ExistenceReport(exists, v_space.dim, conductivity, residual)


def ohm_law_solutions(net: LatticeNetwork) -> Subspace:
    """Voltages ``V`` in the periodic gradients with ``sigma V`` divergence free.

    Together with ``J = sigma V`` these are all pairs satisfying the
    periodic Ohm's law; used as a brute-force cross-check of
    :func:`effcond_exists`.
    """
    tol = net.tol
    ops = build_periodic_ops(net.lattice)
    gradients = ranD_intersect_periodic(net.lattice, tol)
    coords = kernel(ops.Dbullet_sharp @ net.sigma @ gradients.basis, tol,
                    scale=max(spectral_norm(net.sigma), 1.0) * 2 * net.lattice.d)
    return Subspace.span(gradients.basis @ coords.basis, net.lattice.edge_count, tol, scale=1.0)


@dataclass(frozen=True)
class CompressionReport:
    """``sigma_*`` against the compression of ``sigma_*_sharp`` to ``U``."""

    holds: bool
    lhs: np.ndarray
    rhs: np.ndarray


def compression_check(net: LatticeNetwork) -> CompressionReport:
    """Compare ``sigma_*`` with ``Gamma0 sigma_*_sharp Gamma0`` on ``U``."""
    _require_psd(net)
    lhs = lattice_effective_operator(net).matrix
    sharp = ZProblem(net.sigma, periodic_dirichlet_decomp(net.lattice, net.tol), net.tol)
    sharp_ambient = effective_operator(sharp).ambient()
    u_basis = net.decomposition[0].basis
    rhs = u_basis.conj().T @ sharp_ambient @ u_basis
    return CompressionReport(matrices_close(lhs, rhs, net.tol, atol=1e-8), lhs, rhs)


def axis_averages(lat: Lattice, field) -> np.ndarray:
    """Mean of an edge field over the edges of each axis; a diagnostic only."""
    f = np.asarray(field).reshape(-1)
    if f.shape[0] != lat.edge_count:
        raise DimensionError(f"field has {f.shape[0]} entries for {lat.edge_count} edges")
    return f.reshape(lat.node_count, lat.d).mean(axis=0)


def contrived_nonexistence_sigma(lat: Lattice, tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """PSD ``sigma`` with ``sigma I0 = sigma I = I0 + I`` and zero elsewhere.

    ``I0`` is the unit constant field and ``I`` a unit vector in
    ``J ∩ ran D``.  No effective conductivity exists for this ``sigma``.

    Raises
    ------
    InputError
        When ``J ∩ ran D`` is trivial for this lattice.
    """
    decomp = lattice_decomposition(lat, tol)
    overlap = decomp[2].intersection(ranD_intersect_periodic(lat, tol), tol)
    if overlap.dim == 0:
        raise InputError(f"J ∩ ran D is trivial for tau = {lat.tau}")
    i0 = decomp[0].basis[:, 0]
    i1 = overlap.basis[:, 0]
    w = i0 + i1
    return np.outer(w, w.conj())
