"""The Z-problem and its effective operator.

A Z-problem consists of an orthogonal decomposition ``H = U (+) E (+) J``
and an operator ``sigma`` on ``H``.  Given ``e0`` in ``U`` one looks for
``j0`` in ``U``, ``e`` in ``E`` and ``j`` in ``J`` with

    j0 + j = sigma (e0 + e).

Writing ``s_ij`` for the blocks of ``sigma`` (index 0 for ``U``, 1 for
``E``, 2 for ``J``), the equation splits into ``s10 e0 + s11 e = 0`` plus
formulas for ``j0`` and ``j``.  It is solvable exactly for ``e0`` in
``s10^{-1}(ran s11)``, and ``j0`` depends only on ``e0`` exactly when
``ker s11 ⊆ ker s01``.  In that case the map ``e0 -> j0`` is the
generalized Schur complement ``s00 - s01 s11^+ s10`` of the compression of
``sigma`` to ``U (+) E``.

Vectors passed to and returned from this module are ambient vectors in
``H``; effective operators are matrices in the orthonormal coordinates of
``U``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .blockop import OrthoDecomp, gsc, split
from .errors import DimensionError, HypothesisViolation, InputError, UnsolvableError
from .numkit import (
    DEFAULT_TOLERANCES,
    Subspace,
    Tolerances,
    as_matrix,
    as_vector,
    is_psd,
    is_selfadjoint,
    kernel,
    kernel_included,
    matrices_close,
    min_eigenvalue,
    pinv,
    psd_leq,
    range_space,
)

__all__ = [
    "ZProblem",
    "HypothesisReport",
    "check_hypotheses",
    "ZSolution",
    "solve",
    "EffectiveOperator",
    "effective_operator",
    "Obstruction",
    "effective_operator_obstruction",
    "DirichletResult",
    "dirichlet_min",
    "dual_problem",
    "DualityReport",
    "duality_identity_check",
    "ThomsonResult",
    "thomson_min",
    "BoundsReport",
    "bounds",
]

U_PART, E_PART, J_PART = 0, 1, 2

COMPRESSION_SELFADJOINT = "U(+)E compression self-adjoint"
KERNEL_INCLUSION = "ker s11 ⊆ ker s01"
S11_PSD = "s11 >= 0"


class ZProblem:
    """A Z-problem ``(H, U, E, J, sigma)``.

    Parameters
    ----------
    sigma : array_like, shape (n, n)
        The operator on ``H = K^n``.
    decomp : OrthoDecomp
        Exactly three parts, in the order ``U, E, J``.
    tol : Tolerances
    """

    def __init__(self, sigma, decomp: OrthoDecomp, tol: Tolerances = DEFAULT_TOLERANCES):
        sigma = as_matrix(sigma, name="sigma")
        if sigma.shape[0] != sigma.shape[1]:
            raise DimensionError(f"sigma must be square, got shape {sigma.shape}")
        if len(decomp) != 3:
            raise InputError(f"a Z-problem needs three parts (U, E, J), got {len(decomp)}")
        if decomp.ambient_dim != sigma.shape[0]:
            raise DimensionError(
                f"decomposition dimension {decomp.ambient_dim} does not match sigma {sigma.shape}")
        sigma = sigma.copy()
        sigma.setflags(write=False)
        self._sigma = sigma
        self._decomp = decomp
        self._tol = tol

    @classmethod
    def from_subspaces(cls, sigma, u: Subspace, e: Subspace, j: Subspace,
                       tol: Tolerances = DEFAULT_TOLERANCES) -> "ZProblem":
        return cls(sigma, OrthoDecomp([u, e, j], tol), tol)

    @classmethod
    def from_indices(cls, sigma, u_idx, e_idx, j_idx,
                     tol: Tolerances = DEFAULT_TOLERANCES) -> "ZProblem":
        """Z-problem whose parts are spans of standard basis vectors."""
        n = np.asarray(sigma).shape[0]
        return cls(sigma, OrthoDecomp.coordinate(n, [u_idx, e_idx, j_idx]), tol)

    @property
    def sigma(self) -> np.ndarray:
        return self._sigma

    @property
    def decomp(self) -> OrthoDecomp:
        return self._decomp

    @property
    def tol(self) -> Tolerances:
        return self._tol

    @property
    def dim(self) -> int:
        return self._sigma.shape[0]

    @property
    def U(self) -> Subspace:  # noqa: N802 - conventional name of the part
        return self._decomp[U_PART]

    @property
    def E(self) -> Subspace:  # noqa: N802
        return self._decomp[E_PART]

    @property
    def J(self) -> Subspace:  # noqa: N802
        return self._decomp[J_PART]

    @cached_property
    def view(self):
        """Block view of ``sigma`` over ``(U, E, J)``."""
        return split(self._sigma, self._decomp)

    @property
    def scale(self) -> float:
        """Spectral norm of ``sigma``; reference for block rank decisions."""
        return self.view.scale

    def block(self, i: int, j: int) -> np.ndarray:
        """Block ``s_ij`` in part coordinates (0 = U, 1 = E, 2 = J)."""
        return self.view.block(i, j)

    @cached_property
    def compression(self):
        """Two-part view of the compression of ``sigma`` to ``U (+) E``."""
        return self.view.compression([U_PART, E_PART])

    @cached_property
    def hypotheses(self) -> "HypothesisReport":
        return _compute_hypotheses(self)

    def __repr__(self) -> str:
        return f"ZProblem(dims={self._decomp.dims})"

    # coordinate helpers
    def u_coordinates(self, v) -> np.ndarray:
        """Coordinates in ``U`` of an ambient vector that lies in ``U``."""
        v = as_vector(v, name="vector")
        if v.shape[0] != self.dim:
            raise DimensionError(f"vector has length {v.shape[0]}, expected {self.dim}")
        if not self.U.contains(v, tol=self._tol):
            raise InputError(f"vector is not in U (distance {self.U.distance(v):.3e})")
        return self.U.coordinates(v)


@dataclass(frozen=True)
class HypothesisReport:
    """Cached hypothesis checks for one Z-problem.

    The derived properties ``h1``, ``h2`` and ``h3`` are the three standard
    hypothesis sets: ``sigma* = sigma >= 0`` invertible; ``sigma* = sigma``
    with ``s11 >= 0`` invertible; and a self-adjoint ``U (+) E`` compression
    with ``s11 >= 0`` and ``ker s11 ⊆ ker s01``.  ``h4`` (finite dimension)
    always holds here.
    """

    sigma_selfadjoint: bool
    sigma_psd: bool
    sigma_invertible: bool
    compression_selfadjoint: bool
    s11_psd: bool
    s11_invertible: bool
    kernel_inclusion: bool

    @property
    def h1(self) -> bool:
        return self.sigma_selfadjoint and self.sigma_psd and self.sigma_invertible

    @property
    def h2(self) -> bool:
        return self.sigma_selfadjoint and self.s11_psd and self.s11_invertible

    @property
    def h3(self) -> bool:
        return self.compression_selfadjoint and self.s11_psd and self.kernel_inclusion

    @property
    def h4(self) -> bool:
        return True

    def as_dict(self) -> dict:
        return {
            "H1": self.h1, "H2": self.h2, "H3": self.h3, "H4": self.h4,
            "sigma_selfadjoint": self.sigma_selfadjoint,
            "sigma_psd": self.sigma_psd,
            "sigma_invertible": self.sigma_invertible,
            "compression_selfadjoint": self.compression_selfadjoint,
            "s11_psd": self.s11_psd,
            "s11_invertible": self.s11_invertible,
            "kernel_inclusion": self.kernel_inclusion,
        }


def _is_invertible(a: np.ndarray, tol: Tolerances, scale: float) -> bool:
    return a.shape[0] == a.shape[1] and kernel(a, tol, scale=scale).dim == 0


def _compute_hypotheses(zp: ZProblem) -> HypothesisReport:
    tol, scale = zp.tol, zp.scale
    s11 = zp.block(E_PART, E_PART)
    s01 = zp.block(U_PART, E_PART)
    sa = is_selfadjoint(zp.sigma, tol)
    return HypothesisReport(
        sigma_selfadjoint=sa,
        sigma_psd=is_psd(zp.sigma, tol) if zp.dim else True,
        sigma_invertible=_is_invertible(zp.sigma, tol, scale),
        compression_selfadjoint=is_selfadjoint(zp.compression.coordinate_matrix(), tol),
        s11_psd=is_psd(s11, tol),
        s11_invertible=_is_invertible(s11, tol, scale),
        kernel_inclusion=kernel_included(s11, s01, tol, scale=scale),
    )


def check_hypotheses(zp: ZProblem) -> HypothesisReport:
    """Hypothesis report of ``zp`` (computed once per problem)."""
    return zp.hypotheses


def _solvable_coordinates(zp: ZProblem) -> Subspace:
    """``s10^{-1}(ran s11)`` in U coordinates, as ``ker((I - P_ran s11) s10)``."""
    s10 = zp.block(E_PART, U_PART)
    s11 = zp.block(E_PART, E_PART)
    ran = range_space(s11, zp.tol, scale=zp.scale)
    residual = s10 - ran.projection() @ s10 if ran.dim else s10
    return kernel(residual, zp.tol, scale=zp.scale)


@dataclass(frozen=True)
class EffectiveOperator:
    """Effective operator of a Z-problem.

    Attributes
    ----------
    matrix : ndarray
        ``s00 - s01 s11^+ s10`` in U coordinates.
    u_basis : ndarray
        Orthonormal basis of ``U`` used for the coordinates.
    domain : Subspace
        Ambient subspace of ``U`` on which the Z-problem is solvable.
    exists : bool
        ``ker s11 ⊆ ker s01``.  Only then is ``e0 -> j0`` single valued;
        otherwise ``matrix`` records the choice ``e = -s11^+ s10 e0`` and is
        not an effective operator.
    hypotheses : HypothesisReport
    """

    matrix: np.ndarray
    u_basis: np.ndarray
    domain: Subspace
    exists: bool
    hypotheses: HypothesisReport

    @property
    def full_domain(self) -> bool:
        return self.domain.dim == self.u_basis.shape[1]

    def ambient(self) -> np.ndarray:
        """The operator on ``H``: ``B M B*`` composed with the domain projection."""
        op = self.u_basis @ self.matrix @ self.u_basis.conj().T
        return op if self.full_domain else op @ self.domain.projection()

    def apply(self, e0) -> np.ndarray:
        """``j0`` for an ambient ``e0`` in the domain."""
        e0 = as_vector(e0, name="e0")
        if not self.domain.contains(e0):
            raise UnsolvableError("e0 is outside the solvable domain",
                                  nearest=self.domain.projection() @ e0,
                                  distance=self.domain.distance(e0))
        return self.u_basis @ (self.matrix @ (self.u_basis.conj().T @ e0))


def effective_operator(zp: ZProblem) -> EffectiveOperator:
    """Effective operator and its solvable domain.

    The domain is ``s10^{-1}(ran s11)``; it is all of ``U`` whenever the
    ``U (+) E`` compression is self-adjoint and ``ker s11 ⊆ ker s01``.
    A smaller domain is returned as a result rather than raised.
    """
    hyp = zp.hypotheses
    matrix = gsc(zp.compression, zp.tol)
    coords = _solvable_coordinates(zp)
    domain = Subspace.span(zp.U.basis @ coords.basis, zp.dim, zp.tol, scale=1.0)
    return EffectiveOperator(matrix, zp.U.basis, domain, hyp.kernel_inclusion, hyp)


@dataclass(frozen=True)
class Obstruction:
    """Two solutions at ``e0 = 0`` with different ``j0``.

    ``(0, 0, 0)`` always solves the problem at zero; ``(j0, e, j)`` below is
    a second solution with ``j0 != 0``.
    """

    e: np.ndarray
    j0: np.ndarray
    j: np.ndarray


def effective_operator_obstruction(zp: ZProblem) -> Obstruction | None:
    """Witness that no effective operator exists, or ``None`` if one does."""
    s11 = zp.block(E_PART, E_PART)
    s01 = zp.block(U_PART, E_PART)
    null = kernel(s11, zp.tol, scale=zp.scale)
    if null.dim == 0:
        return None
    image = s01 @ null.basis
    if image.size == 0:
        return None
    u, s, vh = np.linalg.svd(image)
    if s[0] <= zp.tol.eq_atol * max(1.0, zp.scale):
        return None
    e = zp.E.basis @ (null.basis @ vh[0].conj())
    response = zp.sigma @ e
    return Obstruction(e=e, j0=zp.U.projection() @ response, j=zp.J.projection() @ response)


@dataclass(frozen=True)
class ZSolution:
    """Solutions of a Z-problem at ``e0``.

    Every ``e = e_particular + k`` with ``k`` in ``e_kernel`` solves the
    problem with the same ``j0``; the matching ``j`` is
    ``P_J sigma (e0 + e)`` (see :meth:`with_offset`).
    """

    e0: np.ndarray
    j0: np.ndarray
    e_particular: np.ndarray
    e_kernel: Subspace
    j: np.ndarray
    sigma: np.ndarray = field(repr=False)
    j_projection: np.ndarray = field(repr=False)

    @property
    def unique(self) -> bool:
        return self.e_kernel.dim == 0

    def with_offset(self, coeffs) -> tuple[np.ndarray, np.ndarray]:
        """``(e, j)`` for ``e = e_particular + K c`` with kernel basis ``K``."""
        c = np.asarray(coeffs)
        e = self.e_particular + self.e_kernel.basis @ c
        j = self.j_projection @ (self.sigma @ (self.e0 + e))
        return e, j

    def residual(self, e=None, j=None) -> float:
        """``|sigma (e0 + e) - (j0 + j)|`` (defaults to the particular solution)."""
        e = self.e_particular if e is None else e
        j = self.j if j is None else j
        return float(np.linalg.norm(self.sigma @ (self.e0 + e) - (self.j0 + j)))


def _require(zp: ZProblem, *names: str):
    hyp = zp.hypotheses
    status = {
        COMPRESSION_SELFADJOINT: hyp.compression_selfadjoint,
        KERNEL_INCLUSION: hyp.kernel_inclusion,
        S11_PSD: hyp.s11_psd,
    }
    failed = [n for n in names if not status[n]]
    if failed:
        raise HypothesisViolation(failed)


def solve(zp: ZProblem, e0) -> ZSolution:
    """Solve the Z-problem at ``e0``.

    Requires a self-adjoint ``U (+) E`` compression and
    ``ker s11 ⊆ ker s01``.  The solution is
    ``e = -s11^+ s10 e0 + ker s11``, ``j0 = s00 e0 + s01 e`` and
    ``j = s20 e0 + s21 e``; it is unique exactly when ``ker s11 = {0}``.

    Raises
    ------
    HypothesisViolation
        When a required hypothesis fails.
    UnsolvableError
        When ``e0`` lies outside ``s10^{-1}(ran s11)``; the error carries
        the nearest solvable vector.
    """
    _require(zp, COMPRESSION_SELFADJOINT, KERNEL_INCLUSION)
    c = zp.u_coordinates(e0)
    e0 = zp.U.embed(c)
    domain = _solvable_coordinates(zp)
    if domain.dim < c.shape[0] and not domain.contains(c, tol=zp.tol):
        nearest = zp.U.embed(domain.projection() @ c)
        raise UnsolvableError("e0 is outside the solvable domain", nearest=nearest,
                              distance=domain.distance(c))
    s = zp.view
    x = -pinv(s.block(1, 1), zp.tol, scale=zp.scale) @ (s.block(1, 0) @ c)
    j0 = zp.U.embed(s.block(0, 0) @ c + s.block(0, 1) @ x)
    j = zp.J.embed(s.block(2, 0) @ c + s.block(2, 1) @ x)
    null = kernel(s.block(1, 1), zp.tol, scale=zp.scale)
    e_kernel = Subspace(zp.E.basis @ null.basis, zp.dim, check=False)
    return ZSolution(e0, j0, zp.E.embed(x), e_kernel, j, zp.sigma, zp.J.projection())


@dataclass(frozen=True)
class DirichletResult:
    """Minimization of ``(e0 + e, sigma (e0 + e))`` over ``e`` in ``E``.

    ``value`` is the objective at ``minimizer``; ``effective_value`` is
    ``(e0, sigma_* e0)``.  The minimizers form ``minimizer + kernel``.
    """

    value: float
    effective_value: float
    minimizer: np.ndarray
    kernel: Subspace
    sigma: np.ndarray = field(repr=False)
    e0: np.ndarray = field(repr=False)

    def objective(self, e) -> float:
        w = self.e0 + np.asarray(e)
        return float(np.real(np.vdot(w, self.sigma @ w)))


def dirichlet_min(zp: ZProblem, e0) -> DirichletResult:
    """Generalized Dirichlet principle at ``e0``.

    Requires a self-adjoint ``U (+) E`` compression, ``s11 >= 0`` and
    ``ker s11 ⊆ ker s01``.
    """
    _require(zp, COMPRESSION_SELFADJOINT, S11_PSD, KERNEL_INCLUSION)
    sol = solve(zp, e0)
    eff = effective_operator(zp)
    c = zp.U.coordinates(sol.e0)
    effective_value = float(np.real(np.vdot(c, eff.matrix @ c)))
    w = sol.e0 + sol.e_particular
    value = float(np.real(np.vdot(w, zp.sigma @ w)))
    return DirichletResult(value, effective_value, sol.e_particular, sol.e_kernel, zp.sigma, sol.e0)


def dual_problem(zp: ZProblem) -> ZProblem:
    """The dual problem ``(H, U, J, E, sigma^+)``."""
    return ZProblem(pinv(zp.sigma, zp.tol), zp.decomp.reordered([U_PART, J_PART, E_PART]), zp.tol)


DUALITY_ITEMS = {
    "a": "sigma* = sigma",
    "b": "ker s11 ⊆ ker [s01; s21]",
    "c": "ker(sigma/s11) ⊆ ker [s10 s12]",
    "d": "ker (sigma+)22 ⊆ ker (sigma+)02",
    "e": "ker (sigma+)_*' ⊆ ker (sigma+)20",
}


@dataclass(frozen=True)
class DualityReport:
    """Comparison of the dual effective operator with ``pinv(sigma_*)``.

    ``hypotheses`` maps the letters ``a``..``e`` to booleans (see
    :data:`DUALITY_ITEMS`).  ``lhs`` is the dual effective operator
    ``(s+)00 - (s+)02 (s+)22^+ (s+)20`` and ``rhs`` is ``pinv(sigma_*)``,
    both in U coordinates.  ``holds`` means every hypothesis holds and the
    two sides agree.
    """

    holds: bool
    hypotheses: dict
    lhs: np.ndarray
    rhs: np.ndarray
    agree: bool
    residual: float

    @property
    def hypotheses_hold(self) -> bool:
        return all(self.hypotheses.values())

    @property
    def failed(self) -> tuple[str, ...]:
        return tuple(DUALITY_ITEMS[k] for k, ok in self.hypotheses.items() if not ok)


def duality_identity_check(zp: ZProblem) -> DualityReport:
    """Evaluate the duality hypotheses and both sides of ``(s+)_*' = (s_*)^+``."""
    tol, scale = zp.tol, zp.scale
    s = zp.view
    items = {"a": zp.hypotheses.sigma_selfadjoint}
    coupling = np.vstack([s.block(0, 1), s.block(2, 1)])
    items["b"] = kernel_included(s.block(1, 1), coupling, tol, scale=scale)
    outer = s.regrouped([[U_PART, J_PART], [E_PART]])
    items["c"] = kernel_included(gsc(outer, tol), outer.block(1, 0), tol, scale=scale)

    dual = dual_problem(zp)
    d = dual.view
    items["d"] = kernel_included(d.block(1, 1), d.block(0, 1), tol, scale=dual.scale)
    lhs = gsc(dual.compression, tol)
    items["e"] = kernel_included(lhs, d.block(1, 0), tol, scale=dual.scale)

    rhs = pinv(gsc(zp.compression, tol), tol, scale=scale)
    residual = float(np.max(np.abs(lhs - rhs))) if lhs.size else 0.0
    agree = matrices_close(lhs, rhs, tol)
    return DualityReport(all(items.values()) and agree, items, lhs, rhs, agree, residual)


@dataclass(frozen=True)
class ThomsonResult:
    """Minimization of ``(j0 + j, sigma^+ (j0 + j))`` over ``j`` in ``J``.

    ``value`` is ``(j0, pinv(sigma_*) j0)``; ``objective_at_minimizer`` is
    the dual objective evaluated at ``minimizer``.  The minimizers are
    ``minimizer + kernel``.
    """

    value: float
    objective_at_minimizer: float
    minimizer: np.ndarray
    kernel: Subspace
    sigma_plus: np.ndarray = field(repr=False)
    j0: np.ndarray = field(repr=False)

    def objective(self, j) -> float:
        w = self.j0 + np.asarray(j)
        return float(np.real(np.vdot(w, self.sigma_plus @ w)))


def thomson_min(zp: ZProblem, j0) -> ThomsonResult:
    """Generalized Thomson principle at ``j0`` in ``U``.

    Requires the duality hypotheses (a) through (e) and ``(sigma^+)_22 >= 0``.
    """
    report = duality_identity_check(zp)
    failed = list(report.failed)
    dual = dual_problem(zp)
    if not is_psd(dual.block(1, 1), zp.tol):
        failed.append("(sigma+)22 >= 0")
    if failed:
        raise HypothesisViolation(failed)
    c = zp.u_coordinates(j0)
    j0 = zp.U.embed(c)
    d = dual.view
    x = -pinv(d.block(1, 1), zp.tol, scale=dual.scale) @ (d.block(1, 0) @ c)
    minimizer = zp.J.embed(x)
    null = kernel(d.block(1, 1), zp.tol, scale=dual.scale)
    kern = Subspace(zp.J.basis @ null.basis, zp.dim, check=False)
    value = float(np.real(np.vdot(c, report.rhs @ c)))
    w = j0 + minimizer
    at_min = float(np.real(np.vdot(w, dual.sigma @ w)))
    return ThomsonResult(value, at_min, minimizer, kern, dual.sigma, j0)


@dataclass(frozen=True)
class BoundsReport:
    """Bounds ``0 <= lower <= sigma_* <= upper`` in U coordinates.

    ``lower`` is ``None`` (with ``notice`` explaining why) when the duality
    hypotheses fail or ``sigma`` is not positive semidefinite.
    """

    lower: np.ndarray | None
    effective: np.ndarray
    upper: np.ndarray
    chain_holds: bool
    notice: str = ""


def bounds(zp: ZProblem) -> BoundsReport:
    """Upper bound ``s00`` and, under duality, the lower bound
    ``[P (sigma^+)_00 P]^+`` with ``P`` the projection onto ``ran sigma_*``.
    """
    _require(zp, COMPRESSION_SELFADJOINT, S11_PSD, KERNEL_INCLUSION)
    tol, scale = zp.tol, zp.scale
    eff = gsc(zp.compression, tol)
    upper = zp.block(U_PART, U_PART)
    chain = psd_leq(eff, upper, tol)
    lower = None
    notice = ""
    if not zp.hypotheses.sigma_psd:
        notice = "lower bound skipped: sigma is not positive semidefinite"
    else:
        report = duality_identity_check(zp)
        if not report.hypotheses_hold:
            notice = "lower bound skipped: duality hypotheses fail: " + ", ".join(report.failed)
        else:
            proj = eff @ pinv(eff, tol, scale=scale)
            dual00 = dual_problem(zp).block(U_PART, U_PART)
            lower = pinv(proj @ dual00 @ proj, tol)
            chain = chain and is_psd(lower, tol) and psd_leq(lower, eff, tol)
    chain = chain and is_psd(eff, tol) if zp.hypotheses.sigma_psd else chain
    return BoundsReport(lower, eff, upper, bool(chain), notice)
