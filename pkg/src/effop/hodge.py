"""Abstract Hodge decomposition for a pair of operators with ``T U = 0``.

For ``U: A -> B`` and ``T: B -> C`` with ``T U = 0`` the space ``B`` splits
orthogonally as ``ran T* (+) ker(T* T + U U*) (+) ran U``.  The projections
onto the outer parts are ``T^+ T`` and ``U U^+``; the harmonic part gets
the rest.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .blockop import OrthoDecomp
from .errors import ConditionViolation, DimensionError
from .numkit import (
    DEFAULT_TOLERANCES,
    Subspace,
    Tolerances,
    as_matrix,
    kernel,
    pinv,
    range_space,
    spectral_norm,
)

__all__ = ["HodgeInput", "HodgeDecomposition", "decompose", "CONDITION_RTOL"]

CONDITION_RTOL = 1e-10


@dataclass(frozen=True)
class HodgeInput:
    """Operators ``T: B -> C`` and ``U: A -> B``.

    Construction checks shapes and records ``|T U|`` relative to
    ``|T| |U|``.
    """

    T: np.ndarray
    U: np.ndarray

    def __post_init__(self):
        t = as_matrix(self.T, name="T")
        u = as_matrix(self.U, name="U")
        if t.shape[1] != u.shape[0]:
            raise DimensionError(f"T has {t.shape[1]} columns but U has {u.shape[0]} rows")
        object.__setattr__(self, "T", t)
        object.__setattr__(self, "U", u)

    @property
    def dim(self) -> int:
        return self.T.shape[1]

    @property
    def condition_residual(self) -> float:
        """``|T U| / (|T| |U|)``, zero when either operator vanishes."""
        nt, nu = spectral_norm(self.T), spectral_norm(self.U)
        if nt == 0.0 or nu == 0.0:
            return 0.0
        return spectral_norm(self.T @ self.U) / (nt * nu)


@dataclass(frozen=True)
class HodgeDecomposition:
    """The three parts and their projections.

    ``proj_ran_tstar = T^+ T``, ``proj_ran_u = U U^+`` and
    ``proj_harmonic = I - T^+ T - U U^+``.
    """

    ran_tstar: Subspace
    harmonic: Subspace
    ran_u: Subspace
    proj_ran_tstar: np.ndarray
    proj_harmonic: np.ndarray
    proj_ran_u: np.ndarray

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.ran_tstar.dim, self.harmonic.dim, self.ran_u.dim

    def as_decomp(self, order=("ran_tstar", "harmonic", "ran_u")) -> OrthoDecomp:
        """The parts as an :class:`OrthoDecomp` in the requested order."""
        return OrthoDecomp([getattr(self, name) for name in order])

    def projection_identity_residual(self) -> float:
        """Max-abs entry of ``T^+ T + U U^+ + P_harmonic - I``."""
        n = self.proj_harmonic.shape[0]
        total = self.proj_ran_tstar + self.proj_harmonic + self.proj_ran_u - np.eye(n)
        return float(np.max(np.abs(total))) if n else 0.0

    def orthogonality_residual(self) -> float:
        """Largest entry of ``P_i P_j`` over distinct pairs of projections."""
        projs = (self.proj_ran_tstar, self.proj_harmonic, self.proj_ran_u)
        worst = 0.0
        for i in range(3):
            for j in range(i + 1, 3):
                prod = projs[i] @ projs[j]
                if prod.size:
                    worst = max(worst, float(np.max(np.abs(prod))))
        return worst

    def subspace_projection_residual(self) -> float:
        """Disagreement between basis projections and the pseudoinverse formulas."""
        pairs = ((self.ran_tstar, self.proj_ran_tstar), (self.harmonic, self.proj_harmonic),
                 (self.ran_u, self.proj_ran_u))
        worst = 0.0
        for sub, proj in pairs:
            if proj.size:
                worst = max(worst, float(np.max(np.abs(sub.projection() - proj))))
        return worst


def decompose(data: HodgeInput, tol: Tolerances = DEFAULT_TOLERANCES,
              condition_rtol: float = CONDITION_RTOL) -> HodgeDecomposition:
    """Hodge decomposition of ``B`` for ``T U = 0``.

    The harmonic part is computed as the kernel of ``T* T + U U*`` with a
    single rank decision.

    Raises
    ------
    ConditionViolation
        When ``|T U| > condition_rtol |T| |U|``.
    """
    residual = data.condition_residual
    if residual > condition_rtol:
        raise ConditionViolation("T U = 0 fails", residual)
    t, u = data.T, data.U
    n = data.dim
    laplacian = t.conj().T @ t + u @ u.conj().T
    harmonic = kernel(laplacian, tol) if n else Subspace.trivial(0)
    ran_tstar = range_space(t.conj().T, tol) if t.size else Subspace.trivial(n)
    ran_u = range_space(u, tol) if u.size else Subspace.trivial(n)
    p_t = pinv(t, tol) @ t if t.size else np.zeros((n, n))
    p_u = u @ pinv(u, tol) if u.size else np.zeros((n, n))
    p_h = np.eye(n) - p_t - p_u
    return HodgeDecomposition(ran_tstar, harmonic, ran_u, p_t, p_h, p_u)
