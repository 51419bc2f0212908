"""Dense scalar linear algebra with explicit rank decisions.

Every operator is a dense ``numpy`` array over the reals or the complex
numbers.  Rank decisions (pseudoinverse, kernels, ranges) are made from
singular values with a relative cutoff controlled by :class:`Tolerances`,
so that exact-rank arguments carry over to floating point in a predictable
way.

A subspace is stored as a :class:`Subspace`, i.e. a matrix whose columns
form an orthonormal basis.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg

from .errors import DimensionError, InputError, NumericalFailure

__all__ = [
    "Tolerances",
    "DEFAULT_TOLERANCES",
    "as_matrix",
    "as_vector",
    "spectral_norm",
    "rank_cutoff",
    "pinv",
    "penrose_residuals",
    "Subspace",
    "kernel",
    "range_space",
    "kernel_included",
    "matrices_close",
    "is_selfadjoint",
    "is_psd",
    "psd_leq",
    "min_eigenvalue",
    "pinv_reverses_order",
]


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances used for rank and equality decisions.

    Parameters
    ----------
    rank_rtol : float
        A singular value ``s`` counts as nonzero when
        ``s > rank_rtol * reference`` where the reference is the largest
        singular value (or a caller supplied scale, whichever is larger).
    eq_atol : float
        Absolute elementwise tolerance for matrix equality.
    psd_atol : float
        Allowed negativity of the smallest eigenvalue in semidefiniteness
        tests.
    """

    rank_rtol: float = 1e-10
    eq_atol: float = 1e-9
    psd_atol: float = 1e-9

    def __post_init__(self):
        for name in ("rank_rtol", "eq_atol", "psd_atol"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise InputError(f"tolerance {name} must be a positive finite number, got {value!r}")

    def replace(self, **changes) -> "Tolerances":
        """Return a copy with some fields replaced."""
        fields = {"rank_rtol": self.rank_rtol, "eq_atol": self.eq_atol, "psd_atol": self.psd_atol}
        fields.update(changes)
        return Tolerances(**fields)


DEFAULT_TOLERANCES = Tolerances()


def as_matrix(a, *, name: str = "matrix") -> np.ndarray:
    """Convert ``a`` to a 2-D float64 or complex128 array and check finiteness."""
    arr = np.asarray(a)
    if arr.ndim == 1 and arr.size == 0:
        arr = arr.reshape(0, 0)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be two-dimensional, got shape {arr.shape}")
    if np.iscomplexobj(arr):
        arr = arr.astype(np.complex128, copy=False)
    else:
        arr = arr.astype(np.float64, copy=False)
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} has non-finite entries")
    return arr


def as_vector(v, *, name: str = "vector") -> np.ndarray:
    """Convert ``v`` to a 1-D float64 or complex128 array and check finiteness."""
    arr = np.asarray(v)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be one-dimensional, got shape {arr.shape}")
    arr = arr.astype(np.complex128 if np.iscomplexobj(arr) else np.float64, copy=False)
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} has non-finite entries")
    return arr


def _svd(a: np.ndarray, full_matrices: bool):
    try:
        return np.linalg.svd(a, full_matrices=full_matrices)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"SVD did not converge: {exc}") from exc


def spectral_norm(a) -> float:
    """Largest singular value; zero for empty matrices."""
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(_svd(a, False)[1][0])


def rank_cutoff(singular_values: np.ndarray, tol: Tolerances, scale: float | None = None) -> float:
    """Threshold below which singular values are treated as zero.

    ``scale`` lets a caller measure a sub-block against the norm of the
    operator it came from, so that round-off in an exactly zero block is
    not promoted to a tiny nonzero singular value.
    """
    top = float(singular_values[0]) if singular_values.size else 0.0
    reference = max(top, float(scale) if scale else 0.0)
    return tol.rank_rtol * reference


def pinv(a, tol: Tolerances = DEFAULT_TOLERANCES, *, scale: float | None = None) -> np.ndarray:
    """Moore-Penrose pseudoinverse from a thin SVD.

    Parameters
    ----------
    a : array_like, shape (m, n)
        Real or complex matrix.
    tol : Tolerances
        ``tol.rank_rtol`` sets the relative singular value cutoff.
    scale : float, optional
        Reference magnitude for the cutoff when ``a`` is a block of a larger
        operator.

    Returns
    -------
    ndarray, shape (n, m)
    """
    a = as_matrix(a)
    m, n = a.shape
    if a.size == 0:
        return np.zeros((n, m), dtype=a.dtype)
    u, s, vh = _svd(a, False)
    keep = s > rank_cutoff(s, tol, scale)
    return (vh[keep].conj().T / s[keep]) @ u[:, keep].conj().T


def penrose_residuals(a, a_plus) -> tuple[float, float, float, float]:
    """Max-abs residuals of the four Penrose equations.

    The equations are ``A X A = A``, ``X A X = X``, ``(A X)* = A X`` and
    ``(X A)* = X A`` with ``X = a_plus``.
    """
    a = np.asarray(a)
    x = np.asarray(a_plus)

    def _max(m):
        return float(np.max(np.abs(m))) if m.size else 0.0

    ax = a @ x
    xa = x @ a
    return (
        _max(ax @ a - a),
        _max(xa @ x - x),
        _max(ax.conj().T - ax),
        _max(xa.conj().T - xa),
    )


class Subspace:
    """A subspace of ``K^n`` held as an orthonormal basis.

    Parameters
    ----------
    basis : array_like, shape (n, r)
        Columns must be orthonormal.  Use :meth:`span` to build a subspace
        from arbitrary spanning vectors.
    ambient_dim : int, optional
        Needed only when ``basis`` has no rows to infer it from.
    check : bool
        Verify orthonormality.
    """

    def __init__(self, basis, ambient_dim: int | None = None, *, check: bool = True,
                 tol: Tolerances = DEFAULT_TOLERANCES):
        b = np.asarray(basis)
        if b.ndim == 1:
            b = b.reshape(-1, 1) if b.size else np.zeros((ambient_dim or 0, 0))
        if b.ndim != 2:
            raise DimensionError(f"basis must be two-dimensional, got shape {b.shape}")
        if ambient_dim is not None and b.shape[0] != ambient_dim:
            if b.size == 0:
                b = np.zeros((ambient_dim, 0), dtype=b.dtype)
            else:
                raise DimensionError(f"basis has {b.shape[0]} rows, expected {ambient_dim}")
        b = as_matrix(b, name="basis").copy()
        if check and b.shape[1]:
            gram = b.conj().T @ b
            err = float(np.max(np.abs(gram - np.eye(b.shape[1]))))
            if err > 1e3 * tol.eq_atol:
                raise InputError(f"basis columns are not orthonormal (error {err:.2e})")
        b.setflags(write=False)
        self._basis = b

    # construction helpers
    @classmethod
    def span(cls, vectors, ambient_dim: int | None = None, tol: Tolerances = DEFAULT_TOLERANCES,
             *, scale: float | None = None) -> "Subspace":
        """Orthonormalize the columns of ``vectors`` with pivoted QR.

        Columns whose pivoted ``|R_kk|`` falls below the rank cutoff are
        dropped.
        """
        v = np.asarray(vectors)
        if v.ndim == 1:
            v = v.reshape(-1, 1)
        if ambient_dim is None:
            ambient_dim = v.shape[0]
        if v.size == 0:
            return cls.trivial(ambient_dim)
        v = as_matrix(v, name="vectors")
        if v.shape[0] != ambient_dim:
            raise DimensionError(f"vectors have {v.shape[0]} rows, expected {ambient_dim}")
        q, r, _ = scipy.linalg.qr(v, mode="economic", pivoting=True)
        diag = np.abs(np.diag(r))
        if diag.size == 0:
            return cls.trivial(ambient_dim)
        cutoff = tol.rank_rtol * max(float(diag[0]), float(scale) if scale else 0.0)
        rank = int(np.sum(diag > cutoff))
        return cls(q[:, :rank], ambient_dim, check=False)

    @classmethod
    def trivial(cls, ambient_dim: int) -> "Subspace":
        """The zero subspace of ``K^ambient_dim``."""
        return cls(np.zeros((ambient_dim, 0)), ambient_dim, check=False)

    @classmethod
    def whole(cls, ambient_dim: int) -> "Subspace":
        """The whole space with the standard basis."""
        return cls(np.eye(ambient_dim), ambient_dim, check=False)

    @classmethod
    def coordinate(cls, ambient_dim: int, indices) -> "Subspace":
        """Span of the standard basis vectors ``e_i`` for ``i`` in ``indices``."""
        idx = [int(i) for i in indices]
        if len(set(idx)) != len(idx) or any(i < 0 or i >= ambient_dim for i in idx):
            raise InputError(f"invalid coordinate indices {idx} for dimension {ambient_dim}")
        b = np.zeros((ambient_dim, len(idx)))
        for col, i in enumerate(idx):
            b[i, col] = 1.0
        return cls(b, ambient_dim, check=False)

    # basic data
    @property
    def basis(self) -> np.ndarray:
        """Orthonormal basis, shape ``(ambient_dim, dim)``."""
        return self._basis

    @property
    def ambient_dim(self) -> int:
        return self._basis.shape[0]

    @property
    def dim(self) -> int:
        return self._basis.shape[1]

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self._basis)

    def __repr__(self) -> str:
        return f"Subspace(dim={self.dim}, ambient_dim={self.ambient_dim})"

    @cached_property
    def _projection(self) -> np.ndarray:
        p = self._basis @ self._basis.conj().T
        p.setflags(write=False)
        return p

    def projection(self) -> np.ndarray:
        """Orthogonal projection onto the subspace, ``B B*``."""
        return self._projection

    def coordinates(self, v) -> np.ndarray:
        """Coordinates ``B* v`` of a vector (or columns of a matrix)."""
        return self._basis.conj().T @ np.asarray(v)

    def embed(self, c) -> np.ndarray:
        """Ambient vector ``B c`` from coordinates."""
        return self._basis @ np.asarray(c)

    def distance(self, v) -> float:
        """Euclidean distance from ``v`` to the subspace."""
        v = np.asarray(v)
        return float(np.linalg.norm(v - self._basis @ (self._basis.conj().T @ v)))

    def contains(self, v, atol: float | None = None, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
        """Whether ``v`` lies in the subspace up to ``atol * max(1, |v|)``."""
        atol = tol.eq_atol if atol is None else atol
        v = np.asarray(v)
        return self.distance(v) <= atol * max(1.0, float(np.linalg.norm(v)))

    # lattice operations
    def complement(self, tol: Tolerances = DEFAULT_TOLERANCES) -> "Subspace":
        """Orthogonal complement in the ambient space."""
        if self.dim == 0:
            return Subspace.whole(self.ambient_dim)
        return kernel(self._basis.conj().T, tol, scale=1.0)

    def sum(self, other: "Subspace", tol: Tolerances = DEFAULT_TOLERANCES) -> "Subspace":
        """The (not necessarily direct) sum ``self + other``."""
        self._check_same_ambient(other)
        return Subspace.span(np.hstack([self._basis, other._basis]), self.ambient_dim, tol, scale=1.0)

    def intersection(self, other: "Subspace", tol: Tolerances = DEFAULT_TOLERANCES) -> "Subspace":
        """``self`` intersected with ``other``."""
        self._check_same_ambient(other)
        if self.dim == 0 or other.dim == 0:
            return Subspace.trivial(self.ambient_dim)
        residual = self._basis - other.projection() @ self._basis
        coeffs = kernel(residual, tol, scale=1.0)
        return Subspace.span(self._basis @ coeffs.basis, self.ambient_dim, tol, scale=1.0)

    def minus(self, other: "Subspace", tol: Tolerances = DEFAULT_TOLERANCES) -> "Subspace":
        """Orthogonal difference: vectors of ``self`` orthogonal to ``other``."""
        self._check_same_ambient(other)
        if self.dim == 0 or other.dim == 0:
            return self
        coeffs = kernel(other._basis.conj().T @ self._basis, tol, scale=1.0)
        return Subspace.span(self._basis @ coeffs.basis, self.ambient_dim, tol, scale=1.0)

    def is_subspace_of(self, other: "Subspace", tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
        """Whether every basis vector of ``self`` lies in ``other``."""
        self._check_same_ambient(other)
        if self.dim == 0:
            return True
        residual = self._basis - other.projection() @ self._basis
        return float(np.max(np.abs(residual))) <= tol.eq_atol

    def equals(self, other: "Subspace", tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
        """Equality as subspaces, compared through projections."""
        self._check_same_ambient(other)
        if self.dim != other.dim:
            return False
        return matrices_close(self.projection(), other.projection(), tol)

    def is_orthogonal_to(self, other: "Subspace", tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
        self._check_same_ambient(other)
        if self.dim == 0 or other.dim == 0:
            return True
        return float(np.max(np.abs(self._basis.conj().T @ other._basis))) <= tol.eq_atol

    def _check_same_ambient(self, other: "Subspace"):
        if self.ambient_dim != other.ambient_dim:
            raise DimensionError(
                f"subspaces live in different spaces ({self.ambient_dim} vs {other.ambient_dim})")


def kernel(a, tol: Tolerances = DEFAULT_TOLERANCES, *, scale: float | None = None) -> Subspace:
    """Null space of ``a`` from the right singular vectors."""
    a = as_matrix(a)
    m, n = a.shape
    if n == 0:
        return Subspace.trivial(0)
    if m == 0:
        return Subspace.whole(n)
    _, s, vh = _svd(a, True)
    rank = int(np.sum(s > rank_cutoff(s, tol, scale)))
    return Subspace(vh[rank:].conj().T, n, check=False)


def range_space(a, tol: Tolerances = DEFAULT_TOLERANCES, *, scale: float | None = None) -> Subspace:
    """Column space of ``a`` from the left singular vectors."""
    a = as_matrix(a)
    m, n = a.shape
    if m == 0 or n == 0:
        return Subspace.trivial(m)
    u, s, _ = _svd(a, False)
    rank = int(np.sum(s > rank_cutoff(s, tol, scale)))
    return Subspace(u[:, :rank], m, check=False)


def kernel_included(a, b, tol: Tolerances = DEFAULT_TOLERANCES, *, scale: float | None = None) -> bool:
    """Whether ``ker a`` is contained in ``ker b``.

    With ``N`` an orthonormal basis of ``ker a`` the test is
    ``|b N| <= eq_atol * max(1, |b|)`` in the spectral norm.
    """
    a = as_matrix(a, name="a")
    b = as_matrix(b, name="b")
    if a.shape[1] != b.shape[1]:
        raise DimensionError(f"column counts differ: {a.shape[1]} vs {b.shape[1]}")
    null = kernel(a, tol, scale=scale)
    if null.dim == 0 or b.shape[0] == 0:
        return True
    return spectral_norm(b @ null.basis) <= tol.eq_atol * max(1.0, spectral_norm(b))


def matrices_close(a, b, tol: Tolerances = DEFAULT_TOLERANCES, atol: float | None = None) -> bool:
    """Elementwise absolute comparison with ``tol.eq_atol``."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        return False
    if a.size == 0:
        return True
    return float(np.max(np.abs(a - b))) <= (tol.eq_atol if atol is None else atol)


def _require_square(a: np.ndarray, name: str = "matrix"):
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {a.shape}")


def _relative_atol(a: np.ndarray, atol: float) -> float:
    return atol * max(1.0, float(np.max(np.abs(a)))) if a.size else atol


def is_selfadjoint(a, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    """Whether ``a* = a`` elementwise within ``eq_atol * max(1, max|a_ij|)``."""
    a = as_matrix(a)
    _require_square(a)
    return matrices_close(a, a.conj().T, tol, atol=_relative_atol(a, tol.eq_atol))


def min_eigenvalue(a) -> float:
    """Smallest eigenvalue of the Hermitian part of ``a`` (inf when empty)."""
    a = as_matrix(a)
    _require_square(a)
    if a.size == 0:
        return float("inf")
    herm = 0.5 * (a + a.conj().T)
    try:
        return float(np.linalg.eigvalsh(herm)[0])
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigensolver did not converge: {exc}") from exc


def is_psd(a, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    """Self-adjoint with smallest eigenvalue at least ``-psd_atol * max(1, max|a_ij|)``."""
    a = as_matrix(a)
    _require_square(a)
    return is_selfadjoint(a, tol) and min_eigenvalue(a) >= -_relative_atol(a, tol.psd_atol)


def psd_leq(a, b, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    """Loewner order ``a <= b``, i.e. ``b - a`` is positive semidefinite."""
    a = as_matrix(a, name="a")
    b = as_matrix(b, name="b")
    _require_square(a, "a")
    if a.shape != b.shape:
        raise DimensionError(f"shapes differ: {a.shape} vs {b.shape}")
    return is_psd(b - a, tol)


def pinv_reverses_order(x, y, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    """For ``0 <= x <= y``, whether ``pinv(y) <= pinv(x)``.

    The answer is affirmative exactly when ``ker x == ker y``; callers use
    this to check that statement empirically.
    """
    return psd_leq(pinv(y, tol), pinv(x, tol), tol)
