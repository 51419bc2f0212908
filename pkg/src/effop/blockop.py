"""Block operators relative to orthogonal decompositions.

An operator ``X`` on ``H = H_0 (+) H_1 (+) ...`` is split into blocks
``X_ij = B_i* X B_j`` expressed in the orthonormal coordinates of each part.
All Schur-complement arithmetic happens on these rank-sized blocks so that
pseudoinverse rank decisions are made on the intrinsic operators.

For a self-adjoint two-part split this module provides the generalized
Schur complement ``X/X_11``, a validity test for the block UDL (Aitken)
factorization, the block pseudoinverse formula built from Schur
complements, and a sampling check of the Schur minimization identity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionError, HypothesisViolation, InputError
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
    pinv,
    spectral_norm,
)

__all__ = [
    "OrthoDecomp",
    "BlockView",
    "split",
    "assemble",
    "gsc",
    "schur_complement",
    "AitkenReport",
    "aitken_valid",
    "BabachiewiczReport",
    "gen_babachiewicz",
    "SchurMinReport",
    "schur_min_oracle",
]

KERNEL_11_IN_01 = "ker X11 ⊆ ker X01"
KERNEL_S_IN_10 = "ker(X/X11) ⊆ ker X10"
ROUNDING_FACTOR = 64.0


class OrthoDecomp:
    """An ordered orthogonal decomposition of ``K^n`` into subspaces.

    Parameters
    ----------
    parts : sequence of Subspace
        Mutually orthogonal subspaces whose dimensions add up to the
        ambient dimension.
    tol : Tolerances
        ``eq_atol`` bounds the entries of ``B_i* B_j`` for ``i != j``.
    """

    def __init__(self, parts: Sequence[Subspace], tol: Tolerances = DEFAULT_TOLERANCES):
        parts = tuple(parts)
        if not parts:
            raise InputError("a decomposition needs at least one part")
        n = parts[0].ambient_dim
        for k, p in enumerate(parts):
            if p.ambient_dim != n:
                raise DimensionError(f"part {k} lives in dimension {p.ambient_dim}, expected {n}")
        total = sum(p.dim for p in parts)
        if total != n:
            raise InputError(f"part dimensions sum to {total}, ambient dimension is {n}")
        for i in range(len(parts)):
            for j in range(i + 1, len(parts)):
                if parts[i].dim and parts[j].dim:
                    err = float(np.max(np.abs(parts[i].basis.conj().T @ parts[j].basis)))
                    if err > tol.eq_atol:
                        raise InputError(f"parts {i} and {j} are not orthogonal (overlap {err:.2e})")
        self._parts = parts
        self._n = n

    @classmethod
    def coordinate(cls, ambient_dim: int, index_sets: Sequence[Sequence[int]]) -> "OrthoDecomp":
        """Decomposition into spans of standard basis vectors."""
        return cls([Subspace.coordinate(ambient_dim, idx) for idx in index_sets])

    @classmethod
    def consecutive(cls, sizes: Sequence[int]) -> "OrthoDecomp":
        """Standard decomposition of ``K^(sum sizes)`` into consecutive blocks."""
        n = int(sum(sizes))
        sets, start = [], 0
        for s in sizes:
            sets.append(range(start, start + int(s)))
            start += int(s)
        return cls.coordinate(n, sets)

    @property
    def parts(self) -> tuple[Subspace, ...]:
        return self._parts

    @property
    def ambient_dim(self) -> int:
        return self._n

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(p.dim for p in self._parts)

    def __len__(self) -> int:
        return len(self._parts)

    def __getitem__(self, i: int) -> Subspace:
        return self._parts[i]

    def __iter__(self):
        return iter(self._parts)

    def __repr__(self) -> str:
        return f"OrthoDecomp(dims={self.dims})"

    def projections(self) -> list[np.ndarray]:
        """Orthogonal projections onto each part."""
        return [p.projection() for p in self._parts]

    def basis(self) -> np.ndarray:
        """Unitary matrix whose column blocks are the part bases."""
        return np.hstack([p.basis for p in self._parts]) if self._n else np.zeros((0, 0))

    def merged(self, indices: Sequence[int]) -> Subspace:
        """Direct sum of the selected parts."""
        cols = [self._parts[i].basis for i in indices]
        return Subspace(np.hstack(cols) if cols else np.zeros((self._n, 0)), self._n, check=False)

    def regroup(self, groups: Sequence[Sequence[int]]) -> "OrthoDecomp":
        """Coarser decomposition whose parts are sums of the given groups."""
        flat = sorted(i for g in groups for i in g)
        if flat != list(range(len(self._parts))):
            raise InputError(f"groups {groups} must partition the part indices")
        return OrthoDecomp([self.merged(g) for g in groups])

    def reordered(self, order: Sequence[int]) -> "OrthoDecomp":
        """Same parts in a different order."""
        if sorted(order) != list(range(len(self._parts))):
            raise InputError(f"{order} is not a permutation of the part indices")
        return OrthoDecomp([self._parts[i] for i in order])

    def equals(self, other: "OrthoDecomp", tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
        """Part-by-part equality as subspaces."""
        return len(self) == len(other) and all(a.equals(b, tol) for a, b in zip(self, other))


def assemble(blocks: Sequence[Sequence[np.ndarray]], row_dims: Sequence[int],
             col_dims: Sequence[int]) -> np.ndarray:
    """Concatenate a grid of coordinate blocks, allowing empty blocks."""
    dtype = np.result_type(*[np.asarray(b).dtype for row in blocks for b in row], np.float64)
    out = np.zeros((int(sum(row_dims)), int(sum(col_dims))), dtype=dtype)
    r0 = 0
    for i, rd in enumerate(row_dims):
        c0 = 0
        for j, cd in enumerate(col_dims):
            blk = np.asarray(blocks[i][j])
            if blk.shape != (rd, cd):
                raise DimensionError(f"block ({i},{j}) has shape {blk.shape}, expected {(rd, cd)}")
            out[r0:r0 + rd, c0:c0 + cd] = blk
            c0 += cd
        r0 += rd
    return out


@dataclass(frozen=True)
class BlockView:
    """An operator together with its blocks relative to two decompositions.

    ``blocks[i][j]`` is ``B_i* A C_j`` where ``B_i`` and ``C_j`` are the
    bases of row part ``i`` and column part ``j``.  ``scale`` is the
    spectral norm of the source operator; block pseudoinverses use it as the
    reference magnitude for rank decisions.
    """

    source: np.ndarray
    rows: OrthoDecomp
    cols: OrthoDecomp
    blocks: tuple[tuple[np.ndarray, ...], ...]
    scale: float

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.cols)

    def block(self, i: int, j: int) -> np.ndarray:
        return self.blocks[i][j]

    def coordinate_matrix(self) -> np.ndarray:
        """The source operator in the concatenated part coordinates."""
        return assemble(self.blocks, self.rows.dims, self.cols.dims)

    def reassemble(self) -> np.ndarray:
        """``sum_ij B_i X_ij C_j*``; reproduces ``source`` up to round-off."""
        return self.rows.basis() @ self.coordinate_matrix() @ self.cols.basis().conj().T

    def compression(self, indices: Sequence[int]) -> "BlockView":
        """Compression onto the sum of the selected parts (rows and columns).

        The result lives on the coordinate space of the selected parts with
        the consecutive standard decomposition, so its blocks are exactly
        the selected blocks of ``self``.
        """
        idx = list(indices)
        sub = tuple(tuple(self.blocks[i][j] for j in idx) for i in idx)
        row_dims = [self.rows.dims[i] for i in idx]
        col_dims = [self.cols.dims[j] for j in idx]
        matrix = assemble(sub, row_dims, col_dims)
        return BlockView(matrix, OrthoDecomp.consecutive(row_dims), OrthoDecomp.consecutive(col_dims),
                         sub, self.scale)

    def regrouped(self, groups: Sequence[Sequence[int]]) -> "BlockView":
        """View of the same operator relative to a coarser decomposition."""
        return split(self.source, self.rows.regroup(groups), self.cols.regroup(groups))


def split(a, rows: OrthoDecomp, cols: OrthoDecomp | None = None) -> BlockView:
    """Split ``a`` into blocks ``B_i* a C_j``.

    Parameters
    ----------
    a : array_like, shape (m, n)
    rows : OrthoDecomp of ``K^m``
    cols : OrthoDecomp of ``K^n``, optional
        Defaults to ``rows``.
    """
    a = as_matrix(a)
    cols = rows if cols is None else cols
    if a.shape != (rows.ambient_dim, cols.ambient_dim):
        raise DimensionError(
            f"operator of shape {a.shape} does not match decompositions "
            f"({rows.ambient_dim}, {cols.ambient_dim})")
    blocks = tuple(
        tuple(r.basis.conj().T @ a @ c.basis for c in cols.parts) for r in rows.parts
    )
    return BlockView(a, rows, cols, blocks, spectral_norm(a))


def _two_block(view: BlockView):
    if view.shape != (2, 2):
        raise InputError(f"expected a 2x2 block view, got {view.shape}")
    x00, x01 = view.blocks[0]
    x10, x11 = view.blocks[1]
    if x00.shape[0] != x00.shape[1] or x11.shape[0] != x11.shape[1]:
        raise DimensionError("diagonal blocks must be square")
    return x00, x01, x10, x11


def schur_complement(x00, x01, x10, x11, tol: Tolerances = DEFAULT_TOLERANCES,
                     *, scale: float | None = None) -> np.ndarray:
    """``x00 - x01 pinv(x11) x10`` for explicit blocks."""
    return x00 - x01 @ pinv(x11, tol, scale=scale) @ x10


def gsc(view: BlockView, tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """Generalized Schur complement ``X/X_11 = X_00 - X_01 X_11^+ X_10``.

    Returned in the coordinates of the first part.
    """
    x00, x01, x10, x11 = _two_block(view)
    return schur_complement(x00, x01, x10, x11, tol, scale=view.scale)


def _require_selfadjoint(view: BlockView, tol: Tolerances):
    if not is_selfadjoint(view.coordinate_matrix(), tol):
        raise HypothesisViolation("X* = X", "the block formulas assume a self-adjoint operator")


@dataclass(frozen=True)
class AitkenReport:
    """Outcome of the block UDL factorization test.

    Truthiness follows :attr:`valid`.
    """

    valid: bool
    kernel_inclusion: bool
    residual: float
    failed: tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.valid


def aitken_valid(view: BlockView, tol: Tolerances = DEFAULT_TOLERANCES) -> AitkenReport:
    """Test ``X = L* diag(X/X_11, X_11) L`` with ``L = [[I, 0], [X_11^+ X_10, I]]``.

    The factorization is rebuilt from pseudoinverses and compared to ``X``
    in the spectral norm.  The threshold is ``eq_atol * max(1, |X|)`` plus
    the rounding bound ``64 eps |L|^2 |M|`` of the triple product, which
    matters only when ``X_11`` is nearly singular.  The report also
    carries the independent kernel test ``ker X_11 ⊆ ker X_01``; the two
    must agree.
    """
    _require_selfadjoint(view, tol)
    x00, x01, x10, x11 = _two_block(view)
    n0, n1 = x00.shape[0], x11.shape[0]
    coupling = pinv(x11, tol, scale=view.scale) @ x10
    schur = x00 - x01 @ coupling
    lower = assemble([[np.eye(n0), np.zeros((n0, n1))], [coupling, np.eye(n1)]], [n0, n1], [n0, n1])
    middle = assemble([[schur, np.zeros((n0, n1))], [np.zeros((n1, n0)), x11]], [n0, n1], [n0, n1])
    rebuilt = lower.conj().T @ middle @ lower
    residual = spectral_norm(rebuilt - view.coordinate_matrix())
    # rounding in forming L* M L grows like eps |L|^2 |M|
    rounding = ROUNDING_FACTOR * np.finfo(float).eps * spectral_norm(lower) ** 2 * max(1.0, spectral_norm(middle))
    valid = bool(residual <= tol.eq_atol * max(1.0, view.scale) + rounding)
    inclusion = kernel_included(x11, x01, tol, scale=view.scale)
    failed = () if inclusion else (KERNEL_11_IN_01,)
    return AitkenReport(valid, inclusion, residual, failed)


@dataclass(frozen=True)
class BabachiewiczReport:
    """Block pseudoinverse candidate and its validity diagnostics.

    Attributes
    ----------
    candidate : ndarray
        The block formula, as an operator on the ambient space of the view.
    valid : bool
        Both kernel inclusions hold, which guarantees ``candidate == X^+``.
    matches_pinv : bool
        Direct comparison of ``candidate`` with the pseudoinverse.
    schur : ndarray
        ``X/X_11`` in first-part coordinates.
    pinv_block00 : ndarray
        ``(X^+)_00`` in first-part coordinates.
    pinv_of_block00 : ndarray
        ``[(X^+)_00]^+``, with rank decided relative to ``|X^+|``.
    failed : tuple of str
        Names of the failed kernel inclusions.
    """

    candidate: np.ndarray
    valid: bool
    matches_pinv: bool
    schur: np.ndarray
    pinv_block00: np.ndarray
    pinv_of_block00: np.ndarray
    inclusions: dict = field(default_factory=dict)
    failed: tuple[str, ...] = ()


def gen_babachiewicz(view: BlockView, tol: Tolerances = DEFAULT_TOLERANCES) -> BabachiewiczReport:
    """Pseudoinverse candidate assembled from a generalized Schur complement.

    With ``S = X/X_11`` the candidate is::

        [[ S^+,                  -S^+ X_01 X_11^+                         ],
         [ -X_11^+ X_10 S^+,      X_11^+ + X_11^+ X_10 S^+ X_01 X_11^+     ]]

    It equals ``X^+`` whenever ``ker X_11 ⊆ ker X_01`` and
    ``ker S ⊆ ker X_10``.
    """
    _require_selfadjoint(view, tol)
    x00, x01, x10, x11 = _two_block(view)
    n0, n1 = x00.shape[0], x11.shape[0]
    x11_plus = pinv(x11, tol, scale=view.scale)
    schur = x00 - x01 @ x11_plus @ x10
    schur_plus = pinv(schur, tol, scale=view.scale)
    c01 = -schur_plus @ x01 @ x11_plus
    c10 = -x11_plus @ x10 @ schur_plus
    c11 = x11_plus + x11_plus @ x10 @ schur_plus @ x01 @ x11_plus
    coords = assemble([[schur_plus, c01], [c10, c11]], [n0, n1], [n0, n1])
    basis = view.rows.basis()
    candidate = basis @ coords @ basis.conj().T

    first = kernel_included(x11, x01, tol, scale=view.scale)
    second = kernel_included(schur, x10, tol, scale=view.scale)
    failed = tuple(name for name, ok in ((KERNEL_11_IN_01, first), (KERNEL_S_IN_10, second)) if not ok)
    full_plus = pinv(view.source, tol)
    block00 = view.rows[0].basis.conj().T @ full_plus @ view.rows[0].basis
    return BabachiewiczReport(
        candidate=candidate,
        valid=first and second,
        matches_pinv=matrices_close(candidate, full_plus, tol,
                                    atol=tol.eq_atol * max(1.0, float(np.max(np.abs(full_plus))))),
        schur=schur,
        pinv_block00=block00,
        pinv_of_block00=pinv(block00, tol, scale=spectral_norm(full_plus)),
        inclusions={KERNEL_11_IN_01: first, KERNEL_S_IN_10: second},
        failed=failed,
    )


@dataclass(frozen=True)
class SchurMinReport:
    """Result of :func:`schur_min_oracle`.

    ``minimizer`` and ``kernel_basis`` are in second-part coordinates.
    """

    minimizer: np.ndarray
    value: float
    schur_value: float
    sampled_min: float
    samples: int
    kernel_basis: np.ndarray
    kernel_max_deviation: float
    passed: bool
    seed: int


def _quadratic(matrix: np.ndarray, w: np.ndarray) -> float:
    return float(np.real(np.vdot(w, matrix @ w)))


def schur_min_oracle(view: BlockView, u, samples: int = 1000, rng_seed: int = 0,
                     tol: Tolerances = DEFAULT_TOLERANCES,
                     scales: Sequence[float] = (0.1, 1.0, 10.0),
                     kernel_samples: int = 16) -> SchurMinReport:
    """Check ``(u, (X/X_11) u) = min_v (u + v, X (u + v))`` by sampling.

    Parameters
    ----------
    view : BlockView
        Two-part view of a self-adjoint ``X`` with ``X_11 >= 0`` and
        ``ker X_11 ⊆ ker X_01``.
    u : array_like
        Vector in first-part coordinates.
    samples : int
        Number of random perturbations of the analytic minimizer; their
        magnitudes cycle through ``scales``.
    rng_seed : int
        Seed for ``numpy.random.default_rng``.

    Raises
    ------
    HypothesisViolation
        Naming every failed precondition.
    """
    x00, x01, x10, x11 = _two_block(view)
    failed = []
    if not is_selfadjoint(view.coordinate_matrix(), tol):
        failed.append("X* = X")
    if not is_psd(x11, tol):
        failed.append("X11 >= 0")
    if not kernel_included(x11, x01, tol, scale=view.scale):
        failed.append(KERNEL_11_IN_01)
    if failed:
        raise HypothesisViolation(failed)
    u = as_vector(u, name="u")
    if u.shape[0] != x00.shape[0]:
        raise DimensionError(f"u has length {u.shape[0]}, expected {x00.shape[0]}")

    matrix = view.coordinate_matrix()
    x11_plus = pinv(x11, tol, scale=view.scale)
    v_star = -x11_plus @ (x10 @ u)
    value = _quadratic(matrix, np.concatenate([u, v_star]))
    schur_value = float(np.real(np.vdot(u, gsc(view, tol) @ u)))

    rng = np.random.default_rng(rng_seed)
    n1 = x11.shape[0]
    complex_field = np.iscomplexobj(matrix) or np.iscomplexobj(u)
    sampled_min = value
    if n1:
        sampled_min = np.inf
        for k in range(samples):
            d = rng.standard_normal(n1)
            if complex_field:
                d = d + 1j * rng.standard_normal(n1)
            d = d / np.linalg.norm(d)
            v = v_star + scales[k % len(scales)] * d
            sampled_min = min(sampled_min, _quadratic(matrix, np.concatenate([u, v])))

    null = kernel(x11, tol, scale=view.scale).basis if n1 else np.zeros((0, 0))
    deviation = 0.0
    if null.shape[1]:
        for k in range(kernel_samples):
            c = rng.standard_normal(null.shape[1])
            if complex_field:
                c = c + 1j * rng.standard_normal(null.shape[1])
            c *= scales[k % len(scales)] / np.linalg.norm(c)
            shifted = _quadratic(matrix, np.concatenate([u, v_star + null @ c]))
            deviation = max(deviation, abs(shifted - value))

    size = max(1.0, view.scale * (float(np.vdot(u, u).real) + float(np.vdot(v_star, v_star).real)))
    slack = tol.eq_atol * size
    passed = (value <= sampled_min + slack and abs(value - schur_value) <= slack
              and deviation <= slack * max(scales) ** 2)
    return SchurMinReport(v_star, value, schur_value, float(sampled_min), samples, null,
                          deviation, bool(passed), rng_seed)
