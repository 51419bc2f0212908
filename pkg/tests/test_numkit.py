from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from effop.errors import DimensionError, InputError
from effop.numkit import (
    DEFAULT_TOLERANCES,
    Subspace,
    Tolerances,
    is_psd,
    is_selfadjoint,
    kernel,
    kernel_included,
    penrose_residuals,
    pinv,
    psd_leq,
    range_space,
)
from effop.verify import random_matrix, random_psd

seeds = st.integers(0, 2**32 - 1)


def _random_case(seed: int):
    rng = np.random.default_rng(seed)
    rows, cols = int(rng.integers(1, 10)), int(rng.integers(1, 10))
    rank = int(rng.integers(0, min(rows, cols) + 1))
    return random_matrix(rng, rows, cols, rank, complex_field=bool(seed % 2)), rank


@pytest.mark.parametrize(
    "a, expected",
    [
        ([[1.0, 1.0], [1.0, 0.0]], [[0.0, 1.0], [1.0, -1.0]]),
        ([[1.0, 1.0], [1.0, 1.0]], [[0.25, 0.25], [0.25, 0.25]]),
        (np.eye(4), np.eye(4)),
        (np.zeros((2, 3)), np.zeros((3, 2))),
    ],
)
def test_pinv_known_values(a, expected):
    np.testing.assert_allclose(pinv(a), expected, atol=1e-12)


def test_pinv_of_column():
    np.testing.assert_allclose(pinv([[3.0], [4.0]]), [[0.12, 0.16]], atol=1e-15)


def test_pinv_rejects_nonfinite():
    with pytest.raises(InputError):
        pinv([[np.nan, 1.0]])


@given(seeds)
def test_penrose_equations(seed):
    a, _ = _random_case(seed)
    scale = max(1.0, np.abs(a).max()) ** 2
    assert max(penrose_residuals(a, pinv(a))) <= 1e-9 * scale


@given(seeds)
def test_pinv_matches_numpy_reference(seed):
    a, _ = _random_case(seed)
    ref = np.linalg.pinv(a, rcond=1e-10)
    np.testing.assert_allclose(pinv(a), ref, atol=1e-8 * max(1.0, np.abs(ref).max()))


@given(seeds)
def test_pinv_involution_and_adjoint(seed):
    a, _ = _random_case(seed)
    plus = pinv(a)
    scale = max(1.0, np.abs(a).max())
    np.testing.assert_allclose(pinv(plus), a, atol=1e-7 * scale)
    np.testing.assert_allclose(pinv(a.conj().T), plus.conj().T, atol=1e-9 * max(1.0, np.abs(plus).max()))


@given(seeds)
def test_selfadjoint_pinv_commutes(seed):
    a, _ = _random_case(seed)
    h = a @ a.conj().T
    h = h - 0.5 * np.trace(h).real / h.shape[0] * np.eye(h.shape[0])
    plus = pinv(h)
    np.testing.assert_allclose(plus @ h, h @ plus, atol=1e-7)


@given(seeds)
def test_kernel_and_coimage_projections_sum_to_identity(seed):
    a, rank = _random_case(seed)
    ker = kernel(a)
    coimage = range_space(a.conj().T)
    assert ker.dim + coimage.dim == a.shape[1]
    assert coimage.dim == rank
    np.testing.assert_allclose(ker.projection() + coimage.projection(), np.eye(a.shape[1]), atol=1e-9)
    np.testing.assert_allclose(ker.projection(), np.eye(a.shape[1]) - pinv(a) @ a, atol=1e-8)


def test_kernel_of_ones():
    k = kernel([[1.0, 1.0], [1.0, 1.0]])
    assert k.dim == 1
    np.testing.assert_allclose(k.projection(), 0.5 * np.array([[1, -1], [-1, 1]]), atol=1e-12)


def test_kernel_of_identity_is_trivial():
    assert kernel(np.eye(3)).dim == 0


def test_range_of_column():
    r = range_space([[1.0], [0.0]])
    np.testing.assert_allclose(r.projection(), [[1, 0], [0, 0]], atol=1e-15)


@pytest.mark.parametrize(
    "a, b, expected",
    [
        ([[1.0]], [[1.0]], True),
        ([[0.0]], [[1.0]], False),
        ([[1.0, 1.0], [1.0, 1.0]], [[1.0, 1.0], [1.0, 1.0]], True),
    ],
)
def test_kernel_included_examples(a, b, expected):
    assert kernel_included(a, b) is expected


def test_kernel_included_dimension_mismatch():
    with pytest.raises(DimensionError):
        kernel_included(np.eye(2), np.eye(3))


@given(seeds)
def test_psd_blocks_satisfy_kernel_inclusion(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 10))
    a = random_psd(rng, n, int(rng.integers(0, n + 1)), complex_field=bool(seed % 2))
    n0 = int(rng.integers(1, n))
    assert kernel_included(a[n0:, n0:], a[:n0, n0:], scale=np.linalg.norm(a, 2))


def test_psd_examples():
    assert is_psd([[1.0, 1.0], [1.0, 1.0]])
    assert not is_psd([[1.0, 1.0], [1.0, 0.0]])
    assert np.isclose(np.linalg.eigvalsh([[1.0, 1.0], [1.0, 0.0]])[0], (1 - np.sqrt(5)) / 2)
    assert psd_leq(np.zeros((3, 3)), np.eye(3))
    assert not psd_leq(np.eye(3), np.zeros((3, 3)))


def test_selfadjoint_detects_complex_asymmetry():
    assert is_selfadjoint([[1.0, 1j], [-1j, 2.0]])
    assert not is_selfadjoint([[1.0, 1j], [1j, 2.0]])


def test_non_square_is_rejected():
    with pytest.raises(DimensionError):
        is_psd(np.ones((2, 3)))


def test_tolerances_must_be_positive():
    with pytest.raises(InputError):
        Tolerances(eq_atol=0.0)
    assert DEFAULT_TOLERANCES.replace(eq_atol=1e-6).eq_atol == 1e-6


def test_subspace_basis_is_read_only_copy():
    raw = np.eye(3)[:, :2].copy()
    sub = Subspace(raw)
    raw[0, 0] = 5.0
    assert sub.basis[0, 0] == 1.0
    with pytest.raises(ValueError):
        sub.basis[0, 0] = 2.0


def test_subspace_rejects_non_orthonormal_basis():
    with pytest.raises(InputError):
        Subspace(np.array([[1.0, 1.0], [0.0, 1.0]]))


@given(seeds)
def test_subspace_lattice_operations(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 9))
    a = Subspace.span(rng.standard_normal((n, int(rng.integers(1, n)))))
    b = Subspace.span(rng.standard_normal((n, int(rng.integers(1, n)))))
    p = a.projection()
    np.testing.assert_allclose(p, p.conj().T, atol=1e-12)
    np.testing.assert_allclose(p @ p, p, atol=1e-12)
    assert a.complement().dim == n - a.dim
    assert a.is_orthogonal_to(a.complement())
    total = a.sum(b)
    meet = a.intersection(b)
    assert total.dim + meet.dim == a.dim + b.dim
    assert meet.is_subspace_of(a) and meet.is_subspace_of(b)
    diff = total.minus(a)
    assert diff.dim == total.dim - a.dim
    assert diff.is_orthogonal_to(a)


def test_subspace_coordinate_and_equality():
    sub = Subspace.coordinate(4, [2, 0])
    assert sub.dim == 2
    assert sub.contains(np.array([3.0, 0.0, -1.0, 0.0]))
    assert not sub.contains(np.array([0.0, 1.0, 0.0, 0.0]))
    assert sub.equals(Subspace.span(np.array([[1.0, 1.0], [0, 0], [1.0, -1.0], [0, 0]])))
    with pytest.raises(InputError):
        Subspace.coordinate(3, [0, 0])
