from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from effop.blockop import (
    OrthoDecomp,
    aitken_valid,
    assemble,
    gen_babachiewicz,
    gsc,
    schur_min_oracle,
    split,
)
from effop.errors import DimensionError, HypothesisViolation, InputError
from effop.numkit import Subspace, kernel_included, pinv
from effop.verify import random_psd, random_two_block_selfadjoint, random_unitary

seeds = st.integers(0, 2**32 - 1)
FIRST = np.array([[1.0, 1.0], [1.0, 0.0]])
SECOND = np.array([[1.0, 1.0], [1.0, 1.0]])


def _scalar_split(x):
    return split(x, OrthoDecomp.consecutive([1, 1]))


def test_consecutive_decomposition_dims():
    d = OrthoDecomp.consecutive([2, 0, 3])
    assert d.dims == (2, 0, 3)
    assert d.ambient_dim == 5
    np.testing.assert_allclose(sum(d.projections()), np.eye(5))


def test_decomposition_must_be_complete_and_orthogonal():
    with pytest.raises(InputError):
        OrthoDecomp([Subspace.coordinate(3, [0]), Subspace.coordinate(3, [1])])
    with pytest.raises(InputError):
        OrthoDecomp([Subspace.coordinate(2, [0]), Subspace.span(np.array([[1.0], [1.0]]))])


def test_split_reassembles_in_rotated_coordinates(rng):
    q = random_unitary(rng, 5)
    decomp = OrthoDecomp([Subspace(q[:, :2]), Subspace(q[:, 2:])])
    a = rng.standard_normal((5, 5))
    view = split(a, decomp)
    np.testing.assert_allclose(view.reassemble(), a, atol=1e-12)
    np.testing.assert_allclose(view.block(0, 1), q[:, :2].T @ a @ q[:, 2:], atol=1e-12)


def test_split_shape_mismatch():
    with pytest.raises(DimensionError):
        split(np.eye(3), OrthoDecomp.consecutive([1, 1]))


def test_assemble_blocks():
    out = assemble([[np.eye(1), np.zeros((1, 2))], [np.ones((2, 1)), 2 * np.eye(2)]], [1, 2], [1, 2])
    np.testing.assert_array_equal(out, [[1, 0, 0], [1, 2, 0], [1, 0, 2]])


@pytest.mark.parametrize(
    "x, schur",
    [(FIRST, 1.0), (SECOND, 0.0), (np.array([[2.0, 1.0], [1.0, 2.0]]), 1.5),
     (np.array([[3.0, 0.0], [0.0, 0.0]]), 3.0)],
)
def test_gsc_scalar_blocks(x, schur):
    np.testing.assert_allclose(gsc(_scalar_split(x)), [[schur]], atol=1e-12)


def test_gsc_matches_inverse_formula_when_invertible(rng):
    x = random_psd(rng, 6) + np.eye(6)
    got = gsc(split(x, OrthoDecomp.consecutive([2, 4])))
    np.testing.assert_allclose(got, np.linalg.inv(np.linalg.inv(x)[:2, :2]), atol=1e-9)


def test_first_counterexample_blocks():
    report = gen_babachiewicz(_scalar_split(FIRST))
    np.testing.assert_allclose(pinv(FIRST), [[0, 1], [1, -1]], atol=1e-12)
    np.testing.assert_allclose(report.candidate, [[1, 0], [0, 0]], atol=1e-12)
    np.testing.assert_allclose(report.schur, [[1]], atol=1e-12)
    np.testing.assert_allclose(report.pinv_of_block00, [[0]], atol=1e-12)
    assert not report.matches_pinv and not report.valid
    assert report.failed == ("ker X11 ⊆ ker X01",)


def test_second_counterexample_blocks():
    report = gen_babachiewicz(_scalar_split(SECOND))
    np.testing.assert_allclose(pinv(SECOND), np.full((2, 2), 0.25), atol=1e-12)
    np.testing.assert_allclose(report.candidate, [[0, 0], [0, 1]], atol=1e-12)
    np.testing.assert_allclose(report.schur, [[0]], atol=1e-12)
    np.testing.assert_allclose(report.pinv_of_block00, [[4]], atol=1e-12)
    assert not report.matches_pinv and not report.valid


@given(seeds)
def test_babachiewicz_valid_implies_pinv(seed):
    rng = np.random.default_rng(seed)
    x, n0, _ = random_two_block_selfadjoint(rng, max_size=6, complex_field=bool(seed % 2))
    report = gen_babachiewicz(split(x, OrthoDecomp.consecutive([n0, x.shape[0] - n0])))
    if report.valid:
        assert report.matches_pinv


def test_babachiewicz_requires_selfadjoint():
    with pytest.raises(HypothesisViolation):
        gen_babachiewicz(_scalar_split(np.array([[1.0, 2.0], [0.0, 1.0]])))


@given(seeds)
def test_aitken_agrees_with_kernel_inclusion(seed):
    rng = np.random.default_rng(seed)
    x, n0, expected = random_two_block_selfadjoint(rng, complex_field=bool(seed % 2))
    view = split(x, OrthoDecomp.consecutive([n0, x.shape[0] - n0]))
    report = aitken_valid(view)
    x11, x01 = x[n0:, n0:], x[:n0, n0:]
    assert report.valid == report.kernel_inclusion == expected
    assert kernel_included(x11, x01, scale=np.linalg.norm(x, 2)) == expected


@given(seeds)
def test_aitken_always_valid_for_psd(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 10))
    x = random_psd(rng, n, int(rng.integers(0, n + 1)), complex_field=bool(seed % 2))
    n0 = int(rng.integers(1, n))
    assert aitken_valid(split(x, OrthoDecomp.consecutive([n0, n - n0]))).valid


def test_aitken_ones_matrix():
    report = aitken_valid(_scalar_split(SECOND))
    assert report.valid and report.residual <= 1e-12


def test_aitken_fails_when_zero_block_couples():
    report = aitken_valid(_scalar_split(FIRST))
    assert not report.valid and not report.kernel_inclusion
    assert aitken_valid(_scalar_split(np.array([[0.0, 1.0], [1.0, 1.0]]))).valid


def test_schur_min_on_ones():
    report = schur_min_oracle(_scalar_split(SECOND), [1.0], samples=200)
    np.testing.assert_allclose(report.minimizer, [-1.0], atol=1e-12)
    assert abs(report.value) <= 1e-12
    assert report.passed


@given(seeds)
def test_schur_min_beats_samples(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 9))
    x = random_psd(rng, n, int(rng.integers(1, n + 1)))
    n0 = int(rng.integers(1, n))
    report = schur_min_oracle(split(x, OrthoDecomp.consecutive([n0, n - n0])), rng.standard_normal(n0),
                              samples=100, rng_seed=seed)
    assert report.passed
    assert report.sampled_min >= report.value - 1e-9 * max(1.0, abs(report.value))
    assert abs(report.value - report.schur_value) <= 1e-8 * max(1.0, abs(report.value))


def test_schur_min_rejects_indefinite_block():
    with pytest.raises(HypothesisViolation):
        schur_min_oracle(_scalar_split(np.array([[1.0, 0.0], [0.0, -1.0]])), [1.0])
