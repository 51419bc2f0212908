from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from effop.errors import ConditionViolation, DimensionError
from effop.hodge import HodgeInput, decompose
from effop.numkit import Subspace, kernel, range_space
from effop.verify import random_matrix

seeds = st.integers(0, 2**32 - 1)


def _random_pair(seed: int) -> HodgeInput:
    rng = np.random.default_rng(seed)
    complex_field = bool(seed % 2)
    n = int(rng.integers(1, 10))
    t = random_matrix(rng, int(rng.integers(1, 8)), n, int(rng.integers(0, n + 1)), complex_field)
    null = kernel(t)
    cols = int(rng.integers(1, 6))
    if null.dim:
        u = null.basis @ random_matrix(rng, null.dim, cols, int(rng.integers(0, min(null.dim, cols) + 1)),
                                       complex_field)
    else:
        u = np.zeros((n, cols))
    return HodgeInput(t, u)


def test_coordinate_example():
    t = np.array([[2.0, 0.0, 0.0]])
    u = np.array([[0.0], [3.0], [0.0]])
    h = decompose(HodgeInput(t, u))
    assert h.dims == (1, 1, 1)
    np.testing.assert_allclose(h.proj_ran_tstar, np.diag([1.0, 0, 0]), atol=1e-15)
    np.testing.assert_allclose(h.proj_ran_u, np.diag([0, 1.0, 0]), atol=1e-15)
    np.testing.assert_allclose(h.proj_harmonic, np.diag([0, 0, 1.0]), atol=1e-15)


def test_zero_operators_leave_everything_harmonic():
    h = decompose(HodgeInput(np.zeros((2, 4)), np.zeros((4, 3))))
    assert h.dims == (0, 4, 0)


def test_condition_violation_reports_residual():
    with pytest.raises(ConditionViolation) as info:
        decompose(HodgeInput(np.array([[1.0, 0.0]]), np.array([[1.0], [0.0]])))
    assert info.value.residual == pytest.approx(1.0)


def test_shape_mismatch():
    with pytest.raises(DimensionError):
        HodgeInput(np.zeros((2, 3)), np.zeros((2, 1)))


@given(seeds)
def test_projections_resolve_identity(seed):
    h = decompose(_random_pair(seed))
    assert h.projection_identity_residual() <= 1e-9
    assert h.orthogonality_residual() <= 1e-9
    assert h.subspace_projection_residual() <= 1e-9


@given(seeds)
def test_parts_match_set_definitions(seed):
    data = _random_pair(seed)
    h = decompose(data)
    assert h.ran_tstar.equals(range_space(data.T.conj().T))
    assert h.ran_u.equals(range_space(data.U))
    harmonic = kernel(data.T).intersection(kernel(data.U.conj().T))
    assert h.harmonic.equals(harmonic)
    assert sum(h.dims) == data.dim


@given(seeds)
def test_as_decomp_orders_parts(seed):
    h = decompose(_random_pair(seed))
    d = h.as_decomp(("ran_u", "ran_tstar", "harmonic"))
    assert d.dims == (h.ran_u.dim, h.ran_tstar.dim, h.harmonic.dim)
    assert isinstance(d[0], Subspace)
