from __future__ import annotations

import numpy as np
import pytest

from effop.errors import InputError
from effop.numkit import DEFAULT_TOLERANCES, kernel_included
from effop.verify import (
    SUITES,
    random_connected_graph,
    random_matrix,
    random_spectrum_psd,
    random_triple,
    random_two_block_selfadjoint,
    random_unitary,
    run_suite,
)
from effop.network import is_connected


@pytest.mark.parametrize("name", sorted(SUITES))
def test_suite_passes(name):
    report = run_suite(name, seed=3)
    assert report.passed, [c for c in report.checks if not c.passed]
    assert report.as_dict()["checks_total"] == len(report.checks)


@pytest.mark.parametrize("name", ["counterexamples", "algebra", "network", "lattice"])
def test_suite_fails_at_impossible_tolerance(name):
    report = run_suite(name, seed=0, tol=DEFAULT_TOLERANCES.replace(eq_atol=1e-30))
    assert not report.passed


def test_unknown_suite():
    with pytest.raises(InputError):
        run_suite("everything")


def test_suites_are_reproducible():
    a = run_suite("network", seed=5).as_dict()
    b = run_suite("network", seed=5).as_dict()
    assert [c["max_residual"] for c in a["checks"]] == [c["max_residual"] for c in b["checks"]]


def test_random_generators(rng):
    a = random_matrix(rng, 5, 4, 2, complex_field=True)
    assert a.shape == (5, 4) and np.linalg.matrix_rank(a) == 2
    q = random_unitary(rng, 4, complex_field=True)
    np.testing.assert_allclose(q.conj().T @ q, np.eye(4), atol=1e-12)
    w = np.linalg.eigvalsh(random_spectrum_psd(rng, 6))
    assert w.min() >= 0.05 - 1e-12 and w.max() <= 5.0 + 1e-12
    decomp = random_triple(rng, 6)
    assert sum(decomp.dims) == 6 and decomp.dims[0] >= 1
    assert is_connected(random_connected_graph(rng, 9))


def test_two_block_generator_reports_inclusion(rng):
    for _ in range(50):
        x, n0, inclusion = random_two_block_selfadjoint(rng)
        np.testing.assert_allclose(x, x.conj().T, atol=1e-12)
        scale = np.linalg.norm(x, 2)
        assert kernel_included(x[n0:, n0:], x[:n0, n0:], scale=scale) == inclusion
