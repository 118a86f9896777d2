from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _helpers import rand_complex, rand_hermitian, rand_state, rand_unitary
from absorbing_flows.errors import DimensionMismatch, NotAState, NotUnitary
from absorbing_flows.states import (
    centralizer_expectation,
    from_json,
    make_state,
    matrix_from_json,
    matrix_to_json,
    state_from_density,
    to_json,
    trace_pair,
)


def test_running_example():
    s = make_state([2 / 3, 1 / 3])
    np.testing.assert_allclose(s.density, np.diag([2 / 3, 1 / 3]), atol=1e-15)
    assert len(s.spectral_projections) == 2
    assert all(np.trace(e).real == pytest.approx(1.0) for e in s.spectral_projections)
    assert s.distinct_eigenvalues[0] < s.distinct_eigenvalues[1]
    assert not s.is_tracial


def test_tracial_state():
    s = make_state([0.5, 0.5])
    np.testing.assert_allclose(s.density, np.eye(2) / 2)
    assert s.is_tracial and len(s.spectral_projections) == 1
    np.testing.assert_allclose(s.spectral_projections[0], np.eye(2))


def test_three_distinct():
    assert len(make_state([0.5, 0.3, 0.2]).spectral_projections) == 3


@pytest.mark.parametrize(
    "lam, err",
    [([0.7, 0.2], NotAState), ([0.5, 0.6, -0.1], NotAState), ([1.0, 0.0], NotAState), ([0.3, 0.7], NotAState)],
)
def test_make_state_rejects(lam, err):
    with pytest.raises(err):
        make_state(lam)


def test_make_state_basis_checks():
    with pytest.raises(NotUnitary):
        make_state([0.6, 0.4], basis=np.array([[1, 1], [0, 1]]))
    with pytest.raises(DimensionMismatch):
        make_state([0.6, 0.4], basis=np.eye(3))


def test_state_from_density_roundtrip():
    s = rand_state(4, np.random.default_rng(0))
    t = state_from_density(s.density)
    np.testing.assert_allclose(t.density, s.density, atol=1e-12)
    np.testing.assert_allclose(t.eigenvalue_list, s.eigenvalue_list, atol=1e-12)


def test_centralizer_expectation_examples():
    s = make_state([2 / 3, 1 / 3])
    x = np.array([[1, 2], [3, 4]], dtype=complex)
    np.testing.assert_allclose(centralizer_expectation(s, x), np.diag([1, 4]))
    tr = make_state([1 / 3] * 3)
    y = rand_complex(3, np.random.default_rng(1))
    np.testing.assert_allclose(centralizer_expectation(tr, y), y, atol=1e-15)
    e1, e2 = s.spectral_projections
    t = np.array([[0, 1], [1, 0]], dtype=complex)
    assert np.linalg.norm(centralizer_expectation(s, e1 @ t @ e2)) == 0


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), r=st.integers(2, 6), degenerate=st.booleans())
def test_centralizer_expectation_properties(seed, r, degenerate):
    rng = np.random.default_rng(seed)
    s = rand_state(r, rng, degenerate=degenerate)
    x = rand_complex(r, rng)
    ex = centralizer_expectation(s, x)
    assert np.linalg.norm(ex, 2) <= np.linalg.norm(x, 2) + 1e-10
    np.testing.assert_allclose(centralizer_expectation(s, ex), ex, atol=1e-12)
    np.testing.assert_allclose(ex @ s.density, s.density @ ex, atol=1e-12)
    assert trace_pair(s.density, ex) == pytest.approx(trace_pair(s.density, x), abs=1e-12)


def test_trace_pair_examples():
    rng = np.random.default_rng(2)
    s = rand_state(3, rng)
    assert trace_pair(s.density, np.eye(3)) == pytest.approx(1.0, abs=1e-14)
    assert trace_pair(np.diag([2 / 3, 1 / 3]), np.array([[0, 1], [1, 0]])) == 0
    d = rand_hermitian(3, rng)
    x = rand_complex(3, rng)
    assert trace_pair(d, x) == pytest.approx(np.conj(trace_pair(d, x.conj().T)), abs=1e-13)
    with pytest.raises(DimensionMismatch):
        trace_pair(np.eye(2), np.eye(3))


def test_json_roundtrip():
    rng = np.random.default_rng(3)
    s = make_state([0.5, 0.3, 0.2], basis=rand_unitary(3, rng))
    back = from_json(json.loads(json.dumps(to_json(s))))
    np.testing.assert_allclose(back.density, s.density, atol=1e-15)
    m = rand_complex(3, rng)
    np.testing.assert_array_equal(matrix_from_json(json.loads(json.dumps(matrix_to_json(m)))), m)
