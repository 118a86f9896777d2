from __future__ import annotations

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from _helpers import rand_complex, rand_density, rand_hermitian
from absorbing_flows.errors import DimensionMismatch, NoConvergence, NotHermitian
from absorbing_flows.generator import commutator_map
from absorbing_flows.matrixcore import (
    expm,
    gram_rank,
    herm_eig,
    null_space,
    spectral_norm,
    trace_norm,
)
from absorbing_flows.weyl import clock_shift, weyl_family

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def test_herm_eig_diagonal():
    res = herm_eig(np.diag([2 / 3, 1 / 3]))
    np.testing.assert_allclose(res.eigenvalues, [1 / 3, 2 / 3], atol=1e-15)
    np.testing.assert_allclose(np.abs(res.eigenvectors), [[0, 1], [1, 0]], atol=1e-15)


def test_herm_eig_pauli_x():
    res = herm_eig(np.array([[0, 1], [1, 0]]))
    np.testing.assert_allclose(res.eigenvalues, [-1, 1], atol=1e-14)
    for k, expected in enumerate([np.array([1, -1]), np.array([1, 1])]):
        overlap = abs(np.vdot(res.eigenvectors[:, k], expected / np.sqrt(2)))
        assert overlap == pytest.approx(1.0, abs=1e-14)


@settings(max_examples=40, deadline=None)
@given(seed=seeds, r=st.integers(1, 9))
def test_herm_eig_reconstruction(seed, r):
    h = rand_hermitian(r, np.random.default_rng(seed))
    vals, vecs = herm_eig(h)
    assert np.all(np.diff(vals) >= 0)
    np.testing.assert_allclose(vecs @ np.diag(vals) @ vecs.conj().T, h, atol=1e-11)
    assert np.linalg.norm(vecs.conj().T @ vecs - np.eye(r)) <= 1e-12
    np.testing.assert_allclose(vals, np.linalg.eigvalsh(h), atol=1e-11)


def test_herm_eig_errors():
    with pytest.raises(NotHermitian):
        herm_eig(np.array([[0, 1], [0, 0]]))
    with pytest.raises(DimensionMismatch):
        herm_eig(np.ones((2, 3)))
    with pytest.raises(NoConvergence):
        herm_eig(rand_hermitian(6, np.random.default_rng(0)), sweep_cap=1)


def test_expm_examples():
    np.testing.assert_array_equal(expm(np.zeros((3, 3))), np.eye(3))
    np.testing.assert_allclose(expm(np.diag([0.3, -2.0])), np.diag(np.exp([0.3, -2.0])), rtol=1e-14)
    rot = expm(np.array([[0, -3], [3, 0]], dtype=float))
    assert np.linalg.norm(rot @ rot.conj().T - np.eye(2)) <= 1e-12
    np.testing.assert_allclose(rot, [[np.cos(3), -np.sin(3)], [np.sin(3), np.cos(3)]], atol=1e-14)


@settings(max_examples=30, deadline=None)
@given(seed=seeds, r=st.integers(1, 8), scale=st.floats(1e-3, 30.0))
def test_expm_matches_scipy(seed, r, scale):
    a = rand_complex(r, np.random.default_rng(seed))
    a = a * scale / np.linalg.norm(a)
    ref = scipy.linalg.expm(a)
    assert np.linalg.norm(expm(a) - ref) <= 1e-12 * max(1.0, np.linalg.norm(ref))


def test_expm_semigroup():
    a = rand_complex(4, np.random.default_rng(1))
    np.testing.assert_allclose(expm(0.3 * a) @ expm(0.7 * a), expm(a), atol=1e-12)


def test_trace_norm_examples():
    assert trace_norm(np.diag([0.5, -0.5])) == pytest.approx(1.0, abs=1e-15)
    assert trace_norm(rand_density(4, np.random.default_rng(2))) == pytest.approx(1.0, abs=1e-12)
    assert trace_norm(np.diag([1.0, 0.0]) - np.diag([0.0, 1.0])) == pytest.approx(2.0, abs=1e-15)


@settings(max_examples=30, deadline=None)
@given(seed=seeds, r=st.integers(2, 6))
def test_trace_norm_against_svd(seed, r):
    h = rand_hermitian(r, np.random.default_rng(seed))
    assert trace_norm(h) == pytest.approx(np.linalg.svd(h, compute_uv=False).sum(), rel=1e-11)
    assert spectral_norm(h) == pytest.approx(np.linalg.norm(h, 2), rel=1e-11)


def test_null_space_examples():
    assert null_space(np.eye(3)) == []
    assert len(null_space(np.zeros((3, 3)))) == 3
    kernel = null_space(commutator_map(np.diag([1.0, -1.0])).matrix)
    assert len(kernel) == 2
    for vec in kernel:
        x = vec.reshape(2, 2)
        assert abs(x[0, 1]) < 1e-14 and abs(x[1, 0]) < 1e-14


def test_null_space_matches_scipy():
    rng = np.random.default_rng(3)
    a = rand_complex(6, rng, cols=9)
    ours = np.column_stack(null_space(a))
    ref = scipy.linalg.null_space(a)
    np.testing.assert_allclose(ours @ ours.conj().T, ref @ ref.conj().T, atol=1e-12)


def test_gram_rank_examples():
    eye = np.eye(2)
    assert gram_rank([eye, eye]) == 1
    u = np.diag([1.0, -1.0])
    assert gram_rank([u, 2 * u]) == 1
    words = list(weyl_family(clock_shift(2, np.eye(2))).values())
    assert gram_rank(words) == 4
    with pytest.raises(ValueError):
        gram_rank([])
