from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from apftower.linalg import EigenError, eigvalsh, extreme_singular_values, jacobi_eigvalsh


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 24), st.integers(0, 2**32 - 1))
def test_jacobi_matches_lapack(n, seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    a = x + x.conj().T
    got = jacobi_eigvalsh(a)
    ref = np.linalg.eigvalsh(a)
    assert np.max(np.abs(got - ref)) <= 1e-12 * max(1.0, np.max(np.abs(ref)))


def test_jacobi_real_and_diagonal_inputs():
    assert list(jacobi_eigvalsh(np.diag([3.0, -1.0, 2.0]))) == [-1.0, 2.0, 3.0]
    assert jacobi_eigvalsh([[2.0, 1.0], [1.0, 2.0]]) == pytest.approx([1.0, 3.0], abs=1e-15)


def test_jacobi_tiny_off_diagonal_converges():
    a = np.array([[1.0, 1e-9j], [-1e-9j, 1.0]])
    assert jacobi_eigvalsh(a) == pytest.approx([1 - 1e-9, 1 + 1e-9], abs=1e-15)


def test_iteration_cap():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(12, 12))
    with pytest.raises(EigenError):
        jacobi_eigvalsh(x + x.T, max_sweeps=1)


def test_extreme_singular_values_vs_svd():
    rng = np.random.default_rng(5)
    a = rng.normal(size=(9, 9)) + 1j * rng.normal(size=(9, 9))
    s = np.linalg.svd(a, compute_uv=False)
    lo, hi = extreme_singular_values(a)
    assert lo == pytest.approx(s[-1], rel=1e-10) and hi == pytest.approx(s[0], rel=1e-12)


def test_lapack_fallback_selected_for_large():
    a = np.eye(300)
    assert eigvalsh(a)[0] == pytest.approx(1.0)
    with pytest.raises(ValueError):
        eigvalsh(a, method="qr")
