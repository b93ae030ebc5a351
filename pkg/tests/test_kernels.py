"""Compiled kernels against the numpy fallback."""

import os
import subprocess
import sys

import numpy as np
import pytest

from metriclen import _fallback
from metriclen._backend import DISCRETE, EUCLIDEAN, PNORM, SPHERICAL, SUP

ck = pytest.importorskip("metriclen._ckernels")

KINDS = [(EUCLIDEAN, 2.0), (PNORM, 1.0), (PNORM, 3.5), (SUP, 2.0), (DISCRETE, 2.0), (SPHERICAL, 2.0)]


def cloud(kind, k=300, dim=4, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((k, dim))
    if kind == SPHERICAL:
        X /= np.linalg.norm(X, axis=1)[:, None]
    if kind == DISCRETE:
        X = np.round(X)
    return np.ascontiguousarray(X)


@pytest.mark.parametrize("kind, p", KINDS)
def test_chord_lengths_and_sum(kind, p):
    X = cloud(kind)
    a, b = ck.chord_lengths(X, kind, p), _fallback.chord_lengths(X, kind, p)
    np.testing.assert_allclose(a, b, rtol=1e-14, atol=1e-15)
    assert ck.chord_sum(X, kind, p) == pytest.approx(_fallback.chord_sum(X, kind, p), rel=1e-13)


@pytest.mark.parametrize("kind, p", KINDS)
def test_row_distances(kind, p):
    X, Y = cloud(kind, seed=1), cloud(kind, seed=2)
    np.testing.assert_allclose(ck.row_distances(X, Y, kind, p), _fallback.row_distances(X, Y, kind, p),
                               rtol=1e-14, atol=1e-15)


@pytest.mark.parametrize("kind, p", KINDS)
def test_pairwise_max_same_pair(kind, p):
    X = cloud(kind, k=80, seed=3)
    va, ia, ja = ck.pairwise_max(X, kind, p)
    vb, ib, jb = _fallback.pairwise_max(X, kind, p)
    assert va == pytest.approx(vb, rel=1e-14)
    assert (ia, ja) == (ib, jb)


def test_euclidean_underflow_and_overflow_are_scaled():
    for scale in (1e-300, 1e-160, 1e200):
        pts = np.array([[0.0, 0.0], [3 * scale, 4 * scale]])
        for mod in (ck, _fallback):
            assert mod.chord_lengths(pts, EUCLIDEAN, 2.0)[0] == pytest.approx(5 * scale, rel=1e-15)


@pytest.mark.parametrize("sphere", [False, True])
def test_relax_and_respace(sphere):
    kind = SPHERICAL if sphere else EUCLIDEAN
    V = cloud(kind, k=33, dim=3, seed=4)
    A, B = V.copy(), V.copy()
    for parity in (1, 0):
        ck.relax_half(A, parity, sphere)
        _fallback.relax_half(B, parity, sphere)
    np.testing.assert_allclose(A, B, rtol=0, atol=1e-15)
    seg = _fallback.chord_lengths(A, kind, 2.0)
    np.testing.assert_allclose(ck.respace(A, seg, sphere), _fallback.respace(A, seg, sphere),
                               rtol=0, atol=1e-13)


def test_relax_half_parity_layout():
    V = np.arange(7.0)[:, None] ** 2
    W = V.copy()
    _fallback.relax_half(W, 1, False)
    assert np.array_equal(W[[0, 2, 4, 6]], V[[0, 2, 4, 6]])
    assert W[1, 0] == 0.5 * (V[0, 0] + V[2, 0])
    W = V.copy()
    _fallback.relax_half(W, 0, False)
    assert np.array_equal(W[[0, 1, 3, 5, 6]], V[[0, 1, 3, 5, 6]])


def test_respace_equalizes_segments():
    V = np.array([[0.0, 0.0], [0.1, 0.0], [0.2, 0.0], [3.0, 0.0]])
    out = _fallback.respace(V, _fallback.chord_lengths(V, EUCLIDEAN, 2.0), False)
    np.testing.assert_allclose(out[:, 0], [0.0, 1.0, 2.0, 3.0], atol=1e-15)
    assert np.array_equal(out[0], V[0]) and np.array_equal(out[-1], V[-1])


def test_pure_env_selects_fallback():
    code = "import metriclen; print(metriclen.BACKEND)"
    env = dict(os.environ, METRICLEN_PURE="1")
    pure = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert pure.stdout.strip() == "numpy"
    env["METRICLEN_PURE"] = "0"
    fast = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert fast.stdout.strip() == "cython"
