import itertools

import numpy as np
import pytest
import scipy.sparse as sp

from wlembed import kernels


def masks(n, edges):
    m = np.zeros(n, dtype=np.uint64)
    for i, j in edges:
        m[i] |= np.uint64(1 << j)
        m[j] |= np.uint64(1 << i)
    return m


def brute_force_contains(n_g, g_edges, n_p, p_edges):
    gset = {frozenset(e) for e in g_edges}
    for image in itertools.permutations(range(n_g), n_p):
        if all(frozenset((image[a], image[b])) in gset for a, b in p_edges):
            return True
    return False


def test_both_backends_present():
    assert "python" in kernels.available_backends()
    assert kernels.BACKEND in kernels.available_backends()


def test_subgraph_matches_brute_force(backend, rng):
    for _ in range(60):
        n = int(rng.integers(3, 7))
        g_edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.5]
        k = int(rng.integers(2, min(n, 4) + 1))
        p_edges = [(i, j) for i in range(k) for j in range(i + 1, k) if rng.random() < 0.6]
        order = np.arange(k, dtype=np.intc)
        got = backend.subgraph_exists(masks(n, g_edges), masks(k, p_edges), order)
        assert got == brute_force_contains(n, g_edges, k, p_edges)


def test_spmm_and_scatter(backend, rng):
    A = sp.random(7, 5, density=0.4, random_state=3, format="csr")
    A.sort_indices()
    X = rng.normal(size=(5, 3))
    got = backend.csr_spmm(A.indptr.astype(np.int64), A.indices.astype(np.int64), A.data, X)
    np.testing.assert_allclose(got, A @ X, rtol=1e-12, atol=1e-12)

    idx = np.array([0, 2, 0, 1, 2, 2], dtype=np.int64)
    src = rng.normal(size=(6, 4))
    out = np.zeros((3, 4))
    backend.scatter_add_rows(out, idx, src)
    want = np.zeros((3, 4))
    np.add.at(want, idx, src)
    np.testing.assert_allclose(out, want)


def test_backends_agree(rng):
    backends = kernels.available_backends()
    if len(backends) < 2:
        pytest.skip("compiled backend not built")
    py, cy = backends["python"], backends["cython"]
    A = sp.random(40, 40, density=0.1, random_state=1, format="csr")
    A.sort_indices()
    X = rng.normal(size=(40, 8))
    args = (A.indptr.astype(np.int64), A.indices.astype(np.int64), A.data, X)
    np.testing.assert_allclose(py.csr_spmm(*args), cy.csr_spmm(*args), rtol=1e-12)
