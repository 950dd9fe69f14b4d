# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: subgraph backtracking, CSR products, row scatter."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t

cnp.import_array()

BACKEND = "cython"


cdef bint _extend(int depth, int n_p, int n_g,
                  const uint64_t* g_adj, const uint64_t* p_adj,
                  const int* order, const int* p_deg, const int* g_deg,
                  int* mapping, uint64_t used) noexcept nogil:
    cdef int u, w, v, k
    cdef uint64_t cand, bit
    if depth == n_p:
        return 1
    u = order[depth]
    cand = ~used
    if n_g < 64:
        cand &= ((<uint64_t>1) << n_g) - 1
    for k in range(depth):
        w = order[k]
        if (p_adj[u] >> w) & 1:
            cand &= g_adj[mapping[w]]
    while cand:
        bit = cand & (~cand + 1)
        v = 0
        while not ((bit >> v) & 1):
            v += 1
        cand ^= bit
        if g_deg[v] < p_deg[u]:
            continue
        mapping[u] = v
        if _extend(depth + 1, n_p, n_g, g_adj, p_adj, order, p_deg, g_deg,
                   mapping, used | bit):
            return 1
    return 0


def subgraph_exists(cnp.uint64_t[::1] g_adj, cnp.uint64_t[::1] p_adj, int[::1] order):
    """True iff the pattern (bitmask rows ``p_adj``) maps into the graph.

    ``order`` lists pattern nodes so every node after the first has an
    earlier neighbor when the pattern is connected. Both graphs must have
    at most 64 nodes.
    """
    cdef int n_g = g_adj.shape[0]
    cdef int n_p = p_adj.shape[0]
    cdef int i
    if n_p == 0:
        return True
    if n_p > n_g:
        return False
    cdef int[::1] p_deg = np.empty(n_p, dtype=np.intc)
    cdef int[::1] g_deg = np.empty(n_g, dtype=np.intc)
    cdef int[::1] mapping = np.zeros(n_p, dtype=np.intc)
    for i in range(n_p):
        p_deg[i] = _popcount(p_adj[i])
    for i in range(n_g):
        g_deg[i] = _popcount(g_adj[i])
    cdef bint found
    with nogil:
        found = _extend(0, n_p, n_g, &g_adj[0], &p_adj[0], &order[0],
                        &p_deg[0], &g_deg[0], &mapping[0], 0)
    return bool(found)


cdef inline int _popcount(uint64_t x) noexcept nogil:
    cdef int c = 0
    while x:
        x &= x - 1
        c += 1
    return c


def csr_spmm(cnp.int64_t[::1] indptr, cnp.int64_t[::1] indices,
             double[::1] data, double[:, ::1] X):
    """Dense result of (CSR matrix) @ X."""
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t d = X.shape[1]
    out_arr = np.zeros((n, d), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, p, j, c
    cdef double a
    with nogil:
        for i in range(n):
            for p in range(indptr[i], indptr[i + 1]):
                j = indices[p]
                a = data[p]
                for c in range(d):
                    out[i, c] += a * X[j, c]
    return out_arr


def scatter_add_rows(double[:, ::1] out, cnp.int64_t[::1] idx, double[:, ::1] src):
    """In place: ``out[idx[r]] += src[r]`` for every row ``r``."""
    cdef Py_ssize_t n = idx.shape[0]
    cdef Py_ssize_t d = src.shape[1]
    cdef Py_ssize_t r, c, t
    with nogil:
        for r in range(n):
            t = idx[r]
            for c in range(d):
                out[t, c] += src[r, c]
