"""Pure-Python/numpy twins of the compiled kernels in ``_ckernels.pyx``.

Signatures and results match exactly; these are used when the extension
is not built or when ``WLEMBED_PURE_PYTHON=1`` is set.
"""
import numpy as np
import scipy.sparse as sp

BACKEND = "python"


def subgraph_exists(g_adj, p_adj, order):
    g_adj = [int(x) for x in g_adj]
    p_adj = [int(x) for x in p_adj]
    order = [int(x) for x in order]
    n_g, n_p = len(g_adj), len(p_adj)
    if n_p == 0:
        return True
    if n_p > n_g:
        return False
    p_deg = [bin(x).count("1") for x in p_adj]
    g_deg = [bin(x).count("1") for x in g_adj]
    full = (1 << n_g) - 1
    mapping = [0] * n_p

    def extend(depth, used):
        if depth == n_p:
            return True
        u = order[depth]
        cand = full & ~used
        for k in range(depth):
            w = order[k]
            if (p_adj[u] >> w) & 1:
                cand &= g_adj[mapping[w]]
        while cand:
            bit = cand & -cand
            v = bit.bit_length() - 1
            cand ^= bit
            if g_deg[v] < p_deg[u]:
                continue
            mapping[u] = v
            if extend(depth + 1, used | bit):
                return True
        return False

    return extend(0, 0)


def csr_spmm(indptr, indices, data, X):
    n = len(indptr) - 1
    mat = sp.csr_matrix((data, indices, indptr), shape=(n, X.shape[0]))
    return np.ascontiguousarray(mat @ X)


def scatter_add_rows(out, idx, src):
    np.add.at(out, idx, src)
