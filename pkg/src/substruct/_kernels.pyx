# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops: sparse LDL^T factorization and CSR assembly.

Mirrors ``_kernels_py`` function by function; see that module for the
reference semantics.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef cnp.int64_t idx_t

ctypedef fused ind_t:
    cnp.int32_t
    cnp.int64_t


def ldl_symbolic(idx_t n, const idx_t[::1] Ap, const idx_t[::1] Ai):
    """Elimination tree and column counts of L for a symmetric CSC pattern."""
    cdef idx_t[::1] parent = np.empty(n, dtype=np.int64)
    cdef idx_t[::1] lnz = np.zeros(n, dtype=np.int64)
    cdef idx_t[::1] flag = np.empty(n, dtype=np.int64)
    cdef idx_t[::1] Lp = np.empty(n + 1, dtype=np.int64)
    cdef idx_t k, p, i
    with nogil:
        for k in range(n):
            parent[k] = -1
            flag[k] = k
            for p in range(Ap[k], Ap[k + 1]):
                i = Ai[p]
                if i < k:
                    while flag[i] != k:
                        if parent[i] == -1:
                            parent[i] = k
                        lnz[i] += 1
                        flag[i] = k
                        i = parent[i]
        Lp[0] = 0
        for k in range(n):
            Lp[k + 1] = Lp[k] + lnz[k]
    return np.asarray(Lp), np.asarray(parent)


def ldl_numeric(idx_t n, const idx_t[::1] Ap, const idx_t[::1] Ai,
                const double[::1] Ax, const idx_t[::1] Lp,
                const idx_t[::1] parent):
    """Up-looking numeric LDL^T.

    Returns ``(Li, Lx, D, bad)`` where ``bad`` is the first column with a
    non-positive pivot, or -1.
    """
    cdef idx_t nnz = Lp[n]
    Li_arr = np.empty(nnz, dtype=np.int64)
    Lx_arr = np.empty(nnz, dtype=np.float64)
    D_arr = np.empty(n, dtype=np.float64)
    cdef idx_t[::1] Li = Li_arr
    cdef double[::1] Lx = Lx_arr
    cdef double[::1] D = D_arr
    cdef double[::1] Y = np.zeros(n, dtype=np.float64)
    cdef idx_t[::1] pattern = np.empty(n, dtype=np.int64)
    cdef idx_t[::1] flag = np.empty(n, dtype=np.int64)
    cdef idx_t[::1] lnz = np.zeros(n, dtype=np.int64)
    cdef idx_t k, p, p2, i, length, top
    cdef idx_t bad = -1
    cdef double yi, l_ki
    with nogil:
        for k in range(n):
            Y[k] = 0.0
            top = n
            flag[k] = k
            for p in range(Ap[k], Ap[k + 1]):
                i = Ai[p]
                if i <= k:
                    Y[i] += Ax[p]
                    length = 0
                    while flag[i] != k:
                        pattern[length] = i
                        length += 1
                        flag[i] = k
                        i = parent[i]
                    while length > 0:
                        top -= 1
                        length -= 1
                        pattern[top] = pattern[length]
            D[k] = Y[k]
            Y[k] = 0.0
            while top < n:
                i = pattern[top]
                top += 1
                yi = Y[i]
                Y[i] = 0.0
                p2 = Lp[i] + lnz[i]
                for p in range(Lp[i], p2):
                    Y[Li[p]] -= Lx[p] * yi
                l_ki = yi / D[i]
                D[k] -= l_ki * yi
                Li[p2] = k
                Lx[p2] = l_ki
                lnz[i] += 1
            if not (D[k] > 0.0):
                bad = k
                break
    return Li_arr, Lx_arr, D_arr, bad


def ldl_solve(idx_t n, const idx_t[::1] Lp, const idx_t[::1] Li,
              const double[::1] Lx, const double[::1] D, double[:, ::1] X):
    """Solve L D L^T X = B in place; ``X`` holds B with shape (n, nrhs)."""
    cdef idx_t nrhs = X.shape[1]
    cdef idx_t j, p, r, row
    cdef double xj, lx
    with nogil:
        for j in range(n):
            for p in range(Lp[j], Lp[j + 1]):
                row = Li[p]
                lx = Lx[p]
                for r in range(nrhs):
                    X[row, r] -= lx * X[j, r]
        for j in range(n):
            xj = 1.0 / D[j]
            for r in range(nrhs):
                X[j, r] *= xj
        for j in range(n - 1, -1, -1):
            for p in range(Lp[j], Lp[j + 1]):
                row = Li[p]
                lx = Lx[p]
                for r in range(nrhs):
                    X[j, r] -= lx * X[row, r]


cdef inline idx_t _find(const ind_t[::1] indices, idx_t lo, idx_t hi,
                        idx_t col) noexcept nogil:
    cdef idx_t mid
    hi -= 1
    while lo <= hi:
        mid = (lo + hi) >> 1
        if indices[mid] < col:
            lo = mid + 1
        elif indices[mid] > col:
            hi = mid - 1
        else:
            return mid
    return -1


def csr_assemble(const ind_t[::1] indptr, const ind_t[::1] indices,
                 double[::1] data, const idx_t[:, ::1] cell_dofs,
                 const double[:, ::1] coef, const double[:, :, ::1] kref):
    """Add ``sum_t coef[c, t] * kref[t]`` of every cell into a CSR pattern.

    Negative entries of ``cell_dofs`` mark eliminated dofs.  Returns the
    number of (row, col) pairs missing from the pattern (0 on success).
    """
    cdef idx_t ncell = cell_dofs.shape[0]
    cdef idx_t nloc = cell_dofs.shape[1]
    cdef idx_t nterm = kref.shape[0]
    cdef idx_t c, a, b, t, ra, cb, pos
    cdef idx_t missing = 0
    cdef double val
    with nogil:
        for c in range(ncell):
            for a in range(nloc):
                ra = cell_dofs[c, a]
                if ra < 0:
                    continue
                for b in range(nloc):
                    cb = cell_dofs[c, b]
                    if cb < 0:
                        continue
                    val = 0.0
                    for t in range(nterm):
                        val += coef[c, t] * kref[t, a, b]
                    pos = _find(indices, indptr[ra], indptr[ra + 1], cb)
                    if pos < 0:
                        missing += 1
                    else:
                        data[pos] += val
    return missing
