"""Pure-Python implementation of the hot kernels.

Same algorithms and signatures as the compiled ``_kernels`` module.  The
innermost loops are vectorized with numpy where the data dependencies allow
it; everything else is plain Python, so expect one to two orders of magnitude
less throughput than the extension.
"""
import numpy as np


def ldl_symbolic(n, Ap, Ai):
    """Elimination tree and column pointers of L for a symmetric CSC pattern.

    Only the strictly upper entries (``i < k`` in column ``k``) are read.
    """
    parent = np.full(n, -1, dtype=np.int64)
    lnz = np.zeros(n, dtype=np.int64)
    flag = np.empty(n, dtype=np.int64)
    Ap = Ap.tolist()
    Ai = Ai.tolist()
    par = parent.tolist()
    cnt = lnz.tolist()
    flg = flag.tolist()
    for k in range(n):
        flg[k] = k
        for p in range(Ap[k], Ap[k + 1]):
            i = Ai[p]
            if i < k:
                while flg[i] != k:
                    if par[i] == -1:
                        par[i] = k
                    cnt[i] += 1
                    flg[i] = k
                    i = par[i]
    Lp = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(cnt, out=Lp[1:])
    return Lp, np.asarray(par, dtype=np.int64)


def ldl_numeric(n, Ap, Ai, Ax, Lp, parent):
    """Up-looking numeric LDL^T; returns ``(Li, Lx, D, bad)``."""
    nnz = int(Lp[n])
    Li = np.empty(nnz, dtype=np.int64)
    Lx = np.empty(nnz, dtype=np.float64)
    D = np.empty(n, dtype=np.float64)
    Y = np.zeros(n, dtype=np.float64)
    lnz = [0] * n
    flag = [0] * n
    Lp_l = Lp.tolist()
    Ap_l = Ap.tolist()
    Ai_l = Ai.tolist()
    par = parent.tolist()
    bad = -1
    for k in range(n):
        flag[k] = k
        stack = []
        lo, hi = Ap_l[k], Ap_l[k + 1]
        for p in range(lo, hi):
            i = Ai_l[p]
            if i <= k:
                Y[i] += Ax[p]
                path = []
                while flag[i] != k:
                    path.append(i)
                    flag[i] = k
                    i = par[i]
                stack.extend(reversed(path))
        dk = Y[k]
        Y[k] = 0.0
        # topological order: last discovered path first
        for i in reversed(stack):
            yi = Y[i]
            Y[i] = 0.0
            start = Lp_l[i]
            p2 = start + lnz[i]
            if p2 > start:
                Y[Li[start:p2]] -= Lx[start:p2] * yi
            l_ki = yi / D[i]
            dk -= l_ki * yi
            Li[p2] = k
            Lx[p2] = l_ki
            lnz[i] += 1
        D[k] = dk
        if not dk > 0.0:
            bad = k
            break
    return Li, Lx, D, bad


def ldl_solve(n, Lp, Li, Lx, D, X):
    """Solve L D L^T X = B in place; ``X`` holds B with shape (n, nrhs)."""
    Lp_l = Lp.tolist()
    for j in range(n):
        lo, hi = Lp_l[j], Lp_l[j + 1]
        if hi > lo:
            X[Li[lo:hi]] -= np.outer(Lx[lo:hi], X[j])
    X /= D[:, None]
    for j in range(n - 1, -1, -1):
        lo, hi = Lp_l[j], Lp_l[j + 1]
        if hi > lo:
            X[j] -= Lx[lo:hi] @ X[Li[lo:hi]]


def csr_assemble(indptr, indices, data, cell_dofs, coef, kref, chunk=20000):
    """Add ``sum_t coef[c, t] * kref[t]`` of every cell into a CSR pattern.

    Returns the number of (row, col) pairs missing from the pattern.
    """
    nrow = indptr.size - 1
    ncol = nrow
    row_of = np.repeat(np.arange(nrow, dtype=np.int64), np.diff(indptr))
    keys = row_of * ncol + indices
    nloc = cell_dofs.shape[1]
    missing = 0
    for start in range(0, cell_dofs.shape[0], chunk):
        dofs = cell_dofs[start:start + chunk]
        vals = np.einsum("ct,tab->cab", coef[start:start + chunk], kref)
        rows = np.repeat(dofs, nloc, axis=1).ravel()
        cols = np.tile(dofs, (1, nloc)).ravel()
        vals = vals.ravel()
        keep = (rows >= 0) & (cols >= 0)
        rows, cols, vals = rows[keep], cols[keep], vals[keep]
        want = rows * ncol + cols
        pos = np.searchsorted(keys, want)
        pos = np.minimum(pos, keys.size - 1)
        hit = keys[pos] == want
        missing += int(np.count_nonzero(~hit))
        data += np.bincount(pos[hit], weights=vals[hit], minlength=data.size)
    return missing
