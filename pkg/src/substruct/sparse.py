"""Sparse symmetric storage helpers, LDL^T factorization and PCG.

Matrices are plain :class:`scipy.sparse.csr_matrix` objects with both
triangles stored and sorted column indices.  The factorization is an
up-looking sparse LDL^T whose numeric work runs in :mod:`substruct.kernels`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.io
import scipy.sparse as sp
from scipy.sparse.csgraph import reverse_cuthill_mckee

from . import kernels

__all__ = [
    "NotPositiveDefiniteError",
    "Factorization",
    "PcgReport",
    "as_csr",
    "factorize",
    "extract_principal_submatrix",
    "triple_product",
    "pcg",
    "rcm_ordering",
    "geometric_nested_dissection",
    "operator_symmetry_check",
    "write_matrix_market",
    "read_matrix_market",
]


class NotPositiveDefiniteError(ValueError):
    """Raised when a factorization meets a non-positive pivot."""

    def __init__(self, column: int, pivot: float):
        super().__init__(f"non-positive pivot {pivot:.3e} at column {column}")
        self.column = column
        self.pivot = pivot


def as_csr(A) -> sp.csr_matrix:
    """Return ``A`` as a float64 CSR matrix with sorted, summed indices."""
    A = sp.csr_matrix(A, dtype=np.float64)
    A.sum_duplicates()
    A.sort_indices()
    return A


# ----------------------------------------------------------------- orderings


def rcm_ordering(A) -> np.ndarray:
    """Reverse Cuthill-McKee permutation of a symmetric pattern."""
    A = sp.csr_matrix(A)
    if A.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    return reverse_cuthill_mckee(A, symmetric_mode=True).astype(np.int64)


def geometric_nested_dissection(lo, hi, leaf_size: int = 48) -> np.ndarray:
    """Nested dissection ordering for dofs living on a lattice.

    Parameters
    ----------
    lo, hi : (n, 3) integer arrays
        Lattice bounding box of the entity carrying each dof (a node has
        ``lo == hi``; a unit edge differs by one along its axis).
    leaf_size : int
        Sets at or below this size are ordered as given.

    Returns
    -------
    perm : ndarray
        ``perm[k]`` is the dof eliminated k-th.  Each cut plane is ordered
        after the two halves it separates.
    """
    lo = np.asarray(lo, dtype=np.int64)
    hi = np.asarray(hi, dtype=np.int64)
    out = []
    stack = [(np.arange(lo.shape[0], dtype=np.int64), False)]
    # explicit stack; a "done" marker emits a separator after its halves
    while stack:
        idx, emit = stack.pop()
        if emit or idx.size <= leaf_size:
            out.append(idx)
            continue
        blo = lo[idx].min(axis=0)
        bhi = hi[idx].max(axis=0)
        axis = int(np.argmax(bhi - blo))
        if bhi[axis] - blo[axis] < 2:
            out.append(idx)
            continue
        cut = (blo[axis] + bhi[axis]) // 2
        a_lo = lo[idx, axis]
        a_hi = hi[idx, axis]
        left = a_hi < cut
        right = a_lo > cut
        sep = ~(left | right)
        stack.append((idx[sep], True))
        stack.append((idx[right], False))
        stack.append((idx[left], False))
    if not out:
        return np.zeros(0, dtype=np.int64)
    return np.concatenate(out)


# ------------------------------------------------------------- factorization


@dataclass(eq=False)
class Factorization:
    """Sparse LDL^T factor of ``A[perm][:, perm]``.

    Use :func:`factorize` to build one.  ``solve`` accepts a vector or an
    ``(n, k)`` block of right-hand sides.
    """

    n: int
    perm: np.ndarray
    Lp: np.ndarray
    Li: np.ndarray
    Lx: np.ndarray
    D: np.ndarray

    @property
    def nnz(self) -> int:
        """Number of strictly lower entries in L."""
        return int(self.Lp[-1])

    def solve(self, b: np.ndarray) -> np.ndarray:
        b = np.asarray(b, dtype=np.float64)
        if self.n == 0:
            return np.zeros_like(b)
        vec = b.ndim == 1
        B = b.reshape(self.n, -1)
        X = np.ascontiguousarray(B[self.perm])
        kernels.ldl_solve(self.n, self.Lp, self.Li, self.Lx, self.D, X)
        out = np.empty_like(X)
        out[self.perm] = X
        return out[:, 0] if vec else out

    __call__ = solve


def factorize(A, ordering="rcm") -> Factorization:
    """Factor a sparse SPD matrix as ``P A P^T = L D L^T``.

    Parameters
    ----------
    A : sparse matrix
        Symmetric positive definite, both triangles stored.
    ordering : {"rcm", "natural"} or array
        Fill-reducing ordering, or an explicit permutation.

    Raises
    ------
    NotPositiveDefiniteError
        If a pivot is not strictly positive.
    """
    A = as_csr(A)
    n = A.shape[0]
    if A.shape[1] != n:
        raise ValueError("matrix must be square")
    if isinstance(ordering, str):
        if ordering == "rcm":
            perm = rcm_ordering(A)
        elif ordering == "natural":
            perm = np.arange(n, dtype=np.int64)
        else:
            raise ValueError(f"unknown ordering {ordering!r}")
    else:
        perm = np.asarray(ordering, dtype=np.int64)
        if perm.shape != (n,) or not np.array_equal(np.sort(perm), np.arange(n)):
            raise ValueError("ordering is not a permutation")
    C = A[perm][:, perm].tocsr()
    Ap = C.indptr.astype(np.int64)
    Ai = C.indices.astype(np.int64)
    Ax = np.ascontiguousarray(C.data, dtype=np.float64)
    Lp, parent = kernels.ldl_symbolic(n, Ap, Ai)
    Li, Lx, D, bad = kernels.ldl_numeric(n, Ap, Ai, Ax, Lp, parent)
    if bad >= 0:
        raise NotPositiveDefiniteError(int(perm[bad]), float(D[bad]))
    return Factorization(n, perm, Lp, Li, Lx, D)


# --------------------------------------------------------------- block algebra


def extract_principal_submatrix(A, index_set) -> sp.csr_matrix:
    """Rows and columns of ``A`` in a sorted, duplicate-free index set."""
    A = sp.csr_matrix(A)
    idx = np.asarray(index_set, dtype=np.int64)
    if idx.size:
        if idx.min() < 0 or idx.max() >= A.shape[0]:
            raise IndexError("index out of range")
        if np.any(np.diff(idx) <= 0):
            raise ValueError("index set must be sorted and unique")
    return as_csr(A[idx][:, idx])


def triple_product(P, A) -> sp.csr_matrix:
    """Galerkin product ``P^T A P``, symmetrized.

    The symmetrization is exact on any block where ``P`` has unit columns,
    so such blocks reproduce ``A`` bitwise.
    """
    P = sp.csr_matrix(P, dtype=np.float64)
    A = sp.csr_matrix(A, dtype=np.float64)
    if P.shape[0] != A.shape[0] or A.shape[0] != A.shape[1]:
        raise ValueError(f"shape mismatch: P {P.shape}, A {A.shape}")
    C = (P.T @ (A @ P)).tocsr()
    return as_csr(0.5 * (C + C.T))


# ------------------------------------------------------------------------ PCG


@dataclass
class PcgReport:
    """Outcome of a PCG run.

    ``history`` holds ``||r_k|| / ||b||`` for k = 0 .. iterations.
    """

    iterations: int
    converged: bool
    history: list[float] = field(default_factory=list)

    @property
    def final_residual(self) -> float:
        return self.history[-1] if self.history else 0.0


def pcg(A, b, apply_preconditioner: Callable | None = None, tol: float = 1e-6,
        max_iter: int = 500):
    """Preconditioned conjugate gradients from a zero initial guess.

    Stops when ``||r_k||_2 / ||b||_2 < tol``; each iteration is one
    application of ``A``.  Running out of iterations is reported through
    ``PcgReport.converged`` rather than raised.

    Returns
    -------
    x : ndarray
    report : PcgReport
    """
    matvec = A.__matmul__ if not callable(A) else A
    b = np.asarray(b, dtype=np.float64)
    x = np.zeros_like(b)
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return x, PcgReport(0, True, [])
    prec = apply_preconditioner if apply_preconditioner is not None else (lambda r: r.copy())
    r = b.copy()
    z = prec(r)
    p = z.copy()
    rz = float(r @ z)
    history = [1.0]
    it = 0
    while it < max_iter:
        q = matvec(p)
        alpha = rz / float(p @ q)
        x += alpha * p
        r -= alpha * q
        it += 1
        rel = float(np.linalg.norm(r)) / bnorm
        history.append(rel)
        if rel < tol:
            return x, PcgReport(it, True, history)
        z = prec(r)
        rz_new = float(r @ z)
        p *= rz_new / rz
        p += z
        rz = rz_new
    return x, PcgReport(it, False, history)


def operator_symmetry_check(apply: Callable, n: int, n_vectors: int = 20,
                            seed: int = 0) -> tuple[float, float]:
    """Probe a linear operator for symmetry and positivity.

    Returns ``(max_rel_asym, min_rayleigh)`` over random pairs, where the
    asymmetry of a pair is ``|<Bu, v> - <u, Bv>| / (||Bu|| ||v|| + ||u|| ||Bv||)``
    and the Rayleigh quotient is ``<Bu, u> / <u, u>``.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    ray = np.inf
    for _ in range(n_vectors):
        u = rng.standard_normal(n)
        v = rng.standard_normal(n)
        Bu = apply(u)
        Bv = apply(v)
        scale = np.linalg.norm(Bu) * np.linalg.norm(v) + np.linalg.norm(u) * np.linalg.norm(Bv)
        if scale > 0:
            worst = max(worst, abs(Bu @ v - u @ Bv) / scale)
        ray = min(ray, float(Bu @ u) / float(u @ u))
    return worst, ray


# ----------------------------------------------------------------------- I/O


def write_matrix_market(path, A, comment: str = "") -> None:
    """Write a symmetric matrix in Matrix Market coordinate format."""
    scipy.io.mmwrite(str(path), sp.coo_matrix(A), comment=comment, symmetry="symmetric")


def read_matrix_market(path) -> sp.csr_matrix:
    """Read a Matrix Market file into CSR (both triangles expanded)."""
    return as_csr(scipy.io.mmread(str(path)))
