"""Global assembly, load vectors and the nested coarse prolongation."""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from . import kernels
from .dofmap import ELASTICITY, MAXWELL, DofMap, build_dofmap
from .elements import (edge_basis, elasticity_element_parts, gauss_points,
                       maxwell_element_parts, trilinear_basis)
from .forcing import ManufacturedSolution, get_solution
from .mesh import StructuredGrid

__all__ = [
    "element_parts",
    "sparsity_pattern",
    "assemble",
    "assemble_rhs",
    "evaluate_field",
    "l2_error",
    "nodal_max_error",
    "coarse_prolongation",
    "coarse_dofmap",
]


def element_parts(dofmap: DofMap) -> np.ndarray:
    """Stack ``(2, nloc, nloc)`` of the two reference element matrices."""
    if dofmap.kind == ELASTICITY:
        return np.stack(elasticity_element_parts(dofmap.h))
    return np.stack(maxwell_element_parts(dofmap.h))


def sparsity_pattern(dofmap: DofMap) -> sp.csr_matrix:
    """Zero-valued CSR matrix with the coupling pattern of the free dofs."""
    cd = dofmap.cell_dofs
    ncell, nloc = cd.shape
    rows = np.repeat(np.arange(ncell, dtype=np.int64), nloc)
    cols = cd.ravel()
    keep = cols >= 0
    C = sp.csr_matrix(
        (np.ones(int(keep.sum()), dtype=np.float32), (rows[keep], cols[keep])),
        shape=(ncell, dofmap.num_free),
    )
    G = (C.T.tocsr() @ C).tocsr()
    G.sort_indices()
    return sp.csr_matrix((np.zeros(G.nnz), G.indices, G.indptr), shape=G.shape)


def _coef_array(dofmap: DofMap, coeffs) -> np.ndarray:
    ncell = dofmap.cell_dofs.shape[0]
    if coeffs is None:
        return np.ones((ncell, 2))
    c = np.asarray(coeffs, dtype=np.float64)
    if c.ndim == 1:
        c = np.repeat(c[:, None], 2, axis=1)
    if c.shape != (ncell, 2):
        raise ValueError(f"coefficient field has shape {c.shape}, expected ({ncell}, 2)")
    if np.any(c <= 0):
        raise ValueError("coefficients must be positive")
    return np.ascontiguousarray(c)


def assemble(dofmap: DofMap, coeffs=None) -> sp.csr_matrix:
    """Assemble the system matrix on the free dofs.

    Parameters
    ----------
    dofmap : DofMap
    coeffs : array, optional
        Per-cell coefficients, either ``(ncell,)`` scaling both terms or
        ``(ncell, 2)`` giving ``(lam, mu)`` / ``(alpha, beta)``.  Defaults to 1.
    """
    coef = _coef_array(dofmap, coeffs)
    A = sparsity_pattern(dofmap)
    kref = np.ascontiguousarray(element_parts(dofmap))
    missing = kernels.csr_assemble(A.indptr, A.indices, A.data,
                                   dofmap.cell_dofs, coef, kref)
    if missing:
        raise RuntimeError(f"{missing} element entries fell outside the pattern")
    return A


def _cell_origins(dofmap: DofMap, sl: slice) -> np.ndarray:
    Nx, Ny, _ = dofmap.shape
    c = np.arange(dofmap.cell_dofs.shape[0])[sl]
    return np.stack([c % Nx, (c // Nx) % Ny, c // (Nx * Ny)], axis=1)


def _basis(dofmap: DofMap, xi):
    if dofmap.kind == ELASTICITY:
        val, _ = trilinear_basis(xi, dofmap.h)
        # (q, 24, 3): component c of local dof 3*loc + c
        out = np.zeros((xi.shape[0], 24, 3))
        for c in range(3):
            out[:, c::3, c] = val
        return out
    val, _ = edge_basis(xi, dofmap.h)
    return val


def assemble_rhs(dofmap: DofMap, problem, order: int = 3, chunk: int = 8192) -> np.ndarray:
    """Load vector ``(f, phi_i)`` on the free dofs.

    ``problem`` is a solution name, a :class:`ManufacturedSolution`, or any
    callable mapping points ``(q, 3)`` to values ``(q, 3)``.
    """
    f = get_solution(problem).forcing if isinstance(problem, str) else problem
    if isinstance(f, ManufacturedSolution):
        f = f.forcing
    xi, w = gauss_points(order)
    h = dofmap.h
    phi = _basis(dofmap, xi) * (w * h**3)[:, None, None]
    b = np.zeros(dofmap.num_free)
    ncell = dofmap.cell_dofs.shape[0]
    for start in range(0, ncell, chunk):
        sl = slice(start, min(start + chunk, ncell))
        org = _cell_origins(dofmap, sl)
        pts = (org[:, None, :] + xi[None, :, :]) * h
        fv = f(pts.reshape(-1, 3)).reshape(pts.shape)
        loc = np.einsum("cqi,qai->ca", fv, phi)
        dofs = dofmap.cell_dofs[sl]
        keep = dofs >= 0
        b += np.bincount(dofs[keep], weights=loc[keep], minlength=b.size)
    return b


def evaluate_field(dofmap: DofMap, x: np.ndarray, xi: np.ndarray, sl=slice(None)):
    """Discrete field at reference points ``xi`` of cells ``sl``: ``(c, q, 3)``."""
    phi = _basis(dofmap, xi)
    dofs = dofmap.cell_dofs[sl]
    vals = np.where(dofs >= 0, x[np.maximum(dofs, 0)], 0.0)
    return np.einsum("ca,qai->cqi", vals, phi)


def l2_error(dofmap: DofMap, x: np.ndarray, exact, order: int = 3, chunk: int = 8192) -> float:
    """``||u_h - u||_{L2}`` by tensor Gauss quadrature."""
    xi, w = gauss_points(order)
    h = dofmap.h
    total = 0.0
    ncell = dofmap.cell_dofs.shape[0]
    for start in range(0, ncell, chunk):
        sl = slice(start, min(start + chunk, ncell))
        uh = evaluate_field(dofmap, x, xi, sl)
        org = _cell_origins(dofmap, sl)
        pts = (org[:, None, :] + xi[None, :, :]) * h
        ue = exact(pts.reshape(-1, 3)).reshape(pts.shape)
        total += float(np.einsum("q,cqi->", w * h**3, (uh - ue) ** 2))
    return float(np.sqrt(total))


def nodal_max_error(dofmap: DofMap, x: np.ndarray, exact) -> float:
    """Max-norm error at the free nodes of a nodal vector field."""
    if dofmap.kind != ELASTICITY:
        raise ValueError("nodal error needs a nodal dof map")
    pts = dofmap.lo[::3] * dofmap.h
    return float(np.abs(x.reshape(-1, 3) - exact(pts)).max())


# --------------------------------------------------------------- coarse space


def _hat(N: int, m: int) -> sp.csr_matrix:
    """``(N+1, n+1)`` nodal interpolation weights of coarse hat functions."""
    n = N // m
    i = np.arange(N + 1)
    w = np.maximum(0.0, 1.0 - np.abs(i[:, None] - m * np.arange(n + 1)[None, :]) / m)
    return sp.csr_matrix(w)


def _cell_indicator(N: int, m: int) -> sp.csr_matrix:
    """``(N, n)`` fine-edge moments of a coarse edge's tangential profile."""
    n = N // m
    i = np.arange(N)
    return sp.csr_matrix(((i // m)[:, None] == np.arange(n)[None, :]) / m)


def coarse_dofmap(grid: StructuredGrid, kind: str) -> DofMap:
    """Dof map of the same element family on the ``n^3`` coarse grid."""
    return build_dofmap(kind, (grid.n,) * 3, grid.d)


def coarse_prolongation(grid: StructuredGrid, dofmap: DofMap) -> sp.csr_matrix:
    """Fine-dof representation of the coarse basis, ``(fine free, coarse free)``.

    Nodal: trilinear interpolation of coarse hat functions.  Edge: fine-edge
    moments of coarse edge functions, a separable product of a piecewise
    constant profile along the edge and hats across it.
    """
    N, m = grid.N, grid.m
    H = _hat(N, m)
    coarse = coarse_dofmap(grid, dofmap.kind)
    if dofmap.kind == ELASTICITY:
        Pn = sp.kron(H, sp.kron(H, H))
        P = sp.kron(Pn, sp.identity(3))
    else:
        E = _cell_indicator(N, m)
        blocks = [sp.kron(H, sp.kron(H, E)), sp.kron(H, sp.kron(E, H)), sp.kron(E, sp.kron(H, H))]
        P = sp.block_diag(blocks)
    P = sp.csr_matrix(P)
    P = P[dofmap.free][:, coarse.free]
    P.eliminate_zeros()
    P.sort_indices()
    return P
