"""Degree-of-freedom numbering for nodal vector and edge elements.

Global numbering
----------------
* ``elasticity``: three dofs per lattice node, interleaved; node
  ``(i, j, k)`` has index ``i + (Nx+1)(j + (Ny+1)k)`` and dof ``3*node + c``.
* ``maxwell``: one dof per edge, in three blocks (x-, y-, then z-edges), each
  block numbered x fastest.  Every edge points along increasing coordinate, so
  all element orientation signs are +1.

Dirichlet conditions are imposed by elimination: only *free* dofs (entities
not lying in the boundary of the box) enter the linear system.  Each free
dof carries the lattice bounding box ``lo``/``hi`` of its entity, which is all
the geometry the decomposition and coarsening code needs.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mesh import StructuredGrid

__all__ = ["DofMap", "build_dofmap", "ELASTICITY", "MAXWELL"]

ELASTICITY = "elasticity"
MAXWELL = "maxwell"

# local cell numbering
_CORNERS = np.array([(a, b, c) for c in (0, 1) for b in (0, 1) for a in (0, 1)])


def _edge_local():
    """Local edges as (axis, offset) with offset the lattice start corner."""
    out = []
    for axis in range(3):
        t = [ax for ax in range(3) if ax != axis]
        for c in (0, 1):
            for b in (0, 1):
                off = [0, 0, 0]
                off[t[0]] = b
                off[t[1]] = c
                out.append((axis, tuple(off)))
    return out


EDGE_LOCAL = _edge_local()


@dataclass(eq=False)
class DofMap:
    """Numbering of free dofs on a box lattice of ``shape`` cells.

    Attributes
    ----------
    kind : str
        ``"elasticity"`` or ``"maxwell"``.
    shape : tuple
        Cells per axis.
    h : float
        Cell size.
    total_dofs : int
        Count before elimination.
    free : ndarray
        Global ids of free dofs, sorted.
    global_to_free : ndarray
        Free index of each global dof, -1 when eliminated.
    lo, hi : ndarray
        ``(nfree, 3)`` lattice bounding box of each free dof's entity.
    cell_dofs : ndarray
        ``(ncell, nloc)`` free indices of each cell's local dofs, -1 if eliminated.
    """

    kind: str
    shape: tuple
    h: float
    total_dofs: int
    free: np.ndarray
    global_to_free: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    cell_dofs: np.ndarray
    signs: np.ndarray = field(default=None)

    @property
    def num_free(self) -> int:
        return self.free.size

    @property
    def nloc(self) -> int:
        return self.cell_dofs.shape[1]

    @property
    def mid2(self) -> np.ndarray:
        """Twice the entity midpoint, as integers."""
        return self.lo + self.hi

    def box_dofs(self, blo, bhi) -> np.ndarray:
        """Free dofs whose entity lies inside the closed lattice box ``[blo, bhi]``."""
        blo = np.maximum(np.asarray(blo, dtype=np.int64), 0)
        bhi = np.minimum(np.asarray(bhi, dtype=np.int64), np.asarray(self.shape))
        if np.any(bhi < blo):
            return np.zeros(0, dtype=np.int64)
        if self.kind == ELASTICITY:
            nodes = _box_ids(blo, bhi, np.asarray(self.shape) + 1)
            glob = (3 * nodes[:, None] + np.arange(3)).ravel()
        else:
            parts = []
            offset = 0
            for axis in range(3):
                dims = np.asarray(self.shape) + 1
                dims[axis] -= 1
                elo, ehi = blo.copy(), bhi.copy()
                ehi[axis] -= 1
                if np.all(ehi >= elo):
                    parts.append(offset + _box_ids(elo, ehi, dims))
                offset += int(np.prod(dims))
            glob = np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)
        f = self.global_to_free[glob]
        return np.sort(f[f >= 0])

    def entity_coordinates(self) -> np.ndarray:
        """Physical midpoint of each free dof's entity."""
        return 0.5 * self.h * self.mid2


def _box_ids(lo, hi, dims):
    """Linear ids (x fastest, lattice ``dims``) of points in ``[lo, hi]``."""
    r = [np.arange(lo[a], hi[a] + 1, dtype=np.int64) for a in range(3)]
    return (r[0][None, None, :] + dims[0] * (r[1][None, :, None] + dims[1] * r[2][:, None, None])).ravel()


def _grid_points(dims):
    """All lattice points of ``dims`` as ``(n, 3)`` int array, x fastest."""
    K, J, I = np.meshgrid(*(np.arange(d, dtype=np.int64) for d in dims[::-1]), indexing="ij")
    return np.stack([I.ravel(), J.ravel(), K.ravel()], axis=1)


def build_dofmap(kind: str, grid, h: float | None = None) -> DofMap:
    """Number the dofs of ``kind`` on a grid.

    Parameters
    ----------
    kind : {"elasticity", "maxwell"}
    grid : StructuredGrid or tuple
        A cube grid, or the cell counts ``(Nx, Ny, Nz)`` of a general box.
    h : float, optional
        Cell size when ``grid`` is a tuple.
    """
    if isinstance(grid, StructuredGrid):
        shape = grid.shape
        h = grid.h
    else:
        shape = tuple(int(s) for s in grid)
        if h is None:
            raise ValueError("cell size h is required for a bare shape")
    shape_a = np.asarray(shape, dtype=np.int64)
    ncell = int(np.prod(shape_a))
    cells = _grid_points(shape_a)
    if kind == ELASTICITY:
        dims = shape_a + 1
        pts = _grid_points(dims)
        interior = np.all((pts > 0) & (pts < shape_a), axis=1)
        total = 3 * pts.shape[0]
        g2f = np.full(total, -1, dtype=np.int64)
        free_nodes = np.flatnonzero(interior)
        free = (3 * free_nodes[:, None] + np.arange(3)).ravel()
        g2f[free] = np.arange(free.size)
        lo = np.repeat(pts[free_nodes], 3, axis=0)
        hi = lo.copy()
        corner_nodes = []
        for off in _CORNERS:
            p = cells + off
            corner_nodes.append(p[:, 0] + dims[0] * (p[:, 1] + dims[1] * p[:, 2]))
        node_ids = np.stack(corner_nodes, axis=1)
        glob = (3 * node_ids[:, :, None] + np.arange(3)).reshape(ncell, 24)
        cell_dofs = g2f[glob]
        signs = None
    elif kind == MAXWELL:
        offsets = []
        los, his, frees = [], [], []
        offset = 0
        for axis in range(3):
            dims = shape_a + 1
            dims[axis] -= 1
            pts = _grid_points(dims)
            t = [ax for ax in range(3) if ax != axis]
            inner = np.all((pts[:, t] > 0) & (pts[:, t] < shape_a[t]), axis=1)
            ids = np.flatnonzero(inner)
            frees.append(offset + ids)
            los.append(pts[ids])
            h_ = pts[ids].copy()
            h_[:, axis] += 1
            his.append(h_)
            offsets.append((offset, dims))
            offset += pts.shape[0]
        total = offset
        free = np.concatenate(frees)
        g2f = np.full(total, -1, dtype=np.int64)
        g2f[free] = np.arange(free.size)
        lo = np.concatenate(los)
        hi = np.concatenate(his)
        cols = []
        for axis, off in EDGE_LOCAL:
            base, dims = offsets[axis]
            p = cells + np.asarray(off)
            cols.append(base + p[:, 0] + dims[0] * (p[:, 1] + dims[1] * p[:, 2]))
        cell_dofs = g2f[np.stack(cols, axis=1)]
        signs = np.ones(12)
    else:
        raise ValueError(f"unknown element kind {kind!r}")
    return DofMap(kind, shape, float(h), total, free, g2f, lo, hi,
                  np.ascontiguousarray(cell_dofs), signs)
