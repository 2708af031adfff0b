"""Index sets of the non-overlapping decomposition.

Membership is decided from the doubled entity midpoint ``mid2 = lo + hi``
of each free dof: a unit entity lies strictly inside an open lattice box
exactly when ``mid2`` lies strictly between twice the box bounds.  A dof is
on the interface when its entity lies in a coarse plane.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .dofmap import DofMap
from .mesh import StructuredGrid, coarse_vertices, interior_faces, vertex_half_box

__all__ = [
    "DecompositionSets",
    "build_decomposition_sets",
    "strictly_inside",
    "on_coarse_lines",
    "dump_sets",
]


def strictly_inside(dofmap: DofMap, dofs: np.ndarray, blo, bhi) -> np.ndarray:
    """Mask over ``dofs``: entity midpoint strictly inside the open box."""
    m2 = dofmap.mid2[dofs]
    return np.all((m2 > 2 * np.asarray(blo)) & (m2 < 2 * np.asarray(bhi)), axis=1)


def on_coarse_lines(dofmap: DofMap, dofs: np.ndarray, point, band: int = 0) -> np.ndarray:
    """Mask over ``dofs``: entity within ``band`` cells of an axis line through ``point``."""
    p = np.asarray(point)
    lo = dofmap.lo[dofs]
    hi = dofmap.hi[dofs]
    near = (lo >= p - band) & (hi <= p + band)
    return near.sum(axis=1) >= 2


@dataclass(eq=False)
class DecompositionSets:
    """All dof sets used by the preconditioners (free-dof indices, sorted).

    Vertex-keyed dictionaries only hold vertices whose interface set contains
    at least one free dof.  ``vertex_box[v]`` is the solver box of ``v``: its
    half box widened by ``halo`` cells and clipped to the cube.
    ``gamma_v_half[v]`` holds the interface dofs strictly inside it and
    ``vertex_dofs[v]`` all free dofs strictly inside it.
    """

    grid: StructuredGrid
    subdomains: list
    subdomain_interior: list
    gamma: np.ndarray
    vertices: list
    lambda_v: dict
    vertex_box: dict
    gamma_v_half: dict
    vertex_dofs: dict
    omega_v_half_interior: dict
    w_v_half: dict
    f_in_v: dict
    faces: list
    face_dofs: dict
    face_region_dofs: dict
    band: int = 1
    halo: int = 2

    def omega_v_half_cells(self, v) -> np.ndarray:
        """Fine cells ``(ncell, 3)`` of the half box around ``v`` (without halo)."""
        lo, hi = vertex_half_box(self.grid, v)
        r = [np.arange(lo[a], hi[a]) for a in range(3)]
        K, J, I = np.meshgrid(r[2], r[1], r[0], indexing="ij")
        return np.stack([I.ravel(), J.ravel(), K.ravel()], axis=1)

    def vertex_system_dofs(self, v) -> np.ndarray:
        """Half-box interiors together with the wire-basket set of ``v``."""
        parts = list(self.omega_v_half_interior[v].values()) + [self.w_v_half[v]]
        return np.unique(np.concatenate(parts))


def build_decomposition_sets(grid: StructuredGrid, dofmap: DofMap, band: int = 1,
                             halo: int = 2, check: bool = True) -> DecompositionSets:
    """Compute every decomposition set for a cube grid.

    Parameters
    ----------
    band : int
        Half-width, in cells, of the tube around the coarse lines through a
        vertex that forms its wire-basket set.  ``1`` takes the dofs of the
        fine interface faces touching those lines; ``0`` keeps only dofs on
        the lines.
    halo : int
        Cells added around each half box to form its solver box.  Vertex
        sets are taken strictly inside the solver box, so with ``halo >= 1``
        they form an open cover of the interface.
    check : bool
        Verify that the vertex interface sets cover the interface.
    """
    if tuple(dofmap.shape) != grid.shape:
        raise ValueError("dof map does not belong to this grid")
    if halo < 0 or band < 0:
        raise ValueError("halo and band must be non-negative")
    n, m = grid.n, grid.m
    mid2 = dofmap.mid2
    is_gamma = np.any(mid2 % (2 * m) == 0, axis=1)
    gamma = np.flatnonzero(is_gamma)

    subdomains = [(a, b, c) for c, b, a in product(range(n), repeat=3)]
    sub_int = []
    for k in subdomains:
        lo, hi = grid.subdomain_box(k)
        d = dofmap.box_dofs(lo, hi)
        sub_int.append(d[strictly_inside(dofmap, d, lo, hi)])

    vertices, lam, vbox, gvh, vdofs, octs, wv, fin = [], {}, {}, {}, {}, {}, {}, {}
    for v in coarse_vertices(grid):
        lo, hi = vertex_half_box(grid, v)
        slo = np.maximum(lo - halo, 0)
        shi = np.minimum(hi + halo, grid.N)
        d = dofmap.box_dofs(slo, shi)
        inside = strictly_inside(dofmap, d, slo, shi)
        if halo == 0:
            # closed box: keep interface dofs on the box boundary as unknowns
            inside |= is_gamma[d]
        d = d[inside]
        g = d[is_gamma[d]]
        if g.size == 0:
            continue
        vertices.append(v)
        vbox[v] = (slo, shi)
        gvh[v] = g
        vdofs[v] = d
        lam[v] = []
        octs[v] = {}
        for off in product((-1, 0), repeat=3):
            k = tuple(int(x) for x in np.asarray(v) + np.asarray(off[::-1]))
            if min(k) < 0 or max(k) >= n:
                continue
            ka = np.asarray(k)
            od = dofmap.box_dofs(np.maximum(slo, ka * m), np.minimum(shi, (ka + 1) * m))
            od = od[~is_gamma[od]]
            lam[v].append(k)
            octs[v][k] = od[strictly_inside(dofmap, od, slo, shi)]
        lam[v].sort(key=lambda k: (k[2], k[1], k[0]))
        on_lines = on_coarse_lines(dofmap, g, np.asarray(v) * m, band)
        wv[v] = g[on_lines]
        fin[v] = g[~on_lines]

    faces = interior_faces(grid)
    fd, frd = {}, {}
    for f in faces:
        axis, plane, t1, t2 = f
        t = [ax for ax in range(3) if ax != axis]
        lo = np.zeros(3, dtype=np.int64)
        hi = np.zeros(3, dtype=np.int64)
        lo[axis] = hi[axis] = plane * m
        lo[t[0]], hi[t[0]] = t1 * m, (t1 + 1) * m
        lo[t[1]], hi[t[1]] = t2 * m, (t2 + 1) * m
        d = dofmap.box_dofs(lo, hi)
        m2 = mid2[d]
        inner = np.all((m2[:, t] > 2 * lo[t]) & (m2[:, t] < 2 * hi[t]), axis=1)
        fd[f] = d[inner]
        rlo, rhi = lo.copy(), hi.copy()
        rlo[axis] -= m
        rhi[axis] += m
        d = dofmap.box_dofs(rlo, rhi)
        frd[f] = d[strictly_inside(dofmap, d, rlo, rhi)]

    sets = DecompositionSets(grid, subdomains, sub_int, gamma, vertices, lam, vbox,
                             gvh, vdofs, octs, wv, fin, faces, fd, frd, band, halo)
    if check:
        covered = np.zeros(dofmap.num_free, dtype=bool)
        for g in gvh.values():
            covered[g] = True
        missing = np.flatnonzero(is_gamma & ~covered)
        if missing.size:
            raise RuntimeError(f"{missing.size} interface dofs are not covered by any vertex set")
    return sets


def dump_sets(sets: DecompositionSets, path) -> None:
    """Write every set as ``name: i0 i1 ...`` lines, one set per line."""
    def line(name, arr):
        return f"{name}: " + " ".join(str(int(i)) for i in np.sort(arr)) + "\n"

    with open(path, "w") as fh:
        fh.write(line("gamma", sets.gamma))
        for k, d in zip(sets.subdomains, sets.subdomain_interior):
            fh.write(line(f"interior{k}", d))
        for v in sets.vertices:
            fh.write(line(f"gamma_v_half{v}", sets.gamma_v_half[v]))
            fh.write(line(f"w_v_half{v}", sets.w_v_half[v]))
            fh.write(line(f"f_in_v{v}", sets.f_in_v[v]))
        for f in sets.faces:
            fh.write(line(f"face{f}", sets.face_dofs[f]))
