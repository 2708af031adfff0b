"""Graded coarse spaces for the local interface problems.

A local problem lives on a lattice box (two subdomains around a face, or the
solver box around a coarse vertex).  Its cells are covered by octree leaves
that are unit cells next to the interface and double in size with distance:
a box is bisected while its size exceeds one cell and its distance to the
interface is below ``split`` times its size, or while it exceeds
``MAX_LEAF`` cells.  Capping the leaf size keeps the far field resolved at a
fixed multiple of ``h``, so the interface error of the graded solve shrinks
under refinement.  The coarse space is the
conforming trilinear (nodal) or lowest-order edge space on the leaves, with
hanging entities constrained by the larger neighbouring leaf.

The prolongation ``P`` maps coarse dofs to the fine dofs of the local system.
Every fine entity takes the value of the coarse function inside the largest
leaf containing it.  Interface entities are corners or edges of unit leaves
only, so ``P`` is the identity on interface rows and interface columns vanish
elsewhere: the Galerkin block on the interface reproduces ``A`` exactly.
"""
from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass
from itertools import product
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .dofmap import ELASTICITY, DofMap
from .mesh import vertex_half_box
from .sparse import extract_principal_submatrix, factorize, triple_product

__all__ = [
    "Leaves",
    "GradedProlongation",
    "build_leaves",
    "plane_distance",
    "lines_distance",
    "add_shell",
    "graded_prolongation",
    "graded_dof_subset",
    "identity_prolongation",
    "face_prolongation",
    "vertex_prolongation",
    "coarsened_system",
    "coarsened_interface_solve",
    "exact_interface_solve",
    "write_coarsening_report",
    "MIN_GRADED_M",
    "MAX_LEAF",
]

MIN_GRADED_M = 8
# largest leaf edge, in fine cells
MAX_LEAF = 4


# -------------------------------------------------------------------- leaves


@dataclass(eq=False)
class Leaves:
    """Box partition of a lattice region; ``cell_leaf`` indexes cells x fastest."""

    region_lo: np.ndarray
    region_hi: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    cell_leaf: np.ndarray

    @property
    def shape(self) -> np.ndarray:
        return self.region_hi - self.region_lo

    @property
    def volume(self) -> np.ndarray:
        return np.prod(self.hi - self.lo, axis=1)

    def leaf_of(self, cells: np.ndarray) -> np.ndarray:
        """Leaf id of absolute cell coordinates, -1 outside the region."""
        rel = cells - self.region_lo
        s = self.shape
        ok = np.all((rel >= 0) & (rel < s), axis=1)
        out = np.full(cells.shape[0], -1, dtype=np.int64)
        r = rel[ok]
        out[ok] = self.cell_leaf[r[:, 0] + s[0] * (r[:, 1] + s[1] * r[:, 2])]
        return out


def plane_distance(axis: int, coord: int) -> Callable:
    """Cell distance from a box to the plane ``x[axis] == coord``."""
    def dist(lo, hi):
        return max(0, lo[axis] - coord, coord - hi[axis])
    return dist


def lines_distance(point) -> Callable:
    """Chebyshev cell distance from a box to the three axis lines through ``point``."""
    p = np.asarray(point)

    def dist(lo, hi):
        gaps = np.maximum(0, np.maximum(lo - p, p - hi))
        return int(np.sort(gaps)[1])
    return dist


def build_leaves(roots, distance: Callable, split: float = 1.0,
                 max_leaf: int | None = None) -> Leaves:
    """Refine root boxes toward an interface.

    Parameters
    ----------
    roots : list of (lo, hi)
        Disjoint lattice boxes covering the region.
    distance : callable
        ``distance(lo, hi)`` in cells from a box to the interface.
    split : float
        A box of size ``s > 1`` is bisected when ``distance < split * s``.
    max_leaf : int, optional
        Boxes larger than this many cells are always bisected.
    """
    roots = [(np.asarray(lo, dtype=np.int64), np.asarray(hi, dtype=np.int64)) for lo, hi in roots]
    roots = [(lo, hi) for lo, hi in roots if np.all(hi > lo)]
    rlo = np.min([lo for lo, _ in roots], axis=0)
    rhi = np.max([hi for _, hi in roots], axis=0)
    leaves_lo, leaves_hi = [], []
    stack = list(reversed(roots))
    while stack:
        lo, hi = stack.pop()
        ext = hi - lo
        size = int(ext.max())
        if size > 1 and (distance(lo, hi) < split * size
                         or (max_leaf is not None and size > max_leaf)):
            cuts = [_cut(lo, hi, a, distance) for a in range(3)]
            kids = []
            for pieces in product(*[range(len(c) - 1) for c in cuts]):
                clo = np.array([cuts[a][pieces[a]] for a in range(3)])
                chi = np.array([cuts[a][pieces[a] + 1] for a in range(3)])
                kids.append((clo, chi))
            stack.extend(reversed(kids))
        else:
            leaves_lo.append(lo)
            leaves_hi.append(hi)
    return _make_leaves(np.array(leaves_lo), np.array(leaves_hi), rlo, rhi)


def _cut(lo, hi, axis: int, distance: Callable) -> tuple:
    """Split points of one axis: halves for powers of two, otherwise the
    largest power of two below the extent, placed away from the interface."""
    ext = int(hi[axis] - lo[axis])
    if ext <= 1:
        return (lo[axis], hi[axis])
    if ext & (ext - 1) == 0:
        return (lo[axis], lo[axis] + ext // 2, hi[axis])
    p = 1 << (ext.bit_length() - 1)
    low_big = hi.copy()
    low_big[axis] = lo[axis] + p
    high_big = lo.copy()
    high_big[axis] = hi[axis] - p
    if distance(lo, low_big) >= distance(high_big, hi):
        return (lo[axis], lo[axis] + p, hi[axis])
    return (lo[axis], hi[axis] - p, hi[axis])


def add_shell(leaves: Leaves, outer_lo, outer_hi) -> Leaves:
    """Grow the region to ``[outer_lo, outer_hi]`` with thin shell leaves.

    Each leaf touching the region boundary is mirrored outward: every shell
    layer next to it gets a leaf of unit thickness with the tangential
    extent of the leaf, so the graded pattern continues through the shell
    without coarsening across it.
    """
    olo = np.asarray(outer_lo, dtype=np.int64)
    ohi = np.asarray(outer_hi, dtype=np.int64)
    rlo, rhi = leaves.region_lo, leaves.region_hi
    new_lo, new_hi = [leaves.lo], [leaves.hi]
    for lo, hi in zip(leaves.lo, leaves.hi):
        opts = []
        for a in range(3):
            o = [(lo[a], hi[a])]
            if lo[a] == rlo[a]:
                o += [(t, t + 1) for t in range(olo[a], rlo[a])]
            if hi[a] == rhi[a]:
                o += [(t, t + 1) for t in range(rhi[a], ohi[a])]
            opts.append(o)
        for pick in product(*opts):
            if all(pick[a] == (lo[a], hi[a]) for a in range(3)):
                continue
            new_lo.append(np.array([[p[0] for p in pick]]))
            new_hi.append(np.array([[p[1] for p in pick]]))
    return _make_leaves(np.vstack(new_lo), np.vstack(new_hi), olo, ohi)


def _make_leaves(lo: np.ndarray, hi: np.ndarray, rlo, rhi) -> Leaves:
    s = rhi - rlo
    cell_leaf = np.full(int(np.prod(s)), -1, dtype=np.int64)
    for idx in range(lo.shape[0]):
        a, b = lo[idx] - rlo, hi[idx] - rlo
        r = [np.arange(a[ax], b[ax]) for ax in range(3)]
        ids = r[0][None, None, :] + s[0] * (r[1][None, :, None] + s[1] * r[2][:, None, None])
        cell_leaf[ids.ravel()] = idx
    if np.any(cell_leaf < 0):
        raise RuntimeError("leaves do not cover the region")
    return Leaves(rlo, rhi, lo, hi, cell_leaf)


# -------------------------------------------------------------- prolongation


@dataclass(eq=False)
class GradedProlongation:
    """Coarse space of one local problem.

    Attributes
    ----------
    system_dofs : ndarray
        Global free dofs of the local system, sorted.
    kept : ndarray
        Positions in ``system_dofs`` that carry a coarse dof, sorted.
    P : csr_matrix
        ``(len(system_dofs), len(kept))`` prolongation.
    interface : ndarray
        Positions in ``system_dofs`` of the interface dofs.
    interface_cols : ndarray
        Positions in ``kept`` of the interface dofs.
    """

    system_dofs: np.ndarray
    kept: np.ndarray
    P: sp.csr_matrix
    interface: np.ndarray
    interface_cols: np.ndarray
    identity: bool = False

    @property
    def full_count(self) -> int:
        return int(self.system_dofs.size)

    @property
    def kept_count(self) -> int:
        return int(self.kept.size)

    @property
    def ratio(self) -> float:
        return self.kept_count / self.full_count if self.full_count else 1.0

    @property
    def kept_dofs(self) -> np.ndarray:
        return self.system_dofs[self.kept]


def _lattice(lo, hi):
    """Points of the closed box, x fastest, as ``(n, 3)``."""
    r = [np.arange(lo[a], hi[a] + 1) for a in range(3)]
    K, J, I = np.meshgrid(r[2], r[1], r[0], indexing="ij")
    return np.stack([I.ravel(), J.ravel(), K.ravel()], axis=1)


def _largest_leaf(leaves: Leaves, pts: np.ndarray, free_axes) -> np.ndarray:
    """Largest leaf whose closure contains each entity.

    The entity at ``pts`` touches the cells ``pts - delta`` with ``delta`` in
    ``{0, 1}`` along ``free_axes`` (all axes for a node, the two transverse
    axes for an edge).
    """
    vol = leaves.volume
    best = np.full(pts.shape[0], -1, dtype=np.int64)
    best_vol = np.full(pts.shape[0], -1, dtype=np.int64)
    for bits in product((0, 1), repeat=len(free_axes)):
        off = np.zeros(3, dtype=np.int64)
        for ax, b in zip(free_axes, bits):
            off[ax] = b
        lid = leaves.leaf_of(pts - off)
        v = np.where(lid >= 0, vol[np.maximum(lid, 0)], -1)
        better = v > best_vol
        best[better] = lid[better]
        best_vol[better] = v[better]
    return best


def _solve_constraints(C: sp.csr_matrix, T: sp.csr_matrix, max_depth: int = 64) -> sp.csr_matrix:
    """Fixed point of ``P = C + T P`` for a nilpotent ``T``."""
    P = C.copy()
    Tk = T.copy()
    for _ in range(max_depth):
        if Tk.nnz == 0:
            P.sum_duplicates()
            P.eliminate_zeros()
            return P.tocsr()
        P = P + Tk @ C
        Tk = (Tk @ T).tocsr()
        Tk.eliminate_zeros()
    raise RuntimeError("hanging-entity constraints do not terminate")


def _node_operator(leaves: Leaves, pts: np.ndarray, in_system: np.ndarray, index_of):
    """Constraint matrices ``(C, T)`` for nodal entities ``pts``."""
    n = pts.shape[0]
    lid = _largest_leaf(leaves, pts, (0, 1, 2))
    llo = leaves.lo[lid]
    ext = leaves.hi[lid] - llo
    t = (pts - llo) / ext
    rows, cols, vals = [], [], []
    crow, ccol = [], []
    self_mask = np.all((pts == llo) | (pts == llo + ext), axis=1)
    sel = np.flatnonzero(self_mask & in_system)
    crow.append(sel)
    ccol.append(sel)
    other = np.flatnonzero(~self_mask)
    for corner in product((0, 1), repeat=3):
        c = np.asarray(corner)
        w = np.prod(np.where(c == 1, t[other], 1.0 - t[other]), axis=1)
        nz = w > 0
        q = llo[other[nz]] + c * ext[other[nz]]
        rows.append(other[nz])
        cols.append(index_of(q))
        vals.append(w[nz])
    crow = np.concatenate(crow)
    C = sp.csr_matrix((np.ones(crow.size), (crow, np.concatenate(ccol))), shape=(n, n))
    T = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(n, n))
    return C, T


def _edge_operator(leaves: Leaves, pts: np.ndarray, axes: np.ndarray, in_system: np.ndarray,
                   index_of):
    """Constraint matrices ``(C, T)`` for unit edges starting at ``pts`` along ``axes``."""
    n = pts.shape[0]
    crow, ccol, cval = [], [], []
    rows, cols, vals = [], [], []
    for axis in range(3):
        sel = np.flatnonzero(axes == axis)
        if sel.size == 0:
            continue
        tr = [ax for ax in range(3) if ax != axis]
        p = pts[sel]
        lid = _largest_leaf(leaves, p, tr)
        llo = leaves.lo[lid]
        ext = leaves.hi[lid] - llo
        t = (p[:, tr] - llo[:, tr]) / ext[:, tr]
        on_seg = np.all((t == 0) | (t == 1), axis=1)
        # edge lies on a leaf edge: one coarse column, the segment's first unit edge
        s_idx = np.flatnonzero(on_seg)
        first = p[s_idx].copy()
        first[:, axis] = llo[s_idx, axis]
        fid = index_of(first, axis)
        ok = in_system[fid]
        crow.append(sel[s_idx[ok]])
        ccol.append(fid[ok])
        cval.append(1.0 / ext[s_idx[ok], axis])
        # otherwise: bilinear mix of the four parallel leaf edges, each the sum of its unit edges
        o_idx = np.flatnonzero(~on_seg)
        if o_idx.size == 0:
            continue
        lo_o, ext_o, t_o = llo[o_idx], ext[o_idx], t[o_idx]
        for corner in product((0, 1), repeat=2):
            c = np.asarray(corner)
            w = np.prod(np.where(c == 1, t_o, 1.0 - t_o), axis=1)
            nz = np.flatnonzero(w > 0)
            if nz.size == 0:
                continue
            base = lo_o[nz].copy()
            base[:, tr] += c * ext_o[nz][:, tr]
            L = ext_o[nz, axis]
            reps = np.repeat(np.arange(nz.size), L)
            step = np.arange(reps.size) - np.repeat(np.cumsum(L) - L, L)
            q = base[reps].copy()
            q[:, axis] += step
            rows.append(sel[o_idx[nz[reps]]])
            cols.append(index_of(q, axis))
            vals.append((w[nz] / L)[reps])
    cat = lambda xs, dt: np.concatenate(xs) if xs else np.zeros(0, dtype=dt)
    C = sp.csr_matrix((cat(cval, float), (cat(crow, np.int64), cat(ccol, np.int64))), shape=(n, n))
    T = sp.csr_matrix((cat(vals, float), (cat(rows, np.int64), cat(cols, np.int64))), shape=(n, n))
    return C, T


def _region_entities(dofmap: DofMap, rlo, rhi):
    """Local entities of the closed region box.

    Returns ``(pts, axes, free_id, index_of)``: entity start points, edge
    axes (``-1`` for nodes), the free dof of each entity's first component
    (-1 when eliminated), and a lookup from points to local entity ids.
    """
    shape = np.asarray(dofmap.shape)
    s = rhi - rlo
    if dofmap.kind == ELASTICITY:
        pts = _lattice(rlo, rhi)
        dims = shape + 1
        node = pts[:, 0] + dims[0] * (pts[:, 1] + dims[1] * pts[:, 2])
        fid = dofmap.global_to_free[3 * node]
        axes = np.full(pts.shape[0], -1)

        def index_of(q, axis=None):
            r = q - rlo
            return r[:, 0] + (s[0] + 1) * (r[:, 1] + (s[1] + 1) * r[:, 2])
        return pts, axes, fid, index_of
    pts_l, axes_l, fid_l, offsets, sizes = [], [], [], [], []
    goff = 0
    loff = 0
    for axis in range(3):
        dims = shape + 1
        dims[axis] -= 1
        hi = rhi.copy()
        hi[axis] -= 1
        p = _lattice(rlo, hi)
        g = goff + p[:, 0] + dims[0] * (p[:, 1] + dims[1] * p[:, 2])
        pts_l.append(p)
        axes_l.append(np.full(p.shape[0], axis))
        fid_l.append(dofmap.global_to_free[g])
        ls = s + 1
        ls[axis] -= 1
        offsets.append(loff)
        sizes.append(ls)
        loff += p.shape[0]
        goff += int(np.prod(dims))

    def index_of(q, axis):
        r = q - rlo
        ls = sizes[axis]
        return offsets[axis] + r[:, 0] + ls[0] * (r[:, 1] + ls[1] * r[:, 2])
    return (np.concatenate(pts_l), np.concatenate(axes_l), np.concatenate(fid_l), index_of)


def graded_prolongation(dofmap: DofMap, leaves: Leaves, system_dofs: np.ndarray,
                        interface_dofs: np.ndarray, include_boundary: bool = False
                        ) -> GradedProlongation:
    """Prolongation from the leaf space onto a local system.

    Parameters
    ----------
    system_dofs : ndarray
        Sorted free dofs of the local system; all other entities of the
        region carry zero.
    interface_dofs : ndarray
        Sorted subset of ``system_dofs`` on which ``P`` is the identity.
    include_boundary : bool
        Treat every entity of the region as a system entity.  Used to check
        reproduction properties without boundary truncation; the returned
        ``P`` then acts on all region entities (free or not).
    """
    rlo, rhi = leaves.region_lo, leaves.region_hi
    pts, axes, fid, index_of = _region_entities(dofmap, rlo, rhi)
    nent = pts.shape[0]
    sys_mask = np.zeros(dofmap.num_free + 1, dtype=bool)
    sys_mask[system_dofs] = True
    in_system = np.ones(nent, dtype=bool) if include_boundary else sys_mask[fid]
    if dofmap.kind == ELASTICITY:
        C, T = _node_operator(leaves, pts, in_system, index_of)
    else:
        C, T = _edge_operator(leaves, pts, axes, in_system, index_of)
    Pent = _solve_constraints(C.tocsr(), T.tocsr())
    used = np.unique(C.tocoo().col)
    Pent = Pent[:, used]
    if include_boundary:
        rows = np.arange(nent)
        ent_dofs = np.arange(nent)
        kept_ent = used
    else:
        rows = np.flatnonzero(in_system)
        order = np.argsort(fid[rows])
        rows = rows[order]
        expect = system_dofs[::3] if dofmap.kind == ELASTICITY else system_dofs
        if not np.array_equal(fid[rows], expect):
            raise RuntimeError("system dofs are not entities of the region")
        ent_dofs = fid[rows]
        kept_ent = used
    P = Pent[rows]
    kept_dofs = fid[kept_ent] if not include_boundary else kept_ent
    if dofmap.kind == ELASTICITY:
        P = sp.kron(P, sp.identity(3), format="csr")
        if not include_boundary:
            kept_dofs = (kept_dofs[:, None] + np.arange(3)).ravel()
    P = sp.csr_matrix(P)
    P.sort_indices()
    if include_boundary:
        sd = np.arange(P.shape[0])
        kept = np.arange(P.shape[1])
        return GradedProlongation(sd, kept, P, np.zeros(0, dtype=np.int64),
                                  np.zeros(0, dtype=np.int64))
    kept = np.searchsorted(system_dofs, kept_dofs)
    if not np.all(np.diff(kept) > 0):
        raise RuntimeError("kept lattice is not monotone")
    iface = np.searchsorted(system_dofs, interface_dofs)
    icols = np.searchsorted(kept, iface)
    if np.any(icols >= kept.size) or not np.array_equal(kept[np.minimum(icols, kept.size - 1)], iface):
        raise RuntimeError("interface dofs must be coarse dofs")
    return GradedProlongation(system_dofs, kept, P, iface, icols)


def identity_prolongation(system_dofs: np.ndarray, interface_dofs: np.ndarray) -> GradedProlongation:
    """Keep-all coarse space."""
    n = system_dofs.size
    iface = np.searchsorted(system_dofs, interface_dofs)
    return GradedProlongation(system_dofs, np.arange(n), sp.identity(n, format="csr"),
                              iface, iface.copy(), identity=True)


def graded_dof_subset(dofmap: DofMap, leaves: Leaves, system_dofs, interface_dofs) -> np.ndarray:
    """Free dofs that carry a coarse dof of the graded space."""
    return graded_prolongation(dofmap, leaves, system_dofs, interface_dofs).kept_dofs


# ----------------------------------------------------- face and vertex spaces


_CACHE: dict = {}


def _cached(key, build):
    if key not in _CACHE:
        if len(_CACHE) > 256:
            _CACHE.clear()
        _CACHE[key] = build()
    return _CACHE[key]


def _geometry_key(dofmap: DofMap, origin, *dof_sets, extra=()):
    h = hashlib.blake2b(digest_size=16)
    h.update(dofmap.kind.encode())
    h.update(repr(extra).encode())
    for d in dof_sets:
        h.update(np.ascontiguousarray(dofmap.lo[d] - origin).tobytes())
        h.update(np.ascontiguousarray(dofmap.hi[d] - origin).tobytes())
        h.update(b"|")
    return h.hexdigest()


def _translated(gp: GradedProlongation, system_dofs, interface_dofs) -> GradedProlongation:
    return GradedProlongation(system_dofs, gp.kept, gp.P, gp.interface, gp.interface_cols,
                              gp.identity)


def face_leaves(m: int, axis: int, origin, split: float = 1.0) -> Leaves:
    """Leaves of the two-subdomain region with lattice corner ``origin``."""
    o = np.asarray(origin, dtype=np.int64)
    size = np.full(3, m, dtype=np.int64)
    size[axis] = 2 * m
    first_hi = o + m
    second_lo = o.copy()
    second_lo[axis] += m
    roots = [(o, first_hi), (second_lo, o + size)]
    return build_leaves(roots, plane_distance(axis, int(o[axis] + m)), split, MAX_LEAF)


def vertex_leaves(grid, sets, v, split: float = 1.0) -> Leaves:
    """Leaves of the solver box around ``v``.

    The octants of the half box are refined toward the coarse lines and the
    halo shell of the solver box is added with :func:`add_shell`.
    """
    lo, hi = vertex_half_box(grid, v)
    c = np.asarray(v) * grid.m
    roots = []
    for bits in product((0, 1), repeat=3):
        b = np.asarray(bits[::-1])
        olo = np.where(b == 0, lo, c)
        ohi = np.where(b == 0, c, hi)
        roots.append((olo, ohi))
    leaves = build_leaves(roots, lines_distance(c), split, MAX_LEAF)
    slo, shi = sets.vertex_box[v]
    return add_shell(leaves, slo, shi)


def face_prolongation(grid, dofmap: DofMap, sets, face, coarsen: bool = True,
                      split: float = 1.0) -> GradedProlongation:
    """Coarse space of the local problem on the two subdomains sharing ``face``."""
    system = sets.face_region_dofs[face]
    iface = sets.face_dofs[face]
    if not coarsen or grid.m < MIN_GRADED_M:
        return identity_prolongation(system, iface)
    axis, plane, t1, t2 = face
    t = [ax for ax in range(3) if ax != axis]
    origin = np.zeros(3, dtype=np.int64)
    origin[axis] = (plane - 1) * grid.m
    origin[t[0]], origin[t[1]] = t1 * grid.m, t2 * grid.m
    key = _geometry_key(dofmap, origin, system, iface, extra=("face", axis, grid.m, split))

    def build():
        return graded_prolongation(dofmap, face_leaves(grid.m, axis, origin, split), system, iface)
    return _translated(_cached(key, build), system, iface)


def vertex_prolongation(grid, dofmap: DofMap, sets, v, coarsen: bool = True,
                        split: float = 1.0) -> GradedProlongation:
    """Coarse space of the wire-basket problem around vertex ``v``."""
    system = sets.vertex_system_dofs(v)
    iface = sets.w_v_half[v]
    if not coarsen or grid.m < MIN_GRADED_M:
        return identity_prolongation(system, iface)
    origin = np.asarray(v) * grid.m
    lo, hi = sets.vertex_box[v]
    key = _geometry_key(dofmap, origin, system, iface,
                        extra=("vertex", tuple(lo - origin), tuple(hi - origin), grid.m, split))

    def build():
        return graded_prolongation(dofmap, vertex_leaves(grid, sets, v, split), system, iface)
    return _translated(_cached(key, build), system, iface)


# ------------------------------------------------------------ local solves


def coarsened_system(A, gp: GradedProlongation) -> sp.csr_matrix:
    """Galerkin matrix ``P^T A_S P`` of a local problem."""
    AS = extract_principal_submatrix(A, gp.system_dofs)
    if gp.identity:
        return AS
    return triple_product(gp.P, AS)


def coarsened_interface_solve(factor, n: int, interface_cols: np.ndarray,
                              b_interface: np.ndarray) -> np.ndarray:
    """Solve the coarsened system with a right side carried by the interface.

    Returns only the interface part of the solution.
    """
    b_interface = np.asarray(b_interface, dtype=float)
    rhs = np.zeros((n,) + b_interface.shape[1:])
    rhs[interface_cols] = b_interface
    return factor.solve(rhs)[interface_cols]


def exact_interface_solve(A, system_dofs: np.ndarray, interface_dofs: np.ndarray,
                          b_interface: np.ndarray, factor=None) -> np.ndarray:
    """Interface values of the uncoarsened local problem."""
    AS = extract_principal_submatrix(A, system_dofs)
    if factor is None:
        factor = factorize(AS)
    pos = np.searchsorted(system_dofs, interface_dofs)
    return coarsened_interface_solve(factor, AS.shape[0], pos, b_interface)


def write_coarsening_report(rows, path) -> None:
    """CSV with one line per local solver: ``solver, kind, kept, full, ratio``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["solver", "kind", "kept", "full", "ratio"])
        for r in rows:
            w.writerow([r["solver"], r["kind"], r["kept"], r["full"], f"{r['ratio']:.6f}"])
