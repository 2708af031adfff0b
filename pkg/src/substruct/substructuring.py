"""Substructuring preconditioners with vertex-centred interface solvers.

Both preconditioners share the additive form

    B^{-1} = P_d A_d^{-1} P_d^T + K + (I - K A) M (I - A K),

where ``K`` applies the subdomain-interior inverses, ``I - K A`` is the
discrete harmonic extension of interface values, and ``M`` sums local
interface solvers whose outputs are truncated to the interface:

* ``PreconditionerB1``: one solver per coarse vertex on all free dofs
  strictly inside its solver box (the half box grown by a small halo), with
  right side and output on the interface dofs of that box.
* ``PreconditionerB2``: one solver per interior coarse face (two-subdomain
  region, right side and output on the open face) plus one wire-basket solver
  per vertex (octant interiors of the solver box and the interface dofs near
  the coarse lines through the vertex), each optionally replaced by a graded
  Galerkin coarsening.
"""
from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator

from .assembly import coarse_prolongation
from .coarsening import (GradedProlongation, coarsened_system, face_prolongation,
                         vertex_prolongation)
from .dofmap import DofMap
from .mesh import StructuredGrid
from .sets import DecompositionSets
from .sparse import (Factorization, extract_principal_submatrix, factorize,
                     geometric_nested_dissection, triple_product)

__all__ = [
    "FactorCache",
    "LocalSolvers",
    "PreconditionerB1",
    "PreconditionerB2",
    "setup_B1",
    "setup_B2",
    "apply_B1",
    "apply_B2",
    "harmonic_extension",
]


class FactorCache:
    """Share factorizations between bitwise-identical matrices."""

    def __init__(self):
        self._store: dict[str, Factorization] = {}
        self.hits = 0
        self.misses = 0

    @staticmethod
    def key(M: sp.csr_matrix) -> str:
        h = hashlib.blake2b(digest_size=20)
        h.update(np.asarray(M.shape, dtype=np.int64).tobytes())
        h.update(M.indptr.astype(np.int64).tobytes())
        h.update(M.indices.astype(np.int64).tobytes())
        h.update(M.data.tobytes())
        return h.hexdigest()

    def get(self, M: sp.csr_matrix, ordering) -> tuple[str, Factorization]:
        k = self.key(M)
        f = self._store.get(k)
        if f is None:
            self.misses += 1
            f = factorize(M, ordering() if callable(ordering) else ordering)
            self._store[k] = f
        else:
            self.hits += 1
        return k, f

    def __len__(self):
        return len(self._store)

    @property
    def factor_nnz(self) -> int:
        return sum(f.nnz for f in self._store.values())


@dataclass(eq=False)
class _Group:
    factor: Factorization
    pos: np.ndarray   # positions in the local system read and written
    glob: np.ndarray  # (members, len(pos)) global dofs matched to pos


class LocalSolvers:
    """A family of local solves ``x[glob] += (A_loc^{-1} [0; r[glob]])[pos]``.

    Members sharing a factorization and the same ``pos`` are solved together
    as one block of right-hand sides.
    """

    def __init__(self):
        self._pending: dict[tuple, list] = {}
        self._factors: dict[tuple, Factorization] = {}
        self.groups: list[_Group] = []
        self.count = 0
        self.sizes: list[int] = []

    def add(self, key: str, factor: Factorization, pos: np.ndarray, glob: np.ndarray):
        gk = (key, pos.tobytes())
        self._pending.setdefault(gk, []).append(glob)
        self._factors[gk] = factor
        self.count += 1
        self.sizes.append(factor.n)

    def finalize(self) -> "LocalSolvers":
        for gk, globs in self._pending.items():
            pos = np.frombuffer(gk[1], dtype=np.int64).copy()
            self.groups.append(_Group(self._factors[gk], pos, np.stack(globs)))
        self._pending.clear()
        self._factors.clear()
        return self

    def apply(self, r: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        if out is None:
            out = np.zeros_like(r)
        for g in self.groups:
            n = g.factor.n
            if g.pos.size == n and np.array_equal(g.pos, np.arange(n)):
                rhs = r[g.glob].T
            else:
                rhs = np.zeros((n, g.glob.shape[0]))
                rhs[g.pos] = r[g.glob].T
            y = g.factor.solve(np.ascontiguousarray(rhs))[g.pos]
            out += np.bincount(g.glob.ravel(), weights=y.T.ravel(), minlength=out.size)
        return out


def _nd(dofmap: DofMap, dofs: np.ndarray):
    return lambda: geometric_nested_dissection(dofmap.lo[dofs], dofmap.hi[dofs])


@dataclass(eq=False)
class _Base:
    A: sp.csr_matrix
    grid: StructuredGrid
    dofmap: DofMap
    sets: DecompositionSets
    P_d: sp.csr_matrix
    coarse: Factorization
    interiors: LocalSolvers
    cache: FactorCache
    setup_seconds: float = 0.0
    info: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def coarse_part(self, g):
        return self.P_d @ self.coarse.solve(self.P_d.T @ g)

    def interior_part(self, g):
        return self.interiors.apply(g)

    def extend(self, trace):
        """``(I - K A) trace``: harmonic extension of interface values."""
        return trace - self.interiors.apply(self.A @ trace)

    def interface_part(self, r):  # pragma: no cover - abstract
        raise NotImplementedError

    def apply(self, g: np.ndarray) -> np.ndarray:
        g = np.asarray(g, dtype=float)
        u_d = self.coarse_part(g)
        u_i = self.interior_part(g)
        r = g - self.A @ u_i
        trace = self.interface_part(r)
        return u_d + u_i + self.extend(trace)

    __call__ = apply

    def as_linear_operator(self) -> LinearOperator:
        return LinearOperator(self.A.shape, matvec=self.apply, dtype=float)


@dataclass(eq=False)
class PreconditionerB1(_Base):
    """Coarse, interior and vertex half-box solvers."""

    vertex_solvers: LocalSolvers = None

    def interface_part(self, r):
        return self.vertex_solvers.apply(r)


@dataclass(eq=False)
class PreconditionerB2(_Base):
    """Coarse, interior, face and wire-basket solvers."""

    face_solvers: LocalSolvers = None
    vertex_wb_solvers: LocalSolvers = None
    face_spaces: dict = None
    vertex_spaces: dict = None

    def interface_part(self, r):
        out = self.face_solvers.apply(r)
        return self.vertex_wb_solvers.apply(r, out)

    def coarsening_rows(self) -> list[dict]:
        rows = []
        for f, gp in self.face_spaces.items():
            rows.append(dict(solver=f"face{f}", kind="face", kept=gp.kept_count,
                             full=gp.full_count, ratio=gp.ratio))
        for v, gp in self.vertex_spaces.items():
            rows.append(dict(solver=f"vertex{v}", kind="vertex", kept=gp.kept_count,
                             full=gp.full_count, ratio=gp.ratio))
        return rows


def _common(A, grid, dofmap, sets, cache):
    A = sp.csr_matrix(A)
    P_d = coarse_prolongation(grid, dofmap)
    A_d = triple_product(P_d, A)
    coarse = factorize(A_d, "rcm")
    interiors = LocalSolvers()
    for dofs in sets.subdomain_interior:
        if dofs.size == 0:
            continue
        key, f = cache.get(extract_principal_submatrix(A, dofs), _nd(dofmap, dofs))
        interiors.add(key, f, np.arange(dofs.size), dofs)
    return A, P_d, coarse, interiors.finalize()


def setup_B1(A, grid: StructuredGrid, dofmap: DofMap, sets: DecompositionSets,
             cache: FactorCache | None = None) -> PreconditionerB1:
    """Factor every block of the first preconditioner."""
    t0 = time.perf_counter()
    cache = FactorCache() if cache is None else cache
    A, P_d, coarse, interiors = _common(A, grid, dofmap, sets, cache)
    gamma = np.zeros(dofmap.num_free, dtype=bool)
    gamma[sets.gamma] = True
    vs = LocalSolvers()
    for v in sets.vertices:
        dofs = sets.vertex_dofs[v]
        key, f = cache.get(extract_principal_submatrix(A, dofs), _nd(dofmap, dofs))
        tr = sets.gamma_v_half[v]
        pos = np.searchsorted(dofs, tr)
        vs.add(key, f, pos, tr)
    vs.finalize()
    prec = PreconditionerB1(A, grid, dofmap, sets, P_d, coarse, interiors, cache,
                            vertex_solvers=vs)
    prec.setup_seconds = time.perf_counter() - t0
    prec.info = dict(coarse_dofs=P_d.shape[1], subdomain_solvers=interiors.count,
                     vertex_solvers=vs.count, factorizations=len(cache))
    return prec


def _coarse_local(A, gp: GradedProlongation, dofmap, cache):
    M = coarsened_system(A, gp)
    dofs = gp.system_dofs[gp.kept]
    key, f = cache.get(M, _nd(dofmap, dofs))
    return key, f


def setup_B2(A, grid: StructuredGrid, dofmap: DofMap, sets: DecompositionSets,
             coarsen: bool = True, split: float = 1.0,
             cache: FactorCache | None = None) -> PreconditionerB2:
    """Factor every block of the second preconditioner.

    Parameters
    ----------
    coarsen : bool
        Use graded coarse spaces for the face and wire-basket solvers.  With
        ``False`` (or ``m`` below the grading threshold) the local problems
        are solved exactly.
    split : float
        Grading aggressiveness passed to the leaf construction.
    """
    t0 = time.perf_counter()
    cache = FactorCache() if cache is None else cache
    A, P_d, coarse, interiors = _common(A, grid, dofmap, sets, cache)
    fs = LocalSolvers()
    face_spaces = {}
    for face in sets.faces:
        gp = face_prolongation(grid, dofmap, sets, face, coarsen, split)
        if gp.interface.size == 0:
            continue
        face_spaces[face] = gp
        key, f = _coarse_local(A, gp, dofmap, cache)
        fs.add(key, f, gp.interface_cols, gp.system_dofs[gp.interface])
    fs.finalize()
    ws = LocalSolvers()
    vertex_spaces = {}
    for v in sets.vertices:
        if sets.w_v_half[v].size == 0:
            continue
        gp = vertex_prolongation(grid, dofmap, sets, v, coarsen, split)
        vertex_spaces[v] = gp
        key, f = _coarse_local(A, gp, dofmap, cache)
        ws.add(key, f, gp.interface_cols, gp.system_dofs[gp.interface])
    ws.finalize()
    prec = PreconditionerB2(A, grid, dofmap, sets, P_d, coarse, interiors, cache,
                            face_solvers=fs, vertex_wb_solvers=ws,
                            face_spaces=face_spaces, vertex_spaces=vertex_spaces)
    prec.setup_seconds = time.perf_counter() - t0
    prec.info = dict(coarse_dofs=P_d.shape[1], subdomain_solvers=interiors.count,
                     face_solvers=fs.count, vertex_solvers=ws.count,
                     factorizations=len(cache), coarsened=bool(coarsen and grid.m >= 8))
    return prec


def apply_B1(prec: PreconditionerB1, g: np.ndarray) -> np.ndarray:
    """``B_I^{-1} g``."""
    return prec.apply(g)


def apply_B2(prec: PreconditionerB2, g: np.ndarray) -> np.ndarray:
    """``B_II^{-1} g``."""
    return prec.apply(g)


def harmonic_extension(A, interior: np.ndarray, trace: np.ndarray,
                       factor: Factorization | None = None) -> np.ndarray:
    """Interior values ``-A_kk^{-1} A_k. x`` of the discrete harmonic extension.

    ``trace`` is a full-length vector; its entries on ``interior`` are ignored.
    """
    A = sp.csr_matrix(A)
    x = np.array(trace, dtype=float)
    x[interior] = 0.0
    if factor is None:
        factor = factorize(extract_principal_submatrix(A, interior))
    return -factor.solve((A @ x)[interior])
