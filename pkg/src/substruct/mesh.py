"""Structured cube grids, the subdomain partition and jump regions.

All geometry is integer lattice arithmetic.  A fine grid has ``N = n*m``
cells per axis; lattice coordinates run over ``0..N`` and the subdomain with
index ``a`` along an axis covers ``[a*m, (a+1)*m]``.  Coarse vertex ``V`` sits
at lattice coordinate ``V*m``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from itertools import product

import numpy as np

__all__ = [
    "StructuredGrid",
    "JumpRegion",
    "build_grid",
    "coarse_vertices",
    "interior_faces",
    "vertex_half_box",
    "vertex_half_subdomain",
    "subdomain_of_cells",
    "jump_cells",
    "jump_coefficient",
]

INDEX_LIMIT = 2**31


@dataclass(frozen=True)
class StructuredGrid:
    """Uniform partition of the unit cube.

    Attributes
    ----------
    n : int
        Subdomains per axis.
    m : int
        Fine cells per subdomain per axis.
    """

    n: int
    m: int

    @property
    def N(self) -> int:
        """Fine cells per axis."""
        return self.n * self.m

    @property
    def h(self) -> float:
        return 1.0 / self.N

    @property
    def d(self) -> float:
        return 1.0 / self.n

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.N, self.N, self.N)

    @property
    def num_cells(self) -> int:
        return self.N**3

    @property
    def num_nodes(self) -> int:
        return (self.N + 1) ** 3

    @property
    def num_subdomains(self) -> int:
        return self.n**3

    def subdomain_box(self, k) -> tuple[np.ndarray, np.ndarray]:
        """Lattice corners ``(lo, hi)`` of subdomain ``k = (a, b, c)``."""
        k = np.asarray(k, dtype=np.int64)
        return k * self.m, (k + 1) * self.m


def build_grid(n: int, m: int) -> StructuredGrid:
    """Validate ``(n, m)`` and return the grid.

    ``m`` must be even so that vertex-centred half boxes are cell aligned.
    """
    if int(n) != n or int(m) != m:
        raise ValueError("n and m must be integers")
    n, m = int(n), int(m)
    if n < 2:
        raise ValueError(f"need n >= 2 subdomains per axis, got {n}")
    if m < 2:
        raise ValueError(f"need m >= 2 cells per subdomain, got {m}")
    if m % 2:
        raise ValueError(f"m must be even, got {m}")
    if 3 * (n * m + 1) ** 3 >= INDEX_LIMIT:
        raise ValueError(f"grid n*m={n * m} overflows 32-bit dof indices")
    return StructuredGrid(n, m)


def coarse_vertices(grid: StructuredGrid) -> list[tuple[int, int, int]]:
    """All coarse vertices, x fastest."""
    r = range(grid.n + 1)
    return [(a, b, c) for c, b, a in product(r, r, r)]


def interior_faces(grid: StructuredGrid) -> list[tuple[int, int, int, int]]:
    """Interior coarse faces as ``(axis, plane, t1, t2)``.

    The face lies in lattice plane ``coord[axis] == plane*m`` and spans the
    coarse cell ``(t1, t2)`` in the two remaining axes (in increasing axis
    order).  There are ``3 n^2 (n-1)`` of them.
    """
    n = grid.n
    out = []
    for axis in range(3):
        for plane in range(1, n):
            for t2 in range(n):
                for t1 in range(n):
                    out.append((axis, plane, t1, t2))
    return out


def vertex_half_box(grid: StructuredGrid, v) -> tuple[np.ndarray, np.ndarray]:
    """Closed lattice box of side ``m`` centred at coarse vertex ``v``, clipped to the cube."""
    v = np.asarray(v, dtype=np.int64)
    if v.shape != (3,) or np.any(v < 0) or np.any(v > grid.n):
        raise ValueError(f"{tuple(v)} is not a coarse vertex")
    half = grid.m // 2
    lo = np.maximum(v * grid.m - half, 0)
    hi = np.minimum(v * grid.m + half, grid.N)
    return lo, hi


def vertex_half_subdomain(grid: StructuredGrid, v) -> np.ndarray:
    """Fine cells of the half box around ``v`` as ``(ncell, 3)`` indices."""
    lo, hi = vertex_half_box(grid, v)
    ranges = [np.arange(lo[a], hi[a]) for a in range(3)]
    K, J, I = np.meshgrid(ranges[2], ranges[1], ranges[0], indexing="ij")
    return np.stack([I.ravel(), J.ravel(), K.ravel()], axis=1)


def subdomain_of_cells(grid: StructuredGrid) -> np.ndarray:
    """Linear subdomain index of each fine cell (cells ordered x fastest)."""
    i = np.arange(grid.N) // grid.m
    n = grid.n
    return (i[None, None, :] + n * (i[None, :, None] + n * i[:, None, None])).ravel()


class JumpRegion(enum.Enum):
    """Subregion D where the coefficients take a different value."""

    NONE = "none"
    CHOICE1 = "choice1"
    CHOICE2 = "choice2"

    @classmethod
    def parse(cls, value) -> "JumpRegion":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown jump region {value!r}") from None

    def boxes(self) -> list[tuple[float, float]]:
        """D as a list of cubes ``[a, b]^3``."""
        if self is JumpRegion.CHOICE1:
            return [(0.25, 0.5)]
        if self is JumpRegion.CHOICE2:
            return [(0.25, 0.5), (0.5, 0.75)]
        return []


def jump_cells(grid: StructuredGrid, region) -> np.ndarray:
    """Boolean mask over cells (x fastest) marking cells inside D.

    Raises if D is not a union of whole subdomains.
    """
    region = JumpRegion.parse(region)
    inside = np.zeros(grid.num_cells, dtype=bool)
    N = grid.N
    for a, b in region.boxes():
        ia, ib = a * grid.n, b * grid.n
        if abs(ia - round(ia)) > 1e-12 or abs(ib - round(ib)) > 1e-12:
            raise ValueError(
                f"jump region [{a}, {b}]^3 is not a union of subdomains for n={grid.n}"
            )
        lo, hi = int(round(ia)) * grid.m, int(round(ib)) * grid.m
        t = np.zeros(N, dtype=bool)
        t[lo:hi] = True
        inside |= (t[None, None, :] & t[None, :, None] & t[:, None, None]).ravel()
    return inside


def jump_coefficient(grid: StructuredGrid, region, inside_value: float,
                     outside_value: float = 1.0) -> np.ndarray:
    """Piecewise constant per-cell field: ``inside_value`` on D, else ``outside_value``."""
    if inside_value <= 0 or outside_value <= 0:
        raise ValueError("coefficients must be positive")
    mask = jump_cells(grid, region)
    return np.where(mask, float(inside_value), float(outside_value))
