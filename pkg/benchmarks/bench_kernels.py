"""Compare the compiled and pure-Python kernels.

Times CSR assembly, the LDL^T factorization and a multi-RHS solve on one
subdomain-sized elasticity block, then a full B_I PCG run, under each
available backend::

    python3 benchmarks/bench_kernels.py --n 2 --m 8 --repeat 3
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from substruct import kernels
from substruct.assembly import assemble, assemble_rhs
from substruct.dofmap import build_dofmap
from substruct.mesh import build_grid
from substruct.sets import build_decomposition_sets
from substruct.sparse import extract_principal_submatrix, factorize, geometric_nested_dissection, pcg
from substruct.substructuring import setup_B1


def _best(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def run(n: int, m: int, repeat: int, problem: str) -> list[tuple]:
    grid = build_grid(n, m)
    dm = build_dofmap(problem, grid)
    sets = build_decomposition_sets(grid, dm)
    rows = []
    for name in kernels.available_backends():
        kernels.use_backend(name)
        t_asm, A = _best(lambda: assemble(dm), repeat)
        dofs = sets.vertex_dofs[sets.vertices[len(sets.vertices) // 2]]
        block = extract_principal_submatrix(A, dofs)
        perm = geometric_nested_dissection(dm.lo[dofs], dm.hi[dofs])
        t_fac, f = _best(lambda: factorize(block, perm), repeat)
        rhs = np.random.default_rng(0).standard_normal((block.shape[0], 8))
        t_sol, _ = _best(lambda: f.solve(rhs), repeat)
        b = assemble_rhs(dm, "elasticity-poly" if problem == "elasticity" else "maxwell-mixed")

        def full():
            prec = setup_B1(A, grid, dm, sets)
            return pcg(A, b, prec, 1e-6, 500)[1].iterations
        t_pcg, its = _best(full, 1)
        rows.append((name, A.shape[0], block.shape[0], f.nnz, t_asm, t_fac, t_sol, t_pcg, its))
    return rows


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--m", type=int, default=8)
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--problem", default="elasticity", choices=["elasticity", "maxwell"])
    args = p.parse_args(argv)
    previous = kernels.backend
    try:
        rows = run(args.n, args.m, args.repeat, args.problem)
    finally:
        kernels.use_backend(previous)
    hdr = ("backend", "dofs", "block", "nnz(L)", "assemble_s", "factor_s", "solve8_s",
           "B1_pcg_s", "iters")
    print(" ".join(f"{h:>11}" for h in hdr))
    for r in rows:
        print(f"{r[0]:>11} {r[1]:>11d} {r[2]:>11d} {r[3]:>11d} "
              + " ".join(f"{x:>11.4f}" for x in r[4:8]) + f" {r[8]:>11d}")
    if len(rows) == 2:
        c, py = rows
        print("speedup (python / cython): "
              + ", ".join(f"{h} {py[i] / c[i]:.1f}x" for i, h in
                          ((4, "assemble"), (5, "factor"), (6, "solve"), (7, "B1 run"))))


if __name__ == "__main__":
    main()
