import numpy as np
import pytest

from oracles import dense_b1_oracle
from substruct.assembly import assemble_rhs, coarse_prolongation
from substruct.coarsening import face_prolongation
from substruct.experiments import DEFAULT_SOLUTION
from substruct.sparse import extract_principal_submatrix, operator_symmetry_check, pcg
from substruct.substructuring import (FactorCache, LocalSolvers, apply_B1, apply_B2,
                                      harmonic_extension, setup_B1, setup_B2)


def _rel(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


@pytest.mark.parametrize("kind", ["elasticity", "maxwell"])
def test_b1_matches_dense_oracle(small_problem, kind):
    g, dm, A, s = small_problem(kind, 2, 2)
    prec = setup_B1(A, g, dm, s)
    P_d = coarse_prolongation(g, dm).toarray()
    systems = [(s.vertex_dofs[v], s.gamma_v_half[v]) for v in s.vertices]
    B = dense_b1_oracle(A.toarray(), P_d, s.subdomain_interior, systems)
    rng = np.random.default_rng(0)
    for _ in range(5):
        x = rng.standard_normal(A.shape[0])
        assert _rel(apply_B1(prec, x), B @ x) < 1e-9


@pytest.mark.parametrize("kind", ["elasticity", "maxwell"])
def test_exact_b2_matches_dense_oracle(small_problem, kind):
    g, dm, A, s = small_problem(kind, 2, 4)
    prec = setup_B2(A, g, dm, s, coarsen=False)
    P_d = coarse_prolongation(g, dm).toarray()
    systems = [(s.face_region_dofs[f], s.face_dofs[f]) for f in prec.face_spaces]
    for gp in prec.vertex_spaces.values():
        systems.append((gp.system_dofs, gp.system_dofs[gp.interface]))
    B = dense_b1_oracle(A.toarray(), P_d, s.subdomain_interior, systems)
    x = np.random.default_rng(1).standard_normal(A.shape[0])
    assert _rel(apply_B2(prec, x), B @ x) < 1e-9


@pytest.mark.parametrize("kind", ["elasticity", "maxwell"])
def test_operators_symmetric_positive(small_problem, kind):
    g, dm, A, s = small_problem(kind, 2, 8)
    for prec in (setup_B1(A, g, dm, s), setup_B2(A, g, dm, s)):
        asym, ray = operator_symmetry_check(prec.apply, A.shape[0], n_vectors=20)
        assert asym < 1e-10
        assert ray > 0


def test_local_blocks_spd(small_problem):
    g, dm, A, s = small_problem("maxwell", 2, 4)
    v = (1, 1, 1)
    M = extract_principal_submatrix(A, s.vertex_dofs[v]).toarray()
    assert np.allclose(M, M.T, atol=0)
    assert np.linalg.eigvalsh(M).min() > 0


@pytest.mark.parametrize("kind", ["elasticity", "maxwell"])
def test_harmonic_extension_interior_residual(small_problem, kind):
    g, dm, A, s = small_problem(kind, 2, 4)
    trace = np.zeros(A.shape[0])
    rng = np.random.default_rng(2)
    trace[s.gamma] = rng.standard_normal(s.gamma.size)
    for interior in s.subdomain_interior:
        x = trace.copy()
        x[interior] = harmonic_extension(A, interior, trace)
        res = np.abs((A @ x)[interior]).max()
        assert res <= 1e-9 * abs(A).max() * np.abs(trace).max()
    prec = setup_B1(A, g, dm, s)
    ext = prec.extend(trace)
    assert np.allclose(ext[s.gamma], trace[s.gamma])
    assert np.abs((A @ ext)[np.concatenate(s.subdomain_interior)]).max() < 1e-9 * abs(A).max()


@pytest.mark.parametrize("kind", ["elasticity", "maxwell"])
def test_b2_keep_all_matches_exact(small_problem, kind):
    g, dm, A, s = small_problem(kind, 2, 8)
    b = assemble_rhs(dm, DEFAULT_SOLUTION[kind])
    full = setup_B2(A, g, dm, s, coarsen=True, split=1e9)
    exact = setup_B2(A, g, dm, s, coarsen=False)
    assert all(gp.kept_count == gp.full_count for gp in full.face_spaces.values())
    x = np.random.default_rng(3).standard_normal(A.shape[0])
    assert _rel(full.apply(x), exact.apply(x)) < 1e-10
    _, r1 = pcg(A, b, full)
    _, r2 = pcg(A, b, exact)
    assert r1.iterations == r2.iterations


@pytest.mark.parametrize("kind", ["elasticity", "maxwell"])
def test_pcg_converges_with_both(small_problem, kind):
    g, dm, A, s = small_problem(kind, 3, 4)
    b = assemble_rhs(dm, DEFAULT_SOLUTION[kind])
    _, plain = pcg(A, b)
    for prec in (setup_B1(A, g, dm, s), setup_B2(A, g, dm, s)):
        x, rep = pcg(A, b, prec)
        assert rep.converged and rep.iterations < plain.iterations
        assert np.linalg.norm(b - A @ x) < 1e-6 * np.linalg.norm(b)


def test_factor_cache_shares_translates(small_problem):
    g, dm, A, s = small_problem("elasticity", 4, 4)
    cache = FactorCache()
    prec = setup_B1(A, g, dm, s, cache)
    # interior and vertex solvers repeat by translation
    assert cache.hits > 0
    assert len(cache) < prec.info["subdomain_solvers"] + prec.info["vertex_solvers"]
    again = setup_B1(A, g, dm, s, cache)
    assert cache.misses == len(cache)
    x = np.random.default_rng(4).standard_normal(A.shape[0])
    assert np.array_equal(prec.apply(x), again.apply(x))


def test_local_solvers_batched_equals_single(small_problem):
    g, dm, A, s = small_problem("maxwell", 2, 8)
    cache = FactorCache()
    batched, single = LocalSolvers(), []
    for f in s.faces:
        gp = face_prolongation(g, dm, s, f, coarsen=False)
        key, fac = cache.get(extract_principal_submatrix(A, gp.system_dofs), "rcm")
        glob = gp.system_dofs[gp.interface]
        batched.add(key, fac, gp.interface_cols, glob)
        single.append((fac, gp.interface_cols, glob))
    batched.finalize()
    r = np.random.default_rng(5).standard_normal(A.shape[0])
    ref = np.zeros_like(r)
    for fac, pos, glob in single:
        rhs = np.zeros(fac.n)
        rhs[pos] = r[glob]
        ref[glob] += fac.solve(rhs)[pos]
    assert np.allclose(batched.apply(r), ref, rtol=1e-12, atol=1e-14)
    assert batched.count == len(s.faces)


def test_info_counts(small_problem):
    g, dm, A, s = small_problem("elasticity", 3, 4)
    p1 = setup_B1(A, g, dm, s)
    assert p1.info["subdomain_solvers"] == 27
    assert p1.info["vertex_solvers"] == len(s.vertices)
    p2 = setup_B2(A, g, dm, s)
    assert p2.info["face_solvers"] == len(s.faces)
    assert not p2.info["coarsened"]
    assert p1.setup_seconds > 0 and p1.as_linear_operator().shape == A.shape
