import numpy as np
import pytest
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from oracles import (coarse_basis_oracle, dense_assembly_oracle, nedelec_element_oracle,
                     q1_element_oracle, rigid_body_modes)
from substruct.assembly import (assemble, assemble_rhs, coarse_prolongation, l2_error,
                                nodal_max_error)
from substruct.dofmap import build_dofmap
from substruct.elements import (elasticity_element_matrix, maxwell_element_matrix)
from substruct.forcing import get_solution
from substruct.mesh import build_grid, jump_coefficient
from substruct.sparse import triple_product


# ------------------------------------------------------------------ dof maps


@pytest.mark.parametrize("kind,free", [("elasticity", 3 * 15**3), ("maxwell", 3 * 16 * 15**2)])
def test_free_dof_counts(kind, free):
    dm = build_dofmap(kind, build_grid(4, 4))
    assert dm.num_free == free
    assert np.all(dm.global_to_free[dm.free] == np.arange(dm.num_free))


def test_edge_dofs_vanish_only_in_boundary():
    dm = build_dofmap("maxwell", build_grid(2, 2))
    # an x-edge on the face y = 0 is eliminated, one crossing into x = 0 is not
    N = 4
    axes = np.argmax(dm.hi - dm.lo, axis=1)
    x_edges = dm.lo[axes == 0]
    assert not np.any(x_edges[:, 1] == 0)
    assert np.any(x_edges[:, 0] == 0)
    assert np.all((x_edges[:, 1:] > 0) & (x_edges[:, 1:] < N))


def test_box_dofs_closed_box():
    dm = build_dofmap("elasticity", build_grid(2, 2))
    d = dm.box_dofs([1, 1, 1], [2, 2, 2])
    assert d.size == 3 * 8
    assert np.all((dm.lo[d] >= 1) & (dm.hi[d] <= 2))


def test_unknown_kind():
    with pytest.raises(ValueError):
        build_dofmap("acoustics", build_grid(2, 2))


# ------------------------------------------------------------------ elements


@pytest.mark.parametrize("h", [1.0, 0.25])
def test_elasticity_element_matches_oracle(h):
    K = elasticity_element_matrix(2.0, 0.7, h)
    assert np.allclose(K, q1_element_oracle(2.0, 0.7, h), atol=1e-12 * np.abs(K).max())


@pytest.mark.parametrize("h", [1.0, 0.125])
def test_maxwell_element_matches_oracle(h):
    K = maxwell_element_matrix(1.5, 0.3, h)
    assert np.allclose(K, nedelec_element_oracle(1.5, 0.3, h), atol=1e-12 * np.abs(K).max())


def test_element_kernels():
    h = 0.5
    K = elasticity_element_matrix(1.0, 1.0, h)
    corners = np.array([(a, b, c) for c in (0, 1) for b in (0, 1) for a in (0, 1)]) * h
    R = rigid_body_modes(corners)
    assert np.abs(K @ R).max() < 1e-12 * np.abs(K).max()
    ev = np.linalg.eigvalsh(K)
    assert np.sum(ev < 1e-10 * ev.max()) == 6

    Kc = maxwell_element_matrix(1.0, 1e-300, 1.0)
    ev = np.linalg.eigvalsh(Kc)
    # curl-curl kernel on a cube: gradients of the 8 corner functions minus constants
    assert np.sum(ev < 1e-10 * ev.max()) == 7


def test_element_rejects_nonpositive():
    with pytest.raises(ValueError):
        elasticity_element_matrix(0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        maxwell_element_matrix(1.0, -1.0, 1.0)


# ------------------------------------------------------------------ assembly


@pytest.mark.parametrize("kind", ["elasticity", "maxwell"])
def test_assembly_matches_dense_oracle(kind):
    g = build_grid(2, 2)
    dm = build_dofmap(kind, g)
    rng = np.random.default_rng(3)
    coef = rng.uniform(0.5, 2.0, size=(g.num_cells, 2))
    A = assemble(dm, coef).toarray()
    ref = dense_assembly_oracle(kind, g.shape, g.h, coef)
    assert np.allclose(A, ref, atol=1e-12 * np.abs(ref).max())


def test_assembly_on_box_shape():
    dm = build_dofmap("elasticity", (4, 2, 2), 0.5)
    ref = dense_assembly_oracle("elasticity", (4, 2, 2), 0.5)
    assert np.allclose(assemble(dm).toarray(), ref, atol=1e-12)


@pytest.mark.parametrize("kind", ["elasticity", "maxwell"])
def test_assembled_matrix_spd(kind):
    g = build_grid(4, 2)
    dm = build_dofmap(kind, g)
    A = assemble(dm, jump_coefficient(g, "choice1", 1e5)).toarray()
    assert np.allclose(A, A.T, atol=0)
    assert np.linalg.eigvalsh(A).min() > 0


def test_bad_coefficients():
    dm = build_dofmap("maxwell", build_grid(2, 2))
    with pytest.raises(ValueError):
        assemble(dm, np.ones(5))
    with pytest.raises(ValueError):
        assemble(dm, -np.ones(dm.cell_dofs.shape[0]))


def test_rigid_body_kernel_global():
    g = build_grid(2, 4)
    dm = build_dofmap("elasticity", g)
    A = assemble(dm)
    R = rigid_body_modes(dm.lo[::3] * g.h)
    # rows whose stencil does not reach the eliminated boundary see the full kernel
    far = np.all((dm.lo >= 2) & (dm.hi <= g.N - 2), axis=1)
    res = np.abs((A @ R)[far]).max()
    assert res <= 1e-10 * spla.norm(A, np.inf)


def test_discrete_gradient_kernel_global():
    g = build_grid(2, 4)
    dm = build_dofmap("maxwell", g)
    A1 = assemble(dm, np.tile([1.0, 1.0], (g.num_cells, 1)))
    A2 = assemble(dm, np.tile([1.0, 2.0], (g.num_cells, 1)))
    K = 2 * A1 - A2  # curl-curl part
    rng = np.random.default_rng(0)
    N = g.N
    phi = np.zeros((N + 1,) * 3)
    phi[1:-1, 1:-1, 1:-1] = rng.standard_normal((N - 1,) * 3)
    # edge moment of grad(phi) = phi(end) - phi(start); arrays indexed [i, j, k]
    u = phi[tuple(dm.hi.T)] - phi[tuple(dm.lo.T)]
    assert np.abs(K @ u).max() <= 1e-10 * spla.norm(K, np.inf)
    assert np.abs(u).max() > 0.1


# ------------------------------------------------------------- coarse space


@pytest.mark.parametrize("kind", ["elasticity", "maxwell"])
@pytest.mark.parametrize("n,m", [(2, 2), (3, 2)])
def test_coarse_prolongation_matches_oracle(kind, n, m):
    g = build_grid(n, m)
    dm = build_dofmap(kind, g)
    P = coarse_prolongation(g, dm).toarray()
    assert np.allclose(P, coarse_basis_oracle(kind, n, m), atol=1e-14)


def test_coarse_operator_is_coarse_assembly():
    # nested spaces: the Galerkin product equals the matrix assembled on T_d
    for kind in ("elasticity", "maxwell"):
        g = build_grid(3, 2)
        dm = build_dofmap(kind, g)
        Ad = triple_product(coarse_prolongation(g, dm), assemble(dm)).toarray()
        ref = assemble(build_dofmap(kind, (3, 3, 3), 1 / 3)).toarray()
        assert np.allclose(Ad, ref, atol=1e-12 * np.abs(ref).max())


# ---------------------------------------------------------- manufactured loads


@pytest.mark.parametrize("name", ["elasticity-poly", "maxwell-mixed"])
def test_forcing_matches_finite_differences(name):
    sol = get_solution(name)
    rng = np.random.default_rng(1)
    x = rng.uniform(0.2, 0.8, size=(10, 3))
    eps = 1e-4

    def d(f, x, i, j):
        ei = np.eye(3)[i] * eps
        ej = np.eye(3)[j] * eps
        return (f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)) / (4 * eps**2)

    u = sol.exact
    gd = np.stack([sum(d(lambda y: u(y)[:, j], x, i, j) for j in range(3)) for i in range(3)], 1)
    lap = np.stack([sum(d(lambda y: u(y)[:, i], x, j, j) for j in range(3)) for i in range(3)], 1)
    if sol.kind == "elasticity":
        ref = -2 * gd - lap
    else:
        ref = gd - lap + u(x)
    assert np.allclose(sol.forcing(x), ref, rtol=0, atol=1e-6)


def test_unknown_solution():
    with pytest.raises(ValueError):
        get_solution("heat")


def _solve(kind, name, n, m):
    g = build_grid(n, m)
    dm = build_dofmap(kind, g)
    A = assemble(dm)
    b = assemble_rhs(dm, name)
    x = spla.spsolve(sp.csc_matrix(A), b)
    return dm, x


def test_elasticity_converges_second_order():
    sol = get_solution("elasticity-poly")
    errs = []
    for m in (2, 4):
        dm, x = _solve("elasticity", sol, 2, m)
        errs.append(l2_error(dm, x, sol.exact))
    assert errs[0] / errs[1] > 3.5
    dm, x = _solve("elasticity", sol, 2, 4)
    assert nodal_max_error(dm, x, sol.exact) < 5e-3


def test_maxwell_converges_first_order():
    sol = get_solution("maxwell-mixed")
    errs = []
    for m in (2, 4):
        dm, x = _solve("maxwell", sol, 2, m)
        errs.append(l2_error(dm, x, sol.exact))
    assert errs[0] / errs[1] > 1.8
