"""Element matrices on an axis-aligned cube of side ``h``.

Local numbering follows :mod:`substruct.dofmap`: corner ``a + 2b + 4c`` sits
at ``(a, b, c) * h`` with dofs interleaved by component; the twelve edges are
ordered x-edges, y-edges, z-edges, each group by its two transverse offsets
(first transverse axis fastest).
"""
from __future__ import annotations

import numpy as np

from .dofmap import EDGE_LOCAL, _CORNERS

__all__ = [
    "gauss_points",
    "trilinear_basis",
    "edge_basis",
    "elasticity_element_parts",
    "maxwell_element_parts",
    "elasticity_element_matrix",
    "maxwell_element_matrix",
]


def gauss_points(order: int):
    """Tensor Gauss rule on the unit cube: ``(points (q, 3), weights (q,))``."""
    x, w = np.polynomial.legendre.leggauss(order)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    Z, Y, X = np.meshgrid(x, x, x, indexing="ij")
    WZ, WY, WX = np.meshgrid(w, w, w, indexing="ij")
    pts = np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1)
    return pts, (WX * WY * WZ).ravel()


def _psi(t, a):
    return t if a else 1.0 - t


def _dpsi(a):
    return 1.0 if a else -1.0


def trilinear_basis(xi: np.ndarray, h: float):
    """Values ``(q, 8)`` and physical gradients ``(q, 8, 3)`` at reference points."""
    q = xi.shape[0]
    val = np.empty((q, 8))
    grad = np.empty((q, 8, 3))
    for loc, (a, b, c) in enumerate(_CORNERS):
        px, py, pz = _psi(xi[:, 0], a), _psi(xi[:, 1], b), _psi(xi[:, 2], c)
        val[:, loc] = px * py * pz
        grad[:, loc, 0] = _dpsi(a) * py * pz / h
        grad[:, loc, 1] = px * _dpsi(b) * pz / h
        grad[:, loc, 2] = px * py * _dpsi(c) / h
    return val, grad


def edge_basis(xi: np.ndarray, h: float):
    """Lowest-order edge functions with unit tangential moment.

    Returns values ``(q, 12, 3)`` and curls ``(q, 12, 3)``.
    """
    q = xi.shape[0]
    val = np.zeros((q, 12, 3))
    curl = np.zeros((q, 12, 3))
    for loc, (axis, off) in enumerate(EDGE_LOCAL):
        s, t = [ax for ax in range(3) if ax != axis]
        ps = _psi(xi[:, s], off[s])
        pt = _psi(xi[:, t], off[t])
        val[:, loc, axis] = ps * pt / h
        # gradient of the scalar factor f = ps*pt/h
        g = np.zeros((q, 3))
        g[:, s] = _dpsi(off[s]) * pt / h**2
        g[:, t] = ps * _dpsi(off[t]) / h**2
        # curl(f e_axis) = grad f x e_axis
        e = np.zeros(3)
        e[axis] = 1.0
        curl[:, loc, :] = np.cross(g, e)
    return val, curl


def _strain_matrix(grad):
    """Voigt strain-displacement matrices ``(q, 6, 24)``."""
    q = grad.shape[0]
    B = np.zeros((q, 6, 24))
    for loc in range(8):
        gx, gy, gz = grad[:, loc, 0], grad[:, loc, 1], grad[:, loc, 2]
        c = 3 * loc
        B[:, 0, c] = gx
        B[:, 1, c + 1] = gy
        B[:, 2, c + 2] = gz
        B[:, 3, c] = gy
        B[:, 3, c + 1] = gx
        B[:, 4, c + 1] = gz
        B[:, 4, c + 2] = gy
        B[:, 5, c] = gz
        B[:, 5, c + 2] = gx
    return B


def _sym(K):
    return 0.5 * (K + K.T)


def elasticity_element_parts(h: float, order: int = 2):
    """Return ``(K_lambda, K_mu)`` so that ``K = lambda*K_lambda + mu*K_mu``."""
    xi, w = gauss_points(order)
    w = w * h**3
    _, grad = trilinear_basis(xi, h)
    B = _strain_matrix(grad)
    Dl = np.zeros((6, 6))
    Dl[:3, :3] = 1.0
    Dm = np.diag([2.0, 2.0, 2.0, 1.0, 1.0, 1.0])
    Kl = np.einsum("q,qia,ij,qjb->ab", w, B, Dl, B)
    Km = np.einsum("q,qia,ij,qjb->ab", w, B, Dm, B)
    return _sym(Kl), _sym(Km)


def maxwell_element_parts(h: float, order: int = 2):
    """Return ``(K_curl, K_mass)`` so that ``K = alpha*K_curl + beta*K_mass``."""
    xi, w = gauss_points(order)
    w = w * h**3
    val, curl = edge_basis(xi, h)
    Kc = np.einsum("q,qai,qbi->ab", w, curl, curl)
    Km = np.einsum("q,qai,qbi->ab", w, val, val)
    return _sym(Kc), _sym(Km)


def _check_positive(*vals):
    for v in vals:
        if not v > 0:
            raise ValueError(f"coefficients must be positive, got {v}")


def elasticity_element_matrix(lam: float, mu: float, h: float) -> np.ndarray:
    """24x24 stiffness of ``2 mu eps:eps + lam div div`` on a cube of side ``h``."""
    _check_positive(lam, mu, h)
    Kl, Km = elasticity_element_parts(h)
    return lam * Kl + mu * Km


def maxwell_element_matrix(alpha: float, beta: float, h: float) -> np.ndarray:
    """12x12 matrix of ``alpha curl.curl + beta u.v`` on a cube of side ``h``."""
    _check_positive(alpha, beta, h)
    Kc, Km = maxwell_element_parts(h)
    return alpha * Kc + beta * Km
