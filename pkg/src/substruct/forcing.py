"""Manufactured solutions with closed-form right-hand sides.

Every solution component is a product ``g(x) g(y) g(z)`` of one 1D factor,
so all derivatives reduce to products of 1D derivatives.  The strong
operators are

* elasticity (``lam = mu = 1`` unless given):
  ``f = -(lam + mu) grad div u - mu laplace u``
* Maxwell (``alpha = beta = 1``): ``f = curl curl u + u = grad div u - laplace u + u``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = ["Factor1D", "ManufacturedSolution", "get_solution", "SOLUTIONS"]


@dataclass(frozen=True)
class Factor1D:
    """A smooth 1D function given with its first two derivatives."""

    name: str
    derivs: tuple[Callable, Callable, Callable]

    def __call__(self, t, k: int = 0):
        return self.derivs[k](t)


POLY = Factor1D("t(t-1)", (lambda t: t * t - t, lambda t: 2 * t - 1, lambda t: np.full_like(t, 2.0)))
SINE = Factor1D(
    "sin(pi t)",
    (
        lambda t: np.sin(np.pi * t),
        lambda t: np.pi * np.cos(np.pi * t),
        lambda t: -np.pi**2 * np.sin(np.pi * t),
    ),
)
EXPO = Factor1D(
    "(1-e^t)(1-e^(t-1))",
    (
        lambda t: (1 - np.exp(t)) * (1 - np.exp(t - 1)),
        lambda t: -np.exp(t) - np.exp(t - 1) + 2 * np.exp(2 * t - 1),
        lambda t: -np.exp(t) - np.exp(t - 1) + 4 * np.exp(2 * t - 1),
    ),
)


def _deriv(factor: Factor1D, x: np.ndarray, orders) -> np.ndarray:
    """Mixed partial of ``g(x0) g(x1) g(x2)`` with per-axis derivative orders."""
    out = factor(x[:, 0], orders[0])
    for a in (1, 2):
        out = out * factor(x[:, a], orders[a])
    return out


@dataclass(frozen=True)
class ManufacturedSolution:
    """Vector solution ``u_i = g_i(x) g_i(y) g_i(z)`` and its load ``f``.

    Attributes
    ----------
    kind : str
        Operator family, ``"elasticity"`` or ``"maxwell"``.
    factors : tuple
        The 1D factor of each component.
    """

    name: str
    kind: str
    factors: tuple[Factor1D, Factor1D, Factor1D]
    lam: float = 1.0
    mu: float = 1.0

    def exact(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.stack([_deriv(g, x, (0, 0, 0)) for g in self.factors], axis=1)

    def _grad_div(self, x, i):
        out = 0.0
        for j, g in enumerate(self.factors):
            o = [0, 0, 0]
            o[i] += 1
            o[j] += 1
            out = out + _deriv(g, x, o)
        return out

    def _laplace(self, x, i):
        g = self.factors[i]
        return sum(_deriv(g, x, tuple(2 if a == j else 0 for a in range(3))) for j in range(3))

    def forcing(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        u = self.exact(x)
        cols = []
        for i in range(3):
            gd = self._grad_div(x, i)
            lap = self._laplace(x, i)
            if self.kind == "elasticity":
                cols.append(-(self.lam + self.mu) * gd - self.mu * lap)
            else:
                cols.append(gd - lap + u[:, i])
        return np.stack(cols, axis=1)

    __call__ = forcing


SOLUTIONS = {
    "elasticity-poly": ManufacturedSolution("elasticity-poly", "elasticity", (POLY, POLY, POLY)),
    "maxwell-mixed": ManufacturedSolution("maxwell-mixed", "maxwell", (POLY, SINE, EXPO)),
}


def get_solution(name: str) -> ManufacturedSolution:
    """Look up a manufactured solution by name."""
    try:
        return SOLUTIONS[name]
    except KeyError:
        raise ValueError(f"unknown manufactured solution {name!r}; "
                         f"choose from {sorted(SOLUTIONS)}") from None
