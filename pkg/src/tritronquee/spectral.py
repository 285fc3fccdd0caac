"""Chebyshev extreme-point grids, differentiation and integration operators."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ChebGrid:
    Nc: int
    xi_l: float
    xi_r: float
    nodes: np.ndarray

    @property
    def half_length(self) -> float:
        return 0.5 * (self.xi_r - self.xi_l)

    @property
    def reference(self) -> np.ndarray:
        """Nodes on ``[-1, 1]``, increasing."""
        return (self.nodes - self.xi_l) / self.half_length - 1.0


@dataclass(frozen=True)
class DiffOps:
    D1: np.ndarray
    D2: np.ndarray
    D3: np.ndarray
    D4: np.ndarray

    def __getitem__(self, k: int) -> np.ndarray:
        return (self.D1, self.D2, self.D3, self.D4)[k - 1]


def _reference_nodes(Nc: int) -> np.ndarray:
    # sin form keeps the nodes exactly symmetric about 0
    return np.sin(np.pi * np.arange(-Nc, Nc + 1, 2) / (2 * Nc))


def build_grid(Nc: int, xi_l: float, xi_r: float, min_nodes: int = 2) -> ChebGrid:
    """Extreme points ``-cos(j pi / Nc)``, ``j = 0..Nc``, mapped to ``[xi_l, xi_r]``.

    Parameters
    ----------
    Nc : int
        Polynomial degree; the grid has ``Nc + 1`` nodes.
    min_nodes : int
        Smallest accepted ``Nc``. The solver requires 8.
    """
    if Nc < min_nodes:
        raise ValueError(f"Nc must be at least {min_nodes}")
    if not xi_l < xi_r:
        raise ValueError("invalid interval: need xi_l < xi_r")
    x = _reference_nodes(Nc)
    h = 0.5 * (xi_r - xi_l)
    nodes = xi_l + (x + 1.0) * h
    nodes[0], nodes[-1] = xi_l, xi_r
    return ChebGrid(Nc, float(xi_l), float(xi_r), nodes)


def cheb_d1_reference(Nc: int) -> np.ndarray:
    """First-derivative matrix on the increasing reference nodes."""
    x = _reference_nodes(Nc)
    c = np.ones(Nc + 1)
    c[0] = c[-1] = 2.0
    c *= (-1.0) ** np.arange(Nc + 1)
    dx = x[:, None] - x[None, :]
    D = np.outer(c, 1.0 / c) / (dx + np.eye(Nc + 1))
    np.fill_diagonal(D, 0.0)
    # negative-sum trick: rows annihilate constants exactly
    np.fill_diagonal(D, -D.sum(axis=1))
    return D


def build_diff_ops(grid: ChebGrid) -> DiffOps:
    """``D1..D4`` including the chain-rule factors ``(1/h)^k``.

    Higher orders are matrix powers of ``D1`` with the diagonal reset so that
    every row sums to zero.
    """
    D1 = cheb_d1_reference(grid.Nc) / grid.half_length
    out = [D1]
    for _ in range(3):
        Dk = out[-1] @ D1
        np.fill_diagonal(Dk, 0.0)
        np.fill_diagonal(Dk, -Dk.sum(axis=1))
        out.append(Dk)
    return DiffOps(*out)


def values_to_coeffs(Nc: int) -> np.ndarray:
    """Matrix taking node values to Chebyshev coefficients (increasing nodes)."""
    th = np.pi - np.pi * np.arange(Nc + 1) / Nc
    k = np.arange(Nc + 1)
    T = np.cos(np.outer(th, k))
    w = np.ones(Nc + 1)
    w[0] = w[-1] = 0.5
    C = (2.0 / Nc) * (T * w[:, None]).T
    C[0] /= 2
    C[-1] /= 2
    return C


def build_integration_ops(grid: ChebGrid) -> tuple[np.ndarray, ...]:
    """Matrices ``I1..I4`` of repeated integration from the left end.

    ``(Ik v)_j = int_{xi_l}^{xi_j} (xi_j - s)^{k-1} / (k-1)! v(s) ds`` for the
    degree-``Nc`` interpolant of ``v``. Built exactly in coefficient space;
    the k-th matrix maps ``Nc+1`` values to ``Nc+1`` values and its result
    has degree ``Nc + k``.
    """
    Nc = grid.Nc
    th = np.pi - np.pi * np.arange(Nc + 1) / Nc
    h = grid.half_length
    cur = values_to_coeffs(Nc)
    mats = []
    for _ in range(4):
        n = cur.shape[0]
        new = np.zeros((n + 1, Nc + 1))
        new[1] += cur[0]
        if n > 1:
            new[2] += cur[1] / 4
        m = np.arange(2, n)
        new[m + 1] += cur[m] / (2 * (m + 1))[:, None]
        new[m - 1] -= cur[m] / (2 * (m - 1))[:, None]
        # fix the constant so the antiderivative vanishes at the left end
        sgn = (-1.0) ** np.arange(n + 1)
        new[0] -= sgn @ new
        new *= h
        cur = new
        T = np.cos(np.outer(th, np.arange(n + 1)))
        mats.append(T @ cur)
    return tuple(mats)


def barycentric_weights(Nc: int) -> np.ndarray:
    w = (-1.0) ** np.arange(Nc + 1)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def interpolate(grid: ChebGrid, values, xi_query):
    """Barycentric interpolation of node values (second kind formula).

    Returns node values exactly when a query coincides with a node.
    """
    values = np.asarray(values)
    q = np.atleast_1d(np.asarray(xi_query, dtype=float))
    tol = 1e-12 * (grid.xi_r - grid.xi_l)
    if np.any(q < grid.xi_l - tol) or np.any(q > grid.xi_r + tol):
        raise ValueError("query outside the interpolation interval")
    w = barycentric_weights(grid.Nc)
    diff = q[:, None] - grid.nodes[None, :]
    exact = diff == 0
    diff[exact] = 1.0
    k = w[None, :] / diff
    out = (k @ values) / k.sum(axis=1)
    rows, cols = np.nonzero(exact)
    out[rows] = values[cols]
    if np.ndim(xi_query) == 0:
        return out[0]
    return out
