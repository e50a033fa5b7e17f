"""Legendre-Gauss-Lobatto operators for nodal spectral element methods.

Provides LGL nodes and quadrature weights, the collocation derivative
matrix, the SBP matrices Q and B, and Legendre Vandermonde matrices for
nodal/modal transforms.
"""

from dataclasses import dataclass, field

import numpy as np

MAX_NEWTON_ITER = 100
NEWTON_TOL = 4.0 * np.finfo(float).eps


class OperatorError(Exception):
    """Raised when operator construction fails to converge."""


def legendre_and_derivative(n: int, x):
    """Evaluate P_n and P_n' at points x via the three-term recurrence.

    Parameters
    ----------
    n : int
        Polynomial degree.
    x : array_like
        Evaluation points in [-1, 1].

    Returns
    -------
    (P, dP) : tuple of ndarray
    """
    x0 = np.asarray(x, dtype=float)
    scalar = x0.ndim == 0
    x = np.atleast_1d(x0)
    if n == 0:
        p, dp = np.ones_like(x), np.zeros_like(x)
    else:
        p_prev = np.ones_like(x)
        p = x.copy()
        for k in range(2, n + 1):
            p_prev, p = p, ((2 * k - 1) * x * p - (k - 1) * p_prev) / k
        endp = np.abs(np.abs(x) - 1.0) < 1e-13
        denom = np.where(endp, 1.0, x * x - 1.0)
        dp = n * (x * p - p_prev) / denom
        # endpoint values from the closed form P'_N(+-1)
        sgn = np.where(x > 0, 1.0, -1.0)
        dp = np.where(endp, sgn ** (n - 1) * 0.5 * n * (n + 1), dp)
    if scalar:
        return p[0], dp[0]
    return p, dp


def lgl_nodes_weights(n_deg: int):
    """Compute LGL nodes and weights for polynomial degree ``n_deg``.

    Interior nodes are the roots of (1 - x^2) P'_N(x), found with Newton
    iterations started from Chebyshev-Lobatto points, which bracket the
    roots monotonically. Raises OperatorError if Newton fails to settle
    within MAX_NEWTON_ITER iterations.
    """
    n = int(n_deg)
    if n < 1:
        raise OperatorError("polynomial degree must be at least 1")
    nodes = np.empty(n + 1)
    nodes[0], nodes[-1] = -1.0, 1.0
    for k in range(1, n):
        x = -np.cos(np.pi * k / n)
        converged = False
        for _ in range(MAX_NEWTON_ITER):
            # q = P'_N, q' from the Legendre ODE:
            # (1-x^2) P''_N = 2x P'_N - N(N+1) P_N
            p, dp = legendre_and_derivative(n, x)
            d2p = (2.0 * x * dp - n * (n + 1) * p) / (1.0 - x * x)
            dx = dp / d2p
            x -= dx
            if abs(dx) <= NEWTON_TOL:
                converged = True
                break
        if not converged:
            raise OperatorError(f"LGL Newton iteration stalled at root {k} for N={n}")
        nodes[k] = x
    p, _ = legendre_and_derivative(n, nodes)
    weights = 2.0 / (n * (n + 1) * p * p)
    return nodes, weights


def derivative_matrix(nodes):
    """Polynomial collocation derivative matrix via barycentric weights."""
    x = np.asarray(nodes, dtype=float)
    npts = x.size
    lam = np.ones(npts)
    for j in range(npts):
        for i in range(npts):
            if i != j:
                lam[j] /= x[j] - x[i]
    d = np.zeros((npts, npts))
    for i in range(npts):
        for j in range(npts):
            if i != j:
                d[i, j] = (lam[j] / lam[i]) / (x[i] - x[j])
        d[i, i] = -np.sum(d[i, :])
    return d


def legendre_vandermonde(nodes):
    """Orthonormal Legendre Vandermonde V[i, j] = sqrt((2j+1)/2) P_j(x_i)."""
    x = np.asarray(nodes, dtype=float)
    npts = x.size
    v = np.empty((npts, npts))
    for j in range(npts):
        pj, _ = legendre_and_derivative(j, x)
        v[:, j] = np.sqrt((2 * j + 1) / 2.0) * pj
    return v


@dataclass
class LGLOperators:
    """Degree-N LGL operator bundle.

    Attributes
    ----------
    N : polynomial degree
    nodes : (N+1,) LGL nodes on [-1, 1]
    weights : (N+1,) quadrature weights, sum to 2
    D : (N+1, N+1) derivative matrix
    Q : M D with M = diag(weights); satisfies Q + Q^T = B
    B : diag(-1, 0, ..., 0, 1)
    V : orthonormal Legendre Vandermonde
    to_modal : inverse Vandermonde, maps nodal values to modal coefficients
    """

    N: int
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    D: np.ndarray = field(repr=False)
    Q: np.ndarray = field(repr=False)
    B: np.ndarray = field(repr=False)
    V: np.ndarray = field(repr=False)
    to_modal: np.ndarray = field(repr=False)


def build_lgl(n_deg: int) -> LGLOperators:
    """Build the LGL operator bundle for polynomial degree ``n_deg``."""
    if not 1 <= n_deg <= 30:
        raise OperatorError("supported degree range is 1..30")
    nodes, weights = lgl_nodes_weights(n_deg)
    d = derivative_matrix(nodes)
    q = np.diag(weights) @ d
    b = np.zeros((n_deg + 1, n_deg + 1))
    b[0, 0], b[-1, -1] = -1.0, 1.0
    v = legendre_vandermonde(nodes)
    return LGLOperators(
        N=n_deg,
        nodes=nodes,
        weights=weights,
        D=d,
        Q=q,
        B=b,
        V=v,
        to_modal=np.linalg.inv(v),
    )
