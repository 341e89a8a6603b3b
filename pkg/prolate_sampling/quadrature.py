"""
Legendre polynomials and the Legendre-Gauss-Lobatto (LGL) quadrature rule.

Every integral in the package goes through an LGL rule mapped onto the
interval of integration.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

LOGGER = logging.getLogger("prolate_sampling.quadrature")

NEWTON_TOL = 1e-13
NEWTON_MAX_STEPS = 100


def legendre_table(n_max, x):
    """Evaluate P_0, ..., P_{n_max} at `x` with the three-term recurrence.

    Parameters
    ----------
    n_max : int
        Highest degree, >= 0.
    x : float or array_like
        Evaluation points.

    Returns
    -------
    table : np.ndarray
        Array of shape `(n_max + 1,) + np.shape(x)`; row n holds P_n(x).
    """
    if n_max < 0:
        raise ValueError(f"Legendre degree must be >= 0, got {n_max}!")
    x = np.asarray(x, dtype=float)
    table = np.empty((n_max + 1,) + x.shape)
    table[0] = 1.0
    if n_max >= 1:
        table[1] = x
    for n in range(1, n_max):
        table[n + 1] = ((2 * n + 1) * x * table[n] - n * table[n - 1]) / (n + 1)
    return table


def normalized_legendre_table(n_max, x):
    """Same as `legendre_table` scaled to unit L2 norm on [-1, 1]."""
    table = legendre_table(n_max, x)
    scale = np.sqrt(np.arange(n_max + 1) + 0.5)
    return table * scale.reshape((-1,) + (1,) * (table.ndim - 1))


def legendre_eval(n, x):
    """Return P_n(x)."""
    return legendre_table(n, x)[n][()]


def legendre_deriv(n, x):
    """Return P'_n(x) from P'_{k+1} = P'_{k-1} + (2k+1) P_k."""
    if n < 0:
        raise ValueError(f"Legendre degree must be >= 0, got {n}!")
    x = np.asarray(x, dtype=float)
    if n == 0:
        return np.zeros_like(x)[()]
    table = legendre_table(n, x)
    prev = np.zeros_like(x)  # P'_{k-1}
    curr = np.ones_like(x)  # P'_k, starting at k=1
    for k in range(1, n):
        prev, curr = curr, prev + (2 * k + 1) * table[k]
    return curr[()]


def normalized_legendre(n, x):
    """Return P_n(x) * sqrt(n + 1/2)."""
    return (legendre_eval(n, x) * np.sqrt(n + 0.5))[()]


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """An LGL rule on the reference interval [-1, 1].

    Attributes
    ----------
    nodes : np.ndarray
        Strictly increasing nodes with nodes[0] = -1 and nodes[-1] = 1.
    weights : np.ndarray
        Positive weights summing to 2.
    """

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def order(self):
        return len(self.nodes)

    @property
    def exactness(self):
        return 2 * self.order - 3

    def mapped(self, a, b):
        """Return the nodes and weights of the rule affinely mapped to [a, b]."""
        if not a < b:
            raise ValueError(f"Degenerate interval [{a}, {b}]: need a < b!")
        half = 0.5 * (b - a)
        return half * self.nodes + 0.5 * (a + b), half * self.weights


@lru_cache(maxsize=32)
def lgl_rule(n_q):
    """Build the LGL rule with `n_q` nodes.

    The interior nodes are the zeros of P'_{n_q-1}, found by Newton's method
    seeded at the Chebyshev-Gauss-Lobatto points. The weights are
    2 / (n_q (n_q - 1) P_{n_q-1}(x_j)^2).

    Parameters
    ----------
    n_q : int
        Number of nodes, >= 2.

    Returns
    -------
    rule : QuadratureRule
        The rule; exact for polynomials of degree <= 2 n_q - 3.
    """
    if n_q < 2:
        raise ValueError(f"An LGL rule needs at least 2 nodes, got {n_q}!")

    n = n_q - 1
    nodes = -np.cos(np.pi * np.arange(n_q) / n)
    nodes[0], nodes[-1] = -1.0, 1.0

    if n_q > 2:
        x = nodes[1:-1].copy()
        step = np.full_like(x, np.inf)
        for _ in range(NEWTON_MAX_STEPS):
            p_n = legendre_eval(n, x)
            dp_n = legendre_deriv(n, x)
            # Legendre ODE: (1 - x^2) P'' = 2x P' - n(n+1) P
            ddp_n = (2.0 * x * dp_n - n * (n + 1) * p_n) / (1.0 - x * x)
            step = dp_n / ddp_n
            x = x - step
            if np.max(np.abs(step)) < NEWTON_TOL:
                break
        else:
            raise RuntimeError(
                f"LGL node search did not converge for n_q={n_q} "
                f"(last step {np.max(np.abs(step)):.3e})"
            )
        nodes[1:-1] = np.sort(x)
        # exact symmetry about the origin
        nodes = 0.5 * (nodes - nodes[::-1])

    weights = 2.0 / (n_q * n * legendre_eval(n, nodes) ** 2)
    LOGGER.debug("built LGL rule with %d nodes", n_q)
    return QuadratureRule(nodes=nodes, weights=weights)


def integrate(f, interval, rule):
    """Integrate `f` over `interval` with `rule` mapped onto it.

    Parameters
    ----------
    f : callable
        Vectorised integrand, real or complex valued.
    interval : tuple of float
        The interval (a, b) with a < b.
    rule : QuadratureRule
        Reference rule.

    Returns
    -------
    value : complex or float
        The quadrature sum (b - a)/2 * sum_j w_j f(x_j).
    """
    a, b = interval
    nodes, weights = rule.mapped(a, b)
    return np.sum(weights * f(nodes))[()]
