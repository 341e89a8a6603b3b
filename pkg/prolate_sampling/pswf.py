"""
One-dimensional prolate spheroidal wave functions by the Legendre-Galerkin
method.

psi_n(x; c) = sum_j B[j, n] Pbar_j(x), where the columns of B are eigenvectors
of the Sturm-Liouville operator -((1 - x^2) psi')' + c^2 x^2 psi written in the
normalized Legendre basis. The prolate eigenvalues lambda_n of the restricted
Fourier operator (F^c g)(x) = int_{-1}^{1} exp(i c x y) g(y) dy follow from
B[0, n] / psi_n(0) (even n) and B[1, n] / psi_n'(0) (odd n).
"""

import csv
import logging
import math
from dataclasses import dataclass, replace

import cachetools
import numpy as np
import scipy.linalg

from .quadrature import legendre_deriv, normalized_legendre_table
from .utils import format_float

LOGGER = logging.getLogger("prolate_sampling.pswf")

TRUNCATION_MARGIN = 30
DENOMINATOR_FLOOR = 1e-300

_BASIS_CACHE = cachetools.LRUCache(maxsize=16)


@dataclass(frozen=True, eq=False)
class PswfBasis:
    """The first N+1 PSWFs for bandwidth c.

    Attributes
    ----------
    bandwidth : float
        The bandwidth parameter c > 0.
    coeffs : np.ndarray
        Real matrix B of shape (N_t, N+1); column n holds the normalized
        Legendre coefficients of psi_n.
    chi : np.ndarray
        Sturm-Liouville eigenvalues, strictly increasing.
    lambdas : np.ndarray
        Complex prolate eigenvalues; real for even n, imaginary for odd n.
    """

    bandwidth: float
    coeffs: np.ndarray
    chi: np.ndarray
    lambdas: np.ndarray

    def __post_init__(self):
        for arr in (self.coeffs, self.chi, self.lambdas):
            arr.setflags(write=False)

    @property
    def count(self):
        return self.coeffs.shape[1]

    @property
    def truncation(self):
        return self.coeffs.shape[0]

    def _check_index(self, n):
        if not 0 <= n < self.count:
            raise ValueError(
                f"PSWF index {n} out of range: basis holds 0..{self.count - 1}"
            )


def assemble_galerkin(c, n_t):
    """Build the Sturm-Liouville matrix D in the normalized Legendre basis.

    Parameters
    ----------
    c : float
        Bandwidth.
    n_t : int
        Truncation of the Legendre series, >= 2.

    Returns
    -------
    D : np.ndarray
        Symmetric (n_t, n_t) matrix, non-zero only on the main diagonal and
        the diagonals at offset +/-2.
    """
    if n_t < 2:
        raise ValueError(f"Galerkin truncation must be >= 2, got {n_t}!")
    diag, off = _galerkin_bands(c, n_t)
    D = np.diag(diag)
    idx = np.arange(n_t - 2)
    D[idx, idx + 2] = off
    D[idx + 2, idx] = off
    return D


def _galerkin_bands(c, n_t):
    j = np.arange(n_t, dtype=float)
    c2 = c * c
    diag = j * (j + 1) + c2 * (2 * j * (j + 1) - 1) / ((2 * j + 3) * (2 * j - 1))
    j = j[:-2]
    off = c2 * (j + 1) * (j + 2) / ((2 * j + 3) * np.sqrt((2 * j + 1) * (2 * j + 5)))
    return diag, off


def _solve_parity_block(diag, off, parity, count):
    # D only couples indices of equal parity: every other entry forms a
    # symmetric tridiagonal block
    d = diag[parity::2]
    e = off[parity::2][: len(d) - 1]
    try:
        values, vectors = scipy.linalg.eigh_tridiagonal(d, e)
    except np.linalg.LinAlgError as err:
        raise RuntimeError(
            f"pswf: tridiagonal eigensolver failed for parity {parity}: {err}"
        ) from err
    return values[:count], vectors[:, :count]


def solve_pswf(c, n, n_t=None):
    """Compute the first n+1 PSWFs, their chi_n and lambda_n.

    Parameters
    ----------
    c : float
        Bandwidth, > 0.
    n : int
        Highest PSWF index N.
    n_t : int, optional
        Legendre truncation; must be >= 2N + 30. Defaults to 2N + 30.

    Returns
    -------
    basis : PswfBasis
        The basis. Each column of B is normalized and its largest-magnitude
        coefficient is positive.
    """
    if c <= 0:
        raise ValueError(f"Bandwidth must be positive, got c={c}!")
    if n < 0:
        raise ValueError(f"PSWF count index must be >= 0, got N={n}!")
    if n_t is None:
        n_t = 2 * n + TRUNCATION_MARGIN
    if n_t < 2 * n + TRUNCATION_MARGIN:
        raise ValueError(
            f"Legendre truncation N_t={n_t} too small: need N_t >= 2N+30 = "
            f"{2 * n + TRUNCATION_MARGIN}!"
        )

    key = (float(c), int(n), int(n_t))
    if key in _BASIS_CACHE:
        return _BASIS_CACHE[key]

    diag, off = _galerkin_bands(c, n_t)
    chi = np.empty(n + 1)
    coeffs = np.zeros((n_t, n + 1))
    for parity in (0, 1):
        count = (n - parity) // 2 + 1
        if count <= 0:
            continue
        values, vectors = _solve_parity_block(diag, off, parity, count)
        cols = np.arange(parity, n + 1, 2)
        chi[cols] = values
        coeffs[parity::2, cols] = vectors

    if np.any(np.diff(chi) <= 0):
        raise RuntimeError(f"pswf: chi_n not strictly increasing for c={c}")

    # sign convention: largest-magnitude coefficient positive
    pivots = np.argmax(np.abs(coeffs), axis=0)
    signs = np.sign(coeffs[pivots, np.arange(n + 1)])
    coeffs *= signs

    basis = PswfBasis(
        bandwidth=float(c),
        coeffs=coeffs,
        chi=chi,
        lambdas=np.zeros(n + 1, dtype=complex),
    )
    basis = replace(basis, lambdas=prolate_eigenvalues(basis))
    LOGGER.info(
        "solved PSWF basis c=%g N=%d N_t=%d (|lambda_N|=%.3e)",
        c,
        n,
        n_t,
        abs(basis.lambdas[-1]),
    )
    _BASIS_CACHE[key] = basis
    return basis


def pswf_eval_all(basis, x):
    """Evaluate every psi_n of `basis` at `x`.

    Returns
    -------
    values : np.ndarray
        Array of shape `np.shape(x) + (N+1,)`.
    """
    x = np.asarray(x, dtype=float)
    table = normalized_legendre_table(basis.truncation - 1, x)
    return np.moveaxis(np.tensordot(basis.coeffs, table, axes=(0, 0)), 0, -1)


def pswf_eval(basis, n, x):
    """Evaluate psi_n(x; c)."""
    basis._check_index(n)
    x = np.asarray(x, dtype=float)
    table = normalized_legendre_table(basis.truncation - 1, x)
    return np.tensordot(basis.coeffs[:, n], table, axes=(0, 0))[()]


def _normalized_legendre_deriv_at_zero(n_t):
    return np.array(
        [math.sqrt(j + 0.5) * legendre_deriv(j, 0.0) for j in range(n_t)]
    )


def pswf_deriv_at_zero(basis, n):
    """Return psi_n'(0; c)."""
    basis._check_index(n)
    return float(
        basis.coeffs[:, n] @ _normalized_legendre_deriv_at_zero(basis.truncation)
    )


def prolate_eigenvalues(basis):
    """Compute lambda_n for every function in `basis`.

    Uses lambda_n = sqrt(2) B[0, n] / psi_n(0) for even n and
    lambda_n = sqrt(2/3) i c B[1, n] / psi_n'(0) for odd n.
    """
    n_t, count = basis.coeffs.shape
    values_at_zero = normalized_legendre_table(n_t - 1, 0.0) @ basis.coeffs
    derivs_at_zero = _normalized_legendre_deriv_at_zero(n_t) @ basis.coeffs

    lambdas = np.empty(count, dtype=complex)
    for n in range(count):
        if n % 2 == 0:
            denom = values_at_zero[n]
            numer = math.sqrt(2.0) * basis.coeffs[0, n]
        else:
            denom = derivs_at_zero[n]
            numer = 1j * math.sqrt(2.0 / 3.0) * basis.bandwidth * basis.coeffs[1, n]
        if abs(denom) < DENOMINATOR_FLOOR:
            raise RuntimeError(
                f"pswf: vanishing denominator for lambda_{n} "
                f"(c={basis.bandwidth}); the basis is corrupted"
            )
        lambdas[n] = numer / denom
    return lambdas


def select_index_set(basis, threshold):
    """Return the leading indices whose |lambda_n| exceeds `threshold`.

    The set stops at the first index falling at or below the threshold.
    """
    above = np.abs(basis.lambdas) > threshold
    if not above[0]:
        return np.arange(0)
    count = int(np.argmin(above)) if not above.all() else len(above)
    if count == basis.count and basis.count > 1:
        LOGGER.warning(
            "every lambda_n of the basis (N=%d) exceeds %.3e; "
            "the index set may be truncated by the basis size",
            basis.count - 1,
            threshold,
        )
    return np.arange(count)


def lambda_asymptotic(n, c):
    """Leading-order decay law of |lambda_n(c)| for n >> c."""
    m = n + 0.5
    return math.exp(m * (math.log(math.e * c / 4.0) - math.log(m)))


def apply_fourier(values, x, rule, c):
    """Apply F^c to a function sampled at the nodes of `rule`.

    Parameters
    ----------
    values : array_like
        The function at `rule.nodes` (trailing axes are carried along).
    x : array_like
        Points where F^c g is evaluated.
    rule : QuadratureRule
        Rule on [-1, 1].
    c : float
        Bandwidth.
    """
    x = np.asarray(x, dtype=float)
    kernel = np.exp(1j * c * np.multiply.outer(x, rule.nodes))
    return np.tensordot(kernel * rule.weights, np.asarray(values), axes=(-1, 0))


def sturm_liouville_residual(basis, n, x):
    """Evaluate -((1-x^2) psi_n')' + c^2 x^2 psi_n - chi_n psi_n at `x`.

    The Legendre polynomials satisfy -((1-x^2) P_j')' = j(j+1) P_j, so only
    the multiplication by x^2 needs an explicit evaluation.
    """
    basis._check_index(n)
    x = np.asarray(x, dtype=float)
    n_t = basis.truncation
    table = normalized_legendre_table(n_t - 1, x)
    j = np.arange(n_t)
    b = basis.coeffs[:, n]
    operator_part = np.tensordot(j * (j + 1) * b, table, axes=(0, 0))
    psi = np.tensordot(b, table, axes=(0, 0))
    c2 = basis.bandwidth**2
    return operator_part + (c2 * x * x - basis.chi[n]) * psi


def write_eigenvalue_table(basis, path):
    """Dump (n, chi_n, Re lambda_n, Im lambda_n) as CSV."""
    with open(path, "w", newline="\n", encoding="utf-8") as fp:
        writer = csv.writer(fp, lineterminator="\n")
        writer.writerow(["n", "chi", "lambda_re", "lambda_im"])
        for n in range(basis.count):
            lam = basis.lambdas[n]
            writer.writerow(
                [
                    n,
                    format_float(basis.chi[n]),
                    format_float(lam.real),
                    format_float(lam.imag),
                ]
            )
    LOGGER.info("wrote eigenvalue table for c=%g to %s", basis.bandwidth, path)
