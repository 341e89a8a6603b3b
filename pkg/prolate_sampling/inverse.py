"""
Regularized sampling indicators.

For a sampling point z the test function phi_z has PSWF coefficients
phi_l = lambda_l <E_z, psi_l>, E_z = 1_R / |R| with R = (z - eps, z + eps).
The regularized solution of A g = phi gives

    LSM:   I(z) = <S g, 1_R>^{-1}
    GLSM:  (|R| g^H A g)^{-1}
    FM:    sum_n |<phi, zeta_n>|^2 / mu_n

and, for a contrast shifted by a known background, the differential
indicator <S g_tilde, 1_R>^{-1} - <S g_inf, 1_R>^{-1}.
"""

import enum
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import tqdm

from .pswf import pswf_eval_all

LOGGER = logging.getLogger("prolate_sampling.inverse")

# smallest admissible cutoff on mu^2 for noiseless matrices
NOISELESS_FLOOR = 1e-13


class FilterKind(str, enum.Enum):
    CUTOFF = "cutoff"
    TIKHONOV = "tikhonov"


@dataclass(frozen=True)
class RegularizationFilter:
    """A filter f_alpha with |x f_alpha(x)| <= 1, applied to x = mu^2.

    Attributes
    ----------
    kind : FilterKind
        `cutoff` keeps 1/x for x >= alpha, `tikhonov` is 1/(x + alpha).
    alpha : float
        Regularization parameter, > 0.
    """

    kind: FilterKind
    alpha: float

    def __post_init__(self):
        object.__setattr__(self, "kind", FilterKind(self.kind))
        if not self.alpha > 0:
            raise ValueError(
                f"Regularization parameter must be positive, got alpha={self.alpha}!"
            )

    @classmethod
    def spectral_cutoff(cls, alpha):
        return cls(FilterKind.CUTOFF, alpha)

    @classmethod
    def tikhonov(cls, alpha):
        return cls(FilterKind.TIKHONOV, alpha)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind is FilterKind.TIKHONOV:
            return 1.0 / (x + self.alpha)
        keep = x >= self.alpha
        return np.where(keep, 1.0 / np.where(keep, x, 1.0), 0.0)

    def retained(self, mu):
        """Number of leading modes with mu_n > 0 the filter keeps."""
        mu = np.asarray(mu)
        positive = mu > 0
        if self.kind is FilterKind.TIKHONOV:
            return int(np.sum(positive))
        return int(np.sum(positive & (mu * mu >= self.alpha)))


def default_filter(matrix, kind="cutoff", alpha=None, from_noise=False):
    """Pick the filter for `matrix`.

    Noise is handled by the choice of J, so alpha defaults to the floor 1e-13
    for noisy and noiseless matrices alike. With `from_noise` a noisy matrix
    is cut at alpha = (delta ||A||_2)^2, the squared size of the perturbation.
    A user alpha is never taken below the floor.
    """
    if alpha is None:
        if from_noise and matrix.noise_level > 0:
            alpha = (matrix.noise_level * matrix.spectral_norm()) ** 2
        else:
            alpha = NOISELESS_FLOOR
    alpha = max(NOISELESS_FLOOR, alpha)
    filt = RegularizationFilter(kind, alpha)
    LOGGER.info("using %s filter with alpha=%.3e", filt.kind.value, filt.alpha)
    return filt


@dataclass(frozen=True)
class ProbeRegion:
    """The interval R(z, eps) = (z - eps, z + eps) inside (-1, 1)."""

    z: float
    epsilon: float

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"Probe half-width must be positive, got {self.epsilon}!")
        if self.z - self.epsilon < -1 or self.z + self.epsilon > 1:
            raise ValueError(
                f"Probe region ({self.z - self.epsilon}, {self.z + self.epsilon}) "
                "leaves (-1, 1)!"
            )

    @property
    def interval(self):
        return (self.z - self.epsilon, self.z + self.epsilon)

    @property
    def length(self):
        return 2.0 * self.epsilon


@dataclass(frozen=True)
class Reciprocal:
    """The reciprocal of an indicator denominator.

    An exactly zero denominator is flagged with `is_infinite` instead of
    raising; a NaN one is a numerical failure and raises RuntimeError.
    """

    value: float
    is_infinite: bool = False

    @classmethod
    def of(cls, denominator):
        denominator = float(denominator)
        if math.isnan(denominator):
            raise RuntimeError("inverse: indicator denominator is NaN")
        if denominator == 0:
            return cls(math.inf, True)
        return cls(1.0 / denominator)

    def __sub__(self, other):
        if self.is_infinite or other.is_infinite:
            return Reciprocal(math.inf, True)
        return Reciprocal(self.value - other.value)

    def __float__(self):
        return self.value


def _region_integrals(region, basis, index_set, rule):
    # int_R psi_j for j in J
    nodes, weights = rule.mapped(*region.interval)
    return weights @ pswf_eval_all(basis, nodes)[:, index_set]


def phi_coeffs(region, basis, index_set, rule):
    """Return phi_l = lambda_l <E_z, psi_l> for l in `index_set`."""
    index_set = np.asarray(index_set, dtype=int)
    averages = _region_integrals(region, basis, index_set, rule) / region.length
    return basis.lambdas[index_set] * averages


def regularized_solve(matrix, phi, filt):
    """Return g = sum_n f(mu_n^2) mu_n <phi, zeta_n> zeta_n.

    Modes with mu_n <= 0 are discarded.
    """
    phi = np.asarray(phi)
    if phi.shape != (matrix.dim,):
        raise ValueError(
            f"Right-hand side has shape {phi.shape}, expected ({matrix.dim},)!"
        )
    mu = matrix.eigenvalues
    zeta = matrix.eigenvectors
    positive = mu > 0
    gains = np.zeros_like(mu)
    gains[positive] = filt(mu[positive] ** 2) * mu[positive]
    return zeta @ (gains * (zeta.conj().T @ phi))


def lsm_indicator(g, basis, index_set, region, rule):
    """Return <S g, 1_R> and its reciprocal I(z).

    <S g, 1_R> = sum_j conj(lambda_j) g_j int_R psi_j.
    """
    index_set = np.asarray(index_set, dtype=int)
    integrals = _region_integrals(region, basis, index_set, rule)
    raw = complex(np.sum(np.conj(basis.lambdas[index_set]) * g * integrals))
    return raw, Reciprocal.of(raw.real)


def glsm_indicator(g, matrix, region):
    """Return (|R| g^H A g)^{-1}."""
    energy = np.vdot(g, matrix.entries @ g).real
    return Reciprocal.of(region.length * energy)


def fm_partial_sum(matrix, phi, n_terms=None):
    """Return sum_{n < n_terms} |<phi, zeta_n>|^2 / mu_n over positive mu_n."""
    if n_terms is None:
        n_terms = matrix.dim
    if not 0 <= n_terms <= matrix.dim:
        raise ValueError(f"n_terms must lie in 0..{matrix.dim}, got {n_terms}!")
    mu = matrix.eigenvalues[:n_terms]
    coeffs = matrix.eigenvectors[:, :n_terms].conj().T @ np.asarray(phi)
    positive = mu > 0
    return float(np.sum(np.abs(coeffs[positive]) ** 2 / mu[positive]))


def differential_indicator(a_tilde, a_inf, region, basis, index_set, filt, rule):
    """Return <S g_tilde, 1_R>^{-1} - <S g_inf, 1_R>^{-1}.

    g_tilde and g_inf solve the regularized equations for the shifted and the
    background matrix with the same right-hand side.
    """
    if a_tilde.dim != a_inf.dim or a_tilde.c != a_inf.c:
        raise ValueError(
            "Shifted and background matrices must share c and J: got "
            f"(c={a_tilde.c}, dim={a_tilde.dim}) and (c={a_inf.c}, dim={a_inf.dim})!"
        )
    phi = phi_coeffs(region, basis, index_set, rule)
    _, i_tilde = lsm_indicator(
        regularized_solve(a_tilde, phi, filt), basis, index_set, region, rule
    )
    _, i_inf = lsm_indicator(
        regularized_solve(a_inf, phi, filt), basis, index_set, region, rule
    )
    return i_tilde - i_inf


def q_avg_reference(profile, region, rule):
    """Return the harmonic average (<1/q, E_z>)^{-1}.

    Returns None unless q > 0 at every quadrature node of R(z, eps).
    """
    total = 0.0
    for lo, hi in profile.smooth_intervals(*region.interval):
        nodes, weights = rule.mapped(lo, hi)
        q = profile.values_on(lo, hi, nodes)
        if np.any(q <= 0):
            return None
        total += np.sum(weights / q)
    return float(region.length / total)


@dataclass(frozen=True)
class ScanRecord:
    z: float
    raw_lsm: complex
    i_lsm: Reciprocal
    i_glsm: Reciprocal
    fm_sum: float
    i_diff: Reciprocal | None = None
    q_avg_ref: float | None = None
    q_exact: float | None = None


@dataclass(frozen=True)
class ScanResult:
    """Per-z indicator records in grid order."""

    records: tuple = ()
    n_terms: int = 0

    def __len__(self):
        return len(self.records)

    @property
    def zs(self):
        return np.array([rec.z for rec in self.records])

    def column(self, name):
        """Return a field as a float array; inf for sentinels, nan for missing."""
        out = []
        for rec in self.records:
            value = getattr(rec, name)
            if value is None:
                out.append(math.nan)
            elif isinstance(value, Reciprocal):
                out.append(value.value)
            else:
                out.append(value)
        return np.array(out)


def scan(
    zs,
    epsilon,
    matrix,
    basis,
    index_set,
    filt,
    rule,
    profile=None,
    background=None,
    background_profile=None,
    workers=1,
    progress=False,
):
    """Evaluate every indicator over a grid of sampling points.

    Parameters
    ----------
    zs : array_like
        Sampling points.
    epsilon : float
        Probe half-width.
    matrix : DataMatrix
        The (possibly noisy) data matrix; the shifted matrix A_tilde when a
        `background` is given.
    basis : PswfBasis
        PSWF basis the matrix is expressed in.
    index_set : array_like of int
        The index set J of `matrix`.
    filt : RegularizationFilter
        Regularization filter.
    rule : QuadratureRule
        Rule for the probe-region integrals.
    profile : ContrastProfile, optional
        The contrast q, used for the exact and reference columns.
    background : DataMatrix, optional
        The background matrix A_inf; enables the differential indicator.
    background_profile : ContrastProfile, optional
        The background contrast q_inf 1_D. With a background, the reference
        column holds the harmonic average of q_inf 1_D + q minus that of the
        background.
    workers : int
        Threads used over z.
    progress : bool
        Show a progress bar.

    Returns
    -------
    result : ScanResult
    """
    zs = [float(z) for z in np.atleast_1d(np.asarray(zs, dtype=float))]
    bad = [z for z in zs if z - epsilon < -1 or z + epsilon > 1]
    if bad:
        raise ValueError(
            f"Probe regions of half-width {epsilon} leave (-1, 1) at z = {bad}!"
        )
    index_set = np.asarray(index_set, dtype=int)
    if len(index_set) != matrix.dim:
        raise ValueError(
            f"Index set of size {len(index_set)} does not match dim {matrix.dim}!"
        )
    n_terms = filt.retained(matrix.eigenvalues)

    shifted = None
    if profile is not None and background_profile is not None:
        shifted = profile + background_profile

    def _reference(region):
        if profile is None:
            return None
        if shifted is None:
            return q_avg_reference(profile, region, rule)
        total = q_avg_reference(shifted, region, rule)
        base = q_avg_reference(background_profile, region, rule)
        if total is None or base is None:
            return None
        return total - base

    def _scan_point(z):
        region = ProbeRegion(z, epsilon)
        phi = phi_coeffs(region, basis, index_set, rule)
        g = regularized_solve(matrix, phi, filt)
        raw, i_lsm = lsm_indicator(g, basis, index_set, region, rule)
        i_diff = None
        if background is not None:
            _, i_inf = lsm_indicator(
                regularized_solve(background, phi, filt),
                basis,
                index_set,
                region,
                rule,
            )
            i_diff = i_lsm - i_inf
        return ScanRecord(
            z=z,
            raw_lsm=raw,
            i_lsm=i_lsm,
            i_glsm=glsm_indicator(g, matrix, region),
            fm_sum=fm_partial_sum(matrix, phi, n_terms),
            i_diff=i_diff,
            q_avg_ref=_reference(region),
            q_exact=None if profile is None else float(profile.evaluate(z)),
        )

    LOGGER.info(
        "scanning %d sampling points (eps=%g, %d retained modes)",
        len(zs),
        epsilon,
        n_terms,
    )
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(
                tqdm.tqdm(
                    pool.map(_scan_point, zs), total=len(zs), disable=not progress
                )
            )
    else:
        records = [_scan_point(z) for z in tqdm.tqdm(zs, disable=not progress)]
    return ScanResult(records=tuple(records), n_terms=n_terms)
