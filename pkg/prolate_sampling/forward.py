"""
Synthetic data and the Galerkin matrix of the data operator

    (N g)(t) = int_{-1}^{1} u((t - s) / 2) g(s) ds,
    u(t) = int exp(i 2 c t y) q(y) dy,

in the PSWF basis. Entry (j, l) of a data matrix is <N psi_l, psi_j>, which
factorizes as lambda_j conj(lambda_l) int q psi_j psi_l.
"""

import json
import logging
import os
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .profiles import ContrastProfile, Piece
from .pswf import pswf_eval_all

LOGGER = logging.getLogger("prolate_sampling.forward")


def forward_data(profile, c, t):
    """Return u(t) = int exp(i 2 c t y) q(y) dy in closed form."""
    t = np.asarray(t, dtype=float)
    return profile.fourier(2.0 * c * t)


def _kernel(profile, c, nodes):
    # K[a, b] = u((x_a - x_b) / 2)
    diff = np.subtract.outer(nodes, nodes)
    return forward_data(profile, c, 0.5 * diff)


@dataclass(frozen=True, eq=False)
class DataMatrix:
    """Hermitian matrix A of the data operator on the index set J.

    Attributes
    ----------
    c : float
        Bandwidth of the PSWF basis.
    entries : np.ndarray
        The matrix A, entries[j, l] = <N psi_l, psi_j>.
    lambdas : np.ndarray
        The prolate eigenvalues lambda_j for j in J.
    eigenvalues : np.ndarray
        The eigenvalues mu_n of A in decreasing order.
    eigenvectors : np.ndarray
        Column n holds zeta_n in PSWF coordinates.
    noise_level : float
        Relative noise level delta of the perturbation applied to A.
    seed : int or None
        Seed of the noise draw.
    """

    c: float
    entries: np.ndarray
    lambdas: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    noise_level: float = 0.0
    seed: int | None = None

    def __post_init__(self):
        for arr in (self.entries, self.lambdas, self.eigenvalues, self.eigenvectors):
            arr.setflags(write=False)

    @classmethod
    def from_entries(cls, c, entries, lambdas, noise_level=0.0, seed=None):
        """Hermitian-symmetrize `entries` and store its eigendecomposition."""
        entries = np.asarray(entries, dtype=complex)
        lambdas = np.asarray(lambdas, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError(f"Data matrix must be square, got {entries.shape}!")
        if lambdas.shape != (entries.shape[0],):
            raise ValueError(
                f"Expected {entries.shape[0]} prolate eigenvalues, "
                f"got {lambdas.shape[0]}!"
            )
        entries = 0.5 * (entries + entries.conj().T)
        try:
            mu, zeta = scipy.linalg.eigh(entries)
        except np.linalg.LinAlgError as err:
            raise RuntimeError(f"forward: Hermitian eigensolver failed: {err}") from err
        return cls(
            c=float(c),
            entries=entries,
            lambdas=lambdas.copy(),
            eigenvalues=mu[::-1].copy(),
            eigenvectors=zeta[:, ::-1].copy(),
            noise_level=float(noise_level),
            seed=seed,
        )

    @property
    def dim(self):
        return self.entries.shape[0]

    def phase_transform(self):
        """Return U A U^H with U = diag(conj(lambda_j) / |lambda_j|).

        For noiseless data this matrix is real.
        """
        u = np.conj(self.lambdas) / np.abs(self.lambdas)
        return u[:, None] * self.entries * np.conj(u)[None, :]

    def spectral_norm(self):
        return float(scipy.linalg.norm(self.entries, 2))

    def relative_noise(self, clean):
        """Return ||self - clean||_2 / ||clean||_2."""
        diff = scipy.linalg.norm(self.entries - clean.entries, 2)
        return float(diff / clean.spectral_norm())

    def save(self, directory, stem="data_matrix"):
        """Write `<stem>_re.csv`, `<stem>_im.csv` and a `<stem>.json` header."""
        os.makedirs(directory, exist_ok=True)
        base = os.path.join(directory, stem)
        np.savetxt(base + "_re.csv", self.entries.real, delimiter=",", fmt="%.17g")
        np.savetxt(base + "_im.csv", self.entries.imag, delimiter=",", fmt="%.17g")
        header = {
            "c": self.c,
            "dim": self.dim,
            "noise_level": self.noise_level,
            "seed": self.seed,
            "lambdas_re": self.lambdas.real.tolist(),
            "lambdas_im": self.lambdas.imag.tolist(),
        }
        with open(base + ".json", "w", encoding="utf-8") as fp:
            json.dump(header, fp, indent=2)
        LOGGER.debug("saved data matrix to %s.*", base)

    @classmethod
    def load(cls, directory, stem="data_matrix"):
        base = os.path.join(directory, stem)
        with open(base + ".json", encoding="utf-8") as fp:
            header = json.load(fp)
        real = np.loadtxt(base + "_re.csv", delimiter=",", ndmin=2)
        imag = np.loadtxt(base + "_im.csv", delimiter=",", ndmin=2)
        if real.shape != (header["dim"], header["dim"]) or imag.shape != real.shape:
            raise ValueError(
                f"Data matrix files under {base} do not match dim={header['dim']}!"
            )
        lambdas = np.asarray(header["lambdas_re"]) + 1j * np.asarray(
            header["lambdas_im"]
        )
        return cls.from_entries(
            header["c"],
            real + 1j * imag,
            lambdas,
            noise_level=header["noise_level"],
            seed=header["seed"],
        )


def _check_index_set(basis, index_set):
    index_set = np.asarray(index_set, dtype=int)
    if index_set.ndim != 1 or index_set.size == 0:
        raise ValueError("The index set J must be a non-empty 1-d sequence!")
    if index_set.min() < 0 or index_set.max() >= basis.count:
        raise ValueError(
            f"Index set J spans {index_set.min()}..{index_set.max()} but the "
            f"PSWF basis only holds 0..{basis.count - 1}!"
        )
    return index_set


def apply_data_operator(profile, c, values, rule):
    """Apply N to a function sampled at the nodes of `rule`.

    Returns (N g)(x_a) at the same nodes, computed with the kernel u((t-s)/2).
    """
    kernel = _kernel(profile, c, rule.nodes)
    return kernel @ (rule.weights * np.asarray(values))


def assemble_data_matrix(profile, basis, index_set, rule):
    """Assemble A by the kernel route.

    Parameters
    ----------
    profile : ContrastProfile
        The contrast q.
    basis : PswfBasis
        PSWF basis of bandwidth c.
    index_set : array_like of int
        The retained indices J.
    rule : QuadratureRule
        Rule used for both the s- and the t-integral.

    Returns
    -------
    A : DataMatrix
    """
    index_set = _check_index_set(basis, index_set)
    psi = pswf_eval_all(basis, rule.nodes)[:, index_set]
    weighted = rule.weights[:, None] * psi
    kernel = _kernel(profile, basis.bandwidth, rule.nodes)
    entries = weighted.T @ kernel @ weighted
    LOGGER.info(
        "assembled %s data matrix (dim %d, N_q=%d)",
        profile.kind.value,
        len(index_set),
        rule.order,
    )
    return DataMatrix.from_entries(basis.bandwidth, entries, basis.lambdas[index_set])


def contrast_moments(profile, basis, index_set, rule):
    """Return Q[j, l] = int q psi_j psi_l, integrating branch by branch."""
    index_set = _check_index_set(basis, index_set)
    moments = np.zeros((len(index_set), len(index_set)))
    for lo, hi in profile.smooth_intervals(*profile.support):
        nodes, weights = rule.mapped(lo, hi)
        q = profile.values_on(lo, hi, nodes)
        if not np.any(q):
            continue
        psi = pswf_eval_all(basis, nodes)[:, index_set]
        moments += psi.T @ ((weights * q)[:, None] * psi)
    return moments


def assemble_factorized_matrix(profile, basis, index_set, rule):
    """Assemble A = Lambda Q Lambda^H from the factorization of N."""
    index_set = _check_index_set(basis, index_set)
    lam = basis.lambdas[index_set]
    if not profile.pieces:
        entries = np.zeros((len(index_set), len(index_set)), dtype=complex)
    else:
        moments = contrast_moments(profile, basis, index_set, rule)
        entries = lam[:, None] * moments * np.conj(lam)[None, :]
    return DataMatrix.from_entries(basis.bandwidth, entries, lam)


def background_profile(q_inf, d_radius):
    """The constant background q_inf on (-D, D)."""
    if q_inf < 0:
        raise ValueError(f"Background contrast must be >= 0, got q_inf={q_inf}!")
    if not 0 < d_radius < 1:
        raise ValueError(f"Background radius must lie in (0, 1), got {d_radius}!")
    return ContrastProfile.piecewise([Piece(-d_radius, d_radius, p0=q_inf)])


def assemble_background_matrix(q_inf, d_radius, basis, index_set, rule):
    """Data matrix of the background contrast q_inf on (-D, D)."""
    return assemble_data_matrix(
        background_profile(q_inf, d_radius), basis, index_set, rule
    )


def assemble_sign_changing(profile, q_inf, d_radius, basis, index_set, rule):
    """Assemble the shifted matrix for q_inf 1_D + q together with the background.

    Returns
    -------
    A_tilde, A_inf : DataMatrix
        A_tilde = A_inf + A_q by linearity of N in the contrast.
    """
    lo, hi = profile.support
    if profile.pieces and (lo < -d_radius or hi > d_radius):
        raise ValueError(
            f"Contrast support ({lo}, {hi}) must lie inside the background "
            f"(-{d_radius}, {d_radius})!"
        )
    a_inf = assemble_background_matrix(q_inf, d_radius, basis, index_set, rule)
    if profile.pieces:
        a_q = assemble_data_matrix(profile, basis, index_set, rule).entries
    else:
        a_q = np.zeros_like(a_inf.entries)
    a_tilde = DataMatrix.from_entries(a_inf.c, a_inf.entries + a_q, a_inf.lambdas)
    if profile.pieces:
        shifted = profile + background_profile(q_inf, d_radius)
        shifted_min = shifted.minimum_on(lo, hi)
        if shifted_min <= 0:
            LOGGER.warning(
                "q + q_inf reaches %.3e <= 0; the shifted data operator is "
                "not positive definite",
                shifted_min,
            )
    return a_tilde, a_inf


def add_noise(matrix, delta, seed):
    """Perturb `matrix` by Hermitian Gaussian noise of relative size `delta`.

    The perturbation H = (E + E^H) / 2, E complex Gaussian, is rescaled so that
    ||H||_2 = delta ||A||_2. The draw only depends on `seed`.
    """
    if delta < 0:
        raise ValueError(f"Noise level must be >= 0, got delta={delta}!")
    if delta == 0:
        return matrix
    rng = np.random.default_rng(seed)
    shape = matrix.entries.shape
    e = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    h = 0.5 * (e + e.conj().T)
    h *= delta * matrix.spectral_norm() / scipy.linalg.norm(h, 2)
    LOGGER.info("added %.2f%% Hermitian noise (seed %s)", 100 * delta, seed)
    noisy = DataMatrix.from_entries(
        matrix.c,
        matrix.entries + h,
        matrix.lambdas,
        noise_level=delta,
        seed=seed,
    )
    negative = int(np.sum(noisy.eigenvalues <= 0))
    if negative:
        LOGGER.warning(
            "%d of %d eigenvalues of the noisy matrix are <= 0 and will be discarded",
            negative,
            noisy.dim,
        )
    return noisy


def dft_data_matrix(profile, c, n_grid):
    """Discretize N on a uniform midpoint grid of [-1, 1].

    This is the Cartesian-grid counterpart of the PSWF matrix used to show
    the compression achieved by the prolate basis.
    """
    if n_grid < 1:
        raise ValueError(f"Grid size must be >= 1, got {n_grid}!")
    h = 2.0 / n_grid
    nodes = -1.0 + h * (np.arange(n_grid) + 0.5)
    return h * _kernel(profile, c, nodes)


def compression_profile(entries):
    """Sorted magnitudes of `entries` relative to the largest one."""
    mags = np.sort(np.abs(np.asarray(entries)).ravel())[::-1]
    if mags.size == 0 or mags[0] == 0:
        return mags
    return mags / mags[0]
