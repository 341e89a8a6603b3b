import numpy as np
import pytest

from prolate_sampling.forward import (
    DataMatrix,
    add_noise,
    apply_data_operator,
    assemble_background_matrix,
    assemble_data_matrix,
    assemble_factorized_matrix,
    assemble_sign_changing,
    background_profile,
    compression_profile,
    dft_data_matrix,
)
from prolate_sampling.profiles import ContrastProfile, Piece, sign_changing
from prolate_sampling.pswf import pswf_eval, solve_pswf
from prolate_sampling.quadrature import lgl_rule

R = 0.66
J20 = np.arange(37)

FAMILIES = {
    "constant": ContrastProfile.constant(R),
    "inc_dec": ContrastProfile.inc_dec(R),
    "dec_inc": ContrastProfile.dec_inc(R),
    "oscillatory": ContrastProfile.oscillatory(R, 4),
}


@pytest.fixture(scope="module")
def constant_matrix(basis_c20, rule100):
    return assemble_data_matrix(FAMILIES["constant"], basis_c20, J20, rule100)


@pytest.mark.parametrize("name", sorted(FAMILIES))
def test_kernel_and_factorized_routes_agree(name, basis_c20, rule100):
    profile = FAMILIES[name]
    kernel = assemble_data_matrix(profile, basis_c20, J20, rule100)
    factorized = assemble_factorized_matrix(profile, basis_c20, J20, rule100)
    np.testing.assert_allclose(kernel.entries, factorized.entries, atol=1e-8)


@pytest.mark.parametrize("name", sorted(FAMILIES))
def test_noiseless_matrix_structure(name, basis_c20, rule100):
    A = assemble_data_matrix(FAMILIES[name], basis_c20, J20, rule100)
    np.testing.assert_allclose(A.entries, A.entries.conj().T, atol=1e-15)
    assert np.max(np.abs(A.phase_transform().imag)) < 1e-10
    assert np.all(np.diff(A.eigenvalues) <= 0)
    assert A.eigenvalues[-1] > -1e-12 * A.spectral_norm()
    assert A.dim == len(J20)


def test_eigenvectors_diagonalize(constant_matrix):
    zeta, mu = constant_matrix.eigenvectors, constant_matrix.eigenvalues
    np.testing.assert_allclose(
        constant_matrix.entries @ zeta, zeta * mu, atol=1e-13
    )
    assert not constant_matrix.entries.flags.writeable


def test_scaling_covariance(basis_c20, rule100, constant_matrix):
    doubled = assemble_data_matrix(
        FAMILIES["constant"].scaled(2.0), basis_c20, J20, rule100
    )
    np.testing.assert_allclose(doubled.entries, 2 * constant_matrix.entries, rtol=1e-13)


def test_quadrature_refinement(basis_c20, rule200):
    fine = assemble_data_matrix(FAMILIES["inc_dec"], basis_c20, J20, rule200)
    coarse = assemble_data_matrix(FAMILIES["inc_dec"], basis_c20, J20, lgl_rule(100))
    np.testing.assert_allclose(fine.entries, coarse.entries, atol=1e-9)


def test_constant_contrast_eigenfunctions(rule200):
    # for q = 2r on (-r, r) the data operator acts on psi_k(.; c r) as
    # multiplication by 2r * r * |lambda_k(c r)|^2; rounding in the kernel sum
    # limits the relative accuracy to about 1e-16 / |lambda_k|^2
    c = 20.0
    profile = ContrastProfile.constant(R)
    basis_cr = solve_pswf(c * R, 40)
    checked = 0
    for k in range(basis_cr.count):
        lam = abs(basis_cr.lambdas[k])
        if lam <= 1e-6:
            continue
        values = pswf_eval(basis_cr, k, rule200.nodes)
        image = apply_data_operator(profile, c, values, rule200)
        expected = 2 * R * R * lam**2 * values
        err = np.sqrt(np.sum(rule200.weights * np.abs(image - expected) ** 2))
        norm = np.sqrt(np.sum(rule200.weights * np.abs(expected) ** 2))
        assert err / norm < 1e-6 + 1e-15 / lam**2
        checked += 1
    assert checked >= 18


def test_background_matrix(basis_c20, rule200):
    full = np.arange(basis_c20.count)
    A_inf = assemble_background_matrix(1.0, 0.8, basis_c20, full, rule200)
    same = assemble_data_matrix(
        ContrastProfile.piecewise([Piece(-0.8, 0.8, 1.0)]), basis_c20, full, rule200
    )
    np.testing.assert_array_equal(A_inf.entries, same.entries)

    # eigenvalues approach D q_inf |lambda_k(c D)|^2
    basis_cd = solve_pswf(20.0 * 0.8, 40)
    expected = np.sort(0.8 * np.abs(basis_cd.lambdas) ** 2)[::-1]
    leading = expected > 1e-3
    np.testing.assert_allclose(
        A_inf.eigenvalues[: leading.sum()], expected[leading], rtol=1e-6
    )

    zero = assemble_background_matrix(0.0, 0.8, basis_c20, full, rule200)
    assert not np.any(zero.entries)


def test_background_profile_validation():
    with pytest.raises(ValueError):
        background_profile(-1.0, 0.8)
    with pytest.raises(ValueError):
        background_profile(1.0, 1.0)


def test_sign_changing_assembly(basis_c20, rule100, caplog):
    profile = sign_changing(0.6)
    with caplog.at_level("WARNING", logger="prolate_sampling.forward"):
        A_tilde, A_inf = assemble_sign_changing(
            profile, 1.0, 0.8, basis_c20, J20, rule100
        )
    assert "not positive definite" not in caplog.text
    A_q = assemble_data_matrix(profile, basis_c20, J20, rule100)
    np.testing.assert_allclose(
        A_tilde.entries, A_inf.entries + A_q.entries, atol=1e-15
    )
    # q alone is indefinite, q + q_inf is not
    assert A_q.eigenvalues[-1] < -1e-6
    assert A_tilde.eigenvalues[-1] > -1e-12 * A_tilde.spectral_norm()


def test_sign_changing_warns_when_shift_is_too_small(basis_c20, rule100, caplog):
    with caplog.at_level("WARNING", logger="prolate_sampling.forward"):
        assemble_sign_changing(sign_changing(0.6), 0.3, 0.8, basis_c20, J20, rule100)
    assert "not positive definite" in caplog.text


def test_sign_changing_support_must_fit(basis_c20, rule100):
    with pytest.raises(ValueError, match="inside the background"):
        assemble_sign_changing(
            ContrastProfile.constant(0.7), 1.0, 0.6, basis_c20, J20, rule100
        )


def test_zero_contrast_leaves_background_unchanged(basis_c20, rule100):
    A_tilde, A_inf = assemble_sign_changing(
        ContrastProfile.piecewise([]), 1.0, 0.8, basis_c20, J20, rule100
    )
    np.testing.assert_array_equal(A_tilde.entries, A_inf.entries)


def test_index_set_validation(basis_c20, rule100):
    with pytest.raises(ValueError):
        assemble_data_matrix(FAMILIES["constant"], basis_c20, [], rule100)
    with pytest.raises(ValueError):
        assemble_data_matrix(
            FAMILIES["constant"], basis_c20, [0, basis_c20.count], rule100
        )
    with pytest.raises(ValueError):
        DataMatrix.from_entries(20.0, np.ones((2, 3)), np.ones(2))
    with pytest.raises(ValueError):
        DataMatrix.from_entries(20.0, np.eye(3), np.ones(2))


def test_add_noise(constant_matrix):
    assert add_noise(constant_matrix, 0.0, 1) is constant_matrix
    assert add_noise(constant_matrix, 0.0, 2) is constant_matrix

    noisy = add_noise(constant_matrix, 0.05, 7)
    assert noisy.relative_noise(constant_matrix) == pytest.approx(0.05, rel=1e-10)
    np.testing.assert_array_equal(noisy.entries, noisy.entries.conj().T)
    assert noisy.noise_level == 0.05 and noisy.seed == 7

    again = add_noise(constant_matrix, 0.05, 7)
    np.testing.assert_array_equal(noisy.entries, again.entries)
    other = add_noise(constant_matrix, 0.05, 8)
    assert np.any(noisy.entries != other.entries)

    with pytest.raises(ValueError):
        add_noise(constant_matrix, -0.1, 0)


def test_save_and_load(tmp_path, constant_matrix):
    noisy = add_noise(constant_matrix, 0.01, 3)
    noisy.save(tmp_path / "matrices")
    loaded = DataMatrix.load(tmp_path / "matrices")
    np.testing.assert_array_equal(loaded.entries, noisy.entries)
    np.testing.assert_array_equal(loaded.lambdas, noisy.lambdas)
    assert loaded.noise_level == 0.01 and loaded.seed == 3


def test_prolate_matrix_is_more_compressed_than_grid_matrix(constant_matrix):
    grid = dft_data_matrix(FAMILIES["constant"], 20.0, len(J20))
    assert grid.shape == (37, 37)
    np.testing.assert_allclose(grid, grid.conj().T, atol=1e-15)
    significant_pswf = np.sum(compression_profile(constant_matrix.entries) > 1e-8)
    significant_grid = np.sum(compression_profile(grid) > 1e-8)
    assert significant_pswf < 0.7 * significant_grid
    prof = compression_profile(grid)
    assert prof[0] == 1.0 and np.all(np.diff(prof) <= 0)
    with pytest.raises(ValueError):
        dft_data_matrix(FAMILIES["constant"], 20.0, 0)


def test_add_noise_warns_about_discarded_modes(constant_matrix, caplog):
    with caplog.at_level("WARNING", logger="prolate_sampling.forward"):
        noisy = add_noise(constant_matrix, 0.05, 11)
    assert noisy.eigenvalues[-1] < 0
    assert "will be discarded" in caplog.text
