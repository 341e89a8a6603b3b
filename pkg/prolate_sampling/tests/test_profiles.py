import math

import numpy as np
import pytest

from prolate_sampling.forward import forward_data
from prolate_sampling.profiles import (
    ContrastProfile,
    Kind,
    Piece,
    _odd_moment_kernel,
    contrast_eval,
    sign_changing,
)
from prolate_sampling.quadrature import lgl_rule

R = 0.66

PROFILES = {
    "constant": ContrastProfile.constant(R),
    "inc_dec": ContrastProfile.inc_dec(R),
    "dec_inc": ContrastProfile.dec_inc(R),
    "oscillatory": ContrastProfile.oscillatory(R, 4),
    "two_component": ContrastProfile.two_component(0.16, 0.08),
    "sign_changing": sign_changing(0.6),
}


@pytest.mark.parametrize(
    "profile,s,expected",
    [
        (PROFILES["constant"], 0.0, 1.32),
        (PROFILES["constant"], 0.7, 0.0),
        (PROFILES["inc_dec"], 0.0, 1.32),
        (PROFILES["inc_dec"], 0.33, 0.66),
        (PROFILES["dec_inc"], 0.0, 0.33),
        (PROFILES["dec_inc"], -0.33, 0.495),
        (PROFILES["oscillatory"], 0.0, 0.165),
        (PROFILES["two_component"], 0.0, 0.0),
        (PROFILES["two_component"], 0.2, 0.32),
        (PROFILES["sign_changing"], 0.0, 0.6),
        (PROFILES["sign_changing"], 0.5, -0.4),
    ],
)
def test_contrast_eval(profile, s, expected):
    assert contrast_eval(profile, s) == pytest.approx(expected, abs=1e-14)


def test_inc_dec_vanishes_at_support_edges():
    profile = PROFILES["inc_dec"]
    np.testing.assert_allclose(contrast_eval(profile, [-R, R]), 0.0, atol=1e-14)


def test_contrast_eval_shape():
    s = np.linspace(-1, 1, 12).reshape(3, 4)
    assert contrast_eval(PROFILES["oscillatory"], s).shape == (3, 4)


def test_forward_data_constant_closed_form():
    c = 20.0
    profile = PROFILES["constant"]
    assert forward_data(profile, c, 0.0) == pytest.approx(4 * R * R)
    t = 0.1
    expected = 2 * R * math.sin(2 * c * t * R) / (c * t)
    assert forward_data(profile, c, t) == pytest.approx(expected, abs=1e-14)


def test_forward_data_at_zero_is_the_integral_of_q():
    assert forward_data(PROFILES["inc_dec"], 20.0, 0.0) == pytest.approx(2 * R * R)
    assert forward_data(PROFILES["dec_inc"], 20.0, 0.0) == pytest.approx(
        1.5 * R * R
    )


def _quadrature_transform(profile, omega, rule):
    total = 0.0
    for lo, hi in profile.smooth_intervals(*profile.support):
        nodes, weights = rule.mapped(lo, hi)
        total += np.sum(
            weights * np.exp(1j * omega * nodes) * profile.values_on(lo, hi, nodes)
        )
    return total


@pytest.mark.parametrize("name", sorted(PROFILES))
@pytest.mark.parametrize("omega", [0.0, 1e-3, 0.05, 0.3, 7.0, 40.0, -55.0])
def test_fourier_matches_quadrature(name, omega):
    profile = PROFILES[name]
    rule = lgl_rule(80)
    assert profile.fourier(omega) == pytest.approx(
        _quadrature_transform(profile, omega, rule), abs=1e-12
    )


def test_odd_moment_kernel_series_is_continuous():
    below = _odd_moment_kernel(0.0999999)
    above = _odd_moment_kernel(0.1000001)
    assert below == pytest.approx(above, abs=1e-8)
    assert _odd_moment_kernel(0.0) == pytest.approx(1 / 3)
    x = np.array([0.0, 0.05, 0.5, 3.0])
    assert _odd_moment_kernel(x).shape == (4,)


def test_two_component_layout():
    profile = ContrastProfile.two_component(0.16, 0.08)
    assert profile.kind is Kind.TWO_COMPONENT
    assert profile.support == pytest.approx((-0.36, 0.36))
    assert list(profile.breakpoints) == pytest.approx([-0.36, -0.04, 0.04, 0.36])
    with pytest.raises(ValueError):
        ContrastProfile.two_component(0.3, 0.9)
    with pytest.raises(ValueError):
        ContrastProfile.two_component(0.16, 0.0)


def test_superposition_and_scaling():
    a, b = PROFILES["constant"], PROFILES["oscillatory"]
    both = a + b
    s = np.linspace(-0.9, 0.9, 37)
    np.testing.assert_allclose(both.evaluate(s), a.evaluate(s) + b.evaluate(s))
    omega = np.linspace(-30, 30, 11)
    np.testing.assert_allclose(
        both.fourier(omega), a.fourier(omega) + b.fourier(omega)
    )
    np.testing.assert_allclose(a.scaled(2.0).fourier(omega), 2 * a.fourier(omega))
    assert both.kind is Kind.PIECEWISE


def test_smooth_intervals_and_values_on():
    profile = PROFILES["inc_dec"]
    assert profile.smooth_intervals(-0.1, 0.1) == [(-0.1, 0.0), (0.0, 0.1)]
    assert profile.smooth_intervals(0.1, 0.2) == [(0.1, 0.2)]
    # one-sided limits at the kink
    assert profile.values_on(-0.1, 0.0, 0.0) == pytest.approx(1.32)
    assert profile.values_on(0.0, 0.1, 0.1) == pytest.approx(1.12)


def test_minimum_on():
    profile = sign_changing(0.6)
    assert profile.minimum_on(-0.6, 0.6) == pytest.approx(-0.6)
    assert PROFILES["constant"].minimum_on(-0.5, 0.5) == pytest.approx(1.32)


@pytest.mark.parametrize(
    "name", ["constant", "inc_dec", "oscillatory", "two_component"]
)
def test_mapping_round_trip(name):
    profile = PROFILES[name]
    again = ContrastProfile.from_mapping(profile.to_mapping())
    assert again == profile


def test_piecewise_mapping_round_trip():
    profile = sign_changing(0.6)
    again = ContrastProfile.from_mapping(profile.to_mapping())
    assert again.pieces == profile.pieces


def test_from_mapping_defaults_and_coercion():
    profile = ContrastProfile.from_mapping({"kind": "oscillatory", "r": "0.5"})
    assert profile.r == 0.5 and profile.m == 4
    assert ContrastProfile.from_mapping({}) == ContrastProfile.constant(0.66)
    pieces = ContrastProfile.from_mapping(
        {"kind": "piecewise", "pieces": [["-0.2", "0.2", "1e-1"]]}
    ).pieces
    assert pieces == (Piece(-0.2, 0.2, 0.1),)


@pytest.mark.parametrize(
    "data",
    [
        {"kind": "gaussian"},
        {"kind": "constant", "width": 0.3},
        {"kind": "piecewise"},
        {"kind": "constant", "r": 1.2},
        {"kind": "oscillatory", "m": -1},
    ],
)
def test_from_mapping_rejects_bad_input(data):
    with pytest.raises(ValueError):
        ContrastProfile.from_mapping(data)


def test_piece_validation_and_support():
    with pytest.raises(ValueError):
        Piece(0.3, 0.3)
    with pytest.raises(ValueError):
        ContrastProfile.piecewise([Piece(-1.0, 0.0, 1.0)])
    empty = ContrastProfile.piecewise([])
    assert empty.support == (0.0, 0.0)
    assert empty.fourier(3.0) == 0
