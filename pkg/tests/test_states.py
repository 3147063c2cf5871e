import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from bfnet.bfseries import VacuumOverlapError, ensure_vacuum_overlap
from bfnet.states import (
    Cat,
    Coherent,
    DisplacedSqueezed,
    Fock,
    SqueezedVacuum,
    g_coefficients,
    mode_series,
    rotate_spec,
    series_g_coefficients,
    spec_from_json,
)

BIG = 90


def _ladder(dim):
    return np.diag(np.sqrt(np.arange(1, dim)), 1).astype(complex)


def reference_state(spec, dim=BIG):
    """Amplitudes from exponentiating generators in a large Fock space."""
    a = _ladder(dim)
    ad = a.conj().T
    vac = np.zeros(dim, dtype=complex)
    vac[0] = 1

    def displace(y):
        return expm(y * ad - np.conj(y) * a)

    def squeeze(gamma, phase):
        xi = gamma * np.exp(2j * phase)
        return expm(0.5 * (np.conj(xi) * a @ a - xi * ad @ ad))

    if isinstance(spec, Coherent):
        return displace(spec.alpha) @ vac
    if isinstance(spec, SqueezedVacuum):
        return squeeze(spec.gamma, spec.axis_phase) @ vac
    if isinstance(spec, DisplacedSqueezed):
        return displace(spec.y) @ squeeze(spec.gamma, spec.axis_phase) @ vac
    if isinstance(spec, Cat):
        v = displace(spec.alpha) @ vac + spec.parity * (displace(-spec.alpha) @ vac)
        return v / np.linalg.norm(v)
    raise TypeError(spec)


@pytest.mark.parametrize(
    "spec",
    [
        Coherent(0.7 - 0.4j),
        SqueezedVacuum(0.3),
        SqueezedVacuum(0.5, 0.7),
        DisplacedSqueezed(0.3 + 0.2j, 0.4, 0.0),
        DisplacedSqueezed(-0.2 + 0.5j, 0.25, 1.1),
        Cat(0.9, 1),
        Cat(0.6 + 0.5j, -1),
    ],
)
def test_amplitudes_match_operator_exponentials(spec):
    D = 20
    amps = mode_series(spec, D).amplitudes()
    ref = reference_state(spec)[: D + 1]
    np.testing.assert_allclose(amps, ref, atol=1e-12)


def test_coherent_zero_is_vacuum():
    c = mode_series(Coherent(0), 6).coeffs
    np.testing.assert_array_equal(c, [1, 0, 0, 0, 0, 0, 0])


def test_single_photon_series():
    np.testing.assert_array_equal(mode_series(Fock(1), 4).coeffs, [0, 1, 0, 0, 0])


def test_squeezed_degree_two_amplitude():
    g = 0.3
    amp = mode_series(SqueezedVacuum(g), 20).amplitudes()[2]
    assert amp == pytest.approx(-(math.tanh(g) / 2) * math.sqrt(2) / math.sqrt(math.cosh(g)), abs=1e-15)


def test_fock_beyond_cutoff():
    with pytest.raises(ValueError):
        mode_series(Fock(5), 4)


def test_squeezed_deficit_matches_tail_sum():
    g = 0.3
    t = math.tanh(g)
    # P(2m) = (2m)! / (4^m m!^2) t^(2m) / cosh g, summed past the cutoff
    tail = sum(math.comb(2 * m, m) / 4**m * t ** (2 * m) for m in range(11, 200)) / math.cosh(g)
    deficit = mode_series(SqueezedVacuum(g), 20).norm_deficit()
    assert deficit <= 1e-10
    assert deficit == pytest.approx(tail, rel=1e-3, abs=1e-15)


def test_g_coherent():
    lam = g_coefficients(Coherent(1 + 0j), 10)
    assert lam[0] == -0.5 and lam[1] == 1
    assert all(lam[d] == 0 for d in range(2, 11))


def test_g_squeezed():
    lam = g_coefficients(SqueezedVacuum(0.3, 0.0), 10)
    assert lam[2] == pytest.approx(-0.145656, abs=1e-6)
    assert lam[2] == pytest.approx(-math.tanh(0.3) / 2, abs=1e-16)
    assert lam[0] == pytest.approx(-0.5 * math.log(math.cosh(0.3)))


def test_g_displaced_single_photon():
    # B(z) = (z - conj(y)) e^{y z} e^{-|y|^2/2}, so lambda_d = -1 / (d conj(y)^d) for d >= 2
    ys, series = ensure_vacuum_overlap([Fock(1)], 20)
    y = ys[0]
    lam = series_g_coefficients(series[0])
    assert lam[1] == pytest.approx(y - 1 / np.conj(y), abs=1e-12)
    for d in range(2, 19):
        expected = -1 / (d * np.conj(y) ** d)
        assert abs(lam[d] - expected) <= 1e-11 * abs(expected)


def test_g_needs_vacuum_overlap():
    with pytest.raises(VacuumOverlapError):
        g_coefficients(Fock(2), 10)


@settings(max_examples=40, deadline=None)
@given(
    st.sampled_from(["coherent", "squeezed", "displaced"]),
    st.floats(-0.8, 0.8),
    st.floats(-0.8, 0.8),
    st.floats(0.0, 0.8),
    st.floats(0.0, 2 * math.pi),
)
def test_closed_form_matches_numerical_log(kind, re, im, gamma, phase):
    spec = {
        "coherent": Coherent(complex(re, im)),
        "squeezed": SqueezedVacuum(gamma, phase),
        "displaced": DisplacedSqueezed(complex(re, im), gamma, phase),
    }[kind]
    D = 20
    closed = g_coefficients(spec, D).values
    numeric = series_g_coefficients(mode_series(spec, D)).values
    np.testing.assert_allclose(numeric, closed, atol=1e-10)
    # Gaussian: nothing above degree two
    assert np.max(np.abs(numeric[3:])) <= 1e-10


@pytest.mark.parametrize("spec", [Fock(1), Fock(2), Cat(0.8, 1), Cat(0.7j, -1)])
def test_non_gaussian_has_higher_terms(spec):
    _, series = ensure_vacuum_overlap([spec], 16)
    lam = series_g_coefficients(series[0]).values
    assert np.max(np.abs(lam[3:])) > 1e-3


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 2 * math.pi))
def test_rotation_scales_log_coefficients(angle):
    spec = DisplacedSqueezed(0.3 - 0.1j, 0.4, 0.2)
    a = g_coefficients(spec, 6).values
    b = g_coefficients(rotate_spec(spec, angle), 6).values
    for d in (1, 2):
        assert abs(b[d] - a[d] * np.exp(-1j * d * angle)) < 1e-14


def test_spec_json_round_trip():
    for spec in [Coherent(0.1 + 0.2j), SqueezedVacuum(0.3, 0.1), DisplacedSqueezed(0.2j, 0.1, 0.0), Fock(3), Cat(0.5, -1)]:
        assert spec_from_json(spec.to_json()) == spec
    assert spec_from_json({"type": "squeezed", "gamma": 0.3, "axis_phase": 0.0}) == SqueezedVacuum(0.3)


@pytest.mark.parametrize(
    "bad",
    [{"gamma": 0.3}, {"type": "laser"}, {"type": "fock", "n": 1.5}, {"type": "cat", "alpha": 1, "parity": 0}, {"type": "coherent", "beta": 1}],
)
def test_spec_json_rejects(bad):
    with pytest.raises(ValueError):
        spec_from_json(bad)
