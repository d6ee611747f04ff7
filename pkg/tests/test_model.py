import math

import pytest
from hypothesis import given, strategies as st

from doublon_bic.model import (
    AtomSpec,
    ConfigError,
    NoDFModeError,
    SystemConfig,
    WaveguideParams,
    df_frequency,
    df_wavevector,
    doublon_band_edges,
    doublon_band_separated,
    doublon_dispersion,
    localization_length,
)

from conftest import SP


@pytest.mark.parametrize("U, k, expected", [
    (10.0, math.pi / 2, 10.392),
    (10.0, math.pi, 10.0),
    (10.0, 0.0, 10.770),
])
def test_dispersion_examples(U, k, expected):
    assert doublon_dispersion(U, 1.0, k) == pytest.approx(expected, abs=1e-3)


def test_dispersion_attractive_is_negative():
    assert doublon_dispersion(-10.0, 1.0, 0.0) == pytest.approx(-math.sqrt(116))


def test_dispersion_rejects_bad_input():
    with pytest.raises(ValueError):
        doublon_dispersion(0.0, 1.0, 0.3)
    with pytest.raises(ValueError):
        doublon_dispersion(10.0, 0.0, 0.3)


@pytest.mark.parametrize("U, k, expected, tol", [
    (10.0, math.pi / 2, 0.506, 1e-3),
    (10.0, math.pi, 0.0, 0.0),
    (4.0, 0.0, -1.0 / math.log(math.sqrt(2) - 1), 1e-12),
])
def test_localization_length_examples(U, k, expected, tol):
    assert localization_length(U, 1.0, k) == pytest.approx(expected, abs=tol)


def test_localization_length_decreases_towards_zone_edge():
    # logarithmic approach to 0: sigma ~ -1/ln(U^-1 J^2 (pi - k))
    ks = [math.pi - 10.0 ** -p for p in range(1, 9)]
    vals = [localization_length(10.0, 1.0, k) for k in ks]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 0.06


def test_localization_length_rejects_attractive():
    with pytest.raises(ValueError):
        localization_length(-1.0, 1.0, 0.0)


@pytest.mark.parametrize("dx, n, expected", [
    (2, 0, math.pi / 2),
    (1, 0, math.pi),
    (4, 1, 3 * math.pi / 4),
])
def test_df_wavevector(dx, n, expected):
    assert df_wavevector(dx, n) == pytest.approx(expected, abs=1e-14)


@given(st.integers(1, 50), st.integers(0, 20))
def test_df_wavevector_folded_and_destructive(dx, n):
    try:
        k = df_wavevector(dx, n)
    except NoDFModeError:
        return
    assert 0 < k <= math.pi
    # the two legs interfere destructively: 1 + exp(i k dx) = 0
    assert abs(1 + complex(math.cos(k * dx), math.sin(k * dx))) < 1e-9


@pytest.mark.parametrize("U, dx, expected", [
    (10.0, 2, 10.392),
    (10.0, 1, 10.0),
    (4.0, 2, math.sqrt(24)),
])
def test_df_frequency(U, dx, expected):
    assert df_frequency(WaveguideParams(N=10, U=U), dx) == pytest.approx(expected, abs=1e-3)


def test_band_edges_and_separation():
    assert doublon_band_edges(10.0, 1.0) == pytest.approx((10.0, math.sqrt(116)))
    assert doublon_band_separated(10.0, 1.0)
    assert not doublon_band_separated(2.0, 1.0)


def test_config_validation():
    wg = WaveguideParams(N=10)
    with pytest.raises(ConfigError):
        SystemConfig(wg, (AtomSpec(delta1=1, coupling_points=(3, 12), g=0.1),), SP)
    with pytest.raises(ConfigError):
        AtomSpec(delta1=1, coupling_points=(4, 2), g=0.1)
    with pytest.raises(ConfigError):
        WaveguideParams(N=1)
