import math

import pytest

import hyperlab as hl


def test_iwasawa_height_of_lower_unipotent():
    g = hl.GroupElement(1.0, 0.0, 1.0, 1.0)
    assert abs(hl.iwasawa(g).t - math.log(2.0)) < 1e-15
    assert hl.iwasawa_height(g) == pytest.approx(math.log(2.0), abs=1e-15)


def test_cartan_round_trip():
    g = hl.GroupElement.rotation(0.3) * hl.GroupElement.diagonal(1.7) * hl.GroupElement.rotation(2.0)
    back = hl.cartan(g).reconstruct()
    assert max(abs(x - y) for x, y in zip(back.entries(), g.entries())) < 1e-12
    assert hl.cartan_norm(g) == pytest.approx(1.7, abs=1e-12)


def test_c_function_and_spherical_function():
    assert hl.c_inverse_sq(1.0) == pytest.approx(math.pi * math.tanh(math.pi), abs=1e-10)
    assert hl.spherical_function(0.7, 0.0) == 1.0


def test_default_measure_perron_data():
    mu = hl.default_measure(0.3)
    assert len(mu) == 4
    s = hl.perron_summary(mu, 32)
    assert 0.99 < s["sigma"] < 1.0
    assert s["gap"] > 0.0
    assert s["eta_min"] > 0.0


def test_stationary_density_is_a_probability_density():
    d = hl.stationary_density(hl.default_measure(0.3), 32)
    assert d["mass"] == pytest.approx(1.0, abs=1e-12)
    assert min(d["values"]) > 0.0


def test_validation_errors_map_to_value_error():
    with pytest.raises(ValueError):
        hl.GroupElement(0.0, 1.0, 1.0, 0.0).renormalized()
