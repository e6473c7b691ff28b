import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tractionid.errors import ConfigError, DomainError
from tractionid.soil import (
    PROTOTYPE_SHAPE, SoilCatalog, SoilCurveParams, SoilMap, builtin_catalog, mu_of_s, soil_at,
)

HARD = SoilCurveParams("hard", 1.42)
GRASS = SoilCurveParams("grass", 0.4)


def _hand_mu(a, s, p=0.52, a1=0.01, a2=-11.36):
    return a * (1 - p * np.exp(a1 * s) - (1 - p) * np.exp(a2 * s))


def test_mu_examples():
    assert mu_of_s(HARD, 0.0) == 0.0
    assert mu_of_s(HARD, 0.2) == pytest.approx(_hand_mu(1.42, 0.2), rel=1e-14)
    assert mu_of_s(HARD, 0.2) == pytest.approx(0.6099, abs=5e-4)
    assert mu_of_s(GRASS, 0.2) == pytest.approx(0.4 / 1.42 * mu_of_s(HARD, 0.2), rel=1e-14)


@given(st.floats(0.01, 5.0), st.floats(0.0, 1.0), st.floats(-1, 1), st.floats(-30, 1))
def test_mu_is_zero_at_zero_slip(a, p, a1, a2):
    assert mu_of_s(SoilCurveParams("x", a, p, a1, a2), 0.0) == 0.0


@given(st.floats(0.01, 5.0), st.floats(0.01, 10.0), st.floats(-1.0, 1.0))
def test_mu_linear_in_scale(a, k, s):
    lhs = mu_of_s(SoilCurveParams("x", a * k), s)
    rhs = k * mu_of_s(SoilCurveParams("x", a), s)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-15)


def test_prototype_curve_rises_then_flattens():
    s = np.linspace(0.0, 0.6, 601)
    mu = mu_of_s(HARD, s)
    slope = np.diff(mu) / np.diff(s)
    assert np.all(slope[s[1:] < 0.3] > 0)
    assert abs(slope[-1]) < 0.05 * slope[0]


def test_mu_accepts_arrays():
    s = np.array([0.0, 0.1, 0.2])
    np.testing.assert_allclose(mu_of_s(HARD, s), _hand_mu(1.42, s), rtol=1e-14)


def test_soil_params_validation():
    with pytest.raises(DomainError):
        SoilCurveParams("x", 0.0)
    with pytest.raises(DomainError):
        SoilCurveParams("x", 1.0, p=1.5)
    with pytest.raises(DomainError):
        SoilCurveParams("x", 1.0, rho_s=-0.1)


def test_builtin_catalog():
    cat = builtin_catalog()
    assert cat.names == ["hard", "fine", "wet", "coarse", "grass"]
    assert [cat[n].a for n in cat.names] == [1.42, 0.85, 0.83, 0.91, 0.4]
    assert all(s.shape == PROTOTYPE_SHAPE for s in cat)
    with pytest.raises(ConfigError):
        cat["sand"]


def test_catalog_rejects_duplicates_and_empty():
    with pytest.raises(ConfigError):
        SoilCatalog([HARD, HARD])
    with pytest.raises(ConfigError):
        SoilCatalog([])


@pytest.mark.parametrize("pos, name", [(5.0, "grass"), (10.0, "fine"), (99.0, "fine"), (0.0, "grass")])
def test_soil_at(pos, name):
    cat = builtin_catalog()
    smap = SoilMap([(0, "grass"), (10, "fine")], cat)
    assert soil_at(smap, cat, pos).name == name


@pytest.mark.parametrize("points", [
    [(1.0, "grass")],
    [(0.0, "grass"), (0.0, "fine")],
    [(0.0, "grass"), (5.0, "sand")],
    [],
])
def test_soil_map_validated_at_load(points):
    with pytest.raises(ConfigError):
        SoilMap(points, builtin_catalog())


def test_soil_map_segments_and_negative_position():
    smap = SoilMap([(0, "grass"), (10, "fine"), (30, "hard")], builtin_catalog())
    assert smap.segments() == [(0.0, 10.0, "grass"), (10.0, 30.0, "fine"), (30.0, float("inf"), "hard")]
    assert smap.boundaries == [10.0, 30.0]
    with pytest.raises(DomainError):
        smap.index_at(-1.0)


@given(st.floats(0.0, 1e4))
def test_soil_at_is_total(pos):
    cat = builtin_catalog()
    smap = SoilMap([(0, "grass"), (10, "fine"), (30, "hard")], cat)
    assert soil_at(smap, cat, pos).name in {"grass", "fine", "hard"}
