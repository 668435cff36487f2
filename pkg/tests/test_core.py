import math

import numpy as np
import pytest

from deltagreen.core import (
    Bare, Curve, Energy, ModelConfig, ModelKind, Point, Renormalized, Surface, Units,
    validate,
)


def test_units_scale_and_kappa():
    assert Units().scale == 1.0
    u = Units(hbar=2.0, mass=3.0)
    E = Energy.from_kappa(1.5, u)
    assert math.isclose(E.kappa_value(), 1.5)
    assert Energy(-4.0).kappa_value() == 2.0
    k = Energy(-1.0 + 0.5j).kappa
    assert k.real > 0


def test_bad_units():
    with pytest.raises(ValueError):
        Units(hbar=0.0)


def test_valid_1d_config_passes():
    cfg = ModelConfig(ModelKind.Points1D, [(Point(x), Bare(1.0)) for x in (-1.0, 0.0, 2.0)])
    assert validate(cfg).ok


def test_duplicate_centers():
    cfg = ModelConfig(ModelKind.Points1D, [(Point(0.0), Bare(1.0)), (Point(0.0), Bare(2.0))])
    rep = validate(cfg)
    assert [v.code for v in rep.violations] == ["duplicate centers"]
    assert rep.violations[0].indices == (0, 1)


def test_wrong_coupling_and_dimension():
    cfg = ModelConfig(ModelKind.PointsRenorm2DFlat, [(Point((0.0, 0.0)), Bare(1.0)),
                                                     (Point((1.0,)), Renormalized(1.0))])
    codes = {v.code for v in validate(cfg).violations}
    assert codes == {"wrong coupling", "wrong dimension"}


def test_curve_checks():
    bad = Curve(lambda s: np.stack([2 * np.cos(s), 2 * np.sin(s)], -1), 2 * math.pi)
    cfg = ModelConfig(ModelKind.Curves2DFlat, [(bad, Bare(1.0))])
    assert "not arc-length" in {v.code for v in validate(cfg).violations}
    opn = Curve(lambda s: np.stack([s, 0 * s], -1), 1.0)
    codes = {v.code for v in validate(ModelConfig(ModelKind.Curves2DFlat, [(opn, Bare(1.0))])).violations}
    assert "not closed" in codes


def test_intersecting_supports():
    a = Curve.circle((0, 0), 1.0)
    b = Curve.circle((1.0, 0), 1.0)
    c = Curve.circle((0, 0), 2.0)
    assert not validate(ModelConfig(ModelKind.Curves2DFlat, [(a, Bare(1)), (c, Bare(1))])).violations
    codes = [v.code for v in validate(ModelConfig(ModelKind.Curves2DFlat, [(a, Bare(1)), (b, Bare(1))])).violations]
    assert codes == ["intersecting supports"]
    s1, s2 = Surface.sphere((0, 0, 0), 1.0), Surface.sphere((1.5, 0, 0), 1.0)
    assert validate(ModelConfig(ModelKind.Surfaces3DFlat, [(s1, Bare(1)), (s2, Bare(1))])).violations


def test_torus_duplicate_mod_period():
    cfg = ModelConfig(ModelKind.PointsRenormTorus2D,
                      [(Point((0.1, 0.2)), Renormalized(1)), (Point((1.1, 0.2)), Renormalized(1))],
                      periods=(1.0, 1.0))
    assert [v.code for v in validate(cfg).violations] == ["duplicate centers"]


def test_validate_is_pure():
    cfg = ModelConfig(ModelKind.Points1D, [(Point(0.0), Bare(1.0)), (Point(0.0), Bare(2.0))])
    assert validate(cfg) == validate(cfg)


def test_bad_manifold():
    cfg = ModelConfig(ModelKind.PointsRenormSphere2D, [], radius=-1.0)
    assert [v.code for v in validate(cfg).violations] == ["bad manifold"]


def test_renormalized_needs_positive_mu():
    with pytest.raises(ValueError):
        Renormalized(0.0)
