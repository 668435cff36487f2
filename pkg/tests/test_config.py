import numpy as np
import pytest

from deltagreen.config import loads
from deltagreen.core import Curve, ModelKind, Surface, ValidationError


def test_empty_document():
    run = loads("")
    assert run.kind is ModelKind.Points1D and run.model.centers == () and run.energies == []


def test_full_document():
    run = loads("""
[units]
hbar = 1.0
mass = 1.0
[model]
kind = "Curves2DFlat"
[[centers]]
shape = "circle"
center = [0.0, 0.0]
radius = 1.0
order = 64
lambda = 2.0
[energy]
values = [-1.0, -2.0]
kappa = 3.0
im = 0.5
[probes]
x = [[0.1, 0.2], [0.3, 0.0]]
y = [[2.0, 0.0]]
mode = "product"
[spectrum]
bracket = [-5.0, -0.01]
grid = 100
""")
    sup, cpl = run.model.centers[0]
    assert isinstance(sup, Curve) and sup.order == 64
    assert run.energies == [-1 + 0.5j, -2 + 0.5j, -4.5 + 0.5j]
    X, Y = run.probes
    assert X.shape == (2, 2) and np.array_equal(Y[0], Y[1])
    assert run.bracket == (-5.0, -0.01) and run.grid == 100


def test_sphere_support():
    run = loads('[model]\nkind="Surfaces3DFlat"\n[[centers]]\nshape="sphere"\nradius=2.0\nlambda=1.0\n')
    assert isinstance(run.model.centers[0][0], Surface)


def test_zip_and_diagonal_probes():
    run = loads('[probes]\nx=[0.0, 1.0]\ny=[2.0, 3.0]\nmode="zip"\n')
    assert run.probes[0].ravel().tolist() == [0, 1] and run.probes[1].ravel().tolist() == [2, 3]
    run = loads('[probes]\nx=[0.0, 1.0]\n')
    assert np.array_equal(*run.probes)


@pytest.mark.parametrize("doc,code", [
    ('[model]\nkind="Nope"\n', "bad config"),
    ('[[centers]]\nposition=0.0\n', "bad config"),
    ('[[centers]]\nposition=0.0\nlambda=1\nmu=1\n', "bad config"),
    ('[[centers]]\nposition=0.0\nlambda=1\n[[centers]]\nposition=0.0\nlambda=2\n', "duplicate centers"),
    ('[model]\nkind="PointsRenorm2DFlat"\n[[centers]]\nposition=[0.0,0.0]\nlambda=1\n', "wrong coupling"),
    ('[[centers]]\nshape="torus"\nlambda=1\n', "bad config"),
    ('this is not toml', "bad config"),
    ('[probes]\nx=[[0.0,1.0]]\n', "wrong dimension"),
])
def test_invalid(doc, code):
    with pytest.raises(ValidationError) as ei:
        loads(doc)
    assert code in {v.code for v in ei.value.report.violations}
