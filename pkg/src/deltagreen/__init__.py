"""Green's functions of Schrodinger operators with delta interactions.

Point, curve and surface supported interactions, plus renormalized point
interactions on flat space, the flat torus and the round sphere. The
interacting resolvent is built by rank-one recursion and can be checked
against a direct principal-matrix solve.
"""
from . import kernels
from .core import (
    DEFAULT_UNITS,
    Bare,
    Curve,
    DeltaGreenError,
    Energy,
    ModelConfig,
    ModelKind,
    NumericalError,
    Point,
    PoleError,
    Renormalized,
    SingularProbeError,
    SpectrumError,
    Surface,
    TruncationError,
    Units,
    ValidationError,
    ValidationReport,
    validate,
)
from .engine import (
    BoundStateError,
    GreenState,
    OpCounter,
    build,
    build_principal_matrix,
    denominator,
    direct_green,
    direct_weights,
    evaluate,
    extend,
    extend_renormalized,
    init,
)
from .flat import Flat1D, Flat2D, Flat3D
from .heat import FlatRD, HeatBackend, Sphere2D, Torus2D, TruncationControl, g0_from_heat
from .spectrum import SpectralScan, char_value, find_bound_states

__version__ = "0.1.0"
KERNELS = kernels.NAME
