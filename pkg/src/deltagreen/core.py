"""Shared vocabulary: units, energies, supports, couplings and model configs."""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np


class DeltaGreenError(Exception):
    """Base class for library errors."""


class ValidationError(DeltaGreenError):
    """A model configuration violates a standing assumption."""

    def __init__(self, report):
        self.report = report
        super().__init__(str(report))


class NumericalError(DeltaGreenError):
    """Numerical failure: poles, singular probes, unattainable tolerances."""


class PoleError(NumericalError):
    """The energy sits at (or numerically at) a pole of the Green's function."""


class SingularProbeError(NumericalError):
    """A probe point lies on a support where the free kernel diverges."""


class SpectrumError(NumericalError):
    """The requested energy is on or too close to the free spectrum."""


class TruncationError(NumericalError):
    """A series or quadrature could not reach its target tolerance."""


@dataclass(frozen=True)
class Units:
    """hbar and particle mass. The default makes H0 = -laplacian."""

    hbar: float = 1.0
    mass: float = 0.5

    def __post_init__(self):
        if not (self.hbar > 0 and self.mass > 0):
            raise ValueError("hbar and mass must be positive")

    @property
    def scale(self) -> float:
        """2m / hbar^2, the factor relating H0 - E to -laplacian + kappa^2."""
        return 2.0 * self.mass / self.hbar**2


DEFAULT_UNITS = Units()


@dataclass(frozen=True)
class Energy:
    value: complex
    units: Units = DEFAULT_UNITS

    @classmethod
    def from_kappa(cls, kappa, units: Units = DEFAULT_UNITS) -> "Energy":
        """E = -(hbar^2 / 2m) kappa^2."""
        return cls(-(kappa**2) / units.scale, units)

    @property
    def kappa(self) -> complex:
        """Decay wavenumber sqrt(-2mE)/hbar on the branch Re kappa >= 0."""
        k = cmath.sqrt(-self.units.scale * complex(self.value))
        return k if k.real >= 0 else -k

    @property
    def is_real(self) -> bool:
        return complex(self.value).imag == 0.0

    def kappa_value(self):
        """kappa as a float when it is real, complex otherwise."""
        k = self.kappa
        return k.real if k.imag == 0.0 else k


def as_energy(E, units: Units = DEFAULT_UNITS) -> Energy:
    if isinstance(E, Energy):
        return E
    return Energy(E, units)


# --------------------------------------------------------------------------
# supports


@dataclass(frozen=True)
class Point:
    position: tuple

    def __post_init__(self):
        pos = self.position
        if np.ndim(pos) == 0:
            pos = (pos,)
        object.__setattr__(self, "position", tuple(float(c) for c in pos))

    @property
    def dim(self) -> int:
        return len(self.position)

    @property
    def diameter(self) -> float:
        return 0.0


@dataclass(frozen=True, eq=False)
class Curve:
    """Closed, arc-length parametrized planar curve.

    ``gamma`` maps an array of arc-length parameters in [0, L) to an
    ``(m, 2)`` array of points. ``name`` and ``params`` identify registry
    curves for serialization.
    """

    gamma: Callable[[np.ndarray], np.ndarray]
    length: float
    order: int = 128
    name: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.length <= 0:
            raise ValueError("curve length must be positive")
        if self.order < 4 or self.order % 2:
            raise ValueError("curve quadrature order must be an even integer >= 4")

    @classmethod
    def circle(cls, center=(0.0, 0.0), radius=1.0, order=128) -> "Curve":
        cx, cy = (float(c) for c in center)
        R = float(radius)

        def gamma(s):
            th = np.asarray(s, dtype=float) / R
            return np.stack([cx + R * np.cos(th), cy + R * np.sin(th)], axis=-1)

        return cls(gamma, 2.0 * math.pi * R, order, "circle",
                   {"center": (cx, cy), "radius": R})

    def nodes(self, order: Optional[int] = None) -> np.ndarray:
        n = order or self.order
        return np.asarray(self.gamma(np.arange(n) * (self.length / n)), dtype=float)

    def speed(self, order: Optional[int] = None) -> np.ndarray:
        """|dGamma/ds| at the nodes, by spectral differentiation."""
        pts = self.nodes(order)
        n = pts.shape[0]
        k = np.fft.fftfreq(n, d=1.0 / n)
        k[n // 2] = 0.0
        deriv = np.fft.ifft(1j * k[:, None] * np.fft.fft(pts, axis=0), axis=0).real
        return np.hypot(deriv[:, 0], deriv[:, 1]) * (2.0 * math.pi / self.length)

    @property
    def diameter(self) -> float:
        pts = self.nodes()
        return float(np.max(np.linalg.norm(pts[:, None] - pts[None, :], axis=-1)))

    @property
    def dim(self) -> int:
        return 2


@dataclass(frozen=True)
class Surface:
    """Closed surface in R^3. Only round spheres are provided."""

    center: tuple
    radius: float
    order: int = 32
    name: str = "sphere"

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if self.radius <= 0:
            raise ValueError("sphere radius must be positive")
        if self.order < 2:
            raise ValueError("surface quadrature order must be >= 2")

    @classmethod
    def sphere(cls, center=(0.0, 0.0, 0.0), radius=1.0, order=32) -> "Surface":
        return cls(tuple(center), float(radius), int(order))

    @property
    def area(self) -> float:
        return 4.0 * math.pi * self.radius**2

    @property
    def diameter(self) -> float:
        return 2.0 * self.radius

    @property
    def dim(self) -> int:
        return 3


Support = Union[Point, Curve, Surface]


# --------------------------------------------------------------------------
# couplings


@dataclass(frozen=True)
class Bare:
    strength: float


@dataclass(frozen=True)
class Renormalized:
    """Coupling fixed by the isolated-center bound-state wavenumber mu."""

    mu: float

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError("mu must be positive")


Coupling = Union[Bare, Renormalized]


class ModelKind(str, enum.Enum):
    Points1D = "Points1D"
    Curves2DFlat = "Curves2DFlat"
    Surfaces3DFlat = "Surfaces3DFlat"
    PointsRenorm2DFlat = "PointsRenorm2DFlat"
    PointsRenorm3DFlat = "PointsRenorm3DFlat"
    PointsRenormTorus2D = "PointsRenormTorus2D"
    PointsRenormSphere2D = "PointsRenormSphere2D"

    @property
    def renormalized(self) -> bool:
        return self.value.startswith("PointsRenorm")

    @property
    def support_type(self):
        if self is ModelKind.Curves2DFlat:
            return Curve
        if self is ModelKind.Surfaces3DFlat:
            return Surface
        return Point

    @property
    def point_dim(self) -> int:
        return {"Points1D": 1, "Curves2DFlat": 2, "Surfaces3DFlat": 3,
                "PointsRenorm2DFlat": 2, "PointsRenorm3DFlat": 3,
                "PointsRenormTorus2D": 2, "PointsRenormSphere2D": 2}[self.value]


@dataclass(frozen=True)
class ModelConfig:
    kind: ModelKind
    centers: tuple = ()
    units: Units = DEFAULT_UNITS
    periods: Optional[tuple] = None
    radius: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind(self.kind))
        object.__setattr__(self, "centers", tuple(tuple(c) for c in self.centers))

    @property
    def supports(self):
        return [s for s, _ in self.centers]

    @property
    def couplings(self):
        return [c for _, c in self.centers]

    def backend(self):
        """Construct the kernel backend for this model."""
        from .flat import Flat1D, Flat2D, Flat3D
        from .heat import FlatRD, HeatBackend, Sphere2D, Torus2D

        k = self.kind
        if k is ModelKind.Points1D:
            return Flat1D(self.units)
        if k is ModelKind.Curves2DFlat:
            return Flat2D(self.units)
        if k is ModelKind.Surfaces3DFlat:
            return Flat3D(self.units)
        if k is ModelKind.PointsRenorm2DFlat:
            return HeatBackend(FlatRD(2), self.units)
        if k is ModelKind.PointsRenorm3DFlat:
            return HeatBackend(FlatRD(3), self.units)
        if k is ModelKind.PointsRenormTorus2D:
            L1, L2 = self.periods or (1.0, 1.0)
            return HeatBackend(Torus2D(L1, L2), self.units)
        R = self.radius if self.radius is not None else 1.0
        return HeatBackend(Sphere2D(R), self.units)


# --------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    indices: tuple = ()

    def __str__(self):
        where = f" (centers {', '.join(map(str, self.indices))})" if self.indices else ""
        return f"{self.code}: {self.message}{where}"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def __str__(self):
        if self.ok:
            return "pass"
        return "\n".join(str(v) for v in self.violations)


ARC_LENGTH_TOL = 1e-8
CLOSURE_TOL = 1e-8
INTERSECT_REL = 1e-9
POINT_COINCIDENCE = 1e-12


def _point_distance(kind: ModelKind, config: ModelConfig, a, b) -> float:
    a, b = np.asarray(a, float), np.asarray(b, float)
    if kind is ModelKind.PointsRenormTorus2D:
        L = np.asarray(config.periods or (1.0, 1.0), float)
        d = a - b
        d -= L * np.round(d / L)
        return float(np.linalg.norm(d))
    if kind is ModelKind.PointsRenormSphere2D:
        from .heat import sphere_cos_angle
        return float(np.arccos(np.clip(sphere_cos_angle(a, b), -1, 1)))
    return float(np.linalg.norm(a - b))


def check_curve(curve: Curve) -> list:
    out = []
    speed = curve.speed()
    if np.max(np.abs(speed - 1.0)) > ARC_LENGTH_TOL:
        out.append(("not arc-length",
                    f"|dGamma/ds| deviates from 1 by {np.max(np.abs(speed - 1.0)):.3g}"))
    ends = np.asarray(curve.gamma(np.array([0.0, curve.length])), float)
    scale = max(curve.length, 1.0)
    if np.linalg.norm(ends[0] - ends[1]) > CLOSURE_TOL * scale:
        out.append(("not closed", "Gamma(0) != Gamma(L)"))
    return out


def _polygons_cross(pa, pb) -> bool:
    """Does any edge of closed polygon pa properly cross an edge of pb?"""
    a0, a1 = pa, np.roll(pa, -1, axis=0)
    b0, b1 = pb, np.roll(pb, -1, axis=0)

    def orient(p, q, r):
        return ((q[..., 0] - p[..., 0]) * (r[..., 1] - p[..., 1])
                - (q[..., 1] - p[..., 1]) * (r[..., 0] - p[..., 0]))

    A0, A1 = a0[:, None], a1[:, None]
    B0, B1 = b0[None, :], b1[None, :]
    d1, d2 = orient(A0, A1, B0), orient(A0, A1, B1)
    d3, d4 = orient(B0, B1, A0), orient(B0, B1, A1)
    return bool(np.any((d1 * d2 < 0) & (d3 * d4 < 0)))


def supports_collide(a: Support, b: Support, kind=None, config=None) -> bool:
    """True when two supports coincide or intersect."""
    if isinstance(a, Point) and isinstance(b, Point):
        if kind is not None and config is not None:
            return _point_distance(kind, config, a.position, b.position) <= POINT_COINCIDENCE
        return float(np.linalg.norm(np.subtract(a.position, b.position))) <= POINT_COINCIDENCE
    if isinstance(a, Curve) and isinstance(b, Curve):
        pa, pb = a.nodes(), b.nodes()
        dmin = np.min(np.linalg.norm(pa[:, None] - pb[None, :], axis=-1))
        return dmin <= INTERSECT_REL * max(a.diameter, b.diameter) or _polygons_cross(pa, pb)
    if isinstance(a, Surface) and isinstance(b, Surface):
        d = float(np.linalg.norm(np.subtract(a.center, b.center)))
        separated = d > a.radius + b.radius
        nested = d < abs(a.radius - b.radius)
        gap = min(abs(d - a.radius - b.radius), abs(abs(a.radius - b.radius) - d))
        return not (separated or nested) or gap <= INTERSECT_REL * max(a.diameter, b.diameter)
    return False


def validate(config: ModelConfig) -> ValidationReport:
    """Check a configuration against the model's standing assumptions."""
    kind = config.kind
    out = []
    if kind is ModelKind.PointsRenormTorus2D:
        if config.periods is None or len(config.periods) != 2 or min(config.periods) <= 0:
            out.append(Violation("bad manifold", "torus needs two positive periods"))
    if kind is ModelKind.PointsRenormSphere2D:
        if config.radius is None or config.radius <= 0:
            out.append(Violation("bad manifold", "sphere needs a positive radius"))
    stype = kind.support_type
    for i, (sup, cpl) in enumerate(config.centers):
        if not isinstance(sup, stype):
            out.append(Violation("wrong support", f"{kind.value} expects {stype.__name__} supports", (i,)))
            continue
        if kind.renormalized and not isinstance(cpl, Renormalized):
            out.append(Violation("wrong coupling", "renormalized models need mu couplings", (i,)))
        if not kind.renormalized and not isinstance(cpl, Bare):
            out.append(Violation("wrong coupling", "codimension-one models need bare couplings", (i,)))
        if isinstance(sup, Point) and sup.dim != kind.point_dim:
            out.append(Violation("wrong dimension",
                                 f"expected {kind.point_dim} coordinates, got {sup.dim}", (i,)))
        if isinstance(sup, Curve):
            for code, msg in check_curve(sup):
                out.append(Violation(code, msg, (i,)))
    n = len(config.centers)
    for i in range(n):
        for j in range(i + 1, n):
            a, b = config.centers[i][0], config.centers[j][0]
            if type(a) is not type(b) or not isinstance(a, stype):
                continue
            if isinstance(a, Point) and (a.dim != kind.point_dim or b.dim != kind.point_dim):
                continue
            if supports_collide(a, b, kind, config):
                code = "duplicate centers" if isinstance(a, Point) else "intersecting supports"
                out.append(Violation(code, "supports must be pairwise distinct", (i, j)))
    return ValidationReport(tuple(out))


def coords(x, dim: Optional[int] = None) -> np.ndarray:
    """Coerce a probe coordinate (scalar or sequence) to a float array."""
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if dim is not None and arr.shape[-1] != dim:
        raise ValueError(f"expected {dim} coordinates, got {arr.shape[-1]}")
    return arr


def position_of(support) -> np.ndarray:
    if isinstance(support, Point):
        return np.asarray(support.position, float)
    if isinstance(support, Surface):
        return np.asarray(support.center, float)
    raise TypeError("support has no single position")
