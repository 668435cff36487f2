"""TOML run configuration.

Layout::

    [units]            hbar, mass
    [model]            kind, periods (torus), radius (sphere)
    [[centers]]        position = [...]  or  shape = "circle" | "sphere" with
                       center, radius, order; coupling: lambda or mu
    [energy]           value (+ im), values = [...], or kappa = k | [...]
    [probes]           x = [...], y = [...], mode = "product" | "zip" | "diagonal"
    [spectrum]         bracket = [lo, hi], grid, tol
    [bench]            n_max, seed

Every section is optional; an empty document is a Points1D model with no
centers, no energies and no probes.
"""
from __future__ import annotations

import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import (
    Bare,
    Curve,
    ModelConfig,
    ModelKind,
    Point,
    Renormalized,
    Surface,
    Units,
    ValidationError,
    ValidationReport,
    Violation,
    validate,
)

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

PROBE_MODES = ("product", "zip", "diagonal")


@dataclass
class RunConfig:
    model: ModelConfig
    energies: list = field(default_factory=list)
    probes: tuple = (np.zeros((0, 1)), np.zeros((0, 1)))
    bracket: Optional[tuple] = None
    grid: int = 512
    tol: float = 1e-10
    n_max: int = 256
    seed: Optional[int] = None

    @property
    def kind(self):
        return self.model.kind


def _fail(code, msg, idx=()):
    raise ValidationError(ValidationReport((Violation(code, msg, tuple(idx)),)))


def _number(v, what):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        _fail("bad config", f"{what} must be a number")
    return float(v)


def _support(entry, kind, i):
    shape = entry.get("shape", "point")
    order = entry.get("order")
    if shape == "point":
        if "position" not in entry:
            _fail("bad config", "point center needs 'position'", (i,))
        return Point(entry["position"])
    if shape == "circle":
        kw = {"center": tuple(entry.get("center", (0.0, 0.0))),
              "radius": _number(entry.get("radius", 1.0), "radius")}
        if order is not None:
            kw["order"] = int(order)
        return Curve.circle(**kw)
    if shape == "sphere":
        kw = {"center": tuple(entry.get("center", (0.0, 0.0, 0.0))),
              "radius": _number(entry.get("radius", 1.0), "radius")}
        if order is not None:
            kw["order"] = int(order)
        return Surface.sphere(**kw)
    _fail("bad config", f"unknown shape {shape!r} (registry: circle, sphere)", (i,))


def _coupling(entry, i):
    has_l, has_m = "lambda" in entry, "mu" in entry
    if has_l == has_m:
        _fail("bad config", "each center needs exactly one of 'lambda' or 'mu'", (i,))
    if has_l:
        return Bare(_number(entry["lambda"], "lambda"))
    return Renormalized(_number(entry["mu"], "mu"))


def _energies(sec, units):
    out = []
    im = float(sec.get("im", 0.0))
    if "value" in sec:
        out.append(_number(sec["value"], "energy") + 1j * im)
    for v in sec.get("values", []):
        out.append(_number(v, "energy") + 1j * im)
    kap = sec.get("kappa")
    if kap is not None:
        for k in np.atleast_1d(kap):
            out.append(-(float(k) ** 2) / units.scale + 1j * im)
    return [complex(e) if e.imag else float(e.real) for e in out]


def _points(raw, dim):
    arr = np.asarray(raw if raw is not None else [], dtype=float)
    if arr.size == 0:
        return np.zeros((0, dim))
    if arr.ndim == 1:
        arr = arr[:, None] if dim == 1 else arr[None, :]
    if arr.shape[-1] != dim:
        _fail("wrong dimension", f"probes need {dim} coordinates")
    return arr


def probe_pairs(sec, dim):
    mode = sec.get("mode")
    X = _points(sec.get("x"), dim)
    Y = _points(sec.get("y"), dim) if "y" in sec else None
    if mode is None:
        mode = "diagonal" if Y is None else "product"
    if mode not in PROBE_MODES:
        _fail("bad config", f"probe mode must be one of {', '.join(PROBE_MODES)}")
    if mode == "diagonal" or Y is None:
        return X, X.copy()
    if mode == "zip":
        if len(X) != len(Y):
            _fail("bad config", "zip probes need equally long x and y")
        return X, Y
    return np.repeat(X, len(Y), axis=0), np.tile(Y, (len(X), 1))


def from_dict(doc: dict) -> RunConfig:
    """Build and validate a run configuration from parsed TOML."""
    u = doc.get("units", {})
    try:
        units = Units(float(u.get("hbar", 1.0)), float(u.get("mass", 0.5)))
    except ValueError as exc:
        _fail("bad config", str(exc))
    m = doc.get("model", {})
    try:
        kind = ModelKind(m.get("kind", "Points1D"))
    except ValueError:
        _fail("bad config", f"unknown model kind {m.get('kind')!r}")
    centers = []
    for i, entry in enumerate(doc.get("centers", [])):
        try:
            centers.append((_support(entry, kind, i), _coupling(entry, i)))
        except (TypeError, ValueError) as exc:
            _fail("bad config", str(exc), (i,))
    periods = tuple(float(p) for p in m["periods"]) if "periods" in m else None
    radius = float(m["radius"]) if "radius" in m else None
    if kind is ModelKind.PointsRenormTorus2D and periods is None:
        periods = (1.0, 1.0)
    if kind is ModelKind.PointsRenormSphere2D and radius is None:
        radius = 1.0
    model = ModelConfig(kind, tuple(centers), units, periods, radius)
    report = validate(model)
    if not report.ok:
        raise ValidationError(report)

    energies = _energies(doc.get("energy", {}), units)
    X, Y = probe_pairs(doc.get("probes", {}), kind.point_dim)
    sp = doc.get("spectrum", {})
    bracket = tuple(float(b) for b in sp["bracket"]) if "bracket" in sp else None
    b = doc.get("bench", {})
    return RunConfig(model, energies, (X, Y), bracket, int(sp.get("grid", 512)),
                     float(sp.get("tol", 1e-10)), int(b.get("n_max", 256)), b.get("seed"))


def loads(text: str) -> RunConfig:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        _fail("bad config", f"TOML parse error: {exc}")
    return from_dict(doc)


def load(path) -> RunConfig:
    with open(path, "rb") as fh:
        data = fh.read()
    return loads(data.decode("utf-8"))
