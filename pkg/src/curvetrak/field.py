"""Analytic planar scalar fields with exact first and second derivatives.

Three field families are supported:

``ellipse``
    ``z = cx * (x - x0)**2 + cy * (y - y0)**2``
``matyas``
    ``z = 0.26 * (x**2 + y**2) - 0.48 * x * y``
``polynomial``
    ``z = sum(c * x**i * y**j)`` over ``(i, j, c)`` terms, total degree <= 6.

All evaluation helpers accept either Python floats or numpy arrays for the
coordinates, so the same code path serves the scalar API and the vectorised
trajectory diagnostics.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Any, Sequence

import numpy as np

from .errors import CriticalPointError, FieldError

__all__ = [
    "GRAD_FLOOR",
    "MAX_DEGREE",
    "FieldModel",
    "FieldBounds",
    "field_eval",
    "field_grad",
    "field_grad_fd",
    "field_hessian",
    "level_curvature",
    "compute_bounds",
]

#: Below this gradient norm, curvature and unit-normal operations refuse.
GRAD_FLOOR = 1e-9
MAX_DEGREE = 6

KINDS = ("ellipse", "matyas", "polynomial")

Box = tuple[tuple[float, float], tuple[float, float]]


def _default_box(kind: str, center: tuple[float, float]) -> Box:
    if kind == "ellipse":
        return ((center[0] - 30.0, center[0] + 30.0), (center[1] - 30.0, center[1] + 30.0))
    if kind == "matyas":
        return ((-12.0, 12.0), (-12.0, 12.0))
    return ((-5.0, 5.0), (-5.0, 5.0))


@dataclass(frozen=True)
class FieldModel:
    """An immutable analytic scalar field.

    Use the :meth:`ellipse`, :meth:`matyas` and :meth:`polynomial`
    constructors rather than filling the fields by hand.
    """

    kind: str
    center: tuple[float, float] = (0.0, 0.0)
    coeff: tuple[float, float] = (1.0, 1.0)
    terms: tuple[tuple[int, int, float], ...] = ()
    domain_box: Box = dc_field(default=((-5.0, 5.0), (-5.0, 5.0)))

    def __post_init__(self):
        if self.kind not in KINDS:
            raise FieldError(f"unknown field kind {self.kind!r}")
        (x0, x1), (y0, y1) = self.domain_box
        if not all(math.isfinite(v) for v in (x0, x1, y0, y1)) or x0 >= x1 or y0 >= y1:
            raise FieldError(f"invalid domain_box {self.domain_box!r}")
        if self.kind == "ellipse":
            if not all(math.isfinite(v) for v in (*self.center, *self.coeff)):
                raise FieldError("ellipse center and coefficients must be finite")
        if self.kind == "polynomial":
            if not self.terms:
                raise FieldError("polynomial field needs at least one term")
            for i, j, c in self.terms:
                if i < 0 or j < 0 or i + j > MAX_DEGREE:
                    raise FieldError(f"monomial x^{i} y^{j} outside degree cap {MAX_DEGREE}")
                if not math.isfinite(c):
                    raise FieldError("polynomial coefficients must be finite")

    @classmethod
    def ellipse(cls, center=(20.0, 20.0), coeff_x=1.0, coeff_y=8.0, domain_box=None) -> "FieldModel":
        center = (float(center[0]), float(center[1]))
        box = domain_box or _default_box("ellipse", center)
        return cls("ellipse", center=center, coeff=(float(coeff_x), float(coeff_y)),
                   domain_box=_as_box(box))

    @classmethod
    def matyas(cls, domain_box=None) -> "FieldModel":
        return cls("matyas", domain_box=_as_box(domain_box or _default_box("matyas", (0.0, 0.0))))

    @classmethod
    def polynomial(cls, terms: Sequence[Sequence[float]], domain_box=None) -> "FieldModel":
        norm = []
        for t in terms:
            if len(t) != 3:
                raise FieldError(f"polynomial term must be [i, j, c], got {t!r}")
            i, j, c = t
            if int(i) != i or int(j) != j:
                raise FieldError(f"monomial exponents must be integers, got {t!r}")
            norm.append((int(i), int(j), float(c)))
        return cls("polynomial", terms=tuple(norm),
                   domain_box=_as_box(domain_box or _default_box("polynomial", (0.0, 0.0))))

    @classmethod
    def from_spec(cls, spec: dict[str, Any]) -> "FieldModel":
        """Build a field from its JSON configuration object."""
        if not isinstance(spec, dict) or "kind" not in spec:
            raise FieldError("field spec must be an object with a 'kind' key")
        kind = spec["kind"]
        box = spec.get("domain_box")
        if kind == "ellipse":
            coeff = spec.get("coeff", [1.0, 8.0])
            return cls.ellipse(spec.get("center", [20.0, 20.0]), coeff[0], coeff[1], box)
        if kind == "matyas":
            return cls.matyas(box)
        if kind == "polynomial":
            if "terms" not in spec:
                raise FieldError("polynomial field spec requires 'terms'")
            return cls.polynomial(spec["terms"], box)
        raise FieldError(f"unknown field kind {kind!r}")

    def to_spec(self) -> dict[str, Any]:
        spec: dict[str, Any] = {"kind": self.kind}
        if self.kind == "ellipse":
            spec["center"] = list(self.center)
            spec["coeff"] = list(self.coeff)
        elif self.kind == "polynomial":
            spec["terms"] = [list(t) for t in self.terms]
        spec["domain_box"] = [list(self.domain_box[0]), list(self.domain_box[1])]
        return spec

    @property
    def reference_point(self) -> tuple[float, float]:
        """Interior critical point used as the default winding reference."""
        if self.kind == "ellipse":
            return self.center
        return (0.0, 0.0)


@dataclass(frozen=True)
class FieldBounds:
    """Sampled estimate of the value and gradient-norm range over a box."""

    z_min: float
    z_max: float
    grad_min: float
    grad_max: float
    box: Box
    estimated: bool = True


def _as_box(box) -> Box:
    try:
        (x0, x1), (y0, y1) = box
    except (TypeError, ValueError):
        raise FieldError(f"domain_box must be [[xmin, xmax], [ymin, ymax]], got {box!r}") from None
    return ((float(x0), float(x1)), (float(y0), float(y1)))


def _check_point(p) -> tuple[float, float]:
    try:
        x, y = p
        x = float(x)
        y = float(y)
    except (TypeError, ValueError):
        raise FieldError(f"expected a 2-D point, got {p!r}") from None
    if not (math.isfinite(x) and math.isfinite(y)):
        raise FieldError(f"non-finite evaluation point {p!r}")
    return x, y


# Kernels below work elementwise on floats or numpy arrays.

def _value(f: FieldModel, x, y):
    if f.kind == "ellipse":
        dx = x - f.center[0]
        dy = y - f.center[1]
        return f.coeff[0] * dx * dx + f.coeff[1] * dy * dy
    if f.kind == "matyas":
        return 0.26 * (x * x + y * y) - 0.48 * x * y
    out = 0.0 * x
    for i, j, c in f.terms:
        out = out + c * x**i * y**j
    return out


def _gradient(f: FieldModel, x, y):
    if f.kind == "ellipse":
        return 2.0 * f.coeff[0] * (x - f.center[0]), 2.0 * f.coeff[1] * (y - f.center[1])
    if f.kind == "matyas":
        return 0.52 * x - 0.48 * y, 0.52 * y - 0.48 * x
    gx = 0.0 * x
    gy = 0.0 * y
    for i, j, c in f.terms:
        if i:
            gx = gx + c * i * x ** (i - 1) * y**j
        if j:
            gy = gy + c * j * x**i * y ** (j - 1)
    return gx, gy


def _hessian(f: FieldModel, x, y):
    if f.kind == "ellipse":
        zero = 0.0 * x
        return 2.0 * f.coeff[0] + zero, zero, 2.0 * f.coeff[1] + zero
    if f.kind == "matyas":
        zero = 0.0 * x
        return 0.52 + zero, -0.48 + zero, 0.52 + zero
    hxx = 0.0 * x
    hxy = 0.0 * x
    hyy = 0.0 * x
    for i, j, c in f.terms:
        if i >= 2:
            hxx = hxx + c * i * (i - 1) * x ** (i - 2) * y**j
        if i and j:
            hxy = hxy + c * i * j * x ** (i - 1) * y ** (j - 1)
        if j >= 2:
            hyy = hyy + c * j * (j - 1) * x**i * y ** (j - 2)
    return hxx, hxy, hyy


def _curvature(f: FieldModel, x, y):
    gx, gy = _gradient(f, x, y)
    hxx, hxy, hyy = _hessian(f, x, y)
    g2 = gx * gx + gy * gy
    return (hxx * gy * gy - 2.0 * hxy * gx * gy + hyy * gx * gx) / (g2 * np.sqrt(g2))


def field_eval(field: FieldModel, p) -> float:
    """Exact field value at ``p``."""
    x, y = _check_point(p)
    return float(_value(field, x, y))


def field_grad(field: FieldModel, p) -> np.ndarray:
    """Exact gradient at ``p``. Critical points are valid input."""
    x, y = _check_point(p)
    gx, gy = _gradient(field, x, y)
    return np.array([gx, gy], dtype=float)


def field_grad_fd(field: FieldModel, p, h: float) -> np.ndarray:
    """Central-difference gradient with step ``h``; independent of :func:`field_grad`."""
    if not h > 0:
        raise FieldError(f"finite-difference step must be positive, got {h!r}")
    x, y = _check_point(p)
    z = lambda u, v: _value(field, u, v)  # noqa: E731
    return np.array([
        (z(x + h, y) - z(x - h, y)) / (2.0 * h),
        (z(x, y + h) - z(x, y - h)) / (2.0 * h),
    ])


def field_hessian(field: FieldModel, p) -> np.ndarray:
    x, y = _check_point(p)
    hxx, hxy, hyy = _hessian(field, x, y)
    return np.array([[hxx, hxy], [hxy, hyy]], dtype=float)


def level_curvature(field: FieldModel, p) -> float:
    """Signed curvature of the level curve through ``p``.

    Positive on convex level sets of bowl-shaped fields, e.g. 0.8 for the
    ellipse ``(x-20)^2 + 8(y-20)^2`` at (30, 20).
    """
    x, y = _check_point(p)
    gx, gy = _gradient(field, x, y)
    if math.hypot(gx, gy) <= GRAD_FLOOR:
        raise CriticalPointError(f"curvature undefined at critical point {p!r}")
    return float(_curvature(field, x, y))


def compute_bounds(field: FieldModel, n: int = 201) -> FieldBounds:
    """Estimate value and gradient-norm bounds on a dense ``n x n`` grid.

    The grid spans the domain box including its corners. This is a sampled
    estimate, not a certified bound.
    """
    (x0, x1), (y0, y1) = field.domain_box
    xs, ys = np.meshgrid(np.linspace(x0, x1, n), np.linspace(y0, y1, n))
    z = _value(field, xs, ys)
    gx, gy = _gradient(field, xs, ys)
    g = np.hypot(gx, gy)
    return FieldBounds(float(z.min()), float(z.max()), float(g.min()), float(g.max()),
                       field.domain_box)
