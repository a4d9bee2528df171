"""Convergence diagnostics for the two-agent tracker.

Everything here is observer-side instrumentation: the controller never sees
gradients or curvature. Geometry is always taken from the noise-free field.

Angle conventions
-----------------
The level frame at the formation center is ``y0 = -grad z / |grad z|`` (the
inward normal for bowl-shaped fields) and ``x0 = y0`` rotated +90 deg, which
gives clockwise traversal on the ellipse. The angle ``gamma`` between the
formation frame ``(q, n)`` and ``(y0, x0)`` satisfies::

    n.x0 = cos(gamma)   n.y0 = -sin(gamma)
    q.x0 = sin(gamma)   q.y0 =  cos(gamma)
"""
from __future__ import annotations

import math
from dataclasses import dataclass, asdict, field as dc_field
from typing import Any, Optional

import numpy as np

from .controller import ControllerParams, FormationFrame, sgn
from .errors import CriticalPointError, DegenerateFrameError, NoEquilibriumError
from .field import GRAD_FLOOR, FieldModel, _curvature, _gradient, _value, field_grad, level_curvature

__all__ = [
    "LevelFrame",
    "MonitorParams",
    "RunSummary",
    "level_frame",
    "gamma_angle",
    "alpha_beta",
    "center_speed",
    "omega_measured",
    "omega_approx",
    "lyapunov",
    "lyapunov_rate",
    "lemma_condition",
    "theorem_condition",
    "gamma_equilibrium",
    "annulus_contains",
    "diagnose",
    "convergence_metrics",
    "winding_angle",
]

DEFAULT_WINDOW = 100


@dataclass(frozen=True)
class LevelFrame:
    y0: np.ndarray
    x0: np.ndarray
    kappa: float


@dataclass(frozen=True)
class MonitorParams:
    """Constants for the angle lemma and gain-condition monitors."""

    b: float = 0.99
    z_max: Optional[float] = None

    def __post_init__(self):
        if not (0.0 < self.b < 1.0):
            raise ValueError(f"b must lie in (0, 1), got {self.b!r}")
        if self.z_max is not None and not math.isfinite(self.z_max):
            raise ValueError(f"z_max must be finite, got {self.z_max!r}")

    def resolved_z_max(self, params: ControllerParams) -> float:
        # Without an explicit bound, use the largest center value inside the annulus.
        return self.z_max if self.z_max is not None else params.z_d + params.epsilon


@dataclass
class RunSummary:
    converged: bool = False
    convergence_step: Optional[int] = None
    convergence_time: Optional[float] = None
    mean_abs_error_post: Optional[float] = None
    max_abs_error_post: Optional[float] = None
    loops_completed: float = 0.0
    arc_length_traveled: float = 0.0
    lemma_violations: int = 0
    lemma_not_applicable: int = 0
    theorem_violations: int = 0
    aborted: bool = False
    abort_reason: Optional[str] = None
    abort_step: Optional[int] = None
    steps_recorded: int = 0
    rng_id: str = ""
    backend: str = ""
    extra: dict[str, Any] = dc_field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        """Flat mapping suitable for JSON; ``extra`` keys are merged in."""
        d = asdict(self)
        extra = d.pop("extra")
        d.update(extra)
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "RunSummary":
        names = {f for f in cls.__dataclass_fields__ if f != "extra"}
        known = {k: v for k, v in d.items() if k in names}
        extra = {k: v for k, v in d.items() if k not in names}
        return cls(**known, extra=extra)


def _rot90(v):
    return np.array([-v[1], v[0]])


def level_frame(field: FieldModel, p) -> LevelFrame:
    g = field_grad(field, p)
    norm = math.hypot(g[0], g[1])
    if norm <= GRAD_FLOOR:
        raise CriticalPointError(f"level frame undefined at critical point {tuple(p)!r}")
    y0 = -g / norm
    return LevelFrame(y0, _rot90(y0), level_curvature(field, p))


def gamma_angle(frame: FormationFrame, lframe: LevelFrame) -> float:
    return math.atan2(float(frame.q @ lframe.x0), float(frame.n @ lframe.x0))


def alpha_beta(y1: float, y2: float, yc: float, params: ControllerParams):
    """Signum drive ``alpha`` and ungated forward speed ``beta`` of the center."""
    alpha = params.k2 * sgn((y1 - y2) * (yc - params.z_d), params.sgn_deadband)
    beta = params.C + params.a * yc
    return alpha, beta


def center_speed(alpha: float, beta: float) -> float:
    return math.sqrt(alpha * alpha + beta * beta)


def omega_measured(v1n: float, v2n: float, r1, r2) -> float:
    """Angular rate of the pair from the difference in forward speeds."""
    s = math.hypot(float(r2[0]) - float(r1[0]), float(r2[1]) - float(r1[1]))
    if not s > 0:
        raise DegenerateFrameError("angular rate undefined for coincident agents")
    return (v2n - v1n) / s


def omega_approx(field: FieldModel, rc, frame: FormationFrame, a: float) -> float:
    lf = level_frame(field, rc)
    g = field_grad(field, rc)
    return -a * math.hypot(g[0], g[1]) * math.cos(gamma_angle(frame, lf))


def lyapunov(zc: float, z_d: float) -> float:
    return 0.5 * (zc - z_d) ** 2


def lyapunov_rate(field: FieldModel, rc, alpha: float, beta: float, frame: FormationFrame,
                  z_d: float) -> float:
    """Closed-form ``dV/dt`` for ``V = (z_c - z_d)^2 / 2`` with the center moving at ``alpha q + beta n``."""
    lf = level_frame(field, rc)
    g = field_grad(field, rc)
    gamma = gamma_angle(frame, lf)
    zc = float(_value(field, float(rc[0]), float(rc[1])))
    return -(zc - z_d) * math.hypot(g[0], g[1]) * (alpha * math.cos(gamma) - beta * math.sin(gamma))


def lemma_condition(sigma: float, grad_norm: float, kappa: float, a: float,
                    m: MonitorParams) -> Optional[bool]:
    """Speed condition of the angle lemma; ``None`` when ``kappa <= 0`` (not applicable)."""
    if not kappa > 0:
        return None
    return sigma > a * grad_norm * m.b / kappa


def theorem_condition(params: ControllerParams, m: MonitorParams) -> bool:
    """Gain condition ``C + a z_max < k2 b / sqrt(1 - b^2)``."""
    if not (0.0 < m.b < 1.0):
        raise ValueError(f"b must lie in (0, 1), got {m.b!r}")
    z_max = m.resolved_z_max(params)
    return params.C + params.a * z_max < params.k2 * m.b / math.sqrt(1.0 - m.b * m.b)


def gamma_equilibrium(kappa: float, sigma: float, grad_norm: float, a: float) -> Optional[float]:
    """Angle at which the modelled gamma rate vanishes.

    Returns ``None`` when the ratio is negative (not applicable) and raises
    :class:`NoEquilibriumError` when it exceeds 1.
    """
    ratio = kappa * sigma / (a * grad_norm)
    if ratio < 0:
        return None
    if ratio > 1:
        raise NoEquilibriumError(f"ratio {ratio:.6g} > 1: gamma rate is negative everywhere")
    return math.acos(ratio)


def annulus_contains(zc: float, z_d: float, epsilon: float) -> bool:
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    return abs(zc - z_d) <= epsilon


def winding_angle(x, y, reference) -> float:
    """Total signed angle swept by the points about ``reference``."""
    x = np.asarray(x, dtype=float)
    if x.size < 2:
        return 0.0
    ang = np.unwrap(np.arctan2(np.asarray(y) - reference[1], x - reference[0]))
    return float(ang[-1] - ang[0])


def diagnose(field: FieldModel, params: ControllerParams, monitor: MonitorParams,
             r1: np.ndarray, r2: np.ndarray, y1: np.ndarray, y2: np.ndarray,
             v1n: np.ndarray, v2n: np.ndarray) -> dict[str, np.ndarray]:
    """Vectorised per-step diagnostics for a recorded trajectory.

    ``r1`` and ``r2`` have shape ``(N, 2)``; the rest are length ``N``.
    Returns a mapping of column name to array. States whose center sits on a
    critical point get NaN geometry.
    """
    rc = 0.5 * (r1 + r2)
    d = r2 - r1
    sep = np.sqrt(d[:, 0] * d[:, 0] + d[:, 1] * d[:, 1])
    qx, qy = d[:, 0] / sep, d[:, 1] / sep
    nx, ny = -qy, qx
    yc = (y1 + y2) / 2.0
    zc = _value(field, rc[:, 0], rc[:, 1])

    gx, gy = _gradient(field, rc[:, 0], rc[:, 1])
    gnorm = np.hypot(gx, gy)
    ok = gnorm > GRAD_FLOOR
    with np.errstate(invalid="ignore", divide="ignore"):
        y0x = np.where(ok, -gx / gnorm, np.nan)
        y0y = np.where(ok, -gy / gnorm, np.nan)
        kappa = np.where(ok, _curvature(field, rc[:, 0], rc[:, 1]), np.nan)
    x0x, x0y = -y0y, y0x
    gamma = np.arctan2(qx * x0x + qy * x0y, nx * x0x + ny * x0y)

    p = (y1 - y2) * (yc - params.z_d)
    db = params.sgn_deadband
    alpha = params.k2 * np.where(p > db, 1.0, np.where(p < -db, -1.0, 0.0))
    beta = params.C + params.a * yc
    sigma = np.sqrt(alpha * alpha + beta * beta)

    omega_meas = (v2n - v1n) / sep
    omega_apx = -params.a * gnorm * np.cos(gamma)
    V = 0.5 * (zc - params.z_d) ** 2
    vdot = -(zc - params.z_d) * gnorm * (alpha * np.cos(gamma) - beta * np.sin(gamma))

    with np.errstate(invalid="ignore", divide="ignore"):
        lemma = np.where(kappa > 0, sigma > params.a * gnorm * monitor.b / kappa, False)
    lemma_ok = np.where(kappa > 0, lemma.astype(np.int8), np.int8(-1)).astype(np.int8)
    gain_rhs = params.k2 * monitor.b / math.sqrt(1.0 - monitor.b * monitor.b)
    theorem_ok = (params.C + params.a * zc < gain_rhs).astype(np.int8)
    gate_open = (np.abs(yc - params.z_d) < params.epsilon).astype(np.int8)

    return {
        "rc": rc, "yc": yc, "zc_true": zc, "sep": sep, "gamma": gamma,
        "omega_meas": omega_meas, "omega_approx": omega_apx, "sigma": sigma,
        "alpha": alpha, "beta": beta, "V": V, "lemma_ok": lemma_ok,
        "theorem_ok": theorem_ok, "gate_open": gate_open,
        "grad_norm": gnorm, "kappa": kappa, "vdot": vdot, "q": np.stack([qx, qy], axis=1),
    }


def convergence_metrics(traj, params: ControllerParams, window: int = DEFAULT_WINDOW,
                        reference_point=None, dt: Optional[float] = None) -> RunSummary:
    """Summarise a trajectory.

    ``traj`` is any mapping of column names to arrays (a
    :class:`~curvetrak.sim.Trajectory` qualifies). The run counts as converged
    at the first record with ``|y_c - z_d| < epsilon`` whose following
    ``window`` records (or all remaining ones near the end) stay within
    ``2 * epsilon``.
    """
    yc = np.asarray(traj["yc"], dtype=float)
    n = yc.size
    if n == 0:
        raise ValueError("empty trajectory")
    t = np.asarray(traj["t"], dtype=float)
    if dt is None:
        dt = float(t[1] - t[0]) if n > 1 else 0.0
    err = np.abs(yc - params.z_d)
    summary = RunSummary(steps_recorded=n)

    entered = np.flatnonzero(err < params.epsilon)
    bad = np.flatnonzero(~(err < 2.0 * params.epsilon))
    if entered.size:
        # sentinel past the end: a window truncated by the end of the run still counts
        padded = np.append(bad, n + window + 1)
        next_bad = padded[np.searchsorted(bad, entered, side="right")]
        hits = entered[next_bad > entered + window]
        if hits.size:
            k = int(hits[0])
            summary.converged = True
            summary.convergence_step = k
            summary.convergence_time = float(t[k])
            post = err[k:]
            summary.mean_abs_error_post = float(post.mean())
            summary.max_abs_error_post = float(post.max())

    if reference_point is not None:
        rc = np.asarray(traj["rc"], dtype=float)
        summary.loops_completed = abs(winding_angle(rc[:, 0], rc[:, 1], reference_point)) / (2 * math.pi)
    summary.arc_length_traveled = float(np.sum(np.asarray(traj["sigma"], dtype=float)) * dt)
    lemma = np.asarray(traj["lemma_ok"])
    summary.lemma_violations = int(np.count_nonzero(lemma == 0))
    summary.lemma_not_applicable = int(np.count_nonzero(lemma < 0))
    summary.theorem_violations = int(np.count_nonzero(np.asarray(traj["theorem_ok"]) == 0))
    return summary
