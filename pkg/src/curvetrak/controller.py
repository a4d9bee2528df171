"""Gradient-free two-agent velocity law.

Each agent only uses the two shared field measurements and the relative
position of its partner. The velocity of agent ``i`` is decomposed in the
shared formation frame ``(q, n)``::

    v_iq = k1 * ((r_j - r_i) . q - d0_ij) + k2 * sgn((y_c - z_d) * (y1 - y2))
    v_in = C + a * y_i   if |y_c - z_d| < epsilon   else 0

with ``d0_12 = +d0`` and ``d0_21 = -d0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFrameError

__all__ = [
    "ControllerParams",
    "FormationFrame",
    "sgn",
    "formation_frame",
    "measure_center",
    "vel_q",
    "vel_n",
    "agent_velocities",
]

#: Minimum inter-agent distance for a well-defined frame.
MIN_SEPARATION = 1e-12


@dataclass(frozen=True)
class ControllerParams:
    k1: float
    k2: float
    C: float
    a: float
    epsilon: float
    d0: float
    z_d: float
    sgn_deadband: float = 0.0

    def __post_init__(self):
        for name in ("k1", "k2", "C", "a", "epsilon", "d0"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be a finite positive number, got {v!r}")
        if not math.isfinite(self.z_d):
            raise ValueError(f"z_d must be finite, got {self.z_d!r}")
        if not (0 <= self.sgn_deadband < self.epsilon):
            raise ValueError(
                f"sgn_deadband must satisfy 0 <= deadband < epsilon, got {self.sgn_deadband!r}")


@dataclass(frozen=True)
class FormationFrame:
    """Right-handed body frame: ``q`` from agent 1 to agent 2, ``n`` = ``q`` turned +90 deg."""

    q: np.ndarray
    n: np.ndarray


def sgn(x: float, deadband: float = 0.0) -> int:
    if x > deadband:
        return 1
    if x < -deadband:
        return -1
    return 0


def formation_frame(r1, r2) -> FormationFrame:
    dx = float(r2[0]) - float(r1[0])
    dy = float(r2[1]) - float(r1[1])
    s = math.sqrt(dx * dx + dy * dy)
    if not s > MIN_SEPARATION:
        raise DegenerateFrameError(f"agents coincide at {tuple(r1)!r}; formation frame undefined")
    qx, qy = dx / s, dy / s
    return FormationFrame(np.array([qx, qy]), np.array([-qy, qx]))


def measure_center(y1: float, y2: float) -> float:
    return (y1 + y2) / 2.0


def vel_q(i: int, r1, r2, y1: float, y2: float, params: ControllerParams) -> float:
    """Velocity component of agent ``i`` (1 or 2) along ``q``."""
    if i not in (1, 2):
        raise ValueError(f"agent index must be 1 or 2, got {i!r}")
    frame = formation_frame(r1, r2)
    ri, rj = (r1, r2) if i == 1 else (r2, r1)
    d0_ij = params.d0 if i == 1 else -params.d0
    rel = (float(rj[0]) - float(ri[0])) * frame.q[0] + (float(rj[1]) - float(ri[1])) * frame.q[1]
    yc = measure_center(y1, y2)
    drive = params.k2 * sgn((yc - params.z_d) * (y1 - y2), params.sgn_deadband)
    return params.k1 * (rel - d0_ij) + drive


def vel_n(y_i: float, y_c: float, params: ControllerParams) -> float:
    """Forward speed; zero outside the open band ``|y_c - z_d| < epsilon``."""
    if abs(y_c - params.z_d) < params.epsilon:
        return params.C + params.a * y_i
    return 0.0


def agent_velocities(r1, r2, y1: float, y2: float, params: ControllerParams):
    """Both agents' velocity vectors from one shared measurement snapshot."""
    frame = formation_frame(r1, r2)
    yc = measure_center(y1, y2)
    v1 = vel_q(1, r1, r2, y1, y2, params) * frame.q + vel_n(y1, yc, params) * frame.n
    v2 = vel_q(2, r1, r2, y1, y2, params) * frame.q + vel_n(y2, yc, params) * frame.n
    return v1, v2
