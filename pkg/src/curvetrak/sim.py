"""Measurement model, initial placement and fixed-step integration.

``run`` drives the compiled (or pure-Python) kernel for the inner loop and
then computes the per-step diagnostics in one vectorised pass. ``step`` is
the same update expressed with the scalar controller API; iterating it
reproduces ``run`` bit for bit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Iterator, Optional, Union

import numpy as np

from . import _backend
from .analysis import DEFAULT_WINDOW, MonitorParams, RunSummary, convergence_metrics, diagnose
from .controller import ControllerParams, agent_velocities, formation_frame, measure_center
from .errors import CriticalPointError, DegenerateFrameError, DivergenceError
from .field import GRAD_FLOOR, FieldModel, compute_bounds, field_eval, field_grad

__all__ = [
    "RNG_ID",
    "Placement",
    "ExplicitInit",
    "SimConfig",
    "SimState",
    "TrajectoryRecord",
    "Trajectory",
    "make_rng",
    "measure",
    "place_agents",
    "initial_state",
    "step",
    "run",
    "CSV_COLUMNS",
]

RNG_ID = f"numpy.random.PCG64+standard_normal(ziggurat)/numpy-{np.__version__}"

SCHEMES = ("euler", "midpoint")

CSV_COLUMNS = (
    "step", "t", "r1x", "r1y", "r2x", "r2y", "rcx", "rcy", "y1", "y2", "yc", "zc_true",
    "sep", "gamma", "omega_meas", "omega_approx", "sigma", "alpha", "beta", "V",
    "lemma_ok", "theorem_ok", "gate_open",
)


@dataclass(frozen=True)
class Placement:
    """Place the pair symmetrically about ``center`` at angle ``gamma0`` to the level frame."""

    center: tuple[float, float]
    gamma0: float

    def __post_init__(self):
        if not (0.0 < self.gamma0 < math.pi / 2):
            raise ValueError(f"gamma0 must lie strictly inside (0, pi/2), got {self.gamma0!r}")


@dataclass(frozen=True)
class ExplicitInit:
    r1: tuple[float, float]
    r2: tuple[float, float]


@dataclass(frozen=True)
class SimConfig:
    field: FieldModel
    params: ControllerParams
    init: Union[Placement, ExplicitInit]
    dt: float = 0.01
    steps: int = 30000
    noise_sigma: float = 0.0
    seed: int = 0
    scheme: str = "euler"
    monitor: MonitorParams = dc_field(default_factory=MonitorParams)
    window: int = DEFAULT_WINDOW
    reference_point: Optional[tuple[float, float]] = None

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        if int(self.steps) != self.steps or self.steps < 1:
            raise ValueError(f"steps must be a positive integer, got {self.steps!r}")
        if not (math.isfinite(self.noise_sigma) and self.noise_sigma >= 0):
            raise ValueError(f"noise_sigma must be >= 0, got {self.noise_sigma!r}")
        if not (0 <= self.seed < 2**64):
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.window < 1:
            raise ValueError(f"window must be >= 1, got {self.window!r}")

    @property
    def reference(self) -> tuple[float, float]:
        return self.reference_point if self.reference_point is not None else self.field.reference_point


@dataclass(frozen=True)
class SimState:
    t: float
    r1: np.ndarray
    r2: np.ndarray
    y1: float = math.nan
    y2: float = math.nan
    v1: np.ndarray = dc_field(default_factory=lambda: np.zeros(2))
    v2: np.ndarray = dc_field(default_factory=lambda: np.zeros(2))


@dataclass(frozen=True)
class TrajectoryRecord:
    step: int
    t: float
    r1: np.ndarray
    r2: np.ndarray
    rc: np.ndarray
    y1: float
    y2: float
    yc: float
    zc_true: float
    separation: float
    gamma: float
    omega_measured: float
    omega_approx: float
    sigma_speed: float
    alpha: float
    beta: float
    V: float
    lemma_ok: Optional[bool]
    theorem_ok: bool
    gate_open: bool


class Trajectory:
    """Column store of per-step records.

    Integer indexing returns a :class:`TrajectoryRecord`; string indexing
    returns a whole column as a numpy array.
    """

    def __init__(self, columns: dict[str, np.ndarray], dt: float):
        self.columns = columns
        self.dt = dt

    def __len__(self) -> int:
        return int(self.columns["step"].size)

    def __getitem__(self, key):
        if isinstance(key, str):
            return self.columns[key]
        c = self.columns
        k = range(len(self))[key]
        lemma = int(c["lemma_ok"][k])
        return TrajectoryRecord(
            step=int(c["step"][k]), t=float(c["t"][k]),
            r1=c["r1"][k].copy(), r2=c["r2"][k].copy(), rc=c["rc"][k].copy(),
            y1=float(c["y1"][k]), y2=float(c["y2"][k]), yc=float(c["yc"][k]),
            zc_true=float(c["zc_true"][k]), separation=float(c["sep"][k]),
            gamma=float(c["gamma"][k]), omega_measured=float(c["omega_meas"][k]),
            omega_approx=float(c["omega_approx"][k]), sigma_speed=float(c["sigma"][k]),
            alpha=float(c["alpha"][k]), beta=float(c["beta"][k]), V=float(c["V"][k]),
            lemma_ok=None if lemma < 0 else bool(lemma),
            theorem_ok=bool(c["theorem_ok"][k]), gate_open=bool(c["gate_open"][k]),
        )

    def __iter__(self) -> Iterator[TrajectoryRecord]:
        for k in range(len(self)):
            yield self[k]

    def csv_rows(self) -> Iterator[list]:
        """Rows in :data:`CSV_COLUMNS` order (flags as ints, ``na`` for not applicable)."""
        c = self.columns
        flat = {
            "r1x": c["r1"][:, 0], "r1y": c["r1"][:, 1], "r2x": c["r2"][:, 0], "r2y": c["r2"][:, 1],
            "rcx": c["rc"][:, 0], "rcy": c["rc"][:, 1],
        }
        cols = [flat[name] if name in flat else c[name] for name in CSV_COLUMNS]
        for k in range(len(self)):
            yield [col[k] for col in cols]


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def measure(field: FieldModel, p, noise_sigma: float, rng: np.random.Generator) -> float:
    """Field value at ``p`` plus zero-mean Gaussian noise of std ``noise_sigma``."""
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be >= 0")
    z = field_eval(field, p)
    if noise_sigma == 0:
        return z
    return z + noise_sigma * rng.standard_normal()


def place_agents(field: FieldModel, center, d0: float, gamma0: float):
    """Symmetric pair about ``center`` whose frame makes angle ``gamma0`` with the level frame.

    Agent 1 ends up on the higher-field side for small ``d0``.
    """
    if not (0.0 < gamma0 < math.pi / 2):
        raise ValueError(f"gamma0 must lie strictly inside (0, pi/2), got {gamma0!r}")
    c = np.asarray(center, dtype=float)
    g = field_grad(field, c)
    gn = math.hypot(g[0], g[1])
    if gn <= GRAD_FLOOR:
        raise CriticalPointError(f"cannot orient placement at critical point {tuple(center)!r}")
    y0 = -g / gn
    x0 = np.array([-y0[1], y0[0]])
    q = math.sin(gamma0) * x0 + math.cos(gamma0) * y0
    return c - (d0 / 2.0) * q, c + (d0 / 2.0) * q


def initial_state(config: SimConfig) -> SimState:
    if isinstance(config.init, Placement):
        r1, r2 = place_agents(config.field, config.init.center, config.params.d0, config.init.gamma0)
    else:
        r1 = np.asarray(config.init.r1, dtype=float)
        r2 = np.asarray(config.init.r2, dtype=float)
    return SimState(0.0, r1, r2)


def _check_finite(*vals):
    for v in vals:
        if not np.all(np.isfinite(v)) or np.any(np.abs(v) > _backend._pykernel.COORD_LIMIT):
            raise DivergenceError(f"state left the finite range: {v!r}")


def step(state: SimState, config: SimConfig, rng: np.random.Generator) -> SimState:
    """Advance one step: measure, compute velocities from the shared snapshot, move."""
    f, p, dt = config.field, config.params, config.dt
    y1 = measure(f, state.r1, config.noise_sigma, rng)
    y2 = measure(f, state.r2, config.noise_sigma, rng)
    _check_finite(y1, y2)
    v1, v2 = agent_velocities(state.r1, state.r2, y1, y2, p)
    u1, u2 = v1, v2
    if config.scheme == "midpoint":
        h = dt / 2.0
        m1 = state.r1 + v1 * h
        m2 = state.r2 + v2 * h
        w1 = measure(f, m1, config.noise_sigma, rng)
        w2 = measure(f, m2, config.noise_sigma, rng)
        u1, u2 = agent_velocities(m1, m2, w1, w2, p)
    r1 = state.r1 + u1 * dt
    r2 = state.r2 + u2 * dt
    _check_finite(r1, r2)
    return SimState(state.t + dt, r1, r2, y1, y2, v1, v2)


def _kernel_field(field: FieldModel):
    if field.kind == "ellipse":
        return 0, (*field.center, *field.coeff), np.zeros((0, 3))
    if field.kind == "matyas":
        return 1, (0.0, 0.0, 0.0, 0.0), np.zeros((0, 3))
    return 2, (0.0, 0.0, 0.0, 0.0), np.array(field.terms, dtype=float).reshape(-1, 3)


def _draw_noise(config: SimConfig) -> np.ndarray:
    width = 4 if config.scheme == "midpoint" else 2
    if config.noise_sigma == 0:
        return np.zeros((0, width))
    return make_rng(config.seed).standard_normal((config.steps, width))


def kernel_args(config: SimConfig) -> tuple:
    """Positional arguments of the integration kernel for ``config``."""
    state = initial_state(config)
    kind, fpar, terms = _kernel_field(config.field)
    p = config.params
    par = (p.k1, p.k2, p.C, p.a, p.epsilon, p.d0, p.z_d, p.sgn_deadband)
    scheme = _backend.MIDPOINT if config.scheme == "midpoint" else _backend.EULER
    return (kind, fpar, terms, par, state.r1, state.r2, config.dt, config.steps,
            _draw_noise(config), config.noise_sigma, scheme)


def run(config: SimConfig) -> tuple[Trajectory, RunSummary]:
    """Simulate ``config.steps`` steps and summarise.

    Aborts (degenerate frame, divergence) are reported in the summary with
    the failing step index; the records before the failure are kept.
    """
    p = config.params
    out, done, status, _ = _backend.integrate(*kernel_args(config))

    traj = _build_trajectory(config, out)
    if len(traj):
        summary = convergence_metrics(traj, p, config.window, config.reference, config.dt)
    else:
        summary = RunSummary()
    summary.rng_id = RNG_ID
    summary.backend = _backend.BACKEND
    if status != _backend.OK:
        summary.aborted = True
        summary.abort_step = int(done)
        what = "degenerate formation frame (agents coincide)" if status == _backend.DEGENERATE \
            else "divergence (non-finite or out-of-range state)"
        summary.abort_reason = f"{what} at step {done}"
    bounds = compute_bounds(config.field)
    summary.extra.update({
        "bound_z_min": bounds.z_min, "bound_z_max": bounds.z_max,
        "bound_grad_min": bounds.grad_min, "bound_grad_max": bounds.grad_max,
        "bounds_estimated": bounds.estimated,
    })
    return traj, summary


def _build_trajectory(config: SimConfig, out: np.ndarray) -> Trajectory:
    n = out.shape[0]
    r1 = np.ascontiguousarray(out[:, 0:2])
    r2 = np.ascontiguousarray(out[:, 2:4])
    y1, y2 = out[:, 4].copy(), out[:, 5].copy()
    steps = np.arange(n)
    cols: dict[str, np.ndarray] = {
        "step": steps, "t": steps * config.dt, "r1": r1, "r2": r2, "y1": y1, "y2": y2,
        "v1q": out[:, 6].copy(), "v2q": out[:, 7].copy(),
        "v1n": out[:, 8].copy(), "v2n": out[:, 9].copy(),
    }
    cols.update(diagnose(config.field, config.params, config.monitor, r1, r2, y1, y2,
                         cols["v1n"], cols["v2n"]))
    return Trajectory(cols, config.dt)
