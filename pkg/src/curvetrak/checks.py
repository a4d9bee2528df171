"""Numerical self-checks shared by ``curvetrak validate`` and the test suite.

Each check returns a :class:`CheckResult`; none of them raise on failure.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import field as fieldmod
from .analysis import (MonitorParams, gamma_angle, level_frame, lyapunov_rate, theorem_condition,
                       winding_angle)
from .controller import ControllerParams, FormationFrame, formation_frame
from .field import FieldModel
from .sim import ExplicitInit, Placement, SimConfig, place_agents, run


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


# Reproduction set-ups --------------------------------------------------------

ELLIPSE_PARAMS = ControllerParams(k1=1.0, k2=0.9, C=1.0, a=0.01, epsilon=2.0, d0=1.0, z_d=500.0)
MATYAS_PARAMS = ControllerParams(k1=1.0, k2=0.99, C=1.0, a=1.0, epsilon=0.01, d0=0.2, z_d=2.0)
CUBIC_FIELD_TERMS = ((2, 0, 1.0), (0, 2, 1.0), (3, 0, 0.1))
CUBIC_PARAMS = ControllerParams(k1=1.0, k2=0.9, C=1.0, a=0.5, epsilon=0.05, d0=0.4, z_d=4.0)


def ellipse_config(noise_sigma: float = 0.0, seed: int = 0, **kw) -> SimConfig:
    kw = {"dt": 0.01, "steps": 30000, "monitor": MonitorParams(0.99, 502.0), **kw}
    return SimConfig(FieldModel.ellipse(), ELLIPSE_PARAMS, Placement((32.0, 20.0), math.pi / 4),
                     noise_sigma=noise_sigma, seed=seed, **kw)


def matyas_config(noise_sigma: float = 0.0, seed: int = 0, **kw) -> SimConfig:
    kw = {"dt": 0.01, "steps": 30000, "monitor": MonitorParams(0.99, 2.01), **kw}
    return SimConfig(FieldModel.matyas(), MATYAS_PARAMS, Placement((1.0, 1.0), math.pi / 4),
                     noise_sigma=noise_sigma, seed=seed, **kw)


def cubic_config(d0: float = CUBIC_PARAMS.d0, **kw) -> SimConfig:
    p = CUBIC_PARAMS
    params = ControllerParams(p.k1, p.k2, p.C, p.a, p.epsilon, d0, p.z_d)
    return SimConfig(FieldModel.polynomial(CUBIC_FIELD_TERMS), params,
                     Placement((1.0, 0.5), math.pi / 4), **{"dt": 0.01, "steps": 6000, **kw})


def random_polynomial(rng: np.random.Generator, max_degree: int = 4, n_terms: int = 6) -> FieldModel:
    terms = []
    for _ in range(n_terms):
        i = int(rng.integers(0, max_degree + 1))
        j = int(rng.integers(0, max_degree - i + 1))
        terms.append((i, j, float(rng.uniform(-1.0, 1.0))))
    return FieldModel.polynomial(terms, domain_box=((-3.0, 3.0), (-3.0, 3.0)))


def _sample_box(field: FieldModel, n: int, rng: np.random.Generator) -> np.ndarray:
    (x0, x1), (y0, y1) = field.domain_box
    return np.column_stack([rng.uniform(x0, x1, n), rng.uniform(y0, y1, n)])


# Field derivative oracles ------------------------------------------------------

def check_gradient_oracle(field: FieldModel, label: str, n: int = 1000, h: float = 1e-5,
                          tol: float = 1e-6, seed: int = 1) -> CheckResult:
    """Analytic gradient vs central differences; error relative to max(|grad|, 1)."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for p in _sample_box(field, n, rng):
        g = fieldmod.field_grad(field, p)
        fd = fieldmod.field_grad_fd(field, p, h)
        worst = max(worst, float(np.linalg.norm(g - fd) / max(np.linalg.norm(g), 1.0)))
    return CheckResult(f"gradient oracle [{label}]", worst < tol,
                       f"max relative deviation {worst:.3e} (tol {tol:g}, {n} points)")


def check_hessian_oracle(field: FieldModel, label: str, n: int = 200, h: float = 1e-5,
                         tol: float = 1e-5, seed: int = 2) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    asym = 0.0
    for p in _sample_box(field, n, rng):
        H = fieldmod.field_hessian(field, p)
        asym = max(asym, abs(H[0, 1] - H[1, 0]))
        jac = np.column_stack([
            (fieldmod.field_grad(field, p + [h, 0]) - fieldmod.field_grad(field, p - [h, 0])) / (2 * h),
            (fieldmod.field_grad(field, p + [0, h]) - fieldmod.field_grad(field, p - [0, h])) / (2 * h),
        ])
        worst = max(worst, float(np.abs(H - jac).max()))
    return CheckResult(f"hessian oracle [{label}]", worst < tol and asym == 0.0,
                       f"max abs deviation {worst:.3e} (tol {tol:g}), asymmetry {asym:g}")


def check_circle_curvature(n: int = 50, tol: float = 1e-9, seed: int = 3) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        c = rng.uniform(-5, 5, 2)
        radius = rng.uniform(0.1, 20)
        th = rng.uniform(0, 2 * math.pi)
        f = FieldModel.polynomial([(2, 0, 1), (0, 2, 1), (1, 0, -2 * c[0]), (0, 1, -2 * c[1]),
                                   (0, 0, c[0] ** 2 + c[1] ** 2)])
        p = c + radius * np.array([math.cos(th), math.sin(th)])
        k = fieldmod.level_curvature(f, p)
        worst = max(worst, abs(k * radius - 1.0))
    return CheckResult("circle curvature = 1/radius", worst < tol, f"max relative error {worst:.3e}")


# Controller geometry -------------------------------------------------------------

def check_frame_identities(n: int = 2000, seed: int = 4) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        r1 = rng.uniform(-100, 100, 2)
        r2 = r1 + rng.normal(size=2) * 10 ** rng.uniform(-6, 2)
        fr = formation_frame(r1, r2)
        q, nn = fr.q, fr.n
        worst = max(worst, abs(q @ q - 1), abs(nn @ nn - 1), abs(q @ nn),
                    abs(q[0] * nn[1] - q[1] * nn[0] - 1))
    return CheckResult("formation frame orthonormal, right-handed", worst < 1e-12,
                       f"max identity residual {worst:.3e}")


# Simulation-level checks -----------------------------------------------------------

def check_separation_law(n_configs: int = 20, seed: int = 5, steps: int = 3000) -> CheckResult:
    """|s(t) - d0| <= |s(0) - d0| exp(-2 k1 t) + 10 k2 dt at every step of random noise-free runs."""
    rng = np.random.default_rng(seed)
    worst = -math.inf
    failures = 0
    for i in range(n_configs):
        if i % 2 == 0:
            f = FieldModel.ellipse()
            base = ELLIPSE_PARAMS
            c = np.array([20.0, 20.0]) + rng.uniform(-15, 15, 2)
        else:
            f = FieldModel.matyas()
            base = MATYAS_PARAMS
            c = rng.uniform(-6, 6, 2)
        params = ControllerParams(k1=float(rng.uniform(0.3, 2.0)), k2=float(rng.uniform(0.3, 1.0)),
                                  C=base.C, a=base.a, epsilon=base.epsilon,
                                  d0=float(rng.uniform(0.2, 2.0)), z_d=base.z_d)
        s0 = params.d0 * float(rng.uniform(0.1, 4.0))
        th = rng.uniform(0, 2 * math.pi)
        q = np.array([math.cos(th), math.sin(th)])
        cfg = SimConfig(f, params, ExplicitInit(tuple(c - s0 / 2 * q), tuple(c + s0 / 2 * q)),
                        dt=0.01, steps=steps)
        traj, summ = run(cfg)
        if summ.aborted:
            failures += 1
            continue
        s = traj["sep"]
        t = traj["t"]
        bound = abs(s[0] - params.d0) * np.exp(-2 * params.k1 * t) + 10 * params.k2 * cfg.dt
        excess = float(np.max(np.abs(s - params.d0) - bound))
        worst = max(worst, excess)
        if excess > 0:
            failures += 1
    return CheckResult("separation law (20 random configs)", failures == 0,
                       f"{failures} failing configs; max excess over bound {worst:.3e}")


def check_omega_exactness(traj, a: float) -> CheckResult:
    """On a quadratic field the measured rate equals -a |grad z_c| (y0 . q) (gate-open steps)."""
    gate = traj["gate_open"].astype(bool)
    meas = traj["omega_meas"][gate]
    model = traj["omega_approx"][gate]
    scale = np.maximum(1.0, np.abs(meas))
    worst = float(np.max(np.abs(meas - model) / scale)) if meas.size else math.inf
    return CheckResult("omega exactness on quadratic field", worst < 1e-9,
                       f"max scaled residual {worst:.3e} over {meas.size} gate-open steps")


def omega_order_ratios(field: FieldModel, states, d0: float, a: float) -> np.ndarray:
    """Ratio err(d0) / err(d0/2) of the measured-vs-modelled angular rate at each state."""
    ratios = []
    for rc, q in states:
        errs = []
        for d in (d0, d0 / 2):
            r1 = rc - d / 2 * q
            r2 = rc + d / 2 * q
            z1 = fieldmod.field_eval(field, r1)
            z2 = fieldmod.field_eval(field, r2)
            meas = a * (z2 - z1) / math.hypot(*(r2 - r1))
            g = fieldmod.field_grad(field, rc)
            y0 = -g / np.linalg.norm(g)
            errs.append(abs(meas - (-a * np.linalg.norm(g) * float(y0 @ q))))
        ratios.append(errs[0] / errs[1])
    return np.asarray(ratios)


def check_omega_order(n_states: int = 100) -> CheckResult:
    cfg = cubic_config()
    traj, _ = run(cfg)
    idx = np.linspace(len(traj) // 10, len(traj) - 1, n_states).astype(int)
    states = [(traj["rc"][k], traj["q"][k]) for k in idx]
    ratios = omega_order_ratios(cfg.field, states, cfg.params.d0, cfg.params.a)
    mean = float(np.mean(ratios))
    return CheckResult("omega approximation order O(d0^2)", 3.5 <= mean <= 4.5,
                       f"mean err(d0)/err(d0/2) = {mean:.4f} over {ratios.size} states")


def check_lyapunov_descent(traj, params: ControllerParams, monitor: MonitorParams,
                           min_states: int = 100) -> CheckResult:
    eps = params.epsilon
    dev = np.abs(traj["zc_true"] - params.z_d)
    mask = (dev >= 0.95 * eps) & (dev <= 1.05 * eps) & (np.cos(traj["gamma"]) > monitor.b)
    gain = theorem_condition(params, monitor)
    n = int(mask.sum())
    worst = float(np.max(traj["vdot"][mask])) if n else math.nan
    ok = gain and n >= min_states and worst < 0
    return CheckResult("Lyapunov descent at annulus boundary", ok,
                       f"{n} qualifying states (need {min_states}), gain condition {gain}, max dV/dt {worst:.4g}")


def check_lyapunov_descent_sampled(field: FieldModel, params: ControllerParams, monitor: MonitorParams,
                                   n: int = 400, seed: int = 6) -> CheckResult:
    """Closed-form dV/dt at sampled states on both annulus boundaries.

    States satisfy the descent premise: heading within ``arccos b`` of the
    level tangent and signum drive pointing the right way,
    ``alpha = k2 sgn(z_c - z_d)``, with ``beta = C + a z_c``.
    """
    rng = np.random.default_rng(seed)
    gain = theorem_condition(params, monitor)
    (x0, x1), (y0, y1) = field.domain_box
    g_max = math.acos(monitor.b)
    rates, tested = [], 0
    for side in (-1.0, 1.0):
        level = params.z_d + side * params.epsilon
        for _ in range(n // 2):
            # march a random ray from the reference point out to the level
            th = rng.uniform(0, 2 * math.pi)
            ref = np.asarray(field.reference_point, float)
            d = np.array([math.cos(th), math.sin(th)])
            lo, hi = 0.0, 1.0
            while fieldmod.field_eval(field, ref + hi * d) < level and hi < 1e6:
                hi *= 2
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                lo, hi = (mid, hi) if fieldmod.field_eval(field, ref + mid * d) < level else (lo, mid)
            rc = ref + hi * d
            if not (x0 <= rc[0] <= x1 and y0 <= rc[1] <= y1):
                continue
            lf = level_frame(field, rc)
            g = rng.uniform(-g_max, g_max) * 0.999
            q = math.sin(g) * lf.x0 + math.cos(g) * lf.y0
            frame = FormationFrame(q, np.array([-q[1], q[0]]))
            if math.cos(gamma_angle(frame, lf)) <= monitor.b:
                continue
            zc = fieldmod.field_eval(field, rc)
            alpha = params.k2 * math.copysign(1.0, zc - params.z_d)
            beta = params.C + params.a * zc
            rates.append(lyapunov_rate(field, rc, alpha, beta, frame, params.z_d))
            tested += 1
    worst = max(rates) if rates else math.nan
    ok = gain and tested >= 100 and worst < 0
    return CheckResult("Lyapunov descent at annulus boundary", ok,
                       f"{tested} premise states, gain condition {gain}, max dV/dt {worst:.4g}")


def smooth_gate_open_config() -> SimConfig:
    """Ellipse run whose gate never closes and whose signum drive never switches."""
    params = ControllerParams(k1=1.0, k2=0.9, C=1.0, a=0.01, epsilon=1e4, d0=1.0, z_d=3000.0)
    return SimConfig(FieldModel.ellipse(), params, Placement((32.0, 20.0), math.pi / 4),
                     dt=0.001, steps=3000)


def check_lyapunov_rate(traj, frac: float = 0.95) -> CheckResult:
    """Central-difference dV/dt vs the closed form at gate-open steps between switches."""
    V = traj["V"]
    dt = float(traj["t"][1] - traj["t"][0])
    k = np.arange(1, len(traj) - 1)
    fd = (V[k + 1] - V[k - 1]) / (2 * dt)
    model = traj["vdot"][k]
    gate = traj["gate_open"].astype(bool)
    alpha = traj["alpha"]
    steady = gate[k - 1] & gate[k] & gate[k + 1] & (alpha[k - 1] == alpha[k]) & (alpha[k] == alpha[k + 1])
    good = np.abs(fd - model) <= np.maximum(1e-3, 0.05 * np.abs(model))
    n = int(steady.sum())
    share = float(good[steady].mean()) if n else 0.0
    return CheckResult("Lyapunov rate consistency", n > 0 and share >= frac,
                       f"{share:.1%} of {n} switch-free gate-open steps within tolerance (need {frac:.0%})")


def final_loop_mask(traj, reference) -> np.ndarray:
    rc = traj["rc"]
    ang = np.unwrap(np.arctan2(rc[:, 1] - reference[1], rc[:, 0] - reference[0]))
    total = ang[-1]
    return np.abs(total - ang) <= 2 * math.pi


def check_gamma_dynamics(traj, params: ControllerParams, start: int, reference,
                         frac: float = 0.95) -> CheckResult:
    """Finite-difference gamma rate vs ``a |grad z_c| cos(gamma) - kappa sigma``."""
    g = np.unwrap(traj["gamma"])
    dt = float(traj["t"][1] - traj["t"][0])
    k = np.arange(max(start, 1), len(traj) - 1)
    fd = (g[k + 1] - g[k - 1]) / (2 * dt)
    model = params.a * traj["grad_norm"][k] * np.cos(g[k]) - traj["kappa"][k] * traj["sigma"][k]
    sel = np.sin(g[k]) > 0.05
    good = np.abs(fd - model) <= 0.05 * np.abs(model)
    n = int(sel.sum())
    share = float(good[sel].mean()) if n else 0.0
    loop = final_loop_mask(traj, reference)
    spread = float(np.std(traj["gamma"][loop]))
    ok = n > 0 and share >= frac and spread > 0.01
    return CheckResult("gamma dynamics residual", ok,
                       f"{share:.1%} of {n} steps with sin(gamma)>0.05 within 5% (need {frac:.0%}); "
                       f"final-loop std(gamma) = {spread:.4f} rad")


def check_gamma_identities(traj, field: FieldModel) -> CheckResult:
    ok = np.isfinite(traj["gamma"])
    g = traj["gamma"][ok]
    q = traj["q"][ok]
    nvec = np.column_stack([-q[:, 1], q[:, 0]])
    rc = traj["rc"][ok]
    gx, gy = fieldmod._gradient(field, rc[:, 0], rc[:, 1])
    gn = np.hypot(gx, gy)
    y0 = np.column_stack([-gx / gn, -gy / gn])
    x0 = np.column_stack([-y0[:, 1], y0[:, 0]])
    dot = lambda u, v: np.einsum("ij,ij->i", u, v)  # noqa: E731
    res = max(
        float(np.max(np.abs(dot(nvec, x0) - np.cos(g)))),
        float(np.max(np.abs(dot(q, x0) - np.sin(g)))),
        float(np.max(np.abs(dot(q, y0) - np.cos(g)))),
        float(np.max(np.abs(dot(nvec, y0) + np.sin(g)))),
    )
    return CheckResult("gamma dot-product identities", res < 1e-9, f"max residual {res:.3e}")


def invariant_suite() -> list[Callable[[], CheckResult]]:
    """Checks run by ``curvetrak validate``."""
    def ellipse_run_checks():
        cfg = ellipse_config()
        traj, _ = run(cfg)
        return [
            check_gamma_identities(traj, cfg.field),
            check_omega_exactness(traj, cfg.params.a),
            check_lyapunov_descent_sampled(cfg.field, cfg.params, cfg.monitor),
        ]

    def lyapunov_rate_check():
        traj, _ = run(smooth_gate_open_config())
        return check_lyapunov_rate(traj)

    rng = np.random.default_rng(11)
    polys = [random_polynomial(rng) for _ in range(3)]
    suite: list = [
        lambda: check_gradient_oracle(FieldModel.ellipse(), "ellipse"),
        lambda: check_gradient_oracle(FieldModel.matyas(), "matyas"),
    ]
    for i, p in enumerate(polys):
        suite.append(lambda p=p, i=i: check_gradient_oracle(p, f"polynomial #{i + 1}"))
    suite += [
        lambda: check_hessian_oracle(FieldModel.ellipse(), "ellipse"),
        lambda: check_hessian_oracle(FieldModel.matyas(), "matyas"),
        lambda: check_hessian_oracle(polys[0], "polynomial #1"),
        check_circle_curvature,
        check_frame_identities,
        check_separation_law,
        check_omega_order,
        ellipse_run_checks,
        lyapunov_rate_check,
    ]
    return suite


def run_suite(suite=None) -> tuple[list[CheckResult], float]:
    t0 = time.perf_counter()
    results: list[CheckResult] = []
    for fn in suite or invariant_suite():
        try:
            out = fn()
        except Exception as exc:  # a crashing check is a failed check
            out = CheckResult(getattr(fn, "__name__", "check"), False, f"raised {exc!r}")
        results.extend(out if isinstance(out, list) else [out])
    return results, time.perf_counter() - t0
