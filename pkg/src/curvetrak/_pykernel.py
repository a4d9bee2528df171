"""Pure-Python integration kernel.

Reference twin of ``_ckernel.pyx``. Both evaluate the same floating-point
expressions in the same order, so trajectories agree bit for bit.
"""
import math

import numpy as np

OK = 0
DEGENERATE = 1
DIVERGED = 2

EULER = 0
MIDPOINT = 1

MIN_SEPARATION = 1e-12
COORD_LIMIT = 1e9

# Column layout of the per-step output array.
COLUMNS = ("r1x", "r1y", "r2x", "r2y", "y1", "y2", "v1q", "v2q", "v1n", "v2n")


def _make_field(kind, fpar, terms):
    if kind == 0:
        cx, cy, kx, ky = fpar[0], fpar[1], fpar[2], fpar[3]

        def z(x, y):
            dx = x - cx
            dy = y - cy
            return kx * dx * dx + ky * dy * dy
    elif kind == 1:
        def z(x, y):
            return 0.26 * (x * x + y * y) - 0.48 * x * y
    else:
        tl = [(int(t[0]), int(t[1]), float(t[2])) for t in terms]

        def z(x, y):
            out = 0.0 * x
            for i, j, c in tl:
                out = out + c * math.pow(x, i) * math.pow(y, j)
            return out
    return z


def _velocities(r1x, r1y, r2x, r2y, y1, y2, k1, k2, C, a, eps, d0, zd, db):
    dx = r2x - r1x
    dy = r2y - r1y
    s = math.sqrt(dx * dx + dy * dy)
    if not s > MIN_SEPARATION:
        return None
    qx = dx / s
    qy = dy / s
    nx = -qy
    ny = qx
    yc = (y1 + y2) / 2.0
    p = (yc - zd) * (y1 - y2)
    if p > db:
        drive = k2 * 1
    elif p < -db:
        drive = k2 * -1
    else:
        drive = k2 * 0
    rel1 = dx * qx + dy * qy
    rel2 = (r1x - r2x) * qx + (r1y - r2y) * qy
    v1q = k1 * (rel1 - d0) + drive
    v2q = k1 * (rel2 + d0) + drive
    if abs(yc - zd) < eps:
        v1n = C + a * y1
        v2n = C + a * y2
    else:
        v1n = 0.0
        v2n = 0.0
    return (v1q, v2q, v1n, v2n,
            v1q * qx + v1n * nx, v1q * qy + v1n * ny,
            v2q * qx + v2n * nx, v2q * qy + v2n * ny)


def _bad(*xs):
    for x in xs:
        if not math.isfinite(x) or abs(x) > COORD_LIMIT:
            return True
    return False


def integrate(kind, fpar, terms, par, r1, r2, dt, steps, noise, sigma, scheme):
    """Integrate ``steps`` steps; return ``(out, n_done, status, final_state)``.

    ``out[k]`` holds the pre-step state, measurements and applied velocity
    components of step ``k``. ``noise`` has shape ``(steps, 2)`` for Euler
    and ``(steps, 4)`` for midpoint; it is ignored when ``sigma == 0``.
    """
    z = _make_field(kind, fpar, terms)
    k1, k2, C, a, eps, d0, zd, db = (float(v) for v in par)
    r1x, r1y = float(r1[0]), float(r1[1])
    r2x, r2y = float(r2[0]), float(r2[1])
    sigma = float(sigma)
    out = np.empty((steps, len(COLUMNS)))
    noisy = sigma != 0.0
    nz = noise.tolist() if noisy else None
    status = OK
    k = 0
    while k < steps:
        y1 = z(r1x, r1y)
        y2 = z(r2x, r2y)
        if noisy:
            y1 = y1 + sigma * nz[k][0]
            y2 = y2 + sigma * nz[k][1]
        if _bad(y1, y2):
            status = DIVERGED
            break
        v = _velocities(r1x, r1y, r2x, r2y, y1, y2, k1, k2, C, a, eps, d0, zd, db)
        if v is None:
            status = DEGENERATE
            break
        v1q, v2q, v1n, v2n, v1x, v1y, v2x, v2y = v
        row = out[k]
        row[0] = r1x
        row[1] = r1y
        row[2] = r2x
        row[3] = r2y
        row[4] = y1
        row[5] = y2
        row[6] = v1q
        row[7] = v2q
        row[8] = v1n
        row[9] = v2n
        if scheme == MIDPOINT:
            h = dt / 2.0
            m1x = r1x + v1x * h
            m1y = r1y + v1y * h
            m2x = r2x + v2x * h
            m2y = r2y + v2y * h
            w1 = z(m1x, m1y)
            w2 = z(m2x, m2y)
            if noisy:
                w1 = w1 + sigma * nz[k][2]
                w2 = w2 + sigma * nz[k][3]
            v = _velocities(m1x, m1y, m2x, m2y, w1, w2, k1, k2, C, a, eps, d0, zd, db)
            if v is None:
                status = DEGENERATE
                break
            v1x, v1y, v2x, v2y = v[4], v[5], v[6], v[7]
        r1x = r1x + v1x * dt
        r1y = r1y + v1y * dt
        r2x = r2x + v2x * dt
        r2y = r2y + v2y * dt
        k += 1
        if _bad(r1x, r1y, r2x, r2y):
            status = DIVERGED
            break
    return out[:k], k, status, (r1x, r1y, r2x, r2y)
