# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled integration kernel; mirrors ``_pykernel`` expression for expression."""
import numpy as np

from libc.math cimport sqrt, pow, fabs, isfinite

cdef int OK = 0
cdef int DEGENERATE = 1
cdef int DIVERGED = 2
cdef int MIDPOINT = 1

cdef double MIN_SEPARATION = 1e-12
cdef double COORD_LIMIT = 1e9


cdef struct Field:
    int kind
    double cx, cy, kx, ky
    int nterms
    int *ti
    int *tj
    double *tc


cdef struct Law:
    double k1, k2, C, a, eps, d0, zd, db


cdef struct Vel:
    double v1q, v2q, v1n, v2n, v1x, v1y, v2x, v2y


cdef inline double zval(Field *f, double x, double y) nogil:
    cdef double dx, dy, out
    cdef int m
    if f.kind == 0:
        dx = x - f.cx
        dy = y - f.cy
        return f.kx * dx * dx + f.ky * dy * dy
    if f.kind == 1:
        return 0.26 * (x * x + y * y) - 0.48 * x * y
    out = 0.0 * x
    for m in range(f.nterms):
        out = out + f.tc[m] * pow(x, f.ti[m]) * pow(y, f.tj[m])
    return out


cdef inline bint velocities(double r1x, double r1y, double r2x, double r2y,
                            double y1, double y2, Law *L, Vel *v) nogil:
    cdef double dx = r2x - r1x
    cdef double dy = r2y - r1y
    cdef double s = sqrt(dx * dx + dy * dy)
    cdef double qx, qy, nx, ny, yc, p, drive, rel1, rel2
    if not s > MIN_SEPARATION:
        return False
    qx = dx / s
    qy = dy / s
    nx = -qy
    ny = qx
    yc = (y1 + y2) / 2.0
    p = (yc - L.zd) * (y1 - y2)
    if p > L.db:
        drive = L.k2 * 1
    elif p < -L.db:
        drive = L.k2 * -1
    else:
        drive = L.k2 * 0
    rel1 = dx * qx + dy * qy
    rel2 = (r1x - r2x) * qx + (r1y - r2y) * qy
    v.v1q = L.k1 * (rel1 - L.d0) + drive
    v.v2q = L.k1 * (rel2 + L.d0) + drive
    if fabs(yc - L.zd) < L.eps:
        v.v1n = L.C + L.a * y1
        v.v2n = L.C + L.a * y2
    else:
        v.v1n = 0.0
        v.v2n = 0.0
    v.v1x = v.v1q * qx + v.v1n * nx
    v.v1y = v.v1q * qy + v.v1n * ny
    v.v2x = v.v2q * qx + v.v2n * nx
    v.v2y = v.v2q * qy + v.v2n * ny
    return True


cdef inline bint bad(double x) nogil:
    return not isfinite(x) or fabs(x) > COORD_LIMIT


def integrate(int kind, fpar, terms, par, r1, r2, double dt, Py_ssize_t steps,
              noise, double sigma, int scheme):
    """See ``_pykernel.integrate``; identical contract and results."""
    cdef Field f
    cdef Law L
    cdef Vel v
    cdef double[:, ::1] out_v
    cdef double[:, ::1] nz
    cdef int[::1] ti_v
    cdef int[::1] tj_v
    cdef double[::1] tc_v
    cdef double r1x = float(r1[0]), r1y = float(r1[1])
    cdef double r2x = float(r2[0]), r2y = float(r2[1])
    cdef double y1, y2, w1, w2, h, m1x, m1y, m2x, m2y
    cdef double v1x, v1y, v2x, v2y
    cdef bint noisy = sigma != 0.0
    cdef int status = OK
    cdef Py_ssize_t k = 0

    f.kind = kind
    f.nterms = 0
    f.cx, f.cy, f.kx, f.ky = fpar[0], fpar[1], fpar[2], fpar[3]
    t_arr = np.ascontiguousarray(np.asarray(terms, dtype=float).reshape(-1, 3))
    ti = np.ascontiguousarray(t_arr[:, 0], dtype=np.intc)
    tj = np.ascontiguousarray(t_arr[:, 1], dtype=np.intc)
    tc = np.ascontiguousarray(t_arr[:, 2], dtype=float)
    ti_v = ti
    tj_v = tj
    tc_v = tc
    f.nterms = <int>t_arr.shape[0]
    if f.nterms > 0:
        f.ti = &ti_v[0]
        f.tj = &tj_v[0]
        f.tc = &tc_v[0]
    L.k1, L.k2, L.C, L.a = par[0], par[1], par[2], par[3]
    L.eps, L.d0, L.zd, L.db = par[4], par[5], par[6], par[7]

    out = np.empty((steps, 10))
    out_v = out
    if noisy:
        nz = np.ascontiguousarray(noise, dtype=float)
    else:
        nz = np.zeros((1, 4))

    with nogil:
        while k < steps:
            y1 = zval(&f, r1x, r1y)
            y2 = zval(&f, r2x, r2y)
            if noisy:
                y1 = y1 + sigma * nz[k, 0]
                y2 = y2 + sigma * nz[k, 1]
            if bad(y1) or bad(y2):
                status = DIVERGED
                break
            if not velocities(r1x, r1y, r2x, r2y, y1, y2, &L, &v):
                status = DEGENERATE
                break
            out_v[k, 0] = r1x
            out_v[k, 1] = r1y
            out_v[k, 2] = r2x
            out_v[k, 3] = r2y
            out_v[k, 4] = y1
            out_v[k, 5] = y2
            out_v[k, 6] = v.v1q
            out_v[k, 7] = v.v2q
            out_v[k, 8] = v.v1n
            out_v[k, 9] = v.v2n
            v1x = v.v1x
            v1y = v.v1y
            v2x = v.v2x
            v2y = v.v2y
            if scheme == MIDPOINT:
                h = dt / 2.0
                m1x = r1x + v1x * h
                m1y = r1y + v1y * h
                m2x = r2x + v2x * h
                m2y = r2y + v2y * h
                w1 = zval(&f, m1x, m1y)
                w2 = zval(&f, m2x, m2y)
                if noisy:
                    w1 = w1 + sigma * nz[k, 2]
                    w2 = w2 + sigma * nz[k, 3]
                if not velocities(m1x, m1y, m2x, m2y, w1, w2, &L, &v):
                    status = DEGENERATE
                    break
                v1x = v.v1x
                v1y = v.v1y
                v2x = v.v2x
                v2y = v.v2y
            r1x = r1x + v1x * dt
            r1y = r1y + v1y * dt
            r2x = r2x + v2x * dt
            r2y = r2y + v2y * dt
            k += 1
            if bad(r1x) or bad(r1y) or bad(r2x) or bad(r2y):
                status = DIVERGED
                break
    return out[:k], k, status, (r1x, r1y, r2x, r2y)
