# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel backend.

Twin of `pyref`: same functions, same formulas, same evaluation order, so
results are bitwise identical (the build disables FP contraction; both
backends run IEEE double arithmetic). See pyref docstrings for semantics.
"""
from libc.math cimport fabs

import numpy as np

cimport numpy as cnp

BACKEND_NAME = "compiled"


def invert_blocks(double[:, :, ::1] blocks, double tol_factor,
                  double[:, :, ::1] inverses, double[:, ::1] minors):
    cdef Py_ssize_t m = blocks.shape[0]
    cdef Py_ssize_t c
    cdef double a, bq, cq, d, e, f, g, h, i
    cdef double ca, cb, cc, cd, ce, cf, cg, ch, ci
    cdef double det, scale, v, invdet
    for c in range(m):
        a = blocks[c, 0, 0]
        bq = blocks[c, 0, 1]
        cq = blocks[c, 0, 2]
        d = blocks[c, 1, 0]
        e = blocks[c, 1, 1]
        f = blocks[c, 1, 2]
        g = blocks[c, 2, 0]
        h = blocks[c, 2, 1]
        i = blocks[c, 2, 2]
        ca = e * i - f * h
        cb = -(d * i - f * g)
        cc = d * h - e * g
        cd = -(bq * i - cq * h)
        ce = a * i - cq * g
        cf = -(a * h - bq * g)
        cg = bq * f - cq * e
        ch = -(a * f - cq * d)
        ci = a * e - bq * d
        det = a * ca + bq * cb + cq * cc
        scale = fabs(a)
        v = fabs(bq)
        if v > scale:
            scale = v
        v = fabs(cq)
        if v > scale:
            scale = v
        v = fabs(d)
        if v > scale:
            scale = v
        v = fabs(e)
        if v > scale:
            scale = v
        v = fabs(f)
        if v > scale:
            scale = v
        v = fabs(g)
        if v > scale:
            scale = v
        v = fabs(h)
        if v > scale:
            scale = v
        v = fabs(i)
        if v > scale:
            scale = v
        minors[c, 0] = a
        minors[c, 1] = ci
        minors[c, 2] = det
        if fabs(det) <= tol_factor * scale * scale * scale:
            return c
        invdet = 1.0 / det
        inverses[c, 0, 0] = ca * invdet
        inverses[c, 0, 1] = cd * invdet
        inverses[c, 0, 2] = cg * invdet
        inverses[c, 1, 0] = cb * invdet
        inverses[c, 1, 1] = ce * invdet
        inverses[c, 1, 2] = ch * invdet
        inverses[c, 2, 0] = cc * invdet
        inverses[c, 2, 1] = cf * invdet
        inverses[c, 2, 2] = ci * invdet
    return -1


def schur_corrections(double[:, :, ::1] coupling, double[:, :, ::1] inverses,
                      double[:, :, ::1] out):
    cdef Py_ssize_t m = coupling.shape[0]
    cdef Py_ssize_t c, r, s
    cdef double jr0, jr1, jr2, w0, w1, w2
    for c in range(m):
        for r in range(3):
            jr0 = coupling[c, r, 0]
            jr1 = coupling[c, r, 1]
            jr2 = coupling[c, r, 2]
            w0 = jr0 * inverses[c, 0, 0] + jr1 * inverses[c, 1, 0] + jr2 * inverses[c, 2, 0]
            w1 = jr0 * inverses[c, 0, 1] + jr1 * inverses[c, 1, 1] + jr2 * inverses[c, 2, 1]
            w2 = jr0 * inverses[c, 0, 2] + jr1 * inverses[c, 1, 2] + jr2 * inverses[c, 2, 2]
            for s in range(3):
                out[c, r, s] = (w0 * coupling[c, s, 0] + w1 * coupling[c, s, 1]
                                + w2 * coupling[c, s, 2])
    return None


def reduce_rhs(double[::1] y_jun, double[:, ::1] y_int,
               double[:, :, ::1] coupling, double[:, :, ::1] inverses,
               const cnp.int64_t[:, ::1] corners, double[::1] out):
    cdef Py_ssize_t nj = y_jun.shape[0]
    cdef Py_ssize_t m = coupling.shape[0]
    cdef Py_ssize_t idx, c, r
    cdef double u0, u1, u2, y0, y1, y2
    for idx in range(nj):
        out[idx] = y_jun[idx]
    for c in range(m):
        y0 = y_int[c, 0]
        y1 = y_int[c, 1]
        y2 = y_int[c, 2]
        u0 = inverses[c, 0, 0] * y0 + inverses[c, 0, 1] * y1 + inverses[c, 0, 2] * y2
        u1 = inverses[c, 1, 0] * y0 + inverses[c, 1, 1] * y1 + inverses[c, 1, 2] * y2
        u2 = inverses[c, 2, 0] * y0 + inverses[c, 2, 1] * y1 + inverses[c, 2, 2] * y2
        for r in range(3):
            out[corners[c, r]] -= (coupling[c, r, 0] * u0 + coupling[c, r, 1] * u1
                                   + coupling[c, r, 2] * u2)
    return None


def back_substitute(double[::1] junction_values, double[:, ::1] y_int,
                    double[:, :, ::1] coupling, double[:, :, ::1] inverses,
                    const cnp.int64_t[:, ::1] corners, double[:, ::1] out):
    cdef Py_ssize_t m = coupling.shape[0]
    cdef Py_ssize_t c
    cdef double v0, v1, v2, t0, t1, t2
    for c in range(m):
        v0 = junction_values[corners[c, 0]]
        v1 = junction_values[corners[c, 1]]
        v2 = junction_values[corners[c, 2]]
        t0 = y_int[c, 0] - (coupling[c, 0, 0] * v0 + coupling[c, 1, 0] * v1
                            + coupling[c, 2, 0] * v2)
        t1 = y_int[c, 1] - (coupling[c, 0, 1] * v0 + coupling[c, 1, 1] * v1
                            + coupling[c, 2, 1] * v2)
        t2 = y_int[c, 2] - (coupling[c, 0, 2] * v0 + coupling[c, 1, 2] * v1
                            + coupling[c, 2, 2] * v2)
        out[c, 0] = inverses[c, 0, 0] * t0 + inverses[c, 0, 1] * t1 + inverses[c, 0, 2] * t2
        out[c, 1] = inverses[c, 1, 0] * t0 + inverses[c, 1, 1] * t1 + inverses[c, 1, 2] * t2
        out[c, 2] = inverses[c, 2, 0] * t0 + inverses[c, 2, 1] * t1 + inverses[c, 2, 2] * t2
    return None


def route_corrections(const cnp.int64_t[:, ::1] corners, double[:, :, ::1] corrections,
                      Py_ssize_t next_junction_count, const cnp.int64_t[:, ::1] next_corners,
                      double[::1] out_junction_diag, double[:, :, ::1] out_interior,
                      double[:, :, ::1] out_coupling, cnp.int64_t[::1] violation):
    cdef Py_ssize_t m = corners.shape[0]
    cdef Py_ssize_t nj2 = next_junction_count
    cdef Py_ssize_t c, r, s, t, r2
    cdef cnp.int64_t a, b, jun, inter
    cdef Py_ssize_t b2, c2, s2, t2
    cdef double val
    for c in range(m):
        for r in range(3):
            for s in range(r, 3):
                a = corners[c, r]
                b = corners[c, s]
                val = corrections[c, r, s]
                if a == b:
                    if a < nj2:
                        out_junction_diag[a] -= val
                    else:
                        b2 = (a - nj2) // 3
                        s2 = (a - nj2) % 3
                        out_interior[b2, s2, s2] -= val
                elif a < nj2 and b < nj2:
                    violation[0] = a
                    violation[1] = b
                    return 1
                elif a >= nj2 and b >= nj2:
                    b2 = (a - nj2) // 3
                    c2 = (b - nj2) // 3
                    if b2 != c2:
                        violation[0] = a
                        violation[1] = b
                        return 1
                    s2 = (a - nj2) % 3
                    t2 = (b - nj2) % 3
                    out_interior[b2, s2, t2] -= val
                    out_interior[b2, t2, s2] -= val
                else:
                    if a < nj2:
                        jun = a
                        inter = b
                    else:
                        jun = b
                        inter = a
                    b2 = (inter - nj2) // 3
                    s2 = (inter - nj2) % 3
                    r2 = -1
                    for t in range(3):
                        if next_corners[b2, t] == jun:
                            r2 = t
                            break
                    if r2 < 0:
                        violation[0] = a
                        violation[1] = b
                        return 1
                    out_coupling[b2, r2, s2] -= val
    return 0


def route_corrections_base(const cnp.int64_t[:, ::1] corners,
                           double[:, :, ::1] corrections,
                           double[:, ::1] out_dense):
    cdef Py_ssize_t m = corners.shape[0]
    cdef Py_ssize_t c, r, s
    cdef cnp.int64_t a, b
    cdef double val
    for c in range(m):
        for r in range(3):
            for s in range(r, 3):
                a = corners[c, r]
                b = corners[c, s]
                val = corrections[c, r, s]
                if a == b:
                    out_dense[a, a] -= val
                else:
                    out_dense[a, b] -= val
                    out_dense[b, a] -= val
    return 0
