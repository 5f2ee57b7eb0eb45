# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled grid kernels: fused cubic source, oscillatory phase sums,
direct Green's summation with radial-table interpolation, Herglotz sums.

Same contracts as `_fallback`; loops are fused to avoid the large
temporaries the numpy route allocates.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport cos, log, sin, sqrt

cnp.import_array()


def cubic_source(double[:, :, ::1] q, double complex[:, :, ::1] u):
    cdef Py_ssize_t nx = q.shape[0], ny = q.shape[1], nz = q.shape[2]
    out_arr = np.empty((nx, ny, nz), dtype=np.complex128)
    cdef double complex[:, :, ::1] out = out_arr
    cdef Py_ssize_t i, j, l
    cdef double complex uv
    cdef double mag
    for i in range(nx):
        for j in range(ny):
            for l in range(nz):
                uv = u[i, j, l]
                mag = uv.real * uv.real + uv.imag * uv.imag
                out[i, j, l] = q[i, j, l] * mag * uv
    return out_arr


def phase_sums(double complex[:, :, ::1] f,
               double complex[:, ::1] px,
               double complex[:, ::1] py,
               double complex[:, ::1] pz):
    cdef Py_ssize_t M = px.shape[0]
    cdef Py_ssize_t nx = f.shape[0], ny = f.shape[1], nz = f.shape[2]
    out_arr = np.empty(M, dtype=np.complex128)
    cdef double complex[::1] out = out_arr
    cdef Py_ssize_t m, i, j, l
    cdef double complex acc, accj, accl, pxy
    for m in range(M):
        acc = 0
        for i in range(nx):
            accj = 0
            for j in range(ny):
                accl = 0
                for l in range(nz):
                    accl = accl + f[i, j, l] * pz[m, l]
                accj = accj + accl * py[m, j]
            acc = acc + accj * px[m, i]
        out[m] = acc
    return out_arr


def green_sum_points(double[:, ::1] points,
                     double[::1] ax, double[::1] ay, double[::1] az,
                     double complex[:, :, ::1] f,
                     double kphase, double complex c1,
                     double logr0, double dlogr, double[::1] corr,
                     double h3):
    cdef Py_ssize_t P = points.shape[0]
    cdef Py_ssize_t nx = ax.shape[0], ny = ay.shape[0], nz = az.shape[0]
    cdef Py_ssize_t ncorr = corr.shape[0]
    out_arr = np.empty(P, dtype=np.complex128)
    cdef double complex[::1] out = out_arr
    cdef Py_ssize_t p, i, j, l, i0
    cdef double x0, x1, x2, dx2, dxy2, r, t, frac, cval, ph
    cdef double complex acc, kern
    for p in range(P):
        x0 = points[p, 0]; x1 = points[p, 1]; x2 = points[p, 2]
        acc = 0
        for i in range(nx):
            dx2 = (x0 - ax[i]) * (x0 - ax[i])
            for j in range(ny):
                dxy2 = dx2 + (x1 - ay[j]) * (x1 - ay[j])
                for l in range(nz):
                    r = sqrt(dxy2 + (x2 - az[l]) * (x2 - az[l]))
                    ph = kphase * r
                    kern = c1 * (cos(ph) + 1j * sin(ph)) / r
                    if ncorr > 0:
                        t = (log(r) - logr0) / dlogr
                        if t < 0.0:
                            t = 0.0
                        elif t > ncorr - 1.000001:
                            t = ncorr - 1.000001
                        i0 = <Py_ssize_t> t
                        frac = t - i0
                        cval = corr[i0] * (1.0 - frac) + corr[i0 + 1] * frac
                        kern = kern + cval
                    acc = acc + kern * f[i, j, l]
        out[p] = acc * h3
    return out_arr


def herglotz_sums(double[:, ::1] points, double[:, ::1] nodes,
                  double complex[::1] coef, double k):
    cdef Py_ssize_t P = points.shape[0], M = nodes.shape[0]
    out_arr = np.empty(P, dtype=np.complex128)
    cdef double complex[::1] out = out_arr
    cdef Py_ssize_t p, m
    cdef double ph
    cdef double complex acc
    for p in range(P):
        acc = 0
        for m in range(M):
            ph = k * (points[p, 0] * nodes[m, 0]
                      + points[p, 1] * nodes[m, 1]
                      + points[p, 2] * nodes[m, 2])
            acc = acc + coef[m] * (cos(ph) + 1j * sin(ph))
        out[p] = acc
    return out_arr
