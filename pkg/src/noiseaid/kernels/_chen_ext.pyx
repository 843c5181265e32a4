# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled closed-loop integration kernel.

Floating-point operation order mirrors ``_chen_py.chen_loop`` exactly;
the two backends are tested for bit-identical output.
"""

from libc.math cimport fabs, isfinite, sin, sqrt


def chen_loop(
    double[::1] x0,
    double t0,
    double dt,
    double a,
    double b,
    double c,
    double kappa1,
    double kappa2,
    double kappa3,
    double[::1] sigma_c,
    double[::1] sin_amp,
    double[::1] sigma_d,
    double[::1] dsign,
    double[:, ::1] aiding,
    double[:, ::1] dist,
    double[:, ::1] states,
    double guard,
):
    cdef Py_ssize_t n_steps = aiding.shape[0]
    cdef double s1 = dsign[0], s2 = dsign[1], s3 = dsign[2]
    cdef double sc1 = sigma_c[0], sc2 = sigma_c[1], sc3 = sigma_c[2]
    cdef double sd1 = sigma_d[0], sd2 = sigma_d[1], sd3 = sigma_d[2]
    cdef double amp1 = sin_amp[0], amp2 = sin_amp[1], amp3 = sin_amp[2]
    cdef double two_thirds = 2.0 / 3.0
    cdef double x1 = x0[0], x2 = x0[1], x3 = x0[2]
    cdef double t, rho, k1, k2, k3, st, w1, w2, w3, d1, d2, d3, g1, g2, g3
    cdef Py_ssize_t k

    states[0, 0] = x1
    states[0, 1] = x2
    states[0, 2] = x3

    for k in range(n_steps):
        t = t0 + k * dt
        rho = 0.5 * sqrt(x1 * x1 + x2 * x2 + x3 * x3)
        k1 = -kappa1 * rho
        k2 = -kappa2 * (x1 + x2)
        k3 = -kappa3
        st = sin(t)
        w1 = amp1 * st
        w2 = amp2 * st
        w3 = amp3 * st

        d1 = -a * x1 + a * x2 + (x1 * k1 - a * x1 * k3) + s1 * (x1 - x2) * w1
        d2 = (
            (c - a) * x1
            + c * x2
            - x1 * x3
            + (x2 * k1 + c * k2)
            + s1 * x1 * w1
            + s3 * (x1 + x2) * w3
        )
        d3 = x1 * x2 - b * x3 + (two_thirds * k1 - b * k3) * x3 + s2 * x3 * w2

        g1 = sc1 * x1 * aiding[k, 0] + s1 * (x1 - x2) * sd1 * dist[k, 0]
        g2 = (
            sc2 * x2 * aiding[k, 1]
            + s1 * x1 * sd1 * dist[k, 0]
            + s3 * (x1 + x2) * sd3 * dist[k, 2]
        )
        g3 = sc3 * x3 * aiding[k, 2] + s2 * x3 * sd2 * dist[k, 1]

        x1 = x1 + d1 * dt + g1
        x2 = x2 + d2 * dt + g2
        x3 = x3 + d3 * dt + g3
        states[k + 1, 0] = x1
        states[k + 1, 1] = x2
        states[k + 1, 2] = x3

        if not (
            isfinite(x1)
            and isfinite(x2)
            and isfinite(x3)
            and fabs(x1) <= guard
            and fabs(x2) <= guard
            and fabs(x3) <= guard
        ):
            return k + 1

    return -1
