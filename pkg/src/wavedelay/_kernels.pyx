# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops. Signatures mirror ``_kernels_py`` exactly."""

import numpy as np

from libc.math cimport floor


def extend_cells(double[::1] a, Py_ssize_t start, Py_ssize_t stop, Py_ssize_t n,
                 double f, Py_ssize_t onset, long long[::1] lag):
    """Fill ``a[start:stop]`` from the reflection and delayed-feedback recursions.

    ``n`` is the number of cells per 2L, ``onset`` the first feedback cell and
    ``lag[i - start]`` the feedback delay of cell ``i`` in cells (0 = no delay).
    """
    cdef Py_ssize_t i, d
    cdef double k0 = 0.0
    if f != 1.0:
        k0 = -(1.0 + f) / (1.0 - f)
    for i in range(start, stop):
        if i < onset:
            a[i] = -a[i - n]
        else:
            d = lag[i - start]
            if d == 0:
                a[i] = k0 * a[i - n]
            else:
                a[i] = -a[i - n] + f * a[i - d] - f * a[i - n - d]


def leapfrog(double[::1] u_prev, double[::1] u_cur, double r2, double rf, double gcoef,
             double dt, Py_ssize_t onset, double[::1] lag, double[::1] ring,
             double vt0, Py_ssize_t nsteps, long long[::1] rec,
             double[:, ::1] out_u, double[:, ::1] out_vt):
    """March the leapfrog scheme from (u^0, u^1) up to u^nsteps.

    Dirichlet at node 0, ghost-point Neumann at the last node driven by
    ``gcoef * v_t(t_n - lag_n dt, L)`` read from the boundary-velocity ring
    buffer. ``lag_n == 0`` selects the undelayed law, solved implicitly with
    ``rf = r * f``. States at the step indices in ``rec`` (all >= 1) are
    copied into ``out_u`` / ``out_vt``.
    """
    cdef Py_ssize_t m = u_cur.shape[0]
    cdef Py_ssize_t depth = ring.shape[0]
    cdef Py_ssize_t nrec = rec.shape[0]
    cdef Py_ssize_t i, step, k, irec = 0
    cdef double g, tau, w, lg, vt
    cdef double[::1] up = np.array(u_prev, dtype=np.float64)
    cdef double[::1] u = np.array(u_cur, dtype=np.float64)
    cdef double[::1] un = np.empty(m, dtype=np.float64)
    cdef double[::1] tmp

    ring[0] = vt0
    for step in range(1, nsteps):
        for i in range(1, m - 1):
            un[i] = 2.0 * u[i] - up[i] + r2 * (u[i + 1] - 2.0 * u[i] + u[i - 1])
        un[0] = 0.0
        lg = lag[step]
        if step >= onset and lg == 0.0:
            un[m - 1] = (2.0 * u[m - 1] - up[m - 1] * (1.0 + rf)
                         + 2.0 * r2 * (u[m - 2] - u[m - 1])) / (1.0 - rf)
        else:
            g = 0.0
            if step >= onset:
                tau = step - lg
                if tau >= 0.0:
                    k = <Py_ssize_t>floor(tau)
                    w = tau - k
                    if w == 0.0:
                        g = gcoef * ring[k % depth]
                    else:
                        g = gcoef * ((1.0 - w) * ring[k % depth] + w * ring[(k + 1) % depth])
            un[m - 1] = 2.0 * u[m - 1] - up[m - 1] + r2 * (2.0 * u[m - 2] - 2.0 * u[m - 1]) + g
        ring[step % depth] = (un[m - 1] - up[m - 1]) / (2.0 * dt)
        while irec < nrec and rec[irec] == step:
            for i in range(m):
                out_u[irec, i] = u[i]
                out_vt[irec, i] = (un[i] - up[i]) / (2.0 * dt)
            irec += 1
        tmp = up
        up = u
        u = un
        un = tmp
