# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the hot kernels; see ``_kernels_py`` for the reference code."""
import numpy as np

cimport numpy as cnp
from libc.math cimport log, sqrt, INFINITY
from scipy.linalg.cython_lapack cimport dpotrf, dpotrs

cnp.import_array()

cdef Py_ssize_t MAX_INNER = 200
cdef double LOG2E = 1.4426950408889634


def cmi_batch(Q):
    """``I(T:X|Y)`` in bits for a stack ``Q[n, t, x, y]``."""
    cdef double[:, :, :, ::1] q = np.ascontiguousarray(Q, dtype=np.float64)
    cdef Py_ssize_t n = q.shape[0], nt = q.shape[1], nx = q.shape[2], ny = q.shape[3]
    cdef double[::1] out = np.empty(n)
    cdef double[:, ::1] pxy = np.empty((nx, ny))
    cdef double[:, ::1] pty = np.empty((nt, ny))
    cdef double[::1] py = np.empty(ny)
    cdef Py_ssize_t i, t, x, y
    cdef double s, v, den
    for i in range(n):
        pxy[:, :] = 0.0
        pty[:, :] = 0.0
        py[:] = 0.0
        for t in range(nt):
            for x in range(nx):
                for y in range(ny):
                    v = q[i, t, x, y]
                    pxy[x, y] += v
                    pty[t, y] += v
                    py[y] += v
        s = 0.0
        for t in range(nt):
            for x in range(nx):
                for y in range(ny):
                    v = q[i, t, x, y]
                    if v > 0:
                        den = pty[t, y] * pxy[x, y]
                        s += v * log(v * py[y] / den)
        out[i] = s * LOG2E if s > 0 else 0.0
    return np.asarray(out)


cdef double _value(double[::1] q, double[::1] Qc, Py_ssize_t n, Py_ssize_t ncell, double mu) noexcept nogil:
    cdef double s = 0.0
    cdef Py_ssize_t a, c
    for a in range(n):
        s += q[a] * log(q[a]) - mu * log(q[a])
    for c in range(ncell):
        if Qc[c] > 0:
            s -= Qc[c] * log(Qc[c])
    return s


cdef void _point(double[::1] q0, double[:, ::1] B, double[::1] g, double[::1] q,
                 long long[::1] cell, double[::1] Qc, Py_ssize_t n, Py_ssize_t d, Py_ssize_t ncell) noexcept nogil:
    cdef Py_ssize_t a, j
    cdef double v
    for a in range(ncell):
        Qc[a] = 0.0
    for a in range(n):
        v = q0[a]
        for j in range(d):
            v += B[a, j] * g[j]
        q[a] = v
        Qc[cell[a]] += v


cdef int _solve_spd(double[:, ::1] H, double[::1] rhs, double[::1] out, double[:, ::1] work,
                    double[::1] scale, int d) noexcept nogil:
    """Jacobi-scaled Cholesky solve of ``H out = rhs`` with an escalating ridge."""
    cdef int i, j, attempt, info = 0, one = 1
    cdef char uplo = b'L'
    cdef double ridge = 0.0
    for i in range(d):
        scale[i] = sqrt(H[i, i]) if H[i, i] > 1e-300 else 1e-150
    for attempt in range(8):
        for i in range(d):
            for j in range(d):
                work[i, j] = H[i, j] / (scale[i] * scale[j])
            work[i, i] += ridge
        dpotrf(&uplo, &d, &work[0, 0], &d, &info)
        if info == 0:
            break
        ridge = 1e-12 if ridge == 0.0 else ridge * 100
    if info != 0:
        for i in range(d):
            out[i] = rhs[i] / (scale[i] * scale[i])
        return 1
    for i in range(d):
        out[i] = rhs[i] / scale[i]
    dpotrs(&uplo, &d, &one, &work[0, 0], &d, &out[0], &d, &info)
    for i in range(d):
        out[i] = out[i] / scale[i]
    return info


def barrier_newton(q0_in, B_in, cell_in, Py_ssize_t ncell, g_in, double mu0, double mu_min,
                   double mu_factor, double tol, Py_ssize_t max_iter, double armijo):
    """Same contract as ``_kernels_py.barrier_newton``."""
    cdef double[::1] q0 = np.ascontiguousarray(q0_in, dtype=np.float64)
    cdef double[:, ::1] B = np.ascontiguousarray(B_in, dtype=np.float64)
    cdef long long[::1] cell = np.ascontiguousarray(cell_in, dtype=np.int64)
    cdef double[::1] g = np.array(g_in, dtype=np.float64)
    cdef Py_ssize_t n = B.shape[0], d = B.shape[1]
    cdef double[:, ::1] Bc = np.zeros((ncell, d))
    cdef double[::1] q = np.empty(n), qn = np.empty(n), dq = np.empty(n)
    cdef double[::1] Qc = np.empty(ncell), Qcn = np.empty(ncell)
    cdef double[::1] w = np.empty(n), gq = np.empty(n)
    cdef double[::1] grad = np.empty(d), dg = np.empty(d), gn = np.empty(d), neg_grad = np.empty(d)
    cdef double[::1] scale = np.empty(d)
    cdef double[:, ::1] H = np.empty((d, d)), work = np.empty((d, d))
    cdef double[:, ::1] hist = np.empty((max(max_iter, 1), 2))
    cdef Py_ssize_t a, j, k, c, inner, it = 0
    cdef double mu = mu0, F, Fn = 0.0, slope, smax, s, v
    cdef bint accepted, feasible
    cdef int status = 0
    for a in range(n):
        for j in range(d):
            Bc[cell[a], j] += B[a, j]
    with nogil:
        while True:
            for inner in range(MAX_INNER):
                _point(q0, B, g, q, cell, Qc, n, d, ncell)
                F = _value(q, Qc, n, ncell, mu)
                for a in range(n):
                    gq[a] = log(q[a] / Qc[cell[a]]) - mu / q[a]
                    w[a] = 1.0 / q[a] + mu / (q[a] * q[a])
                for j in range(d):
                    v = 0.0
                    for a in range(n):
                        v += B[a, j] * gq[a]
                    grad[j] = v
                    neg_grad[j] = -v
                for j in range(d):
                    for k in range(j, d):
                        v = 0.0
                        for a in range(n):
                            v += w[a] * B[a, j] * B[a, k]
                        for c in range(ncell):
                            if Qc[c] > 0:
                                v -= Bc[c, j] * Bc[c, k] / Qc[c]
                        H[j, k] = v
                        H[k, j] = v
                _solve_spd(H, neg_grad, dg, work, scale, <int>d)
                slope = 0.0
                for j in range(d):
                    slope += grad[j] * dg[j]
                if -slope / 2 <= tol:
                    break
                smax = INFINITY
                for a in range(n):
                    v = 0.0
                    for j in range(d):
                        v += B[a, j] * dg[j]
                    dq[a] = v
                    if v < 0 and -q[a] / v < smax:
                        smax = -q[a] / v
                s = 1.0 if 0.99 * smax > 1.0 else 0.99 * smax
                accepted = False
                while s > 1e-16:
                    for j in range(d):
                        gn[j] = g[j] + s * dg[j]
                    feasible = True
                    for c in range(ncell):
                        Qcn[c] = 0.0
                    for a in range(n):
                        qn[a] = q[a] + s * dq[a]
                        if qn[a] <= 0:
                            feasible = False
                        Qcn[cell[a]] += qn[a]
                    if feasible:
                        Fn = _value(qn, Qcn, n, ncell, mu)
                        if Fn <= F + armijo * s * slope:
                            accepted = True
                            break
                    s *= 0.5
                if not accepted:
                    break
                for j in range(d):
                    g[j] = gn[j]
                hist[it, 0] = mu
                hist[it, 1] = Fn
                it += 1
                if it >= max_iter:
                    status = 1
                    break
            if status == 1 or mu <= mu_min:
                break
            mu = mu * mu_factor
            if mu < mu_min:
                mu = mu_min
    return np.asarray(g), it, status, np.asarray(hist[:it]).copy()
