# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_pykernels``.

The polar factor uses closed forms for 1x1 and 2x2 blocks and a scaled
Newton iteration otherwise, so no LAPACK call sits inside the sweep loop.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs

cnp.import_array()

ctypedef double complex cplx

cdef extern from "complex.h" nogil:
    double cabs(double complex)
    double complex conj(double complex)

cdef double SWAP_THRESHOLD = 0.5


def householder_complete_batch(rows):
    cdef cnp.ndarray[cplx, ndim=2] R = np.ascontiguousarray(rows, dtype=np.complex128)
    cdef Py_ssize_t M = R.shape[0], q = R.shape[1]
    cdef cnp.ndarray[cplx, ndim=3] out = np.empty((M, q, q), dtype=np.complex128)
    cdef cplx[:, :] rv = R
    cdef cplx[:, :, :] ov = out
    cdef cplx[:] u = np.empty(q, dtype=np.complex128)
    cdef Py_ssize_t m, i, j
    cdef double a, nu2, s
    cdef cplx ph, y0, hij
    with nogil:
        for m in range(M):
            a = cabs(rv[m, 0])
            if a > 0:
                ph = conj(rv[m, 0]) / a
            else:
                ph = 1.0
            s = 1.0 if a < SWAP_THRESHOLD else -1.0
            y0 = s * ph
            nu2 = 0.0
            for i in range(q):
                u[i] = conj(rv[m, i])
                if i == 0:
                    u[i] = u[i] - y0
                nu2 += u[i].real * u[i].real + u[i].imag * u[i].imag
            # out = (H diag(y0,1..))^*, i.e. out[j, i] = conj(Q[i, j])
            for i in range(q):
                for j in range(q):
                    hij = (1.0 if i == j else 0.0) - 2.0 * u[i] * conj(u[j]) / nu2
                    if j == 0:
                        hij = hij * y0
                    ov[m, j, i] = conj(hij)
    return out


cdef void _inverse(cplx* A, cplx* Inv, cplx* work, Py_ssize_t k) nogil:
    """Gauss-Jordan inverse with partial pivoting; ``work`` is k*k scratch."""
    cdef Py_ssize_t i, j, r, piv
    cdef double best, mag
    cdef cplx f, tmp
    for i in range(k * k):
        work[i] = A[i]
        Inv[i] = 0
    for i in range(k):
        Inv[i * k + i] = 1
    for j in range(k):
        piv = j
        best = cabs(work[j * k + j])
        for r in range(j + 1, k):
            mag = cabs(work[r * k + j])
            if mag > best:
                best = mag
                piv = r
        if best == 0:
            work[j * k + j] = 1e-300
        if piv != j:
            for i in range(k):
                tmp = work[j * k + i]; work[j * k + i] = work[piv * k + i]; work[piv * k + i] = tmp
                tmp = Inv[j * k + i]; Inv[j * k + i] = Inv[piv * k + i]; Inv[piv * k + i] = tmp
        f = 1.0 / work[j * k + j]
        for i in range(k):
            work[j * k + i] = work[j * k + i] * f
            Inv[j * k + i] = Inv[j * k + i] * f
        for r in range(k):
            if r != j:
                f = work[r * k + j]
                for i in range(k):
                    work[r * k + i] = work[r * k + i] - f * work[j * k + i]
                    Inv[r * k + i] = Inv[r * k + i] - f * Inv[j * k + i]


cdef double _fro(cplx* A, Py_ssize_t k) nogil:
    cdef double s = 0.0
    cdef Py_ssize_t i
    for i in range(k * k):
        s += A[i].real * A[i].real + A[i].imag * A[i].imag
    return sqrt(s)


cdef void _polar(cplx* A, cplx* U, cplx* inv, cplx* work, Py_ssize_t k) nogil:
    """Unitary polar factor of the row-major k x k matrix A, written to U."""
    cdef double a, nrm, g, diff
    cdef cplx det, e, t
    cdef Py_ssize_t i, j, it
    if k == 1:
        a = cabs(A[0])
        U[0] = A[0] / a if a > 0 else 1.0
        return
    if k == 2:
        det = A[0] * A[3] - A[1] * A[2]
        a = cabs(det)
        e = det / a if a > 0 else 1.0
        # M + e * adj(M)^*, adj = [[d, -b], [-c, a]]
        U[0] = A[0] + e * conj(A[3])
        U[1] = A[1] - e * conj(A[2])
        U[2] = A[2] - e * conj(A[1])
        U[3] = A[3] + e * conj(A[0])
        nrm = _fro(U, 2) / sqrt(2.0)
        if nrm == 0:
            U[0] = 1; U[1] = 0; U[2] = 0; U[3] = 1
            return
        for i in range(4):
            U[i] = U[i] / nrm
        return
    for i in range(k * k):
        U[i] = A[i]
    for it in range(100):
        _inverse(U, inv, work, k)
        g = sqrt(_fro(inv, k) / _fro(U, k))
        diff = 0.0
        for i in range(k):
            for j in range(k):
                # U <- (g U + conj(inv)^T / g) / 2
                t = 0.5 * (g * U[i * k + j] + conj(inv[j * k + i]) / g)
                diff += cabs(t - U[i * k + j])
                work[i * k + j] = t
        for i in range(k * k):
            U[i] = work[i]
        if diff < 1e-15 * k * k:
            break


def polar_unitary(M):
    cdef cnp.ndarray[cplx, ndim=2] A = np.ascontiguousarray(M, dtype=np.complex128)
    cdef Py_ssize_t k = A.shape[0]
    cdef cnp.ndarray[cplx, ndim=2] U = np.empty((k, k), dtype=np.complex128)
    cdef cplx[:] inv = np.empty(k * k, dtype=np.complex128)
    cdef cplx[:] work = np.empty(k * k, dtype=np.complex128)
    _polar(<cplx*> A.data, <cplx*> U.data, &inv[0], &work[0], k)
    return U


def polar_unitary_batch(M):
    cdef cnp.ndarray[cplx, ndim=3] A = np.ascontiguousarray(M, dtype=np.complex128)
    cdef Py_ssize_t E = A.shape[0], k = A.shape[1], e
    cdef cnp.ndarray[cplx, ndim=3] U = np.empty((E, k, k), dtype=np.complex128)
    cdef cplx[:] inv = np.empty(k * k, dtype=np.complex128)
    cdef cplx[:] work = np.empty(k * k, dtype=np.complex128)
    cdef cplx* ap = <cplx*> A.data
    cdef cplx* up = <cplx*> U.data
    with nogil:
        for e in range(E):
            _polar(ap + e * k * k, up + e * k * k, &inv[0], &work[0], k)
    return U


def align_frames(frames, parent, perm):
    cdef cnp.ndarray[cplx, ndim=3] C = np.ascontiguousarray(frames, dtype=np.complex128)
    cdef cnp.ndarray[cplx, ndim=3] out = C.copy()
    cdef cnp.intp_t[:] par = np.ascontiguousarray(parent, dtype=np.intp)
    cdef cnp.intp_t[:, :] pm = np.ascontiguousarray(perm, dtype=np.intp)
    cdef Py_ssize_t M = C.shape[0], k = C.shape[1], q = C.shape[2]
    cdef cplx[:, :, :] cv = C
    cdef cplx[:, :, :] ov = out
    cdef cplx[:] Mx = np.empty(k * k, dtype=np.complex128)
    cdef cplx[:] R = np.empty(k * k, dtype=np.complex128)
    cdef cplx[:] inv = np.empty(k * k, dtype=np.complex128)
    cdef cplx[:] work = np.empty(k * k, dtype=np.complex128)
    cdef Py_ssize_t m, p, a, b, i
    cdef cplx s
    with nogil:
        for m in range(M):
            p = par[m]
            if p < 0:
                continue
            # Mx = target @ C[m]^*, target[:, i] = out[p][:, perm[m, i]]
            for a in range(k):
                for b in range(k):
                    s = 0
                    for i in range(q):
                        s = s + ov[p, a, pm[m, i]] * conj(cv[m, b, i])
                    Mx[a * k + b] = s
            _polar(&Mx[0], &R[0], &inv[0], &work[0], k)
            for a in range(k):
                for i in range(q):
                    s = 0
                    for b in range(k):
                        s = s + R[a * k + b] * cv[m, b, i]
                    ov[m, a, i] = s
    return out
