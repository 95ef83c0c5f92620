# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled twin of the pure-numpy kernels; identical contracts, typed
C loops over the batch dimension."""
import numpy as np

from libc.math cimport exp, log, INFINITY

BACKEND = "cython"


cdef inline Py_ssize_t _off(Py_ssize_t m) noexcept nogil:
    return m * (m - 1) // 2


def _n_from_size(Py_ssize_t T):
    cdef Py_ssize_t n = <Py_ssize_t>int((np.sqrt(8 * T + 1) - 1) / 2 + 0.5)
    if n * (n + 1) // 2 != T:
        raise ValueError(f"flat size {T} is not triangular")
    return n


cdef inline double _lae(double a, double b) noexcept nogil:
    if a == -INFINITY:
        return b
    if b == -INFINITY:
        return a
    if a > b:
        return a + log(1.0 + exp(b - a))
    return b + log(1.0 + exp(a - b))


def tri_field_rsk(x, lam):
    """Velocity of the insertion-type flow (noise-free), batched."""
    xa = np.ascontiguousarray(np.atleast_2d(x), dtype=np.float64)
    la = np.ascontiguousarray(lam, dtype=np.float64)
    cdef Py_ssize_t B = xa.shape[0], T = xa.shape[1]
    cdef Py_ssize_t n = _n_from_size(T)
    out = np.empty((B, T))
    cdef double[:, ::1] xv = xa
    cdef double[::1] lv = la
    cdef double[:, ::1] d = out
    cdef Py_ssize_t b, m, i, o, po
    with nogil:
        for b in range(B):
            d[b, 0] = lv[0]
            for m in range(2, n + 1):
                o = _off(m)
                po = _off(m - 1)
                d[b, o] = d[b, po] + exp(xv[b, o + 1] - xv[b, po])
                d[b, o + m - 1] = lv[m - 1] - exp(xv[b, o + m - 1] - xv[b, po + m - 2])
                for i in range(2, m):
                    d[b, o + i - 1] = (d[b, po + i - 1]
                                       + exp(xv[b, o + i] - xv[b, po + i - 1])
                                       - exp(xv[b, o + i - 1] - xv[b, po + i - 2]))
    return out


def tri_field_local(x, lam):
    """Velocity of the local (shuffling-type) flow, batched."""
    xa = np.ascontiguousarray(np.atleast_2d(x), dtype=np.float64)
    la = np.ascontiguousarray(lam, dtype=np.float64)
    cdef Py_ssize_t B = xa.shape[0], T = xa.shape[1]
    cdef Py_ssize_t n = _n_from_size(T)
    out = np.empty((B, T))
    cdef double[:, ::1] xv = xa
    cdef double[::1] lv = la
    cdef double[:, ::1] d = out
    cdef Py_ssize_t b, m, i, o, po
    with nogil:
        for b in range(B):
            d[b, 0] = lv[0]
            for m in range(2, n + 1):
                o = _off(m)
                po = _off(m - 1)
                d[b, o] = lv[m - 1] + exp(xv[b, po] - xv[b, o])
                d[b, o + m - 1] = lv[m - 1] - exp(xv[b, o + m - 1] - xv[b, po + m - 2])
                for i in range(2, m):
                    d[b, o + i - 1] = (lv[m - 1]
                                       + exp(xv[b, po + i - 1] - xv[b, o + i - 1])
                                       - exp(xv[b, o + i - 1] - xv[b, po + i - 2]))
    return out


def em_increment_rsk(x, lam, double dt, dB):
    """One Euler-Maruyama increment of the insertion-type SDE; dB has
    shape (B, n) and must already be scaled."""
    xa = np.ascontiguousarray(np.atleast_2d(x), dtype=np.float64)
    la = np.ascontiguousarray(lam, dtype=np.float64)
    dBa = np.ascontiguousarray(np.atleast_2d(dB), dtype=np.float64)
    cdef Py_ssize_t B = xa.shape[0], T = xa.shape[1]
    cdef Py_ssize_t n = _n_from_size(T)
    out = np.empty((B, T))
    cdef double[:, ::1] xv = xa
    cdef double[::1] lv = la
    cdef double[:, ::1] bv = dBa
    cdef double[:, ::1] inc = out
    cdef Py_ssize_t b, m, i, o, po
    with nogil:
        for b in range(B):
            inc[b, 0] = bv[b, 0] + lv[0] * dt
            for m in range(2, n + 1):
                o = _off(m)
                po = _off(m - 1)
                inc[b, o + m - 1] = bv[b, m - 1] + (
                    lv[m - 1] - exp(xv[b, o + m - 1] - xv[b, po + m - 2])) * dt
                inc[b, o] = inc[b, po] + exp(xv[b, o + 1] - xv[b, po]) * dt
                for i in range(2, m):
                    inc[b, o + i - 1] = inc[b, po + i - 1] + (
                        exp(xv[b, o + i] - xv[b, po + i - 1])
                        - exp(xv[b, o + i - 1] - xv[b, po + i - 2])) * dt
    return out


def em_increment_warren(x, lam, double dt, dW):
    """One Euler-Maruyama increment of the entrywise-noise SDE; dW has
    shape (B, T) and must already be scaled."""
    return np.asarray(dW, dtype=np.float64) + dt * tri_field_local(x, lam)


def log_trap_cumint(g, dt):
    """Streaming log-domain trapezoid rule; same contract as the
    pure-numpy twin (entry 0 of the output is -inf)."""
    ga = np.asarray(g, dtype=np.float64)
    shape = ga.shape
    # note: wraparound is off module-wide, so avoid negative tuple indices
    g2 = np.ascontiguousarray(ga.reshape(-1, shape[len(shape) - 1]))
    dta = np.ascontiguousarray(dt, dtype=np.float64)
    cdef Py_ssize_t B = g2.shape[0], K1 = g2.shape[1]
    if dta.shape[0] != K1 - 1:
        raise ValueError("dt must have one fewer entry than g")
    res = np.empty((B, K1))
    cdef double[:, ::1] gv = g2
    cdef double[::1] dv = dta
    cdef double[:, ::1] out = res
    cdef Py_ssize_t b, j
    cdef double acc, seg
    with nogil:
        for b in range(B):
            acc = -INFINITY
            out[b, 0] = -INFINITY
            for j in range(K1 - 1):
                seg = _lae(gv[b, j], gv[b, j + 1]) + log(dv[j] / 2.0)
                acc = _lae(acc, seg)
                out[b, j + 1] = acc
    return res.reshape(shape)
