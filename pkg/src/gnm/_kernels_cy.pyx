# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops for Pauli-basis state propagation.

A state on ``n`` qubits is a real vector ``c`` of length ``4**n`` indexed by
``x | (z << n)``; see :mod:`gnm.compiled` for the conventions.
"""

ctypedef unsigned long long u64

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil
    int __builtin_parityll(unsigned long long) nogil
    int __builtin_clzll(unsigned long long) nogil


cdef inline int _sigma(u64 q, u64 px, u64 pz, u64 xmask, int n) noexcept nogil:
    """+1/-1 such that exp(-i phi/2 P) Q exp(i phi/2 P) = cos Q + sigma sin (Q^P)."""
    cdef u64 xq = q & xmask
    cdef u64 zq = q >> n
    cdef u64 xr = xq ^ px
    cdef u64 zr = zq ^ pz
    cdef int e = (__builtin_popcountll(px & pz) + __builtin_popcountll(xq & zq)
                  - __builtin_popcountll(xr & zr) + 2 * __builtin_popcountll(pz & xq))
    e = e & 3
    return 1 if e == 1 else -1


def rotate(double[::1] c, int n, u64 px, u64 pz, double cs, double sn):
    """Conjugate the state by exp(-i phi/2 P) in place, with cs=cos(phi), sn=sin(phi)."""
    cdef Py_ssize_t half = c.shape[0] // 2
    cdef u64 xmask = (1ULL << n) - 1
    cdef u64 pidx = px | (pz << n)
    cdef u64 anti = pz | (px << n)
    cdef int h = 63 - __builtin_clzll(pidx)
    cdef u64 low = (1ULL << h) - 1
    cdef u64 i, a, b
    cdef double ca, cb
    cdef int sa
    if pidx == 0:
        return
    with nogil:
        # a runs over indices with bit h clear, so each pair {a, a ^ pidx} is visited once
        for i in range(<u64>half):
            a = ((i & ~low) << 1) | (i & low)
            if not __builtin_parityll(a & anti):
                continue
            b = a ^ pidx
            ca = c[a]
            cb = c[b]
            sa = _sigma(a, px, pz, xmask, n)
            # the pair rotation is orthogonal, so sigma(b) == -sigma(a)
            c[a] = cs * ca - sa * sn * cb
            c[b] = cs * cb + sa * sn * ca


def fwht(double[::1] v):
    """Unnormalised Walsh-Hadamard transform in place."""
    cdef Py_ssize_t size = v.shape[0]
    cdef Py_ssize_t h = 1
    cdef Py_ssize_t i, j
    cdef double u, w
    with nogil:
        while h < size:
            i = 0
            while i < size:
                for j in range(i, i + h):
                    u = v[j]
                    w = v[j + h]
                    v[j] = u + w
                    v[j + h] = u - w
                i += 2 * h
            h *= 2


def pair_table(int n, u64 px, u64 pz):
    """Anticommuting pairs of ``P``: (a, sign) with the partner ``a ^ pidx``."""
    import numpy as np
    cdef Py_ssize_t size = 1 << (2 * n)
    cdef u64 xmask = (1ULL << n) - 1
    cdef u64 pidx = px | (pz << n)
    cdef u64 anti = pz | (px << n)
    cdef int h = 63 - __builtin_clzll(pidx)
    cdef u64 low = (1ULL << h) - 1
    out_a = np.empty(size // 4, dtype=np.int32)
    out_s = np.empty(size // 4, dtype=np.int8)
    cdef int[::1] ta = out_a
    cdef signed char[::1] ts = out_s
    cdef Py_ssize_t k = 0
    cdef u64 i, a
    with nogil:
        for i in range(<u64>(size // 2)):
            a = ((i & ~low) << 1) | (i & low)
            if __builtin_parityll(a & anti):
                ta[k] = <int>a
                ts[k] = <signed char>_sigma(a, px, pz, xmask, n)
                k += 1
    return out_a, out_s


def rotate_table(double[::1] c, int[::1] ta, signed char[::1] ts, u64 pidx, double cs, double sn):
    cdef Py_ssize_t k, m = ta.shape[0]
    cdef Py_ssize_t a, b
    cdef double ca, cb, s
    with nogil:
        for k in range(m):
            a = ta[k]
            b = a ^ <Py_ssize_t>pidx
            ca = c[a]
            cb = c[b]
            s = ts[k] * sn
            c[a] = cs * ca - s * cb
            c[b] = cs * cb + s * ca
