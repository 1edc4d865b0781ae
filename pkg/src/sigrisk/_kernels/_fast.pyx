# cython: language_level=3
"""Compiled kernels for the truncated tensor algebra.

All tensors are flat float64 buffers holding levels 0..depth back to back;
level k occupies ``dim**k`` slots and words are encoded base ``dim`` with the
leftmost letter most significant.  Same API as ``_reference``.
"""
import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free

cnp.import_array()

cdef enum:
    MAX_DEPTH = 32


cdef inline void _layout(Py_ssize_t dim, int depth, Py_ssize_t* off, Py_ssize_t* sz) noexcept nogil:
    cdef int k
    off[0] = 0
    sz[0] = 1
    for k in range(1, depth + 1):
        sz[k] = sz[k - 1] * dim
        off[k] = off[k - 1] + sz[k - 1]
    off[depth + 1] = off[depth] + sz[depth]


cdef void _mul(const double* a, const double* b, double* out,
               int depth, const Py_ssize_t* off, const Py_ssize_t* sz) noexcept nogil:
    cdef int k, i, j
    cdef Py_ssize_t p, ia, jb, base
    cdef double av
    for k in range(depth + 1):
        for p in range(sz[k]):
            out[off[k] + p] = 0.0
        for i in range(k + 1):
            j = k - i
            for ia in range(sz[i]):
                av = a[off[i] + ia]
                if av == 0.0:
                    continue
                base = off[k] + ia * sz[j]
                for jb in range(sz[j]):
                    out[base + jb] += av * b[off[j] + jb]


cdef void _mul_exp(double* sig, const double* inc, Py_ssize_t dim, int depth,
                   const Py_ssize_t* off, const Py_ssize_t* sz,
                   double* acc, double* nxt) noexcept nogil:
    # sig <- sig (x) exp(inc), levels updated top-down so lower levels are
    # still the old values when read.  Horner form per level.
    cdef int k, i
    cdef Py_ssize_t p, q, n
    cdef double c, s0
    cdef double* tmp
    s0 = sig[0]
    for k in range(depth, 0, -1):
        c = s0 / k
        for q in range(dim):
            acc[q] = c * inc[q]
        n = dim
        for i in range(1, k):
            c = 1.0 / (k - i)
            for p in range(n):
                acc[p] += sig[off[i] + p]
            for p in range(n):
                for q in range(dim):
                    nxt[p * dim + q] = acc[p] * inc[q] * c
            n = n * dim
            tmp = acc
            acc = nxt
            nxt = tmp
        for p in range(n):
            sig[off[k] + p] += acc[p]


def tensor_mul(const double[::1] a, const double[::1] b, Py_ssize_t dim, int depth, double[::1] out=None):
    """Truncated tensor product of two flat tensors."""
    cdef Py_ssize_t off[MAX_DEPTH + 2]
    cdef Py_ssize_t sz[MAX_DEPTH + 2]
    if depth > MAX_DEPTH:
        raise ValueError("depth too large")
    _layout(dim, depth, off, sz)
    if a.shape[0] != off[depth + 1] or b.shape[0] != off[depth + 1]:
        raise ValueError("buffer length does not match shape")
    if out is None:
        out = np.empty(off[depth + 1], dtype=np.float64)
    with nogil:
        _mul(&a[0], &b[0], &out[0], depth, off, sz)
    return np.asarray(out)


def mul_exp_inplace(double[::1] sig, const double[::1] inc, Py_ssize_t dim, int depth):
    """In place ``sig <- sig (x) exp(inc)`` for a level-1 increment ``inc``."""
    cdef Py_ssize_t off[MAX_DEPTH + 2]
    cdef Py_ssize_t sz[MAX_DEPTH + 2]
    cdef double* acc
    cdef double* nxt
    if depth > MAX_DEPTH:
        raise ValueError("depth too large")
    _layout(dim, depth, off, sz)
    if sig.shape[0] != off[depth + 1] or inc.shape[0] != dim:
        raise ValueError("buffer length does not match shape")
    acc = <double*> malloc(2 * sz[depth] * sizeof(double))
    if acc == NULL:
        raise MemoryError()
    nxt = acc + sz[depth]
    with nogil:
        _mul_exp(&sig[0], &inc[0], dim, depth, off, sz, acc, nxt)
    free(acc)


def batch_signature(const double[:, :, ::1] increments, int depth, snapshots=None):
    """Signatures of ``n`` piecewise-linear paths given their increments.

    ``increments`` has shape (n, m, dim).  ``snapshots`` is an optional
    ascending sequence of step counts in [0, m]; the prefix signature after
    that many segments is recorded for every path.
    Returns ``(sigs, flows)`` with shapes (n, D) and (n, G, D) (or None).
    """
    cdef Py_ssize_t n = increments.shape[0]
    cdef Py_ssize_t m = increments.shape[1]
    cdef Py_ssize_t dim = increments.shape[2]
    cdef Py_ssize_t off[MAX_DEPTH + 2]
    cdef Py_ssize_t sz[MAX_DEPTH + 2]
    cdef Py_ssize_t i, s, g, p, total, n_snap
    cdef double* acc
    cdef double* nxt
    cdef cnp.int64_t[::1] snap
    if depth > MAX_DEPTH:
        raise ValueError("depth too large")
    _layout(dim, depth, off, sz)
    total = off[depth + 1]
    out_np = np.zeros((n, total), dtype=np.float64)
    cdef double[:, ::1] out = out_np
    cdef double[:, :, ::1] flows
    flows_np = None
    n_snap = 0
    if snapshots is not None:
        snap_np = np.ascontiguousarray(snapshots, dtype=np.int64)
        n_snap = snap_np.shape[0]
        if n_snap and (snap_np.min() < 0 or snap_np.max() > m or np.any(np.diff(snap_np) < 0)):
            raise ValueError("snapshots must be ascending step counts in [0, m]")
        snap = snap_np
        flows_np = np.zeros((n, n_snap, total), dtype=np.float64)
        flows = flows_np
    acc = <double*> malloc(2 * sz[depth] * sizeof(double))
    if acc == NULL:
        raise MemoryError()
    nxt = acc + sz[depth]
    with nogil:
        for i in range(n):
            out[i, 0] = 1.0
            g = 0
            for s in range(m + 1):
                while g < n_snap and snap[g] == s:
                    for p in range(total):
                        flows[i, g, p] = out[i, p]
                    g += 1
                if s < m:
                    _mul_exp(&out[i, 0], &increments[i, s, 0], dim, depth, off, sz, acc, nxt)
    free(acc)
    return out_np, flows_np


def dot(cnp.ndarray a, cnp.ndarray b):
    """Plain inner product, O(len)."""
    cdef Py_ssize_t i, n = a.shape[0]
    cdef double s = 0.0
    cdef const double* pa
    cdef const double* pb
    if b.shape[0] != n:
        raise ValueError("length mismatch")
    pa = _ptr(a, n, False)
    pb = _ptr(b, n, False)
    for i in range(n):
        s += pa[i] * pb[i]
    return s


cdef double* _ptr(cnp.ndarray arr, Py_ssize_t n, bint write) except NULL:
    # raw data pointer of a contiguous 1-d float64 array; cheaper than a memoryview
    if (cnp.PyArray_NDIM(arr) != 1 or cnp.PyArray_TYPE(arr) != cnp.NPY_DOUBLE
            or not cnp.PyArray_IS_C_CONTIGUOUS(arr) or cnp.PyArray_DIM(arr, 0) != n):
        raise ValueError("expected a contiguous float64 vector of the right length")
    if write and not cnp.PyArray_ISWRITEABLE(arr):
        raise ValueError("output buffer is read-only")
    return <double*> cnp.PyArray_DATA(arr)


def advance(cnp.ndarray sig, cnp.ndarray last, cnp.ndarray first, cnp.ndarray point,
            Py_ssize_t dim, int depth):
    """One streaming step to ``point``.

    ``sig <- sig (x) exp(point - last)``, then level 1 is reset to the exact
    chord ``point - first`` and ``last <- point``.  Returns False, leaving
    everything untouched, when ``point`` is not finite.
    """
    cdef Py_ssize_t off[MAX_DEPTH + 2]
    cdef Py_ssize_t sz[MAX_DEPTH + 2]
    cdef double inc[64]
    cdef double* acc
    cdef double* ps
    cdef double* pl
    cdef const double* pf
    cdef const double* pp
    cdef Py_ssize_t q
    if depth > MAX_DEPTH or dim > 64:
        raise ValueError("shape too large for the streaming kernel")
    _layout(dim, depth, off, sz)
    ps = _ptr(sig, off[depth + 1], True)
    pl = _ptr(last, dim, True)
    pf = _ptr(first, dim, False)
    pp = _ptr(point, dim, False)
    for q in range(dim):
        if not (pp[q] - pp[q] == 0.0):
            return False
        inc[q] = pp[q] - pl[q]
    acc = <double*> malloc(2 * sz[depth] * sizeof(double))
    if acc == NULL:
        raise MemoryError()
    _mul_exp(ps, inc, dim, depth, off, sz, acc, acc + sz[depth])
    free(acc)
    for q in range(dim):
        ps[1 + q] = pp[q] - pf[q]
        pl[q] = pp[q]
    return True
