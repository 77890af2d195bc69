# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Direct assembly of the real Hermitian-basis Lindbladian block.

For an input basis element built from ``|k><l|`` the image under

    L[rho] = K rho + rho K^dag + sum_c c rho c^dag,   K = -iH - sum r c^dag c

(jumps pre-scaled by sqrt(2 r)) has entries

    M_il += K_ik,   M_kj += conj(K_jl),   M_ij += c_ik conj(c_jl).

Each entry of M is scattered straight into real output coordinates, so
the complex D^2 x D^2 superoperator is never formed.
"""
import numpy as np
from libc.math cimport sqrt

ctypedef long long idx_t


cdef struct Acc:
    double* val
    char* mark
    idx_t* touched
    idx_t nt


cdef inline void _put(Acc* a, idx_t o, double v) noexcept nogil:
    if a.mark[o] == 0:
        a.mark[o] = 1
        a.touched[a.nt] = o
        a.nt += 1
    a.val[o] += v


cdef inline int _add(idx_t i, idx_t j, double vr, double vi, int kind,
                     const idx_t[:, ::1] coord, idx_t npair, double sq2,
                     Acc* s, Acc* t) noexcept nogil:
    """Scatter one entry M_ij = vr + i vi.  Returns 1 on an out-of-sector index."""
    cdef idx_t o
    if kind == 0:
        if i < j:
            o = coord[i, j]
            if o < 0:
                return 1
            _put(s, o, sq2 * vr)
            _put(s, o + npair, sq2 * vi)
        elif i == j:
            o = coord[i, i]
            if o < 0:
                return 1
            _put(s, o, vr)
        return 0
    if i < j:
        o = coord[i, j]
        if o < 0:
            return 1
        _put(s, o, vr)
        _put(s, o + npair, vi)
        _put(t, o, -vi)
        _put(t, o + npair, vr)
    elif i > j:
        o = coord[j, i]
        if o < 0:
            return 1
        _put(s, o, vr)
        _put(s, o + npair, -vi)
        _put(t, o, -vi)
        _put(t, o + npair, -vr)
    else:
        o = coord[i, i]
        if o < 0:
            return 1
        _put(s, o, sq2 * vr)
        _put(t, o, -sq2 * vi)
    return 0


cdef inline idx_t _flush(Acc* a, idx_t[::1] indices, double[::1] data, idx_t n, idx_t cap) noexcept nogil:
    """Move accumulated entries into the CSC buffers; returns new length or -1."""
    cdef idx_t q, o
    cdef double v
    for q in range(a.nt):
        o = a.touched[q]
        v = a.val[o]
        a.val[o] = 0.0
        a.mark[o] = 0
        if v != 0.0:
            if n >= cap:
                return -1
            indices[n] = o
            data[n] = v
            n += 1
    a.nt = 0
    return n


def assemble_real(idx_t D,
                  const idx_t[::1] diag,
                  const idx_t[::1] pi,
                  const idx_t[::1] pj,
                  const idx_t[:, ::1] coord,
                  const idx_t[::1] k_indptr,
                  const idx_t[::1] k_indices,
                  const double complex[::1] k_data,
                  int nj,
                  const idx_t[:, ::1] c_indptr,
                  const idx_t[::1] c_indices,
                  const double complex[::1] c_data,
                  idx_t cap_main,
                  idx_t cap_anti):
    """Return CSC ``(indptr, indices, data)`` of the real block.

    Columns are ordered diag, symmetric pairs, antisymmetric pairs, matching
    the row coordinates in ``coord``.
    """
    cdef idx_t nd = diag.shape[0]
    cdef idx_t npair = pi.shape[0]
    cdef idx_t m = nd + 2 * npair
    cdef double sq2 = sqrt(2.0)

    val_s = np.zeros(m, dtype=np.float64)
    val_t = np.zeros(m, dtype=np.float64)
    mark_s = np.zeros(m, dtype=np.int8)
    mark_t = np.zeros(m, dtype=np.int8)
    touch_s = np.zeros(m, dtype=np.int64)
    touch_t = np.zeros(m, dtype=np.int64)
    cdef double[::1] vs = val_s, vt = val_t
    cdef signed char[::1] ms = mark_s, mt = mark_t
    cdef idx_t[::1] ts = touch_s, tt = touch_t
    cdef Acc s, t
    s.val = &vs[0]; s.mark = <char*>&ms[0]; s.touched = &ts[0]; s.nt = 0
    t.val = &vt[0]; t.mark = <char*>&mt[0]; t.touched = &tt[0]; t.nt = 0

    out_ptr1 = np.zeros(nd + npair + 1, dtype=np.int64)
    out_idx1 = np.empty(max(cap_main, 1), dtype=np.int64)
    out_dat1 = np.empty(max(cap_main, 1), dtype=np.float64)
    out_ptr2 = np.zeros(npair + 1, dtype=np.int64)
    out_idx2 = np.empty(max(cap_anti, 1), dtype=np.int64)
    out_dat2 = np.empty(max(cap_anti, 1), dtype=np.float64)
    cdef idx_t[::1] ptr1 = out_ptr1, idx1 = out_idx1, ptr2 = out_ptr2, idx2 = out_idx2
    cdef double[::1] dat1 = out_dat1, dat2 = out_dat2

    cdef idx_t col, k, l, p, q, n, i, j
    cdef idx_t n1 = 0, n2 = 0
    cdef int kind, bad = 0
    cdef double complex z
    cdef idx_t ncol = nd + npair

    with nogil:
        for col in range(ncol):
            if col < nd:
                k = diag[col]
                l = k
                kind = 0
            else:
                k = pi[col - nd]
                l = pj[col - nd]
                kind = 1
            # K rho
            for p in range(k_indptr[k], k_indptr[k + 1]):
                z = k_data[p]
                bad |= _add(k_indices[p], l, z.real, z.imag, kind, coord, npair, sq2, &s, &t)
            # rho K^dag
            for p in range(k_indptr[l], k_indptr[l + 1]):
                z = k_data[p]
                bad |= _add(k, k_indices[p], z.real, -z.imag, kind, coord, npair, sq2, &s, &t)
            # c rho c^dag
            for n in range(nj):
                for p in range(c_indptr[n, k], c_indptr[n, k + 1]):
                    i = c_indices[p]
                    for q in range(c_indptr[n, l], c_indptr[n, l + 1]):
                        j = c_indices[q]
                        z = c_data[p] * c_data[q].conjugate()
                        bad |= _add(i, j, z.real, z.imag, kind, coord, npair, sq2, &s, &t)
            if bad:
                break
            n1 = _flush(&s, idx1, dat1, n1, cap_main)
            if n1 < 0:
                break
            ptr1[col + 1] = n1
            if kind == 1:
                n2 = _flush(&t, idx2, dat2, n2, cap_anti)
                if n2 < 0:
                    break
                ptr2[col - nd + 1] = n2

    if bad:
        raise ValueError("operator couples different parity sectors")
    if n1 < 0 or n2 < 0:
        raise RuntimeError("output buffer too small")

    indptr = np.concatenate([out_ptr1, out_ptr2[1:] + n1])
    indices = np.concatenate([out_idx1[:n1], out_idx2[:n2]])
    data = np.concatenate([out_dat1[:n1], out_dat2[:n2]])
    return indptr, indices, data
