# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled triple kernels. Same contract as ``_kernels_py``."""
from libc.math cimport fabs

cdef int OK = 0
cdef int SINGULAR = 1
cdef int DEGENERATE_DENOM = 2
cdef int UNDEFINED = 3
cdef double PIVOT_RTOL = 1e-12


cdef int _solve3(double[4][4] m, double* x) noexcept nogil:
    # Rows 0..2 of m hold [A | b]; returns -1 or the failing pivot column.
    cdef int col, r, c, piv
    cdef double best, v, p, f, tmp, scale, tol
    scale = 0.0
    for r in range(3):
        v = fabs(m[r][0]) + fabs(m[r][1]) + fabs(m[r][2])
        if v > scale:
            scale = v
    tol = PIVOT_RTOL * scale
    for col in range(3):
        piv = col
        best = fabs(m[col][col])
        for r in range(col + 1, 3):
            v = fabs(m[r][col])
            if v > best:
                best = v
                piv = r
        if not best > tol:
            return col
        if piv != col:
            for c in range(4):
                tmp = m[col][c]
                m[col][c] = m[piv][c]
                m[piv][c] = tmp
        p = m[col][col]
        for r in range(col + 1, 3):
            f = m[r][col] / p
            if f != 0.0:
                for c in range(col, 4):
                    m[r][c] -= f * m[col][c]
    x[2] = m[2][3] / m[2][2]
    x[1] = (m[1][3] - m[1][2] * x[2]) / m[1][1]
    x[0] = (m[0][3] - m[0][1] * x[1] - m[0][2] * x[2]) / m[0][0]
    return -1


cdef void _score_rows(const double[:, ::1] g, const double[::1] eps,
                      const long long[:, ::1] triples,
                      double[:, ::1] coef, double[:, ::1] mapped, double[:, ::1] icpt,
                      signed char[::1] status, signed char[::1] fail_pos,
                      Py_ssize_t start, Py_ssize_t stop) noexcept nogil:
    cdef Py_ssize_t row, one = g.shape[0] - 1
    cdef int r, bad
    cdef long long q, a, b
    cdef double mm = g[one, one]
    cdef double s, ra, rb, rc, tot
    cdef double[4][4] sys
    cdef double x[3]
    cdef int pa[3]
    cdef int pb[3]
    pa[0] = 1; pb[0] = 2
    pa[1] = 0; pb[1] = 2
    pa[2] = 0; pb[2] = 1
    for row in range(start, stop):
        status[row] = OK
        fail_pos[row] = -1
        for r in range(3):
            q = triples[row, r]
            a = triples[row, pa[r]]
            b = triples[row, pb[r]]
            sys[0][0] = g[a, a]; sys[0][1] = g[a, b]; sys[0][2] = g[a, one]; sys[0][3] = g[a, q]
            sys[1][0] = g[b, a]; sys[1][1] = g[b, b]; sys[1][2] = g[b, one]; sys[1][3] = g[b, q]
            sys[2][0] = g[one, a]; sys[2][1] = g[one, b]; sys[2][2] = g[one, one]; sys[2][3] = g[one, q]
            bad = _solve3(sys, x)
            if bad >= 0:
                status[row] = SINGULAR
                fail_pos[row] = r
                break
            s = g[one, q]
            if not fabs(s) > eps[q]:
                status[row] = DEGENERATE_DENOM
                fail_pos[row] = r
                break
            ra = x[0] * g[one, a] / s
            rb = x[1] * g[one, b] / s
            rc = mm * x[2] / s
            tot = fabs(ra) + fabs(rb) + fabs(rc)
            if not tot > 0.0:
                status[row] = UNDEFINED
                fail_pos[row] = r
                break
            coef[row, 2 * r] = x[0]
            coef[row, 2 * r + 1] = x[1]
            mapped[row, 2 * r] = fabs(ra) / tot
            mapped[row, 2 * r + 1] = fabs(rb) / tot
            icpt[row, r] = x[2]


def score_batch(const double[:, ::1] gram, const double[::1] eps_denom,
                const long long[:, ::1] triples,
                double[:, ::1] coef, double[:, ::1] mapped, double[:, ::1] icpt,
                signed char[::1] status, signed char[::1] fail_pos):
    """Fit and score every triple in ``triples`` (K x 3) into the outputs."""
    with nogil:
        _score_rows(gram, eps_denom, triples, coef, mapped, icpt, status, fail_pos,
                    0, triples.shape[0])


def replay(const long long[:, ::1] triples, const double[:, ::1] coef,
           const double[:, ::1] mapped, const double[:, ::1] icpt,
           const signed char[::1] status,
           double[:, ::1] strn, long long[:, ::1] drct, double[:, ::1] pcnt,
           double[::1] err):
    """Apply threshold updates for each scored triple, in row order."""
    cdef Py_ssize_t row
    cdef int r, s
    cdef long long p, q
    cdef double v
    cdef int pa[3]
    cdef int pb[3]
    pa[0] = 1; pb[0] = 2
    pa[1] = 0; pb[1] = 2
    pa[2] = 0; pb[2] = 1
    with nogil:
        for row in range(triples.shape[0]):
            if status[row] != OK:
                continue
            for r in range(3):
                q = triples[row, r]
                for s in range(2):
                    p = triples[row, pa[r] if s == 0 else pb[r]]
                    v = mapped[row, 2 * r + s]
                    if v > pcnt[p, q]:
                        pcnt[p, q] = v
                        strn[p, q] = coef[row, 2 * r + s]
                        drct[p, q] += 1
                        err[q] = icpt[row, r]
