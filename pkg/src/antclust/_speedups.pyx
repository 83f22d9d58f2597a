# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: meeting phases and descriptor Hamming matching.

Every kernel mirrors the pure-Python route operation for operation in
double precision, so results are bit-identical across backends (the build
disables FP contraction to keep it that way).
"""

from libc.stdint cimport int64_t, uint8_t, uint64_t
from libc.string cimport memcpy

cdef extern from *:
    """
    #if defined(_MSC_VER)
    #include <intrin.h>
    static unsigned long long antclust_popcount64(unsigned long long x)
    { return __popcnt64(x); }
    #else
    static unsigned long long antclust_popcount64(unsigned long long x)
    { return __builtin_popcountll(x); }
    #endif
    """
    unsigned long long antclust_popcount64(unsigned long long x) nogil


cdef inline long long _hamming(const uint8_t *p, const uint8_t *q, Py_ssize_t width) nogil:
    cdef Py_ssize_t k = 0
    cdef long long dist = 0
    cdef uint64_t a, b
    while k + 8 <= width:
        memcpy(&a, p + k, 8)
        memcpy(&b, q + k, 8)
        dist += <long long> antclust_popcount64(a ^ b)
        k += 8
    while k < width:
        dist += <long long> antclust_popcount64(<uint64_t> (p[k] ^ q[k]))
        k += 1
    return dist


cdef inline long long _min_cross(const uint8_t *a, Py_ssize_t na,
                                 const uint8_t *b, Py_ssize_t nb,
                                 Py_ssize_t width) nogil:
    cdef Py_ssize_t i, j
    cdef long long best = 8 * width
    cdef long long d
    for i in range(na):
        for j in range(nb):
            d = _hamming(a + i * width, b + j * width, width)
            if d < best:
                best = d
                if best == 0:
                    return 0
    return best


def min_cross_hamming(const uint8_t[:, ::1] a, const uint8_t[:, ::1] b):
    """Smallest Hamming distance over all cross pairs of descriptor rows."""
    if a.shape[1] != b.shape[1]:
        raise ValueError("descriptor widths differ")
    cdef long long best
    with nogil:
        best = _min_cross(&a[0, 0], a.shape[0], &b[0, 0], b.shape[0], a.shape[1])
    return best


def descriptor_similarity_matrix(const uint8_t[:, ::1] flat,
                                 const int64_t[::1] offsets,
                                 double[:, ::1] out):
    """Fill ``out`` with best-match similarities for stacked descriptor sets.

    ``flat`` holds all items' descriptors row-stacked; item i owns rows
    ``offsets[i]:offsets[i+1]``.
    """
    cdef Py_ssize_t n = offsets.shape[0] - 1
    cdef Py_ssize_t width = flat.shape[1]
    cdef const uint8_t *base = &flat[0, 0]
    cdef double denom = 8.0 * width
    cdef Py_ssize_t i, j
    cdef long long best
    cdef double s
    with nogil:
        for i in range(n):
            out[i, i] = 1.0
            for j in range(i + 1, n):
                best = _min_cross(base + offsets[i] * width, offsets[i + 1] - offsets[i],
                                  base + offsets[j] * width, offsets[j + 1] - offsets[j],
                                  width)
                s = 1.0 - (<double> best) / denom
                out[i, j] = s
                out[j, i] = s


cdef inline void _observe(double *smax, double *smean, double *tmpl,
                          int64_t *count, int64_t *age,
                          Py_ssize_t idx, double s) nogil:
    count[idx] += 1
    age[idx] += 1
    if s > smax[idx]:
        smax[idx] = s
    smean[idx] += (s - smean[idx]) / <double> count[idx]
    tmpl[idx] = (smean[idx] + smax[idx]) / 2.0


def learn_templates(const double[:, ::1] sim, const int64_t[:, ::1] partners,
                    double[::1] sim_max, double[::1] sim_mean, double[::1] template,
                    int64_t[::1] meeting_count, int64_t[::1] age):
    """Phase-2 loop: ant a meets partners[a, :]; both sides record each sim."""
    cdef Py_ssize_t n = partners.shape[0]
    cdef Py_ssize_t k = partners.shape[1]
    cdef const double *sim_base = &sim[0, 0]
    cdef double *smax = &sim_max[0]
    cdef double *smean = &sim_mean[0]
    cdef double *tmpl = &template[0]
    cdef int64_t *count = &meeting_count[0]
    cdef int64_t *ages = &age[0]
    cdef Py_ssize_t a, t, p
    cdef double s
    with nogil:
        for a in range(n):
            for t in range(k):
                p = <Py_ssize_t> partners[a, t]
                s = sim_base[a * n + p]
                _observe(smax, smean, tmpl, count, ages, a, s)
                _observe(smax, smean, tmpl, count, ages, p, s)


def labroche_meeting_phase(const double[:, ::1] sim,
                           const int64_t[::1] first, const int64_t[::1] second,
                           int64_t[::1] labels, double[::1] m, double[::1] m_plus,
                           double[::1] sim_max, double[::1] sim_mean, double[::1] template,
                           int64_t[::1] meeting_count, int64_t[::1] age,
                           double alpha, long long next_label):
    """Phase-3 loop with the built-in rule set; returns the next fresh label.

    Unlabeled ants carry label -1. Semantics match rules.LABROCHE_RULES:
    observation first, acceptance on the updated templates, then the first
    matching rule.
    """
    cdef Py_ssize_t n = labels.shape[0]
    cdef Py_ssize_t meetings = first.shape[0]
    cdef const double *sim_base = &sim[0, 0]
    cdef double *smax = &sim_max[0]
    cdef double *smean = &sim_mean[0]
    cdef double *tmpl = &template[0]
    cdef int64_t *count = &meeting_count[0]
    cdef int64_t *ages = &age[0]
    cdef int64_t *lab = &labels[0]
    cdef double *est_m = &m[0]
    cdef double *est_mp = &m_plus[0]
    cdef double keep = 1.0 - alpha
    cdef int64_t nxt = <int64_t> next_label
    cdef Py_ssize_t t, i, j
    cdef int64_t li, lj
    cdef double s
    cdef bint accepted
    with nogil:
        for t in range(meetings):
            i = <Py_ssize_t> first[t]
            j = <Py_ssize_t> second[t]
            s = sim_base[i * n + j]
            _observe(smax, smean, tmpl, count, ages, i, s)
            _observe(smax, smean, tmpl, count, ages, j, s)
            accepted = s > tmpl[i] and s > tmpl[j]
            li = lab[i]
            lj = lab[j]
            if li < 0 and lj < 0:
                if accepted:  # R1: found each other, found a colony
                    lab[i] = nxt
                    lab[j] = nxt
                    nxt += 1
            elif li < 0 or lj < 0:
                if accepted:  # R2: the homeless ant is absorbed
                    if li < 0:
                        lab[i] = lj
                    else:
                        lab[j] = li
            elif li == lj:
                if accepted:  # R3: nestmates in good standing
                    est_m[i] = keep * est_m[i] + alpha
                    est_m[j] = keep * est_m[j] + alpha
                    est_mp[i] = keep * est_mp[i] + alpha
                    est_mp[j] = keep * est_mp[j] + alpha
                else:  # R4: rejecting nestmates, the worse integrated is evicted
                    est_m[i] = keep * est_m[i] + alpha
                    est_m[j] = keep * est_m[j] + alpha
                    est_mp[i] = keep * est_mp[i]
                    est_mp[j] = keep * est_mp[j]
                    if est_mp[i] < est_mp[j]:
                        lab[i] = -1
                        est_mp[i] = 0.0
                    else:
                        lab[j] = -1
                        est_mp[j] = 0.0
            else:
                if accepted:  # R5: the smaller colony's ant defects
                    est_m[i] = keep * est_m[i]
                    est_m[j] = keep * est_m[j]
                    if est_m[i] < est_m[j]:
                        lab[i] = lj
                    else:
                        lab[j] = li
    return nxt
