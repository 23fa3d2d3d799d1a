# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled join/count kernels over CSR-encoded relation arrays.

All inputs are int64 numpy arrays prepared by KnowledgeGraph.relation_arrays.
The hot loops run without the GIL so mining threads can overlap.
"""

from libc.stdint cimport int64_t


cdef Py_ssize_t _lower_bound(const int64_t[::1] arr, int64_t key) noexcept nogil:
    cdef Py_ssize_t lo = 0, hi = arr.shape[0], mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if arr[mid] < key:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef bint _binary_contains(const int64_t[::1] arr, int64_t key) noexcept nogil:
    cdef Py_ssize_t pos = _lower_bound(arr, key)
    return pos < arr.shape[0] and arr[pos] == key


def join_fanout(const int64_t[::1] p_obj,
                const int64_t[::1] q_subj_unique,
                const int64_t[::1] q_indptr):
    """Total number of (p fact, matching q fact) combinations."""
    cdef Py_ssize_t i, pos
    cdef int64_t total = 0
    with nogil:
        for i in range(p_obj.shape[0]):
            pos = _lower_bound(q_subj_unique, p_obj[i])
            if pos < q_subj_unique.shape[0] and q_subj_unique[pos] == p_obj[i]:
                total += q_indptr[pos + 1] - q_indptr[pos]
    return total


def fill_join(const int64_t[::1] p_subj,
              const int64_t[::1] p_obj,
              const int64_t[::1] q_subj_unique,
              const int64_t[::1] q_indptr,
              const int64_t[::1] q_obj,
              int64_t n_entities,
              int64_t[::1] out):
    """Write every encoded pair subject*n_entities+object of the 2-hop
    join into ``out`` (sized by join_fanout); duplicates are kept."""
    cdef Py_ssize_t i, j, pos, cursor = 0
    cdef int64_t base
    with nogil:
        for i in range(p_subj.shape[0]):
            pos = _lower_bound(q_subj_unique, p_obj[i])
            if pos < q_subj_unique.shape[0] and q_subj_unique[pos] == p_obj[i]:
                base = p_subj[i] * n_entities
                for j in range(q_indptr[pos], q_indptr[pos + 1]):
                    out[cursor] = base + q_obj[j]
                    cursor += 1
    return cursor


def intersect_count(const int64_t[::1] a, const int64_t[::1] b):
    """Size of the intersection of two sorted unique arrays."""
    cdef Py_ssize_t i = 0, j = 0
    cdef int64_t count = 0
    with nogil:
        while i < a.shape[0] and j < b.shape[0]:
            if a[i] < b[j]:
                i += 1
            elif a[i] > b[j]:
                j += 1
            else:
                count += 1
                i += 1
                j += 1
    return count


def member_count_div(const int64_t[::1] keys,
                     const int64_t[::1] sorted_values,
                     int64_t divisor):
    """Count keys whose key // divisor is in ``sorted_values``."""
    cdef Py_ssize_t i
    cdef int64_t count = 0
    with nogil:
        for i in range(keys.shape[0]):
            if _binary_contains(sorted_values, keys[i] // divisor):
                count += 1
    return count
