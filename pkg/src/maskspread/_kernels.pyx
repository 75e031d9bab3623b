# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: CSR adjacency construction and SIR spread.

Both functions must stay draw-for-draw identical to ``_kernels_py``.
"""
import numpy as np

cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from libc.stdint cimport int64_t, uint8_t
from numpy.random cimport bitgen_t

cnp.import_array()

BACKEND = "cython"


def build_adjacency(const int64_t[::1] stubs, Py_ssize_t n_nodes):
    """CSR adjacency from a matched stub array (pairs ``stubs[2k], stubs[2k+1]``).

    Neighbour lists are ordered by stub position, so a self-loop shows up twice
    in its node's list and a multi-edge once per copy.
    """
    cdef Py_ssize_t n_stubs = stubs.shape[0]
    cdef Py_ssize_t p, u
    if n_stubs % 2:
        raise ValueError("stub array must have even length")
    offsets = np.zeros(n_nodes + 1, dtype=np.int64)
    nbrs = np.empty(n_stubs, dtype=np.int64)
    cursor = np.empty(n_nodes, dtype=np.int64)
    cdef int64_t[::1] off = offsets
    cdef int64_t[::1] nb = nbrs
    cdef int64_t[::1] cur = cursor
    for p in range(n_stubs):
        if stubs[p] < 0 or stubs[p] >= n_nodes:
            raise ValueError(f"stub {stubs[p]} out of range")
    with nogil:
        for p in range(n_stubs):
            off[stubs[p] + 1] += 1
        for u in range(n_nodes):
            off[u + 1] += off[u]
            cur[u] = off[u]
        for p in range(n_stubs):
            u = stubs[p]
            nb[cur[u]] = stubs[p ^ 1]
            cur[u] += 1
    return offsets, nbrs


def spread(const int64_t[::1] offsets, const int64_t[::1] nbrs, const int64_t[::1] node_type,
           const double[:, ::1] T, Py_ssize_t seed_node, object bit_generator):
    """Final infected set of one SIR outbreak, in infection order.

    FIFO over infected nodes; every incident edge copy of a processed node
    consumes one uniform, and a susceptible neighbour ``v`` of ``u`` is infected
    when that uniform is below ``T[type(u), type(v)]``.
    """
    cdef Py_ssize_t n = offsets.shape[0] - 1
    if not 0 <= seed_node < n:
        raise IndexError(f"seed node {seed_node} out of range")
    capsule = bit_generator.capsule
    if not PyCapsule_IsValid(capsule, "BitGenerator"):
        raise ValueError("invalid bit generator")
    cdef bitgen_t *rng = <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")

    order = np.empty(n, dtype=np.int64)
    status = np.zeros(n, dtype=np.uint8)
    cdef int64_t[::1] q = order
    cdef uint8_t[::1] st = status
    cdef Py_ssize_t head = 0, tail = 1, p, u, v
    cdef int64_t tu
    cdef double r

    q[0] = seed_node
    st[seed_node] = 1
    with bit_generator.lock, nogil:
        while head < tail:
            u = q[head]
            head += 1
            tu = node_type[u]
            for p in range(offsets[u], offsets[u + 1]):
                r = rng.next_double(rng.state)
                v = nbrs[p]
                if st[v] == 0 and r < T[tu, node_type[v]]:
                    st[v] = 1
                    q[tail] = v
                    tail += 1
    return order[:tail].copy()
