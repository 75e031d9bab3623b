"""Pure-Python/numpy versions of the compiled kernels.

Same inputs, same outputs and the same random-number consumption as
``_kernels.pyx``, so a run is reproducible whichever backend is loaded.
"""
import numpy as np

BACKEND = "python"


def build_adjacency(stubs, n_nodes):
    stubs = np.ascontiguousarray(stubs, dtype=np.int64)
    if stubs.size % 2:
        raise ValueError("stub array must have even length")
    if stubs.size and (stubs.min() < 0 or stubs.max() >= n_nodes):
        raise ValueError("stub out of range")
    partner = stubs.reshape(-1, 2)[:, ::-1].ravel()
    order = np.argsort(stubs, kind="stable")
    nbrs = partner[order]
    offsets = np.zeros(n_nodes + 1, dtype=np.int64)
    np.cumsum(np.bincount(stubs, minlength=n_nodes), out=offsets[1:])
    return offsets, nbrs


def spread(offsets, nbrs, node_type, T, seed_node, bit_generator):
    n = offsets.shape[0] - 1
    if not 0 <= seed_node < n:
        raise IndexError(f"seed node {seed_node} out of range")
    rng = np.random.Generator(bit_generator)
    infected = np.zeros(n, dtype=bool)
    infected[seed_node] = True
    order = [int(seed_node)]
    head = 0
    while head < len(order):
        u = order[head]
        head += 1
        a, b = offsets[u], offsets[u + 1]
        if a == b:
            continue
        # one uniform per edge copy, consumed in adjacency order
        r = rng.random(b - a)
        v = nbrs[a:b]
        hit = v[~infected[v] & (r < T[node_type[u], node_type[v]])]
        if hit.size:
            if hit.size > 1:
                _, first = np.unique(hit, return_index=True)
                hit = hit[np.sort(first)]
            infected[hit] = True
            order.extend(hit.tolist())
    return np.asarray(order, dtype=np.int64)
