"""Configuration-model contact networks with i.i.d. mask types.

Stubs are matched by shuffling the stub array and pairing neighbours, which is
an exactly uniform perfect matching. Self-loops and multi-edges are kept: a
self-loop is inert during spread and each multi-edge copy is an independent
transmission chance.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import kernels
from .degree import DegreeModel, sample_degrees

log = logging.getLogger(__name__)


@dataclass(eq=False)
class ContactNetwork:
    n_nodes: int
    edges: np.ndarray  # (E, 2) int64, in stub-matching order
    offsets: np.ndarray  # CSR row pointers, length n_nodes + 1
    neighbors: np.ndarray  # CSR column indices, length 2E
    node_type: np.ndarray | None = None  # 0-based type per node
    n_types: int = 0

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.offsets)

    @property
    def n_edges(self) -> int:
        return self.edges.shape[0]

    @property
    def self_loops(self) -> np.ndarray:
        """Boolean mask over ``edges`` flagging self-loops."""
        return self.edges[:, 0] == self.edges[:, 1]

    def defect_counts(self) -> tuple[int, int]:
        """(self-loops, surplus multi-edge copies) among non-loop edges."""
        loops = int(self.self_loops.sum())
        e = np.sort(self.edges[~self.self_loops], axis=1)
        if e.size == 0:
            return loops, 0
        key = e[:, 0] * self.n_nodes + e[:, 1]
        return loops, int(key.size - np.unique(key).size)

    def type_counts(self) -> np.ndarray:
        if self.node_type is None:
            raise ValueError("node types are not assigned")
        return np.bincount(self.node_type, minlength=self.n_types)


def _from_stubs(stubs, n_nodes) -> ContactNetwork:
    stubs = np.ascontiguousarray(stubs, dtype=np.int64)
    offsets, neighbors = kernels.build_adjacency(stubs, n_nodes)
    return ContactNetwork(n_nodes, stubs.reshape(-1, 2), offsets, neighbors)


def generate(model: DegreeModel, n_nodes: int, rng: np.random.Generator) -> ContactNetwork:
    """Draw degrees i.i.d. from ``model`` and match stubs uniformly at random.

    An odd stub total is fixed by giving one uniformly chosen node an extra stub.
    """
    if n_nodes < 2:
        raise ValueError(f"n_nodes must be at least 2, got {n_nodes}")
    deg = sample_degrees(model, n_nodes, rng)
    if deg.sum() % 2:
        deg[rng.integers(n_nodes)] += 1
    stubs = np.repeat(np.arange(n_nodes, dtype=np.int64), deg)
    rng.shuffle(stubs)
    return _from_stubs(stubs, n_nodes)


def assign_types(network: ContactNetwork, m, rng: np.random.Generator) -> None:
    """Give every node a mask type drawn independently from ``m``."""
    m = np.asarray(m, dtype=float)
    cdf = np.cumsum(m)
    cdf[-1] = 1.0
    u = rng.random(network.n_nodes)
    network.node_type = np.searchsorted(cdf, u, side="right").astype(np.int64)
    network.n_types = m.size


def from_edges(n_nodes, edges, node_type=None, n_types=None) -> ContactNetwork:
    """Build a network from an explicit edge list (fixtures and loaded dumps)."""
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    net = _from_stubs(edges.ravel(), n_nodes)
    if node_type is not None:
        net.node_type = np.asarray(node_type, dtype=np.int64)
        net.n_types = int(n_types if n_types is not None else net.node_type.max() + 1)
        if net.node_type.shape != (n_nodes,) or net.node_type.min() < 0 or net.node_type.max() >= net.n_types:
            raise ValueError("node_type must hold one type in [0, n_types) per node")
    return net


def dump(network: ContactNetwork, path) -> None:
    """Write ``n_nodes M`` then ``node_id type degree`` per node then ``u v`` per edge.

    Types are written 1-based; unassigned networks are written with M = 0 and
    type 0.
    """
    types = network.node_type + 1 if network.node_type is not None else np.zeros(network.n_nodes, np.int64)
    with open(path, "w") as fh:
        fh.write(f"{network.n_nodes} {network.n_types}\n")
        for i, (t, d) in enumerate(zip(types, network.degrees)):
            fh.write(f"{i} {t} {d}\n")
        for u, v in network.edges:
            fh.write(f"{u} {v}\n")


def load(path) -> ContactNetwork:
    with open(path) as fh:
        n_nodes, n_types = (int(x) for x in fh.readline().split())
        rows = [fh.readline().split() for _ in range(n_nodes)]
        edges = np.loadtxt(fh, dtype=np.int64, ndmin=2).reshape(-1, 2)
    types = np.array([int(r[1]) for r in rows], dtype=np.int64)
    deg = np.array([int(r[2]) for r in rows], dtype=np.int64)
    net = from_edges(n_nodes, edges)
    if not np.array_equal(net.degrees, deg):
        raise ValueError(f"{path}: degree column disagrees with the edge list")
    if n_types:
        net.node_type = types - 1
        net.n_types = n_types
    return net
