"""Degree distributions for configuration-model networks.

Two families are supported: Poisson (closed-form generating functions) and
an arbitrary finite pmf. Both expose the ordinary PGF ``g``, the excess-degree
PGF ``G`` and the first two moments, which is everything the branching-process
formulas need.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateModelError, DomainError

PMF_TOLERANCE = 1e-12


def _check_unit(x):
    xa = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(xa)) or np.any(xa < 0.0) or np.any(xa > 1.0):
        raise DomainError(f"PGF argument must lie in [0, 1], got {x!r}")
    return xa


class DegreeModel:
    """Base class; use :class:`Poisson` or :class:`Empirical`."""

    kind: str

    def pgf(self, x):
        raise NotImplementedError

    def excess_pgf(self, x):
        raise NotImplementedError

    def moments(self) -> tuple[float, float]:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size=None):
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Poisson(DegreeModel):
    mean: float
    kind = "poisson"

    def __post_init__(self):
        if not (math.isfinite(self.mean) and self.mean > 0):
            raise ValueError(f"Poisson mean must be a positive finite number, got {self.mean!r}")

    def pgf(self, x):
        xa = _check_unit(x)
        return np.exp(self.mean * (xa - 1.0))

    def excess_pgf(self, x):
        # the excess distribution of a Poisson law is the same Poisson law
        return self.pgf(x)

    def moments(self):
        lam = float(self.mean)
        return lam, lam * lam + lam

    def sample(self, rng, size=None):
        return rng.poisson(self.mean, size=size)

    def to_dict(self):
        return {"kind": "poisson", "mean": float(self.mean)}


class Empirical(DegreeModel):
    """Finite degree pmf given as parallel sequences of degrees and probabilities."""

    kind = "empirical"

    def __init__(self, degrees, probabilities):
        k = np.asarray(degrees)
        p = np.asarray(probabilities, dtype=float)
        if k.ndim != 1 or p.ndim != 1 or k.size != p.size or k.size == 0:
            raise ValueError("degrees and probabilities must be non-empty 1-d sequences of equal length")
        if not np.all(np.equal(np.mod(k, 1), 0)) or np.any(k < 0):
            raise ValueError(f"degrees must be non-negative integers, got {list(degrees)!r}")
        k = k.astype(np.int64)
        if np.unique(k).size != k.size:
            raise ValueError(f"degrees must be distinct, got {k.tolist()!r}")
        if np.any(~np.isfinite(p)) or np.any(p < 0):
            raise ValueError(f"probabilities must be non-negative, got {p.tolist()!r}")
        total = p.sum()
        if abs(total - 1.0) > PMF_TOLERANCE:
            raise ValueError(f"probabilities sum to {total!r}, not 1 (tolerance {PMF_TOLERANCE})")
        order = np.argsort(k)
        self.degrees = k[order]
        self.probabilities = p[order] / total
        self.degrees.setflags(write=False)
        self.probabilities.setflags(write=False)
        self._mean = float(np.dot(self.degrees, self.probabilities))
        self._second = float(np.dot(self.degrees.astype(float) ** 2, self.probabilities))

    @classmethod
    def from_mapping(cls, pmf: dict) -> "Empirical":
        return cls(list(pmf.keys()), list(pmf.values()))

    def __repr__(self):
        pairs = ", ".join(f"{k}: {p:g}" for k, p in zip(self.degrees, self.probabilities))
        return f"Empirical({{{pairs}}})"

    def __eq__(self, other):
        return (
            isinstance(other, Empirical)
            and np.array_equal(self.degrees, other.degrees)
            and np.array_equal(self.probabilities, other.probabilities)
        )

    def __hash__(self):
        return hash((self.degrees.tobytes(), self.probabilities.tobytes()))

    def pgf(self, x):
        xa = _check_unit(x)
        return np.sum(self.probabilities * np.power.outer(xa, self.degrees), axis=-1)

    def excess_pgf(self, x):
        xa = _check_unit(x)
        if self._mean == 0:
            raise DegenerateModelError("excess degree undefined for a model with mean degree 0")
        pos = self.degrees > 0
        w = self.degrees[pos] * self.probabilities[pos] / self._mean
        return np.sum(w * np.power.outer(xa, self.degrees[pos] - 1), axis=-1)

    def moments(self):
        return self._mean, self._second

    def sample(self, rng, size=None):
        return rng.choice(self.degrees, size=size, p=self.probabilities)

    def to_dict(self):
        return {
            "kind": "empirical",
            "degrees": [int(k) for k in self.degrees],
            "probabilities": [float(p) for p in self.probabilities],
        }


def from_dict(spec: dict) -> DegreeModel:
    kind = spec.get("kind")
    if kind == "poisson":
        return Poisson(float(spec["mean"]))
    if kind == "empirical":
        return Empirical(spec["degrees"], spec["probabilities"])
    raise ValueError(f"unknown degree model kind {kind!r}")


def pgf_g(model: DegreeModel, x):
    """g(x) = sum_k p_k x^k."""
    out = model.pgf(x)
    return float(out) if np.ndim(out) == 0 else out


def pgf_G(model: DegreeModel, x):
    """G(x) = sum_k (k p_k / <k>) x^(k-1), the excess-degree PGF."""
    if model.moments()[0] == 0:
        raise DegenerateModelError("excess degree undefined for a model with mean degree 0")
    out = model.excess_pgf(x)
    return float(out) if np.ndim(out) == 0 else out


def moments(model: DegreeModel) -> tuple[float, float]:
    return model.moments()


def excess_factor(model: DegreeModel) -> float:
    """Mean excess degree (<k^2> - <k>) / <k>, i.e. G'(1)."""
    k1, k2 = model.moments()
    if k1 == 0:
        raise DegenerateModelError("excess factor undefined for a model with mean degree 0")
    return (k2 - k1) / k1


def sample_degree(model: DegreeModel, rng: np.random.Generator) -> int:
    return int(model.sample(rng))


def sample_degrees(model: DegreeModel, n: int, rng: np.random.Generator) -> np.ndarray:
    return np.asarray(model.sample(rng, size=n), dtype=np.int64)
