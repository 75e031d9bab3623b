"""Mask-type ensembles: prevalences and the pairwise transmissibility matrix."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

SIMPLEX_TOLERANCE = 1e-12


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _check_prevalence(m):
    m = np.asarray(m, dtype=float)
    if m.ndim != 1 or m.size == 0:
        raise ValidationError("m must be a non-empty vector")
    for i, v in enumerate(m):
        if not np.isfinite(v) or v <= 0:
            raise ValidationError(f"m[{i}] = {v!r}: every prevalence must be strictly positive")
    total = m.sum()
    if abs(total - 1.0) > SIMPLEX_TOLERANCE:
        raise ValidationError(f"m sums to {total!r}, expected 1")
    return m / total


def _check_unit_vector(name, v, size):
    v = np.asarray(v, dtype=float)
    if v.shape != (size,):
        raise ValidationError(f"{name} must have length {size}, got shape {v.shape}")
    for i, x in enumerate(v):
        if not (np.isfinite(x) and 0.0 <= x <= 1.0):
            raise ValidationError(f"{name}[{i}] = {x!r} is outside [0, 1]")
    return v


def _default_labels(labels, size):
    if labels is None:
        return tuple(f"type-{i + 1}" for i in range(size))
    labels = tuple(str(s) for s in labels)
    if len(labels) != size:
        raise ValidationError(f"labels must have length {size}, got {len(labels)}")
    if len(set(labels)) != size:
        raise ValidationError(f"labels must be distinct, got {labels!r}")
    return labels


@dataclass(frozen=True, eq=False)
class MaskEnsemble:
    """M mask types with prevalences ``m`` and transmissibilities ``T[i, j]``.

    ``T[i, j]`` is the probability that an infected type-i individual infects a
    susceptible type-j neighbour. With ``strict=True`` (default) every ``T[i, j]``
    must be positive, which keeps the branching process positive regular; the
    permissive mode allows zeros and the analytic solvers then warn.
    """

    m: np.ndarray
    T: np.ndarray
    labels: tuple
    eps_in: np.ndarray | None = None
    eps_out: np.ndarray | None = None
    baseline_T: float | None = None
    strict: bool = True
    rank_one: bool = field(default=False)

    @property
    def M(self) -> int:
        return self.m.size

    @property
    def positive_regular(self) -> bool:
        return bool(np.all(self.m > 0) and np.all(self.T > 0))

    @classmethod
    def from_efficiencies(cls, eps_in, eps_out, baseline_T, m, labels=None, strict=True):
        m = _check_prevalence(m)
        size = m.size
        eps_in = _check_unit_vector("eps_in", eps_in, size)
        eps_out = _check_unit_vector("eps_out", eps_out, size)
        baseline_T = float(baseline_T)
        if not (0.0 < baseline_T <= 1.0):
            raise ValidationError(f"baseline_T = {baseline_T!r} is outside (0, 1]")
        T = np.outer(eps_out, eps_in) * baseline_T
        _check_matrix(T, size, strict)
        return cls(
            m=_frozen(m),
            T=_frozen(T),
            labels=_default_labels(labels, size),
            eps_in=_frozen(eps_in),
            eps_out=_frozen(eps_out),
            baseline_T=baseline_T,
            strict=strict,
            rank_one=True,
        )

    @classmethod
    def from_matrix(cls, T, m, labels=None, strict=True):
        m = _check_prevalence(m)
        size = m.size
        T = np.asarray(T, dtype=float)
        if T.shape != (size, size):
            raise ValidationError(f"T must be {size}x{size}, got shape {T.shape}")
        _check_matrix(T, size, strict)
        return cls(m=_frozen(m), T=_frozen(T), labels=_default_labels(labels, size), strict=strict)

    def permuted(self, perm) -> "MaskEnsemble":
        """Reorder the types; ``perm[k]`` is the old index of new type k."""
        perm = np.asarray(perm)
        labels = tuple(self.labels[i] for i in perm)
        if self.rank_one:
            return MaskEnsemble.from_efficiencies(
                self.eps_in[perm], self.eps_out[perm], self.baseline_T, self.m[perm], labels, self.strict
            )
        return MaskEnsemble.from_matrix(self.T[np.ix_(perm, perm)], self.m[perm], labels, self.strict)

    def with_prevalence(self, m) -> "MaskEnsemble":
        if self.rank_one:
            return MaskEnsemble.from_efficiencies(
                self.eps_in, self.eps_out, self.baseline_T, m, self.labels, self.strict
            )
        return MaskEnsemble.from_matrix(self.T, m, self.labels, self.strict)

    def with_baseline(self, baseline_T) -> "MaskEnsemble":
        if not self.rank_one:
            raise ValidationError("baseline_T can only be changed on an efficiency-built ensemble")
        return MaskEnsemble.from_efficiencies(
            self.eps_in, self.eps_out, baseline_T, self.m, self.labels, self.strict
        )

    def to_dict(self) -> dict:
        d = {"m": self.m.tolist()}
        if self.rank_one:
            d.update(eps_in=self.eps_in.tolist(), eps_out=self.eps_out.tolist(), baseline_T=self.baseline_T)
        else:
            d["t_matrix"] = self.T.tolist()
        d["labels"] = list(self.labels)
        if not self.strict:
            d["strict"] = False
        return d

    @classmethod
    def from_dict(cls, spec: dict) -> "MaskEnsemble":
        has_eff = any(k in spec for k in ("eps_in", "eps_out", "baseline_T"))
        has_mat = "t_matrix" in spec
        if has_eff == has_mat:
            raise ValidationError("masks: give exactly one of (eps_in, eps_out, baseline_T) or t_matrix")
        if "m" not in spec:
            raise ValidationError("masks.m is required")
        strict = bool(spec.get("strict", True))
        labels = spec.get("labels")
        if has_mat:
            return cls.from_matrix(spec["t_matrix"], spec["m"], labels, strict)
        missing = [k for k in ("eps_in", "eps_out", "baseline_T") if k not in spec]
        if missing:
            raise ValidationError(f"masks: missing {', '.join(missing)}")
        return cls.from_efficiencies(spec["eps_in"], spec["eps_out"], spec["baseline_T"], spec["m"], labels, strict)


def _check_matrix(T, size, strict):
    for (i, j), x in np.ndenumerate(T):
        if not (np.isfinite(x) and 0.0 <= x <= 1.0):
            raise ValidationError(f"T[{i}][{j}] = {x!r} is outside [0, 1]")
        if strict and x == 0.0:
            raise ValidationError(
                f"T[{i}][{j}] = 0 violates strict positivity; pass strict=False for permissive mode"
            )


from_efficiencies = MaskEnsemble.from_efficiencies
from_matrix = MaskEnsemble.from_matrix
