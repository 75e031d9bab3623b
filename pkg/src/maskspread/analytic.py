"""Branching-process predictions for the multi-type mask model.

A type-i node reached along an edge spawns infections whose type-generating
function is ``Gamma_i(s) = G(sum_j m_j (1 - T_ij + T_ij s_j))``; the seed uses
``g`` instead of ``G``. Extinction probabilities are the minimal fixed point of
``Gamma`` and the final epidemic size comes from the same recursion with the
transmissibility matrix transposed (infection flows *into* the node).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .degree import DegreeModel, excess_factor
from .errors import ConvergenceError, RankOneRequiredError
from .masks import MaskEnsemble

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 10**6
# |R0 - 1| below this is reported as critical and handled as subcritical
CRITICAL_BAND = 1e-9


def _affine_arg(ensemble: MaskEnsemble, s, transpose=False):
    s = np.asarray(s, dtype=float)
    if s.shape != (ensemble.M,):
        raise ValueError(f"s must have length {ensemble.M}, got shape {s.shape}")
    if np.any(s < 0) or np.any(s > 1):
        raise ValueError(f"s must lie in [0, 1]^M, got {s!r}")
    T = ensemble.T.T if transpose else ensemble.T
    # sum_j m_j (1 - T_ij + T_ij s_j) == 1 - sum_j T_ij m_j (1 - s_j)
    x = 1.0 - T @ (ensemble.m * (1.0 - s))
    return np.clip(x, 0.0, 1.0)


def gamma(ensemble, model: DegreeModel, s):
    """Vector of seed-generation PGFs (gamma_1, ..., gamma_M) at ``s``."""
    return model.pgf(_affine_arg(ensemble, s))


def Gamma(ensemble, model: DegreeModel, s):
    """Vector of later-generation PGFs (Gamma_1, ..., Gamma_M) at ``s``."""
    return model.excess_pgf(_affine_arg(ensemble, s))


def _check_index(ensemble, i):
    if not 0 <= i < ensemble.M:
        raise IndexError(f"type index {i} out of range for M = {ensemble.M}")


def gamma_i(ensemble, model, s, i: int) -> float:
    _check_index(ensemble, i)
    return float(gamma(ensemble, model, s)[i])


def Gamma_i(ensemble, model, s, i: int) -> float:
    _check_index(ensemble, i)
    return float(Gamma(ensemble, model, s)[i])


def spectral_radius(A) -> float:
    """Spectral radius of a non-negative square matrix.

    Type counts are small, so a dense eigenvalue solve is both exact to
    rounding and immune to the stalls power iteration suffers on periodic,
    reducible or defective matrices.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if np.any(~np.isfinite(A)) or np.any(A < 0):
        raise ValueError("spectral_radius expects a finite non-negative matrix")
    if not A.any():
        return 0.0
    # the Perron root is real and dominant; drop the rounding-level imaginary part
    return float(np.max(np.abs(np.linalg.eigvals(A))))


def reproduction_number(ensemble: MaskEnsemble, model: DegreeModel) -> float:
    """R0 = (<k^2> - <k>)/<k> * rho(T diag(m))."""
    return excess_factor(model) * spectral_radius(ensemble.T * ensemble.m[None, :])


def reproduction_number_rank_one(ensemble: MaskEnsemble, model: DegreeModel) -> float:
    """R0 for efficiency-built ensembles: mean excess degree times sum_i m_i T_ii."""
    if not ensemble.rank_one:
        raise RankOneRequiredError("closed-form R0 needs an ensemble built from efficiencies")
    return excess_factor(model) * float(np.dot(ensemble.m, np.diag(ensemble.T)))


def is_supercritical(r0: float) -> bool:
    return r0 > 1.0 + CRITICAL_BAND


class ExtinctionSolution(NamedTuple):
    Q: np.ndarray
    iterations: int
    residual: float


class SizeSolution(NamedTuple):
    q1: np.ndarray
    q0: np.ndarray
    iterations: int
    residual: float
    theta: np.ndarray


def _warn_if_not_regular(ensemble):
    if not ensemble.positive_regular:
        warnings.warn(
            "ensemble has zero transmissibilities; the branching process may not be positive "
            "regular and fixed-point uniqueness is not guaranteed",
            RuntimeWarning,
            stacklevel=3,
        )


def _iterate(step, start, tol, max_iter, what, monotone=False):
    cur = start
    residual = np.inf
    for it in range(1, max_iter + 1):
        nxt = step(cur)
        if __debug__:
            assert np.all((nxt >= 0.0) & (nxt <= 1.0)), "iterate left [0, 1]^M"
            if monotone:
                assert np.all(nxt >= cur - 1e-14), "extinction iterates must be nondecreasing"
        residual = float(np.max(np.abs(nxt - cur)))
        cur = nxt
        if residual < tol:
            return cur, it, residual
    raise ConvergenceError(
        f"{what} did not converge in {max_iter} iterations (residual {residual:.3e})",
        residual=residual,
        last_iterate=cur,
        iterations=max_iter,
    )


def extinction_fixed_point(ensemble, model, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER) -> ExtinctionSolution:
    """Minimal fixed point Q = Gamma(Q), reached by iterating Gamma from 0.

    Critical and subcritical ensembles (R0 <= 1 + CRITICAL_BAND) return the
    all-ones vector directly: that is the limit, and iterating towards it
    near R0 = 1 converges only sublinearly.
    """
    _warn_if_not_regular(ensemble)
    ones = np.ones(ensemble.M)
    if not is_supercritical(reproduction_number(ensemble, model)):
        return ExtinctionSolution(ones, 0, float(np.max(np.abs(Gamma(ensemble, model, ones) - 1.0))))
    Q, it, res = _iterate(
        lambda s: Gamma(ensemble, model, s), np.zeros(ensemble.M), tol, max_iter, "extinction iteration", True
    )
    return ExtinctionSolution(Q, it, res)


def emergence_probabilities(ensemble, model, Q):
    """Per-seed-type PE ``1 - gamma_i(Q)`` and the prevalence-weighted mixture."""
    Q = np.asarray(Q, dtype=float)
    if np.all(Q == 1.0):
        pe = np.zeros(ensemble.M)
    else:
        pe = np.clip(1.0 - gamma(ensemble, model, Q), 0.0, 1.0)
    return pe, float(np.dot(ensemble.m, pe))


def epidemic_size_fixed_point(
    ensemble, model, theta=None, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER
) -> SizeSolution:
    """Non-infection probabilities (q1 at level 1, q0 at the root).

    ``q1`` is the limit of ``F(q) = G(sum_j m_j (1 - T_ji + T_ji q_j))`` iterated
    from ``theta`` (default 0.5 for every type); ``q0 = g(...)`` of the same
    argument at ``q1``.
    """
    M = ensemble.M
    theta = np.full(M, 0.5) if theta is None else np.asarray(theta, dtype=float)
    if theta.shape != (M,) or np.any(theta <= 0) or np.any(theta >= 1):
        raise ValueError(f"theta must have {M} entries strictly inside (0, 1), got {theta!r}")
    _warn_if_not_regular(ensemble)
    ones = np.ones(M)
    if not is_supercritical(reproduction_number(ensemble, model)):
        return SizeSolution(ones, ones.copy(), 0, 0.0, theta)
    q1, it, res = _iterate(
        lambda q: model.excess_pgf(_affine_arg(ensemble, q, transpose=True)),
        theta,
        tol,
        max_iter,
        "epidemic-size iteration",
    )
    q0 = model.pgf(_affine_arg(ensemble, q1, transpose=True))
    return SizeSolution(q1, q0, it, res, theta)


@dataclass
class AnalyticSummary:
    pe_by_seed_type: np.ndarray
    pe_random_seed: float
    extinction_probs: np.ndarray
    r0: float
    q1: np.ndarray
    q0: np.ndarray
    individual_infection_prob: np.ndarray
    epidemic_size_by_type: np.ndarray
    total_epidemic_size: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def critical(self) -> bool:
        return abs(self.r0 - 1.0) < CRITICAL_BAND


def summarize(ensemble, model, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, theta=None) -> AnalyticSummary:
    r0 = reproduction_number(ensemble, model)
    ext = extinction_fixed_point(ensemble, model, tol, max_iter)
    pe, pe_random = emergence_probabilities(ensemble, model, ext.Q)
    size = epidemic_size_fixed_point(ensemble, model, theta, tol, max_iter)
    indiv = np.clip(1.0 - size.q0, 0.0, 1.0)
    es = ensemble.m * indiv
    return AnalyticSummary(
        pe_by_seed_type=pe,
        pe_random_seed=pe_random,
        extinction_probs=ext.Q,
        r0=r0,
        q1=size.q1,
        q0=size.q0,
        individual_infection_prob=indiv,
        epidemic_size_by_type=es,
        total_epidemic_size=float(es.sum()),
        diagnostics={
            "extinction_iterations": ext.iterations,
            "extinction_residual": ext.residual,
            "size_iterations": size.iterations,
            "size_residual": size.residual,
            "theta": size.theta,
        },
    )
