"""Monte Carlo outbreaks on configuration-model networks.

Every trial owns its random streams, derived from ``(master_seed, trial,
attempt, ...)`` spawn keys, so results do not depend on how trials are
scheduled across threads.
"""
from __future__ import annotations

import itertools
import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels, netgen
from .errors import SimulationError

log = logging.getLogger(__name__)

RANDOM = "random"
EMERGENCE_THRESHOLD = 0.05
MAX_REDRAWS = 100

_NETWORK, _TYPES, _OUTBREAK = 0, 1, 2
_SHARED_NETWORK_KEY = 2**32 - 1


def _stream(master_seed, *key) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(master_seed, spawn_key=key)))


def _policy_code(policy) -> int:
    return 0 if policy == RANDOM else int(policy) + 1


@dataclass
class OutbreakResult:
    seed_node: int
    seed_type: int
    infected_count_by_type: np.ndarray
    total_infected: int
    emerged: bool
    trial_seed: int | None = None


def run_outbreak(
    network, ensemble, seed_node, rng, emergence_threshold=EMERGENCE_THRESHOLD, absolute_threshold=False, backend=None
) -> OutbreakResult:
    """Spread from ``seed_node`` until no newly infected node remains.

    ``emergence_threshold`` is a fraction of ``n_nodes`` unless
    ``absolute_threshold`` is set, in which case it is a node count.
    """
    if network.node_type is None or network.n_types != ensemble.M:
        raise SimulationError(
            f"network has {network.n_types} mask types but the ensemble has {ensemble.M}"
        )
    k = kernels if backend is None else backend
    order = k.spread(
        network.offsets,
        network.neighbors,
        network.node_type,
        np.ascontiguousarray(ensemble.T),
        int(seed_node),
        rng.bit_generator,
    )
    counts = np.bincount(network.node_type[order], minlength=ensemble.M)
    total = int(order.size)
    cut = emergence_threshold if absolute_threshold else emergence_threshold * network.n_nodes
    return OutbreakResult(
        seed_node=int(seed_node),
        seed_type=int(network.node_type[seed_node]),
        infected_count_by_type=counts,
        total_infected=total,
        emerged=total >= cut,
    )


def infected_set(network, ensemble, seed_node, rng, backend=None) -> frozenset:
    k = kernels if backend is None else backend
    order = k.spread(
        network.offsets, network.neighbors, network.node_type,
        np.ascontiguousarray(ensemble.T), int(seed_node), rng.bit_generator,
    )
    return frozenset(order.tolist())


def exhaustive_oracle(network, ensemble, seed_node, max_draws=24) -> dict:
    """Exact distribution of the final infected set on a tiny network.

    Every directed edge copy ``u -> v`` (``u != v``) is an independent
    Bernoulli(T[type u, type v]) arc; the infected set is the set of nodes
    reachable from the seed through open arcs. All 2^D arc outcomes are
    enumerated.
    """
    arcs = []
    for u, v in network.edges:
        if u == v:
            continue
        arcs.append((int(u), int(v)))
        arcs.append((int(v), int(u)))
    if len(arcs) > max_draws:
        raise SimulationError(f"{len(arcs)} directed draws exceeds the enumeration bound {max_draws}")
    types = network.node_type
    probs = [float(ensemble.T[types[u], types[v]]) for u, v in arcs]
    dist: dict = {}
    for outcome in itertools.product((False, True), repeat=len(arcs)):
        w = 1.0
        out = {}
        for (u, v), p, is_open in zip(arcs, probs, outcome):
            w *= p if is_open else 1.0 - p
            if is_open:
                out.setdefault(u, []).append(v)
        if w == 0.0:
            continue
        seen = {int(seed_node)}
        stack = [int(seed_node)]
        while stack:
            for v in out.get(stack.pop(), ()):
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        key = frozenset(seen)
        dist[key] = dist.get(key, 0.0) + w
    return dist


@dataclass
class TrialAggregate:
    seed_policy: object
    trials: int
    n_nodes: int
    trials_by_seed_type: np.ndarray
    emerged_by_seed_type: np.ndarray
    empirical_pe_by_seed_type: np.ndarray
    empirical_pe_by_seed_type_se: np.ndarray
    empirical_pe_random: float
    empirical_pe_random_se: float
    n_emerged: int
    mean_es_by_type_given_emergence: np.ndarray
    mean_es_by_type_given_emergence_se: np.ndarray
    mean_total_es_given_emergence: float
    mean_total_es_given_emergence_se: float
    individual_infection_prob: np.ndarray
    individual_infection_prob_se: np.ndarray
    redraws: int = 0
    outcomes: list = field(default_factory=list, repr=False)


def _binomial(k, n):
    k = np.asarray(k, dtype=float)
    n = np.asarray(n, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        p = np.where(n > 0, k / np.maximum(n, 1), np.nan)
        se = np.where(n > 0, np.sqrt(p * (1 - p) / np.maximum(n, 1)), np.nan)
    return p, se


def _mean_se(x):
    """Column means and standard errors; NaN when there are no rows."""
    x = np.asarray(x, dtype=float)
    k = x.shape[0]
    if k == 0:
        nan = np.full(x.shape[1:], np.nan)
        return nan, nan.copy()
    mean = x.mean(axis=0)
    se = x.std(axis=0, ddof=1) / np.sqrt(k) if k > 1 else np.full(x.shape[1:], np.nan)
    return mean, se


def aggregate(policy, outcomes, n_nodes, M, redraws=0, keep_outcomes=False) -> TrialAggregate:
    """Reduce per-trial ``(OutbreakResult, type_counts)`` pairs, in trial order."""
    trials = len(outcomes)
    seed_types = np.array([o.seed_type for o, _ in outcomes], dtype=np.int64)
    emerged = np.array([o.emerged for o, _ in outcomes], dtype=bool)
    by_type = np.bincount(seed_types, minlength=M)
    em_by_type = np.bincount(seed_types[emerged], minlength=M)
    pe_type, pe_type_se = _binomial(em_by_type, by_type)
    if policy == RANDOM:
        pe_rand, pe_rand_se = (float(v) for v in _binomial(emerged.sum(), trials))
    else:
        pe_rand, pe_rand_se = float("nan"), float("nan")

    rows = [(o.infected_count_by_type, tc) for (o, tc), e in zip(outcomes, emerged) if e]
    counts = np.array([c for c, _ in rows], dtype=float).reshape(-1, M)
    type_counts = np.array([tc for _, tc in rows], dtype=float).reshape(-1, M)
    es, es_se = _mean_se(counts / n_nodes)
    tot, tot_se = _mean_se(counts.sum(axis=1)[:, None] / n_nodes)
    with np.errstate(invalid="ignore", divide="ignore"):
        indiv_rows = np.where(type_counts > 0, counts / np.maximum(type_counts, 1), np.nan)
    if len(rows):
        valid = (~np.isnan(indiv_rows)).sum(axis=0)
        with np.errstate(invalid="ignore", divide="ignore"), warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)  # all-NaN or single-value columns
            indiv = np.nanmean(indiv_rows, axis=0)
            indiv_se = np.where(valid > 1, np.nanstd(indiv_rows, axis=0, ddof=1) / np.sqrt(np.maximum(valid, 1)), np.nan)
    else:
        indiv = np.full(M, np.nan)
        indiv_se = np.full(M, np.nan)
    return TrialAggregate(
        seed_policy=policy,
        trials=trials,
        n_nodes=n_nodes,
        trials_by_seed_type=by_type,
        emerged_by_seed_type=em_by_type,
        empirical_pe_by_seed_type=pe_type,
        empirical_pe_by_seed_type_se=pe_type_se,
        empirical_pe_random=pe_rand,
        empirical_pe_random_se=pe_rand_se,
        n_emerged=int(emerged.sum()),
        mean_es_by_type_given_emergence=es,
        mean_es_by_type_given_emergence_se=es_se,
        mean_total_es_given_emergence=float(tot[0]),
        mean_total_es_given_emergence_se=float(tot_se[0]),
        individual_infection_prob=indiv,
        individual_infection_prob_se=indiv_se,
        redraws=redraws,
        outcomes=[o for o, _ in outcomes] if keep_outcomes else [],
    )


def _check_policy(policy, M):
    if policy == RANDOM:
        return policy
    if isinstance(policy, (int, np.integer)) and 0 <= policy < M:
        return int(policy)
    raise SimulationError(f"seed policy must be 'random' or a type index in [0, {M}), got {policy!r}")


def monte_carlo_policies(
    degree_model,
    ensemble,
    n_nodes,
    trials,
    seed_policies=(RANDOM,),
    emergence_threshold=EMERGENCE_THRESHOLD,
    master_seed=0,
    regenerate_network_each_trial=True,
    threads=1,
    absolute_threshold=False,
    keep_outcomes=False,
    backend=None,
) -> dict:
    """Run ``trials`` trials, each seeding one outbreak per policy.

    All policies of a trial share that trial's network but draw from their own
    outbreak stream, so each policy's estimates are those of an independent
    run. Returns ``{policy: TrialAggregate}``.
    """
    if trials < 1:
        raise SimulationError("trials must be at least 1")
    if absolute_threshold:
        if not emergence_threshold >= 1:
            raise SimulationError("an absolute emergence threshold must be a count >= 1")
    elif not 0 < emergence_threshold < 1:
        raise SimulationError(f"emergence_threshold must lie in (0, 1), got {emergence_threshold!r}")
    M = ensemble.M
    policies = [_check_policy(p, M) for p in seed_policies]
    if len(set(policies)) != len(policies):
        raise SimulationError("duplicate seed policies")

    def build(*key):
        net = netgen.generate(degree_model, n_nodes, _stream(master_seed, *key, _NETWORK))
        netgen.assign_types(net, ensemble.m, _stream(master_seed, *key, _TYPES))
        return net, net.type_counts()

    shared = build(_SHARED_NETWORK_KEY) if not regenerate_network_each_trial else None

    def run_trial(t):
        for attempt in range(MAX_REDRAWS):
            net, tc = shared if shared is not None else build(t, attempt)
            missing = [p for p in policies if p != RANDOM and tc[p] == 0]
            if not missing:
                break
            if shared is not None:
                raise SimulationError(f"shared network has no node of type(s) {missing}")
        else:
            raise SimulationError(
                f"trial {t}: no node of type(s) {missing} after {MAX_REDRAWS} network draws"
            )
        out = {}
        for p in policies:
            ss = np.random.SeedSequence(master_seed, spawn_key=(t, attempt, _OUTBREAK, _policy_code(p)))
            rng = np.random.Generator(np.random.PCG64(ss))
            trial_seed = int(ss.generate_state(1, np.uint64)[0])
            if p == RANDOM:
                seed = rng.integers(n_nodes)
            else:
                candidates = np.flatnonzero(net.node_type == p)
                seed = candidates[rng.integers(candidates.size)]
            res = run_outbreak(net, ensemble, seed, rng, emergence_threshold, absolute_threshold, backend)
            res.trial_seed = trial_seed
            out[p] = (res, tc)
        return out, attempt

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_trial = list(pool.map(run_trial, range(trials)))
    else:
        per_trial = [run_trial(t) for t in range(trials)]

    redraws = sum(a for _, a in per_trial)
    if redraws:
        log.info("%d network redraws needed to find fixed-type seeds", redraws)
    return {
        p: aggregate(p, [r[p] for r, _ in per_trial], n_nodes, M, redraws, keep_outcomes)
        for p in policies
    }


def monte_carlo(
    degree_model,
    ensemble,
    n_nodes,
    trials,
    seed_policy=RANDOM,
    emergence_threshold=EMERGENCE_THRESHOLD,
    master_seed=0,
    regenerate_network_each_trial=True,
    threads=1,
    absolute_threshold=False,
    keep_outcomes=False,
    backend=None,
) -> TrialAggregate:
    """Monte Carlo estimate of PE and ES for one seed policy.

    ``seed_policy`` is ``"random"`` (uniform node) or a 0-based type index
    (uniform node among that type).
    """
    return monte_carlo_policies(
        degree_model, ensemble, n_nodes, trials, (seed_policy,), emergence_threshold, master_seed,
        regenerate_network_each_trial, threads, absolute_threshold, keep_outcomes, backend,
    )[_check_policy(seed_policy, ensemble.M)]
