import math
import warnings

import numpy as np
import pytest
from hypothesis import example, given, settings
from hypothesis import strategies as st

from maskspread import analytic as A
from maskspread.degree import Empirical, Poisson
from maskspread.errors import ConvergenceError, RankOneRequiredError
from maskspread.masks import MaskEnsemble
from oracles import char_poly_spectral_radius, poisson_series_pgf, scalar_extinction

# bisection on q = exp(3 (q - 1)), i.e. Poisson(5) with T = 0.6
Q_SINGLE = 0.059520209292640625
PE_SINGLE = 1 - Q_SINGLE
# bisection on q = exp(5 (q - 1))
Q_CERTAIN = 0.00697715365114482


def single(t):
    return MaskEnsemble.from_matrix([[t]], [1.0])


def test_frozen_oracles_still_hold():
    assert scalar_extinction(lambda x: math.exp(5 * (x - 1)), 0.6) == pytest.approx(Q_SINGLE, abs=1e-14)
    assert scalar_extinction(lambda x: math.exp(5 * (x - 1)), 1.0) == pytest.approx(Q_CERTAIN, abs=1e-14)


# --- PGF system ---------------------------------------------------------------

def test_gamma_at_ones(three_masks):
    for i in range(3):
        assert A.gamma_i(three_masks, Poisson(5), np.ones(3), i) == 1.0
        assert A.Gamma_i(three_masks, Poisson(5), np.ones(3), i) == 1.0


def test_gamma_single_type_is_scalar_model():
    for s0 in (0.0, 0.3, 1.0):
        assert A.gamma_i(single(0.4), Poisson(3), [s0], 0) == pytest.approx(math.exp(3 * (0.6 + 0.4 * s0 - 1)))


def test_gamma_two_type_hand_value():
    e = MaskEnsemble.from_matrix([[0.4, 0.2], [0.2, 0.1]], [0.5, 0.5])
    got = A.gamma_i(e, Poisson(2), [0.0, 0.0], 0)
    assert got == pytest.approx(math.exp(-0.6), rel=1e-14)
    # truncated-series oracle for the same point
    assert got == pytest.approx(poisson_series_pgf(2, 0.7), abs=1e-12)


def test_Gamma_equals_gamma_for_poisson(three_masks):
    grid = np.linspace(0, 1, 7)
    for s in np.array(np.meshgrid(grid, grid, grid)).T.reshape(-1, 3):
        np.testing.assert_allclose(A.Gamma(three_masks, Poisson(4), s), A.gamma(three_masks, Poisson(4), s), rtol=1e-15)


def test_Gamma_leaves():
    e = MaskEnsemble.from_matrix([[0.5, 0.4], [0.3, 0.9]], [0.5, 0.5])
    np.testing.assert_array_equal(A.Gamma(e, Empirical([1], [1.0]), [0.2, 0.0]), [1.0, 1.0])


def test_index_error(three_masks):
    with pytest.raises(IndexError):
        A.gamma_i(three_masks, Poisson(5), np.ones(3), 3)


# --- extinction / emergence ---------------------------------------------------

def test_single_type_extinction():
    sol = A.extinction_fixed_point(single(0.6), Poisson(5))
    assert sol.Q[0] == pytest.approx(Q_SINGLE, abs=1e-9)
    assert sol.iterations > 0
    pe, pe_rand = A.emergence_probabilities(single(0.6), Poisson(5), sol.Q)
    assert pe[0] == pytest.approx(PE_SINGLE, abs=1e-9)
    assert pe_rand == pe[0]


def test_certain_transmission_extinction():
    e = MaskEnsemble.from_matrix(np.ones((3, 3)), [0.2, 0.3, 0.5])
    np.testing.assert_allclose(A.extinction_fixed_point(e, Poisson(5)).Q, Q_CERTAIN, atol=1e-9)


def test_subcritical_all_ones(three_masks):
    sol = A.extinction_fixed_point(three_masks, Poisson(5))
    np.testing.assert_array_equal(sol.Q, 1.0)
    pe, pe_rand = A.emergence_probabilities(three_masks, Poisson(5), sol.Q)
    assert pe.tolist() == [0.0, 0.0, 0.0] and pe_rand == 0.0


def test_pe_seed_ordering(three_masks):
    s = A.summarize(three_masks, Poisson(5).__class__(8))
    surgical, cloth, none = s.pe_by_seed_type
    assert none > cloth > surgical > 0
    assert s.pe_random_seed == pytest.approx(np.dot(three_masks.m, s.pe_by_seed_type))


def test_non_convergence_reports_residual():
    e = MaskEnsemble.from_matrix([[0.9]], [1.0])
    with pytest.raises(ConvergenceError) as info:
        A.extinction_fixed_point(e, Poisson(1.2), max_iter=3)
    assert info.value.residual > 0 and info.value.last_iterate is not None


# --- spectral radius / R0 -----------------------------------------------------

def test_spectral_radius_examples():
    assert A.spectral_radius(np.eye(2)) == pytest.approx(1.0, abs=1e-12)
    assert A.spectral_radius([[0, 1], [1, 0]]) == pytest.approx(1.0, abs=1e-12)
    u, v = np.array([0.2, 0.5, 1.0]), np.array([0.3, 0.1, 0.7])
    assert A.spectral_radius(np.outer(u, v)) == pytest.approx(v @ u, abs=1e-12)
    assert A.spectral_radius(np.zeros((3, 3))) == 0.0
    # reducible and periodic cases
    assert A.spectral_radius([[2, 0], [0, 1]]) == pytest.approx(2.0, abs=1e-12)
    assert A.spectral_radius([[0, 1, 0], [0, 0, 1], [1, 0, 0]]) == pytest.approx(1.0, abs=1e-12)
    assert A.spectral_radius([[1, 1000], [0, 0]]) == pytest.approx(1.0, rel=1e-9)


def test_spectral_radius_rejects_negative():
    with pytest.raises(ValueError):
        A.spectral_radius([[1, -1], [0, 1]])


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 3).flatmap(lambda n: st.lists(st.floats(0, 5), min_size=n * n, max_size=n * n)))
@example([1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0])  # triple root
@example([1.0, 0.0, 1.0, 1.0])  # defective
def test_spectral_radius_vs_char_poly(entries):
    n = int(round(math.sqrt(len(entries))))
    M = np.array(entries).reshape(n, n)
    ref = char_poly_spectral_radius(M)
    assert A.spectral_radius(M) == pytest.approx(ref, rel=1e-8, abs=1e-9)


def test_r0_examples(three_masks):
    assert A.reproduction_number(single(0.6), Poisson(5)) == pytest.approx(3.0, abs=1e-12)
    assert A.reproduction_number(three_masks, Poisson(5)) == pytest.approx(0.804, abs=1e-12)
    assert A.reproduction_number_rank_one(three_masks, Poisson(5)) == pytest.approx(0.804, abs=1e-12)
    two = MaskEnsemble.from_efficiencies([0.2, 0.5], [0.3, 0.5], 0.6, [0.3, 0.7])
    assert A.reproduction_number(two, Poisson(8)) == pytest.approx(0.9264, abs=1e-12)


def test_rank_one_required():
    with pytest.raises(RankOneRequiredError):
        A.reproduction_number_rank_one(MaskEnsemble.from_matrix([[0.5]], [1.0]), Poisson(5))


def test_inout_r0_invariant():
    base = MaskEnsemble.from_efficiencies([0.3, 0.7, 1], [0.7, 0.3, 1], 0.6, [0.45, 0.45, 0.1])
    vals = [
        A.reproduction_number_rank_one(base.with_prevalence([0.9 - m2, m2, 0.1]), Poisson(10))
        for m2 in np.arange(0.1, 0.85, 0.1)
    ]
    assert max(vals) - min(vals) < 1e-12


def _random_ensemble(rng, rank_one):
    M = int(rng.integers(1, 6))
    m = rng.dirichlet(np.ones(M))
    if rank_one:
        return MaskEnsemble.from_efficiencies(rng.uniform(0.01, 1, M), rng.uniform(0.01, 1, M), rng.uniform(0.05, 1), m)
    return MaskEnsemble.from_matrix(rng.uniform(0.01, 1, (M, M)), m)


def test_spectrum_equivalence_and_rank_one_identity():
    rng = np.random.default_rng(3)
    for _ in range(200):
        e = _random_ensemble(rng, rank_one=False)
        Tm = e.T * e.m[None, :]
        TtM = e.T.T * e.m[None, :]
        assert abs(A.spectral_radius(Tm) - A.spectral_radius(TtM)) < 1e-10
        f = _random_ensemble(rng, rank_one=True)
        model = Poisson(float(rng.uniform(0.5, 10)))
        assert abs(A.reproduction_number(f, model) - A.reproduction_number_rank_one(f, model)) < 1e-10


# --- epidemic size ------------------------------------------------------------

def test_single_type_size_equals_pe():
    sol = A.epidemic_size_fixed_point(single(0.6), Poisson(5))
    assert 1 - sol.q0[0] == pytest.approx(PE_SINGLE, abs=1e-9)
    assert sol.q1[0] == pytest.approx(Q_SINGLE, abs=1e-9)


def test_subcritical_size_zero(three_masks):
    sol = A.epidemic_size_fixed_point(three_masks, Poisson(3))
    assert sol.q1.tolist() == [1, 1, 1] and sol.q0.tolist() == [1, 1, 1]


def test_asymmetric_transpose_same_boundary():
    T = np.array([[0.5, 0.4], [0.1, 0.5]])
    m = [0.3, 0.7]
    a = MaskEnsemble.from_matrix(T, m)
    b = MaskEnsemble.from_matrix(T.T, m)
    lam_c = 1 / A.spectral_radius(T * np.array(m)[None, :])
    assert lam_c == pytest.approx(1 / A.spectral_radius(T.T * np.array(m)[None, :]), rel=1e-12)
    sa, sb = A.summarize(a, Poisson(lam_c * 1.2)), A.summarize(b, Poisson(lam_c * 1.2))
    assert not np.allclose(sa.q1, sb.q1)
    for s in (sa, sb):
        assert s.total_epidemic_size > 0 and s.pe_random_seed > 0
    for e in (a, b):
        below = A.summarize(e, Poisson(lam_c * 0.95))
        assert below.total_epidemic_size == 0 and below.pe_random_seed == 0


def test_theta_independence(three_masks):
    a = A.epidemic_size_fixed_point(three_masks, Poisson(9), theta=np.full(3, 0.5))
    b = A.epidemic_size_fixed_point(three_masks, Poisson(9), theta=np.full(3, 0.01))
    np.testing.assert_allclose(a.q1, b.q1, atol=1e-8)


def test_theta_validation(three_masks):
    with pytest.raises(ValueError):
        A.epidemic_size_fixed_point(three_masks, Poisson(9), theta=np.zeros(3))


# --- summaries and invariants -------------------------------------------------

def test_summary_invariants(three_masks):
    s = A.summarize(three_masks, Poisson(10))
    assert s.total_epidemic_size == pytest.approx(np.sum(three_masks.m * (1 - s.q0)))
    np.testing.assert_allclose(s.epidemic_size_by_type, three_masks.m * s.individual_infection_prob)
    for v in (s.pe_by_seed_type, s.q0, s.q1, s.extinction_probs, s.individual_infection_prob):
        assert np.all((v >= 0) & (v <= 1))
    assert s.diagnostics["extinction_iterations"] > 0


def test_monotone_in_mean_degree(three_masks):
    prev = None
    for lam in range(1, 11):
        s = A.summarize(three_masks, Poisson(lam))
        cur = np.r_[s.pe_by_seed_type, s.total_epidemic_size]
        if prev is not None:
            assert np.all(cur >= prev - 1e-12)
        prev = cur


def test_near_zero_masks():
    e = MaskEnsemble.from_efficiencies([1e-9, 1e-9], [1e-9, 1e-9], 0.6, [0.5, 0.5])
    s = A.summarize(e, Poisson(10))
    assert s.pe_random_seed == 0 and s.total_epidemic_size == 0


def test_T_high_beats_T_low(three_masks):
    lo = A.summarize(three_masks.with_baseline(0.1), Poisson(5))
    hi = A.summarize(three_masks.with_baseline(0.9), Poisson(5))
    assert hi.r0 > lo.r0
    assert np.all(hi.pe_by_seed_type > lo.pe_by_seed_type)
    assert np.all(hi.individual_infection_prob > lo.individual_infection_prob)
    assert hi.total_epidemic_size > lo.total_epidemic_size


@pytest.mark.parametrize("lam", [0.5, 1.5, 2.0, 3.0, 5.0, 8.0])
@pytest.mark.parametrize("t", [0.2, 0.45, 0.6, 0.9])
def test_single_type_reduction_grid(lam, t):
    g = lambda x: math.exp(lam * (x - 1))
    Q = scalar_extinction(g, t)
    s = A.summarize(single(t), Poisson(lam))
    assert s.extinction_probs[0] == pytest.approx(Q, abs=1e-8)
    assert s.pe_by_seed_type[0] == pytest.approx(1 - g(1 - t + t * Q), abs=1e-8)
    assert 1 - s.q0[0] == pytest.approx(1 - g(1 - t + t * Q), abs=1e-8)


def test_single_type_reduction_empirical():
    model = Empirical([1, 2, 3, 6], [0.3, 0.3, 0.2, 0.2])
    g = lambda x: float(np.dot(model.probabilities, x ** model.degrees))
    k1 = np.dot(model.degrees, model.probabilities)
    G = lambda x: float(np.dot(model.degrees * model.probabilities / k1, x ** (model.degrees - 1.0)))
    t = 0.8
    s = A.summarize(single(t), model)
    # extinction uses G, the seed uses g
    QG = scalar_extinction(G, t)
    assert s.extinction_probs[0] == pytest.approx(QG, abs=1e-8)
    assert s.pe_by_seed_type[0] == pytest.approx(1 - g(1 - t + t * QG), abs=1e-8)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_phase_transition_consistency(seed):
    rng = np.random.default_rng(seed)
    e = _random_ensemble(rng, rank_one=bool(rng.integers(2)))
    model = Poisson(float(rng.uniform(0.5, 12)))
    s = A.summarize(e, model)
    if s.r0 <= 1:
        np.testing.assert_allclose(s.extinction_probs, 1, atol=1e-8)
        np.testing.assert_allclose(s.q0, 1, atol=1e-8)
    elif A.is_supercritical(s.r0):
        assert np.all(s.extinction_probs < 1) and np.all(s.q0 < 1)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_label_permutation_equivariance(seed):
    rng = np.random.default_rng(seed)
    e = _random_ensemble(rng, rank_one=False)
    model = Poisson(float(rng.uniform(2, 12)))
    perm = rng.permutation(e.M)
    a, b = A.summarize(e, model), A.summarize(e.permuted(perm), model)
    np.testing.assert_allclose(b.pe_by_seed_type, a.pe_by_seed_type[perm], atol=1e-9)
    np.testing.assert_allclose(b.q0, a.q0[perm], atol=1e-9)
    np.testing.assert_allclose(b.q1, a.q1[perm], atol=1e-9)
    assert b.r0 == pytest.approx(a.r0, abs=1e-12)
    assert b.pe_random_seed == pytest.approx(a.pe_random_seed, abs=1e-9)
    assert b.total_epidemic_size == pytest.approx(a.total_epidemic_size, abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_inward_efficiency_monotonicity(seed):
    rng = np.random.default_rng(seed)
    M = int(rng.integers(2, 5))
    ein = rng.uniform(0.05, 1, M)
    eout = rng.uniform(0.05, 1, M)
    a, b = 0, 1
    eout[b] = eout[a]
    e = MaskEnsemble.from_efficiencies(ein, eout, float(rng.uniform(0.3, 1)), rng.dirichlet(np.ones(M)))
    s = A.summarize(e, Poisson(float(rng.uniform(3, 15))))
    lo, hi = (a, b) if ein[a] <= ein[b] else (b, a)
    assert s.individual_infection_prob[lo] <= s.individual_infection_prob[hi] + 1e-12


def test_permissive_mode_warns():
    e = MaskEnsemble.from_matrix([[0.0, 0.9], [0.9, 0.0]], [0.5, 0.5], strict=False)
    with pytest.warns(RuntimeWarning, match="positive regular"):
        A.summarize(e, Poisson(5))
