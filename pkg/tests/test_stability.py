"""Closed-form stability coefficients, empirical sweeps, and the worst case."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stabreg import (
    BoundDiverges,
    EmptyNeighborhood,
    FullSample,
    GraphDisconnected,
    GraphSpec,
    InvalidInstance,
    InvalidStabilityInput,
    Partition,
    SpectrumSummary,
    StabilityInputs,
    SwapPair,
    apply_swap,
    belkin_cost_stability,
    belkin_score_stability,
    beta_loc_bound,
    beta_loc_gaussian,
    beta_loc_invdist,
    build_cm,
    build_llreg,
    cm_lower_bound_demo,
    cm_lower_bound_instance,
    cm_score_bound,
    empirical_stability,
    llreg_score_bound,
    llreg_score_bound_spectral,
    ltr_stability_bound,
    sample_partition,
    solve_unconstrained,
    unconstrained_score_bound,
)


# ---------------------------------------------------------------------------
# kernel least-squares coefficient


def test_ltr_bound_frozen_labeled_only():
    # C'=0: A = 2, bound = 2 (2M)^2 kappa^2 [C/m + sqrt((C/m)^2)] = 16/m
    si = StabilityInputs(m=10, u=10, C=1.0, C_prime=0.0, kappa=1.0, M=1.0)
    assert ltr_stability_bound(si) == pytest.approx(1.6, abs=1e-12)


def test_ltr_bound_frozen_with_pseudo_labels():
    si = StabilityInputs(m=10, u=10, C=1.0, C_prime=1.0, kappa=1.0, M=1.0, beta_loc=0.1)
    # hand-evaluated closed form
    a_fac = 1.0 + math.sqrt(2.0)
    inner = math.sqrt(0.2**2 + 2 * 0.1 / (a_fac * 10))
    expected = 2 * a_fac**2 * (0.2 + inner)
    assert ltr_stability_bound(si) == pytest.approx(expected, abs=1e-12)
    assert ltr_stability_bound(si) == pytest.approx(4.8928109652838785, abs=1e-10)


def test_ltr_bound_scales_with_m_squared_and_kappa():
    base = ltr_stability_bound(StabilityInputs(m=10, u=10, C=1.0, C_prime=0.0, kappa=1.0, M=1.0))
    doubled_m = ltr_stability_bound(
        StabilityInputs(m=10, u=10, C=1.0, C_prime=0.0, kappa=1.0, M=2.0)
    )
    assert doubled_m == pytest.approx(4 * base, rel=1e-12)


@given(
    st.integers(1, 500),
    st.integers(1, 500),
    st.floats(0.0, 10.0),
    st.floats(0.0, 10.0),
    st.floats(0.0, 5.0),
)
@settings(max_examples=60)
def test_ltr_bound_nonnegative_and_monotone_in_beta_loc(m, u, c_val, cp_val, b_loc):
    lo = ltr_stability_bound(
        StabilityInputs(m=m, u=u, C=c_val, C_prime=cp_val, kappa=1.0, M=1.0, beta_loc=b_loc)
    )
    hi = ltr_stability_bound(
        StabilityInputs(m=m, u=u, C=c_val, C_prime=cp_val, kappa=1.0, M=1.0, beta_loc=b_loc + 1)
    )
    assert 0.0 <= lo <= hi + 1e-12


def test_ltr_bound_shrinks_with_more_data():
    small = ltr_stability_bound(StabilityInputs(m=10, u=10, C=1.0, C_prime=1.0,
                                                kappa=1.0, M=1.0, beta_loc=0.1))
    large = ltr_stability_bound(StabilityInputs(m=1000, u=1000, C=1.0, C_prime=1.0,
                                                kappa=1.0, M=1.0, beta_loc=0.1))
    assert large < small


def test_stability_inputs_validation():
    with pytest.raises(InvalidStabilityInput):
        StabilityInputs(m=0, u=10)
    with pytest.raises(InvalidStabilityInput):
        StabilityInputs(m=10, u=10, C=-1.0)
    with pytest.raises(InvalidStabilityInput):
        ltr_stability_bound(StabilityInputs(m=10, u=10, kappa=0.0))


# ---------------------------------------------------------------------------
# unconstrained score perturbation


def flat_spectrum(lo, hi, lam2=None):
    return SpectrumSummary(
        lambda_min=lo, lambda_max=hi,
        lambda2=lam2 if lam2 is not None else lo,
        eigenvector_min=np.array([1.0]),
    )


def test_unconstrained_score_bound_reduces_to_cm_form():
    # Q has a zero eigenvalue, C = mu I unchanged: bound collapses to
    # ||delta y|| / (0/mu + 1) = sqrt(2) M
    m_label = 1.5
    got = unconstrained_score_bound(
        flat_spectrum(0.0, 2.0),
        flat_spectrum(1.0, 1.0),
        flat_spectrum(1.0, 1.0),
        math.sqrt(2.0) * m_label,
        10.0,
        0.0,
    )
    assert got == pytest.approx(cm_score_bound(m_label), abs=1e-12)


def test_unconstrained_score_bound_second_term():
    # pure trade-off change: delta_y = 0, ||C'^{-1} - C^{-1}|| = 0.5
    got = unconstrained_score_bound(
        flat_spectrum(1.0, 4.0),
        flat_spectrum(2.0, 2.0),
        flat_spectrum(2.0, 2.0),
        0.0,
        3.0,
        0.5,
    )
    # lambda_M(Q) ||...|| ||y'|| / ((lam_m/lam_M(C')+1)(lam_m/lam_M(C)+1))
    expected = 4.0 * 0.5 * 3.0 / ((1 / 2 + 1) * (1 / 2 + 1))
    assert got == pytest.approx(expected, abs=1e-12)


def test_cm_score_bound_frozen():
    assert cm_score_bound(1.0) == pytest.approx(math.sqrt(2.0), abs=1e-15)
    assert cm_score_bound(2.5) == pytest.approx(2.5 * math.sqrt(2.0), abs=1e-12)


def test_llreg_score_bound_frozen():
    # M=1, m=2, C bounds (1, 2): sqrt(2) + 4 sqrt(4) (1/1 - 1/2) = sqrt(2) + 4
    assert llreg_score_bound(1.0, 2, 1.0, 2.0) == pytest.approx(math.sqrt(2.0) + 4.0, abs=1e-12)


def test_llreg_score_bound_equal_tradeoffs_collapse():
    assert llreg_score_bound(1.0, 50, 2.0, 2.0) == pytest.approx(math.sqrt(2.0), abs=1e-12)


def test_llreg_spectral_variant_formula():
    m_label, m, c_min, c_max = 1.0, 4, 1.0, 2.0
    lam_max = 4.0  # row-stochastic reconstruction penalty never exceeds 4
    expected = math.sqrt(2.0) * m_label + lam_max * math.sqrt(m) * m_label * (
        1.0 / c_min - 1.0 / c_max
    )
    assert llreg_score_bound_spectral(m_label, m, c_min, c_max) == pytest.approx(
        expected, abs=1e-12
    )


def test_score_bounds_reject_bad_inputs():
    with pytest.raises(InvalidStabilityInput):
        cm_score_bound(-1.0)
    with pytest.raises(InvalidStabilityInput):
        llreg_score_bound(1.0, 2, 0.0, 1.0)
    with pytest.raises(InvalidStabilityInput):
        llreg_score_bound(1.0, 2, 2.0, 1.0)  # min above max


# ---------------------------------------------------------------------------
# constrained coefficients


def test_belkin_score_stability_frozen():
    # M=1, m=100, C=1, lambda2=0.5: d = 49, value = 4 sqrt(2)/49 + 40 sqrt(2)/2401
    d = 100 * 0.5 / 1.0 - 1.0
    expected = 4 * math.sqrt(2.0) / d + 4 * math.sqrt(2.0 * 100) / (d * d)
    got = belkin_score_stability(1.0, 100, 1.0, 0.5)
    assert got == pytest.approx(expected, abs=1e-12)
    assert got == pytest.approx(0.13900641429406516, abs=1e-10)


def test_belkin_score_stability_diverges_at_small_gap():
    with pytest.raises(BoundDiverges):
        belkin_score_stability(1.0, 10, 20.0, 0.1)  # m lambda2 / C = 0.05 <= 1


def test_belkin_cost_stability_formula():
    # (4 C M^2 / m) min(1/lambda2, rho)
    assert belkin_cost_stability(1.0, 1.0, 100, 0.5, 3) == pytest.approx(0.08, abs=1e-12)
    # diameter smaller than 1/lambda2: the hop bound wins
    assert belkin_cost_stability(1.0, 1.0, 100, 0.01, 5) == pytest.approx(
        4.0 / 100 * 5, abs=1e-12
    )


def test_belkin_cost_stability_validation():
    with pytest.raises(GraphDisconnected):
        belkin_cost_stability(1.0, 1.0, 10, 0.0, 3)
    with pytest.raises(InvalidStabilityInput):
        belkin_cost_stability(1.0, 1.0, 10, 0.5, 0)


# ---------------------------------------------------------------------------
# local-estimator coefficients


def test_beta_loc_gaussian_frozen():
    # M=1, m_r=10, r=sigma: 4 M e^{2} / 10
    assert beta_loc_gaussian(1.0, 10, 1.0, 1.0) == pytest.approx(
        0.4 * math.e**2, abs=1e-12
    )
    assert beta_loc_gaussian(1.0, 10, 1.0, 1.0) == pytest.approx(2.9556224395722603, abs=1e-10)


def test_beta_loc_invdist_frozen():
    # M=1, m_r=4, r=1: (2r+1) 2M / m_r = 6/4
    assert beta_loc_invdist(1.0, 4, 1.0) == pytest.approx(1.5, abs=1e-15)


def test_beta_loc_gaussian_is_generic_with_doubled_radius_ratio():
    # the gaussian form equals the generic one with the extreme weight ratio
    # taken over the doubled neighborhood, alpha_min = e^{-2 r^2 / sigma^2}
    m_label, m_r, r, sigma = 1.0, 7, 0.8, 0.5
    generic = beta_loc_bound(m_label, m_r, 1.0, math.exp(-2 * r * r / sigma**2))
    assert beta_loc_gaussian(m_label, m_r, r, sigma) == pytest.approx(generic, rel=1e-12)


def test_beta_loc_invdist_halves_the_generic_form():
    # inverse-distance weights admit a sharper telescoping: the closed form is
    # half the generic plug-in with alpha_min = 1/(1 + 2r)
    m_label, m_r, r = 1.0, 5, 1.3
    generic = beta_loc_bound(m_label, m_r, 1.0, 1.0 / (1.0 + 2 * r))
    assert beta_loc_invdist(m_label, m_r, r) == pytest.approx(generic / 2, rel=1e-12)


def test_beta_loc_empty_neighborhood():
    with pytest.raises(EmptyNeighborhood):
        beta_loc_gaussian(1.0, 0, 1.0, 1.0)
    with pytest.raises(EmptyNeighborhood):
        beta_loc_invdist(1.0, 0, 1.0)


def test_beta_loc_decreases_with_more_neighbors():
    values = [beta_loc_gaussian(1.0, k, 1.0, 1.0) for k in (1, 2, 5, 20)]
    assert all(a > b for a, b in zip(values, values[1:]))


# ---------------------------------------------------------------------------
# empirical stability sweeps


def make_instance(n, m, seed):
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(n, 2))
    sample = FullSample(points=pts, targets=rng.uniform(-1, 1, n), label_bound_M=1.0)
    part = sample_partition(sample, m, seed)
    d2 = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=2)
    w = np.exp(-d2)
    np.fill_diagonal(w, 0.0)
    w = np.minimum(w, w.T)
    return sample, part, GraphSpec(weights=w)


def test_empirical_stability_exhaustive_under_cm_bound():
    sample, part, g = make_instance(12, 6, 0)

    def solver(s, p):
        return solve_unconstrained(build_cm(g, 1.0, s.targets[p.train_idx], p))

    report = empirical_stability(solver, sample, part, B=2.0)
    assert report.mode == "exhaustive"
    assert report.swaps_evaluated == 36
    assert report.max_score_delta <= cm_score_bound(1.0) + 1e-9
    assert report.max_cost_delta >= 0.0
    assert report.worst_swap.removed in part.train_idx
    assert report.worst_swap.added in part.test_idx


def test_empirical_stability_llreg_under_bound():
    sample, part, g = make_instance(10, 5, 1)

    def solver(s, p):
        return solve_unconstrained(build_llreg(g.weights, 1.0, 2.0, s.targets[p.train_idx], p))

    report = empirical_stability(solver, sample, part, B=2.0)
    assert report.max_score_delta <= llreg_score_bound(1.0, part.m, 1.0, 2.0) + 1e-9


def test_empirical_stability_sampled_mode_kicks_in():
    sample, part, g = make_instance(60, 30, 2)

    def solver(s, p):
        return solve_unconstrained(build_cm(g, 1.0, s.targets[p.train_idx], p))

    report = empirical_stability(solver, sample, part, B=2.0, seed=3)
    assert report.mode == "sampled"
    assert report.swaps_evaluated == 400  # the sweep budget


def test_empirical_stability_custom_swaps():
    sample, part, g = make_instance(10, 5, 4)
    swaps = [SwapPair(removed=int(part.train_idx[0]), added=int(part.test_idx[0]))]

    def solver(s, p):
        return solve_unconstrained(build_cm(g, 1.0, s.targets[p.train_idx], p))

    report = empirical_stability(solver, sample, part, swaps=swaps, B=2.0)
    assert report.mode == "custom"
    assert report.swaps_evaluated == 1
    assert report.worst_swap == swaps[0]


def test_empirical_stability_cost_delta_matches_direct_recomputation():
    sample, part, g = make_instance(8, 4, 5)

    def solver(s, p):
        return solve_unconstrained(build_cm(g, 1.0, s.targets[p.train_idx], p))

    swap = SwapPair(removed=int(part.train_idx[1]), added=int(part.test_idx[2]))
    report = empirical_stability(solver, sample, part, swaps=[swap], B=2.0)
    h_base = solver(sample, part).scores
    h_swap = solver(sample, apply_swap(part, swap)).scores
    assert report.max_score_delta == pytest.approx(
        float(np.max(np.abs(h_base - h_swap))), abs=1e-12
    )


# ---------------------------------------------------------------------------
# the worst-case instance


def predicted_a_oracle(m, c_val):
    """Independent recomputation from the resolvent diagonal."""
    n = 2 * m
    block = (m / (m - 1)) * (np.eye(m) - np.ones((m, m)) / m)
    q = np.zeros((n, n))
    q[:m, :m] = block
    q[m:, m:] = block
    resolvent = np.linalg.inv(q / c_val + np.eye(n))
    return float(resolvent[m, m])


@pytest.mark.parametrize("m", [2, 3, 5, 10])
@pytest.mark.parametrize("c_val", [0.5, 1.0, 10.0])
def test_lower_bound_prediction_matches_resolvent(m, c_val):
    _, _, predicted = cm_lower_bound_instance(m, c_val)
    assert predicted == pytest.approx(predicted_a_oracle(m, c_val), abs=1e-12)


@pytest.mark.parametrize("m", [2, 5, 10])
@pytest.mark.parametrize("c_val", [0.5, 1.0, 10.0])
def test_lower_bound_demo_measures_prediction(m, c_val):
    demo = cm_lower_bound_demo(m, c_val)
    assert demo["measured_delta"] == pytest.approx(demo["predicted_a"], abs=1e-9)
    assert demo["predicted_a"] >= demo["floor"] - 1e-12
    assert demo["floor"] == pytest.approx(c_val / (2 * (c_val + 1)), abs=1e-12)


def test_lower_bound_instance_shape_and_partition():
    problem, part, _ = cm_lower_bound_instance(4, 1.0)
    assert problem.n == 8
    assert list(part.train_idx) == [0, 1, 2, 3]
    assert np.allclose(problem.y, 0.0)  # all labeled targets zero
    # Q is block diagonal with two complete-graph blocks
    assert np.allclose(problem.Q[:4, 4:], 0.0)


def test_lower_bound_instance_validation():
    with pytest.raises(InvalidInstance):
        cm_lower_bound_instance(1, 1.0)
    with pytest.raises(InvalidInstance):
        cm_lower_bound_instance(3, 0.0)


def test_lower_bound_grows_with_tradeoff():
    values = [cm_lower_bound_instance(5, c)[2] for c in (0.1, 1.0, 10.0, 100.0)]
    assert all(a < b for a, b in zip(values, values[1:]))
    # saturates below 1
    assert values[-1] < 1.0
