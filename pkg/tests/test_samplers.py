"""Tests for the exact grid integrator and the Monte Carlo samplers.

The grid integrator is this package's second, code-independent route to
spin correlations (the first being the truncated flow sums in
xyloops.currents); several tests pin the two routes against each other and
against closed forms.  Monte Carlo tests use named streams, so every run
is deterministic and the tolerances can be tight multiples of the reported
standard errors.
"""

import collections
import math

import numpy as np
import pytest

import xyloops.currents as C
import xyloops.planar as P
import xyloops.samplers as S
from xyloops.bessel import bessel_i, bessel_ratio

# frozen in test_currents.py from the truncated flow route; the grid route
# shares no code with it
Z0_C4_BETA2 = 40.261473554647234125
CORR_C4_ADJ = 0.77956092269243493196
CORR_C4_OPP = 0.71385084391283230572


# ============================================================
# Named streams
# ============================================================


def test_stream_determinism_and_keying():
    a = S.stream(7, "spin", 0).random(5)
    b = S.stream(7, "spin", 0).random(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, S.stream(7, "spin", 1).random(5))
    assert not np.array_equal(a, S.stream(8, "spin", 0).random(5))
    assert not np.array_equal(a, S.stream(7, "height", 0).random(5))


def test_stream_is_call_order_independent():
    first = S.stream(3, "a").random()
    S.stream(3, "b").random()
    again = S.stream(3, "a").random()
    assert first == again


# ============================================================
# Exact grid integrator
# ============================================================


def test_grid_partition_matches_flow_route():
    g = P.cycle_graph(4)
    z = S.grid_partition(g, 2.0, 64)
    assert math.isclose(z, Z0_C4_BETA2, rel_tol=1e-12)

    theta = P.chain_graph([1, 1, 1])
    z_grid = S.grid_partition(theta, 1.5, 64)
    z_flow = C.partition_flow_sum(theta, None, 1.5, 16)
    assert math.isclose(z_grid, z_flow, rel_tol=1e-12)


def test_quad_correlator_matches_flow_route():
    g = P.cycle_graph(4)
    assert math.isclose(S.quad_two_point(g, 0, 1, 2.0), CORR_C4_ADJ, rel_tol=1e-12)
    assert math.isclose(S.quad_two_point(g, 0, 2, 2.0), CORR_C4_OPP, rel_tol=1e-12)

    k4 = P.complete_four()
    for a, b in [(0, 1), (0, 2), (1, 3)]:
        for k in (1, 2):
            q = S.quad_two_point(k4, a, b, 1.1, k=k)
            f = C.spin_correlation(k4, a, b, 1.1, k=k, cutoff=16)
            assert math.isclose(q, f, rel_tol=1e-10)


def test_quad_correlator_inhomogeneous_couplings():
    g = P.build_graph(
        {0: [1, 2], 1: [0, 2], 2: [0, 1]},
        {(0, 1): 0.5, (1, 2): 2.0, (0, 2): 1.25},
    )
    q = S.quad_two_point(g, 0, 1, 1.3)
    f = C.spin_correlation(g, 0, 1, 1.3, cutoff=18)
    assert math.isclose(q, f, rel_tol=1e-10)


def test_quad_correlator_path_is_ratio_product():
    g = P.path_graph(4)
    got = S.quad_two_point(g, 0, 3, 1.7)
    want = bessel_ratio(1, 1.7) ** 3
    assert math.isclose(got, want, rel_tol=1e-12)


def test_quad_correlator_same_vertex_is_one():
    assert S.quad_two_point(P.cycle_graph(3), 1, 1, 0.9) == 1.0


def test_quad_correlator_monomial_form():
    g = P.build_graph(
        {0: [1, 2], 1: [0, 2], 2: [0, 1]},
        {(0, 1): 1.0, (1, 2): 1.0, (0, 2): 1.0},
    )
    # unbalanced powers vanish by rotation symmetry, without touching grids
    assert S.quad_correlator(g, 1.0, [(0, 1), (1, 1)]) == 0.0
    # a three-point monomial against the independent raw-current route
    val = S.quad_correlator(g, 1.0, [(0, 1), (1, 1), (2, -2)])
    num = C.partition_current_sum(g, {0: 1, 1: 1, 2: -2}, 1.0, 12)
    den = C.partition_current_sum(g, None, 1.0, 12)
    assert math.isclose(val, num / den, rel_tol=1e-7)
    # repeated vertices accumulate; a cancelling monomial is the constant 1
    assert S.quad_correlator(g, 1.0, [(0, 2), (0, -2)]) == 1.0


def test_grid_expectation_on_a_strip_beyond_five_vertices():
    # six or more vertices are fine for the raw engine as long as the
    # elimination width stays small; a path has width two
    g = P.path_graph(7)
    num = S.grid_expectation(g, {0: 1, 6: -1}, 1.7, 64)
    den = S.grid_expectation(g, {}, 1.7, 64)
    want = bessel_ratio(1, 1.7) ** 6
    assert math.isclose(num / den, want, rel_tol=1e-12)


def test_grid_expectation_elimination_order_and_width_guard():
    g = P.box_lattice(4, 1)
    cols = sorted(g.labels, key=lambda t: (t[0], t[1]))
    num32 = S.grid_expectation(g, {(0, 0): 1, (4, 1): -1}, 1.0, 32, elimination_order=cols)
    num64 = S.grid_expectation(g, {(0, 0): 1, (4, 1): -1}, 1.0, 64, elimination_order=cols)
    assert math.isclose(num32, num64, rel_tol=1e-12)

    # row-major order runs the frontier along the long side and must trip
    # the tensor budget rather than silently allocating gigabytes
    rows = sorted(g.labels, key=lambda t: (t[1], t[0]))
    with pytest.raises(S.SamplerError):
        S.grid_expectation(g, {(0, 0): 1, (4, 1): -1}, 1.0, 64, elimination_order=rows)


def test_grid_expectation_input_validation():
    g = P.cycle_graph(4)
    with pytest.raises(S.SamplerError):
        S.grid_expectation(g, {0: 1}, 2.0, 32)  # unbalanced charges
    with pytest.raises(S.SamplerError):
        S.grid_expectation(g, {}, -1.0, 32)
    with pytest.raises(S.SamplerError):
        S.grid_expectation(g, {}, 2.0, 2)
    with pytest.raises(S.SamplerError):
        S.grid_expectation(g, {}, 2.0, 32, elimination_order=[0, 1, 2])
    with pytest.raises(S.SamplerError):
        S.quad_two_point(P.box_lattice(2, 1), (0, 0), (2, 1), 1.0)


# ============================================================
# Spin-space Monte Carlo
# ============================================================


def test_spin_mc_matches_exact_on_square():
    g = P.cycle_graph(4)
    spec = S.ChainSpec(seed=7, burn_in=400, samples=4000)
    est = S.spin_mcmc(g, 2.0, [(0, 1), (0, 2)], spec)
    exact = {(0, 1): CORR_C4_ADJ, (0, 2): CORR_C4_OPP}
    for pair, e in est.items():
        assert e.se < 0.01
        assert e.ess > 500
        assert abs(e.mean - exact[pair]) < 4.0 * e.se


def test_spin_mc_matches_exact_with_k_two():
    g = P.complete_four()
    exact = C.spin_correlation(g, 0, 2, 1.1, k=2, cutoff=16)
    spec = S.ChainSpec(seed=11, burn_in=400, samples=4000)
    e = S.spin_mcmc(g, 1.1, [(0, 2)], spec, k=2)[(0, 2)]
    assert abs(e.mean - exact) < 4.0 * e.se


def test_spin_mc_is_reproducible_and_chains_differ():
    g = P.cycle_graph(4)
    spec = S.ChainSpec(seed=7, burn_in=50, samples=300)
    e1 = S.spin_mcmc(g, 2.0, [(0, 1)], spec)[(0, 1)]
    e2 = S.spin_mcmc(g, 2.0, [(0, 1)], spec)[(0, 1)]
    e3 = S.spin_mcmc(g, 2.0, [(0, 1)], S.ChainSpec(seed=7, burn_in=50, samples=300, chain=1))[(0, 1)]
    assert e1 == e2
    assert e1 != e3


def test_spin_mc_thinning_changes_the_kept_stream():
    g = P.cycle_graph(4)
    thin = S.ChainSpec(seed=4, burn_in=50, samples=200, thinning=3)
    plain = S.ChainSpec(seed=4, burn_in=50, samples=200)
    a = S.spin_mcmc(g, 1.0, [(0, 1)], thin)[(0, 1)]
    b = S.spin_mcmc(g, 1.0, [(0, 1)], plain)[(0, 1)]
    assert a.n == b.n == 200
    assert a != b


def test_reflection_clusters_leave_the_law_invariant():
    # with and without cluster moves the chain must agree with the same
    # exact value; disagreement flags a detailed-balance bug in the move
    g = P.complete_four()
    exact = C.spin_correlation(g, 0, 1, 1.4, cutoff=16)
    with_clusters = S.spin_mcmc(
        g, 1.4, [(0, 1)], S.ChainSpec(seed=2, burn_in=400, samples=4000),
        clusters_per_sweep=2,
    )[(0, 1)]
    without = S.spin_mcmc(
        g, 1.4, [(0, 1)], S.ChainSpec(seed=3, burn_in=400, samples=4000),
        clusters_per_sweep=0,
    )[(0, 1)]
    assert abs(with_clusters.mean - exact) < 4.0 * with_clusters.se
    assert abs(without.mean - exact) < 4.0 * without.se


def test_cluster_step_reports_size_and_keeps_angles_in_range():
    g = P.box_lattice(3, 3)
    state = S.SpinState(g, 1.0, S.stream(0, "cluster-smoke"))
    for _ in range(50):
        size = state.reflection_cluster_step()
        assert 1 <= size <= g.nv
    assert np.all((0.0 <= state.theta) & (state.theta < 2.0 * np.pi))


# ============================================================
# Height-space Monte Carlo
# ============================================================


def test_height_chain_matches_exact_single_face_law():
    g = P.cycle_graph(4)
    z = sum(bessel_i(k, 2.0) ** 4 for k in range(-8, 9))
    counts = collections.Counter()
    inner = g.inner_faces()[0]
    n = 0
    for h in S.height_chain(g, 2.0, sweeps=8000, burn=200, seed=3):
        counts[h[inner]] += 1
        n += 1
    tv = 0.5 * sum(
        abs(counts.get(k, 0) / n - bessel_i(k, 2.0) ** 4 / z) for k in range(-8, 9)
    )
    assert tv < 0.05


def test_height_chain_matches_exact_joint_law_on_strip():
    g = P.box_lattice(2, 1)
    exact, _ = C.height_distribution(g, 1.4, hmax=6)
    counts = collections.Counter()
    inner = g.inner_faces()
    n = 0
    for h in S.height_chain(g, 1.4, sweeps=6000, burn=200, seed=9):
        counts[tuple(h[f] for f in inner)] += 1
        n += 1
    keys = set(exact) | set(counts)
    tv = 0.5 * sum(abs(counts.get(k, 0) / n - exact.get(k, 0.0)) for k in keys)
    assert tv < 0.06


def test_sample_current_is_consistent_with_its_height():
    g = P.box_lattice(2, 2)
    rng = S.stream(0, "augment")
    for h in S.height_chain(g, 1.2, sweeps=40, burn=20, seed=5):
        n = S.sample_current(g, h, 1.2, rng)
        assert C.divergence(g, n) == [0] * g.nv
        assert C.height_from_current(g, n) == list(h)
        assert min(n) >= 0


def test_sample_current_conditional_matches_bessel_split():
    # on a doubled edge the height gradient across each member is +-1;
    # P(common part = 0) must equal the first term of the Bessel series
    g = P.parallel_edges(2, 1.0)
    rng = S.stream(1, "split")
    beta = 1.6
    # P(X=0) = x^d / (d! I_d(2x)) with x = beta*J/2 and d = 1
    want = (beta / 2.0) / bessel_i(1, beta)
    hits = 0
    trials = 4000
    for _ in range(trials):
        n = S.sample_current(g, [0, 1], beta, rng)
        pair = min(n[0], n[1])
        hits += pair == 0
    assert abs(hits / trials - want) < 4.0 * math.sqrt(want * (1 - want) / trials)


# ============================================================
# Estimation helpers
# ============================================================


def test_batch_means_on_iid_data():
    rng = np.random.default_rng(1)
    x = rng.normal(size=6400)
    est = S.batch_means(x)
    assert est.n == 6400
    naive = x.std(ddof=1) / math.sqrt(x.size)
    assert 0.5 * naive < est.se < 2.0 * naive
    lo, hi = est.interval()
    assert lo < 0.0 < hi


def test_ess_iid_and_autocorrelated():
    rng = np.random.default_rng(2)
    iid = rng.normal(size=4000)
    assert S.ess_initial_positive(iid) > 0.7 * 4000
    ar = np.empty(4000)
    ar[0] = 0.0
    for i in range(1, 4000):
        ar[i] = 0.9 * ar[i - 1] + rng.normal()
    ess = S.ess_initial_positive(ar)
    # integrated autocorrelation time of AR(1) at 0.9 is 19
    assert 4000 / 40 < ess < 4000 / 8


def test_sampler_input_validation():
    g = P.cycle_graph(4)
    with pytest.raises(S.SamplerError):
        S.SpinState(g, 0.0, S.stream(0))
    with pytest.raises(S.SamplerError):
        next(S.height_chain(g, -1.0, sweeps=1))
    with pytest.raises(S.SamplerError):
        S.ChainSpec(seed=1, samples=0)
    with pytest.raises(S.SamplerError):
        S.ChainSpec(seed=1, thinning=0)
