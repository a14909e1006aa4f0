"""Loop configuration tests.

The weight identity, cutting, reversal, winding, and switching checks are
all exact combinatorial statements, so most assertions here demand machine
precision; only the switching enclosures carry honest truncation slack.
"""

import math

import numpy as np
import pytest

from xyloops import bessel as B
from xyloops import currents as C
from xyloops import loops as L
from xyloops import planar as P


def lap_current(g, verts):
    """Unit current running once around the given vertex cycle."""
    n = [0] * g.n_half
    for v, w in zip(verts, list(verts[1:]) + [verts[0]]):
        n[g.half_edge_from_to(g.vertex_id(v), g.vertex_id(w))] += 1
    return n


def single_edge():
    return P.parallel_edges(1)


# ------------------------------------------------------------
# multigraphs and configurations
# ------------------------------------------------------------


def test_multigraph_structure():
    g = P.cycle_graph(4)
    m = L.LoopMultigraph(g, [2, 0, 1, 3])
    assert m.n_copies == 6
    assert m.offset == (0, 2, 2, 3)
    assert m.edge_of_copy == (0, 0, 2, 3, 3, 3)
    degrees = [m.degree(v) for v in range(4)]
    assert sum(degrees) == 12
    with pytest.raises(L.LoopEnsembleError):
        L.LoopMultigraph(g, [1, 1])
    with pytest.raises(L.LoopEnsembleError):
        L.LoopMultigraph(g, [1, -1, 0, 0])


def test_multigraph_from_current_uses_amplitudes():
    g = single_edge()
    m = L.LoopMultigraph.from_current(g, [2, 1])
    assert m.copies == (3,)
    assert m.degree(0) == 3


def test_config_validation_rejects_bad_matchings():
    g = single_edge()
    m = L.LoopMultigraph(g, [2])
    orient = [True, False]
    # valid: the forward copy continues into the backward copy and back
    L.LoopConfig(m, orient, [1, 0], ())
    with pytest.raises(L.LoopEnsembleError):
        L.LoopConfig(m, orient, [1, -1], ())          # loose end outside sources
    with pytest.raises(L.LoopEnsembleError):
        L.LoopConfig(m, orient, [0, 1], ())           # matching jumps vertices
    with pytest.raises(L.LoopEnsembleError):
        L.LoopConfig(m, orient, [1, 0], (9,))         # unknown vertex id
    with pytest.raises(L.LoopEnsembleError):
        L.LoopConfig(m, [True], [1, 0], ())           # wrong array length


# ------------------------------------------------------------
# enumeration
# ------------------------------------------------------------


def test_zero_current_has_one_empty_configuration():
    g = P.cycle_graph(4)
    cfgs = L.enumerate_consistent(g, [0] * g.n_half, ())
    assert len(cfgs) == 1
    assert cfgs[0].m.n_copies == 0
    assert L.weight_lambda(cfgs[0], 1.0) == 0.0


def test_lap_current_forces_single_configuration():
    g = P.cycle_graph(4)
    lap = lap_current(g, [0, 1, 2, 3])
    cfgs = L.enumerate_consistent(g, lap, ())
    assert len(cfgs) == 1
    loops = L.closed_loops(cfgs[0])
    assert len(loops) == 1 and len(loops[0]) == 4


def test_back_and_forth_on_one_edge_is_forced():
    g = single_edge()
    cfgs = L.enumerate_consistent(g, [1, 1], ())
    assert len(cfgs) == 1
    loops = L.closed_loops(cfgs[0])
    assert len(loops) == 1 and len(loops[0]) == 2


def test_enumeration_count_identity():
    # count == prod over non-source vertices of (deg/2)! for balanced currents
    g = P.chain_graph([1, 1, 1])
    n = [0] * g.n_half
    for e in range(3):
        n[2 * e] = 1
        n[2 * e + 1] = 1
    m = L.LoopMultigraph.from_current(g, n)
    expected = math.factorial(m.degree(g.vertex_id("a")) // 2) * math.factorial(
        m.degree(g.vertex_id("b")) // 2
    )
    assert len(L.enumerate_consistent(g, n, ())) == expected
    assert len(L.enumerate_consistent(g, n, ("a",))) == math.factorial(3)
    assert len(L.enumerate_consistent(g, n, ("a", "b"))) == 1


def test_enumeration_empty_when_sources_miss_divergence():
    g = single_edge()
    assert L.enumerate_consistent(g, [2, 1], ()) == []
    assert L.enumerate_consistent(g, [2, 1], ("a",)) == []
    assert len(L.enumerate_consistent(g, [2, 1], ("a", "b"))) == 1


def test_enumeration_guards():
    g = P.parallel_edges(2)
    with pytest.raises(L.LoopEnsembleError):
        L.enumerate_consistent(g, [7, 7, 7, 5], ())   # 26 copies
    with pytest.raises(L.LoopEnsembleError):
        L.enumerate_consistent(g, [6, 6, 6, 6], ())   # (12!)^2 matchings


# ------------------------------------------------------------
# weights and the current-weight identity
# ------------------------------------------------------------


def test_weight_examples():
    g = P.cycle_graph(4)
    lap = lap_current(g, [0, 1, 2, 3])
    cfg = L.enumerate_consistent(g, lap, ())[0]
    assert L.weight_lambda(cfg, 2.0) == pytest.approx(0.0, abs=1e-14)

    e = single_edge()
    cfg = L.enumerate_consistent(e, [1, 1], ("a", "b"))[0]
    assert L.weight_lambda(cfg, 2.0) == pytest.approx(math.log(0.5), rel=1e-14)
    with pytest.raises(L.LoopEnsembleError):
        L.weight_lambda(cfg, 0.0)


def test_orientation_multiplicity():
    g = P.parallel_edges(2)
    assert L.orientation_multiplicity(g, [2, 1, 0, 0]) == 3
    assert L.orientation_multiplicity(g, [2, 2, 1, 1]) == 12
    assert L.orientation_multiplicity(g, [0, 0, 0, 0]) == 1


def test_loopexp_battery():
    battery = [
        (single_edge(), 2.0),
        (P.parallel_edges(2), 0.7),
        (P.path_graph(4), 1.1),
        (P.cycle_graph(4), 1.0),
        (P.chain_graph([1, 1, 1]), 1.4),
    ]
    for g, beta in battery:
        for n in C.enumerate_currents(g, None, 2):
            if sum(n) > 8:
                continue
            rep = L.verify_loopexp(g, n, [g.labels[0]], beta)
            assert rep["passed"], (g.labels, n, rep)
            assert rep["sum_residual"] <= 1e-12
            assert rep["alt_sum_residual"] <= 1e-12


def test_loopexp_sourced_instances():
    e = single_edge()
    rep = L.verify_loopexp(e, [2, 1], ["a", "b"], 2.0)
    assert rep["passed"]
    assert rep["target"] == pytest.approx(0.5, rel=1e-15)

    g = P.chain_graph([1, 2])
    for n in C.enumerate_currents(g, {"a": 1, "b": -1}, 2):
        if sum(n) > 7:
            continue
        assert L.verify_loopexp(g, n, ["a", "b"], 0.9)["passed"]


def test_loopexp_lap_value():
    g = P.cycle_graph(4)
    lap = lap_current(g, [0, 1, 2, 3])
    rep = L.verify_loopexp(g, lap, (), 1.0)
    assert rep["target"] == pytest.approx(0.5**4, rel=1e-15)
    assert rep["passed"]


def test_loopexp_rejects_uncovered_sources():
    with pytest.raises(L.LoopEnsembleError):
        L.verify_loopexp(single_edge(), [2, 1], (), 1.0)


# ------------------------------------------------------------
# cutting
# ------------------------------------------------------------


def test_cutting_identity_on_doubled_edge():
    g = P.parallel_edges(2)
    rep = L.verify_cutting(g, [1, 1, 1, 1], [], ["a"], 2.0)
    assert rep["passed"]
    assert rep["fine_count"] == 4
    assert rep["coarse_count"] == 2
    assert rep["preimages_expected"] == 2


def test_cutting_with_equal_sets_is_identity():
    g = P.cycle_graph(4)
    lap = lap_current(g, [0, 1, 2, 3])
    rep = L.verify_cutting(g, lap, [0], [0], 1.0)
    assert rep["passed"]
    assert rep["preimages_expected"] == 1
    cfg = L.enumerate_consistent(g, lap, (0,))[0]
    assert L.cutting_map(cfg, (0,)) == cfg


def test_cutting_on_theta_graph():
    g = P.chain_graph([1, 1, 1])
    n = [0] * g.n_half
    for e in range(3):
        n[2 * e] = n[2 * e + 1] = 1
    rep = L.verify_cutting(g, n, ["a"], ["a", "b"], 1.3)
    assert rep["passed"]
    assert rep["preimages_expected"] == 6


def test_cutting_requires_nested_sources():
    g = P.cycle_graph(4)
    cfg = L.enumerate_consistent(g, [0] * 8, (0,))[0]
    with pytest.raises(L.LoopEnsembleError):
        L.cutting_map(cfg, (1,))


# ------------------------------------------------------------
# crossing counts
# ------------------------------------------------------------


def test_count_m_zero_when_loops_avoid_the_marks():
    g = P.cycle_graph(4)
    h = g.half_edge_from_to(2, 3)
    n = [0] * g.n_half
    n[h] = n[h ^ 1] = 1
    cfg = L.enumerate_consistent(g, n, ())[0]
    assert L.count_m(cfg, 0, 1) == 0


def test_count_m_single_round_trip():
    g = P.parallel_edges(2)
    n = [1, 0, 0, 1]  # a to b on the first edge, back on the second
    cfg = L.enumerate_consistent(g, n, ())[0]
    assert L.count_m(cfg, "a", "b") == 1
    assert L.count_m(cfg, "b", "a") == 1


def test_count_m_figure_eight():
    g = P.parallel_edges(2)
    cfgs = L.enumerate_consistent(g, [1, 1, 1, 1], ())
    eights = [c for c in cfgs if len(L.closed_loops(c)) == 1]
    assert eights
    for cfg in eights:
        assert L.count_m(cfg, "a", "b") == 2


def test_count_m_on_lap():
    g = P.cycle_graph(4)
    cfg = L.enumerate_consistent(g, lap_current(g, [0, 1, 2, 3]), ())[0]
    assert L.count_m(cfg, 0, 1) == 1
    assert L.count_m(cfg, 0, 2) == 1


def test_count_m_argument_errors():
    g = P.cycle_graph(4)
    cfg = L.enumerate_consistent(g, [0] * 8, ())[0]
    with pytest.raises(L.LoopEnsembleError):
        L.count_m(cfg, 0, 0)
    sourced = L.enumerate_consistent(g, [0] * 8, (0,))[0]
    with pytest.raises(L.LoopEnsembleError):
        L.count_m(sourced, 0, 1)


# ------------------------------------------------------------
# winding
# ------------------------------------------------------------


def test_winding_matches_height_exhaustively():
    for g in (P.cycle_graph(4), P.chain_graph([1, 1, 1])):
        for n in C.enumerate_currents(g, None, 2):
            if sum(n) > 6:
                continue
            height = C.height_from_current(g, n)
            for cfg in L.enumerate_consistent(g, n, ()):
                assert L.winding_field(cfg) == height


def test_winding_of_laps():
    g = P.cycle_graph(4)
    inner = [f for f in range(g.nf) if f != g.outer_face][0]
    one_way = L.enumerate_consistent(g, lap_current(g, [0, 1, 2, 3]), ())[0]
    other_way = L.enumerate_consistent(g, lap_current(g, [3, 2, 1, 0]), ())[0]
    fields = {L.winding_field(one_way)[inner], L.winding_field(other_way)[inner]}
    assert fields == {1, -1}
    empty = L.enumerate_consistent(g, [0] * g.n_half, ())[0]
    assert L.winding_field(empty) == [0] * g.nf


def test_winding_requires_sourceless():
    g = P.cycle_graph(4)
    cfg = L.enumerate_consistent(g, [0] * 8, (0,))[0]
    with pytest.raises(L.LoopEnsembleError):
        L.winding_field(cfg)


# ------------------------------------------------------------
# reversal
# ------------------------------------------------------------


def test_reverse_path_involution_and_weight():
    g = P.cycle_graph(4)
    beta = 1.3
    for n in C.enumerate_currents(g, {0: 2, 1: -2}, 2):
        for cfg in L.enumerate_consistent(g, n, (0, 1)):
            for path in L.open_paths(cfg):
                rev = L.reverse_path(cfg, path)
                assert L.weight_lambda(rev, beta) == pytest.approx(
                    L.weight_lambda(cfg, beta), rel=1e-14
                )
                back = tuple(reversed(path))
                assert back in L.open_paths(rev)
                assert L.canonical_form(L.reverse_path(rev, back)) == L.canonical_form(cfg)


def test_reverse_path_lands_in_the_sourceless_sector():
    g = P.cycle_graph(4)
    sourceless = set()
    for n in C.enumerate_currents(g, None, 2):
        sourceless.update(L.enumerate_consistent(g, n, (0, 1)))
    for n in C.enumerate_currents(g, {0: 2, 1: -2}, 2):
        for cfg in L.enumerate_consistent(g, n, (0, 1)):
            for path in L.open_paths(cfg):
                if cfg.copy_tail(path[0]) != 0 or cfg.copy_head(path[-1]) != 1:
                    continue
                image = L.canonical_form(L.reverse_path(cfg, path))
                assert image in sourceless
                assert L.path_counts(image, 0, 1)[1] >= 1


def test_reversal_counting_identity():
    # summed over equal amplitude cutoffs the reversal bijection gives
    #   sum lambda * m_{a,b} (charge 2 at a) == sum lambda * m_{b,a} (charge 0)
    cases = [
        (single_edge(), "a", "b", 5, 1.7),
        (P.parallel_edges(2), "a", "b", 3, 0.9),
        (P.cycle_graph(4), 0, 1, 2, 1.3),
    ]
    for g, a, b, cutoff, beta in cases:
        lhs = rhs = 0.0
        for n in C.enumerate_currents(g, {a: 2, b: -2}, cutoff):
            mult = L.orientation_multiplicity(g, n)
            for cfg in L.enumerate_consistent(g, n, (a, b)):
                lhs += mult * math.exp(L.weight_lambda(cfg, beta)) * L.path_counts(cfg, a, b)[0]
        for n in C.enumerate_currents(g, None, cutoff):
            mult = L.orientation_multiplicity(g, n)
            for cfg in L.enumerate_consistent(g, n, (a, b)):
                rhs += mult * math.exp(L.weight_lambda(cfg, beta)) * L.path_counts(cfg, a, b)[1]
        assert rhs == pytest.approx(lhs, rel=1e-12)


def test_global_reversal():
    g = P.cycle_graph(4)
    beta = 1.1
    for n in C.enumerate_currents(g, {0: 2, 2: -2}, 2):
        for cfg in L.enumerate_consistent(g, n, (0, 2)):
            rev = L.reverse_config(cfg)
            assert L.weight_lambda(rev, beta) == pytest.approx(
                L.weight_lambda(cfg, beta), rel=1e-14
            )
            ab, ba = L.path_counts(cfg, 0, 2)
            assert L.path_counts(rev, 0, 2) == (ba, ab)
            assert L.canonical_form(L.reverse_config(rev)) == L.canonical_form(cfg)


def test_reverse_path_rejects_non_paths():
    g = P.cycle_graph(4)
    cfg = L.enumerate_consistent(g, lap_current(g, [0, 1, 2, 3]), ())[0]
    loop = L.closed_loops(cfg)[0]
    with pytest.raises(L.LoopEnsembleError):
        L.reverse_path(cfg, loop)
    with pytest.raises(L.LoopEnsembleError):
        L.reverse_path(cfg, ())


# ------------------------------------------------------------
# Eulerian orientation counts
# ------------------------------------------------------------


def test_eulerian_factor_examples():
    g = P.cycle_graph(4)
    assert L.eulerian_factor(L.LoopMultigraph(g, [1, 1, 1, 1])) == 2
    dbl = P.parallel_edges(2)
    assert L.eulerian_factor(L.LoopMultigraph(dbl, [1, 1])) == 2
    assert L.eulerian_factor(L.LoopMultigraph(dbl, [2, 1])) == 0
    with pytest.raises(L.LoopEnsembleError):
        L.eulerian_factor(L.LoopMultigraph(dbl, [7, 7]))


def test_eulerian_factor_gives_the_multigraph_marginal():
    # sum of w(n) over currents with fixed amplitudes == E(M) prod x^M / M!
    beta = 1.4
    cases = [
        (P.parallel_edges(2), [2, 2]),
        (P.cycle_graph(4), [1, 1, 1, 1]),
        (P.chain_graph([1, 1, 1]), [2, 1, 1]),
    ]
    for g, m_e in cases:
        total = 0.0
        for n in C.enumerate_currents(g, None, max(m_e)):
            if C.amplitude(g, n) == m_e:
                total += C.current_weight(g, n, beta)
        count = L.eulerian_factor(L.LoopMultigraph(g, m_e))
        predicted = count * math.prod(
            (beta * g.coupling[e] / 2.0) ** m_e[e] / math.factorial(m_e[e])
            for e in range(g.ne)
        )
        assert total == pytest.approx(predicted, rel=1e-13, abs=1e-300)


# ------------------------------------------------------------
# random pairings
# ------------------------------------------------------------


def test_random_pairing_is_deterministic_per_seed():
    g = P.cycle_graph(4)
    n = lap_current(g, [0, 1, 2, 3])
    n[0] += 1
    n[1] += 1  # add a back-and-forth so matchings have freedom
    draws1 = [L.random_pairing(g, n, np.random.default_rng(11)) for _ in range(5)]
    draws2 = [L.random_pairing(g, n, np.random.default_rng(11)) for _ in range(5)]
    assert draws1 == draws2


def test_random_pairing_is_uniform():
    g = P.parallel_edges(2)
    n = [1, 1, 1, 1]
    assert len(L.enumerate_consistent(g, n, ())) == 4
    rng = np.random.default_rng(7)
    counts: dict = {}
    draws = 4000
    for _ in range(draws):
        cfg = L.random_pairing(g, n, rng)
        counts[cfg] = counts.get(cfg, 0) + 1
    assert len(counts) == 4
    sd = math.sqrt(draws * 0.25 * 0.75)
    for c in counts.values():
        assert abs(c - draws / 4) < 4 * sd


def test_random_pairing_needs_balanced_current():
    with pytest.raises(L.LoopEnsembleError):
        L.random_pairing(single_edge(), [2, 1], np.random.default_rng(0))


# ------------------------------------------------------------
# switching identity, brute route
# ------------------------------------------------------------


def test_single_switch_on_single_edge():
    g = single_edge()
    beta = 2.0
    rep = L.single_switch_verify(g, beta, "a", "b", cutoff=6)
    truth = B.bessel_i(2, beta) / B.bessel_i(0, beta)
    assert rep["consistent"] and rep["sandwich_ok"]
    assert rep["loops"][0] <= truth <= rep["loops"][1]
    assert rep["spin"][0] <= truth <= rep["spin"][1]
    assert rep["loops"][1] - rep["loops"][0] < 0.05


def test_single_switch_on_square():
    g = P.cycle_graph(4)
    rep = L.single_switch_verify(g, 1.0, 0, 1, cutoff=3)
    assert rep["consistent"] and rep["sandwich_ok"]
    # amplitude tails at this cutoff are large; the width flag must say so
    flagged = L.single_switch_verify(g, 1.0, 0, 1, cutoff=3, width_target=1e-6)
    assert flagged["inconclusive"] and not flagged["passed"]


def test_higher_power_on_single_edge():
    g = single_edge()
    beta = 2.0
    rep = L.higher_power_verify(g, beta, "a", "b", 2, cutoff=6)
    truth = B.bessel_i(4, beta) / B.bessel_i(0, beta)
    assert rep["consistent"]
    assert rep["loops"][0] <= truth <= rep["loops"][1]

    one = L.higher_power_verify(g, beta, "a", "b", 1, cutoff=5)
    same = L.single_switch_verify(g, beta, "a", "b", cutoff=5)
    assert one["loops"] == same["loops"]


def test_higher_power_with_unreachable_count():
    # at amplitude cutoff 2 the crossing count never reaches k=2, so the
    # loop side truncates to zero and the spin side hides below the tail
    g = single_edge()
    rep = L.higher_power_verify(g, 0.2, "a", "b", 2, cutoff=2)
    assert rep["loops"][0] == 0.0
    assert rep["consistent"]


def test_switch_argument_errors():
    g = single_edge()
    with pytest.raises(L.LoopEnsembleError):
        L.higher_power_verify(g, 1.0, "a", "b", 0)
    with pytest.raises(L.LoopEnsembleError):
        L.single_switch_verify(g, 1.0, "a", "a")
