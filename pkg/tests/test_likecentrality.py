from __future__ import annotations

import numpy as np
import pytest

from likesim import (
    DegenerateNodeError,
    Graph,
    InvalidParameterError,
    LikeCentralityVector,
    RateMatrix,
    deviations,
    generate_ba,
    give_rate,
    prestige,
    receive_stats,
    residual,
    sample_rates,
    solve_lc,
)
from likesim.rng import SplitMix64

from .oracles import solve_k3_oracle, solve_p3_oracle

K3 = Graph.from_edges(3, [(0, 1), (0, 2), (1, 2)])
PATH3 = Graph.from_edges(3, [(0, 1), (1, 2)])
EDGE2 = Graph.from_edges(2, [(0, 1)])


def rates_from(g: Graph, mapping: dict) -> RateMatrix:
    return RateMatrix(n=g.n, entries={k: float(v) for k, v in mapping.items()})


def random_rates(g: Graph, seed: int) -> RateMatrix:
    stream = SplitMix64(seed)
    pairs = sorted([(i, j) for i, j in g.edges] + [(j, i) for i, j in g.edges])
    return RateMatrix(n=g.n, entries={p: stream.uniform() for p in pairs})


# The triangle example instance: every node's received rates sum to 1,
# so the solved centralities are exactly (0.5, 0.5, 0.5).
K3_EXAMPLE = {
    (0, 1): 0.9, (0, 2): 0.1,
    (1, 0): 0.4, (1, 2): 0.6,
    (2, 0): 0.2, (2, 1): 0.8,
}


class TestSampleRates:
    def test_domain_size_k3(self):
        r = sample_rates(K3, 1)
        assert len(r.entries) == 6
        assert all(0.0 <= v < 1.0 for v in r.entries.values())

    def test_deterministic(self):
        assert sample_rates(K3, 9).entries == sample_rates(K3, 9).entries

    def test_ba_domain_size(self):
        g = generate_ba(10, 2, 4)
        assert len(sample_rates(g, 0).entries) == 34

    def test_canonical_order_independent_of_edge_order(self):
        r = sample_rates(K3, 5)
        assert list(r.sorted_items()) == sorted(r.entries.items())


class TestSolveExamples:
    def test_single_edge_collapses_to_rates(self):
        r = rates_from(EDGE2, {(0, 1): 0.7, (1, 0): 0.3})
        lc = solve_lc(EDGE2, r)
        assert lc.converged
        assert lc.values == pytest.approx([0.7, 0.3], abs=1e-12)
        assert prestige(lc) == pytest.approx(1.0)

    def test_k3_symmetric(self):
        r = rates_from(K3, {p: 0.5 for p in K3_EXAMPLE})
        lc = solve_lc(K3, r)
        assert lc.values == pytest.approx([0.5, 0.5, 0.5], abs=1e-12)

    def test_k3_example_against_oracle(self):
        expected = solve_k3_oracle(K3_EXAMPLE)
        assert expected == pytest.approx([0.5, 0.5, 0.5], abs=1e-10)
        lc = solve_lc(K3, rates_from(K3, K3_EXAMPLE))
        assert lc.converged
        assert np.abs(lc.values - expected).max() <= 1e-8

    def test_nonconvergence_flagged(self):
        asym = {
            (0, 1): 0.9, (0, 2): 0.2,
            (1, 0): 0.1, (1, 2): 0.5,
            (2, 0): 0.7, (2, 1): 0.3,
        }
        lc = solve_lc(K3, rates_from(K3, asym), max_iters=1)
        assert not lc.converged
        assert lc.iterations == 1
        assert lc.residual_sup > 0


class TestOracleEquivalence:
    def test_k3_instances(self):
        for seed in range(250):
            r = random_rates(K3, seed)
            lc = solve_lc(K3, r)
            assert lc.converged
            oracle = solve_k3_oracle(r.entries)
            assert np.abs(lc.values - oracle).max() <= 1e-8

    def test_p3_instances(self):
        for seed in range(250):
            r = random_rates(PATH3, seed)
            lc = solve_lc(PATH3, r)
            assert lc.converged
            oracle = solve_p3_oracle(r.entries)
            assert np.abs(lc.values - oracle).max() <= 1e-8


class TestResidual:
    def test_zero_at_solution(self):
        g = generate_ba(10, 2, 11)
        r = sample_rates(g, 3)
        lc = solve_lc(g, r)
        cleared, mean_field = residual(g, r, lc)
        assert cleared.max() <= 1e-9
        assert mean_field.max() <= 1e-9
        assert cleared == pytest.approx(mean_field, abs=1e-14)

    def test_perturbation_is_local(self):
        g = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
        entries = {
            (0, 1): 0.9, (1, 0): 0.2, (1, 2): 0.7,
            (2, 1): 0.4, (2, 3): 0.6, (3, 2): 0.3,
        }
        r = rates_from(g, entries)
        lc = solve_lc(g, r, tol=1e-14)
        bumped = LikeCentralityVector(
            values=lc.values + np.array([0.1, 0.0, 0.0, 0.0]),
            converged=True, iterations=lc.iterations, residual_sup=lc.residual_sup,
        )
        cleared, _ = residual(g, r, bumped)
        assert cleared[0] > 1e-3
        assert cleared[1] > 1e-3  # neighbor of the bumped node
        # nodes at distance >= 2 from the bump keep a solution-level residual
        assert cleared[2] <= 1e-9
        assert cleared[3] <= 1e-9

    def test_mean_field_input_residual_zero(self):
        # Uniform received rates c_i: the solution is exactly L_i = c_i.
        g = K3
        entries = {
            (0, 1): 0.3, (0, 2): 0.3,
            (1, 0): 0.8, (1, 2): 0.8,
            (2, 0): 0.6, (2, 1): 0.6,
        }
        r = rates_from(g, entries)
        mf = LikeCentralityVector(
            values=np.array([0.3, 0.8, 0.6]), converged=True,
            iterations=0, residual_sup=0.0,
        )
        cleared, mean_field = residual(g, r, mf)
        assert cleared.max() <= 1e-12
        assert mean_field.max() <= 1e-12
        lc = solve_lc(g, r)
        assert lc.values == pytest.approx([0.3, 0.8, 0.6], abs=1e-10)


class TestPrestige:
    def test_constant_vector(self):
        lc = LikeCentralityVector(np.full(10, 0.5), True, 1, 0.0)
        assert prestige(lc) == pytest.approx(5.0)

    def test_zero_vector(self):
        lc = LikeCentralityVector(np.zeros(4), True, 1, 0.0)
        assert prestige(lc) == 0.0


class TestDeviations:
    def test_degree_one_node_exact_mean_field(self):
        r = random_rates(PATH3, 77)
        lc = solve_lc(PATH3, r, tol=1e-14)
        dev = deviations(PATH3, r, lc)
        assert dev.delta[(0, 1)] == pytest.approx(0.0, abs=1e-10)
        assert dev.epsilon[(0, 1)] == pytest.approx(0.0, abs=1e-11)
        assert dev.epsilon[(2, 1)] == pytest.approx(0.0, abs=1e-11)
        assert dev.dropped_pairs == 0

    def test_eq4_identity_on_samples(self):
        for seed in range(20):
            g = generate_ba(10, 2, seed)
            r = sample_rates(g, seed + 1000)
            lc = solve_lc(g, r)
            dev = deviations(g, r, lc)
            f = g.adjacency_matrix
            for i in range(g.n):
                total = sum(
                    dev.epsilon[(i, j)] * lc.values[j]
                    for j in range(g.n)
                    if f[i, j] > 0
                )
                assert abs(total) <= 1e-8

    def test_advantage_flag_matches_definition(self):
        g = generate_ba(10, 2, 2)
        r = sample_rates(g, 3)
        lc = solve_lc(g, r)
        dev = deviations(g, r, lc)
        for v in range(g.n):
            mean_received, _, _ = receive_stats(g, r, v)
            assert dev.agent_advantage[v] == (lc.values[v] > mean_received)


class TestGiveReceive:
    def test_give_rate_sums_column(self):
        r = rates_from(K3, K3_EXAMPLE)
        # node 2 gives r_02 = 0.1 and r_12 = 0.6
        assert give_rate(K3, r, 2) == pytest.approx(0.7)

    def test_give_rate_zero_when_all_given_zero(self):
        entries = dict(K3_EXAMPLE)
        entries[(0, 2)] = 0.0
        entries[(1, 2)] = 0.0
        r = rates_from(K3, entries)
        assert give_rate(K3, r, 2) == 0.0

    def test_receive_stats_basic(self):
        entries = dict(K3_EXAMPLE)
        entries[(0, 1)] = 0.8
        entries[(0, 2)] = 0.2
        r = rates_from(K3, entries)
        mean, lo, hi = receive_stats(K3, r, 0)
        assert (mean, lo, hi) == pytest.approx((0.5, 0.2, 0.8))

    def test_uniform_received(self):
        entries = {p: 0.4 for p in K3_EXAMPLE}
        r = rates_from(K3, entries)
        assert receive_stats(K3, r, 1) == pytest.approx((0.4, 0.4, 0.4))

    def test_solution_within_received_bounds(self):
        for seed in range(30):
            g = generate_ba(10, 2, seed)
            r = sample_rates(g, seed)
            lc = solve_lc(g, r)
            for v in range(g.n):
                _, lo, hi = receive_stats(g, r, v)
                assert lo - 1e-9 <= lc.values[v] <= hi + 1e-9


class TestProperties:
    def test_scale_covariance(self):
        g = generate_ba(10, 2, 21)
        r = sample_rates(g, 8)
        base = solve_lc(g, r, tol=1e-13)
        for s in (0.05, 0.3, 0.7, 1.0):
            scaled = RateMatrix(
                n=g.n, entries={k: v * s for k, v in r.entries.items()}
            )
            lc_s = solve_lc(g, scaled, tol=1e-13)
            assert np.abs(lc_s.values - s * base.values).max() <= 1e-8

    def test_mean_field_collapse(self):
        g = generate_ba(10, 2, 31)
        stream = SplitMix64(5)
        received = [stream.uniform() for _ in range(g.n)]
        entries = {}
        for i, j in g.edges:
            entries[(i, j)] = received[i]
            entries[(j, i)] = received[j]
        r = RateMatrix(n=g.n, entries=entries)
        lc = solve_lc(g, r)
        assert lc.values == pytest.approx(received, abs=1e-9)

    def test_bit_identical_repeat(self):
        g = generate_ba(10, 2, 13)
        r = sample_rates(g, 14)
        a = solve_lc(g, r)
        b = solve_lc(g, r)
        assert (a.values == b.values).all()
        assert a.iterations == b.iterations
        assert a.residual_sup == b.residual_sup


class TestDegenerateInputs:
    def test_all_zero_received_pins_and_warns(self):
        entries = dict(K3_EXAMPLE)
        entries[(0, 1)] = 0.0
        entries[(0, 2)] = 0.0
        r = rates_from(K3, entries)
        with pytest.warns(UserWarning, match="pinned"):
            lc = solve_lc(K3, r)
        assert lc.converged
        assert lc.values[0] == 0.0
        assert lc.values[1] > 0 and lc.values[2] > 0
        dev = deviations(K3, r, lc)
        assert dev.dropped_pairs == 2
        assert (0, 1) not in dev.epsilon

    def test_degenerate_denominator_raises(self):
        # Node 1's neighbors both receive only zeros, so its denominator dies.
        g = PATH3
        entries = {
            (0, 1): 0.0, (1, 0): 0.5, (1, 2): 0.5, (2, 1): 0.0,
        }
        r = rates_from(g, entries)
        with pytest.warns(UserWarning, match="pinned"):
            with pytest.raises(DegenerateNodeError):
                solve_lc(g, r)

    def test_rate_validation(self):
        entries = dict(K3_EXAMPLE)
        entries[(0, 1)] = 1.5
        with pytest.raises(InvalidParameterError):
            solve_lc(K3, rates_from(K3, entries))

    def test_domain_validation(self):
        entries = dict(K3_EXAMPLE)
        del entries[(2, 1)]
        with pytest.raises(InvalidParameterError):
            solve_lc(K3, rates_from(K3, entries))

    def test_disconnected_rejected(self):
        g = Graph.from_edges(4, [(0, 1), (2, 3)])
        entries = {(0, 1): 0.5, (1, 0): 0.5, (2, 3): 0.5, (3, 2): 0.5}
        with pytest.raises(InvalidParameterError):
            solve_lc(g, RateMatrix(n=4, entries=entries))
