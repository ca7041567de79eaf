import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kgcrf.errors import DegreeOutOfRangeError
from kgcrf.graph import SimilarityMatrix, edge_density
from kgcrf.randnet import (
    GraphTopology,
    RngStream,
    assign_weights,
    ba_attachment,
    gen_barabasi_albert,
    gen_erdos_renyi,
    gen_topology,
    gen_watts_strogatz,
    ws_ring_degree,
)


class TestRngStream:
    def test_same_address_same_sequence(self):
        a = RngStream(5, 2).generator(1).random(4)
        b = RngStream(5, 2).generator(1).random(4)
        assert np.array_equal(a, b)

    def test_addresses_differ(self):
        base = RngStream(5, 2).generator(1).random(4)
        for other in (RngStream(6, 2).generator(1), RngStream(5, 3).generator(1), RngStream(5, 2).generator(2)):
            assert not np.array_equal(base, other.random(4))


class TestTopology:
    def test_rejects_self_loop(self):
        with pytest.raises(ValueError):
            GraphTopology(3, frozenset({(1, 1)}))

    def test_from_pairs_dedupes_orientation(self):
        g = GraphTopology.from_pairs(3, [(0, 1), (1, 0), (2, 1)])
        assert g.m == 2


class TestErdosRenyi:
    @pytest.mark.parametrize("n, rho, m", [(50, 0.10, 122), (30, 0.10, 43), (10, 1.0, 45),
                                           (50, 0.3, 367), (50, 0.5, 612), (50, 0.65, 796), (50, 0.8, 980),
                                           (30, 0.3, 130), (30, 0.5, 217), (30, 0.65, 282), (30, 0.8, 348)])
    def test_edge_count(self, n, rho, m):
        assert gen_erdos_renyi(n, rho, RngStream(1)).m == m

    def test_deterministic(self):
        assert gen_erdos_renyi(40, 0.2, RngStream(3, 1)) == gen_erdos_renyi(40, 0.2, RngStream(3, 1))

    def test_rejects_bad_density(self):
        with pytest.raises(ValueError):
            gen_erdos_renyi(10, 0, RngStream(0))


class TestWattsStrogatz:
    @pytest.mark.parametrize("rho, k, m", [(0.0202, 2, 100), (0.202, 20, 1000)])
    def test_edge_count(self, rho, k, m):
        assert ws_ring_degree(100, rho) == k
        assert gen_watts_strogatz(100, rho, RngStream(0)).m == m

    def test_no_rewiring_is_ring_lattice(self):
        g = gen_watts_strogatz(12, 4 / 11, RngStream(0), p_rewire=0.0)
        ring = {(i, (i + s) % 12) for i in range(12) for s in (1, 2)}
        assert g.edges == frozenset((min(a, b), max(a, b)) for a, b in ring)

    @pytest.mark.parametrize("n, rho", [(100, 0.005), (4, 1.0)])
    def test_degree_out_of_range(self, n, rho):
        with pytest.raises(DegreeOutOfRangeError):
            gen_watts_strogatz(n, rho, RngStream(0))


class TestBarabasiAlbert:
    @pytest.mark.parametrize("n, rho, m", [(100, 0.10, 475), (100, 0.8, 2500), (50, 0.10, 141)])
    def test_edge_count(self, n, rho, m):
        assert gen_barabasi_albert(n, rho, RngStream(2)).m == m

    def test_attachment_capped(self):
        assert ba_attachment(100, 0.8) == 50
        assert ba_attachment(100, 1.0) == 50

    @settings(max_examples=40, deadline=None)
    @given(st.integers(4, 60), st.floats(0.01, 1.0))
    def test_attachment_is_nearest_to_target(self, n, rho):
        m = ba_attachment(n, rho)
        target = rho * n * (n - 1) / 2
        errs = {k: abs(k * (n - k) - target) for k in range(1, n // 2 + 1)}
        assert errs[m] == min(errs.values())


class TestGenTopology:
    @pytest.mark.parametrize("kind", ["er", "ba", "ws"])
    def test_connected(self, kind):
        g = gen_topology(kind, 30, 0.1, RngStream(4))
        assert nx.is_connected(nx.Graph(list(g.edges)))

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            gen_topology("grid", 10, 0.5, RngStream(0))


class TestWeights:
    def test_zero_attributes_give_unit_weights(self):
        g = gen_erdos_renyi(10, 0.4, RngStream(0))
        S = assign_weights(g, np.zeros(10))
        assert np.array_equal(S.entries, g.adjacency())

    def test_equal_attributes(self):
        S = assign_weights(GraphTopology.from_pairs(2, [(0, 1)]), [0.3, 0.3])
        assert S.entries[0, 1] == 1

    def test_symmetric_kernel(self):
        S = assign_weights(GraphTopology.from_pairs(2, [(0, 1)]), [1.0, 0.0])
        assert S.entries[0, 1] == S.entries[1, 0] == pytest.approx(math.exp(-1))

    @settings(max_examples=30, deadline=None)
    @given(st.integers(3, 25), st.floats(0.1, 1.0), st.integers(0, 1000))
    def test_support_equals_edges(self, n, rho, seed):
        g = gen_erdos_renyi(n, rho, RngStream(seed))
        y = RngStream(seed).generator(9).normal(size=n)
        S = assign_weights(g, y)
        assert isinstance(S, SimilarityMatrix)
        assert np.array_equal(S.entries > 0, g.adjacency() > 0)
        assert edge_density(S) == pytest.approx(g.m / (n * (n - 1) / 2))
