import numpy as np
import pytest

from nudgeopt import (Network, load_network, save_network, path_network,
                      top_out_degree, sample_induced_subgraph)


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


class TestLoadNetwork:
    def test_two_node_follow(self, tmp_path):
        edges = write(tmp_path / "e.csv", "1,0,10\n")
        opinions = write(tmp_path / "o.csv", "0,0.0\n1,1.0\n")
        net = load_network(edges, opinions)
        assert net.n == 2
        assert net.labels == ("0", "1")
        # node 0 follows node 1: content flows 1 -> 0
        assert net.src.tolist() == [1] and net.dst.tolist() == [0]
        assert net.rate.tolist() == [10.0]
        assert net.initial_opinions.tolist() == [0.0, 1.0]

    def test_header_rows_accepted(self, tmp_path):
        edges = write(tmp_path / "e.csv", "source,target,rate\na,b,2.5\n")
        opinions = write(tmp_path / "o.csv", "node,opinion\na,0.1\nb,0.9\n")
        net = load_network(edges, opinions)
        assert net.n == 2 and net.labels == ("a", "b")
        assert net.rate.tolist() == [2.5]

    def test_isolated_node(self, tmp_path):
        edges = write(tmp_path / "e.csv", "")
        opinions = write(tmp_path / "o.csv", "0,0.5\n")
        net = load_network(edges, opinions)
        assert net.n == 1 and net.num_edges == 0
        assert net.initial_opinions.tolist() == [0.5]

    def test_self_loop_rejected(self, tmp_path):
        edges = write(tmp_path / "e.csv", "0,0,1\n")
        opinions = write(tmp_path / "o.csv", "0,0.5\n")
        with pytest.raises(ValueError, match="self-loop"):
            load_network(edges, opinions)

    def test_duplicate_edge_named(self, tmp_path):
        edges = write(tmp_path / "e.csv", "0,1,1\n0,1,2\n")
        opinions = write(tmp_path / "o.csv", "0,0.5\n1,0.5\n")
        with pytest.raises(ValueError, match=r"duplicate edge \(0, 1\)"):
            load_network(edges, opinions)

    def test_opinion_out_of_range(self, tmp_path):
        edges = write(tmp_path / "e.csv", "0,1,1\n")
        opinions = write(tmp_path / "o.csv", "0,0.5\n1,1.5\n")
        with pytest.raises(ValueError, match="outside"):
            load_network(edges, opinions)

    def test_missing_opinion_warns_and_defaults(self, tmp_path, caplog):
        edges = write(tmp_path / "e.csv", "0,1,1\n")
        opinions = write(tmp_path / "o.csv", "0,0.2\n")
        with caplog.at_level("WARNING"):
            net = load_network(edges, opinions)
        assert "no opinion entry" in caplog.text
        assert net.initial_opinions.tolist() == [0.2, 0.5]

    def test_unreadable_file(self, tmp_path):
        with pytest.raises(OSError):
            load_network(tmp_path / "missing.csv", tmp_path / "also_missing.csv")

    def test_numeric_ids_sort_numerically(self, tmp_path):
        edges = write(tmp_path / "e.csv", "10,2,1\n")
        opinions = write(tmp_path / "o.csv", "2,0.1\n10,0.9\n")
        net = load_network(edges, opinions)
        assert net.labels == ("2", "10")

    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(7)
        n = 12
        edges = [(i, j, float(rng.uniform(0, 100)))
                 for i in range(n) for j in range(n)
                 if i != j and rng.random() < 0.3]
        net = Network.from_edges(n, edges, rng.uniform(0, 1, n))
        save_network(net, tmp_path / "e.csv", tmp_path / "o.csv")
        back = load_network(tmp_path / "e.csv", tmp_path / "o.csv")
        assert back.n == net.n
        assert np.array_equal(back.initial_opinions, net.initial_opinions)
        orig = {(s, d): r for s, d, r in zip(net.src, net.dst, net.rate)}
        loaded = {(s, d): r for s, d, r in zip(back.src, back.dst, back.rate)}
        assert orig == loaded


class TestPathNetwork:
    def test_ten_node(self):
        net = path_network(10, 1.0)
        assert net.num_edges == 18
        assert np.allclose(net.initial_opinions, np.arange(10) / 9)
        assert net.initial_opinions[0] == 0.0 and net.initial_opinions[-1] == 1.0

    def test_two_node(self):
        net = path_network(2, 1.0)
        assert net.initial_opinions.tolist() == [0.0, 1.0]
        assert sorted(zip(net.src.tolist(), net.dst.tolist())) == [(0, 1), (1, 0)]

    def test_single_node(self):
        net = path_network(1, 1.0)
        assert net.n == 1 and net.num_edges == 0
        assert net.initial_opinions.tolist() == [0.5]

    def test_zero_rejected(self):
        with pytest.raises(ValueError):
            path_network(0, 1.0)


class TestTopOutDegree:
    def test_star_center(self):
        edges = [(0, j, 1.0) for j in range(1, 6)]
        net = Network.from_edges(6, edges, np.full(6, 0.5))
        assert top_out_degree(net, 1) == [0]

    def test_path_tie_break(self):
        net = path_network(10, 1.0)
        assert top_out_degree(net, 3) == [1, 2, 3]

    def test_clamps_to_all(self):
        net = path_network(10, 1.0)
        assert len(top_out_degree(net, 100)) == 10

    def test_matches_full_sort_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            n = int(rng.integers(3, 15))
            edges = [(i, j, 1.0) for i in range(n) for j in range(n)
                     if i != j and rng.random() < 0.4]
            net = Network.from_edges(n, edges, np.full(n, 0.5))
            deg = net.out_degree()
            oracle = sorted(range(n), key=lambda i: (-deg[i], i))
            k = int(rng.integers(1, n + 1))
            assert top_out_degree(net, k) == oracle[:k]

    def test_k_zero_rejected(self):
        with pytest.raises(ValueError):
            top_out_degree(path_network(3, 1.0), 0)


class TestSampleInducedSubgraph:
    def triangle(self):
        edges = [(0, 1, 1.0), (1, 2, 2.0), (2, 0, 3.0)]
        return Network.from_edges(3, edges, [0.1, 0.5, 0.9])

    def test_identity_sample(self):
        net = self.triangle()
        sub = sample_induced_subgraph(net, 3, seed=0)
        assert sub.n == 3
        assert np.array_equal(sub.initial_opinions, net.initial_opinions)
        assert sorted(zip(sub.src, sub.dst, sub.rate)) == \
            sorted(zip(net.src, net.dst, net.rate))

    def test_deterministic_under_seed(self):
        net = self.triangle()
        a = sample_induced_subgraph(net, 2, seed=42)
        b = sample_induced_subgraph(net, 2, seed=42)
        assert a.labels == b.labels
        assert np.array_equal(a.initial_opinions, b.initial_opinions)

    def test_pair_matches_hand_enumeration(self):
        # brute force: the only possible 2-subsets of a triangle
        net = self.triangle()
        all_pairs = {(0, 1), (0, 2), (1, 2)}
        sub = sample_induced_subgraph(net, 2, seed=5)
        kept = tuple(sorted(int(l) for l in sub.labels))
        assert kept in all_pairs
        edge_lookup = {(s, d): r for s, d, r in
                       zip(net.src.tolist(), net.dst.tolist(), net.rate.tolist())}
        expect = {(i, j): r for (i, j), r in edge_lookup.items()
                  if i in kept and j in kept}
        got = {(kept[s], kept[d]): r for s, d, r in
               zip(sub.src.tolist(), sub.dst.tolist(), sub.rate.tolist())}
        assert got == expect
        assert np.array_equal(sub.initial_opinions, net.initial_opinions[list(kept)])

    def test_bad_k_rejected(self):
        with pytest.raises(ValueError):
            sample_induced_subgraph(self.triangle(), 4, seed=0)
        with pytest.raises(ValueError):
            sample_induced_subgraph(self.triangle(), 0, seed=0)


class TestNetworkValidation:
    def test_immutable_arrays(self):
        net = path_network(3, 1.0)
        with pytest.raises(ValueError):
            net.rate[0] = 5.0

    def test_edge_out_of_range(self):
        with pytest.raises(ValueError, match="outside"):
            Network.from_edges(2, [(0, 5, 1.0)], [0.5, 0.5])

    def test_negative_rate(self):
        with pytest.raises(ValueError, match="nonnegative"):
            Network.from_edges(2, [(0, 1, -1.0)], [0.5, 0.5])
