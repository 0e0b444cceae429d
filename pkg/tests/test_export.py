import numpy as np
import pytest

import naive
from tradenet.errors import ValidationError
from tradenet.export import export_graph, network_edges, read_network_csv
from tradenet.mst import kruskal_mst, mantegna_distance
from tradenet.network import WeightedNetwork
from tradenet.synthetic import synthetic_world

from conftest import make_network


def sample_network(seed=0, n=10):
    rng = np.random.default_rng(seed)
    w = naive.random_weighted_graph(rng, n, zero_fraction=0.4)
    return make_network(w)


class TestEdgeSelection:
    def test_full_fraction_keeps_all_positive_links(self):
        net = sample_network()
        edges = network_edges(net, top_fraction=1.0)
        iu = np.triu_indices(net.n, 1)
        assert len(edges) == int((net.weights[iu] > 0).sum())

    def test_ceiling_rule(self):
        # 100 positive links at 1% -> exactly 1 edge
        w = np.zeros((15, 15))
        iu = np.triu_indices(15, 1)
        order = np.lexsort((iu[1], iu[0]))
        picks = [(iu[0][k], iu[1][k]) for k in order[:100]]
        rng = np.random.default_rng(1)
        for a, b in picks:
            w[a, b] = w[b, a] = rng.uniform(0.1, 1.0)
        net = make_network(w)
        assert len(network_edges(net, top_fraction=0.01)) == 1
        assert len(network_edges(net, top_fraction=0.015)) == 2

    def test_strongest_first(self):
        net = sample_network(2)
        edges = network_edges(net)
        weights = [w for _, _, w in edges]
        assert weights == sorted(weights, reverse=True)

    def test_bad_fraction_rejected(self):
        net = sample_network(3)
        with pytest.raises(ValidationError):
            network_edges(net, top_fraction=0.0)


class TestRoundTrip:
    def test_csv_round_trip_identical_matrix(self, tmp_path):
        net = sample_network(4)
        path = tmp_path / "net.csv"
        export_graph(net, path, "csv")
        back = read_network_csv(path)
        np.testing.assert_array_equal(back.weights, net.weights)
        assert back.kind == net.kind
        assert back.normalizer == net.normalizer

    def test_csv_round_trip_residual_kind(self, tmp_path):
        rng = np.random.default_rng(5)
        w = naive.random_weighted_graph(rng, 8, zero_fraction=0.3)
        net = WeightedNetwork(w, kind="residual", normalizer=3.25)
        path = tmp_path / "res.csv"
        export_graph(net, path, "csv")
        back = read_network_csv(path)
        assert back.kind == "residual"
        assert back.normalizer == 3.25
        np.testing.assert_array_equal(back.weights, net.weights)


class TestFormats:
    def test_dot_contains_nodes_and_edges(self, tmp_path):
        world = synthetic_world(6, seed=6, zero_inflation=0.2)
        from tradenet.network import symmetrize

        net = symmetrize(world.flows)
        path = tmp_path / "g.dot"
        export_graph(net, path, "dot", countries=world.countries)
        text = path.read_text()
        assert text.startswith("graph original {")
        assert 'label="C000"' in text
        assert "--" in text
        assert "gdp=" in text

    def test_graphml_well_formed(self, tmp_path):
        import xml.etree.ElementTree as ET

        world = synthetic_world(6, seed=7, zero_inflation=0.2)
        from tradenet.network import symmetrize

        net = symmetrize(world.flows)
        path = tmp_path / "g.graphml"
        export_graph(net, path, "graphml", countries=world.countries)
        root = ET.parse(path).getroot()
        ns = "{http://graphml.graphdrawing.org/xmlns}"
        nodes = root.findall(f".//{ns}node")
        edges = root.findall(f".//{ns}edge")
        assert len(nodes) == 6
        assert len(edges) == len(network_edges(net))

    def test_tree_export_uses_report_weight(self, tmp_path):
        net = sample_network(8, n=7)
        tree = kruskal_mst(mantegna_distance(net))
        path = tmp_path / "t.csv"
        export_graph(tree, path, "csv")
        text = path.read_text()
        assert "report_weight[mst]" in text
        back_edges = [
            line.split(",") for line in text.splitlines()[2:]
        ]
        assert len(back_edges) == tree.n_edges

    def test_unsupported_format_rejected(self, tmp_path):
        net = sample_network(9)
        with pytest.raises(ValidationError):
            export_graph(net, tmp_path / "x.gexf", "gexf")

    def test_tree_rejects_top_fraction(self, tmp_path):
        net = sample_network(10, n=6)
        tree = kruskal_mst(mantegna_distance(net))
        with pytest.raises(ValidationError):
            export_graph(tree, tmp_path / "t.dot", "dot", top_fraction=0.5)
