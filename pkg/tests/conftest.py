from typing import Callable, Iterator, List

import networkx as nx
import pytest

from sinkopt.network import Graph, parse_edge_list


def from_networkx(h: nx.Graph) -> Graph:
    """Relabel a networkx graph to 1..N and convert it."""
    mapping = {node: i + 1 for i, node in enumerate(sorted(h.nodes))}
    return Graph.from_edges((mapping[u], mapping[v]) for u, v in h.edges())


def atlas_graphs(max_nodes: int) -> Iterator[Graph]:
    """Yield every connected graph with 2..max_nodes nodes, up to isomorphism."""
    for h in nx.graph_atlas_g():
        if 2 <= h.number_of_nodes() <= max_nodes and nx.is_connected(h):
            yield from_networkx(h)


@pytest.fixture
def p3() -> Graph:
    return parse_edge_list("1 2\n2 3\n")


@pytest.fixture
def c4() -> Graph:
    return parse_edge_list("1 2\n2 3\n3 4\n4 1\n")


@pytest.fixture
def k4() -> Graph:
    return parse_edge_list("1 2\n1 3\n1 4\n2 3\n2 4\n3 4\n")


@pytest.fixture
def star3() -> Graph:
    return parse_edge_list("0 1\n0 2\n0 3\n")


@pytest.fixture
def lollipop() -> Graph:
    """A 4-clique with a 4-node tail, 8 nodes."""
    return from_networkx(nx.lollipop_graph(4, 4))


@pytest.fixture
def fixture_graphs() -> List[Graph]:
    """Small connected graphs of 5 to 10 nodes used by the guarantee suites."""
    shapes = [
        nx.path_graph(6),
        nx.cycle_graph(7),
        nx.star_graph(5),
        nx.petersen_graph(),
        nx.lollipop_graph(4, 3),
        nx.barbell_graph(3, 1),
        nx.wheel_graph(6),
        nx.balanced_tree(2, 2),
        nx.connected_watts_strogatz_graph(9, 4, 0.3, seed=4),
        nx.gnp_random_graph(8, 0.45, seed=11),
    ]
    return [from_networkx(h) for h in shapes if nx.is_connected(h)]


@pytest.fixture
def write_graph(tmp_path) -> Callable[[str], str]:
    def write(text: str) -> str:
        path = tmp_path / "graph.edges"
        path.write_text(text, encoding="utf-8")
        return str(path)

    return write


@pytest.fixture
def atlas() -> Callable[[int], List[Graph]]:
    return lambda max_nodes: list(atlas_graphs(max_nodes))


@pytest.fixture
def random_connected() -> Callable[[int, int], List[Graph]]:
    """Seeded G(n, p) draws with 4..max_nodes nodes, keeping the connected ones."""

    def draw(count: int, max_nodes: int) -> List[Graph]:
        graphs: List[Graph] = []
        seed = 0
        while len(graphs) < count:
            n = 4 + seed % (max_nodes - 3)
            h = nx.gnp_random_graph(n, 0.4, seed=seed)
            seed += 1
            if nx.is_connected(h):
                graphs.append(from_networkx(h))
        return graphs

    return draw
