import os
import sys

import networkx as nx
import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from src.core.metric import GraphMetric  # noqa: E402
from src.core.model import make_instance  # noqa: E402
from src.instances.generators import gen_unit_path  # noqa: E402
from src.processors.arborescence import Arborescence, NodeKind  # noqa: E402
from src.utils.log_helper import set_default_helper  # noqa: E402

settings.register_profile("default", max_examples=100, deadline=None)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(autouse=True)
def reset_default_helper():
    yield
    set_default_helper(None)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def unit_path():
    return gen_unit_path()


@pytest.fixture
def small_graph_instance():
    """
    r - a - b の経路と、a から分岐する c、迂回辺 r - c

        r --1-- a --1-- b
        |       |
        3       1
        |       |
        +------ c
    """
    graph = nx.Graph()
    graph.add_edge("r", "a", weight=1.0)
    graph.add_edge("a", "b", weight=1.0)
    graph.add_edge("a", "c", weight=1.0)
    graph.add_edge("r", "c", weight=3.0)
    return make_instance(GraphMetric(graph), "r", [("b", 1.0), ("c", 0.5)], name="small")


def build_random_arborescence(rng, n, zero_weight_share=0.3):
    """
    ランダムな r-有向木（二分とは限らない）

    葉は端子、内部ノードは半分程度を端子にします。c(r, v) は木上の路長です。
    """
    parents = [-1] + [int(rng.integers(0, i)) for i in range(1, n)]
    has_child = set(parents[1:])
    arb = Arborescence()
    arb.add_node("r", NodeKind.ROOT)
    for i in range(1, n):
        p = parents[i]
        cost = float(rng.uniform(0.1, 2.0))
        terminal = i not in has_child or rng.random() < 0.5
        weight = 0.0
        if terminal and rng.random() >= zero_weight_share:
            weight = float(rng.uniform(0.0, 3.0))
        kind = NodeKind.TERMINAL if terminal else NodeKind.STEINER
        arb.add_node(f"v{i}", kind, p, cost, weight, arb.root_distance[p] + cost)
    return arb


@pytest.fixture
def random_arborescence():
    return build_random_arborescence
