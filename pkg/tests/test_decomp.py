import random
from pathlib import Path

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tdrel.decomp import (
    TreeDecomposition,
    decompose,
    is_nice,
    limit_children,
    make_nice,
    node_type,
    normalize_root,
    read_td,
    renumber,
    validate,
    write_td,
)
from tdrel.generators import planted_clique, random_graph, random_tree
from tdrel.instance import Graph, ParseError

DATA = Path(__file__).parent / "data"
A, B, C, D = 1, 2, 3, 4
PRIMAL4 = Graph.from_edges(4, [(A, B), (A, C), (B, C), (A, D)])
PRIMAL4_TD = TreeDecomposition({1: {A, B, C}, 2: {A, D}}, {1: (2,)}, 1, 4)


def td_of(bags, edges, root):
    kids = {n: [] for n in bags}
    for p, c in edges:
        kids[p].append(c)
    return TreeDecomposition(bags, {k: tuple(v) for k, v in kids.items()}, root, max([0, *set().union(*bags.values())]))


def test_small_decomposition_has_width_two():
    td = decompose(PRIMAL4, seed=0)
    assert validate(td, PRIMAL4) is None
    assert td.width == 2
    assert {frozenset({A, B, C}), frozenset({A, D})} <= set(td.bags.values())


def test_small_reference_td_validates():
    assert validate(PRIMAL4_TD, PRIMAL4) is None
    assert PRIMAL4_TD.width == 2


def test_missing_edge_is_reported():
    g = Graph.from_edges(4, set(PRIMAL4.edges) | {(B, D)})
    bad = validate(PRIMAL4_TD, g)
    assert bad.kind == "edge-coverage" and bad.witness == (B, D)


def test_other_violations():
    g = Graph.from_edges(3, [(1, 2)])
    assert validate(TreeDecomposition({1: {1, 2}}, {}, 1, 3), g).kind == "vertex-coverage"
    split = td_of({1: {1, 3}, 2: {2}, 3: {1, 2}}, [(1, 2), (2, 3)], 1)
    assert validate(split, g).kind == "connectedness"
    stray = TreeDecomposition({1: {1, 2, 3}, 2: {1}}, {1: ()}, 1, 3)
    assert validate(stray, g).kind == "tree"
    assert validate(TreeDecomposition({1: {1, 2, 3, 7}}, {}, 1, 3), g).kind == "range"


def test_single_bag_is_valid():
    g = random_graph(random.Random(3), 7, 0.5)
    td = TreeDecomposition({1: set(g.vertices)}, {}, 1, 7)
    assert validate(td, g) is None and td.width == 6


def test_edgeless_and_empty_graphs():
    td = decompose(Graph(5, frozenset()), seed=1)
    assert validate(td, Graph(5, frozenset())) is None and td.width == 0
    empty = decompose(Graph(0, frozenset()))
    assert empty.width == -1 and list(empty.bags.values()) == [frozenset()]
    assert normalize_root(empty) == empty


def test_path_has_width_one():
    g = Graph.from_edges(4, [(1, 2), (2, 3), (3, 4)])
    for seed in range(5):
        td = decompose(g, seed)
        assert validate(td, g) is None and td.width == 1


def test_decompose_is_reproducible():
    g = random_graph(random.Random(11), 40, 0.15)
    assert decompose(g, 7) == decompose(g, 7)
    assert write_td(decompose(g, 7)) == write_td(decompose(g, 7))


def test_decompose_numbers_in_postorder():
    td = decompose(random_graph(random.Random(2), 25, 0.2), 0)
    assert td.postorder() == list(range(1, len(td.bags) + 1))


graphs = st.tuples(st.integers(0, 50), st.floats(0, 1), st.integers(0, 2**31)).map(
    lambda t: random_graph(random.Random(t[2]), t[0], t[1])
)


@settings(max_examples=60, deadline=None)
@given(graphs, st.integers(0, 100))
def test_decompose_always_valid(g, seed):
    td = decompose(g, seed)
    assert validate(td, g) is None
    # treewidth is at least the degeneracy of the graph
    if g.edges:
        assert td.width >= max(nx.core_number(nx.Graph(list(g.edges))).values())


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 60), st.integers(0, 2**31))
def test_trees_get_width_one(n, seed):
    g = random_tree(random.Random(seed), n)
    td = decompose(g, seed)
    assert validate(td, g) is None
    assert td.width == (1 if n > 1 else 0)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**31))
def test_planted_clique_lower_bound(k, seed):
    rng = random.Random(seed)
    g, _ = planted_clique(rng, rng.randint(k, 30), k, rng.random() * 0.3)
    assert decompose(g, seed).width >= k - 1


def star(n_children):
    bags = {0: {1}} | {i: {1, i + 1} for i in range(1, n_children + 1)}
    return td_of(bags, [(0, i) for i in range(1, n_children + 1)], 0)


def test_limit_children_on_star():
    td = star(7)
    out = limit_children(td, 5)
    g = Graph.from_edges(8, [(1, i) for i in range(2, 9)])
    assert validate(out, g) is None
    assert max(len(c) for c in out.children.values()) <= 5
    assert len(out.bags) == len(td.bags) + 1
    assert out.width == td.width


def test_limit_children_noop_and_binary():
    td = star(4)
    assert limit_children(td, 5) is td
    g = Graph.from_edges(13, [(1, i) for i in range(2, 14)])
    binary = limit_children(star(12), 2)
    assert validate(binary, g) is None
    assert max(len(c) for c in binary.children.values()) == 2
    assert binary.width == 1
    with pytest.raises(ValueError):
        limit_children(td, 1)


@settings(max_examples=40, deadline=None)
@given(graphs, st.integers(2, 6))
def test_transforms_preserve_validity(g, k):
    td = decompose(g, 0)
    for out in (limit_children(td, k), normalize_root(td), make_nice(td)):
        assert validate(out, g) is None
        assert out.width == td.width
    assert is_nice(make_nice(td))
    assert not normalize_root(td).bags[normalize_root(td).root]


def test_normalize_root():
    given = read_td((DATA / "four_vars.td").read_text())
    assert normalize_root(given) == given
    new = normalize_root(PRIMAL4_TD)
    assert new.bags[new.root] == frozenset() and new.children[new.root] == (PRIMAL4_TD.root,)


def test_given_nice_decomposition():
    given = read_td((DATA / "four_vars.td").read_bytes())
    assert given.root == 12 and len(given.bags) == 12
    assert validate(given, PRIMAL4) is None
    assert is_nice(given)
    assert [node_type(given, n) for n in given.nodes] == [
        "leaf", "intr", "intr", "intr", "rem", "rem", "leaf", "intr", "intr", "rem", "join", "rem",
    ]
    assert given.delta(4).introduced == {B}
    assert given.delta(5).removed == (frozenset({C}),)


def test_minimal_td_text():
    td = TreeDecomposition({1: frozenset()}, {}, 1, 0)
    assert write_td(td) == "s td 1 0 0\nb 1\n"
    assert read_td("s td 1 0 0\nb 1\n") == td


@settings(max_examples=40, deadline=None)
@given(graphs, st.integers(0, 9))
def test_pace_round_trip(g, seed):
    td = limit_children(normalize_root(decompose(g, seed)), 3)
    text = write_td(td)
    back = read_td(text)
    assert back == renumber(td)
    assert write_td(back) == text


def test_read_td_root_choice():
    text = "s td 2 2 2\nb 1 1 2\nb 2 1\n1 2\n"
    assert read_td(text).root == 2
    assert read_td(text, root=1).root == 1
    assert read_td("c root 1\n" + text).root == 1


@pytest.mark.parametrize(
    "text",
    [
        "s td 3 1 2\nb 1 1\nb 2 2\nb 3\n1 2\n",  # too few edges
        "s td 4 1 2\nb 1 1\nb 2 2\nb 3\nb 4\n1 2\n1 3\n2 3\n",  # cycle leaves node 4 out
        "s td 1 1 2\nb 2 1\n",
        "s td 1 1 2\nb 1 3\n",
        "b 1 1\n",
        "s td 2 1 2\nb 1 1\nb 2 2\n1 5\n",
    ],
)
def test_read_td_rejects(text):
    with pytest.raises(ParseError):
        read_td(text)


def test_read_td_warns_on_width_field(caplog):
    read_td("s td 1 5 2\nb 1 1 2\n")
    assert "declared max bag size 5" in caplog.text
