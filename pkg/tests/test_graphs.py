import json

import pydot
import pytest

from horngraphs.chc import parse_system
from horngraphs.graphs import (
    SELF, GraphSizeError, LabelBundle, add_self_loops, build_cdhg, build_cg,
    build_pruned_rs_graph, catalog, emit_dot, emit_json, read_json,
)
from horngraphs.labels import count_rs_occurrences, label_arguments
from horngraphs.normalize import normalize


def counts(g):
    return {r: len(es) for r, es in g.edges.items()}


def test_cg_running_example_by_hand(running_example):
    g = build_cg(running_example)
    assert g.type_histogram() == {"rs": 1, "false": 1, "rsa": 3, "cla": 3, "ch": 3, "cb": 2,
                                  "ca": 12, "var": 11, "op": 11, "c": 4}
    assert counts(g) == {"RSA": 3, "RSI": 5, "AI": 12, "CH": 3, "CB": 2, "CA": 12,
                         "GUARD": 9, "DATA": 11, "A_st": 22}


def test_cg_edge_directions(running_example):
    g = build_cg(running_example)
    t = lambda i: g.nodes[i].type
    assert {(t(u), t(v)) for u, v in g.edges["RSI"]} == {("rs", "ch"), ("cb", "rs"),
                                                        ("false", "ch")}
    assert {(t(u), t(v)) for u, v in g.edges["CB"]} == {("cb", "cla")}
    assert {(t(u), t(v)) for u, v in g.edges["DATA"]} == {("var", "ca")}
    assert {t(v) for _, v in g.edges["GUARD"]} == {"cla"}
    assert {t(u) for u, _ in g.edges["GUARD"]} == {"op"}


def test_cdhg_running_example_by_hand(running_example):
    g = build_cdhg(normalize(running_example))
    assert g.type_histogram() == {"initial": 1, "false": 1, "rs": 2, "rsa": 6, "guard": 4,
                                  "op": 5, "c": 4}
    assert counts(g) == {"CFHE": 4, "DFHE": 9, "Guard": 3, "RSA": 6, "A_l": 5, "A_r": 5}
    names = lambda e: tuple(g.nodes[i].type if g.nodes[i].name is None else g.nodes[i].name
                            for i in e)
    assert {names(e)[:2] for e in g.edges["CFHE"]} == {("L", "initial"), ("L", "L'"),
                                                      ("L'", "L"), ("false", "L")}
    # the copy clause has no guards: its guard node exists with no Guard edge
    copy_guard = g.node_of("clause", 2)
    assert not any(v == copy_guard for _, v in g.edges["Guard"])


def test_cdhg_fans_out_body_literals():
    g = build_cdhg(normalize(parse_system("P(x) :- Q(a), R(b), x = a + b.")))
    es = g.edges["CFHE"]
    assert [(g.nodes[a].name, g.nodes[b].name) for a, b, _ in es] == [("P", "Q"), ("P", "R")]
    assert es[0][2] == es[1][2]


def test_unary_minus_single_child():
    s = parse_system("P(x) :- x = -y.")
    cg = build_cg(s)
    op = next(n.id for n in cg.nodes if n.type == "op" and n.name == "-")
    assert sum(1 for _, p in cg.edges["A_st"] if p == op) == 1
    cd = build_cdhg(normalize(s))
    op = next(n.id for n in cd.nodes if n.type == "op" and n.name == "-")
    assert sum(1 for p, _ in cd.edges["A_l"] if p == op) == 1
    assert not any(p == op for p, _ in cd.edges["A_r"])


def test_pruned_graph(running_example):
    g = build_pruned_rs_graph(running_example)
    assert [n.type for n in g.nodes] == ["rs", "false"]
    assert g.edges["TRANSITION"] == ((0, 0), (0, 1))


def test_node_cap(running_example):
    with pytest.raises(GraphSizeError):
        build_cg(running_example, node_cap=10)
    assert build_cg(running_example, node_cap=51).num_nodes == 51


def test_self_loops_and_catalog(running_example):
    g = add_self_loops(build_cdhg(normalize(running_example)))
    assert g.edges[SELF] == tuple((i,) for i in range(g.num_nodes))
    cat = catalog("CDHG")
    assert cat.relations == {"CFHE": 3, "DFHE": 3, "Guard": 2, "RSA": 2, "A_l": 2, "A_r": 2,
                             SELF: 1}
    assert {n.type for n in g.nodes} <= set(cat.node_types)
    assert len(catalog("CG").relations) == 10


def test_construction_is_deterministic(corpus):
    for s, _ in corpus[:20]:
        assert build_cg(s) == build_cg(s)
        assert build_cdhg(normalize(s)) == build_cdhg(normalize(s))


def test_json_roundtrip_with_labels(running_example):
    g = build_cdhg(normalize(running_example))
    bundles = [label_arguments(g), count_rs_occurrences(normalize(running_example))]
    text = emit_json(g, bundles)
    doc = json.loads(text)
    assert list(doc) == ["kind", "nodes", "relations", "edges", "labels", "anchors"]
    assert doc["labels"]["T2"] == {str(g.node_of("rs", "L")): 4, str(g.node_of("rs", "L'")): 2}
    g2, b2 = read_json(text)
    assert g2 == g and g2.anchors == g.anchors
    assert b2[1].values == bundles[1].on_graph(g).values
    assert emit_json(g2, b2) == text


def test_json_rejects_dangling_labels(running_example):
    g = build_cg(running_example)
    with pytest.raises(ValueError):
        emit_json(g, [LabelBundle("T1", {999: 1})])


def test_dot_parses(running_example):
    for g in (build_cg(running_example), build_cdhg(normalize(running_example))):
        text = emit_dot(g)
        parsed = pydot.graph_from_dot_data(text)
        assert len(parsed) == 1
        names = {n.get_name() for n in parsed[0].get_nodes()}
        assert {f"n{i}" for i in range(g.num_nodes)} <= names


def test_dot_grammar_check(running_example):
    from dot_grammar import check_dot
    for g in (build_cg(running_example), build_cdhg(normalize(running_example)),
              build_pruned_rs_graph(running_example)):
        assert check_dot(emit_dot(g))
    assert check_dot('strict graph { a -- b; subgraph s { c } node [shape=box] }')
    for bad in ('digraph { a -- b }', 'graph { a -> b }', 'digraph { a -> }',
                'digraph { a [label="x] }', 'digraph { }}'):
        assert not check_dot(bad), bad
