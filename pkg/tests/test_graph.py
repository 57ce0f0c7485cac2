from types import SimpleNamespace

import numpy as np
import pydot
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from colliderdag import (
    CausalDag,
    Edge,
    GroundTruth,
    break_cycles,
    export_dot,
    is_acyclic,
    learn,
    score_against_truth,
    to_dag,
)

from builders import collider_data


def _output(strn, pcnt=None, err=None, names=None):
    strn = np.asarray(strn, dtype=float)
    n = len(strn)
    return SimpleNamespace(
        strn=strn,
        pcnt=np.abs(strn) / (1 + np.abs(strn)) if pcnt is None else np.asarray(pcnt),
        err=np.zeros(n) if err is None else np.asarray(err),
        names=names or [f"x{i}" for i in range(n)],
    )


def _topo_ok(dag, order):
    pos = {v: i for i, v in enumerate(order)}
    return all(pos[e.source] < pos[e.target] for e in dag.edges)


def test_empty_graph():
    dag = to_dag(_output(np.zeros((4, 4))))
    assert dag.n == 4 and dag.edges == [] and dag.removed_edges == []


def test_collider_shape_order():
    s = np.zeros((3, 3))
    s[0, 2], s[1, 2] = 2.0, -0.5
    dag = to_dag(_output(s))
    check = is_acyclic(dag)
    assert check.acyclic and check.order in {(0, 1, 2), (1, 0, 2)}


def test_end_to_end_collider():
    dag = to_dag(learn(collider_data()))
    strengths = {(e.source, e.target): e.strength for e in dag.edges}
    assert set(strengths) == {(0, 2), (1, 2)}
    assert abs(strengths[0, 2] - 2.0) < 1e-6 and abs(strengths[1, 2] + 0.5) < 1e-6
    assert abs(dag.confounders[2] - 1.0) < 1e-6


def test_acyclic_unchanged():
    edges = [Edge(0, 1, 1.0, 0.5), Edge(1, 2, 1.0, 0.4)]
    out = break_cycles(CausalDag(["a", "b", "c"], edges, np.zeros(3)))
    assert out.edges == edges and out.removed_edges == []


def test_three_cycle_drops_weakest():
    edges = [Edge(0, 1, 1.0, 0.9), Edge(1, 2, 1.0, 0.8), Edge(2, 0, 1.0, 0.2)]
    out = break_cycles(CausalDag(["a", "b", "c"], edges, np.zeros(3)))
    assert [e for e, _ in out.removed_edges] == [Edge(2, 0, 1.0, 0.2)]
    assert is_acyclic(out).acyclic


def test_break_tie_uses_strength_then_index():
    edges = [Edge(0, 1, 3.0, 0.5), Edge(1, 2, 0.5, 0.5), Edge(2, 0, -2.0, 0.5)]
    out = break_cycles(CausalDag(["a", "b", "c"], edges, np.zeros(3)))
    assert out.removed_edges[0][0] == Edge(1, 2, 0.5, 0.5)
    edges = [Edge(0, 1, 1.0, 0.5), Edge(1, 2, 1.0, 0.5), Edge(2, 0, 1.0, 0.5)]
    out = break_cycles(CausalDag(["a", "b", "c"], edges, np.zeros(3)))
    assert out.removed_edges[0][0] == Edge(0, 1, 1.0, 0.5)


def test_single_edge_order():
    assert is_acyclic([("a", "b")]) == (True, ("a", "b"), None)


def test_two_cycle_witness():
    check = is_acyclic([("a", "b"), ("b", "a")])
    assert not check.acyclic and check.cycle == ("a", "b", "a")


def test_witness_is_a_real_cycle():
    edges = [(0, 1), (1, 2), (2, 3), (3, 1), (0, 4)]
    check = is_acyclic(edges)
    assert not check
    cyc = check.cycle
    assert cyc[0] == cyc[-1] == 1
    assert all(e in edges for e in zip(cyc[:-1], cyc[1:]))


@settings(max_examples=1000, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_tournaments_become_acyclic(seed):
    rng = np.random.default_rng(seed)
    n = 6
    edges = []
    for p in range(n):
        for q in range(p + 1, n):
            a, b = (p, q) if rng.random() < 0.5 else (q, p)
            edges.append(Edge(a, b, float(rng.normal()), float(rng.random())))
    before = CausalDag([str(i) for i in range(n)], edges, np.zeros(n))
    out = break_cycles(before)
    check = is_acyclic(out)
    assert check.acyclic and _topo_ok(out, check.order)
    assert bool(out.removed_edges) == (not is_acyclic(before).acyclic)
    assert len(out.edges) + len(out.removed_edges) == len(edges)


# --- scoring -------------------------------------------------------------------

def _truth():
    adj = np.zeros((5, 5))
    for (p, q), c in {(0, 2): 1.0, (1, 2): -2.0, (0, 3): 0.7, (2, 3): 2.5, (2, 4): -1.0, (3, 4): 0.6}.items():
        adj[p, q] = c
    return GroundTruth(adj, np.zeros(5), [], 2)


def test_perfect_recovery():
    truth = _truth()
    dag = to_dag(_output(truth.adjacency))
    s = score_against_truth(dag, truth)
    assert s["directed_precision"] == s["directed_recall"] == 1.0
    assert s["shd"] == 0 and s["coefficient_rmse_on_true_edges"] == 0.0


def test_empty_vs_truth():
    s = score_against_truth(to_dag(_output(np.zeros((5, 5)))), _truth())
    assert s["directed_recall"] == 0.0 and s["shd"] == 6


def test_one_reversed():
    truth = _truth()
    adj = truth.adjacency.copy()
    adj[3, 0], adj[0, 3] = adj[0, 3], 0.0
    s = score_against_truth(to_dag(_output(adj)), truth)
    assert s["shd"] == 1 and s["directed_recall"] == pytest.approx(5 / 6)


def test_extra_and_rmse():
    truth = _truth()
    adj = truth.adjacency.copy()
    adj[1, 4] = 1.0
    adj[0, 2] = 1.5
    s = score_against_truth(to_dag(_output(adj)), truth)
    assert s["shd"] == 1 and s["directed_precision"] == pytest.approx(6 / 7)
    assert s["coefficient_rmse_on_true_edges"] == pytest.approx(np.sqrt(0.25 / 6))


def test_score_dimension_mismatch():
    with pytest.raises(ValueError):
        score_against_truth(to_dag(_output(np.zeros((3, 3)))), _truth())


# --- DOT -----------------------------------------------------------------------

def test_dot_empty_two_nodes():
    text = export_dot(CausalDag(["a", "b"], [], np.zeros(2)))
    assert "digraph" in text and "a" in text and "b" in text and "->" not in text


def test_dot_edge_label():
    text = export_dot(CausalDag(["a", "b"], [Edge(0, 1, 2.0, 0.7)], np.zeros(2)))
    line = next(ln for ln in text.splitlines() if "->" in ln)
    assert "a -> b" in line and '"2.000"' in line


def test_dot_deterministic_and_parseable():
    dag = to_dag(learn(collider_data()))
    text = export_dot(dag)
    assert text == export_dot(dag)
    assert text.endswith("\n") and "\r" not in text
    (graph,) = pydot.graph_from_dot_data(text)
    assert {n.get_name() for n in graph.get_nodes()} >= {"x0", "x1", "x2"}
    assert len(graph.get_edges()) == 2
    assert graph.get_node("x2")[0].get("xlabel") == '"e=1.000"'
    # ERR is per node and survives the sweep: x0's own fit has intercept -0.5
    assert graph.get_node("x0")[0].get("xlabel") == '"e=-0.500"'


def test_dot_quotes_awkward_names():
    dag = CausalDag(['my var', 'q"x', "node"], [Edge(0, 1, -1.23456, 0.5), Edge(2, 1, 1, 0.4)],
                    np.array([0.0, 1e-7, 2.0]))
    text = export_dot(dag)
    (graph,) = pydot.graph_from_dot_data(text)
    assert len(graph.get_edges()) == 2
    assert '"-1.235"' in text
    assert "xlabel" not in text.splitlines()[2]  # |1e-7| is below the annotation threshold
