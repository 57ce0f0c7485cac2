"""Assemble, certify and export the learned causal DAG."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from graphlib import CycleError, TopologicalSorter
from typing import NamedTuple, Sequence

import numpy as np

CONFOUNDER_ATOL = 1e-6


class Edge(NamedTuple):
    source: int
    target: int
    strength: float
    pcnt: float


class AcyclicityCheck(NamedTuple):
    acyclic: bool
    order: tuple | None = None
    cycle: tuple | None = None

    def __bool__(self):
        return self.acyclic


@dataclass(eq=False)
class CausalDag:
    nodes: list[str]
    edges: list[Edge]
    confounders: np.ndarray
    removed_edges: list[tuple[Edge, str]] = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.nodes)

    def edge_set(self) -> set[tuple[int, int]]:
        return {(e.source, e.target) for e in self.edges}

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        for e in self.edges:
            a[e.source, e.target] = e.strength
        return a


def is_acyclic(dag, nodes: Sequence | None = None) -> AcyclicityCheck:
    """Topologically sort a CausalDag or a raw ``(source, target)`` edge list.

    Returns the order when acyclic, else a witness cycle that starts and
    ends at its smallest node, e.g. ``('a', 'b', 'a')``.
    """
    if isinstance(dag, CausalDag):
        nodes = range(dag.n)
        pairs = [(e.source, e.target) for e in dag.edges]
    else:
        pairs = [(e[0], e[1]) for e in dag]
    ts = TopologicalSorter()
    for v in nodes or ():
        ts.add(v)
    for a, b in pairs:
        ts.add(b, a)
    try:
        order = tuple(ts.static_order())
    except CycleError as exc:
        cyc = list(exc.args[1])[:-1]
        start = cyc.index(min(cyc))
        cyc = cyc[start:] + cyc[:start]
        return AcyclicityCheck(False, cycle=tuple(cyc + [cyc[0]]))
    return AcyclicityCheck(True, order=order)


def _victim_key(e: Edge):
    return (e.pcnt, abs(e.strength), e.source, e.target)


def break_cycles(dag: CausalDag) -> CausalDag:
    """Delete edges until acyclic, each time dropping the weakest edge of a
    witness cycle (lowest pcnt, then smallest ``|strength|``, then index)."""
    edges = list(dag.edges)
    removed = list(dag.removed_edges)
    while True:
        check = is_acyclic([(e.source, e.target) for e in edges], range(dag.n))
        if check.acyclic:
            break
        cyc = check.cycle
        on_cycle = set(zip(cyc[:-1], cyc[1:]))
        victim = min((e for e in edges if (e.source, e.target) in on_cycle), key=_victim_key)
        edges.remove(victim)
        path = " -> ".join(dag.nodes[v] for v in cyc)
        removed.append((victim, f"weakest edge of cycle {path}"))
    return CausalDag(list(dag.nodes), edges, dag.confounders.copy(), removed)


def to_dag(output, names: Sequence[str] | None = None) -> CausalDag:
    """One edge per nonzero strength entry; confounders from ERR."""
    names = list(names if names is not None else output.names)
    strn = np.asarray(output.strn)
    pcnt = np.asarray(output.pcnt)
    edges = [
        Edge(int(p), int(q), float(strn[p, q]), float(pcnt[p, q]))
        for p, q in np.argwhere(strn != 0.0)
        if p != q
    ]
    dag = CausalDag(names, edges, np.array(output.err, dtype=np.float64))
    return break_cycles(dag)


def score_against_truth(dag: CausalDag, truth) -> dict:
    """Directed precision/recall, SHD and coefficient RMSE on shared edges.

    SHD counts missing, extra and reversed edges, a reversal counting once.
    Precision is 0 for an empty graph; RMSE is NaN when no edge is shared.
    """
    adj = np.asarray(truth.adjacency)
    if adj.shape != (dag.n, dag.n):
        raise ValueError(f"graph has {dag.n} nodes but truth is {adj.shape}")
    true_edges = {(int(p), int(q)) for p, q in np.argwhere(adj != 0.0)}
    learned = dag.edge_set()
    tp = learned & true_edges
    reversed_ = {(p, q) for p, q in learned - true_edges if (q, p) in true_edges}
    extra = {(p, q) for p, q in learned - true_edges if (q, p) not in true_edges}
    missing = {(p, q) for p, q in true_edges - learned if (q, p) not in learned}
    strengths = {(e.source, e.target): e.strength for e in dag.edges}
    sq = [(strengths[e] - adj[e]) ** 2 for e in sorted(tp)]
    return {
        "directed_precision": len(tp) / len(learned) if learned else 0.0,
        "directed_recall": len(tp) / len(true_edges) if true_edges else 1.0,
        "shd": len(missing) + len(extra) + len(reversed_),
        "coefficient_rmse_on_true_edges": math.sqrt(sum(sq) / len(sq)) if sq else math.nan,
        "n_true_edges": len(true_edges),
        "n_learned_edges": len(learned),
    }


_DOT_ID = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_DOT_KEYWORDS = {"node", "edge", "graph", "digraph", "subgraph", "strict"}


def _quote(s: str) -> str:
    return '"' + str(s).replace("\\", "\\\\").replace('"', '\\"') + '"'


def _dot_id(s: str) -> str:
    s = str(s)
    if _DOT_ID.match(s) and s.lower() not in _DOT_KEYWORDS:
        return s
    return _quote(s)


def export_dot(dag: CausalDag, name: str = "causal") -> str:
    """Render as a DOT digraph.

    Edges are labelled with strength to three decimals; nodes with a
    non-negligible confounder get an ``xlabel`` showing it.
    """
    lines = [f"digraph {_quote(name)} {{"]
    for v, label in enumerate(dag.nodes):
        conf = float(dag.confounders[v]) if len(dag.confounders) else 0.0
        if abs(conf) > CONFOUNDER_ATOL:
            lines.append(f"  {_dot_id(label)} [xlabel={_quote(f'e={conf:.3f}')}];")
        else:
            lines.append(f"  {_dot_id(label)};")
    for e in sorted(dag.edges, key=lambda e: (e.source, e.target)):
        lines.append(
            f"  {_dot_id(dag.nodes[e.source])} -> {_dot_id(dag.nodes[e.target])} "
            f"[label={_quote(f'{e.strength:.3f}')}];"
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
