"""Python bindings for the deepgraph core.

Graphs are plain dicts with the same fields as the JSON-lines files the CLI reads:
``num_nodes``, ``edges`` and optionally ``node_feat``, ``edge_feat`` and ``target``
(a number for graph regression, a list of per-node labels for node classification).
"""

import json

from . import _core
from ._core import (
    DataError,
    NumericError,
    attention_capacity,
    canonical_form,
    pattern_basis,
    spectral_norm,
    token_capacity,
)

__all__ = [
    "DataError",
    "NumericError",
    "attention_capacity",
    "canonical_form",
    "count_induced_cycles",
    "distances",
    "extract",
    "forward",
    "gen_communities",
    "gen_cycles",
    "pattern_basis",
    "sample",
    "spectral_norm",
    "token_capacity",
    "train_cycles",
    "verify_bounds",
]


def _text(graph):
    return json.dumps(graph)


def _lines(graphs):
    return "".join(json.dumps(g) + "\n" for g in graphs)


def _parse_lines(text):
    return [json.loads(line) for line in text.splitlines() if line.strip()]


def distances(graph):
    return _core.distances(_text(graph))


def extract(graph, kinds=(), seed=0):
    """Substructures as a list of {"kind", "nodes", "center"?} dicts."""
    return json.loads(_core.extract(_text(graph), list(kinds), seed))["items"]


def sample(graph, kinds=(), thre=1, seed=0):
    return _core.sample(_text(graph), list(kinds), thre, seed)


def count_induced_cycles(graph):
    return _core.count_induced_cycles(_text(graph))


def gen_cycles(n, nodes_min=10, nodes_max=16, edge_prob=0.3, seed=0):
    return _parse_lines(_core.gen_cycles(n, nodes_min, nodes_max, edge_prob, seed))


def gen_communities(n, nodes_per_block=10, p_in=0.3, p_out=0.05, reveal=0.1, seed=0):
    return _parse_lines(_core.gen_communities(n, nodes_per_block, p_in, p_out, reveal, seed))


def verify_bounds(theorem, trials=100, seed=0, n=8):
    return json.loads(_core.verify_bounds(theorem, trials, seed, n))


def forward(graph, substructures=(), layers=2, heads=2, d_model=16, d_head=8, d_ffn=32, deepnorm=True, seed=0):
    return _core.forward(_text(graph), [list(s) for s in substructures], layers, heads, d_model, d_head, d_ffn,
                         deepnorm, seed)


def train_cycles(graphs, layers=2, epochs=5, lr=1e-3, seed=0):
    return _core.train_cycles(_lines(graphs), layers, epochs, lr, seed)
