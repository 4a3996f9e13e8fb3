"""Energy-aware architecture search over NAS-Bench-101-style cells.

Cells are given as ``(adjacency, ops)`` with ``adjacency`` an upper-triangular
0/1 matrix and ``ops`` operation names (``input``, ``conv1x1``, ``conv3x3``,
``maxpool3x3``, ``output``). Structured results come back
as plain dicts and lists.
"""

import json as _json

from . import _greennas as _core
from ._greennas import (  # noqa: F401
    GreennasError,
    __version__,
    canonical_key,
    contributions,
    count_parameters,
    featurize,
    hypervolume_2d,
    knee_point,
    linear_rank_probs,
    ndom,
    opswap_analysis,
    predict_energy,
    rank_correlation,
    synth_table,
    table_size,
    train_surrogate,
    validate,
)


def canonical_form(adjacency, ops):
    """Pruned, minimally encoded representative as a dict."""
    return _json.loads(_core.canonical_form(adjacency, ops))


def enumerate_space(max_vertices, max_edges=9, allow_long_run=False):
    """One dict per unique cell, sorted by encoding."""
    return [_json.loads(s) for s in _core.enumerate_space(max_vertices, max_edges, allow_long_run)]


def search(table_path, algo="semoa", seed=0, iterations=100, population=10, trials=10,
           budgets=(4, 12, 36, 108), queries=1000, surrogate_path=""):
    """Run ``trials`` seeded searches and return the aggregate report."""
    text = _core.search(str(table_path), algo, seed, iterations, population, trials, list(budgets), queries,
                        str(surrogate_path))
    return _json.loads(text)


__all__ = [
    "GreennasError",
    "canonical_form",
    "canonical_key",
    "contributions",
    "count_parameters",
    "enumerate_space",
    "featurize",
    "hypervolume_2d",
    "knee_point",
    "linear_rank_probs",
    "ndom",
    "opswap_analysis",
    "predict_energy",
    "rank_correlation",
    "search",
    "synth_table",
    "table_size",
    "train_surrogate",
    "validate",
]
