from .exact import (Posterior, UnreachableInfostateError, ValueTable,
                    aqre_gap, best_response, exploitability, expected_return,
                    history_values, infostate_q, minimaxent_gap, posterior)
from .tree import TreeIndex, build_tree
from .twincheck import kernels_equal

__all__ = [
    "Posterior", "TreeIndex", "UnreachableInfostateError", "ValueTable",
    "aqre_gap", "best_response", "build_tree", "exploitability",
    "expected_return", "history_values", "infostate_q", "kernels_equal",
    "minimaxent_gap", "posterior",
]
