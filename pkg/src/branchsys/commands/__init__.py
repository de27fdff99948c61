"""Command dispatchers behind the ``branchsys`` console script."""

from .perron import cmd_invariant, cmd_matrix_rep, cmd_pf, cmd_truncation
from .relations import cmd_relations
from .validate import cmd_lemma, cmd_validate

__all__ = [
    "cmd_validate",
    "cmd_lemma",
    "cmd_relations",
    "cmd_pf",
    "cmd_truncation",
    "cmd_matrix_rep",
    "cmd_invariant",
]
