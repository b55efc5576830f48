"""Core-calculus toolkit for a Q# subset.

Elaborates Q# source into a small command/expression calculus, typechecks
it under signature-indexed rules that enforce no-cloning and stack
discipline for qubits, executes it with a seeded density-matrix or
statevector store, and decides program equivalence with a brute-force
superoperator oracle.
"""

from .axioms import AXIOM_IDS, check_axiom, instantiate, random_params
from .denote import Instrument, denote, equiv, is_cptp
from .elaborate import ElabResult, elaborate, elaborate_source, mat_of_operation
from .gates import (
    Adjoint,
    Dense,
    Diag,
    GateExpr,
    Identity,
    Named,
    Product,
    Tensor,
    is_unitary,
    mat_of_gate,
)
from .interp import QuantumStore, run, step_cmd, step_expr
from .parser import parse_core, parse_file
from .printer import print_term, print_type
from .qsharp import parse_qs
from .simplify import simplify
from .syntax import alpha_eq, desugar, free_qubit_symbols, fresh_symbol, subst
from .typecheck import Signature, TypeCheckError, infer_cmd, infer_expr

__version__ = "0.1.0"

__all__ = [
    "AXIOM_IDS",
    "check_axiom",
    "instantiate",
    "random_params",
    "Instrument",
    "denote",
    "equiv",
    "is_cptp",
    "ElabResult",
    "elaborate",
    "elaborate_source",
    "mat_of_operation",
    "Adjoint",
    "Dense",
    "Diag",
    "GateExpr",
    "Identity",
    "Named",
    "Product",
    "Tensor",
    "is_unitary",
    "mat_of_gate",
    "QuantumStore",
    "run",
    "step_cmd",
    "step_expr",
    "parse_core",
    "parse_file",
    "print_term",
    "print_type",
    "parse_qs",
    "simplify",
    "alpha_eq",
    "desugar",
    "free_qubit_symbols",
    "fresh_symbol",
    "subst",
    "Signature",
    "TypeCheckError",
    "infer_cmd",
    "infer_expr",
    "__version__",
]
