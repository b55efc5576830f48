"""Symbolic gate language and its dense matrix denotation.

A gate expression is a closed term over a fixed universal set of named
gates, combined with adjoint, sequential product, tensor product, and the
block diagonal D(U, V).  Matrices are dense complex128 numpy arrays with
big-endian qubit ordering (first qubit = most significant bit).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "GateExpr",
    "Named",
    "Identity",
    "Dense",
    "Adjoint",
    "Product",
    "Tensor",
    "Diag",
    "GateError",
    "gate_dim",
    "gate_arity",
    "mat_of_gate",
    "is_unitary",
    "is_identity_gate",
    "NAMED_GATES",
]

_SQ2 = 1.0 / np.sqrt(2.0)

NAMED_GATES: dict[str, np.ndarray] = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "T": np.array([[1, 0], [0, np.exp(1j * np.pi / 4)]], dtype=complex),
    "SWAP": np.array(
        [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
    ),
}


class GateError(Exception):
    """Ill-formed gate expression (dimension mismatch or unknown name)."""


@dataclass(frozen=True)
class GateExpr:
    pass


@dataclass(frozen=True)
class Named(GateExpr):
    name: str

    def __post_init__(self):
        if self.name not in NAMED_GATES:
            raise GateError(f"unknown gate name: {self.name}")


@dataclass(frozen=True)
class Identity(GateExpr):
    """Identity gate of dimension `dim` (a power of two; 1 is allowed)."""

    dim: int

    def __post_init__(self):
        if self.dim < 1 or self.dim & (self.dim - 1):
            raise GateError(f"identity dimension must be a power of two: {self.dim}")


@dataclass(frozen=True)
class Dense(GateExpr):
    """A concrete unitary, used for lifted callables.  Internal only: it has
    no source syntax and round-trips through the printer only by label."""

    entries: tuple[tuple[complex, ...], ...]
    label: str = "dense"

    @staticmethod
    def of_matrix(mtx: np.ndarray, label: str = "dense") -> "Dense":
        return Dense(tuple(tuple(complex(x) for x in row) for row in mtx), label)


@dataclass(frozen=True)
class Adjoint(GateExpr):
    inner: GateExpr


@dataclass(frozen=True)
class Product(GateExpr):
    """Sequential composition: Product(v, u) denotes the matrix v @ u,
    i.e. apply u first, then v."""

    second: GateExpr
    first: GateExpr


@dataclass(frozen=True)
class Tensor(GateExpr):
    left: GateExpr
    right: GateExpr


@dataclass(frozen=True)
class Diag(GateExpr):
    """Block diagonal D(U, V): applies U when the control qubit is 0 and V
    when it is 1.  The control occupies the most significant position."""

    on_zero: GateExpr
    on_one: GateExpr


def gate_dim(g: GateExpr) -> int:
    """Matrix dimension of a gate expression; raises GateError when the
    dimension side conditions fail."""
    match g:
        case Named(name):
            return NAMED_GATES[name].shape[0]
        case Identity(dim):
            return dim
        case Dense(entries, _):
            return len(entries)
        case Adjoint(inner):
            return gate_dim(inner)
        case Product(second, first):
            d1, d2 = gate_dim(second), gate_dim(first)
            if d1 != d2:
                raise GateError(f"product of unequal dimensions: {d1} vs {d2}")
            return d1
        case Tensor(left, right):
            return gate_dim(left) * gate_dim(right)
        case Diag(on_zero, on_one):
            d1, d2 = gate_dim(on_zero), gate_dim(on_one)
            if d1 != d2:
                raise GateError(f"D(U, V) blocks of unequal dimensions: {d1} vs {d2}")
            return 2 * d1
        case _:
            raise GateError(f"not a gate expression: {g!r}")


def gate_arity(g: GateExpr) -> int:
    """Number of qubits the gate acts on (dim = 2^arity)."""
    return gate_dim(g).bit_length() - 1


_MAT_CACHE: dict[GateExpr, np.ndarray] = {}


def mat_of_gate(g: GateExpr) -> np.ndarray:
    """Dense matrix of a gate expression.  Cached; treat results as
    read-only."""
    cached = _MAT_CACHE.get(g)
    if cached is None:
        cached = _mat_of_gate(g)
        cached.flags.writeable = False
        _MAT_CACHE[g] = cached
    return cached


def _mat_of_gate(g: GateExpr) -> np.ndarray:
    match g:
        case Named(name):
            return NAMED_GATES[name].copy()
        case Identity(dim):
            return np.eye(dim, dtype=complex)
        case Dense(entries, _):
            return np.array(entries, dtype=complex)
        case Adjoint(inner):
            return np.ascontiguousarray(mat_of_gate(inner).conj().T)
        case Product(second, first):
            gate_dim(g)
            return mat_of_gate(second) @ mat_of_gate(first)
        case Tensor(left, right):
            return np.kron(mat_of_gate(left), mat_of_gate(right))
        case Diag(on_zero, on_one):
            d = gate_dim(g) // 2
            out = np.zeros((2 * d, 2 * d), dtype=complex)
            out[:d, :d] = mat_of_gate(on_zero)
            out[d:, d:] = mat_of_gate(on_one)
            return out
        case _:
            raise GateError(f"not a gate expression: {g!r}")


def is_unitary(mtx: np.ndarray, tol: float = 1e-9) -> bool:
    """True iff ||M M^dag - I||_F <= tol."""
    if mtx.ndim != 2 or mtx.shape[0] != mtx.shape[1]:
        return False
    d = mtx.shape[0]
    return bool(np.linalg.norm(mtx @ mtx.conj().T - np.eye(d)) <= tol)


def is_identity_gate(g: GateExpr, tol: float = 1e-12) -> bool:
    """True iff the gate's matrix equals the identity of its dimension."""
    mtx = mat_of_gate(g)
    return bool(np.linalg.norm(mtx - np.eye(mtx.shape[0])) <= tol)
