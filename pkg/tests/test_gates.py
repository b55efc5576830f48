"""Gate algebra and matrix denotation."""

import random

import numpy as np
import pytest

from lqsharp.gates import (
    Adjoint,
    Diag,
    GateError,
    Identity,
    Named,
    Product,
    Tensor,
    gate_arity,
    gate_dim,
    is_identity_gate,
    is_unitary,
    mat_of_gate,
)
from lqsharp.generate import random_gate

CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


def test_diag_of_identity_and_x_is_cnot():
    assert np.allclose(mat_of_gate(Diag(Identity(2), Named("X"))), CNOT)


def test_product_of_involution_is_identity():
    assert np.allclose(mat_of_gate(Product(Named("X"), Named("X"))), np.eye(2))


def test_adjoint_of_s_is_conjugate_transpose():
    # S = diag(1, i), so its adjoint is diag(1, -i)
    assert np.allclose(mat_of_gate(Adjoint(Named("S"))), np.diag([1.0, -1.0j]))


def test_product_applies_first_argument_second():
    # Product(V, U) must be the matrix V @ U ("first U then V")
    v, u = Named("H"), Named("S")
    assert np.allclose(
        mat_of_gate(Product(v, u)), mat_of_gate(v) @ mat_of_gate(u)
    )


def test_named_gates_are_unitary():
    for name in ("X", "Y", "Z", "H", "S", "T", "SWAP"):
        assert is_unitary(mat_of_gate(Named(name)))


def test_is_unitary_rejects_ones_matrix():
    assert not is_unitary(np.ones((2, 2), dtype=complex))


def test_random_gate_expressions_are_unitary():
    rng = random.Random(7)
    for _ in range(100):
        g = random_gate(rng, rng.randint(1, 3), depth=5)
        mtx = mat_of_gate(g)
        assert mtx.shape == (gate_dim(g), gate_dim(g))
        assert is_unitary(mtx, 1e-9)


def test_adjoint_involution():
    rng = random.Random(3)
    for _ in range(40):
        g = random_gate(rng, rng.randint(1, 2), depth=4)
        assert np.allclose(
            mat_of_gate(Adjoint(Adjoint(g))), mat_of_gate(g), atol=1e-12
        )


def test_diag_control_convention():
    # |0> (x) |psi| goes to |0> (x) U|psi>, |1> branch gets V
    rng = random.Random(9)
    for _ in range(20):
        u = random_gate(rng, 1, 3)
        v = random_gate(rng, 1, 3)
        d = mat_of_gate(Diag(u, v))
        psi = np.array([rng.random() + 1j * rng.random() for _ in range(2)])
        psi /= np.linalg.norm(psi)
        zero = np.kron([1, 0], psi)
        one = np.kron([0, 1], psi)
        assert np.allclose(d @ zero, np.kron([1, 0], mat_of_gate(u) @ psi))
        assert np.allclose(d @ one, np.kron([0, 1], mat_of_gate(v) @ psi))


def test_tensor_and_product_associativity():
    rng = random.Random(21)
    for _ in range(20):
        a, b, c = (random_gate(rng, 1, 2) for _ in range(3))
        left = mat_of_gate(Tensor(Tensor(a, b), c))
        right = mat_of_gate(Tensor(a, Tensor(b, c)))
        assert np.allclose(left, right, atol=1e-12)
        left = mat_of_gate(Product(Product(a, b), c))
        right = mat_of_gate(Product(a, Product(b, c)))
        assert np.allclose(left, right, atol=1e-12)


def test_dimension_mismatch_raises():
    with pytest.raises(GateError):
        gate_dim(Product(Named("X"), Named("SWAP")))
    with pytest.raises(GateError):
        gate_dim(Diag(Named("X"), Named("SWAP")))
    with pytest.raises(GateError):
        Identity(3)


def test_gate_arity():
    assert gate_arity(Named("SWAP")) == 2
    assert gate_arity(Identity(1)) == 0
    assert gate_arity(Diag(Identity(2), Named("X"))) == 2


def test_identity_detection():
    assert is_identity_gate(Identity(4))
    assert is_identity_gate(Product(Named("X"), Named("X")))
    assert not is_identity_gate(Named("Z"))
