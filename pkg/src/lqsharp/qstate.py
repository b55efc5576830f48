"""Dense state manipulation with big-endian qubit indexing.

Position p addresses the p-th qubit counting from the most significant bit
of the basis index.  Density matrices are (2^n, 2^n) arrays; statevectors
are (2^n,) arrays.  All functions return new arrays.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "KET0",
    "KET0BRA0",
    "apply_sv",
    "apply_dm",
    "alloc_sv",
    "alloc_dm",
    "trace_out_dm",
    "project_sv",
    "project_dm",
    "prob_one_sv",
    "prob_one_dm",
    "embed_unitary",
]

KET0 = np.array([1.0, 0.0], dtype=complex)
KET0BRA0 = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)


def _perm_to_front(ndim: int, axes: list[int]) -> tuple[list[int], list[int]]:
    front = list(axes) + [a for a in range(ndim) if a not in axes]
    inverse = [0] * ndim
    for i, a in enumerate(front):
        inverse[a] = i
    return front, inverse


def _contract(mat: np.ndarray, tens: np.ndarray, axes: list[int]) -> np.ndarray:
    """Apply `mat` (2^k x 2^k) to the given tensor axes of `tens`."""
    k = len(axes)
    front, inverse = _perm_to_front(tens.ndim, axes)
    t = tens.transpose(front)
    t = np.asarray(mat) @ t.reshape(2**k, -1)
    return t.reshape((2,) * tens.ndim).transpose(inverse)


def apply_sv(psi: np.ndarray, n: int, mat: np.ndarray, positions: list[int]) -> np.ndarray:
    t = psi.reshape((2,) * n)
    t = _contract(mat, t, list(positions))
    return t.reshape(-1)


def apply_dm(rho: np.ndarray, n: int, mat: np.ndarray, positions: list[int]) -> np.ndarray:
    t = rho.reshape((2,) * (2 * n))
    t = _contract(mat, t, list(positions))
    t = _contract(mat.conj(), t, [n + p for p in positions])
    return t.reshape(2**n, 2**n)


def alloc_sv(psi: np.ndarray, n: int, pos: int) -> np.ndarray:
    out = np.zeros(2 ** (n + 1), dtype=complex)
    out[::2] = psi
    if pos != n:
        t = out.reshape((2,) * (n + 1))
        t = np.moveaxis(t, n, pos)
        out = t.reshape(-1)
    return out


def alloc_dm(rho: np.ndarray, n: int, pos: int) -> np.ndarray:
    dim = 2 ** (n + 1)
    out = np.zeros((dim, dim), dtype=complex)
    out[::2, ::2] = rho
    if pos != n:
        t = out.reshape((2,) * (2 * (n + 1)))
        t = np.moveaxis(t, [n, 2 * n + 1], [pos, (n + 1) + pos])
        out = t.reshape(dim, dim)
    return out


def trace_out_dm(rho: np.ndarray, n: int, pos: int) -> np.ndarray:
    t = rho.reshape((2,) * (2 * n))
    t = np.trace(t, axis1=pos, axis2=n + pos)
    return t.reshape(2 ** (n - 1), 2 ** (n - 1))


def project_sv(psi: np.ndarray, n: int, pos: int, bit: int) -> np.ndarray:
    t = psi.reshape((2,) * n).copy()
    idx: list = [slice(None)] * n
    idx[pos] = 1 - bit
    t[tuple(idx)] = 0.0
    return t.reshape(-1)


def project_dm(rho: np.ndarray, n: int, pos: int, bit: int) -> np.ndarray:
    t = rho.reshape((2,) * (2 * n)).copy()
    idx: list = [slice(None)] * (2 * n)
    idx[pos] = 1 - bit
    t[tuple(idx)] = 0.0
    idx = [slice(None)] * (2 * n)
    idx[n + pos] = 1 - bit
    t[tuple(idx)] = 0.0
    return t.reshape(2**n, 2**n)


def prob_one_sv(psi: np.ndarray, n: int, pos: int) -> float:
    t = np.abs(psi.reshape((2,) * n)) ** 2
    idx: list = [slice(None)] * n
    idx[pos] = 1
    return float(np.sum(t[tuple(idx)]))


def prob_one_dm(rho: np.ndarray, n: int, pos: int) -> float:
    diag = np.real(np.diagonal(rho)).reshape((2,) * n)
    idx: list = [slice(None)] * n
    idx[pos] = 1
    return float(np.sum(diag[tuple(idx)]))


def embed_unitary(mat: np.ndarray, n: int, positions: list[int]) -> np.ndarray:
    """The full 2^n unitary applying `mat` at the given qubit positions and
    the identity elsewhere."""
    k = len(positions)
    rest = [p for p in range(n) if p not in positions]
    perm = list(positions) + rest
    t = np.kron(mat, np.eye(2 ** (n - k), dtype=complex)).reshape((2,) * (2 * n))
    t = np.moveaxis(t, list(range(n)), perm)
    t = np.moveaxis(t, list(range(n, 2 * n)), [n + p for p in perm])
    return t.reshape(2**n, 2**n)
