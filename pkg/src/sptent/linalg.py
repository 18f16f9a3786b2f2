"""Small dense linear-algebra helpers shared across modules."""

from __future__ import annotations

import numpy as np


def hermitize(m: np.ndarray) -> np.ndarray:
    return (m + m.conj().T) / 2


def apply_to_axes(tensor: np.ndarray, op: np.ndarray, axes) -> np.ndarray:
    """Apply a dense operator to the combined listed axes of a tensor."""
    axes = list(axes)
    moved = np.moveaxis(tensor, axes, range(len(axes)))
    shp = moved.shape
    flat = moved.reshape(int(np.prod(shp[:len(axes)], dtype=np.int64)), -1)
    flat = op @ flat
    return np.moveaxis(flat.reshape(shp), range(len(axes)), axes)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR with phase-fixed diagonal."""
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(a)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return hermitize(a)


def unitarity_defect(m: np.ndarray) -> float:
    d = m.shape[0]
    return float(np.linalg.norm(m.conj().T @ m - np.eye(d)))


def trace_norm_hermitian(m: np.ndarray) -> float:
    """Sum of |eigenvalues| for a Hermitian matrix."""
    return float(np.abs(np.linalg.eigvalsh(hermitize(m))).sum())


def von_neumann_entropy_bits(rho: np.ndarray, cutoff: float = 1e-14) -> float:
    w = np.linalg.eigvalsh(hermitize(rho))
    w = w[w > cutoff]
    return float(-(w * np.log2(w)).sum())
