"""Pauli matrices and helpers for embedding single-site operators in a chain.

Convention used throughout the package: site 1 is the most significant
qubit, so a basis index j of an N-qubit register carries the bit of site i
at position N - i.  Basis index 0 is the state with every qubit in |0>
(equivalently |up>), which is the +1 eigenstate of sigma_z.
"""

from __future__ import annotations

import numpy as np

SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SY = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SZ = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
SP = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)  # (SX + i SY)/2, maps |1> -> |0>
SM = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)  # (SX - i SY)/2, maps |0> -> |1>
ID2 = np.eye(2, dtype=complex)

PAULI_BY_AXIS = {"x": SX, "y": SY, "z": SZ}


def site_bit(index: int | np.ndarray, site: int, n: int):
    """Bit of `site` (1-based) in basis index `index` of an `n`-qubit register."""
    return (index >> (n - site)) & 1


def z_pattern(site: int, n: int) -> np.ndarray:
    """Diagonal of sigma_z on `site` as a +/-1 vector of length 2**n."""
    idx = np.arange(2**n)
    return 1.0 - 2.0 * site_bit(idx, site, n)


def flip_map(site: int, n: int) -> np.ndarray:
    """Index permutation implementing sigma_x on `site` (an involution)."""
    return np.arange(2**n) ^ (1 << (n - site))


def site_operator(op: np.ndarray, site: int, n: int) -> np.ndarray:
    """Dense embedding of a single-site 2x2 operator at `site` (1-based)."""
    left = np.eye(2 ** (site - 1), dtype=complex)
    right = np.eye(2 ** (n - site), dtype=complex)
    return np.kron(np.kron(left, op), right)


def kron_all(ops: list[np.ndarray]) -> np.ndarray:
    """Tensor product of a list of matrices, site 1 first (most significant)."""
    out = ops[0]
    for op in ops[1:]:
        out = np.kron(out, op)
    return out
