"""Initial-state preparation: product, Bell-head, ground, and thermal states.

State vectors are complex numpy vectors of length 2**N with unit Euclidean
norm; density matrices are Hermitian, unit-trace, positive 2**N x 2**N
arrays.  Lab-frame states are written in the sigma_z (charge) basis with
|up> = index 0; eigenbasis-frame states use the per-site energy eigenstates
|0>, |1> of :func:`qubitchain.chain.mixing_angles`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain import require_hermitian

_SQRT2 = np.sqrt(2.0)


def plus_product(n: int) -> np.ndarray:
    """|+>^N with |+> = (|up> + |down>)/sqrt(2): every amplitude 2**(-N/2)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return np.full(2**n, 2.0 ** (-n / 2.0), dtype=complex)


def bell_head(n: int) -> np.ndarray:
    """(|up down> + |down up>)/sqrt(2) on sites (1, 2), |+> everywhere else."""
    if n < 2:
        raise ValueError("bell_head needs n >= 2")
    bell = np.array([0.0, 1.0, 1.0, 0.0], dtype=complex) / _SQRT2
    tail = plus_product(n - 2) if n > 2 else np.array([1.0], dtype=complex)
    return np.kron(bell, tail)


def eigenbasis_product(n: int) -> np.ndarray:
    """|0>^N in the eigenbasis frame (computational basis index 0)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    psi = np.zeros(2**n, dtype=complex)
    psi[0] = 1.0
    return psi


def eigenbasis_bell_head(n: int) -> np.ndarray:
    """(|01> + |10>)/sqrt(2) on sites (1, 2), |0> everywhere else."""
    if n < 2:
        raise ValueError("eigenbasis_bell_head needs n >= 2")
    psi = np.zeros(2**n, dtype=complex)
    tail = 2 ** (n - 2)
    psi[1 * tail] = 1.0 / _SQRT2  # |01 0...0>
    psi[2 * tail] = 1.0 / _SQRT2  # |10 0...0>
    return psi


@dataclass(frozen=True)
class GroundState:
    """Minimal eigenvector of a Hamiltonian plus degeneracy diagnostics."""

    vector: np.ndarray
    energy: float
    gap: float
    degenerate: bool


def ground_state(h: np.ndarray, degeneracy_tol: float = 1e-10) -> GroundState:
    """Ground state of a dense Hermitian operator.

    For (numerically) degenerate ground spaces one minimal eigenvector is
    returned and the `degenerate` flag is set; callers that care must check it.
    """
    require_hermitian(h, what="hamiltonian")
    energies, vectors = np.linalg.eigh(h)
    gap = float(energies[1] - energies[0]) if len(energies) > 1 else np.inf
    scale = max(1.0, abs(float(energies[0])))
    vec = np.ascontiguousarray(vectors[:, 0])
    return GroundState(vec, float(energies[0]), gap, gap < degeneracy_tol * scale)


def thermal_state(h: np.ndarray, temperature_kelvin: float, energy_unit_kelvin: float = 1.0) -> np.ndarray:
    """Gibbs state exp(-H/T)/Z by eigendecomposition.

    `h` is in units of E_C; the temperature is given in Kelvin and converted
    with E_C = `energy_unit_kelvin` (hbar = k_B = 1).
    """
    if temperature_kelvin <= 0:
        raise ValueError("temperature must be > 0")
    require_hermitian(h, what="hamiltonian")
    t_ec = temperature_kelvin / energy_unit_kelvin
    energies, vectors = np.linalg.eigh(h)
    # Shift by the ground energy before exponentiating to avoid overflow.
    weights = np.exp(-(energies - energies[0]) / t_ec)
    weights /= weights.sum()
    return (vectors * weights) @ vectors.conj().T


def fidelity(state: np.ndarray, rho: np.ndarray) -> float:
    """<g|rho|g> for a pure reference state g and a density matrix rho."""
    if rho.shape != (state.size, state.size):
        raise ValueError("dimension mismatch between state and density matrix")
    value = complex(state.conj() @ rho @ state)
    if abs(value.imag) > 1e-12 * max(1.0, abs(value.real)):
        raise ValueError(f"fidelity has non-negligible imaginary part {value.imag:.3e}")
    return float(value.real)


def density_from_pure(state: np.ndarray) -> np.ndarray:
    """Projector |psi><psi| of a normalized state vector."""
    return np.outer(state, state.conj())


def check_density_matrix(
    rho: np.ndarray,
    herm_tol: float = 1e-12,
    trace_tol: float = 1e-10,
    positivity_tol: float = 1e-9,
) -> None:
    """Raise if rho violates Hermiticity, unit trace, or positivity tolerances."""
    require_hermitian(rho, rtol=herm_tol, what="density matrix")
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > trace_tol:
        raise ValueError(f"trace {tr} deviates from 1 beyond {trace_tol}")
    min_eig = float(np.linalg.eigvalsh(rho)[0])
    if min_eig < -positivity_tol:
        raise ValueError(f"minimum eigenvalue {min_eig:.3e} below -{positivity_tol}")
