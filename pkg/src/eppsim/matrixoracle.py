"""Brute-force dense-matrix reference for the bit-level Bell algebra.

This module exists as a test oracle: 4-dim vectors for one pair, 16-dim for
two pairs, with the fixed qubit ordering (A1, B1, A2, B2) -- basis index
8*a1 + 4*b1 + 2*a2 + b2.  Pair 1 is the source of the BCNOT, pair 2 the
target.  Errors are realized on Alice's qubits (A1, A2), which is where the
noise acts in the model; acting on Bob's side instead changes only global
phases.  Comparisons are phase-insensitive (overlap modulus).

Not tuned for speed; do not use it for ensemble dynamics.
"""

from __future__ import annotations

import numpy as np

from .bellbits import ALL_BELLS, BellIndex, PauliIndex

_PAULI_MATS = {
    (0, 0): np.eye(2, dtype=complex),
    (0, 1): np.array([[0, 1], [1, 0]], dtype=complex),
    (1, 0): np.array([[1, 0], [0, -1]], dtype=complex),
    (1, 1): np.array([[0, -1j], [1j, 0]], dtype=complex),
}


def pauli_matrix(op: PauliIndex) -> np.ndarray:
    """2x2 matrix of sigma_(p,a)."""
    return _PAULI_MATS[(op.phase_flip, op.amplitude_flip)]


def bell_vector(b: BellIndex) -> np.ndarray:
    """Normalized 4-vector of |B_ij> in the |00>,|01>,|10>,|11> basis."""
    v = np.zeros(4, dtype=complex)
    j = b.amplitude
    v[j] = 1.0
    v[2 + (1 - j)] = (-1.0) ** b.phase
    return v / np.sqrt(2.0)


def two_pair_vector(src: BellIndex, tgt: BellIndex) -> np.ndarray:
    """16-vector |B_src> (pair 1) tensor |B_tgt> (pair 2)."""
    return np.kron(bell_vector(src), bell_vector(tgt))


def _rx(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    return np.array([[c, -1j * s], [-1j * s, c]])


def _pair_xrot() -> np.ndarray:
    # Alice rotates by +pi/2 about x, Bob by -pi/2.
    return np.kron(_rx(np.pi / 2.0), _rx(-np.pi / 2.0))


def _bcnot16() -> np.ndarray:
    # CNOT A1->A2 and B1->B2 as one permutation of the 16 basis states.
    u = np.zeros((16, 16), dtype=complex)
    for n in range(16):
        a1, b1, a2, b2 = (n >> 3) & 1, (n >> 2) & 1, (n >> 1) & 1, n & 1
        m = (a1 << 3) | (b1 << 2) | ((a2 ^ a1) << 1) | (b2 ^ b1)
        u[m, n] = 1.0
    return u


def circuit_matrix(which: str) -> np.ndarray:
    """16x16 unitary acting on (A1, B1, A2, B2).

    ``xrot``  bilateral x-rotations on both pairs,
    ``bcnot`` the bilateral CNOT,
    ``epp``   the full 2-EPP unitary, bcnot @ xrot.
    """
    if which == "xrot":
        x = _pair_xrot()
        return np.kron(x, x)
    if which == "bcnot":
        return _bcnot16()
    if which == "epp":
        return _bcnot16() @ circuit_matrix("xrot")
    raise ValueError(f"unknown circuit {which!r}; expected xrot, bcnot or epp")


def error_operator(e_src: PauliIndex, e_tgt: PauliIndex) -> np.ndarray:
    """16x16 operator applying e_src to qubit A1 and e_tgt to qubit A2."""
    eye = np.eye(2, dtype=complex)
    return np.kron(np.kron(pauli_matrix(e_src), eye), np.kron(pauli_matrix(e_tgt), eye))


def phase_free_equal(u: np.ndarray, v: np.ndarray, atol: float = 1e-10) -> bool:
    """True iff two unit vectors agree up to a global phase."""
    return abs(abs(np.vdot(u, v)) - 1.0) < atol


def assert_density_matrix(rho: np.ndarray) -> None:
    """Raise ValueError unless rho is a valid density matrix."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    if not np.allclose(rho, rho.conj().T, atol=1e-10):
        raise ValueError("density matrix is not Hermitian")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > 1e-10:
        raise ValueError(f"density matrix has trace {tr}, expected 1")
    evals = np.linalg.eigvalsh(rho)
    if evals.min() < -1e-10:
        raise ValueError(f"density matrix has negative eigenvalue {evals.min()}")


def twirl(rho: np.ndarray) -> np.ndarray:
    """Average a 4x4 density matrix over the four bilateral Pauli rotations
    sigma_k (x) sigma_k and return the resulting Bell-diagonal weights.

    The output weights equal <B_mu| rho |B_mu> of the input, ordered
    (Phi+, Psi+, Phi-, Psi-).
    """
    rho = np.asarray(rho, dtype=complex)
    assert_density_matrix(rho)
    if rho.shape != (4, 4):
        raise ValueError(f"twirl expects a two-qubit state, got shape {rho.shape}")
    avg = np.zeros_like(rho)
    for mat in _PAULI_MATS.values():
        u = np.kron(mat, mat)
        avg += u @ rho @ u.conj().T
    avg /= 4.0
    weights = np.array([np.vdot(bell_vector(b), avg @ bell_vector(b)).real for b in ALL_BELLS])
    weights = np.clip(weights, 0.0, None)
    return weights / weights.sum()
