"""The flagged 2-EPP recurrence map and its closed-form special cases.

State conventions
-----------------
A Bell-diagonal pair is described by four weights in Bell-index order
(Phi+, Psi+, Phi-, Psi-); the traditional letters map as A = Phi+,
B = Psi-, C = Psi+, D = Phi-.  The flagged ensemble tracks a 4x4 table
``a[bell, flag]`` of weights over (Bell state, error flag), 16 variables in
total; cell index = 4 * bell + flag.  Coefficients are named by letter plus
flag bits, e.g. ``A00`` or ``C01``.

One noisy purification step is a normalized quadratic form: sixteen
symmetric matrices M_j, one per output cell, with

    a'_j = (a M_j a) / N,    N = sum_j a M_j a,

where N is the keep probability.  ``generate_map`` derives the matrices for
any noise channel by routing all 4 * 4 * 4 * 4 * 16 = 4096 weighted source /
target / error combinations through the exact bit algebra of ``bellbits``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .bellbits import (
    BellIndex,
    FlagPair,
    PauliIndex,
    epp_unitary,
    flag_flip,
    flag_update,
    keep_predicate,
    pauli_on_bell,
)
from .noisemodels import BinaryNoiseModel, NoiseModel

ANNIHILATION_EPS = 1e-15

LETTER_OF_BELL = ("A", "C", "D", "B")  # Bell-index order -> traditional letter
COEFF_NAMES = tuple(
    f"{LETTER_OF_BELL[bell]}{flag >> 1}{flag & 1}" for bell in range(4) for flag in range(4)
)
BINARY_NAMES = ("A0", "A1", "B0", "B1")


class EnsembleAnnihilated(RuntimeError):
    """Raised when a step's keep probability vanishes."""


def cell_index(bell: BellIndex, flag: FlagPair) -> int:
    return 4 * bell.index + flag.index


def routed_terms() -> Iterator[tuple[int, int, int, int, int | None]]:
    """All 4096 routed terms of one noisy step.

    Yields (source cell, target cell, mu, nu, output cell), with output cell
    ``None`` for discarded combinations.  mu and nu are packed Pauli indices
    on the source and target pair.  The term's weight is
    f[mu, nu] * a[source cell] * a[target cell].
    """
    for sb in range(4):
        for sf in range(4):
            src_cell = 4 * sb + sf
            src_bell = BellIndex.from_index(sb)
            src_flag = FlagPair.from_index(sf)
            for tb in range(4):
                for tf in range(4):
                    tgt_cell = 4 * tb + tf
                    tgt_bell = BellIndex.from_index(tb)
                    tgt_flag = FlagPair.from_index(tf)
                    for mu in range(4):
                        err_src = PauliIndex.from_index(mu)
                        for nu in range(4):
                            err_tgt = PauliIndex.from_index(nu)
                            out_s, out_t = epp_unitary(
                                pauli_on_bell(err_src, src_bell),
                                pauli_on_bell(err_tgt, tgt_bell),
                            )
                            if not keep_predicate(out_t):
                                yield src_cell, tgt_cell, mu, nu, None
                                continue
                            out_flag = flag_update(
                                flag_flip(src_flag, err_src), flag_flip(tgt_flag, err_tgt)
                            )
                            yield src_cell, tgt_cell, mu, nu, cell_index(out_s, out_flag)


def _kept_route_arrays() -> tuple[np.ndarray, ...]:
    rows = [(o, s, t, m, n) for s, t, m, n, o in routed_terms() if o is not None]
    out, src, tgt, mu, nu = (np.array(col, dtype=np.intp) for col in zip(*rows))
    return out, src, tgt, mu, nu


_OUT, _SRC, _TGT, _MU, _NU = _kept_route_arrays()

# Binary sub-family: Bell states {Phi+, Psi+} with a one-bit (amplitude) flag.
# Variables (A0, A1, B0, B1) live at cells (Phi+, 00), (Phi+, 01),
# (Psi+, 00), (Psi+, 01).
_BINARY_CELLS = (0, 1, 4, 5)
_BINARY_VAR = {c: v for v, c in enumerate(_BINARY_CELLS)}


@dataclass(frozen=True)
class QuadraticMap:
    """One purification step as normalized quadratic forms a'_j = a M_j a / N."""

    m: np.ndarray  # (n, n, n); m[j] symmetric with nonnegative entries
    names: tuple[str, ...]

    def __post_init__(self):
        m = np.asarray(self.m, dtype=float)
        object.__setattr__(self, "m", m)
        m.setflags(write=False)
        object.__setattr__(self, "_m2", m.reshape(m.shape[0], -1))

    @property
    def dim(self) -> int:
        return self.m.shape[0]

    def apply(self, a: np.ndarray) -> tuple[np.ndarray, float]:
        """Contract with a weight vector; returns (normalized image, keep probability)."""
        q = self._m2 @ np.multiply.outer(a, a).ravel()
        n = q.sum()
        if n <= ANNIHILATION_EPS:
            raise EnsembleAnnihilated(f"keep probability {n} <= {ANNIHILATION_EPS}")
        return q / n, float(n)

    def to_json_dict(self) -> dict:
        return {
            "names": list(self.names),
            "matrices": {name: self.m[j].ravel().tolist() for j, name in enumerate(self.names)},
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "QuadraticMap":
        names = tuple(d["names"])
        n = len(names)
        m = np.array([d["matrices"][name] for name in names]).reshape(n, n, n)
        return cls(m=m, names=names)


def generate_map(noise: NoiseModel) -> QuadraticMap:
    """Derive the 16-variable step matrices for a noise channel."""
    m = np.zeros((16, 16, 16))
    np.add.at(m, (_OUT, _SRC, _TGT), noise.f[_MU, _NU])
    m = 0.5 * (m + m.transpose(0, 2, 1))
    return QuadraticMap(m=m, names=COEFF_NAMES)


def binary_quadratic_map(noise: BinaryNoiseModel) -> QuadraticMap:
    """The step matrices restricted to the closed binary sub-family."""
    fb = np.array([[noise.f00, noise.f01], [noise.f10, noise.f11]])
    m = np.zeros((4, 4, 4))
    for src, tgt, mu, nu, out in routed_terms():
        if mu > 1 or nu > 1 or src not in _BINARY_VAR or tgt not in _BINARY_VAR:
            continue
        if out is None:
            continue
        if out not in _BINARY_VAR:
            raise AssertionError("binary sub-family is not closed")
        m[_BINARY_VAR[out], _BINARY_VAR[src], _BINARY_VAR[tgt]] += fb[mu, nu]
    m = 0.5 * (m + m.transpose(0, 2, 1))
    return QuadraticMap(m=m, names=BINARY_NAMES)


def ideal_quadratic_map() -> QuadraticMap:
    """The noiseless step on plain Bell-diagonal states (4 variables)."""
    m = np.zeros((4, 4, 4))
    a, c, d, b = range(4)  # Bell-index order with traditional letters
    m[a][a][a] = m[a][b][b] = 1.0  # A' = A^2 + B^2
    m[c][c][c] = m[c][d][d] = 1.0  # C' = C^2 + D^2
    m[d][a][b] = m[d][b][a] = 1.0  # D' = 2AB
    m[b][c][d] = m[b][d][c] = 1.0  # B' = 2CD
    return QuadraticMap(m=m, names=("A", "C", "D", "B"))


# --- states ---------------------------------------------------------------

def _clean_weights(w: np.ndarray, sum_tol: float) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.min() < -1e-12:
        raise ValueError(f"negative weight {w.min()}")
    w = np.clip(w, 0.0, None)
    total = w.sum()
    if abs(total - 1.0) > sum_tol:
        raise ValueError(f"weights sum to {total}, expected 1")
    return w / total


@dataclass(frozen=True)
class BellDiagonalState:
    """Four Bell weights in Bell-index order (Phi+, Psi+, Phi-, Psi-)."""

    coeffs: np.ndarray

    def __post_init__(self):
        w = _clean_weights(np.asarray(self.coeffs, dtype=float).reshape(4), 1e-9)
        object.__setattr__(self, "coeffs", w)
        w.setflags(write=False)

    @classmethod
    def from_abcd(cls, a: float, b: float, c: float, d: float) -> "BellDiagonalState":
        return cls(np.array([a, c, d, b]))

    @classmethod
    def werner(cls, fidelity: float) -> "BellDiagonalState":
        r = (1.0 - fidelity) / 3.0
        return cls(np.array([fidelity, r, r, r]))

    @property
    def a(self) -> float:
        return float(self.coeffs[0])

    @property
    def b(self) -> float:
        return float(self.coeffs[3])

    @property
    def c(self) -> float:
        return float(self.coeffs[1])

    @property
    def d(self) -> float:
        return float(self.coeffs[2])

    @property
    def fidelity(self) -> float:
        return self.a


@dataclass(frozen=True)
class FlaggedEnsembleState:
    """Weights a[bell, flag] over (Bell state, error flag)."""

    a: np.ndarray

    def __post_init__(self):
        w = _clean_weights(np.asarray(self.a, dtype=float).reshape(4, 4), 1e-7)
        object.__setattr__(self, "a", w)
        w.setflags(write=False)

    @property
    def flat(self) -> np.ndarray:
        return self.a.ravel()

    @property
    def fidelity(self) -> float:
        """Total Phi+ weight, the fidelity Alice and Bob observe."""
        return float(self.a[0].sum())

    @property
    def conditional_fidelity(self) -> float:
        """Fidelity given the flags: total weight with flag equal to Bell index."""
        return float(np.trace(self.a))

    def off_diagonal_mass(self) -> float:
        """Weight with flag different from Bell index."""
        return float(self.a.sum() - np.trace(self.a))

    def marginal(self) -> BellDiagonalState:
        return BellDiagonalState(self.a.sum(axis=1))

    def named_coeffs(self) -> dict[str, float]:
        return {name: float(self.flat[k]) for k, name in enumerate(COEFF_NAMES)}

    @classmethod
    def from_named(cls, coeffs: dict[str, float]) -> "FlaggedEnsembleState":
        flat = np.array([coeffs[name] for name in COEFF_NAMES])
        return cls(flat.reshape(4, 4))


def embed(state: BellDiagonalState) -> FlaggedEnsembleState:
    """Attach all-zero error flags to a Bell-diagonal ensemble."""
    a = np.zeros((4, 4))
    a[:, 0] = state.coeffs
    return FlaggedEnsembleState(a)


def marginal(state: FlaggedEnsembleState) -> BellDiagonalState:
    return state.marginal()


def fidelity(state: FlaggedEnsembleState | BellDiagonalState | "BinaryFlaggedState") -> float:
    return state.fidelity


def conditional_fidelity(state: "FlaggedEnsembleState | BinaryFlaggedState") -> float:
    return state.conditional_fidelity


@dataclass(frozen=True)
class BinaryFlaggedState:
    """Binary sub-family state: Phi+/Psi+ weights split by a one-bit flag."""

    a0: float
    a1: float
    b0: float
    b1: float

    def __post_init__(self):
        vec = _clean_weights(np.array([self.a0, self.a1, self.b0, self.b1]), 1e-9)
        for name, v in zip(("a0", "a1", "b0", "b1"), vec):
            object.__setattr__(self, name, float(v))

    @property
    def as_array(self) -> np.ndarray:
        return np.array([self.a0, self.a1, self.b0, self.b1])

    @property
    def fidelity(self) -> float:
        return self.a0 + self.a1

    @property
    def conditional_fidelity(self) -> float:
        return self.a0 + self.b1

    def embed(self) -> FlaggedEnsembleState:
        a = np.zeros((4, 4))
        a[0, 0], a[0, 1], a[1, 0], a[1, 1] = self.a0, self.a1, self.b0, self.b1
        return FlaggedEnsembleState(a)


# --- stepping -------------------------------------------------------------

def step(state: FlaggedEnsembleState, qmap: QuadraticMap) -> tuple[FlaggedEnsembleState, float]:
    """One noisy purification step; returns the next state and the keep probability."""
    out, n = qmap.apply(state.flat)
    return FlaggedEnsembleState(out.reshape(4, 4)), n


def ideal_step(state: BellDiagonalState) -> BellDiagonalState:
    """Noiseless recurrence on the four Bell weights."""
    a, b, c, d = state.a, state.b, state.c, state.d
    n = (a + b) ** 2 + (c + d) ** 2
    if n <= ANNIHILATION_EPS:
        raise EnsembleAnnihilated(f"keep probability {n} <= {ANNIHILATION_EPS}")
    return BellDiagonalState.from_abcd(
        (a * a + b * b) / n, 2.0 * c * d / n, (c * c + d * d) / n, 2.0 * a * b / n
    )


def binary_step_raw(
    a0: float, a1: float, b0: float, b1: float, f00: float, f11: float, fs: float
) -> tuple[float, float, float, float, float]:
    """Scalar kernel of the binary recurrence (unvalidated, for hot loops)."""
    n = (f00 + f11) * ((a0 + a1) ** 2 + (b0 + b1) ** 2) + 2.0 * fs * (a0 + a1) * (b0 + b1)
    if n <= ANNIHILATION_EPS:
        raise EnsembleAnnihilated(f"keep probability {n} <= {ANNIHILATION_EPS}")
    na0 = f00 * (a0 * a0 + 2.0 * a0 * a1) + f11 * (b1 * b1 + 2.0 * b0 * b1) + fs * (
        a0 * b1 + a1 * b1 + a0 * b0
    )
    na1 = f00 * a1 * a1 + f11 * b0 * b0 + fs * a1 * b0
    nb0 = f00 * (b0 * b0 + 2.0 * b0 * b1) + f11 * (a1 * a1 + 2.0 * a0 * a1) + fs * (
        b0 * a1 + b1 * a1 + b0 * a0
    )
    nb1 = f00 * b1 * b1 + f11 * a0 * a0 + fs * b1 * a0
    return na0 / n, na1 / n, nb0 / n, nb1 / n, n


def binary_step(state: BinaryFlaggedState, noise: BinaryNoiseModel) -> BinaryFlaggedState:
    """One purification step of the binary sub-family."""
    a0, a1, b0, b1, _ = binary_step_raw(
        state.a0, state.a1, state.b0, state.b1, noise.f00, noise.f11, noise.fs
    )
    return BinaryFlaggedState(a0, a1, b0, b1)
