"""Pauli-diagonal two-qubit noise channels.

A channel is a joint probability table f[mu, nu] over Pauli labels
(mu on the source-pair qubit, nu on the target-pair qubit, both in Alice's
laboratory).  Labels are the two-bit (phase-flip, amplitude-flip) indices of
``bellbits``, packed as 2*p + a, so the index order is (I, X, Z, Y).

Channels compose by xor-convolution of their labels, which makes the
one- and two-qubit depolarizing channels and their combinations easy to
build exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

PAULI_LABELS = ("00", "01", "10", "11")  # sigma_(p,a): I, X, Z, Y

_SUM_TOL = 1e-3  # printed channel tables carry ~5 significant digits
_NEG_TOL = 1e-15


def _validated_vector(vec: np.ndarray, labels: tuple[str, ...]) -> np.ndarray:
    vec = np.asarray(vec, dtype=float)
    lo = vec.min()
    if lo < -_NEG_TOL:
        raise ValueError(f"negative channel weight {labels[int(vec.argmin())]} = {lo}")
    vec = np.clip(vec, 0.0, None)
    total = vec.sum()
    if total <= 0.0:
        raise ValueError("channel weights sum to zero")
    if abs(total - 1.0) > _SUM_TOL:
        raise ValueError(f"channel weights sum to {total}, expected 1")
    return vec / total


_JOINT_LABELS = tuple(f"f[{m}{n}]" for m in PAULI_LABELS for n in PAULI_LABELS)


def _validated(f: np.ndarray) -> np.ndarray:
    f = np.asarray(f, dtype=float).reshape(4, 4)
    return _validated_vector(f.ravel(), _JOINT_LABELS).reshape(4, 4)


@dataclass(frozen=True)
class NoiseModel:
    """Joint Pauli error probabilities f[mu, nu] on the (source, target) qubits."""

    f: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "f", _validated(self.f))
        self.f.setflags(write=False)

    @property
    def f00(self) -> float:
        """Probability that no error occurs."""
        return float(self.f[0, 0])

    def source_marginal(self) -> np.ndarray:
        return self.f.sum(axis=1)

    def target_marginal(self) -> np.ndarray:
        return self.f.sum(axis=0)

    def to_binary(self) -> "BinaryNoiseModel":
        """Inverse of :meth:`BinaryNoiseModel.embed`; requires support on {I, X}^2."""
        outside = self.f.sum() - self.f[:2, :2].sum()
        if outside > 1e-12:
            raise ValueError(f"channel has weight {outside} outside the (I, X) block")
        b = self.f[:2, :2]
        return BinaryNoiseModel(b[0, 0], b[0, 1], b[1, 0], b[1, 1])


@dataclass(frozen=True)
class BinaryNoiseModel:
    """Two-bit correlated spin-flip channel: I or X on each of the two qubits."""

    f00: float
    f01: float
    f10: float
    f11: float

    def __post_init__(self):
        names = ("f00", "f01", "f10", "f11")
        vec = _validated_vector(np.array([self.f00, self.f01, self.f10, self.f11]), names)
        for name, v in zip(names, vec):
            object.__setattr__(self, name, float(v))

    @property
    def fs(self) -> float:
        """Combined weight of the one-sided flips."""
        return self.f01 + self.f10

    def embed(self) -> NoiseModel:
        f = np.zeros((4, 4))
        f[:2, :2] = [[self.f00, self.f01], [self.f10, self.f11]]
        return NoiseModel(f)

    @classmethod
    def uncorrelated(cls, f0: float) -> "BinaryNoiseModel":
        """Independent flips: no-flip probability f0 on each qubit."""
        if not 0.0 <= f0 <= 1.0:
            raise ValueError(f"f0 = {f0} outside [0, 1]")
        f1 = 1.0 - f0
        return cls(f0 * f0, f0 * f1, f1 * f0, f1 * f1)


def general(f16) -> NoiseModel:
    """Validate an arbitrary 16-entry probability table (any 4x4-shapeable array)."""
    return NoiseModel(np.asarray(f16, dtype=float).reshape(4, 4))


def product(fa, fb) -> NoiseModel:
    """Uncorrelated noise f[mu, nu] = fa[mu] * fb[nu] from two single-qubit tables."""
    fa = np.asarray(fa, dtype=float)
    fb = np.asarray(fb, dtype=float)
    if fa.shape != (4,) or fb.shape != (4,):
        raise ValueError("product expects two length-4 probability vectors")
    return NoiseModel(np.outer(fa, fb))


def one_qubit_white(f0: float) -> np.ndarray:
    """Single-qubit white noise: weight f0 on I, the rest split evenly."""
    if not 0.0 <= f0 <= 1.0:
        raise ValueError(f"f0 = {f0} outside [0, 1]")
    r = (1.0 - f0) / 3.0
    return np.array([f0, r, r, r])


def compose(n1: NoiseModel, n2: NoiseModel) -> NoiseModel:
    """Concatenation of two channels: xor-convolution of the label tables."""
    out = np.zeros((4, 4))
    for m1 in range(4):
        for n1_ in range(4):
            w = n1.f[m1, n1_]
            if w == 0.0:
                continue
            for m2 in range(4):
                for n2_ in range(4):
                    out[m1 ^ m2, n1_ ^ n2_] += w * n2.f[m2, n2_]
    return NoiseModel(out)


def _depolarizing_one(p: float) -> np.ndarray:
    # rho -> p rho + (1-p) * maximally mixed, as Pauli weights
    return np.array([(1.0 + 3.0 * p) / 4.0] + [(1.0 - p) / 4.0] * 3)


def _depolarizing_two(p: float) -> NoiseModel:
    f = np.full((4, 4), (1.0 - p) / 16.0)
    f[0, 0] += p
    return NoiseModel(f)


def from_p1_p2(p1: float, p2: float, both_labs: bool = False) -> NoiseModel:
    """Combined one- and two-qubit white noise with reliabilities p1 and p2.

    Each qubit sees a one-qubit depolarizing channel (reliability p1) and the
    pair sees a two-qubit depolarizing channel (reliability p2).  With
    ``both_labs`` the parameters describe identical apparatus in both labs;
    depolarizing channels form a semigroup, so that equals a single-lab
    channel with squared reliabilities.
    """
    if not (0.0 <= p1 <= 1.0 and 0.0 <= p2 <= 1.0):
        raise ValueError(f"reliabilities (p1, p2) = ({p1}, {p2}) outside [0, 1]")
    if both_labs:
        p1, p2 = p1 * p1, p2 * p2
    single = _depolarizing_one(p1)
    return compose(product(single, single), _depolarizing_two(p2))


def binary(f00: float, f01: float, f10: float, f11: float) -> BinaryNoiseModel:
    return BinaryNoiseModel(f00, f01, f10, f11)


# --- flat key-value (de)serialization ------------------------------------

def noise_to_config(model: NoiseModel | BinaryNoiseModel) -> dict[str, str]:
    if isinstance(model, BinaryNoiseModel):
        return {
            "model": "binary",
            "f00": repr(model.f00),
            "f01": repr(model.f01),
            "f10": repr(model.f10),
            "f11": repr(model.f11),
        }
    cfg = {"model": "general"}
    for mu in range(4):
        for nu in range(4):
            cfg[f"f.{PAULI_LABELS[mu]}{PAULI_LABELS[nu]}"] = repr(float(model.f[mu, nu]))
    return cfg


def noise_from_config(cfg: Mapping[str, str]) -> NoiseModel | BinaryNoiseModel:
    """Build a channel from flat key-value settings.

    ``model`` selects the family: ``white`` (key f0), ``binary`` (keys
    f00..f11, or f0 for uncorrelated flips), ``p1p2`` (keys p1, p2, optional
    both_labs), or ``general`` (16 keys f.<mu><nu> with two-bit labels).
    """
    kind = cfg.get("model", "general")
    if kind == "white":
        w = one_qubit_white(float(cfg["f0"]))
        return product(w, w)
    if kind == "binary":
        if "f0" in cfg:
            return BinaryNoiseModel.uncorrelated(float(cfg["f0"]))
        return BinaryNoiseModel(
            float(cfg["f00"]), float(cfg["f01"]), float(cfg["f10"]), float(cfg["f11"])
        )
    if kind == "p1p2":
        both = cfg.get("both_labs", "false").strip().lower() in ("1", "true", "yes")
        return from_p1_p2(float(cfg["p1"]), float(cfg["p2"]), both_labs=both)
    if kind == "general":
        f = np.zeros((4, 4))
        for mu in range(4):
            for nu in range(4):
                key = f"f.{PAULI_LABELS[mu]}{PAULI_LABELS[nu]}"
                if key not in cfg:
                    raise KeyError(f"missing channel weight {key}")
                f[mu, nu] = float(cfg[key])
        return NoiseModel(f)
    raise ValueError(f"unknown noise model kind {kind!r}")
