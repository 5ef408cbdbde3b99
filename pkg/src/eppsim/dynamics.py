"""Fixpoint iteration, stability analysis, critical-noise search, regimes.

The distillation dynamics has three regimes of noise strength.  With strong
noise the protocol cannot purify and the fidelity decays to 1/4.  With weak
noise it purifies *and* the conditional fidelity (fidelity given the error
flags) converges to one, so the flags carry full information about the
surviving pairs -- the security regime.  In a narrow window in between, the
protocol purifies but the conditional fidelity stalls below one.  The
boundary of the security regime is located by bisecting on the asymptotic
conditional fidelity; convergence times diverge there, much like a phase
transition.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import curve_fit

from .noisemodels import BinaryNoiseModel, NoiseModel, one_qubit_white, product
from .recurrence import (
    BellDiagonalState,
    BinaryFlaggedState,
    EnsembleAnnihilated,
    FlaggedEnsembleState,
    QuadraticMap,
    binary_quadratic_map,
    binary_step_raw,
    embed,
    generate_map,
)

try:  # JIT for the scalar probe loop; pure Python otherwise
    from numba import njit as _njit
except Exception:  # pragma: no cover - numba is optional
    _njit = None

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 100_000

#: Asymptotic conditional fidelity must reach 1 - SECURITY_EPS to call a
#: noise setting secure during bisection.
SECURITY_EPS = 1e-9

#: Probe ensemble for classification and critical searches.
PROBE_FIDELITY = 0.85


class Regime(Enum):
    HIGH_NOISE = "high-noise"
    INTERMEDIATE = "intermediate"
    SECURITY = "security"


@dataclass(frozen=True)
class FixpointResult:
    state: FlaggedEnsembleState | BinaryFlaggedState | BellDiagonalState
    iterations: int
    converged: bool
    residual: float
    failure: str | None = None

    @property
    def fidelity(self) -> float:
        return self.state.fidelity

    @property
    def conditional_fidelity(self) -> float:
        return self.state.conditional_fidelity


def _as_quadratic_map(noise_or_map) -> QuadraticMap:
    if isinstance(noise_or_map, QuadraticMap):
        return noise_or_map
    if isinstance(noise_or_map, NoiseModel):
        return generate_map(noise_or_map)
    if isinstance(noise_or_map, BinaryNoiseModel):
        return binary_quadratic_map(noise_or_map)
    raise TypeError(f"expected a QuadraticMap or noise model, got {type(noise_or_map)!r}")


def _iterate_array(a: np.ndarray, qmap: QuadraticMap, tol: float, max_iter: int):
    m2 = qmap._m2
    iterations = 0
    residual = np.inf
    for iterations in range(1, max_iter + 1):
        q = m2 @ np.multiply.outer(a, a).ravel()
        keep = q.sum()
        if keep <= 1e-15:
            raise EnsembleAnnihilated(f"keep probability {keep} at iteration {iterations}")
        nxt = q / keep
        residual = float(np.max(np.abs(nxt - a)))
        a = nxt
        if residual <= tol:
            return a, iterations, True, residual
    return a, iterations, False, residual


def _iterate_binary(s: BinaryFlaggedState, noise: BinaryNoiseModel, tol, max_iter):
    a0, a1, b0, b1 = s.a0, s.a1, s.b0, s.b1
    f00, f11, fs = noise.f00, noise.f11, noise.fs
    residual = np.inf
    iterations = 0
    for iterations in range(1, max_iter + 1):
        na0, na1, nb0, nb1, _ = binary_step_raw(a0, a1, b0, b1, f00, f11, fs)
        residual = max(abs(na0 - a0), abs(na1 - a1), abs(nb0 - b0), abs(nb1 - b1))
        a0, a1, b0, b1 = na0, na1, nb0, nb1
        if residual <= tol:
            return (a0, a1, b0, b1), iterations, True, residual
    return (a0, a1, b0, b1), iterations, False, residual


def iterate_to_fixpoint(
    s0,
    noise_or_map,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> FixpointResult:
    """Iterate the purification step until the max-norm step delta is <= tol.

    Accepts a flagged 16-variable state with a matching map or noise model, a
    binary state with a binary noise model, or a plain Bell-diagonal state
    with the 4-variable ideal map.  Annihilation of the ensemble is reported
    as non-convergence with a cause.
    """
    if isinstance(s0, BinaryFlaggedState) and isinstance(noise_or_map, BinaryNoiseModel):
        try:
            vec, it, ok, res = _iterate_binary(s0, noise_or_map, tol, max_iter)
        except EnsembleAnnihilated as exc:
            return FixpointResult(s0, 0, False, np.inf, failure=str(exc))
        return FixpointResult(BinaryFlaggedState(*vec), it, ok, res)

    qmap = _as_quadratic_map(noise_or_map)
    if isinstance(s0, FlaggedEnsembleState):
        a, wrap = s0.flat, lambda v: FlaggedEnsembleState(v.reshape(4, 4))
    elif isinstance(s0, BinaryFlaggedState):
        a, wrap = s0.as_array, lambda v: BinaryFlaggedState(*v)
    elif isinstance(s0, BellDiagonalState):
        a, wrap = s0.coeffs, lambda v: BellDiagonalState(v)
    else:
        raise TypeError(f"unsupported state type {type(s0)!r}")
    if qmap.dim != a.shape[0]:
        raise ValueError(f"state has {a.shape[0]} variables but map has {qmap.dim}")
    try:
        vec, it, ok, res = _iterate_array(a.copy(), qmap, tol, max_iter)
    except EnsembleAnnihilated as exc:
        return FixpointResult(s0, 0, False, np.inf, failure=str(exc))
    return FixpointResult(wrap(vec), it, ok, res)


def binary_fixpoint_analytic(f0: float) -> BinaryFlaggedState:
    """Closed-form fixpoint of the binary recurrence with uncorrelated flips.

    Valid for f0 >= 3/4 (the radicand 4 f0 - 3 must be nonnegative).
    """
    if f0 < 0.75:
        raise ValueError(f"f0 = {f0} < 3/4: fixpoint formula undefined")
    if f0 > 1.0:
        raise ValueError(f"f0 = {f0} > 1")
    root = np.sqrt(4.0 * f0 - 3.0)
    a0 = (4.0 * f0 * f0 - 4.0 * f0 + (2.0 * f0 - 1.0) * root + 1.0) / (
        2.0 * (2.0 * f0 - 1.0) ** 2
    )
    return BinaryFlaggedState(a0, 0.0, 0.0, 1.0 - a0)


def jacobian(qmap: QuadraticMap, state) -> np.ndarray:
    """Exact derivative matrix of the normalized step at a state.

    Rows are output components, columns input components:
    d a'_j / d a_k = [2 (M_j a)_k - a'_j * 2 (S a)_k] / N with S = sum_j M_j.
    """
    if hasattr(state, "flat"):
        a = state.flat
    elif hasattr(state, "as_array"):
        a = state.as_array
    elif hasattr(state, "coeffs"):
        a = state.coeffs
    else:
        a = np.asarray(state, dtype=float)
    ma = qmap.m @ a  # (j, k) = (M_j a)_k, using symmetry of M_j
    q = ma @ a
    n = q.sum()
    if n <= 1e-15:
        raise EnsembleAnnihilated(f"keep probability {n}")
    sa = ma.sum(axis=0)
    return (2.0 * ma - 2.0 * np.outer(q / n, sa)) / n


def spectral_radius(m: np.ndarray) -> float:
    """Largest eigenvalue modulus of a square matrix."""
    m = np.asarray(m, dtype=float)
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return float(np.max(np.abs(np.linalg.eigvals(m))))


# --- critical-noise search -------------------------------------------------

def binary_family(f0: float) -> tuple[BinaryNoiseModel, BinaryFlaggedState]:
    """Uncorrelated spin-flip noise of strength 1 - f0, with the standard probe."""
    return BinaryNoiseModel.uncorrelated(f0), BinaryFlaggedState(
        PROBE_FIDELITY, 0.0, 1.0 - PROBE_FIDELITY, 0.0
    )


_WHITE_MAP_CACHE: dict[float, QuadraticMap] = {}


def white_noise_family(f0: float) -> tuple[QuadraticMap, FlaggedEnsembleState]:
    """One-qubit white noise on both qubits, with the standard Werner probe."""
    qmap = _WHITE_MAP_CACHE.get(f0)
    if qmap is None:
        w = one_qubit_white(f0)
        qmap = generate_map(product(w, w))
        if len(_WHITE_MAP_CACHE) > 256:
            _WHITE_MAP_CACHE.clear()
        _WHITE_MAP_CACHE[f0] = qmap
    return qmap, embed(BellDiagonalState.werner(PROBE_FIDELITY))


def _binary_probe(f00, f11, fs, a0, a1, b0, b1, target, settle, max_iter) -> int:
    # Scalar loop, kept jit-friendly: returns 1 as soon as the conditional
    # fidelity crosses `target`, 0 once the iteration settles below it or
    # the budget runs out.
    f0011 = f00 + f11
    for _ in range(max_iter):
        sa = a0 + a1
        sb = b0 + b1
        n = f0011 * (sa * sa + sb * sb) + 2.0 * fs * sa * sb
        if n <= 1e-15:
            return 0
        na0 = (
            f00 * (a0 * a0 + 2.0 * a0 * a1)
            + f11 * (b1 * b1 + 2.0 * b0 * b1)
            + fs * (a0 * b1 + a1 * b1 + a0 * b0)
        ) / n
        na1 = (f00 * a1 * a1 + f11 * b0 * b0 + fs * a1 * b0) / n
        nb0 = (
            f00 * (b0 * b0 + 2.0 * b0 * b1)
            + f11 * (a1 * a1 + 2.0 * a0 * a1)
            + fs * (b0 * a1 + b1 * a1 + b0 * a0)
        ) / n
        nb1 = (f00 * b1 * b1 + f11 * a0 * a0 + fs * b1 * a0) / n
        if na0 + nb1 >= target:
            return 1
        res = max(abs(na0 - a0), abs(na1 - a1), abs(nb0 - b0), abs(nb1 - b1))
        a0, a1, b0, b1 = na0, na1, nb0, nb1
        if res <= settle:
            return 0
    return 0


if _njit is not None:
    _binary_probe = _njit(cache=True)(_binary_probe)


def _secure_at(family, param, tol, max_iter) -> bool:
    """Dynamical security indicator with early exit.

    Secure as soon as the conditional fidelity crosses its target; insecure
    once the iteration has settled below it, or on budget truncation (below
    the boundary the truncated value stays below the target).  Settling is
    detected two orders below the step tolerance: near the boundary the map's
    spectral gap is tiny and a residual of ``tol`` still leaves the
    conditional fidelity measurably short of its limit.
    """
    noise_or_map, start = family(param)
    target = 1.0 - SECURITY_EPS
    settle = max(tol * 1e-2, 5e-16)
    if isinstance(noise_or_map, BinaryNoiseModel) and isinstance(start, BinaryFlaggedState):
        return bool(
            _binary_probe(
                noise_or_map.f00,
                noise_or_map.f11,
                noise_or_map.fs,
                start.a0,
                start.a1,
                start.b0,
                start.b1,
                target,
                settle,
                max_iter,
            )
        )
    qmap = _as_quadratic_map(noise_or_map)
    a = start.flat if isinstance(start, FlaggedEnsembleState) else np.asarray(start)
    m2 = qmap._m2
    for _ in range(max_iter):
        q = m2 @ np.multiply.outer(a, a).ravel()
        keep = q.sum()
        if keep <= 1e-15:
            return False
        nxt = q / keep
        if nxt.reshape(4, 4).trace() >= target:
            return True
        res = np.max(np.abs(nxt - a))
        a = nxt
        if res <= settle:
            return False
    return False


def find_critical(
    family: Callable[[float], tuple],
    bracket: tuple[float, float],
    halvings: int = 40,
    tol: float = DEFAULT_TOL,
    max_iter: int = 500_000,
) -> float:
    """Bisect a one-parameter noise family for the security boundary.

    ``family(param)`` must return (noise or map, start state).  The security
    indicator is the dynamical outcome: the conditional fidelity reached from
    the family's probe state.  Raises ValueError when the indicator does not
    change across the bracket.
    """
    lo, hi = bracket
    if not lo < hi:
        raise ValueError(f"bracket ({lo}, {hi}) is not increasing")
    sec_lo = _secure_at(family, lo, tol, max_iter)
    sec_hi = _secure_at(family, hi, tol, max_iter)
    if sec_lo == sec_hi:
        raise ValueError(
            f"security indicator does not change across ({lo}, {hi}): both {sec_lo}"
        )
    for _ in range(halvings):
        mid = 0.5 * (lo + hi)
        if _secure_at(family, mid, tol, max_iter) == sec_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# --- regimes ----------------------------------------------------------------

def classify_regime(
    noise: NoiseModel | BinaryNoiseModel | QuadraticMap,
    s0=None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> Regime:
    """Classify a noise setting by the asymptotics of the probe ensemble.

    Security requires purification (asymptotic fidelity > 1/2) together with
    the conditional fidelity converging to one; fidelity <= 1/2 is the
    high-noise regime; anything else is intermediate.  Non-convergence within
    the budget is reported as intermediate with a warning, since convergence
    times diverge near the regime boundaries.
    """
    if s0 is None:
        if isinstance(noise, BinaryNoiseModel):
            s0 = BinaryFlaggedState(PROBE_FIDELITY, 0.0, 1.0 - PROBE_FIDELITY, 0.0)
        else:
            s0 = embed(BellDiagonalState.werner(PROBE_FIDELITY))
    result = iterate_to_fixpoint(s0, noise, tol=tol, max_iter=max_iter)
    if not result.converged:
        warnings.warn(
            f"no fixpoint within {max_iter} iterations "
            f"(residual {result.residual}); classifying as intermediate",
            RuntimeWarning,
            stacklevel=2,
        )
        if result.failure is None and result.fidelity <= 0.5 + 1e-6:
            return Regime.HIGH_NOISE
        return Regime.INTERMEDIATE
    # 1e-6 fuzz: boundary fixpoints are approached from above at finite tol
    if result.fidelity <= 0.5 + 1e-6:
        return Regime.HIGH_NOISE
    if result.conditional_fidelity >= 1.0 - 1e-6:
        return Regime.SECURITY
    return Regime.INTERMEDIATE


def regime_scan(
    f00: float,
    samples: int,
    seed: int,
    tol: float = DEFAULT_TOL,
    max_iter: int = 30_000,
) -> dict[Regime, float]:
    """Relative regime frequencies for random channels with fixed f[00].

    The 15 free weights are drawn uniformly on the simplex of mass 1 - f00.
    """
    if not 0.0 <= f00 <= 1.0:
        raise ValueError(f"f00 = {f00} outside [0, 1]")
    rng = np.random.default_rng(seed)
    counts = {regime: 0 for regime in Regime}
    for _ in range(samples):
        free = rng.dirichlet(np.ones(15)) * (1.0 - f00)
        f = np.empty(16)
        f[0] = f00
        f[1:] = free
        noise = NoiseModel(f.reshape(4, 4))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            counts[classify_regime(noise, tol=tol, max_iter=max_iter)] += 1
    return {regime: counts[regime] / samples for regime in Regime}


# --- purification curve and the intermediate-regime fit ---------------------

def purification_curve(
    noise: BinaryNoiseModel | NoiseModel | QuadraticMap,
    n_max: int,
    segment_points: int = 32,
    start=None,
) -> list[np.ndarray]:
    """Conditional-fidelity return map as concatenated curve segments.

    A seed state and its one-step image are joined by a straight line in
    state space; pushing that line through the n-th iterate of the step and
    reading off (F_cond before, F_cond after) gives segment n.  Segments join
    continuously because the line's endpoints are one step apart.
    """
    if isinstance(noise, BinaryNoiseModel):
        qmap = binary_quadratic_map(noise)
        x0 = np.array([0.6, 0.0, 0.4, 0.0]) if start is None else start.as_array
        cond = lambda v: v[0] + v[3]
    else:
        qmap = _as_quadratic_map(noise)
        if start is None:
            start = embed(BellDiagonalState.werner(PROBE_FIDELITY))
        x0 = start.flat
        cond = lambda v: v.reshape(4, 4).trace()
    x1, _ = qmap.apply(x0)
    ts = np.linspace(0.0, 1.0, segment_points)
    line = [(1.0 - t) * x0 + t * x1 for t in ts]
    segments = []
    for _ in range(n_max):
        seg = np.empty((segment_points, 2))
        nxt = []
        for k, v in enumerate(line):
            image, _ = qmap.apply(v)
            seg[k] = (cond(v), cond(image))
            nxt.append(image)
        segments.append(seg)
        line = nxt
    return segments


def fit_intermediate(points: Sequence[tuple[float, float]]) -> tuple[float, float, float]:
    """Least-squares fit of c0 + c1 * sqrt(f0 - x0) to (f0, F_cond) samples.

    Returns (offset c0, scale c1, onset x0).
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 5:
        raise ValueError("need at least 5 (f0, F_cond) points")
    x, y = pts[:, 0], pts[:, 1]

    def model(f0, c0, c1, x0):
        return c0 + c1 * np.sqrt(np.clip(f0 - x0, 0.0, None))

    try:
        popt, _ = curve_fit(
            model,
            x,
            y,
            p0=(y.min(), 1.0, x.min() - 1e-3),
            bounds=([-np.inf, 0.0, -np.inf], [np.inf, np.inf, x.min()]),
            maxfev=20_000,
        )
    except RuntimeError as exc:
        raise ValueError(f"square-root fit did not converge: {exc}") from exc
    return float(popt[0]), float(popt[1]), float(popt[2])
