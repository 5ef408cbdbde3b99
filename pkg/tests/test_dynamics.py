import warnings

import numpy as np
import pytest

from eppsim.dynamics import (
    Regime,
    binary_family,
    binary_fixpoint_analytic,
    classify_regime,
    find_critical,
    fit_intermediate,
    iterate_to_fixpoint,
    jacobian,
    purification_curve,
    regime_scan,
    spectral_radius,
    white_noise_family,
)
from eppsim.noisemodels import BinaryNoiseModel, general, one_qubit_white, product
from eppsim.recurrence import (
    BellDiagonalState,
    BinaryFlaggedState,
    binary_quadratic_map,
    binary_step,
    embed,
    generate_map,
    ideal_quadratic_map,
)

BINARY_CRITICAL = 0.77184451


def tracking_noise():
    f = np.full((4, 4), 0.0020968)
    f[0, :] = 0.0113896
    f[:, 0] = 0.0113896
    f[0, 0] = 0.91279120
    return general(f)


def white(f0):
    w = one_qubit_white(f0)
    return product(w, w)


def binary_probe():
    return BinaryFlaggedState(0.85, 0.0, 0.15, 0.0)


# --- fixpoint iteration -------------------------------------------------------


def test_ideal_map_iterates_to_pure_state():
    r = iterate_to_fixpoint(BellDiagonalState.werner(0.7), ideal_quadratic_map())
    assert r.converged
    assert r.fidelity == pytest.approx(1.0, abs=1e-11)


def test_security_regime_conditional_fidelity_converges_to_one():
    r = iterate_to_fixpoint(embed(BellDiagonalState.werner(0.85)), tracking_noise())
    assert r.converged
    assert r.conditional_fidelity >= 1.0 - 1e-9
    assert r.fidelity < 1.0


def test_high_noise_regime_converges_to_quarter():
    r = iterate_to_fixpoint(embed(BellDiagonalState.werner(0.85)), white(0.80))
    assert r.converged
    assert r.fidelity == pytest.approx(0.25, abs=1e-9)
    assert r.conditional_fidelity == pytest.approx(0.25, abs=1e-9)


def test_iterate_reports_annihilation():
    f = np.zeros((4, 4))
    f[0, 1] = 1.0
    from eppsim.noisemodels import NoiseModel

    r = iterate_to_fixpoint(
        embed(BellDiagonalState.from_abcd(1, 0, 0, 0)), NoiseModel(f)
    )
    assert not r.converged
    assert r.failure is not None and "keep probability" in r.failure


def test_iterate_dimension_mismatch():
    with pytest.raises(ValueError, match="variables"):
        iterate_to_fixpoint(BellDiagonalState.werner(0.7), generate_map(tracking_noise()))


# --- analytic binary fixpoint --------------------------------------------------


def test_binary_fixpoint_noiseless_is_exact():
    fp = binary_fixpoint_analytic(1.0)
    assert (fp.a0, fp.a1, fp.b0, fp.b1) == (1.0, 0.0, 0.0, 0.0)


@pytest.mark.parametrize("f0", [0.78, 0.8, 0.9, 1.0])
def test_binary_fixpoint_matches_iteration(f0):
    fp = binary_fixpoint_analytic(f0)
    r = iterate_to_fixpoint(
        binary_probe(), BinaryNoiseModel.uncorrelated(f0), tol=1e-14, max_iter=10**6
    )
    assert r.converged
    assert abs(r.state.a0 - fp.a0) < 1e-10
    assert abs(r.state.b1 - fp.b1) < 1e-10


def test_binary_fixpoint_is_fixed_under_step():
    rng = np.random.default_rng(20)
    for f0 in rng.uniform(0.78, 1.0, size=20):
        fp = binary_fixpoint_analytic(float(f0))
        nxt = binary_step(fp, BinaryNoiseModel.uncorrelated(float(f0)))
        assert np.abs(nxt.as_array - fp.as_array).max() < 1e-12


def test_binary_fixpoint_domain_error():
    with pytest.raises(ValueError):
        binary_fixpoint_analytic(0.74)


def test_marginal_stability_at_critical_point():
    fp = binary_fixpoint_analytic(BINARY_CRITICAL)
    qm = binary_quadratic_map(BinaryNoiseModel.uncorrelated(BINARY_CRITICAL))
    assert spectral_radius(jacobian(qm, fp)) == pytest.approx(1.0, abs=1e-6)


# --- jacobian / spectral radius -------------------------------------------------


def test_jacobian_matches_finite_differences():
    rng = np.random.default_rng(21)
    h = 1e-6
    for _ in range(50):
        qm = generate_map(general(rng.dirichlet(np.ones(16))))
        a = rng.dirichlet(np.ones(16))
        jac = jacobian(qm, a)
        for k in rng.choice(16, size=4, replace=False):
            ap = a.copy()
            ap[k] += h
            am = a.copy()
            am[k] -= h
            fd = (qm.apply(ap)[0] - qm.apply(am)[0]) / (2 * h)
            denom = max(1.0, np.abs(jac[:, k]).max())
            assert np.abs(fd - jac[:, k]).max() / denom < 1e-5


def test_ideal_fixpoint_is_attractive():
    qm = ideal_quadratic_map()
    assert spectral_radius(jacobian(qm, np.array([1.0, 0, 0, 0]))) < 1.0


@pytest.mark.parametrize("f0,stable", [(0.9, True), (0.76, False)])
def test_binary_stability_flips_at_critical(f0, stable):
    fp = binary_fixpoint_analytic(f0)
    qm = binary_quadratic_map(BinaryNoiseModel.uncorrelated(f0))
    rho = spectral_radius(jacobian(qm, fp))
    assert (rho < 1.0) is stable


def test_spectral_radius_basics():
    assert spectral_radius(np.eye(3)) == pytest.approx(1.0)
    assert spectral_radius(np.diag([0.5, -0.8])) == pytest.approx(0.8)
    with pytest.raises(ValueError):
        spectral_radius(np.array([[np.inf, 0], [0, 1]]))


# --- critical search -------------------------------------------------------------


def test_binary_critical_point():
    crit = find_critical(binary_family, (0.75, 0.85))
    assert crit == pytest.approx(BINARY_CRITICAL, abs=5e-6)


def test_white_noise_critical_point():
    crit = find_critical(white_noise_family, (0.88, 0.92), halvings=24, max_iter=30_000)
    assert 0.8983 < crit < 0.8988


def test_find_critical_needs_sign_change():
    with pytest.raises(ValueError, match="does not change"):
        find_critical(binary_family, (0.95, 1.0), halvings=4)
    with pytest.raises(ValueError, match="not increasing"):
        find_critical(binary_family, (0.85, 0.75))


# --- regimes ----------------------------------------------------------------------


def test_classify_regime_reference_points():
    assert classify_regime(tracking_noise()) is Regime.SECURITY
    assert classify_regime(BinaryNoiseModel.uncorrelated(0.76)) is Regime.INTERMEDIATE
    assert classify_regime(BinaryNoiseModel.uncorrelated(0.70)) is Regime.HIGH_NOISE
    assert classify_regime(white(0.90)) is Regime.SECURITY
    assert classify_regime(white(0.8983)) is Regime.HIGH_NOISE


def test_classify_regime_warns_when_budget_exhausted():
    with pytest.warns(RuntimeWarning, match="no fixpoint"):
        regime = classify_regime(tracking_noise(), max_iter=3)
    assert regime is Regime.INTERMEDIATE


def test_regime_scan_extremes():
    assert regime_scan(1.0, 16, seed=3)[Regime.SECURITY] == 1.0
    assert regime_scan(0.5, 16, seed=3)[Regime.HIGH_NOISE] == 1.0
    with pytest.raises(ValueError):
        regime_scan(1.2, 4, seed=0)


def test_regime_scan_security_fraction_monotone():
    grid = np.linspace(0.5, 1.0, 20)
    fracs = [regime_scan(float(f), 24, seed=11)[Regime.SECURITY] for f in grid]
    assert all(b >= a for a, b in zip(fracs, fracs[1:]))
    assert fracs[0] == 0.0 and fracs[-1] == 1.0


def test_regime_scan_deterministic_in_seed():
    one = regime_scan(0.85, 32, seed=42)
    two = regime_scan(0.85, 32, seed=42)
    assert one == two


# --- purification curve -------------------------------------------------------------


def test_noiseless_curve_lies_above_diagonal():
    segs = purification_curve(BinaryNoiseModel.uncorrelated(1.0), n_max=10)
    pts = np.vstack(segs)
    inside = pts[(pts[:, 0] > 0.5 + 1e-9) & (pts[:, 0] < 1.0 - 1e-9)]
    assert (inside[:, 1] > inside[:, 0]).all()


def test_curve_slope_at_fixpoint_near_critical():
    # marginally above the boundary the return map is tangent to the diagonal
    segs = purification_curve(
        BinaryNoiseModel.uncorrelated(BINARY_CRITICAL), n_max=3000, segment_points=8
    )
    pts = np.vstack(segs)
    tail = pts[-5:]
    slope = (np.diff(tail[:, 1]) / np.diff(tail[:, 0])).mean()
    assert slope == pytest.approx(1.0, abs=1e-3)

    segs = purification_curve(
        BinaryNoiseModel.uncorrelated(BINARY_CRITICAL + 0.002), n_max=600, segment_points=8
    )
    pts = np.vstack(segs)
    tail = pts[-5:]
    slope = (np.diff(tail[:, 1]) / np.diff(tail[:, 0])).mean()
    assert slope < 1.0 - 1e-4
    assert pts[-1, 0] > 1.0 - 1e-5  # the curve actually reaches the fixpoint


def test_curve_crosses_diagonal_at_interior_attractor():
    noise = BinaryNoiseModel.uncorrelated(0.76)
    attractor = iterate_to_fixpoint(binary_probe(), noise).conditional_fidelity
    assert 0.5 < attractor < 1.0 - 1e-9

    # from the standard seed the curve stays above the diagonal and ends there
    rising = np.vstack(purification_curve(noise, n_max=400))
    assert (rising[:, 1] >= rising[:, 0] - 1e-12).all()
    assert rising[-1, 0] == pytest.approx(attractor, abs=1e-6)

    # seeding near the (unstable) fully-correlated fixpoint produces a branch
    # that dips below the diagonal and crosses it at the interior attractor
    fp = binary_fixpoint_analytic(0.76).as_array
    start = BinaryFlaggedState(*(0.9 * fp + 0.1 * np.full(4, 0.25)))
    upper = np.vstack(purification_curve(noise, n_max=400, start=start))
    gap = upper[:, 1] - upper[:, 0]
    assert gap.min() < -1e-3
    flips = np.where(np.diff(np.sign(gap)) != 0)[0]
    assert np.abs(upper[flips, 0] - attractor).min() < 0.01
    assert upper[-1, 0] == pytest.approx(attractor, abs=1e-4)


def test_curve_on_full_model():
    segs = purification_curve(tracking_noise(), n_max=12, segment_points=8)
    pts = np.vstack(segs)
    assert pts[-1, 1] > 0.999  # security regime: heads for unit conditional fidelity


# --- square-root fit -----------------------------------------------------------------


def test_fit_recovers_synthetic_model():
    xs = np.linspace(0.755, 0.77, 9)
    pts = [(x, 0.5 + 3.4 * np.sqrt(x - 0.75)) for x in xs]
    c0, c1, x0 = fit_intermediate(pts)
    assert c0 == pytest.approx(0.5, abs=1e-6)
    assert c1 == pytest.approx(3.4, abs=1e-6)
    assert x0 == pytest.approx(0.75, abs=1e-6)


def test_fit_on_computed_intermediate_fixpoints():
    pts = []
    for f0 in np.linspace(0.7515, 0.7710, 12):
        r = iterate_to_fixpoint(
            binary_probe(), BinaryNoiseModel.uncorrelated(float(f0)), max_iter=500_000
        )
        pts.append((float(f0), r.conditional_fidelity))
    c0, c1, x0 = fit_intermediate(pts)
    assert c1 == pytest.approx(3.4, abs=0.34)
    assert c0 == pytest.approx(0.5, abs=0.02)
    assert x0 == pytest.approx(0.75, abs=0.002)


def test_fit_needs_five_points():
    with pytest.raises(ValueError, match="at least 5"):
        fit_intermediate([(0.76, 0.8), (0.77, 0.9)])


# --- convergence slowdown near criticality --------------------------------------------


def test_iteration_count_diverges_near_critical():
    def iterations(f0):
        r = iterate_to_fixpoint(
            binary_probe(),
            BinaryNoiseModel.uncorrelated(f0),
            tol=1e-12,
            max_iter=200_000,
        )
        assert r.converged
        return r.iterations

    near = min(iterations(BINARY_CRITICAL - 1e-3), iterations(BINARY_CRITICAL + 1e-3))
    far = iterations(0.9)
    assert near > far  # strictly slower at the boundary
    assert near >= 10 * far
