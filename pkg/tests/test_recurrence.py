"""The map generator against its closed forms, exactly where possible.

The noiseless and binary reductions are checked coefficient by coefficient
in rational arithmetic: evaluating the generator at unit noise tables (all
weight on one Pauli pair) recovers the exact polynomial coefficient of that
table entry in every quadratic form, because the matrices are linear in the
noise weights.
"""

import itertools
import json
from fractions import Fraction

import numpy as np
import pytest

from eppsim.noisemodels import BinaryNoiseModel, NoiseModel, binary, general, product
from eppsim.recurrence import (
    BINARY_NAMES,
    COEFF_NAMES,
    BellDiagonalState,
    BinaryFlaggedState,
    EnsembleAnnihilated,
    FlaggedEnsembleState,
    QuadraticMap,
    binary_quadratic_map,
    binary_step,
    embed,
    generate_map,
    ideal_quadratic_map,
    ideal_step,
    marginal,
    routed_terms,
    step,
)

IDENTITY_TABLE = np.outer([1, 0, 0, 0], [1, 0, 0, 0])

# variable order (A0, A1, B0, B1) at cells (Phi+ flag 00, Phi+ flag 01,
# Psi+ flag 00, Psi+ flag 01)
BINARY_CELLS = {0: 0, 1: 1, 4: 2, 5: 3}


def exact_unit_matrices(mu, nu, cells=None):
    """Generator matrices for the unit noise table e_(mu,nu), as Fractions.

    With ``cells`` a cell->variable map, restricts to that sub-family and
    asserts closure.
    """
    dim = 16 if cells is None else len(cells)
    out = [[[Fraction(0)] * dim for _ in range(dim)] for _ in range(dim)]
    for s, t, m, n, o in routed_terms():
        if (m, n) != (mu, nu) or o is None:
            continue
        if cells is None:
            out[o][s][t] += 1
        elif s in cells and t in cells:
            assert o in cells, "sub-family not closed"
            out[cells[o]][cells[s]][cells[t]] += 1
    return [symmetrized(m) for m in out]


def symmetrized(m):
    dim = len(m)
    return [[(m[r][c] + m[c][r]) / 2 for c in range(dim)] for r in range(dim)]


def form_matrix(dim, entries):
    """Symmetric matrix of a quadratic form given {(i, j): coefficient}."""
    m = [[Fraction(0)] * dim for _ in range(dim)]
    for (i, j), c in entries.items():
        c = Fraction(c)
        if i == j:
            m[i][i] += c
        else:
            m[i][j] += c / 2
            m[j][i] += c / 2
    return m


# --- exact closed-form recoveries ------------------------------------------


def test_noiseless_generator_is_ideal_recurrence_exactly():
    """Flag-0 restriction of the noiseless map, summed over output flags,
    equals the ideal quadratic forms with integer coefficients."""
    unit = exact_unit_matrices(0, 0)
    flag0 = [4 * b for b in range(4)]
    a, c, d, b = range(4)  # Bell-index order: letters A, C, D, B
    want = {
        a: form_matrix(4, {(a, a): 1, (b, b): 1}),
        c: form_matrix(4, {(c, c): 1, (d, d): 1}),
        d: form_matrix(4, {(a, b): 2}),
        b: form_matrix(4, {(c, d): 2}),
    }
    for out_bell in range(4):
        got = [
            [sum(unit[4 * out_bell + of][r][cc] for of in range(4)) for cc in flag0]
            for r in flag0
        ]
        assert symmetrized(got) == want[out_bell]
    # noiseless + flag-zero input leaves no mass on nonzero output flags
    for out_cell in range(16):
        if out_cell % 4 == 0:
            continue
        assert all(unit[out_cell][r][cc] == 0 for r in flag0 for cc in flag0)


def test_binary_generator_matches_recurrence_coefficients_exactly():
    """Unit-table evaluation reproduces every monomial coefficient of the
    binary recurrence: the f00/f11 brackets, the one-sided-flip bracket once
    per table entry, and the keep probability."""
    a0, a1, b0, b1 = range(4)
    flip_bracket = [
        form_matrix(4, {(a0, b1): 1, (a1, b1): 1, (a0, b0): 1}),
        form_matrix(4, {(a1, b0): 1}),
        form_matrix(4, {(b0, a1): 1, (b1, a1): 1, (b0, a0): 1}),
        form_matrix(4, {(b1, a0): 1}),
    ]
    want = {
        (0, 0): [
            form_matrix(4, {(a0, a0): 1, (a0, a1): 2}),
            form_matrix(4, {(a1, a1): 1}),
            form_matrix(4, {(b0, b0): 1, (b0, b1): 2}),
            form_matrix(4, {(b1, b1): 1}),
        ],
        (1, 1): [
            form_matrix(4, {(b1, b1): 1, (b0, b1): 2}),
            form_matrix(4, {(b0, b0): 1}),
            form_matrix(4, {(a1, a1): 1, (a0, a1): 2}),
            form_matrix(4, {(a0, a0): 1}),
        ],
        (0, 1): flip_bracket,
        (1, 0): flip_bracket,
    }
    keep_same = form_matrix(4, {(a0, a0): 1, (a0, a1): 2, (a1, a1): 1,
                                (b0, b0): 1, (b0, b1): 2, (b1, b1): 1})
    keep_cross = form_matrix(
        4, {(a0, b0): 2, (a0, b1): 2, (a1, b0): 2, (a1, b1): 2}
    )
    for mu, nu in itertools.product((0, 1), repeat=2):
        got = exact_unit_matrices(mu, nu, cells=BINARY_CELLS)
        assert got == want[(mu, nu)], f"component mismatch for table entry {(mu, nu)}"
        total = [
            [sum(got[j][r][c] for j in range(4)) for c in range(4)] for r in range(4)
        ]
        assert total == (keep_same if mu == nu else keep_cross)


def test_binary_step_matches_restricted_generator():
    rng = np.random.default_rng(7)
    for _ in range(100):
        noise = binary(*rng.dirichlet(np.ones(4)))
        state = BinaryFlaggedState(*rng.dirichlet(np.ones(4)))
        expect, _ = binary_quadratic_map(noise).apply(state.as_array)
        got = binary_step(state, noise)
        assert np.abs(got.as_array - expect).max() < 1e-12


def test_full_generator_matches_binary_step_on_embedded_states():
    rng = np.random.default_rng(8)
    for _ in range(25):
        noise = binary(*rng.dirichlet(np.ones(4)))
        state = BinaryFlaggedState(*rng.dirichlet(np.ones(4)))
        full, n_full = step(state.embed(), generate_map(noise.embed()))
        small = binary_step(state, noise)
        assert full.a[0, 0] == pytest.approx(small.a0, abs=1e-12)
        assert full.a[0, 1] == pytest.approx(small.a1, abs=1e-12)
        assert full.a[1, 0] == pytest.approx(small.b0, abs=1e-12)
        assert full.a[1, 1] == pytest.approx(small.b1, abs=1e-12)


# --- quadratic map properties ------------------------------------------------


def test_map_matrices_symmetric_nonnegative():
    rng = np.random.default_rng(9)
    qm = generate_map(general(rng.dirichlet(np.ones(16))))
    assert qm.m.shape == (16, 16, 16)
    assert np.allclose(qm.m, qm.m.transpose(0, 2, 1))
    assert qm.m.min() >= 0.0
    assert qm.names == COEFF_NAMES


def test_keep_probability_at_most_one():
    rng = np.random.default_rng(10)
    for _ in range(10):
        qm = generate_map(general(rng.dirichlet(np.ones(16))))
        a = rng.dirichlet(np.ones(16))
        _, keep = qm.apply(a)
        assert 0.0 < keep <= 1.0 + 1e-12


def test_routed_terms_count():
    terms = list(routed_terms())
    assert len(terms) == 4096
    kept = [t for t in terms if t[-1] is not None]
    assert len(kept) == 2048  # half of all routings pass the keep test


# --- states and observables ---------------------------------------------------


def test_ideal_step_spot_values():
    s = ideal_step(BellDiagonalState.werner(0.7))
    assert s.a == pytest.approx(0.5 / 0.68, abs=1e-12)
    assert s.d == pytest.approx(0.14 / 0.68, abs=1e-12)
    pure = BellDiagonalState.from_abcd(1, 0, 0, 0)
    assert ideal_step(pure).a == 1.0


def test_ideal_step_attracts_above_half():
    rng = np.random.default_rng(11)
    for _ in range(10):
        rest = rng.dirichlet(np.ones(3)) * 0.35
        s = BellDiagonalState.from_abcd(0.65, *rest)
        for _ in range(200):
            s = ideal_step(s)
        assert s.a == pytest.approx(1.0, abs=1e-9)


def test_ideal_quadratic_map_matches_ideal_step():
    qm = ideal_quadratic_map()
    rng = np.random.default_rng(12)
    for _ in range(50):
        s = BellDiagonalState(rng.dirichlet(np.ones(4)))
        got, _ = qm.apply(s.coeffs)
        assert np.allclose(got, ideal_step(s).coeffs, atol=1e-14)


def test_step_noiseless_fixpoint_and_werner():
    qm = generate_map(general(IDENTITY_TABLE))
    pure = embed(BellDiagonalState.from_abcd(1, 0, 0, 0))
    nxt, keep = step(pure, qm)
    assert keep == pytest.approx(1.0, abs=1e-15)
    assert np.allclose(nxt.a, pure.a)
    werner, keep = step(embed(BellDiagonalState.werner(0.7)), qm)
    assert keep == pytest.approx(0.68, abs=1e-12)
    assert werner.marginal().a == pytest.approx(0.5 / 0.68, abs=1e-12)


def test_step_preserves_normalization_and_positivity():
    rng = np.random.default_rng(13)
    qm = generate_map(general(rng.dirichlet(np.ones(16))))
    s = FlaggedEnsembleState(rng.dirichlet(np.ones(16)).reshape(4, 4))
    for _ in range(50):
        s, _ = step(s, qm)
        assert s.a.min() >= 0.0
        assert s.a.sum() == pytest.approx(1.0, abs=1e-12)


def test_step_annihilation():
    # all weight on an X error on the target qubit: double Phi+ always discarded
    f = np.zeros((4, 4))
    f[0, 1] = 1.0
    qm = generate_map(NoiseModel(f))
    with pytest.raises(EnsembleAnnihilated):
        step(embed(BellDiagonalState.from_abcd(1, 0, 0, 0)), qm)


def test_perfect_correlation_closure():
    """Mass sitting only where flag equals Bell index stays that way."""
    rng = np.random.default_rng(14)
    for _ in range(20):
        noise = general(rng.dirichlet(np.ones(16)))
        a = np.zeros((4, 4))
        np.fill_diagonal(a, rng.dirichlet(np.ones(4)))
        s = FlaggedEnsembleState(a)
        assert s.conditional_fidelity == pytest.approx(1.0)
        out, _ = step(s, generate_map(noise))
        assert out.off_diagonal_mass() < 1e-14


def test_fidelity_and_conditional_fidelity():
    s = embed(BellDiagonalState.werner(0.7))
    assert s.fidelity == pytest.approx(0.7)
    assert s.conditional_fidelity == pytest.approx(0.7)  # only the flag-0 diagonal cell
    a = np.zeros((4, 4))
    np.fill_diagonal(a, [0.4, 0.3, 0.2, 0.1])
    assert FlaggedEnsembleState(a).conditional_fidelity == pytest.approx(1.0)


def test_embed_marginal_roundtrip():
    rng = np.random.default_rng(15)
    for _ in range(100):
        s = BellDiagonalState(rng.dirichlet(np.ones(4)))
        back = marginal(embed(s))
        assert np.allclose(back.coeffs, s.coeffs, atol=1e-15)


def test_letter_accessors_and_werner():
    s = BellDiagonalState.from_abcd(0.4, 0.3, 0.2, 0.1)
    assert (s.a, s.b, s.c, s.d) == pytest.approx((0.4, 0.3, 0.2, 0.1))
    assert s.fidelity == pytest.approx(0.4)
    w = BellDiagonalState.werner(0.85)
    assert w.a == pytest.approx(0.85)
    assert w.b == w.c == w.d == pytest.approx(0.05)


def test_state_validation():
    with pytest.raises(ValueError):
        BellDiagonalState(np.array([0.9, 0.2, 0.0, 0.0]))
    with pytest.raises(ValueError):
        FlaggedEnsembleState(-np.ones((4, 4)) / 16.0)
    with pytest.raises(ValueError):
        BinaryFlaggedState(0.5, 0.5, 0.5, 0.5)


def test_named_coeffs_and_json_roundtrip():
    rng = np.random.default_rng(16)
    s = FlaggedEnsembleState(rng.dirichlet(np.ones(16)).reshape(4, 4))
    named = s.named_coeffs()
    assert set(named) == set(COEFF_NAMES)
    assert named["A00"] == s.a[0, 0]
    back = FlaggedEnsembleState.from_named(json.loads(json.dumps(named)))
    assert np.allclose(back.a, s.a, atol=0)


def test_quadratic_map_json_roundtrip():
    qm = binary_quadratic_map(BinaryNoiseModel.uncorrelated(0.9))
    assert qm.names == BINARY_NAMES
    back = QuadraticMap.from_json_dict(json.loads(json.dumps(qm.to_json_dict())))
    assert np.allclose(back.m, qm.m, atol=0)
    assert back.names == qm.names
