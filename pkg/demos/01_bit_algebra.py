# How the purification circuit moves Bell states around, in two bits.
#
# A Bell state is a (phase bit, amplitude bit) pair and every ingredient of
# the protocol -- Pauli errors, the bilateral rotations, the BCNOT, the
# keep/discard decision -- is xor arithmetic on those bits.  This script
# walks through the mapping table and double-checks a few identities against
# the dense 16-dimensional matrix picture.

import itertools

from eppsim import (
    ALL_BELLS,
    ALL_PAULIS,
    epp_unitary,
    epp_with_errors,
    error_corrector,
    flag_update,
)
from eppsim.bellbits import BELL_NAMES, PAULI_NAMES, ALL_FLAGS
from eppsim.matrixoracle import circuit_matrix, error_operator, phase_free_equal, two_pair_vector

print("Circuit action on (source, target) Bell pairs:")
for src, tgt in itertools.product(ALL_BELLS, repeat=2):
    out_s, out_t = epp_unitary(src, tgt)
    fate = "keep" if out_t.amplitude == 0 else "drop"
    print(
        f"  {BELL_NAMES[src]:>4} x {BELL_NAMES[tgt]:<4} -> "
        f"{BELL_NAMES[out_s]:>4} (target {BELL_NAMES[out_t]}, {fate})"
    )

print("\nError correctors (the Pauli pair that undoes an earlier error):")
for e_src, e_tgt in itertools.product(ALL_PAULIS, repeat=2):
    c_src, c_tgt = error_corrector(e_src, e_tgt)
    print(
        f"  {PAULI_NAMES[e_src]} x {PAULI_NAMES[e_tgt]}  ->  "
        f"{PAULI_NAMES[c_src]} x {PAULI_NAMES[c_tgt]}"
    )

print("\nFlag update for the kept pair (source flag down, target flag across):")
header = "        " + "  ".join(f"({f.phase_error}{f.amplitude_error})" for f in ALL_FLAGS)
print(header)
for f_src in ALL_FLAGS:
    cells = [flag_update(f_src, f_tgt) for f_tgt in ALL_FLAGS]
    row = "  ".join(f"({c.phase_error}{c.amplitude_error})" for c in cells)
    print(f"  ({f_src.phase_error}{f_src.amplitude_error})  {row}")

# Spot-check the whole construction against dense matrices, up to phases.
epp = circuit_matrix("epp")
checks = 0
for src, tgt in itertools.product(ALL_BELLS, repeat=2):
    for e_src, e_tgt in itertools.product(ALL_PAULIS, repeat=2):
        got = epp @ error_operator(e_src, e_tgt) @ two_pair_vector(src, tgt)
        want = two_pair_vector(*epp_with_errors(src, tgt, e_src, e_tgt))
        assert phase_free_equal(got, want)
        checks += 1
print(f"\nDense-matrix cross-check: {checks} error/state combinations agree.")
