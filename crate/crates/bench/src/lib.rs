//! Shared inputs for the benchmarks, fixed by seed so runs are comparable.

use tqc_core::{haar_random_unitary, random_circuit, Circuit, ComplexMatrix, StateVector};

/// Haar-random unitaries of dimension `d`.
pub fn unitaries(d: usize, count: usize, seed: u64) -> Vec<ComplexMatrix> {
    (0..count as u64)
        .map(|i| haar_random_unitary(d, seed + i).expect("dimension is valid"))
        .collect()
}

/// A random qutrit circuit on `width` wires with `len` gates, and the
/// all-zero input state.
pub fn circuit_and_state(width: usize, len: usize, seed: u64) -> (Circuit, StateVector) {
    let c = random_circuit(3, width, len, seed).expect("parameters are valid");
    let s = StateVector::basis(3, &vec![0; width]).expect("basis state is valid");
    (c, s)
}
