//! Qutrit and qudit circuit synthesis: gate library, circuit IR and
//! simulator, one-qudit decompositions into two-level rotations, and
//! constructions of standard multi-qutrit gates.

pub mod circuit;
pub mod decompose;
pub mod error;
pub mod gates;
pub mod numerics;
pub mod synthlib;

pub use circuit::{
    apply, circuit_unitary, emit_circuit, gate_counts, parse_circuit, random_circuit, Circuit, CircuitGate, Control,
    GateCounts, StateVector,
};
pub use decompose::{
    cartan_csd_2_1, decompose_qudit, decompose_qutrit, euler_decompose, CartanFactors, DecompositionResult,
    EulerAngles, EulerMode, Template,
};
pub use error::{Error, Result};
pub use gates::{controlled_gate, gate_matrix, Axis, ControlSpec, GateKind, ShiftGate, SubspacePair};
pub use numerics::{dagger, equal_up_to_phase, haar_random_unitary, is_unitary, mat_mul, tensor, ComplexMatrix, C64};
