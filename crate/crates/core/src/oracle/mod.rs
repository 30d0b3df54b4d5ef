//! Brute-force verifiers that share no code path with the analytic engine.

pub mod determinant;
pub mod finite_difference;
pub mod flow;
pub mod quantum;
pub mod suite;

pub use determinant::{cofactor_determinant, reaction_trace_determinant_extended};
pub use finite_difference::{finite_difference_check, FdReport};
pub use flow::{integrate_flow_and_variations, FlowResult, PhaseState};
pub use quantum::{
    ehrenfest_time, inverted_oscillator_otoc_exact, quantum_otoc_inverted_oscillator, QuantumGridConfig,
    QuantumOtoc,
};
pub use suite::{run_suite, CheckRow};
